//! Synthetic-population simulator and coverage oracle.
//!
//! The simulator generates worlds in which the identification assumptions
//! hold by construction: positive results only for infected persons
//! (specificity one), one disease episode per person, each person tested at
//! most once, and test selection that favors the infected at least weakly
//! (testing monotonicity) whenever `triage_strength >= 1`. Running the
//! ingest→bounds pipeline on a world's exported surveillance counts and
//! checking that every interval contains the world's true infection rate is
//! the brute-force validity check for the whole engine.
//!
//! # Sampling recipe
//!
//! The generator is `ChaCha12Rng` seeded with `seed_from_u64(seed)`; every
//! draw below is `rng.gen::<f64>()`, uniform on [0, 1). The recipe is
//! normative — tests reimplement it verbatim and compare traces — so the
//! draw order is spelled out:
//!
//! For each day `d` in `0..horizon`:
//!
//! 1. **Infection sweep.** Visit persons in ascending id order. For each
//!    person not yet infected, draw `u`; the person becomes infected on day
//!    `d` if `u < daily_infection_hazard[d]`. Immediately after a person is
//!    infected, if severe hazards are configured, draw in this order:
//!    `u_hosp` (hospitalized if `u_hosp < p_hosp`); if hospitalized,
//!    `u_icu` (ICU if `u_icu < p_icu_given_hosp`); then `u_death` (dies if
//!    `u_death < p_death`). Hospital (and ICU) occupancy spans days
//!    `d + onset_lag_days` to `d + onset_lag_days + hosp_stay_days - 1`;
//!    death is recorded on day `d + onset_lag_days`.
//! 2. **Testing.** Let `I` be the ascending list of never-tested infected
//!    person ids and `U` the ascending list of never-tested uninfected ids
//!    (persons infected earlier the same day are already in `I`). Repeat
//!    `test_budget[d]` times, stopping early if both lists are empty:
//!    with `θ = triage_strength`, `W = θ·|I| + |U|`, draw `u` and let
//!    `x = u·W`. If `x < θ·|I|` select `I[⌊x/θ⌋]`, otherwise select
//!    `U[⌊x − θ·|I|⌋]` (indices capped at the list end). The selected
//!    person leaves their list. If the person is infected, draw `u_res`:
//!    the result is negative if `u_res < miss_rate_true`, else positive.
//!    Uninfected persons test negative without a draw.
//!
//! Selecting one person at a time with weight `θ` on the infected makes the
//! infected pool weakly over-represented among the tested for every
//! `θ >= 1`, which is exactly the testing-monotonicity assumption.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{compute_bound_series, AssumptionConfig, BoundMethod};
use crate::error::{Error, SimError};
use crate::ingest::{
    parse_region_series, write_canonical_csv, DailyRecord, RegionSeries, RepairMode, SeriesSpec,
};

/// First calendar day of the synthetic world (day index 0).
pub const SIM_EPOCH: fn() -> NaiveDate = || NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();

/// Severe-outcome generation: drawn only for infected persons, so
/// severe ⇒ infected holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SevereHazards {
    pub p_hosp: f64,
    pub p_icu_given_hosp: f64,
    pub p_death: f64,
    #[serde(default)]
    pub onset_lag_days: u32,
    #[serde(default = "default_stay")]
    pub hosp_stay_days: u32,
}

fn default_stay() -> u32 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub population: u32,
    pub horizon: u32,
    /// Per-day infection probability for each not-yet-infected person.
    /// A single entry is broadcast across the horizon.
    pub daily_infection_hazard: Vec<f64>,
    /// Tests administered per day. A single entry is broadcast.
    pub test_budget: Vec<u32>,
    /// Odds multiplier that a currently infected person is selected for
    /// testing relative to a non-infected person. Must be >= 1.
    pub triage_strength: f64,
    /// Probability an infected, tested person receives a negative result.
    pub miss_rate_true: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severe_hazards: Option<SevereHazards>,
    pub seed: u64,
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        self.validate_except_triage()?;
        if self.triage_strength < 1.0 {
            return Err(SimError::TriageBelowOne(self.triage_strength));
        }
        Ok(())
    }

    fn validate_except_triage(&self) -> Result<(), SimError> {
        if self.population == 0 {
            return Err(SimError::ZeroPopulation);
        }
        if self.horizon == 0 {
            return Err(SimError::ZeroHorizon);
        }
        for (name, len) in [
            ("daily_infection_hazard", self.daily_infection_hazard.len()),
            ("test_budget", self.test_budget.len()),
        ] {
            if len != 1 && len != self.horizon as usize {
                return Err(SimError::ScheduleLength {
                    name,
                    got: len,
                    expected: self.horizon as usize,
                });
            }
        }
        for &h in &self.daily_infection_hazard {
            if !(h.is_finite() && (0.0..=1.0).contains(&h)) {
                return Err(SimError::OutOfUnit {
                    name: "daily_infection_hazard",
                    value: h,
                });
            }
        }
        if !(self.miss_rate_true.is_finite() && (0.0..=1.0).contains(&self.miss_rate_true)) {
            return Err(SimError::OutOfUnit {
                name: "miss_rate_true",
                value: self.miss_rate_true,
            });
        }
        for &b in &self.test_budget {
            if b > self.population {
                return Err(SimError::BudgetExceedsPopulation {
                    budget: b,
                    population: self.population,
                });
            }
        }
        if !self.triage_strength.is_finite() || self.triage_strength <= 0.0 {
            return Err(SimError::TriageBelowOne(self.triage_strength));
        }
        Ok(())
    }

    fn hazard(&self, day: usize) -> f64 {
        if self.daily_infection_hazard.len() == 1 {
            self.daily_infection_hazard[0]
        } else {
            self.daily_infection_hazard[day]
        }
    }

    fn budget(&self, day: usize) -> u32 {
        if self.test_budget.len() == 1 {
            self.test_budget[0]
        } else {
            self.test_budget[day]
        }
    }
}

/// Latent truth for one person.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PersonRecord {
    pub infected_on: Option<u32>,
    pub tested_on: Option<u32>,
    pub test_positive: Option<bool>,
    pub hosp_admitted_on: Option<u32>,
    pub icu_admitted_on: Option<u32>,
    pub died_on: Option<u32>,
}

/// Realized per-day aggregates, computed after that day's testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DayAggregates {
    pub infected: u32,
    pub tested: u32,
    pub tested_infected: u32,
    pub tested_negative: u32,
    pub tested_negative_infected: u32,
    /// P(C_d = 1)
    pub true_infection_rate: f64,
    /// P(C_d = 1 | T_d = 1), None before anyone is tested
    pub tested_infection_rate: Option<f64>,
    /// P(C_d = 1 | T_d = 0), None if everyone has been tested
    pub untested_infection_rate: Option<f64>,
    /// P(C_d = 1 | T_d = 1, R_d = 0), None before any negative result
    pub realized_miss_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticWorld {
    pub params: SimParams,
    pub persons: Vec<PersonRecord>,
    pub days: Vec<DayAggregates>,
}

/// Generate a world. Deterministic given `params.seed`.
pub fn simulate(params: &SimParams) -> Result<SyntheticWorld, SimError> {
    params.validate()?;
    Ok(simulate_unchecked(params))
}

/// Like [`simulate`] but without the `triage_strength >= 1` check, so tests
/// can construct worlds that deliberately violate testing monotonicity.
/// All other parameter validation still applies.
pub fn simulate_unchecked(params: &SimParams) -> SyntheticWorld {
    params
        .validate_except_triage()
        .expect("invalid simulation parameters");
    let n = params.population as usize;
    let horizon = params.horizon as usize;
    let theta = params.triage_strength;
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);

    let mut persons = vec![PersonRecord::default(); n];
    let mut infected = vec![false; n];
    // Never-tested persons, split by current infection status, ascending id.
    let mut pool_infected: Vec<u32> = Vec::new();
    let mut pool_uninfected: Vec<u32> = (0..params.population).collect();

    let mut infected_count = 0u32;
    let mut tested_count = 0u32;
    let mut tested_infected = 0u32;
    let mut tested_negative = 0u32;
    let mut tested_negative_infected = 0u32;

    let mut days = Vec::with_capacity(horizon);
    for day in 0..horizon {
        // 1. Infection sweep in ascending id order.
        let hazard = params.hazard(day);
        for p in 0..n {
            if infected[p] {
                continue;
            }
            let u: f64 = rng.gen();
            if u < hazard {
                infected[p] = true;
                infected_count += 1;
                persons[p].infected_on = Some(day as u32);
                if let Some(h) = params.severe_hazards {
                    let u_hosp: f64 = rng.gen();
                    if u_hosp < h.p_hosp {
                        persons[p].hosp_admitted_on = Some(day as u32 + h.onset_lag_days);
                        let u_icu: f64 = rng.gen();
                        if u_icu < h.p_icu_given_hosp {
                            persons[p].icu_admitted_on = Some(day as u32 + h.onset_lag_days);
                        }
                    }
                    let u_death: f64 = rng.gen();
                    if u_death < h.p_death {
                        persons[p].died_on = Some(day as u32 + h.onset_lag_days);
                    }
                }
                let rec = &persons[p];
                if rec.tested_on.is_some() {
                    // A previously tested (necessarily negative) person
                    // caught the infection later.
                    tested_infected += 1;
                    tested_negative_infected += 1;
                } else {
                    let pos = pool_uninfected
                        .binary_search(&(p as u32))
                        .expect("untested uninfected person must be pooled");
                    pool_uninfected.remove(pos);
                    let ins = pool_infected
                        .binary_search(&(p as u32))
                        .unwrap_err();
                    pool_infected.insert(ins, p as u32);
                }
            }
        }

        // 2. Testing: weighted selection without replacement.
        for _ in 0..params.budget(day) {
            let n_inf = pool_infected.len();
            let n_unf = pool_uninfected.len();
            if n_inf + n_unf == 0 {
                break;
            }
            let total_weight = theta * n_inf as f64 + n_unf as f64;
            let u: f64 = rng.gen();
            let x = u * total_weight;
            let person = if x < theta * n_inf as f64 {
                let idx = ((x / theta) as usize).min(n_inf - 1);
                pool_infected.remove(idx)
            } else {
                let idx = ((x - theta * n_inf as f64) as usize).min(n_unf - 1);
                pool_uninfected.remove(idx)
            } as usize;

            persons[person].tested_on = Some(day as u32);
            tested_count += 1;
            let positive = if infected[person] {
                tested_infected += 1;
                let u_res: f64 = rng.gen();
                u_res >= params.miss_rate_true
            } else {
                false
            };
            persons[person].test_positive = Some(positive);
            if !positive {
                tested_negative += 1;
                if infected[person] {
                    tested_negative_infected += 1;
                }
            }
        }

        // 3. Day aggregates.
        let untested = params.population - tested_count;
        days.push(DayAggregates {
            infected: infected_count,
            tested: tested_count,
            tested_infected,
            tested_negative,
            tested_negative_infected,
            true_infection_rate: infected_count as f64 / n as f64,
            tested_infection_rate: (tested_count > 0)
                .then(|| tested_infected as f64 / tested_count as f64),
            untested_infection_rate: (untested > 0)
                .then(|| (infected_count - tested_infected) as f64 / untested as f64),
            realized_miss_rate: (tested_negative > 0)
                .then(|| tested_negative_infected as f64 / tested_negative as f64),
        });
    }

    SyntheticWorld {
        params: params.clone(),
        persons,
        days,
    }
}

impl SyntheticWorld {
    /// Cumulative surveillance counts as a validated [`RegionSeries`].
    /// Severe columns are exported only when severe hazards were configured.
    pub fn surveillance_series(&self, region_id: &str) -> RegionSeries {
        let horizon = self.days.len();
        let mut cum_tested = vec![0u64; horizon];
        let mut cum_positive = vec![0u64; horizon];
        let mut hosp = vec![0u64; horizon];
        let mut icu = vec![0u64; horizon];
        let mut deaths = vec![0u64; horizon];
        for rec in &self.persons {
            if let Some(t) = rec.tested_on {
                cum_tested[t as usize] += 1;
                if rec.test_positive == Some(true) {
                    cum_positive[t as usize] += 1;
                }
            }
            let stay = self
                .params
                .severe_hazards
                .map(|h| h.hosp_stay_days)
                .unwrap_or(0) as usize;
            if let Some(a) = rec.hosp_admitted_on {
                let until = (a as usize + stay).min(horizon);
                for slot in &mut hosp[(a as usize).min(until)..until] {
                    *slot += 1;
                }
            }
            if let Some(a) = rec.icu_admitted_on {
                let until = (a as usize + stay).min(horizon);
                for slot in &mut icu[(a as usize).min(until)..until] {
                    *slot += 1;
                }
            }
            if let Some(d) = rec.died_on {
                if (d as usize) < horizon {
                    deaths[d as usize] += 1;
                }
            }
        }
        let with_severe = self.params.severe_hazards.is_some();
        let mut records = Vec::with_capacity(horizon);
        let mut tested_acc = 0u64;
        let mut positive_acc = 0u64;
        let mut death_acc = 0u64;
        for d in 0..horizon {
            tested_acc += cum_tested[d];
            positive_acc += cum_positive[d];
            death_acc += deaths[d];
            records.push(DailyRecord {
                date: SIM_EPOCH() + chrono::Days::new(d as u64),
                cum_tested: tested_acc,
                cum_positive: positive_acc,
                hosp_level: with_severe.then_some(hosp[d]),
                icu_level: with_severe.then_some(icu[d]),
                cum_deaths: with_severe.then_some(death_acc),
            });
        }
        RegionSeries::new(region_id, self.params.population as u64, records)
            .expect("simulated series satisfies the invariants by construction")
    }

    /// Ground-truth CSV: `date,true_infected_count,true_untested_infected_count`.
    pub fn write_truth_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "date",
            "true_infected_count",
            "true_untested_infected_count",
        ])?;
        for (d, day) in self.days.iter().enumerate() {
            w.write_record([
                (SIM_EPOCH() + chrono::Days::new(d as u64)).to_string(),
                day.infected.to_string(),
                (day.infected - day.tested_infected).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Empirical false-negative rate of the test itself: among persons who
    /// were already infected when tested, the share receiving a negative
    /// result. This estimates `miss_rate_true` (unlike the realized
    /// P(infected | tested, negative), which also absorbs infections that
    /// happen after a clean negative test).
    pub fn empirical_test_miss_rate(&self) -> Option<(f64, u32)> {
        let mut infected_at_test = 0u32;
        let mut missed = 0u32;
        for rec in &self.persons {
            if let (Some(t), Some(i)) = (rec.tested_on, rec.infected_on) {
                if i <= t {
                    infected_at_test += 1;
                    if rec.test_positive == Some(false) {
                        missed += 1;
                    }
                }
            }
        }
        (infected_at_test > 0).then(|| (missed as f64 / infected_at_test as f64, infected_at_test))
    }
}

/// Whether a batch of coverage reports warrants a failure exit: some world
/// escaped its bounds even though the assumption audit found nothing wrong.
/// Coverage failures explained by audited assumption breaches do not count.
pub fn coverage_failed_with_clean_audit(reports: &[CoverageReport]) -> bool {
    reports.iter().any(|r| !r.all_covered && r.audit.is_clean())
}

/// Write a world's surveillance and ground-truth CSVs into `dir`, suffixed
/// by seed. Creates the directory if needed.
pub fn write_truth_and_surveillance(
    world: &SyntheticWorld,
    dir: &std::path::Path,
    seed: u64,
) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let surveillance = std::fs::File::create(dir.join(format!("surveillance_{seed}.csv")))?;
    write_canonical_csv(&world.surveillance_series("sim"), surveillance)?;
    let truth = std::fs::File::create(dir.join(format!("truth_{seed}.csv")))?;
    world.write_truth_csv(truth)?;
    Ok(())
}

/// Truth-in-bound results for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodCoverage {
    pub method: BoundMethod,
    pub days_checked: usize,
    pub days_covered: usize,
    /// Day indices (relative to the simulation epoch) where the truth
    /// escaped the interval.
    pub violation_days: Vec<u32>,
    /// Minimum over days of min(truth − lo, hi − truth); negative means a
    /// violation.
    pub worst_slack: f64,
}

impl MethodCoverage {
    /// Overall coverage is the conjunction of the per-day indicators.
    pub fn covered(&self) -> bool {
        self.days_checked == self.days_covered
    }
}

/// Empirical audit of the maintained assumptions against the realized world.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionAudit {
    /// Days where the tested infection rate fell below the untested rate by
    /// more than sampling noise (testing monotonicity violated).
    pub monotonicity_violation_days: Vec<u32>,
    /// Whether the empirical test miss rate is compatible with the declared
    /// interval (None when too few infected persons were tested to tell).
    pub miss_rate_compatible: Option<bool>,
    pub empirical_miss_rate: Option<f64>,
}

impl AssumptionAudit {
    pub fn is_clean(&self) -> bool {
        self.monotonicity_violation_days.is_empty() && self.miss_rate_compatible != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub methods: Vec<MethodCoverage>,
    pub audit: AssumptionAudit,
    /// True iff every method contained the truth on every checked day.
    pub all_covered: bool,
}

/// Minimum per-day sample size before the audit draws conclusions.
const AUDIT_MIN_SAMPLE: u32 = 25;

/// Run the full ingest→bounds pipeline on the world's exported counts and
/// check that each method's interval contains the true infection rate on
/// every day with at least one test. Audit findings are reported, never
/// thrown.
pub fn check_coverage(
    world: &SyntheticWorld,
    cfg: &AssumptionConfig,
    methods: &[BoundMethod],
) -> Result<CoverageReport, Error> {
    // Export and re-ingest so the whole pipeline is on the hook.
    let mut csv_buf = Vec::new();
    write_canonical_csv(&world.surveillance_series("sim"), &mut csv_buf)?;
    let spec = SeriesSpec::new("sim", world.params.population as u64);
    let parsed = parse_region_series(csv_buf.as_slice(), &spec, RepairMode::Reject)?;

    let first_tested = parsed
        .series
        .records()
        .iter()
        .position(|r| r.cum_tested > 0)
        .ok_or(SimError::NoTests)?;
    let records = parsed.series.records()[first_tested..].to_vec();
    let series = RegionSeries::new("sim", world.params.population as u64, records)
        .expect("suffix of a valid series is valid");

    let epoch = SIM_EPOCH();
    let mut method_reports = Vec::with_capacity(methods.len());
    for &method in methods {
        let bounds = compute_bound_series(&series, cfg, method)?;
        let mut covered = 0usize;
        let mut violation_days = Vec::new();
        let mut worst = f64::INFINITY;
        for (date, iv) in bounds.dates.iter().zip(&bounds.intervals) {
            let day = (*date - epoch).num_days() as usize;
            let truth = world.days[day].true_infection_rate;
            let slack = (truth - iv.lo).min(iv.hi - truth);
            worst = worst.min(slack);
            // Tiny allowance for float noise in the bound arithmetic.
            if truth >= iv.lo - 1e-12 && truth <= iv.hi + 1e-12 {
                covered += 1;
            } else {
                violation_days.push(day as u32);
            }
        }
        method_reports.push(MethodCoverage {
            method,
            days_checked: bounds.len(),
            days_covered: covered,
            violation_days,
            worst_slack: worst,
        });
    }

    let mut violation_days = Vec::new();
    for (d, day) in world.days.iter().enumerate() {
        if day.tested < AUDIT_MIN_SAMPLE {
            continue;
        }
        if let (Some(tested_rate), Some(untested_rate)) =
            (day.tested_infection_rate, day.untested_infection_rate)
        {
            let n = day.tested as f64;
            let noise = 3.0 * (untested_rate * (1.0 - untested_rate) / n).sqrt() + 1.0 / n;
            if tested_rate < untested_rate - noise {
                violation_days.push(d as u32);
            }
        }
    }
    let (empirical_miss, miss_compatible) = match world.empirical_test_miss_rate() {
        Some((rate, count)) if count >= AUDIT_MIN_SAMPLE => {
            let n = count as f64;
            let noise = 3.0 * (0.25 / n).sqrt() + 1.0 / n;
            let ok = rate >= cfg.miss_rate.lo - noise && rate <= cfg.miss_rate.hi + noise;
            (Some(rate), Some(ok))
        }
        Some((rate, _)) => (Some(rate), None),
        None => (None, None),
    };

    let all_covered = method_reports.iter().all(MethodCoverage::covered);
    Ok(CoverageReport {
        methods: method_reports,
        audit: AssumptionAudit {
            monotonicity_violation_days: violation_days,
            miss_rate_compatible: miss_compatible,
            empirical_miss_rate: empirical_miss,
        },
        all_covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accuracy::MissRateInterval;
    use crate::bounds::UntestedAssumption;

    fn params(seed: u64) -> SimParams {
        SimParams {
            population: 500,
            horizon: 10,
            daily_infection_hazard: vec![0.02],
            test_budget: vec![10],
            triage_strength: 2.0,
            miss_rate_true: 0.25,
            severe_hazards: None,
            seed,
        }
    }

    /// Straight-line transcription of the documented sampling recipe,
    /// independent of the production data structures: the two never-tested
    /// pools are rebuilt from scratch by scanning persons in id order before
    /// every selection.
    fn reference_simulate(p: &SimParams) -> Vec<PersonRecord> {
        let n = p.population as usize;
        let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
        let mut persons = vec![PersonRecord::default(); n];
        for day in 0..p.horizon as usize {
            let hazard = if p.daily_infection_hazard.len() == 1 {
                p.daily_infection_hazard[0]
            } else {
                p.daily_infection_hazard[day]
            };
            for rec in persons.iter_mut() {
                if rec.infected_on.is_some() {
                    continue;
                }
                if rng.gen::<f64>() < hazard {
                    rec.infected_on = Some(day as u32);
                    if let Some(h) = p.severe_hazards {
                        if rng.gen::<f64>() < h.p_hosp {
                            rec.hosp_admitted_on = Some(day as u32 + h.onset_lag_days);
                            if rng.gen::<f64>() < h.p_icu_given_hosp {
                                rec.icu_admitted_on = Some(day as u32 + h.onset_lag_days);
                            }
                        }
                        if rng.gen::<f64>() < h.p_death {
                            rec.died_on = Some(day as u32 + h.onset_lag_days);
                        }
                    }
                }
            }
            let budget = if p.test_budget.len() == 1 {
                p.test_budget[0]
            } else {
                p.test_budget[day]
            };
            for _ in 0..budget {
                let infected_pool: Vec<usize> = (0..n)
                    .filter(|&q| persons[q].tested_on.is_none() && persons[q].infected_on.is_some())
                    .collect();
                let uninfected_pool: Vec<usize> = (0..n)
                    .filter(|&q| persons[q].tested_on.is_none() && persons[q].infected_on.is_none())
                    .collect();
                let n_inf = infected_pool.len();
                let n_unf = uninfected_pool.len();
                if n_inf + n_unf == 0 {
                    break;
                }
                let theta = p.triage_strength;
                let x = rng.gen::<f64>() * (theta * n_inf as f64 + n_unf as f64);
                let chosen = if x < theta * n_inf as f64 {
                    infected_pool[((x / theta) as usize).min(n_inf - 1)]
                } else {
                    uninfected_pool[((x - theta * n_inf as f64) as usize).min(n_unf - 1)]
                };
                persons[chosen].tested_on = Some(day as u32);
                let positive = if persons[chosen].infected_on.is_some() {
                    rng.gen::<f64>() >= p.miss_rate_true
                } else {
                    false
                };
                persons[chosen].test_positive = Some(positive);
            }
        }
        persons
    }

    #[test]
    fn trace_matches_independent_reimplementation() {
        let p = SimParams {
            population: 10,
            horizon: 3,
            daily_infection_hazard: vec![0.3],
            test_budget: vec![2],
            triage_strength: 3.0,
            miss_rate_true: 0.2,
            severe_hazards: Some(SevereHazards {
                p_hosp: 0.5,
                p_icu_given_hosp: 0.5,
                p_death: 0.3,
                onset_lag_days: 1,
                hosp_stay_days: 2,
            }),
            seed: 12345,
        };
        let world = simulate(&p).unwrap();
        assert_eq!(world.persons, reference_simulate(&p));
    }

    #[test]
    fn traces_match_across_many_seeds_and_shapes() {
        for seed in 0..50u64 {
            let p = SimParams {
                population: 40,
                horizon: 5,
                daily_infection_hazard: vec![0.05, 0.1, 0.2, 0.0, 0.3],
                test_budget: vec![1, 3, 0, 5, 2],
                triage_strength: 1.0 + (seed % 5) as f64,
                miss_rate_true: 0.3,
                severe_hazards: (seed % 2 == 0).then_some(SevereHazards {
                    p_hosp: 0.4,
                    p_icu_given_hosp: 0.3,
                    p_death: 0.2,
                    onset_lag_days: 2,
                    hosp_stay_days: 3,
                }),
                seed,
            };
            let world = simulate(&p).unwrap();
            assert_eq!(world.persons, reference_simulate(&p), "seed {seed}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = simulate(&params(7)).unwrap();
        let b = simulate(&params(7)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&params(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn world_invariants_hold() {
        let world = simulate(&params(42)).unwrap();
        for rec in &world.persons {
            if rec.test_positive == Some(true) {
                // Positive results only for infected persons, and only at
                // or after infection (specificity one).
                assert!(rec.infected_on.is_some());
                assert!(rec.infected_on.unwrap() <= rec.tested_on.unwrap());
            }
            if rec.tested_on.is_some() {
                assert!(rec.test_positive.is_some());
            }
        }
        // Truth is weakly increasing (one episode per person, cumulative).
        for w in world.days.windows(2) {
            assert!(w[0].true_infection_rate <= w[1].true_infection_rate);
        }
    }

    #[test]
    fn aggregates_match_recount_from_persons() {
        let world = simulate(&params(99)).unwrap();
        for (d, day) in world.days.iter().enumerate() {
            let d = d as u32;
            let infected = world
                .persons
                .iter()
                .filter(|r| r.infected_on.is_some_and(|i| i <= d))
                .count() as u32;
            let tested = world
                .persons
                .iter()
                .filter(|r| r.tested_on.is_some_and(|t| t <= d))
                .count() as u32;
            let tested_infected = world
                .persons
                .iter()
                .filter(|r| {
                    r.tested_on.is_some_and(|t| t <= d) && r.infected_on.is_some_and(|i| i <= d)
                })
                .count() as u32;
            let tested_negative = world
                .persons
                .iter()
                .filter(|r| r.tested_on.is_some_and(|t| t <= d) && r.test_positive == Some(false))
                .count() as u32;
            let tested_negative_infected = world
                .persons
                .iter()
                .filter(|r| {
                    r.tested_on.is_some_and(|t| t <= d)
                        && r.test_positive == Some(false)
                        && r.infected_on.is_some_and(|i| i <= d)
                })
                .count() as u32;
            assert_eq!(day.infected, infected);
            assert_eq!(day.tested, tested);
            assert_eq!(day.tested_infected, tested_infected);
            assert_eq!(day.tested_negative, tested_negative);
            assert_eq!(day.tested_negative_infected, tested_negative_infected);
        }
    }

    #[test]
    fn zero_hazard_means_zero_positives_and_zero_truth() {
        let mut p = params(5);
        p.daily_infection_hazard = vec![0.0];
        let world = simulate(&p).unwrap();
        for day in &world.days {
            assert_eq!(day.true_infection_rate, 0.0);
        }
        let series = world.surveillance_series("empty");
        for rec in series.records() {
            assert_eq!(rec.cum_positive, 0);
        }
    }

    #[test]
    fn random_testing_equalizes_rates_as_population_grows() {
        // Mean absolute gap between tested and untested infection rates at
        // the final day, across 200 seeds, should shrink with population.
        let gap = |population: u32| -> f64 {
            let mut total = 0.0;
            for seed in 0..200u64 {
                let p = SimParams {
                    population,
                    horizon: 5,
                    daily_infection_hazard: vec![0.05],
                    test_budget: vec![population / 20],
                    triage_strength: 1.0,
                    miss_rate_true: 0.0,
                    severe_hazards: None,
                    seed,
                };
                let world = simulate(&p).unwrap();
                let last = world.days.last().unwrap();
                if let (Some(a), Some(b)) =
                    (last.tested_infection_rate, last.untested_infection_rate)
                {
                    total += (a - b).abs();
                }
            }
            total / 200.0
        };
        let small = gap(100);
        let large = gap(2000);
        assert!(
            large < small,
            "gap should shrink with population: {small} -> {large}"
        );
    }

    #[test]
    fn exported_series_parses_through_ingest() {
        let mut p = params(3);
        p.severe_hazards = Some(SevereHazards {
            p_hosp: 0.3,
            p_icu_given_hosp: 0.4,
            p_death: 0.1,
            onset_lag_days: 1,
            hosp_stay_days: 4,
        });
        let world = simulate(&p).unwrap();
        let series = world.surveillance_series("sim");
        let mut buf = Vec::new();
        write_canonical_csv(&series, &mut buf).unwrap();
        let spec = SeriesSpec::new("sim", p.population as u64);
        let reparsed = parse_region_series(buf.as_slice(), &spec, RepairMode::Reject).unwrap();
        assert_eq!(reparsed.series, series);
    }

    #[test]
    fn coverage_holds_for_valid_configs() {
        let cfg = AssumptionConfig::new(
            MissRateInterval::new(0.1, 0.4).unwrap(),
            UntestedAssumption::TESTING_MONOTONICITY,
        );
        for seed in 0..25u64 {
            let world = simulate(&params(seed)).unwrap();
            let report = check_coverage(
                &world,
                &cfg,
                &[BoundMethod::TestingMonotone, BoundMethod::TemporalEnvelope],
            )
            .unwrap();
            assert!(report.all_covered, "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn miss_rate_breach_is_flagged() {
        let cfg = AssumptionConfig::new(
            MissRateInterval::new(0.1, 0.4).unwrap(),
            UntestedAssumption::TESTING_MONOTONICITY,
        );
        let mut p = params(11);
        p.population = 2000;
        p.horizon = 20;
        p.test_budget = vec![60];
        p.miss_rate_true = 0.6;
        let world = simulate(&p).unwrap();
        let report = check_coverage(&world, &cfg, &[BoundMethod::TestingMonotone]).unwrap();
        assert_eq!(report.audit.miss_rate_compatible, Some(false));
        assert!(report.audit.empirical_miss_rate.unwrap() > 0.4);
    }

    #[test]
    fn anti_triage_breach_is_flagged() {
        let cfg = AssumptionConfig::new(
            MissRateInterval::new(0.1, 0.4).unwrap(),
            UntestedAssumption::TESTING_MONOTONICITY,
        );
        let p = SimParams {
            population: 3000,
            horizon: 20,
            daily_infection_hazard: vec![0.02],
            test_budget: vec![100],
            triage_strength: 0.1, // anti-triage: avoid testing the infected
            miss_rate_true: 0.2,
            severe_hazards: None,
            seed: 4,
        };
        assert!(matches!(simulate(&p), Err(SimError::TriageBelowOne(_))));
        let world = simulate_unchecked(&p);
        let report = check_coverage(&world, &cfg, &[BoundMethod::TestingMonotone]).unwrap();
        assert!(
            !report.audit.monotonicity_violation_days.is_empty(),
            "{report:?}"
        );
    }

    #[test]
    fn valid_triage_audit_is_mostly_quiet() {
        let cfg = AssumptionConfig::new(
            MissRateInterval::new(0.1, 0.4).unwrap(),
            UntestedAssumption::TESTING_MONOTONICITY,
        );
        let mut flagged_days = 0usize;
        let mut total_days = 0usize;
        for seed in 0..20u64 {
            let mut p = params(seed);
            p.population = 2000;
            p.test_budget = vec![50];
            let world = simulate(&p).unwrap();
            let report = check_coverage(&world, &cfg, &[BoundMethod::TestingMonotone]).unwrap();
            flagged_days += report.audit.monotonicity_violation_days.len();
            total_days += world.days.len();
            assert_eq!(report.audit.miss_rate_compatible, Some(true), "seed {seed}");
        }
        // The 3-sigma slack keeps false alarms rare under valid triage.
        assert!(
            (flagged_days as f64) < 0.02 * total_days as f64,
            "{flagged_days}/{total_days} days flagged"
        );
    }

    #[test]
    fn budget_exhausts_population_gracefully() {
        let p = SimParams {
            population: 20,
            horizon: 4,
            daily_infection_hazard: vec![0.1],
            test_budget: vec![9],
            triage_strength: 1.5,
            miss_rate_true: 0.2,
            severe_hazards: None,
            seed: 1,
        };
        let world = simulate(&p).unwrap();
        let tested = world
            .persons
            .iter()
            .filter(|r| r.tested_on.is_some())
            .count();
        assert_eq!(tested, 20);
        // A person is tested at most once.
        assert!(world.days.last().unwrap().tested == 20);
    }

    #[test]
    fn exit_flag_only_for_unexplained_failures() {
        let covered = CoverageReport {
            methods: vec![],
            audit: AssumptionAudit {
                monotonicity_violation_days: vec![],
                miss_rate_compatible: Some(true),
                empirical_miss_rate: Some(0.2),
            },
            all_covered: true,
        };
        let failed_clean = CoverageReport {
            all_covered: false,
            ..covered.clone()
        };
        let failed_flagged = CoverageReport {
            all_covered: false,
            audit: AssumptionAudit {
                monotonicity_violation_days: vec![3],
                miss_rate_compatible: Some(true),
                empirical_miss_rate: Some(0.2),
            },
            ..covered.clone()
        };
        assert!(!coverage_failed_with_clean_audit(std::slice::from_ref(&covered)));
        assert!(coverage_failed_with_clean_audit(&[
            covered.clone(),
            failed_clean
        ]));
        assert!(!coverage_failed_with_clean_audit(&[covered, failed_flagged]));
    }

    #[test]
    fn parameter_validation() {
        let mut p = params(1);
        p.triage_strength = 0.5;
        assert!(matches!(simulate(&p), Err(SimError::TriageBelowOne(_))));
        let mut p = params(1);
        p.daily_infection_hazard = vec![1.5];
        assert!(matches!(simulate(&p), Err(SimError::OutOfUnit { .. })));
        let mut p = params(1);
        p.test_budget = vec![10_000];
        assert!(matches!(
            simulate(&p),
            Err(SimError::BudgetExceedsPopulation { .. })
        ));
        let mut p = params(1);
        p.daily_infection_hazard = vec![0.1, 0.2];
        assert!(matches!(simulate(&p), Err(SimError::ScheduleLength { .. })));
    }
}
