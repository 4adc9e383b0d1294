//! Set-valued estimators of the population infection rate.
//!
//! Everything here takes directly observable rates plus an
//! [`AssumptionConfig`] and returns closed subintervals of [0, 1]. The
//! estimators, from weakest to strongest assumption set:
//!
//! * [`worst_case_bound`] — an explicit interval for the infection rate
//!   among the untested plus a miss-rate interval for the tested negatives.
//! * [`testing_monotone_bound`] — replaces the explicit untested interval
//!   with the assumption that the infection rate among the tested is at
//!   least that among the untested (symptom-triaged eligibility), which
//!   ties the untested upper bound to the miss-rate upper bound.
//! * [`temporal_envelope`] — uses the fact that cumulative infection can
//!   only grow: the lower bound at a date is the running maximum of earlier
//!   lower bounds, the upper bound the running minimum of later upper
//!   bounds.
//! * [`asymptomatic_refined_lower`] — divides the lower bound by one minus
//!   the assumed minimum asymptomatic share.
//! * [`severe_conditional_bound`] — turns an infection-rate interval into an
//!   interval for P(severe | infected) by endpoint division.
//! * [`stratified_bound`] — applies any of the above within covariate
//!   strata and optionally blends the strata back together.
//!
//! Intervals are clamped to [0, 1] after evaluation with a flag recording
//! that clamping occurred; formulas only leave the unit interval under
//! inconsistent inputs, which should be visible rather than silent.
//! Crossed intervals (lower above upper) are reported as errors: they mean
//! the data refute the maintained assumptions.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::accuracy::MissRateInterval;
use crate::error::{BoundsError, Error, InconsistencyError, IngestError};
use crate::ingest::{empirical_rates, EmpiricalRates, RegionSeries};

/// Float dust tolerance: overshoot of 1 by less than this snaps back
/// silently instead of raising the clamped flag.
const UNIT_EPS: f64 = 1e-12;

/// Severe-outcome categories reported by surveillance systems.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum SevereOutcome {
    Hospitalization,
    Icu,
    Death,
}

impl SevereOutcome {
    pub const ALL: [SevereOutcome; 3] = [
        SevereOutcome::Hospitalization,
        SevereOutcome::Icu,
        SevereOutcome::Death,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SevereOutcome::Hospitalization => "hospitalization",
            SevereOutcome::Icu => "icu",
            SevereOutcome::Death => "death",
        }
    }

    /// Canonical source column for this outcome.
    pub fn column(&self) -> &'static str {
        match self {
            SevereOutcome::Hospitalization => "hosp_level",
            SevereOutcome::Icu => "icu_level",
            SevereOutcome::Death => "cum_deaths",
        }
    }
}

impl fmt::Display for SevereOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A closed subinterval of [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ProbInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, BoundsError> {
        for (name, v) in [("interval lo", lo), ("interval hi", hi)] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(BoundsError::OutOfUnit { name, value: v });
            }
        }
        if lo > hi {
            return Err(BoundsError::IntervalOrder { lo, hi });
        }
        Ok(ProbInterval { lo, hi })
    }
}

/// Assumption on the infection rate among untested persons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UntestedAssumption {
    Tag(UntestedTag),
    Interval(ProbInterval),
}

/// Keyword form: derive the untested upper bound from testing monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UntestedTag {
    TestingMonotonicity,
}

impl UntestedAssumption {
    pub const TESTING_MONOTONICITY: UntestedAssumption =
        UntestedAssumption::Tag(UntestedTag::TestingMonotonicity);
}

/// The declared identification assumptions for one date (usually shared by
/// every date of a run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionConfig {
    /// Bounds on P(infected | tested, negative).
    pub miss_rate: MissRateInterval,
    /// Assumption on P(infected | untested).
    pub untested: UntestedAssumption,
    /// Optional asymptomatic-share interval for the refined lower bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ProbInterval>,
    /// Positive results are taken at face value. Must be true: the bound
    /// algebra is derived under a perfect positive predictive value.
    pub ppv_one: bool,
}

impl AssumptionConfig {
    pub fn new(miss_rate: MissRateInterval, untested: UntestedAssumption) -> Self {
        AssumptionConfig {
            miss_rate,
            untested,
            alpha: None,
            ppv_one: true,
        }
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if !self.ppv_one {
            return Err(BoundsError::PpvOneRequired);
        }
        if let Some(alpha) = self.alpha {
            if alpha.hi >= 1.0 {
                return Err(BoundsError::AlphaHiNotBelowOne(alpha.hi));
            }
        }
        Ok(())
    }
}

/// Which estimator produced an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    WorstCase,
    TestingMonotone,
    TemporalEnvelope,
    AsymRefined,
    SevereRatio,
    Stratified,
}

impl BoundMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMethod::WorstCase => "worst_case",
            BoundMethod::TestingMonotone => "testing_monotone",
            BoundMethod::TemporalEnvelope => "temporal_envelope",
            BoundMethod::AsymRefined => "asym_refined",
            BoundMethod::SevereRatio => "severe_ratio",
            BoundMethod::Stratified => "stratified",
        }
    }
}

impl FromStr for BoundMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "worst_case" | "worst-case" => Ok(BoundMethod::WorstCase),
            "testing_monotone" | "testing-monotone" => Ok(BoundMethod::TestingMonotone),
            "temporal_envelope" | "envelope" => Ok(BoundMethod::TemporalEnvelope),
            "asym_refined" | "asym-refined" => Ok(BoundMethod::AsymRefined),
            "severe_ratio" | "severe-ratio" => Ok(BoundMethod::SevereRatio),
            "stratified" => Ok(BoundMethod::Stratified),
            other => Err(format!("unknown bound method {other:?}")),
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A bound on a probability, tagged with its method. `clamped` records
/// whether evaluation left [0, 1] and was pulled back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lo: f64,
    pub hi: f64,
    pub method: BoundMethod,
    pub clamped: bool,
}

impl BoundInterval {
    /// Clamp raw endpoints into [0, 1], flagging genuine clamps.
    fn from_raw(lo: f64, hi: f64, method: BoundMethod) -> Self {
        let mut clamped = false;
        let mut snap = |v: f64| -> f64 {
            if v < 0.0 {
                if v < -UNIT_EPS {
                    clamped = true;
                }
                0.0
            } else if v > 1.0 {
                if v > 1.0 + UNIT_EPS {
                    clamped = true;
                }
                1.0
            } else {
                v
            }
        };
        let lo = snap(lo);
        let hi = snap(hi);
        BoundInterval {
            lo,
            hi,
            method,
            clamped,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

/// Interval width, hi − lo.
pub fn bound_width(b: &BoundInterval) -> f64 {
    b.hi - b.lo
}

/// Worst-case bound from an explicit untested-infection interval.
///
/// lower = P(pos) + L0·P(untested) + L10·P(neg|tested)·P(tested), and the
/// same with upper endpoints. Width decomposes linearly into the two
/// sources of uncertainty, weighted by the tested and untested fractions.
pub fn worst_case_bound(
    rates: &EmpiricalRates,
    cfg: &AssumptionConfig,
) -> Result<BoundInterval, BoundsError> {
    cfg.validate()?;
    let untested = match cfg.untested {
        UntestedAssumption::Interval(iv) => iv,
        UntestedAssumption::Tag(_) => return Err(BoundsError::UntestedIntervalRequired),
    };
    let miss = cfg.miss_rate;
    let lo = rates.p_pos
        + untested.lo * rates.p_untested
        + miss.lo * rates.p_neg_given_tested * rates.p_tested;
    let hi = rates.p_pos
        + untested.hi * rates.p_untested
        + miss.hi * rates.p_neg_given_tested * rates.p_tested;
    Ok(BoundInterval::from_raw(lo, hi, BoundMethod::WorstCase))
}

/// Upper bound on the untested infection rate implied by testing
/// monotonicity: U0 = u10 + (1 − u10)·P(pos|tested). Always at least u10.
pub fn monotone_untested_upper(rates: &EmpiricalRates, u_d10: f64) -> f64 {
    u_d10 + (1.0 - u_d10) * rates.p_pos_given_tested
}

/// Bound under testing monotonicity: the untested lower bound is zero and
/// the untested upper bound is [`monotone_untested_upper`].
pub fn testing_monotone_bound(
    rates: &EmpiricalRates,
    cfg: &AssumptionConfig,
) -> Result<BoundInterval, BoundsError> {
    cfg.validate()?;
    if !matches!(cfg.untested, UntestedAssumption::Tag(_)) {
        return Err(BoundsError::MonotonicityTagRequired);
    }
    let miss = cfg.miss_rate;
    let lo = rates.p_pos + miss.lo * rates.p_neg_given_tested * rates.p_tested;
    let hi = rates.p_pos
        + miss.hi * rates.p_neg_given_tested * rates.p_tested
        + (rates.p_pos_given_tested + miss.hi * rates.p_neg_given_tested) * rates.p_untested;
    Ok(BoundInterval::from_raw(
        lo,
        hi,
        BoundMethod::TestingMonotone,
    ))
}

/// Tighten a date-ordered sequence of bounds using temporal monotonicity:
/// cumulative infection can only grow, so each date inherits the strongest
/// lower bound from its past and the strongest upper bound from its future
/// (the latest date uses only itself). Every output is a subset of its
/// input. A crossing means the maintained assumptions are jointly refuted;
/// the error carries the offending index.
pub fn temporal_envelope(
    intervals: &[BoundInterval],
) -> Result<Vec<BoundInterval>, Error> {
    if intervals.is_empty() {
        return Err(BoundsError::EmptySequence.into());
    }
    let n = intervals.len();
    // Track the source of each running extreme so the clamped flag follows
    // the values, not the positions.
    let mut lo_src = vec![0usize; n];
    let mut best = 0usize;
    for i in 0..n {
        if intervals[i].lo > intervals[best].lo {
            best = i;
        }
        lo_src[i] = best;
    }
    let mut hi_src = vec![0usize; n];
    best = n - 1;
    for i in (0..n).rev() {
        if intervals[i].hi < intervals[best].hi {
            best = i;
        }
        hi_src[i] = best;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = intervals[lo_src[i]].lo;
        let hi = intervals[hi_src[i]].hi;
        if lo > hi {
            return Err(InconsistencyError::CrossingAt { index: i, lo, hi }.into());
        }
        out.push(BoundInterval {
            lo,
            hi,
            method: BoundMethod::TemporalEnvelope,
            clamped: intervals[lo_src[i]].clamped || intervals[hi_src[i]].clamped,
        });
    }
    Ok(out)
}

/// Refined per-date lower bound assuming a minimum symptomatic share:
/// (1 − α_lo)⁻¹ · [P(pos) + L10·P(neg|tested)·P(tested)], capped at 1.
/// The caller combines this across dates with the running-max rule.
pub fn asymptomatic_refined_lower(
    rates: &EmpiricalRates,
    cfg: &AssumptionConfig,
) -> Result<f64, BoundsError> {
    cfg.validate()?;
    let alpha = cfg.alpha.ok_or(BoundsError::AlphaRequired)?;
    let base = rates.p_pos + cfg.miss_rate.lo * rates.p_neg_given_tested * rates.p_tested;
    Ok((base / (1.0 - alpha.lo)).min(1.0))
}

/// Bound on P(severe | infected) from the severe-outcome rate and an
/// infection-rate bound. The lower (upper) endpoint divides by the
/// infection upper (lower) endpoint. A zero infection lower bound yields
/// the uninformative upper bound 1. A severe rate above the infection
/// upper bound refutes severe ⇒ infected and is an inconsistency.
pub fn severe_conditional_bound(
    p_severe: f64,
    infection_bound: &BoundInterval,
) -> Result<BoundInterval, Error> {
    if !(p_severe.is_finite() && (0.0..=1.0).contains(&p_severe)) {
        return Err(BoundsError::OutOfUnit {
            name: "p_severe",
            value: p_severe,
        }
        .into());
    }
    if p_severe > infection_bound.hi + UNIT_EPS {
        return Err(InconsistencyError::SevereExceedsInfection {
            p_severe,
            hi: infection_bound.hi,
        }
        .into());
    }
    let lo = if infection_bound.hi == 0.0 {
        0.0
    } else {
        (p_severe / infection_bound.hi).min(1.0)
    };
    let (hi, clamped) = if infection_bound.lo == 0.0 {
        (1.0, false)
    } else {
        let raw = p_severe / infection_bound.lo;
        (raw.min(1.0), raw > 1.0 + UNIT_EPS)
    };
    Ok(BoundInterval {
        lo,
        hi,
        method: BoundMethod::SevereRatio,
        clamped,
    })
}

/// One covariate stratum: its observable rates and its own assumptions.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub rates: EmpiricalRates,
    pub config: AssumptionConfig,
}

/// Result of [`stratified_bound`].
#[derive(Debug, Clone)]
pub struct StratifiedBounds {
    pub per_stratum: BTreeMap<String, BoundInterval>,
    /// Population blend Σ w·bound, present when weights were supplied.
    pub blend: Option<BoundInterval>,
}

/// Apply the per-stratum estimator (worst case when the stratum declares an
/// explicit untested interval, testing monotonicity otherwise) within each
/// stratum independently, and blend with the supplied population weights.
pub fn stratified_bound(
    per_stratum: &BTreeMap<String, Stratum>,
    weights: Option<&BTreeMap<String, f64>>,
) -> Result<StratifiedBounds, Error> {
    if per_stratum.is_empty() {
        return Err(BoundsError::EmptySequence.into());
    }
    let mut bounds = BTreeMap::new();
    for (key, stratum) in per_stratum {
        let b = match stratum.config.untested {
            UntestedAssumption::Interval(_) => worst_case_bound(&stratum.rates, &stratum.config)?,
            UntestedAssumption::Tag(_) => testing_monotone_bound(&stratum.rates, &stratum.config)?,
        };
        bounds.insert(key.clone(), b);
    }
    let blend = match weights {
        None => None,
        Some(w) => {
            if w.len() != per_stratum.len() || !w.keys().eq(per_stratum.keys()) {
                return Err(BoundsError::WeightsKeyMismatch {
                    got: w.len(),
                    expected: per_stratum.len(),
                }
                .into());
            }
            let mut sum = 0.0;
            for (key, &weight) in w {
                if weight < 0.0 {
                    return Err(BoundsError::NegativeWeight {
                        key: key.clone(),
                        weight,
                    }
                    .into());
                }
                sum += weight;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(BoundsError::WeightsNotNormalized { sum }.into());
            }
            let mut lo = 0.0;
            let mut hi = 0.0;
            let mut clamped = false;
            for (key, b) in &bounds {
                let weight = w[key];
                lo += weight * b.lo;
                hi += weight * b.hi;
                clamped |= b.clamped;
            }
            let mut blend = BoundInterval::from_raw(lo, hi, BoundMethod::Stratified);
            blend.clamped |= clamped;
            Some(blend)
        }
    };
    Ok(StratifiedBounds {
        per_stratum: bounds,
        blend,
    })
}

/// A bound per date for one region, with the assumption snapshot that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSeries {
    pub region_id: String,
    pub dates: Vec<NaiveDate>,
    pub intervals: Vec<BoundInterval>,
    pub config: AssumptionConfig,
}

impl BoundSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn at(&self, date: NaiveDate) -> Option<&BoundInterval> {
        self.dates
            .iter()
            .position(|&d| d == date)
            .map(|i| &self.intervals[i])
    }

    /// CSV serialization: `date,method,lo,hi,clamped` with full-precision
    /// floats (display rounding is a reporting concern).
    pub fn to_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "method", "lo", "hi", "clamped"])?;
        for (date, iv) in self.dates.iter().zip(&self.intervals) {
            w.write_record([
                date.format("%Y-%m-%d").to_string(),
                iv.method.as_str().to_string(),
                format!("{}", iv.lo),
                format!("{}", iv.hi),
                iv.clamped.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One row of the bound-series CSV schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub date: NaiveDate,
    pub method: BoundMethod,
    pub lo: f64,
    pub hi: f64,
    pub clamped: bool,
}

/// Parse rows written by [`BoundSeries::to_csv`].
pub fn read_bound_rows<R: Read>(input: R) -> Result<Vec<BoundRow>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |reason: String| IngestError::MalformedRow {
            row: i + 1,
            reason,
        };
        let get = |j: usize| rec.get(j).unwrap_or("");
        let date = NaiveDate::parse_from_str(get(0), "%Y-%m-%d")
            .map_err(|e| bad(format!("bad date: {e}")))?;
        let method = BoundMethod::from_str(get(1)).map_err(bad)?;
        let lo: f64 = get(2).parse().map_err(|e| bad(format!("bad lo: {e}")))?;
        let hi: f64 = get(3).parse().map_err(|e| bad(format!("bad hi: {e}")))?;
        let clamped: bool = get(4)
            .parse()
            .map_err(|e| bad(format!("bad clamped: {e}")))?;
        rows.push(BoundRow {
            date,
            method,
            lo,
            hi,
            clamped,
        });
    }
    Ok(rows)
}

/// Per-date base bound chosen by the untested assumption.
fn base_bound(
    rates: &EmpiricalRates,
    cfg: &AssumptionConfig,
) -> Result<BoundInterval, BoundsError> {
    match cfg.untested {
        UntestedAssumption::Interval(_) => worst_case_bound(rates, cfg),
        UntestedAssumption::Tag(_) => testing_monotone_bound(rates, cfg),
    }
}

/// Run the full per-date pipeline for a series with one assumption config
/// per date (the common case passes the same config everywhere; see
/// [`compute_bound_series`]).
pub fn compute_bound_series_per_date(
    series: &RegionSeries,
    configs: &[AssumptionConfig],
    method: BoundMethod,
) -> Result<BoundSeries, Error> {
    let dates: Vec<NaiveDate> = series.dates().collect();
    if configs.len() != dates.len() {
        return Err(BoundsError::PerDateLengthMismatch {
            got: configs.len(),
            expected: dates.len(),
        }
        .into());
    }
    let rates: Vec<EmpiricalRates> = dates
        .iter()
        .map(|&d| empirical_rates(series, d))
        .collect::<Result<_, _>>()?;

    let intervals = match method {
        BoundMethod::WorstCase => rates
            .iter()
            .zip(configs)
            .map(|(r, c)| worst_case_bound(r, c))
            .collect::<Result<Vec<_>, _>>()?,
        BoundMethod::TestingMonotone => rates
            .iter()
            .zip(configs)
            .map(|(r, c)| testing_monotone_bound(r, c))
            .collect::<Result<Vec<_>, _>>()?,
        BoundMethod::TemporalEnvelope => {
            let per_date = rates
                .iter()
                .zip(configs)
                .map(|(r, c)| base_bound(r, c))
                .collect::<Result<Vec<_>, _>>()?;
            envelope_with_dates(&per_date, &dates)?
        }
        BoundMethod::AsymRefined => {
            let per_date = rates
                .iter()
                .zip(configs)
                .map(|(r, c)| base_bound(r, c))
                .collect::<Result<Vec<_>, _>>()?;
            let envelope = envelope_with_dates(&per_date, &dates)?;
            let mut out = Vec::with_capacity(dates.len());
            let mut running_lo = 0.0f64;
            for i in 0..dates.len() {
                let refined = asymptomatic_refined_lower(&rates[i], &configs[i])?;
                running_lo = running_lo.max(refined);
                let hi = envelope[i].hi;
                if running_lo > hi {
                    return Err(InconsistencyError::Crossing {
                        date: dates[i],
                        lo: running_lo,
                        hi,
                    }
                    .into());
                }
                out.push(BoundInterval {
                    lo: running_lo,
                    hi,
                    method: BoundMethod::AsymRefined,
                    clamped: envelope[i].clamped,
                });
            }
            out
        }
        other => {
            return Err(crate::error::ConfigError::Invalid(format!(
                "method {other} is not a series-level method"
            ))
            .into())
        }
    };

    Ok(BoundSeries {
        region_id: series.region_id().to_string(),
        dates,
        intervals,
        config: configs[0],
    })
}

/// Run the pipeline with a single config shared by every date.
pub fn compute_bound_series(
    series: &RegionSeries,
    cfg: &AssumptionConfig,
    method: BoundMethod,
) -> Result<BoundSeries, Error> {
    let configs = vec![*cfg; series.len()];
    compute_bound_series_per_date(series, &configs, method)
}

fn envelope_with_dates(
    per_date: &[BoundInterval],
    dates: &[NaiveDate],
) -> Result<Vec<BoundInterval>, Error> {
    temporal_envelope(per_date).map_err(|e| match e {
        Error::Inconsistency(InconsistencyError::CrossingAt { index, lo, hi }) => {
            Error::Inconsistency(InconsistencyError::Crossing {
                date: dates[index],
                lo,
                hi,
            })
        }
        other => other,
    })
}

/// Severe-outcome bounds for every date of a series, using the temporal
/// envelope of the infection bound as denominator. Requires all three
/// severe columns; the error names the first one missing.
#[derive(Debug, Clone, Serialize)]
pub struct SevereBoundSeries {
    pub region_id: String,
    pub dates: Vec<NaiveDate>,
    /// One entry per date, keyed by outcome.
    pub bounds: Vec<BTreeMap<SevereOutcome, BoundInterval>>,
}

pub fn compute_severe_bound_series(
    series: &RegionSeries,
    cfg: &AssumptionConfig,
) -> Result<SevereBoundSeries, Error> {
    let infection = compute_bound_series(series, cfg, BoundMethod::TemporalEnvelope)?;
    let mut bounds = Vec::with_capacity(infection.len());
    for (i, &date) in infection.dates.iter().enumerate() {
        let rates = empirical_rates(series, date)?;
        let mut per_outcome = BTreeMap::new();
        for outcome in SevereOutcome::ALL {
            let p = *rates
                .severe
                .get(&outcome)
                .ok_or(IngestError::MissingSevere {
                    column: outcome.column(),
                    date,
                })?;
            per_outcome.insert(outcome, severe_conditional_bound(p, &infection.intervals[i])?);
        }
        bounds.push(per_outcome);
    }
    Ok(SevereBoundSeries {
        region_id: series.region_id().to_string(),
        dates: infection.dates,
        bounds,
    })
}
