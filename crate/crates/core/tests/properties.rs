//! Generative property tests over the ingest and bound pipelines.

use chrono::NaiveDate;
use proptest::prelude::*;

use epibounds::accuracy::MissRateInterval;
use epibounds::bounds::{
    bound_width, severe_conditional_bound, temporal_envelope, testing_monotone_bound,
    worst_case_bound, AssumptionConfig, BoundInterval, BoundMethod, ProbInterval,
    UntestedAssumption,
};
use epibounds::ingest::{
    analysis_window, empirical_rates, parse_region_series, write_canonical_csv, DailyRecord,
    EmpiricalRates, RegionSeries, RepairMode, SeriesSpec,
};
use epibounds::sim::{simulate, SimParams};

const POPULATION: u64 = 10_000_000;

#[derive(Debug, Clone)]
struct Increments {
    tested: Vec<u64>,
    positive_share: Vec<f64>,
    severe: Option<Vec<(u64, u64, u64)>>, // hosp level, icu level, death increment
}

fn series_strategy() -> impl Strategy<Value = Increments> {
    let day = (1u64..50_000, 0.0f64..1.0);
    prop::collection::vec(day, 1..28)
        .prop_flat_map(|days| {
            let n = days.len();
            let severe = prop::option::of(prop::collection::vec(
                (0u64..5_000, 0u64..5_000, 0u64..200),
                n..=n,
            ));
            (Just(days), severe)
        })
        .prop_map(|(days, severe)| Increments {
            tested: days.iter().map(|d| d.0).collect(),
            positive_share: days.iter().map(|d| d.1).collect(),
            severe,
        })
}

fn build_series(inc: &Increments) -> RegionSeries {
    let start = NaiveDate::from_ymd_opt(2020, 2, 1).unwrap();
    let mut tested = 0u64;
    let mut positive = 0u64;
    let mut deaths = 0u64;
    let mut records = Vec::with_capacity(inc.tested.len());
    for i in 0..inc.tested.len() {
        tested = (tested + inc.tested[i]).min(POPULATION);
        let headroom = tested - positive;
        positive += (inc.positive_share[i] * headroom as f64) as u64;
        let severe = inc.severe.as_ref().map(|s| s[i]);
        let (hosp, icu, death) = match severe {
            Some((h, u, d)) => {
                let hosp = h.max(u); // keep hosp >= icu
                deaths += d;
                (Some(hosp), Some(u), Some(deaths))
            }
            None => (None, None, None),
        };
        records.push(DailyRecord {
            date: start + chrono::Days::new(i as u64),
            cum_tested: tested,
            cum_positive: positive,
            hosp_level: hosp,
            icu_level: icu,
            cum_deaths: death,
        });
    }
    RegionSeries::new("prop", POPULATION, records).expect("generated series is valid")
}

proptest! {
    #[test]
    fn canonical_csv_round_trips(inc in series_strategy()) {
        let series = build_series(&inc);
        let mut buf = Vec::new();
        write_canonical_csv(&series, &mut buf).unwrap();
        let spec = SeriesSpec::new("prop", POPULATION);
        let reparsed = parse_region_series(buf.as_slice(), &spec, RepairMode::Reject).unwrap();
        prop_assert_eq!(reparsed.series, series);
    }

    #[test]
    fn observable_rates_are_cumulative(inc in series_strategy()) {
        let series = build_series(&inc);
        let mut prev_tested = 0.0;
        let mut prev_pos = 0.0;
        for date in series.dates() {
            let rates = empirical_rates(&series, date).unwrap();
            prop_assert!(rates.p_tested >= prev_tested);
            prop_assert!(rates.p_pos >= prev_pos - 1e-15);
            prop_assert!((rates.p_pos - rates.p_pos_given_tested * rates.p_tested).abs() <= f64::EPSILON);
            prop_assert!((rates.p_tested + rates.p_untested - 1.0).abs() <= f64::EPSILON);
            prev_tested = rates.p_tested;
            prev_pos = rates.p_pos;
        }
    }

    #[test]
    fn window_is_a_suffix_with_qualifying_head(inc in series_strategy(), threshold in 1u64..5_000) {
        let series = build_series(&inc);
        match analysis_window(&series, threshold) {
            Ok(window) => {
                prop_assert!(window.records()[0].cum_positive >= threshold);
                let n = window.len();
                prop_assert_eq!(&series.records()[series.len() - n..], window.records());
                // No earlier record qualifies.
                if series.len() > n {
                    prop_assert!(series.records()[series.len() - n - 1].cum_positive < threshold);
                }
            }
            Err(_) => {
                prop_assert!(series.records().last().unwrap().cum_positive < threshold);
            }
        }
    }

    #[test]
    fn bounds_nest_and_envelope_tightens(
        inc in series_strategy(),
        miss in (0.0f64..0.5, 0.5f64..1.0),
    ) {
        let series = build_series(&inc);
        let miss = MissRateInterval::new(miss.0, miss.1).unwrap();
        let monotone = AssumptionConfig::new(miss, UntestedAssumption::TESTING_MONOTONICITY);
        let vacuous = AssumptionConfig::new(
            miss,
            UntestedAssumption::Interval(ProbInterval::new(0.0, 1.0).unwrap()),
        );
        let mut per_date = Vec::new();
        for date in series.dates() {
            let rates = empirical_rates(&series, date).unwrap();
            let tm = testing_monotone_bound(&rates, &monotone).unwrap();
            let wc = worst_case_bound(&rates, &vacuous).unwrap();
            prop_assert!(tm.lo >= wc.lo - 1e-15 && tm.hi <= wc.hi + 1e-15);
            per_date.push(tm);
        }
        // Cumulative counts keep the per-date bounds consistent enough that
        // the envelope exists; it must tighten pointwise and be monotone.
        let envelope = temporal_envelope(&per_date).unwrap();
        for (i, e) in envelope.iter().enumerate() {
            prop_assert!(e.lo >= per_date[i].lo && e.hi <= per_date[i].hi + 1e-15);
            if i > 0 {
                prop_assert!(e.lo >= envelope[i - 1].lo);
                prop_assert!(e.hi >= envelope[i - 1].hi);
            }
        }
    }

    #[test]
    fn widening_assumptions_never_shrinks_bounds(
        t in 0.0f64..=1.0,
        r in 0.0f64..=1.0,
        inner in (0.2f64..0.5, 0.5f64..0.8),
        shrink in (0.0f64..0.2, 0.0f64..0.2),
    ) {
        let rates = EmpiricalRates::from_probabilities(t, r);
        let wide = MissRateInterval::new(inner.0 - shrink.0, inner.1 + shrink.1).unwrap();
        let narrow = MissRateInterval::new(inner.0, inner.1).unwrap();
        let b_wide = testing_monotone_bound(
            &rates,
            &AssumptionConfig::new(wide, UntestedAssumption::TESTING_MONOTONICITY),
        )
        .unwrap();
        let b_narrow = testing_monotone_bound(
            &rates,
            &AssumptionConfig::new(narrow, UntestedAssumption::TESTING_MONOTONICITY),
        )
        .unwrap();
        prop_assert!(b_wide.lo <= b_narrow.lo + 1e-15);
        prop_assert!(b_wide.hi >= b_narrow.hi - 1e-15);
    }

    #[test]
    fn width_decomposes_linearly(
        t in 0.0f64..=1.0,
        r in 0.0f64..=1.0,
        miss in (0.0f64..0.5, 0.5f64..1.0),
        untested in (0.0f64..0.5, 0.5f64..1.0),
    ) {
        let rates = EmpiricalRates::from_probabilities(t, r);
        let miss_iv = MissRateInterval::new(miss.0, miss.1).unwrap();
        let cfg = AssumptionConfig::new(
            miss_iv,
            UntestedAssumption::Interval(ProbInterval::new(untested.0, untested.1).unwrap()),
        );
        let b = worst_case_bound(&rates, &cfg).unwrap();
        if !b.clamped {
            let closed = (miss.1 - miss.0) * (1.0 - r) * t + (untested.1 - untested.0) * (1.0 - t);
            prop_assert!((bound_width(&b) - closed).abs() <= 1e-12);
        }
    }

    #[test]
    fn severe_bound_is_antitone_and_ordered(
        p in 0.0f64..0.05,
        lo in 0.01f64..0.3,
        widen in (0.0f64..0.009, 0.0f64..0.5),
    ) {
        let narrow = BoundInterval {
            lo,
            hi: (lo + 0.2f64).min(1.0),
            method: BoundMethod::TestingMonotone,
            clamped: false,
        };
        let wide = BoundInterval {
            lo: lo - widen.0,
            hi: (narrow.hi + widen.1).min(1.0),
            ..narrow
        };
        let b_narrow = severe_conditional_bound(p, &narrow).unwrap();
        let b_wide = severe_conditional_bound(p, &wide).unwrap();
        prop_assert!(b_narrow.lo <= b_narrow.hi);
        prop_assert!(b_wide.lo <= b_narrow.lo + 1e-15);
        prop_assert!(b_wide.hi >= b_narrow.hi - 1e-15);
    }

    #[test]
    fn simulated_worlds_respect_their_invariants(
        population in 10u32..150,
        horizon in 1u32..8,
        hazard in 0.0f64..0.4,
        budget in 0u32..10,
        triage in 1.0f64..8.0,
        miss in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let params = SimParams {
            population,
            horizon,
            daily_infection_hazard: vec![hazard],
            test_budget: vec![budget.min(population)],
            triage_strength: triage,
            miss_rate_true: miss,
            severe_hazards: None,
            seed,
        };
        let world = simulate(&params).unwrap();
        for rec in &world.persons {
            if rec.test_positive == Some(true) {
                prop_assert!(rec.infected_on.unwrap() <= rec.tested_on.unwrap());
            }
        }
        for w in world.days.windows(2) {
            prop_assert!(w[0].true_infection_rate <= w[1].true_infection_rate);
        }
        let series = world.surveillance_series("w");
        let last = series.records().last().unwrap();
        prop_assert_eq!(
            last.cum_tested,
            world.persons.iter().filter(|p| p.tested_on.is_some()).count() as u64
        );
    }
}
