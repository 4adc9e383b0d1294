//! Grid evaluation of the bound pipeline over assumption configurations.
//!
//! A sweep makes the sensitivity of conclusions to the declared assumptions
//! explicit: one row per (miss_lo, miss_hi, alpha_lo, method) grid point.
//! Points with miss_lo > miss_hi are skipped and counted rather than
//! rejected, so convenient Cartesian grids just work. Output order is fixed
//! (axes sorted ascending, methods by name), so results are bit-identical
//! across runs regardless of evaluation strategy.

use chrono::NaiveDate;
use serde::Serialize;

use crate::accuracy::MissRateInterval;
use crate::bounds::{
    compute_bound_series, AssumptionConfig, BoundInterval, BoundMethod, ProbInterval,
    UntestedAssumption,
};
use crate::error::{Error, IngestError, SweepError};
use crate::ingest::RegionSeries;

/// Axes of the sweep. The untested assumption is testing monotonicity for
/// every point; sweeping is about miss-rate and asymptomatic-share
/// uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SweepGrid {
    pub miss_lo_values: Vec<f64>,
    pub miss_hi_values: Vec<f64>,
    #[serde(default)]
    pub alpha_lo_values: Option<Vec<f64>>,
    pub methods: Vec<BoundMethod>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub miss_lo: f64,
    pub miss_hi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_lo: Option<f64>,
    pub method: BoundMethod,
    pub interval: BoundInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub eval_date: NaiveDate,
    pub rows: Vec<SweepRow>,
    pub skipped_invalid: usize,
}

/// Evaluate the grid at one date of the series. Envelope-style methods use
/// the whole series and report the interval at `eval_date`.
pub fn run_sweep(
    series: &RegionSeries,
    grid: &SweepGrid,
    eval_date: NaiveDate,
) -> Result<SweepReport, Error> {
    validate_grid(grid)?;
    if series.record(eval_date).is_none() {
        return Err(IngestError::DateAbsent { date: eval_date }.into());
    }

    let mut miss_los = grid.miss_lo_values.clone();
    let mut miss_his = grid.miss_hi_values.clone();
    let mut alphas: Vec<Option<f64>> = match &grid.alpha_lo_values {
        Some(values) => values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    miss_los.sort_by(f64::total_cmp);
    miss_his.sort_by(f64::total_cmp);
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut methods = grid.methods.clone();
    methods.sort_by_key(|m| m.as_str());
    methods.dedup();

    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for &miss_lo in &miss_los {
        for &miss_hi in &miss_his {
            if miss_lo > miss_hi {
                skipped += 1;
                continue;
            }
            let miss_rate = MissRateInterval::new(miss_lo, miss_hi)?;
            for &alpha_lo in &alphas {
                for &method in &methods {
                    let alpha = match (method, alpha_lo) {
                        (BoundMethod::AsymRefined, Some(a)) => {
                            Some(ProbInterval::new(a, a).map_err(Error::from)?)
                        }
                        _ => None,
                    };
                    let cfg = AssumptionConfig {
                        miss_rate,
                        untested: UntestedAssumption::TESTING_MONOTONICITY,
                        alpha,
                        ppv_one: true,
                    };
                    let bound_series = compute_bound_series(series, &cfg, method)?;
                    let interval = *bound_series
                        .at(eval_date)
                        .expect("eval_date checked against series");
                    rows.push(SweepRow {
                        miss_lo,
                        miss_hi,
                        alpha_lo,
                        method,
                        interval,
                    });
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(SweepError::EmptyValidGrid.into());
    }
    Ok(SweepReport {
        eval_date,
        rows,
        skipped_invalid: skipped,
    })
}

fn validate_grid(grid: &SweepGrid) -> Result<(), Error> {
    if grid.miss_lo_values.is_empty() {
        return Err(SweepError::EmptyAxis { axis: "miss_lo" }.into());
    }
    if grid.miss_hi_values.is_empty() {
        return Err(SweepError::EmptyAxis { axis: "miss_hi" }.into());
    }
    if grid.methods.is_empty() {
        return Err(SweepError::EmptyAxis { axis: "methods" }.into());
    }
    if let Some(alphas) = &grid.alpha_lo_values {
        if alphas.is_empty() {
            return Err(SweepError::EmptyAxis { axis: "alpha_lo" }.into());
        }
        for &a in alphas {
            if !(a.is_finite() && (0.0..1.0).contains(&a)) {
                return Err(SweepError::UnsupportedMethod(format!(
                    "alpha_lo {a} outside [0, 1)"
                ))
                .into());
            }
        }
    }
    for method in &grid.methods {
        match method {
            BoundMethod::TestingMonotone | BoundMethod::TemporalEnvelope => {}
            BoundMethod::AsymRefined => {
                if grid.alpha_lo_values.is_none() {
                    return Err(SweepError::AlphaAxisRequired.into());
                }
            }
            other => {
                return Err(SweepError::UnsupportedMethod(other.as_str().to_string()).into())
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DailyRecord;

    fn series() -> RegionSeries {
        let mk = |d: u32, tested, positive| DailyRecord {
            date: NaiveDate::from_ymd_opt(2020, 3, d).unwrap(),
            cum_tested: tested,
            cum_positive: positive,
            hosp_level: None,
            icu_level: None,
            cum_deaths: None,
        };
        RegionSeries::new(
            "test",
            1_000_000,
            vec![mk(16, 2000, 400), mk(17, 3500, 720), mk(18, 6000, 1150)],
        )
        .unwrap()
    }

    fn eval_date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, 18).unwrap()
    }

    #[test]
    fn singleton_grid_gives_one_row_per_method() {
        let grid = SweepGrid {
            miss_lo_values: vec![0.1],
            miss_hi_values: vec![0.4],
            alpha_lo_values: None,
            methods: vec![BoundMethod::TemporalEnvelope],
        };
        let report = run_sweep(&series(), &grid, eval_date()).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.skipped_invalid, 0);
        let row = &report.rows[0];
        assert_eq!(row.method, BoundMethod::TemporalEnvelope);
        assert!(row.interval.lo < row.interval.hi);
    }

    #[test]
    fn fully_invalid_grid_is_an_error() {
        let grid = SweepGrid {
            miss_lo_values: vec![0.5, 0.6],
            miss_hi_values: vec![0.4],
            alpha_lo_values: None,
            methods: vec![BoundMethod::TestingMonotone],
        };
        assert!(matches!(
            run_sweep(&series(), &grid, eval_date()),
            Err(Error::Sweep(SweepError::EmptyValidGrid))
        ));
    }

    #[test]
    fn invalid_points_skipped_with_count() {
        let grid = SweepGrid {
            miss_lo_values: vec![0.1, 0.5],
            miss_hi_values: vec![0.4],
            alpha_lo_values: None,
            methods: vec![BoundMethod::TestingMonotone],
        };
        let report = run_sweep(&series(), &grid, eval_date()).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.skipped_invalid, 1);
    }

    #[test]
    fn widening_miss_lo_only_moves_the_lower_endpoint() {
        let grid = SweepGrid {
            miss_lo_values: vec![0.0, 0.1],
            miss_hi_values: vec![0.4],
            alpha_lo_values: None,
            methods: vec![BoundMethod::TestingMonotone],
        };
        let report = run_sweep(&series(), &grid, eval_date()).unwrap();
        assert_eq!(report.rows.len(), 2);
        let (a, b) = (&report.rows[0], &report.rows[1]);
        assert!(a.miss_lo < b.miss_lo);
        assert!(a.interval.lo <= b.interval.lo);
        assert_eq!(a.interval.hi, b.interval.hi);
    }

    #[test]
    fn sweep_output_is_reproducible() {
        let grid = SweepGrid {
            miss_lo_values: vec![0.1, 0.0, 0.2],
            miss_hi_values: vec![0.4, 0.3],
            alpha_lo_values: Some(vec![0.25, 0.0]),
            methods: vec![
                BoundMethod::AsymRefined,
                BoundMethod::TemporalEnvelope,
                BoundMethod::TestingMonotone,
            ],
        };
        let a = run_sweep(&series(), &grid, eval_date()).unwrap();
        let b = run_sweep(&series(), &grid, eval_date()).unwrap();
        assert_eq!(a, b);
        // Rows ordered lexicographically in the sorted axes.
        let keys: Vec<_> = a
            .rows
            .iter()
            .map(|r| (r.miss_lo, r.miss_hi, r.alpha_lo, r.method.as_str()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(keys, sorted);
    }

    #[test]
    fn refined_method_needs_alpha_axis() {
        let grid = SweepGrid {
            miss_lo_values: vec![0.1],
            miss_hi_values: vec![0.4],
            alpha_lo_values: None,
            methods: vec![BoundMethod::AsymRefined],
        };
        assert!(matches!(
            run_sweep(&series(), &grid, eval_date()),
            Err(Error::Sweep(SweepError::AlphaAxisRequired))
        ));
    }

    #[test]
    fn unsupported_method_rejected() {
        let grid = SweepGrid {
            miss_lo_values: vec![0.1],
            miss_hi_values: vec![0.4],
            alpha_lo_values: None,
            methods: vec![BoundMethod::SevereRatio],
        };
        assert!(matches!(
            run_sweep(&series(), &grid, eval_date()),
            Err(Error::Sweep(SweepError::UnsupportedMethod(_)))
        ));
    }
}
