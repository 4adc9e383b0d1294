//! Table rendering for the CLI: aligned text, CSV, or JSON.
//!
//! All rounding for display happens here and only here; the computation
//! pipeline carries full-precision values. Tables round probabilities
//! half-up to 3 decimals and severe-outcome rates to 5.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;

use crate::bounds::{BoundSeries, SevereBoundSeries, SevereOutcome};
use crate::error::Error;
use crate::ingest::{empirical_rates, RegionSeries};
use crate::sweep::SweepReport;

/// Round half-up at `decimals` places (0.0005 -> 0.001).
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale + 0.5).floor() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

fn fmt3(x: f64) -> String {
    format!("{:.3}", round_half_up(x, 3))
}

fn fmt5(x: f64) -> String {
    format!("{:.5}", round_half_up(x, 5))
}

#[derive(Serialize)]
struct RateRow {
    date: NaiveDate,
    p_tested: f64,
    p_pos_given_tested: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_hosp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_icu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_death: Option<f64>,
}

/// Per-date observable rates (testing rate, positive rate, severe rates
/// where available).
pub fn write_rates_report<W: Write + ?Sized>(
    series: &RegionSeries,
    format: OutputFormat,
    out: &mut W,
) -> Result<(), Error> {
    let mut rows = Vec::with_capacity(series.len());
    for date in series.dates() {
        let r = empirical_rates(series, date)?;
        rows.push(RateRow {
            date,
            p_tested: r.p_tested,
            p_pos_given_tested: r.p_pos_given_tested,
            p_hosp: r.severe.get(&SevereOutcome::Hospitalization).copied(),
            p_icu: r.severe.get(&SevereOutcome::Icu).copied(),
            p_death: r.severe.get(&SevereOutcome::Death).copied(),
        });
    }
    let has_severe = rows.iter().any(|r| r.p_hosp.is_some() || r.p_death.is_some());
    match format {
        OutputFormat::Text => {
            write!(out, "{:<12} {:>8} {:>8}", "date", "p_tested", "p_pos|t")?;
            if has_severe {
                write!(out, " {:>8} {:>8} {:>8}", "p_hosp", "p_icu", "p_death")?;
            }
            writeln!(out)?;
            for r in &rows {
                write!(
                    out,
                    "{:<12} {:>8} {:>8}",
                    r.date,
                    fmt3(r.p_tested),
                    fmt3(r.p_pos_given_tested)
                )?;
                if has_severe {
                    let cell = |v: Option<f64>| v.map(fmt5).unwrap_or_default();
                    write!(
                        out,
                        " {:>8} {:>8} {:>8}",
                        cell(r.p_hosp),
                        cell(r.p_icu),
                        cell(r.p_death)
                    )?;
                }
                writeln!(out)?;
            }
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["date", "p_tested", "p_pos_given_tested"];
            if has_severe {
                header.extend(["p_hosp", "p_icu", "p_death"]);
            }
            w.write_record(&header)?;
            for r in &rows {
                let mut rec = vec![
                    r.date.to_string(),
                    fmt3(r.p_tested),
                    fmt3(r.p_pos_given_tested),
                ];
                if has_severe {
                    let cell = |v: Option<f64>| v.map(fmt5).unwrap_or_default();
                    rec.extend([cell(r.p_hosp), cell(r.p_icu), cell(r.p_death)]);
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows).map_err(csv_json_err)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Per-date bound intervals.
pub fn write_bounds_report<W: Write + ?Sized>(
    series: &BoundSeries,
    format: OutputFormat,
    out: &mut W,
) -> Result<(), Error> {
    match format {
        OutputFormat::Text => {
            writeln!(
                out,
                "{:<12} {:>7} {:>7}  {:<17} clamped",
                "date", "lo", "hi", "method"
            )?;
            for (date, iv) in series.dates.iter().zip(&series.intervals) {
                writeln!(
                    out,
                    "{:<12} {:>7} {:>7}  {:<17} {}",
                    date,
                    fmt3(iv.lo),
                    fmt3(iv.hi),
                    iv.method.as_str(),
                    iv.clamped
                )?;
            }
        }
        OutputFormat::Csv => series.to_csv(out)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, series).map_err(csv_json_err)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Per-date, per-outcome severe-illness bounds.
pub fn write_severe_report<W: Write + ?Sized>(
    severe: &SevereBoundSeries,
    format: OutputFormat,
    out: &mut W,
) -> Result<(), Error> {
    match format {
        OutputFormat::Text => {
            writeln!(
                out,
                "{:<12} {:>16} {:>7} {:>7}",
                "date", "outcome", "lo", "hi"
            )?;
            for (date, per_outcome) in severe.dates.iter().zip(&severe.bounds) {
                for (outcome, iv) in per_outcome {
                    writeln!(
                        out,
                        "{:<12} {:>16} {:>7} {:>7}",
                        date,
                        outcome.label(),
                        fmt3(iv.lo),
                        fmt3(iv.hi)
                    )?;
                }
            }
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["date", "outcome", "lo", "hi", "clamped"])?;
            for (date, per_outcome) in severe.dates.iter().zip(&severe.bounds) {
                for (outcome, iv) in per_outcome {
                    w.write_record([
                        date.to_string(),
                        outcome.label().to_string(),
                        format!("{}", iv.lo),
                        format!("{}", iv.hi),
                        iv.clamped.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, severe).map_err(csv_json_err)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Sweep rows: `miss_lo,miss_hi,alpha_lo,method,lo,hi`.
pub fn write_sweep_report<W: Write + ?Sized>(
    report: &SweepReport,
    format: OutputFormat,
    out: &mut W,
) -> Result<(), Error> {
    match format {
        OutputFormat::Text => {
            writeln!(
                out,
                "skipped {} invalid grid point(s)",
                report.skipped_invalid
            )?;
            writeln!(
                out,
                "{:>7} {:>7} {:>8}  {:<17} {:>7} {:>7}",
                "miss_lo", "miss_hi", "alpha_lo", "method", "lo", "hi"
            )?;
            for row in &report.rows {
                writeln!(
                    out,
                    "{:>7} {:>7} {:>8}  {:<17} {:>7} {:>7}",
                    row.miss_lo,
                    row.miss_hi,
                    row.alpha_lo.map(|a| a.to_string()).unwrap_or_default(),
                    row.method.as_str(),
                    fmt3(row.interval.lo),
                    fmt3(row.interval.hi)
                )?;
            }
        }
        OutputFormat::Csv => {
            if report.skipped_invalid > 0 {
                log::warn!("skipped {} invalid grid point(s)", report.skipped_invalid);
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["miss_lo", "miss_hi", "alpha_lo", "method", "lo", "hi"])?;
            for row in &report.rows {
                w.write_record([
                    format!("{}", row.miss_lo),
                    format!("{}", row.miss_hi),
                    row.alpha_lo.map(|a| a.to_string()).unwrap_or_default(),
                    row.method.as_str().to_string(),
                    format!("{}", row.interval.lo),
                    format!("{}", row.interval.hi),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report).map_err(csv_json_err)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Coverage summary for a batch of simulated worlds.
pub fn write_coverage_report<W: Write + ?Sized>(
    reports: &[(u64, crate::sim::CoverageReport)],
    format: OutputFormat,
    out: &mut W,
) -> Result<(), Error> {
    #[derive(Serialize)]
    struct Summary<'a> {
        seeds: usize,
        seeds_fully_covered: usize,
        audit_flagged_seeds: usize,
        per_method: BTreeMap<&'a str, MethodSummary>,
    }
    #[derive(Serialize)]
    struct MethodSummary {
        days_checked: usize,
        days_covered: usize,
        worst_slack: f64,
    }

    let mut per_method: BTreeMap<&str, MethodSummary> = BTreeMap::new();
    let mut fully_covered = 0usize;
    let mut flagged = 0usize;
    for (_seed, report) in reports {
        if report.all_covered {
            fully_covered += 1;
        }
        if !report.audit.is_clean() {
            flagged += 1;
        }
        for m in &report.methods {
            let entry = per_method
                .entry(m.method.as_str())
                .or_insert(MethodSummary {
                    days_checked: 0,
                    days_covered: 0,
                    worst_slack: f64::INFINITY,
                });
            entry.days_checked += m.days_checked;
            entry.days_covered += m.days_covered;
            entry.worst_slack = entry.worst_slack.min(m.worst_slack);
        }
    }
    let summary = Summary {
        seeds: reports.len(),
        seeds_fully_covered: fully_covered,
        audit_flagged_seeds: flagged,
        per_method,
    };
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &summary).map_err(csv_json_err)?;
            writeln!(out)?;
        }
        _ => {
            writeln!(out, "seeds: {}", summary.seeds)?;
            writeln!(out, "seeds fully covered: {}", summary.seeds_fully_covered)?;
            writeln!(out, "audit-flagged seeds: {}", summary.audit_flagged_seeds)?;
            for (method, m) in &summary.per_method {
                writeln!(
                    out,
                    "{method}: {}/{} days covered, worst slack {:.6}",
                    m.days_covered, m.days_checked, m.worst_slack
                )?;
            }
        }
    }
    Ok(())
}

fn csv_json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up(0.0005, 3), 0.001);
        assert_eq!(round_half_up(0.000529, 3), 0.001);
        assert_eq!(round_half_up(0.0004999, 3), 0.0);
        assert_eq!(round_half_up(0.5104, 3), 0.510);
        assert_eq!(round_half_up(0.51051, 3), 0.511);
        assert_eq!(round_half_up(0.000275, 5), 0.00028);
        assert_eq!(round_half_up(0.184, 3), 0.184);
    }

    #[test]
    fn format_strings() {
        assert_eq!(fmt3(0.0031872), "0.003");
        assert_eq!(fmt3(0.5104), "0.510");
        assert_eq!(fmt5(0.00021004), "0.00021");
    }
}
