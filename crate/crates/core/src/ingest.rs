//! Parsing, validation, and normalization of cumulative surveillance series.
//!
//! Input is delimiter-separated text with a header row; the canonical column
//! names are `date,cum_tested,cum_positive,hosp_level,icu_level,cum_deaths`
//! with ISO-8601 dates. Feeds with different headers are adapted through a
//! [`ColumnMapping`]. All operations are pure; a parsed [`RegionSeries`] is
//! immutable and safe to share across threads.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::bounds::SevereOutcome;
use crate::error::IngestError;

/// One day of cumulative surveillance counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub cum_tested: u64,
    pub cum_positive: u64,
    pub hosp_level: Option<u64>,
    pub icu_level: Option<u64>,
    pub cum_deaths: Option<u64>,
}

/// Whether a severe-outcome column reports a point-in-time level or a
/// cumulative count. Cumulative columns must be weakly increasing; levels
/// may decline (hospital occupancy does as patients recover).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSemantics {
    Level,
    Cumulative,
}

/// Per-column semantics for the severe-outcome columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SevereSemantics {
    pub hosp_level: CountSemantics,
    pub icu_level: CountSemantics,
    pub cum_deaths: CountSemantics,
}

impl Default for SevereSemantics {
    fn default() -> Self {
        SevereSemantics {
            hosp_level: CountSemantics::Level,
            icu_level: CountSemantics::Level,
            cum_deaths: CountSemantics::Cumulative,
        }
    }
}

/// Maps canonical field names to the column names used by a feed.
/// Severe columns are optional; a mapped severe column that is absent from
/// the header is treated as not provided.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub date: String,
    pub cum_tested: String,
    pub cum_positive: String,
    pub hosp_level: Option<String>,
    pub icu_level: Option<String>,
    pub cum_deaths: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            date: "date".into(),
            cum_tested: "cum_tested".into(),
            cum_positive: "cum_positive".into(),
            hosp_level: Some("hosp_level".into()),
            icu_level: Some("icu_level".into()),
            cum_deaths: Some("cum_deaths".into()),
        }
    }
}

/// Everything needed to turn a raw feed into a [`RegionSeries`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub region_id: String,
    pub population: u64,
    #[serde(default)]
    pub columns: ColumnMapping,
    #[serde(default)]
    pub severe_semantics: SevereSemantics,
}

impl SeriesSpec {
    pub fn new(region_id: impl Into<String>, population: u64) -> Self {
        SeriesSpec {
            region_id: region_id.into(),
            population,
            columns: ColumnMapping::default(),
            severe_semantics: SevereSemantics::default(),
        }
    }
}

/// What to do with a decreasing value in a cumulative column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepairMode {
    /// Reject the feed (default): silent repair hides upstream corruption.
    #[default]
    Reject,
    /// Replace the decreasing value with its predecessor and record it.
    Clamp,
}

/// A clamp applied during parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub column: &'static str,
    pub date: NaiveDate,
    pub original: u64,
    pub clamped_to: u64,
}

/// Parse output: the validated series plus any repairs that were applied.
#[derive(Debug, Clone)]
pub struct ParsedSeries {
    pub series: RegionSeries,
    pub repairs: Vec<Repair>,
}

/// A region's population plus its date-ordered cumulative records.
///
/// Construction validates every type invariant; the value is immutable
/// afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionSeries {
    region_id: String,
    population: u64,
    records: Vec<DailyRecord>,
}

impl RegionSeries {
    /// Validate and construct with the canonical severe-column semantics.
    pub fn new(
        region_id: impl Into<String>,
        population: u64,
        records: Vec<DailyRecord>,
    ) -> Result<Self, IngestError> {
        Self::with_semantics(region_id, population, records, SevereSemantics::default())
    }

    pub fn with_semantics(
        region_id: impl Into<String>,
        population: u64,
        records: Vec<DailyRecord>,
        semantics: SevereSemantics,
    ) -> Result<Self, IngestError> {
        if population == 0 {
            return Err(IngestError::ZeroPopulation);
        }
        if records.is_empty() {
            return Err(IngestError::Empty);
        }
        let mut prev: Option<&DailyRecord> = None;
        for rec in &records {
            if let Some(p) = prev {
                if rec.date <= p.date {
                    return Err(IngestError::DateOrder { date: rec.date });
                }
                check_cumulative("cum_tested", p.cum_tested, rec.cum_tested, rec.date)?;
                check_cumulative("cum_positive", p.cum_positive, rec.cum_positive, rec.date)?;
                if semantics.cum_deaths == CountSemantics::Cumulative {
                    if let (Some(a), Some(b)) = (p.cum_deaths, rec.cum_deaths) {
                        check_cumulative("cum_deaths", a, b, rec.date)?;
                    }
                }
                if semantics.hosp_level == CountSemantics::Cumulative {
                    if let (Some(a), Some(b)) = (p.hosp_level, rec.hosp_level) {
                        check_cumulative("hosp_level", a, b, rec.date)?;
                    }
                }
                if semantics.icu_level == CountSemantics::Cumulative {
                    if let (Some(a), Some(b)) = (p.icu_level, rec.icu_level) {
                        check_cumulative("icu_level", a, b, rec.date)?;
                    }
                }
            }
            if rec.cum_positive > rec.cum_tested {
                return Err(IngestError::PositiveExceedsTested {
                    row: 0,
                    positive: rec.cum_positive,
                    tested: rec.cum_tested,
                });
            }
            for (column, value) in [
                ("cum_tested", Some(rec.cum_tested)),
                ("cum_positive", Some(rec.cum_positive)),
                ("hosp_level", rec.hosp_level),
                ("icu_level", rec.icu_level),
                ("cum_deaths", rec.cum_deaths),
            ] {
                if let Some(v) = value {
                    if v > population {
                        return Err(IngestError::ExceedsPopulation {
                            column,
                            date: rec.date,
                            value: v,
                            population,
                        });
                    }
                }
            }
            if let (Some(h), Some(u)) = (rec.hosp_level, rec.icu_level) {
                if h < u {
                    return Err(IngestError::HospBelowIcu {
                        date: rec.date,
                        hosp: h,
                        icu: u,
                    });
                }
            }
            prev = Some(rec);
        }
        Ok(RegionSeries {
            region_id: region_id.into(),
            population,
            records,
        })
    }

    pub fn region_id(&self) -> &str {
        &self.region_id
    }

    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn records(&self) -> &[DailyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.records.iter().map(|r| r.date)
    }

    pub fn record(&self, date: NaiveDate) -> Option<&DailyRecord> {
        self.records
            .binary_search_by_key(&date, |r| r.date)
            .ok()
            .map(|i| &self.records[i])
    }
}

fn check_cumulative(
    column: &'static str,
    prev: u64,
    next: u64,
    date: NaiveDate,
) -> Result<(), IngestError> {
    if next < prev {
        Err(IngestError::NotCumulative {
            column,
            date,
            prev,
            next,
        })
    } else {
        Ok(())
    }
}

/// The directly observable probabilities for one date.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRates {
    /// P(tested by d)
    pub p_tested: f64,
    /// P(not tested by d) = 1 - p_tested
    pub p_untested: f64,
    /// P(positive | tested)
    pub p_pos_given_tested: f64,
    /// P(negative | tested) = 1 - p_pos_given_tested
    pub p_neg_given_tested: f64,
    /// P(positive by d) = p_pos_given_tested · p_tested
    pub p_pos: f64,
    /// Severe-outcome rates, present only where the feed has the columns.
    pub severe: BTreeMap<SevereOutcome, f64>,
}

impl EmpiricalRates {
    /// Build from raw probabilities. `p_untested`, `p_neg_given_tested` and
    /// `p_pos` are derived so the identities hold exactly.
    pub fn from_probabilities(p_tested: f64, p_pos_given_tested: f64) -> Self {
        EmpiricalRates {
            p_tested,
            p_untested: 1.0 - p_tested,
            p_pos_given_tested,
            p_neg_given_tested: 1.0 - p_pos_given_tested,
            p_pos: p_pos_given_tested * p_tested,
            severe: BTreeMap::new(),
        }
    }
}

/// Parse a raw feed into a validated series.
///
/// Rows may arrive in any order; records are sorted by date before
/// validation. Decreasing values in cumulative columns are rejected unless
/// `repair` is [`RepairMode::Clamp`], in which case the value is replaced by
/// its predecessor and reported in the result.
pub fn parse_region_series<R: Read>(
    raw: R,
    spec: &SeriesSpec,
    repair: RepairMode,
) -> Result<ParsedSeries, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(raw);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::MalformedRow {
            row: 0,
            reason: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);

    let idx_date = col(&spec.columns.date).ok_or_else(|| IngestError::MissingColumn {
        name: spec.columns.date.clone(),
    })?;
    let idx_tested = col(&spec.columns.cum_tested).ok_or_else(|| IngestError::MissingColumn {
        name: spec.columns.cum_tested.clone(),
    })?;
    let idx_positive =
        col(&spec.columns.cum_positive).ok_or_else(|| IngestError::MissingColumn {
            name: spec.columns.cum_positive.clone(),
        })?;
    let idx_hosp = spec.columns.hosp_level.as_deref().and_then(col);
    let idx_icu = spec.columns.icu_level.as_deref().and_then(col);
    let idx_deaths = spec.columns.cum_deaths.as_deref().and_then(col);

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| IngestError::MalformedRow {
            row: row_no,
            reason: e.to_string(),
        })?;
        let field = |idx: usize| row.get(idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(idx_date), "%Y-%m-%d").map_err(|e| {
            IngestError::MalformedRow {
                row: row_no,
                reason: format!("bad date {:?}: {e}", field(idx_date)),
            }
        })?;
        let count = |idx: usize, name: &str| -> Result<u64, IngestError> {
            field(idx)
                .parse::<u64>()
                .map_err(|e| IngestError::MalformedRow {
                    row: row_no,
                    reason: format!("bad {name} {:?}: {e}", field(idx)),
                })
        };
        let opt_count = |idx: Option<usize>, name: &str| -> Result<Option<u64>, IngestError> {
            match idx {
                Some(idx) if !field(idx).is_empty() => count(idx, name).map(Some),
                _ => Ok(None),
            }
        };
        let cum_tested = count(idx_tested, "cum_tested")?;
        let cum_positive = count(idx_positive, "cum_positive")?;
        if cum_positive > cum_tested {
            return Err(IngestError::PositiveExceedsTested {
                row: row_no,
                positive: cum_positive,
                tested: cum_tested,
            });
        }
        records.push(DailyRecord {
            date,
            cum_tested,
            cum_positive,
            hosp_level: opt_count(idx_hosp, "hosp_level")?,
            icu_level: opt_count(idx_icu, "icu_level")?,
            cum_deaths: opt_count(idx_deaths, "cum_deaths")?,
        });
    }
    if records.is_empty() {
        return Err(IngestError::Empty);
    }
    records.sort_by_key(|r| r.date);

    let mut repairs = Vec::new();
    if repair == RepairMode::Clamp {
        clamp_cumulative(&mut records, &spec.severe_semantics, &mut repairs);
        for r in &repairs {
            log::warn!(
                "repaired {} at {}: {} clamped to {}",
                r.column,
                r.date,
                r.original,
                r.clamped_to
            );
        }
    }

    let series = RegionSeries::with_semantics(
        spec.region_id.clone(),
        spec.population,
        records,
        spec.severe_semantics,
    )?;
    Ok(ParsedSeries { series, repairs })
}

type FieldAccess = fn(&mut DailyRecord) -> Option<&mut u64>;

fn clamp_cumulative(
    records: &mut [DailyRecord],
    semantics: &SevereSemantics,
    repairs: &mut Vec<Repair>,
) {
    let mut fields: Vec<(&'static str, FieldAccess)> = vec![
        ("cum_tested", |r| Some(&mut r.cum_tested)),
        ("cum_positive", |r| Some(&mut r.cum_positive)),
    ];
    if semantics.cum_deaths == CountSemantics::Cumulative {
        fields.push(("cum_deaths", |r| r.cum_deaths.as_mut()));
    }
    if semantics.hosp_level == CountSemantics::Cumulative {
        fields.push(("hosp_level", |r| r.hosp_level.as_mut()));
    }
    if semantics.icu_level == CountSemantics::Cumulative {
        fields.push(("icu_level", |r| r.icu_level.as_mut()));
    }
    for (column, access) in fields {
        let mut prev: Option<u64> = None;
        for rec in records.iter_mut() {
            let date = rec.date;
            if let Some(v) = access(rec) {
                if let Some(p) = prev {
                    if *v < p {
                        repairs.push(Repair {
                            column,
                            date,
                            original: *v,
                            clamped_to: p,
                        });
                        *v = p;
                    }
                }
                prev = Some(*v);
            }
        }
    }
}

/// Suffix of the series starting at the first date with at least `threshold`
/// cumulative positives.
pub fn analysis_window(
    series: &RegionSeries,
    threshold: u64,
) -> Result<RegionSeries, IngestError> {
    if threshold == 0 {
        return Err(IngestError::ZeroThreshold);
    }
    let start = series
        .records
        .iter()
        .position(|r| r.cum_positive >= threshold)
        .ok_or(IngestError::WindowEmpty { threshold })?;
    Ok(RegionSeries {
        region_id: series.region_id.clone(),
        population: series.population,
        records: series.records[start..].to_vec(),
    })
}

/// Frequency estimates of the observable quantities at one date.
///
/// Requires at least one test by the date, otherwise the positive rate among
/// the tested is undefined. Severe entries are populated only where the feed
/// carries the columns; hospital and ICU levels, like cumulative deaths, are
/// divided by population size.
pub fn empirical_rates(
    series: &RegionSeries,
    date: NaiveDate,
) -> Result<EmpiricalRates, IngestError> {
    let rec = series
        .record(date)
        .ok_or(IngestError::DateAbsent { date })?;
    if rec.cum_tested == 0 {
        return Err(IngestError::NoTests { date });
    }
    let pop = series.population as f64;
    let mut rates = EmpiricalRates::from_probabilities(
        rec.cum_tested as f64 / pop,
        rec.cum_positive as f64 / rec.cum_tested as f64,
    );
    if let Some(h) = rec.hosp_level {
        rates
            .severe
            .insert(SevereOutcome::Hospitalization, h as f64 / pop);
    }
    if let Some(u) = rec.icu_level {
        rates.severe.insert(SevereOutcome::Icu, u as f64 / pop);
    }
    if let Some(d) = rec.cum_deaths {
        rates.severe.insert(SevereOutcome::Death, d as f64 / pop);
    }
    Ok(rates)
}

/// Write the canonical CSV schema (all six columns, blanks for absent data).
pub fn write_canonical_csv<W: Write>(series: &RegionSeries, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "date",
        "cum_tested",
        "cum_positive",
        "hosp_level",
        "icu_level",
        "cum_deaths",
    ])?;
    let cell = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &series.records {
        w.write_record([
            r.date.format("%Y-%m-%d").to_string(),
            r.cum_tested.to_string(),
            r.cum_positive.to_string(),
            cell(r.hosp_level),
            cell(r.icu_level),
            cell(r.cum_deaths),
        ])?;
    }
    w.flush()?;
    Ok(())
}
