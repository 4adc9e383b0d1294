//! Error types shared across the crate.

use chrono::NaiveDate;
use thiserror::Error;

/// Data-validation failures while parsing or interrogating a surveillance
/// series. These indicate problems with the input feed, not with the
/// maintained assumptions.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no records")]
    Empty,
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: cum_positive {positive} exceeds cum_tested {tested} (invariant positive<=tested)")]
    PositiveExceedsTested {
        row: usize,
        positive: u64,
        tested: u64,
    },
    #[error("duplicate or out-of-order date {date} (invariant dates strictly increasing)")]
    DateOrder { date: NaiveDate },
    #[error(
        "{column} decreases from {prev} to {next} at {date} (invariant cumulative columns weakly increasing); \
         rerun with repair mode `clamp` to substitute the predecessor"
    )]
    NotCumulative {
        column: &'static str,
        date: NaiveDate,
        prev: u64,
        next: u64,
    },
    #[error("{column} {value} exceeds population {population} at {date} (invariant count<=population)")]
    ExceedsPopulation {
        column: &'static str,
        date: NaiveDate,
        value: u64,
        population: u64,
    },
    #[error("hosp_level {hosp} is below icu_level {icu} at {date} (invariant hosp>=icu)")]
    HospBelowIcu { date: NaiveDate, hosp: u64, icu: u64 },
    #[error("column {name:?} not found in header")]
    MissingColumn { name: String },
    #[error("severe column {column} has no value at {date}")]
    MissingSevere {
        column: &'static str,
        date: NaiveDate,
    },
    #[error("population must be positive")]
    ZeroPopulation,
    #[error("date {date} not present in series")]
    DateAbsent { date: NaiveDate },
    #[error("no tests recorded by {date}; positive rate undefined")]
    NoTests { date: NaiveDate },
    #[error("no date reaches {threshold} cumulative positives")]
    WindowEmpty { threshold: u64 },
    #[error("window threshold must be at least 1")]
    ZeroThreshold,
}

/// Invalid accuracy parameters (interval order, domain violations).
#[derive(Debug, Error)]
pub enum AccuracyError {
    #[error("interval order violated: lo {lo} > hi {hi}")]
    IntervalOrder { lo: f64, hi: f64 },
    #[error("{name} {value} outside [0, 1]")]
    OutOfUnit { name: &'static str, value: f64 },
    #[error("sensitivity lower bound must be positive, got {0}")]
    ZeroSensitivity(f64),
    #[error("positive rate {0} must be below 1 (division guard)")]
    PositiveRateOne(f64),
    #[error("prevalence among tested must be in (0, 1], got {0}")]
    PrevalenceOutOfRange(f64),
}

/// Invalid inputs to the bound computations.
#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("{name} {value} outside [0, 1]")]
    OutOfUnit { name: &'static str, value: f64 },
    #[error("interval order violated: lo {lo} > hi {hi}")]
    IntervalOrder { lo: f64, hi: f64 },
    #[error("worst-case bound requires an explicit untested-infection interval")]
    UntestedIntervalRequired,
    #[error("testing-monotonicity bound requires untested = testing_monotonicity")]
    MonotonicityTagRequired,
    #[error("asymptomatic refinement requires an alpha interval")]
    AlphaRequired,
    #[error("alpha upper bound must be below 1, got {0}")]
    AlphaHiNotBelowOne(f64),
    #[error("ppv_one must be true; bounds without the perfect-PPV assumption are not supported")]
    PpvOneRequired,
    #[error("stratum weights sum to {sum}, expected 1 within 1e-9")]
    WeightsNotNormalized { sum: f64 },
    #[error("stratum weight for {key} is negative ({weight})")]
    NegativeWeight { key: String, weight: f64 },
    #[error("weights supplied for {got} strata, expected {expected}")]
    WeightsKeyMismatch { got: usize, expected: usize },
    #[error("per-date assumption list has {got} entries, series has {expected} dates")]
    PerDateLengthMismatch { got: usize, expected: usize },
    #[error("empty bound sequence")]
    EmptySequence,
}

/// The data refute the maintained assumptions. Unlike [`BoundsError`] these
/// are not input mistakes: they mean the declared assumption set is jointly
/// inconsistent with the observed counts and the user must know.
#[derive(Debug, Error)]
pub enum InconsistencyError {
    #[error(
        "bound crossing at {date}: envelope lower {lo} exceeds upper {hi}; \
         the maintained assumptions are jointly refuted by the data"
    )]
    Crossing { date: NaiveDate, lo: f64, hi: f64 },
    #[error(
        "bound crossing at index {index}: envelope lower {lo} exceeds upper {hi}; \
         the maintained assumptions are jointly refuted by the data"
    )]
    CrossingAt { index: usize, lo: f64, hi: f64 },
    #[error(
        "severe-outcome rate {p_severe} exceeds the infection upper bound {hi}; \
         the data refute severe ⇒ infected"
    )]
    SevereExceedsInfection { p_severe: f64, hi: f64 },
}

/// Invalid sweep grids.
#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep grid axis {axis} is empty")]
    EmptyAxis { axis: &'static str },
    #[error("empty valid grid: no point satisfies miss_lo <= miss_hi")]
    EmptyValidGrid,
    #[error("method {0} is not supported in sweeps")]
    UnsupportedMethod(String),
    #[error("method asym_refined requires an alpha_lo axis")]
    AlphaAxisRequired,
}

/// Invalid simulation parameters.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("population must be positive")]
    ZeroPopulation,
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("{name} has {got} entries, expected 1 or {expected}")]
    ScheduleLength {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{name} {value} outside [0, 1]")]
    OutOfUnit { name: &'static str, value: f64 },
    #[error("test budget {budget} exceeds population {population}")]
    BudgetExceedsPopulation { budget: u32, population: u32 },
    #[error("triage_strength must be >= 1 (got {0}); weaker-than-random triage breaks testing monotonicity")]
    TriageBelowOne(f64),
    #[error("no day with a positive test budget; coverage cannot be checked")]
    NoTests,
}

/// Problems in the run configuration file or CLI flags.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("config is missing section {0:?}")]
    MissingSection(&'static str),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Umbrella error for pipeline entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Accuracy(#[from] AccuracyError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Inconsistency(#[from] InconsistencyError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the offending file to the message.
    pub fn in_file(self, path: impl Into<String>) -> Error {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code the CLI maps this error to: 1 usage/config,
    /// 2 data validation, 3 assumption inconsistency.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Inconsistency(_) => 3,
            Error::InFile { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
