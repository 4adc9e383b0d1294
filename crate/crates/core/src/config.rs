//! The JSON run-config schema shared by every CLI subcommand.
//!
//! One file describes a region's feed (id, population, column mapping,
//! severe-column semantics), the accuracy assumption, the identification
//! assumptions, and optional sweep / simulation sections. Sections are
//! validated lazily: a subcommand only requires the parts it uses.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::accuracy::{AccuracySpec, MissRateInterval};
use crate::bounds::{AssumptionConfig, ProbInterval, UntestedAssumption};
use crate::error::{ConfigError, Error};
use crate::ingest::{ColumnMapping, SeriesSpec, SevereSemantics};
use crate::sim::SimParams;
use crate::sweep::SweepGrid;

/// Assumption block of the run config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsSection {
    pub untested: UntestedAssumption,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ProbInterval>,
    #[serde(default = "default_true")]
    pub ppv_one: bool,
}

fn default_true() -> bool {
    true
}

impl Default for AssumptionsSection {
    fn default() -> Self {
        AssumptionsSection {
            untested: UntestedAssumption::TESTING_MONOTONICITY,
            alpha: None,
            ppv_one: true,
        }
    }
}

/// Simulation block: parameters plus how many consecutive seeds to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSection {
    #[serde(flatten)]
    pub params: SimParams,
    #[serde(default = "default_runs")]
    pub runs: u32,
}

fn default_runs() -> u32 {
    1
}

/// Sweep block: the grid plus the date to report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    #[serde(flatten)]
    pub grid: SweepGrid,
    pub eval_date: chrono::NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub region_id: Option<String>,
    #[serde(default)]
    pub population: Option<u64>,
    #[serde(default)]
    pub columns: Option<ColumnMapping>,
    #[serde(default)]
    pub severe_semantics: Option<SevereSemantics>,
    /// Default input path, overridable with `--input`.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub accuracy: Option<AccuracySpec>,
    #[serde(default)]
    pub assumptions: Option<AssumptionsSection>,
    /// Analysis-window threshold on cumulative positives (default 100).
    #[serde(default)]
    pub window_threshold: Option<u64>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
}

impl RunConfig {
    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(json)?)
    }

    /// The feed description; requires `region_id` and `population`.
    pub fn series_spec(&self) -> Result<SeriesSpec, Error> {
        let region_id = self
            .region_id
            .clone()
            .ok_or(ConfigError::MissingSection("region_id"))?;
        let population = self
            .population
            .ok_or(ConfigError::MissingSection("population"))?;
        if population == 0 {
            return Err(ConfigError::Invalid("population must be positive".into()).into());
        }
        Ok(SeriesSpec {
            region_id,
            population,
            columns: self.columns.clone().unwrap_or_default(),
            severe_semantics: self.severe_semantics.unwrap_or_default(),
        })
    }

    pub fn window_threshold(&self) -> u64 {
        self.window_threshold.unwrap_or(100)
    }

    /// Resolve the miss-rate interval from the accuracy section. The default
    /// is an NPV interval of [0.6, 0.9], i.e. a miss rate in [0.1, 0.4].
    /// `p_pos_given_tested` feeds the sensitivity reading when used.
    pub fn miss_rate(&self, p_pos_given_tested: Option<f64>) -> Result<MissRateInterval, Error> {
        let spec = self
            .accuracy
            .unwrap_or(AccuracySpec::NpvInterval { lo: 0.6, hi: 0.9 });
        Ok(spec.to_miss_rate(p_pos_given_tested)?)
    }

    /// Assemble the bound assumptions, honoring CLI overrides.
    pub fn assumption_config(
        &self,
        miss_override: Option<MissRateInterval>,
        alpha_override: Option<ProbInterval>,
    ) -> Result<AssumptionConfig, Error> {
        let section = self.assumptions.unwrap_or_default();
        let miss_rate = match miss_override {
            Some(m) => m,
            None => self.miss_rate(None)?,
        };
        let cfg = AssumptionConfig {
            miss_rate,
            untested: section.untested,
            alpha: alpha_override.or(section.alpha),
            ppv_one: section.ppv_one,
        };
        cfg.validate().map_err(Error::from)?;
        Ok(cfg)
    }

    pub fn sweep_section(&self) -> Result<&SweepSection, Error> {
        self.sweep
            .as_ref()
            .ok_or_else(|| ConfigError::MissingSection("sweep").into())
    }

    pub fn simulate_section(&self) -> Result<&SimulateSection, Error> {
        self.simulate
            .as_ref()
            .ok_or_else(|| ConfigError::MissingSection("simulate").into())
    }
}
