//! Test-accuracy algebra.
//!
//! The bound computations consume a single quantity: the miss-rate interval,
//! i.e. bounds on the probability that an infected, tested person received a
//! negative result. Users may think in terms of NPV, of sensitivity, or of
//! the miss rate directly; this module normalizes all three to
//! [`MissRateInterval`] under the maintained assumption that the positive
//! predictive value of the test equals one (equivalently, specificity equals
//! one).

use serde::{Deserialize, Serialize};

use crate::error::AccuracyError;

/// Bounds on P(infected | tested, negative result).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissRateInterval {
    pub lo: f64,
    pub hi: f64,
}

impl MissRateInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, AccuracyError> {
        check_unit("miss rate lo", lo)?;
        check_unit("miss rate hi", hi)?;
        if lo > hi {
            return Err(AccuracyError::IntervalOrder { lo, hi });
        }
        Ok(MissRateInterval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// How the user declares test accuracy in the run config.
///
/// Serialized as `{"kind": "npv_interval", "lo": 0.6, "hi": 0.9}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AccuracySpec {
    NpvInterval { lo: f64, hi: f64 },
    SensitivityInterval { lo: f64, hi: f64 },
    DirectMissRate { lo: f64, hi: f64 },
}

impl AccuracySpec {
    /// Normalize to a miss-rate interval. The sensitivity reading depends on
    /// the observed positive rate among the tested, so callers resolving a
    /// sensitivity spec must supply it; the other kinds ignore it.
    pub fn to_miss_rate(
        &self,
        p_pos_given_tested: Option<f64>,
    ) -> Result<MissRateInterval, AccuracyError> {
        match *self {
            AccuracySpec::NpvInterval { lo, hi } => miss_rate_from_npv(lo, hi),
            AccuracySpec::SensitivityInterval { lo, hi } => {
                let r = p_pos_given_tested.ok_or(AccuracyError::PositiveRateOne(1.0))?;
                miss_rate_from_sensitivity(lo, hi, r)
            }
            AccuracySpec::DirectMissRate { lo, hi } => MissRateInterval::new(lo, hi),
        }
    }
}

/// NPV in [npv_lo, npv_hi] means the miss rate lies in [1 - npv_hi, 1 - npv_lo].
pub fn miss_rate_from_npv(npv_lo: f64, npv_hi: f64) -> Result<MissRateInterval, AccuracyError> {
    check_unit("npv lo", npv_lo)?;
    check_unit("npv hi", npv_hi)?;
    if npv_lo > npv_hi {
        return Err(AccuracyError::IntervalOrder {
            lo: npv_lo,
            hi: npv_hi,
        });
    }
    MissRateInterval::new(1.0 - npv_hi, 1.0 - npv_lo)
}

/// Miss rate implied by a sensitivity bound when specificity equals one.
///
/// With specificity one, every positive result comes from an infected person,
/// so the infection rate among the tested is r/s where r is the observed
/// positive rate and s the sensitivity. Bayes theorem then gives the miss
/// rate at sensitivity s:
///
/// ```text
/// m(s) = r (1 - s) / (s (1 - r))
/// ```
///
/// m is decreasing in s, so the interval is [m(sens_hi), m(sens_lo)]. The
/// output is clamped to [0, 1]; a clamp only occurs when r marginally
/// exceeds sens_lo (noisy data) and is logged rather than rejected.
pub fn miss_rate_from_sensitivity(
    sens_lo: f64,
    sens_hi: f64,
    p_pos_given_tested: f64,
) -> Result<MissRateInterval, AccuracyError> {
    check_unit("sensitivity lo", sens_lo)?;
    check_unit("sensitivity hi", sens_hi)?;
    check_unit("positive rate", p_pos_given_tested)?;
    if sens_lo > sens_hi {
        return Err(AccuracyError::IntervalOrder {
            lo: sens_lo,
            hi: sens_hi,
        });
    }
    if sens_lo <= 0.0 {
        return Err(AccuracyError::ZeroSensitivity(sens_lo));
    }
    let r = p_pos_given_tested;
    if r >= 1.0 {
        return Err(AccuracyError::PositiveRateOne(r));
    }
    if r > sens_lo {
        log::warn!(
            "positive rate {r} exceeds sensitivity lower bound {sens_lo}; \
             implied tested-infection rate exceeds 1, clamping miss rate"
        );
    }
    let m = |s: f64| (r * (1.0 - s) / (s * (1.0 - r))).clamp(0.0, 1.0);
    MissRateInterval::new(m(sens_hi), m(sens_lo))
}

/// Whether the PPV implied by Bayes theorem equals one.
///
/// PPV = s·π / (s·π + (1-spec)(1-π)) for any sensitivity s > 0, so PPV = 1
/// exactly when the false-positive mass (1-spec)(1-π) vanishes. For
/// prevalence π in (0, 1) that happens if and only if specificity equals
/// one; at π = 1 the equivalence degenerates (no uninfected tested persons,
/// PPV = 1 regardless).
pub fn ppv_is_one_iff_specificity_one(
    spec: f64,
    prevalence_tested: f64,
) -> Result<bool, AccuracyError> {
    check_unit("specificity", spec)?;
    if !(prevalence_tested > 0.0 && prevalence_tested <= 1.0) {
        return Err(AccuracyError::PrevalenceOutOfRange(prevalence_tested));
    }
    let false_positive_mass = (1.0 - spec) * (1.0 - prevalence_tested);
    Ok(false_positive_mass == 0.0)
}

fn check_unit(name: &'static str, value: f64) -> Result<(), AccuracyError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(AccuracyError::OutOfUnit { name, value })
    }
}
