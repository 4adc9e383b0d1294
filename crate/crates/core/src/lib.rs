//! Set-valued estimation of epidemic infection rates from daily surveillance
//! counts.
//!
//! Surveillance feeds report how many people have been tested and how many
//! tested positive, but say nothing about infections among the untested and
//! cannot correct for imperfect test accuracy. Rather than produce a point
//! estimate from strong assumptions, this crate combines the observable rates
//! with explicitly declared assumption intervals (test miss rate, infection
//! rate among the untested, asymptomatic share) and computes the interval of
//! infection rates consistent with both. Every output is a closed subinterval
//! of [0, 1] tagged with the method that produced it.
//!
//! The main pieces:
//!
//! * [`ingest`] — parse and validate cumulative surveillance series, derive
//!   per-date empirical rates.
//! * [`accuracy`] — algebra between NPV / sensitivity / specificity and the
//!   miss-rate interval the bounds consume.
//! * [`bounds`] — the interval estimators: worst case, testing monotonicity,
//!   temporal envelope, asymptomatic refinement, severe-illness ratios, and
//!   covariate-stratified variants.
//! * [`sweep`] — grid evaluation over assumption configurations.
//! * [`sim`] — a seeded synthetic-population simulator in which the
//!   assumptions hold by construction, used to certify that computed bounds
//!   cover the true rate.
//! * [`report`] / [`plot`] — table and SVG band-chart rendering.

pub mod accuracy;
pub mod bounds;
pub mod config;
pub mod error;
pub mod ingest;
pub mod plot;
pub mod report;
pub mod sim;
pub mod sweep;

pub use error::Error;
