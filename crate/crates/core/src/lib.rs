//! A first-species model of Renaissance canons over the 7-note diatonic
//! pitch-class field.
//!
//! A *canonic scheme* fixes the time and pitch displacement of each voice
//! (optionally one marked bass). A melody is a *valid canon* when no
//! simultaneity contains a second/seventh, or a fourth above the bass.
//! The number of valid n-note canons grows like `lambda^n`; that growth
//! rate (the *flexibility* of the scheme) is the dominant eigenvalue of a
//! window-transfer graph and is computed here exactly enough to reproduce
//! the published three-voice tables.

pub mod catalog;
pub mod error;
pub mod generator;
pub mod graph;
pub mod melody;
pub mod oracle;
pub mod pitch;
pub mod scheme;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{CountSeries, SccPartition, TransferGraph};
pub use melody::{validate, Melody, Realization, Violation, ViolationKind};
pub use oracle::{count_valid_oracle, OracleOptions};
pub use pitch::PitchClass;
pub use scheme::{Scheme, Transform, Voice};
pub use spectral::{flexibility, CharPoly, FlexibilityResult};

/// Rounds to three decimals, ties to even, matching the reference tables.
pub fn format_lambda(x: f64) -> String {
    let scaled = (x * 1000.0).round_ties_even() / 1000.0;
    format!("{:.3}", scaled)
}
