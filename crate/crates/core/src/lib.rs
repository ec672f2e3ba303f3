//! Numerical toolkit for function-space norms with variable smoothness and
//! integrability on periodic grids.
//!
//! The crate computes Besov- and Triebel-Lizorkin-type norms by three
//! independent routes — dyadic frequency decomposition, compactly supported
//! local means, and ball means of differences — together with the mixed
//! variable-exponent sequence norms they are built on, and a randomized
//! harness that measures the stability of the equivalences between the
//! routes on seeded function families.
//!
//! Data-parallel inner loops use rayon when the default `parallel` feature is
//! enabled; build with `--no-default-features` for a fully sequential
//! library. Results are identical either way.

pub mod differences;
pub mod error;
pub mod exponents;
pub mod family;
pub mod frequency;
pub mod grid;
pub mod harness;
pub mod lebesgue;
mod par;

pub use error::{Error, Result};
pub use exponents::{
    estimate_log_holder, two_microlocal_weights, verify_admissible, weights_from_smoothness,
    AdmissibilityReport, SmoothnessFunction, VariableExponent, WeightSequence,
};
pub use grid::{
    dft, idft, periodic_shift_sample, quadrature, read_csv, write_csv, Grid, SampledFunction,
    Spectrum,
};
pub use lebesgue::{
    luxemburg_norm, modular_lp, modular_lqlp, norm_lplq, norm_lqlp, FunctionSequence,
};

/// Which of the two mixed sequence norms a space is built on:
/// `Besov` nests the level sum outside the spatial norm, `TriebelLizorkin`
/// nests it inside.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Besov,
    TriebelLizorkin,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flavor::Besov => write!(f, "besov"),
            Flavor::TriebelLizorkin => write!(f, "tl"),
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "besov" | "b" => Ok(Flavor::Besov),
            "tl" | "f" | "triebel-lizorkin" => Ok(Flavor::TriebelLizorkin),
            other => Err(Error::InvalidConfig(format!("unknown flavor: {other}"))),
        }
    }
}

/// Mixed sequence norm of the requested flavor.
pub fn mixed_norm(
    fs: &FunctionSequence,
    p: &VariableExponent,
    q: &VariableExponent,
    flavor: Flavor,
) -> Result<f64> {
    match flavor {
        Flavor::Besov => norm_lqlp(fs, p, q),
        Flavor::TriebelLizorkin => norm_lplq(fs, p, q),
    }
}
