//! Fully synthetic public-use microdata from complex survey samples.
//!
//! `synrep` turns a confidential weighted sample into releasable synthetic
//! replicates and gives analysts valid inferences from the release alone:
//!
//! 1. **Undo the design** — independent Bayesian bootstraps renormalize the
//!    survey weights, and a weighted Polya urn expands each bootstrap into a
//!    pseudo-population whose composition respects the weights ([`wfpbb`]).
//! 2. **Resample simply** — a simple random sample is drawn from each
//!    pseudo-population, erasing the complex design ([`wfpbb`]).
//! 3. **Synthesize** — a synthesis model fitted to each pseudo-sample
//!    generates the released replicates; either several per pseudo-sample or
//!    exactly one ([`synthesizer`]).
//! 4. **Combine** — per-replicate estimates pool into a point estimate,
//!    variance, and t-interval using combining rules matched to the release
//!    strategy, with an ad hoc fix when the variance estimate goes negative
//!    ([`inference`]).
//!
//! The [`design`] module supplies finite-population generation, PPS/SRS
//! selection, and baseline estimators; [`simulate`] measures repeated-sampling
//! bias, coverage, variance ratios, and negative-variance rates for every
//! method. Everything is deterministic given a master seed ([`rng`]).
//!
//! See the crate examples for runnable walkthroughs of each capability, and
//! the `synrep` binary for the `generate` / `analyze` / `simulate` /
//! `validate` command-line surface.

pub mod cli;
pub mod design;
pub mod error;
pub mod inference;
pub mod io;
mod moments;
pub mod rng;
pub mod simulate;
pub mod student_t;
pub mod synthesizer;
pub mod types;
pub mod wfpbb;

pub use error::{Error, Result};
pub use types::{
    CombinedEstimate, ExpansionMode, PointVariance, PseudoPopulation, ReplicateRow, ReplicateSet,
    UnitRecord, Variant, WeightedSample,
};
