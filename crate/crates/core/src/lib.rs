//! Weighted ergodic averages along Kronecker sequences.
//!
//! Weight families and their kernels, Diophantine tools, sparse test functions,
//! the weighted discrepancy operator and an experiment harness.

pub mod diophantine;
pub mod discrepancy;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod lattice;
pub mod numerics;
pub mod weights;

pub use diophantine::{AlphaSpec, AlphaVector, DiophantineType, Provenance, ResonanceRecord};
pub use discrepancy::{DiscrepancyReport, Mode, RateFit};
pub use error::{Error, Result};
pub use fourier::{FunctionSpec, SparseFourierFunction};
pub use harness::{ExperimentConfig, ExperimentKind, ExperimentReport, Measure, Schedule};
pub use num_complex::Complex64;
pub use weights::{KernelDecayEstimate, WeightScheme, WeightSequence};
