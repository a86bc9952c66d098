//! Secure and private function computation with two transmitting nodes.
//!
//! A hidden i.i.d. remote source `X` is measured by two transmitters
//! (`X1`, `X2`), a fusion center (`Y`) and an eavesdropper (`Z`). The
//! transmitters send public indices so that the fusion center can compute
//! a per-letter function `f(X1, X2, Y)` while bounding storage, secrecy
//! leakage and two privacy leakages.
//!
//! * [`prob`] exact discrete information calculus,
//! * [`model`] the source model and its classification,
//! * [`auxiliary`] time-shared auxiliary systems,
//! * [`regions`] single-letter inner/outer bounds and special cases,
//! * [`search`] Pareto-front search over auxiliary systems,
//! * [`sim`] a finite-blocklength random-binning simulator,
//! * [`io`] and [`cli`] file formats and the command-line surface.

pub mod auxiliary;
pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod prob;
pub mod regions;
pub mod search;
pub mod sim;

pub use auxiliary::{AuxBranch, AuxSystem, Cardinalities, Stochastic};
pub use error::{Error, Result};
pub use model::{DegradednessReport, Distortion, FunctionClass, ModelAlphabets, SourceModel};
pub use prob::{Alphabet, Bits, Channel, JointDist, Tolerances};
