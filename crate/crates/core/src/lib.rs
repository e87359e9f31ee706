//! Matched classical-vs-quantum kernel benchmark on simulated FMCW radar products.
//!
//! The pipeline runs end to end inside this crate:
//!
//! * [`radar_sim`] synthesizes dechirped baseband cubes from point-scatterer scenes
//!   (rotorcraft for the UAV track, human kinematics for the fall track).
//! * [`products`] turns cubes into range-Doppler maps and Doppler-time spectrograms.
//! * [`features`] flattens, standardizes, projects onto a PCA bottleneck and
//!   rescales to rotation angles, always fitted on the training partition only.
//! * [`kernels`] builds RBF Gram matrices and the ZZ feature-map fidelity kernel,
//!   with a gate-level statevector simulator as an independent check.
//! * [`svm`] trains precomputed-kernel SVMs by SMO with one-vs-one voting.
//! * [`bench`] runs the seeded protocol grid, the test-time noise sweep and
//!   writes CSV, markdown and SVG reports.
//!
//! With the default `parallel` feature, per-sample and per-cell work is spread
//! over a rayon pool. Every parallel map writes to a fixed slot, so parallel and
//! serial runs produce bit-identical output.

pub mod bench;
pub mod error;
pub mod features;
pub mod kernels;
pub mod oracle;
pub mod products;
pub mod radar_sim;
pub mod selftest;
pub mod svm;

mod par;
mod streams;

pub use error::{Error, Result};
