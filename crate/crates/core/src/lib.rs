//! Numerical model of a polarized Hanbury Brown–Twiss experiment.
//!
//! Two thermal sources behind circular analysers illuminate two detectors
//! behind linear analysers. The coincidence rate carries a two-photon
//! Pancharatnam phase equal to half the solid angle of the circuit
//! R → 3 → L → 4 on the Poincaré sphere, while single counts and
//! self-correlations do not.
//!
//! Modules:
//! - [`polarization`]: Jones vectors, projectors, Stokes points, trace phases
//!   and geodesic solid angles.
//! - [`optics`]: source/detector layout, propagation amplitudes and the
//!   closed-form coincidence fringe.
//! - [`correlator`]: normally ordered photon-number moments via permanents
//!   of the detector coherence matrix, plus the truncated-Fock oracle in
//!   [`fock`].
//! - [`entanglement`]: exchange-generated orbital states, entropy and CHSH.
//! - [`multislit`]: Sorkin parameter and third-order geometric phase.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlator;
pub mod entanglement;
mod error;
pub mod fock;
pub mod multislit;
pub mod optics;
pub mod permanent;
pub mod polarization;

pub use error::{Error, Result};
pub use num_complex::Complex64;
