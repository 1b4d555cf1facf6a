//! q-deformed quantum mechanics of a spinless particle on the `R_q(3)` sphere.
//!
//! * [`qcore`]: q-numbers and the eigenvalues of the three su_q(2) invariants.
//! * [`angular`]: the polynomial realization of position and angular momentum,
//!   and construction of the q-spherical harmonics.
//! * [`jackson`]: Jackson integration and the inner product of angular functions.
//! * [`irrep`]: block-sparse operator matrices on the harmonic basis and the
//!   identity verifier.
//! * [`spectra`]: effective angular number, Coulomb and oscillator spectra, and a
//!   shooting solver that checks them.

pub mod angular;
pub mod error;
pub mod irrep;
pub mod jackson;
pub mod poly;
pub mod qcore;
pub mod real;
pub mod spectra;
pub mod verify;

pub use angular::{AngularFunction, Component, HarmonicLabel};
pub use error::{Error, Result};
pub use irrep::{AlgebraReport, OperatorMatrix, OperatorSet, PartialMethod, PositionTable, VectorTriple};
pub use jackson::{MeasureMode, QMeasure};
pub use qcore::{InvariantSet, QParam};
pub use real::{HighPrecision, Precision, Real};
pub use spectra::{Potential, SpectrumEntry};
