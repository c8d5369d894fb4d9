//! Identification of possibly-unstable linear plants from closed-loop data
//! with high-order ARX models.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`poly`]: real polynomials in the delay operator `q^-1`, companion-matrix
//!   root finding, stable/anti-stable factorization, root mirroring.
//! * [`ltisys`]: rational transfer functions, the Box-Jenkins system under
//!   feedback, closed-loop algebra and frequency response.
//! * [`sim`]: seeded Gaussian signals and closed-loop simulation.
//! * [`arx`]: least-squares ARX estimation.
//! * [`recover`]: plant, noise model and noise variance from an ARX estimate,
//!   with the all-pass correction needed when the plant is unstable.
//! * [`oracle`]: frequency-domain quadrature and brute-force minimization used
//!   to cross-check the estimators.
//!
//! File formats, the command-line runner and the Monte Carlo harness live in
//! the `arxid-cli` crate.

#![no_std]

extern crate alloc;

pub mod arx;
mod eigen;
mod error;
pub mod linalg;
pub mod ltisys;
pub mod oracle;
pub mod poly;
pub mod recover;
pub mod sim;

pub use arx::{estimate_arx, residuals, ArxEstimate, ArxOrders};
pub use error::{Error, Result};
pub use ltisys::{ClosedLoop, FreqGrid, RationalTF, SystemSpec};
pub use num_complex::Complex64;
pub use poly::{Poly, Root, RootClass, RootSet};
pub use recover::{
    compare_models, recover, theoretical_minimizers, Minimizers, ModelComparison, RecoveredModel,
};
pub use sim::{
    derive_seed, gaussian_white, simulate_closed_loop, ClosedLoopSimulator, SignalRecord,
};
