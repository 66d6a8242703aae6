//! Pseudospectral laboratory for the compressible Navier-Stokes-Korteweg
//! system and its non-local capillarity relaxation on a periodic torus.
//!
//! Layout:
//! - [`thermo`]: Van der Waals law, coefficient functions, functionals, Euler fields.
//! - [`kernels`]: interaction-kernel symbols, capillarity symbol, thresholds.
//! - [`lpaley`]: torus grids, spectral fields, dyadic blocks, Besov-type norms.
//! - [`solver`]: exact linear propagators, dealiased nonlinear terms, Strang stepping.
//! - [`diagnostics`]: per-block energies, equivalence checks, remainder bounds.
//! - [`convergence`]: twin-run sweeps and rate fits.

pub mod convergence;
pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod lpaley;
pub mod numerics;
pub mod random;
pub mod selfcheck;
pub mod solver;
pub mod thermo;

pub use error::{KwgError, Result};
pub use rustfft::num_complex::Complex64;
