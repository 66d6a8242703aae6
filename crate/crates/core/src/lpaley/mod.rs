//! Discrete Littlewood-Paley analysis on the periodic torus.

mod bony;
mod dyadic;
mod field;
mod grid;
mod norms;
mod transform;

pub use bony::{bony_residual, commutator, paraproduct, remainder};
pub use dyadic::{chi, phi, BlockWeights, DyadicFamily, ANNULUS_INNER, ANNULUS_OUTER};
pub use field::SpectralField;
pub use grid::TorusGrid;
pub use norms::{
    besov_norm, besov_norm_vector, hybrid_norm, hybrid_norm_vector, tilde_alpha_norm,
    tilde_norm, BlockNorms, HybridNormSpec, SummabilityIndex, TimeExponent,
};
pub use transform::Transform;
