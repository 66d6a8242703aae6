//! Seeded random fields for property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::lpaley::{DyadicFamily, SpectralField, TorusGrid};
use crate::{Complex64, Result};

/// Algorithm identifier recorded in manifests.
pub const RNG_ID: &str = "chacha20";

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Real mean-free field with independent uniform coefficients on `0 < |ξ| ≤ xi_max`.
pub fn band_limited<R: Rng>(grid: TorusGrid, xi_max: f64, rng: &mut R) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        let r = grid.xi_norm(idx);
        if idx != 0 && r <= xi_max && !grid.is_nyquist(idx) {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    f.enforce_hermitian();
    f
}

/// `Δ_j` of a full-band random field.
pub fn block_localized<R: Rng>(family: &DyadicFamily, j: i32, rng: &mut R) -> Result<SpectralField> {
    let g = *family.grid();
    family.block(&band_limited(g, f64::INFINITY, rng), j)
}

/// Random field whose block amplitudes vary over several orders of magnitude.
pub fn multiscale<R: Rng>(family: &DyadicFamily, rng: &mut R) -> Result<SpectralField> {
    let g = *family.grid();
    let base = band_limited(g, f64::INFINITY, rng);
    let gains: Vec<f64> = family.blocks().map(|_| 10f64.powf(rng.gen_range(-3.0..1.0))).collect();
    let j0 = family.j_min();
    Ok(base.multiplied(|i| {
        let b = family.mode_weights(i);
        let lo = gains.get((b.j_lo - j0).max(0) as usize).copied().unwrap_or(0.0);
        let hi = gains.get((b.j_lo + 1 - j0).max(0) as usize).copied().unwrap_or(0.0);
        b.w_lo * lo + b.w_hi * hi
    }))
}
