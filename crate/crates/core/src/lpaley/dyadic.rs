use std::sync::Arc;

use crate::lpaley::{SpectralField, TorusGrid};
use crate::{KwgError, Result};

/// Inner radius of the block annulus.
pub const ANNULUS_INNER: f64 = 0.75;
/// Outer radius of the block annulus.
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;

const CHI_PLATEAU: f64 = 0.75;
const CHI_SUPPORT: f64 = 4.0 / 3.0;

/// Radial cutoff: 1 on `[0, 3/4]`, 0 from `4/3` on, quintic smoothstep between (C²).
pub fn chi(r: f64) -> f64 {
    if r <= CHI_PLATEAU {
        1.0
    } else if r >= CHI_SUPPORT {
        0.0
    } else {
        let t = (r - CHI_PLATEAU) / (CHI_SUPPORT - CHI_PLATEAU);
        1.0 - t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// `φ(r) = χ(r/2) − χ(r)`, supported in `[3/4, 8/3]`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Nonzero block weights of one lattice mode: `φ(2^{−j}|ξ|)` for `j = j_lo` and `j_lo + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockWeights {
    pub j_lo: i32,
    pub w_lo: f64,
    pub w_hi: f64,
}

impl BlockWeights {
    const NONE: BlockWeights = BlockWeights { j_lo: 0, w_lo: 0.0, w_hi: 0.0 };

    pub fn weight(&self, j: i32) -> f64 {
        if j == self.j_lo {
            self.w_lo
        } else if j == self.j_lo + 1 {
            self.w_hi
        } else {
            0.0
        }
    }
}

/// Dyadic partition of the retained lattice with per-mode block weights.
/// The mean mode and the Nyquist modes belong to no block.
#[derive(Debug, Clone)]
pub struct DyadicFamily {
    grid: TorusGrid,
    j_min: i32,
    j_max: i32,
    weights: Arc<Vec<BlockWeights>>,
}

fn mode_weights(r: f64) -> BlockWeights {
    // φ(2^{−j}r) ≠ 0 only for 3r/8 < 2^j < 4r/3: at most two consecutive j.
    let j0 = (r * 3.0 / 8.0).log2().floor() as i32;
    let mut found: Option<BlockWeights> = None;
    for j in j0 - 1..=j0 + 2 {
        let w = phi(r * 2f64.powi(-j));
        if w == 0.0 {
            continue;
        }
        match found.as_mut() {
            None => found = Some(BlockWeights { j_lo: j, w_lo: w, w_hi: 0.0 }),
            Some(b) => {
                debug_assert_eq!(j, b.j_lo + 1);
                b.w_hi = w;
            }
        }
    }
    found.unwrap_or(BlockWeights::NONE)
}

impl DyadicFamily {
    pub fn new(grid: TorusGrid) -> Result<Self> {
        let mut j_min = i32::MAX;
        let mut j_max = i32::MIN;
        let weights: Vec<BlockWeights> = (0..grid.len())
            .map(|idx| {
                if idx == 0 || grid.is_nyquist(idx) {
                    return BlockWeights::NONE;
                }
                let b = mode_weights(grid.xi_norm(idx));
                j_min = j_min.min(b.j_lo);
                j_max = j_max.max(if b.w_hi != 0.0 { b.j_lo + 1 } else { b.j_lo });
                b
            })
            .collect();
        if j_max - j_min + 1 < 3 {
            return Err(KwgError::GridTooCoarse(format!(
                "lattice hosts blocks {j_min}..={j_max}, fewer than 3"
            )));
        }
        Ok(Self { grid, j_min, j_max, weights: Arc::new(weights) })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn j_min(&self) -> i32 {
        self.j_min
    }
    pub fn j_max(&self) -> i32 {
        self.j_max
    }
    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }
    pub fn block_count(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }
    pub fn mode_weights(&self, idx: usize) -> BlockWeights {
        self.weights[idx]
    }

    /// `φ(2^{−j}|ξ|)` at a flat index.
    pub fn weight(&self, idx: usize, j: i32) -> f64 {
        self.weights[idx].weight(j)
    }

    /// `Σ_j φ(2^{−j}|ξ|)` at a flat index.
    pub fn partition_sum(&self, idx: usize) -> f64 {
        let b = self.weights[idx];
        b.w_lo + b.w_hi
    }

    fn check(&self, u: &SpectralField) -> Result<()> {
        self.grid.same_as(u.grid())
    }

    /// `Δ_j u`.
    pub fn block(&self, u: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(u)?;
        Ok(u.multiplied(|i| self.weights[i].weight(j)))
    }

    /// `S_j u = χ(2^{−j}D)u`; keeps the mean.
    pub fn low_cutoff(&self, u: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(u)?;
        let s = 2f64.powi(-j);
        Ok(u.multiplied(|i| if self.grid.is_nyquist(i) { 0.0 } else { chi(s * self.grid.xi_norm(i)) }))
    }

    /// Smallest lattice `|ξ|` carrying nonzero weight in block `j`.
    pub fn block_min_xi(&self, j: i32) -> Option<f64> {
        (0..self.grid.len())
            .filter(|&i| self.weights[i].weight(j) != 0.0)
            .map(|i| self.grid.xi_norm(i))
            .reduce(f64::min)
    }

    /// `‖Δ_j u‖_{L²}` for every block, by Parseval.
    pub fn block_norms(&self, u: &SpectralField) -> Result<crate::lpaley::BlockNorms> {
        self.block_norms_vector(std::slice::from_ref(u))
    }

    /// `‖Δ_j u‖_{L²}` of a vector field (root sum of squares over components).
    pub fn block_norms_vector(&self, comps: &[SpectralField]) -> Result<crate::lpaley::BlockNorms> {
        let mut acc = vec![0.0; self.block_count()];
        for u in comps {
            self.check(u)?;
            for (idx, c) in u.coeffs().iter().enumerate() {
                let b = self.weights[idx];
                if b.w_lo == 0.0 && b.w_hi == 0.0 {
                    continue;
                }
                let e = c.norm_sqr();
                let k = (b.j_lo - self.j_min) as usize;
                acc[k] += b.w_lo * b.w_lo * e;
                if b.w_hi != 0.0 {
                    acc[k + 1] += b.w_hi * b.w_hi * e;
                }
            }
        }
        let vol = self.grid.volume();
        Ok(crate::lpaley::BlockNorms::new(
            self.j_min,
            acc.into_iter().map(|v| (v * vol).sqrt()).collect(),
        ))
    }
}
