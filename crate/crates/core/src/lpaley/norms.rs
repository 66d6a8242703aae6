use crate::kernels::frequency_threshold;
use crate::lpaley::{DyadicFamily, SpectralField};
use crate::{KwgError, Result};

/// Per-block `L²` norms `‖Δ_j u‖`, indexed from `j_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNorms {
    pub j_min: i32,
    pub values: Vec<f64>,
}

impl BlockNorms {
    pub fn new(j_min: i32, values: Vec<f64>) -> Self {
        Self { j_min, values }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.j_min + k as i32, v))
    }

    pub fn get(&self, j: i32) -> f64 {
        let k = j - self.j_min;
        if k < 0 {
            0.0
        } else {
            self.values.get(k as usize).copied().unwrap_or(0.0)
        }
    }

    /// `Σ_j 2^{js} ‖Δ_j u‖` or `sup_j 2^{js} ‖Δ_j u‖`.
    pub fn besov(&self, s: f64, r: SummabilityIndex) -> f64 {
        let terms = self.iter().map(|(j, v)| 2f64.powf(j as f64 * s) * v);
        match r {
            SummabilityIndex::One => terms.sum(),
            SummabilityIndex::Infinity => terms.fold(0.0, f64::max),
        }
    }

    /// `Σ_{j ≤ l_ε} 2^{js}‖Δ_j u‖ + Σ_{j > l_ε} ε^{−2} 2^{jt}‖Δ_j u‖`.
    pub fn hybrid(&self, spec: &HybridNormSpec) -> f64 {
        let inv_e2 = 1.0 / (spec.eps * spec.eps);
        self.iter()
            .map(|(j, v)| {
                if j <= spec.l_eps {
                    2f64.powf(j as f64 * spec.s) * v
                } else {
                    inv_e2 * 2f64.powf(j as f64 * spec.t) * v
                }
            })
            .sum()
    }

    /// `Σ_l 2^{ls} max(α, 2^{−l})^{±1} ‖Δ_l u‖`, exponent `+1` for `r = ∞` and `−1` for `r = 1`.
    pub fn tilde_alpha(&self, s: f64, alpha: f64, r: SummabilityIndex) -> f64 {
        let e = match r {
            SummabilityIndex::Infinity => 1.0,
            SummabilityIndex::One => -1.0,
        };
        self.iter()
            .map(|(l, v)| 2f64.powf(l as f64 * s) * alpha.max(2f64.powi(-l)).powf(e) * v)
            .sum()
    }

    /// Blockwise time reduction of a uniformly sampled series: trapezoid for
    /// `ρ = 1`, maximum for `ρ = ∞`.
    pub fn time_profile(series: &[BlockNorms], dt: f64, rho: TimeExponent) -> Result<BlockNorms> {
        let first = series
            .first()
            .ok_or_else(|| KwgError::InvalidParameter("empty snapshot series".into()))?;
        if rho == TimeExponent::One && series.len() < 2 {
            return Err(KwgError::InvalidParameter(
                "time integration needs at least 2 snapshots".into(),
            ));
        }
        if series.iter().any(|b| b.j_min != first.j_min || b.values.len() != first.values.len()) {
            return Err(KwgError::GridMismatch("snapshot block ranges differ".into()));
        }
        let nb = first.values.len();
        let last = series.len() - 1;
        let values = (0..nb)
            .map(|k| match rho {
                TimeExponent::Infinity => series.iter().map(|b| b.values[k]).fold(0.0, f64::max),
                TimeExponent::One => {
                    let inner: f64 = series.iter().map(|b| b.values[k]).sum();
                    dt * (inner - 0.5 * (series[0].values[k] + series[last].values[k]))
                }
            })
            .collect();
        Ok(BlockNorms::new(first.j_min, values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummabilityIndex {
    One,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeExponent {
    One,
    Infinity,
}

/// Exponents and threshold of the hybrid norm `Ḃ_ε^{s,t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridNormSpec {
    pub s: f64,
    pub t: f64,
    pub eps: f64,
    pub l_eps: i32,
}

impl HybridNormSpec {
    pub fn new(s: f64, t: f64, eps: f64, gamma: f64, c0_outer: f64) -> Result<Self> {
        if !(s.is_finite() && t.is_finite()) {
            return Err(KwgError::InvalidParameter("hybrid exponents must be finite".into()));
        }
        let l_eps = frequency_threshold(eps, gamma, c0_outer)?;
        Ok(Self { s, t, eps, l_eps })
    }
}

pub fn besov_norm(family: &DyadicFamily, u: &SpectralField, s: f64, r: SummabilityIndex) -> Result<f64> {
    Ok(family.block_norms(u)?.besov(s, r))
}

pub fn besov_norm_vector(
    family: &DyadicFamily,
    u: &[SpectralField],
    s: f64,
    r: SummabilityIndex,
) -> Result<f64> {
    Ok(family.block_norms_vector(u)?.besov(s, r))
}

pub fn hybrid_norm(family: &DyadicFamily, u: &SpectralField, spec: &HybridNormSpec) -> Result<f64> {
    Ok(family.block_norms(u)?.hybrid(spec))
}

pub fn hybrid_norm_vector(family: &DyadicFamily, u: &[SpectralField], spec: &HybridNormSpec) -> Result<f64> {
    Ok(family.block_norms_vector(u)?.hybrid(spec))
}

pub fn tilde_alpha_norm(
    family: &DyadicFamily,
    u: &SpectralField,
    s: f64,
    alpha: f64,
    r: SummabilityIndex,
) -> Result<f64> {
    Ok(family.block_norms(u)?.tilde_alpha(s, alpha, r))
}

/// `‖2^{js}‖Δ_j u‖_{L^ρ_T L²}‖_{ℓ¹}` over uniformly spaced snapshots.
pub fn tilde_norm(
    family: &DyadicFamily,
    snapshots: &[SpectralField],
    dt: f64,
    rho: TimeExponent,
    s: f64,
) -> Result<f64> {
    let series = snapshots
        .iter()
        .map(|u| family.block_norms(u))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockNorms::time_profile(&series, dt, rho)?.besov(s, SummabilityIndex::One))
}
