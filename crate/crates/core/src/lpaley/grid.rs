use std::f64::consts::PI;

use crate::{KwgError, Result};

/// Periodic box `[0, L)^d` sampled by `N` points per axis.
///
/// Coefficients are stored row-major in FFT order: index `i` on an axis
/// carries wavenumber `i` for `i < N/2` and `i − N` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(KwgError::InvalidParameter(format!("dimension {dim} not in {{1, 2}}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(KwgError::InvalidParameter(format!(
                "N = {n} must be a power of two >= 16"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(KwgError::InvalidParameter(format!("period L = {length} must be > 0")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    /// Total number of lattice points `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
    /// Lattice unit `2π/L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed wavenumber of axis index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis index of signed wavenumber `k`.
    pub fn axis_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Axis indices `(i0, i1)` of a flat index; `i1 = 0` in one dimension.
    pub fn split(&self, idx: usize) -> (usize, usize) {
        if self.dim == 1 {
            (idx, 0)
        } else {
            (idx / self.n, idx % self.n)
        }
    }

    pub fn join(&self, i0: usize, i1: usize) -> usize {
        if self.dim == 1 {
            i0
        } else {
            i0 * self.n + i1
        }
    }

    /// Signed wavenumbers of a flat index.
    pub fn wavenumbers(&self, idx: usize) -> [i64; 2] {
        let (i0, i1) = self.split(idx);
        if self.dim == 1 {
            [self.wavenumber(i0), 0]
        } else {
            [self.wavenumber(i0), self.wavenumber(i1)]
        }
    }

    /// Physical wavevector `ξ = 2πk/L`.
    pub fn xi(&self, idx: usize) -> [f64; 2] {
        let k = self.wavenumbers(idx);
        let f = self.fundamental();
        [f * k[0] as f64, f * k[1] as f64]
    }

    pub fn xi_norm2(&self, idx: usize) -> f64 {
        let x = self.xi(idx);
        x[0] * x[0] + x[1] * x[1]
    }

    pub fn xi_norm(&self, idx: usize) -> f64 {
        self.xi_norm2(idx).sqrt()
    }

    /// True when some axis index sits on the Nyquist wavenumber `−N/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let (i0, i1) = self.split(idx);
        i0 == self.n / 2 || (self.dim == 2 && i1 == self.n / 2)
    }

    /// Flat index of `−k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (i0, i1) = self.split(idx);
        let neg = |i: usize| (self.n - i) % self.n;
        self.join(neg(i0), if self.dim == 1 { 0 } else { neg(i1) })
    }

    /// Physical coordinates of lattice point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (i0, i1) = self.split(idx);
        let h = self.spacing();
        [h * i0 as f64, if self.dim == 1 { 0.0 } else { h * i1 as f64 }]
    }

    /// Smallest nonzero lattice `|ξ|`.
    pub fn min_xi(&self) -> f64 {
        self.fundamental()
    }

    /// Largest retained lattice `|ξ|` once Nyquist modes are dropped.
    pub fn max_xi(&self) -> f64 {
        let kmax = (self.n / 2 - 1) as f64;
        self.fundamental() * kmax * (self.dim as f64).sqrt()
    }

    pub fn same_as(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(KwgError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}
