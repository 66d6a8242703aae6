use crate::lpaley::TorusGrid;
use crate::{Complex64, KwgError, Result};

/// Normalised Fourier coefficients `c_k` of a field on a torus grid, so that
/// `u(x) = Σ_k c_k e^{iξ_k·x}` and `‖u‖²_{L²} = L^d Σ_k |c_k|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(KwgError::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Real field `a e^{iξ_k·x} + conj(a) e^{−iξ_k·x}` (or `Re a` at `k = 0`).
    pub fn single_mode(grid: TorusGrid, k: [i64; 2], amplitude: Complex64) -> Self {
        let mut f = Self::zeros(grid);
        let idx = grid.join(grid.axis_index(k[0]), if grid.dim() == 1 { 0 } else { grid.axis_index(k[1]) });
        let conj = grid.conjugate_index(idx);
        if idx == conj {
            f.coeffs[idx] = Complex64::new(amplitude.re, 0.0);
        } else {
            f.coeffs[idx] += amplitude;
            f.coeffs[conj] += amplitude.conj();
        }
        f.zero_nyquist();
        f
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn l2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    /// `(u | v)_{L²}` for real fields.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>()
            * self.grid.volume()
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut f = self.clone();
        f.scale(a);
        f
    }

    /// `self += a x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        for (y, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += v * a;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let mut f = self.clone();
        f.axpy(-1.0, other);
        f
    }

    /// Coefficientwise multiplication by a real multiplier of the flat index.
    pub fn multiplied<F: Fn(usize) -> f64>(&self, m: F) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * m(i)).collect();
        Self { grid: self.grid, coeffs }
    }

    /// `∂_axis u`, multiplier `iξ_axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, self.grid.xi(i)[axis]))
            .collect();
        Self { grid: self.grid, coeffs }
    }

    /// `‖∇u‖²_{L²}`.
    pub fn gradient_norm_sqr(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.xi_norm2(i) * c.norm_sqr())
            .sum::<f64>()
            * self.grid.volume()
    }

    pub fn zero_nyquist(&mut self) {
        for i in 0..self.coeffs.len() {
            if self.grid.is_nyquist(i) {
                self.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Largest `|c_{−k} − conj(c_k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.conjugate_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Projects onto real fields: `c_k ← (c_k + conj(c_{−k}))/2`.
    pub fn enforce_hermitian(&mut self) {
        for i in 0..self.coeffs.len() {
            let j = self.grid.conjugate_index(i);
            if j < i {
                continue;
            }
            if j == i {
                self.coeffs[i] = Complex64::new(self.coeffs[i].re, 0.0);
            } else {
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            }
        }
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        self.grid.same_as(&other.grid)
    }
}
