use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::lpaley::{SpectralField, TorusGrid};
use crate::{Complex64, KwgError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Forward and inverse transforms on a grid and on its 3/2 padded companion.
/// Plans are immutable, so one `Transform` may serve many threads.
#[derive(Clone)]
pub struct Transform {
    grid: TorusGrid,
    padded: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_pad: Arc<dyn Fft<f64>>,
    inv_pad: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).field("padded", &self.padded).finish()
    }
}

impl Transform {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        let padded = 3 * n / 2;
        Self {
            grid,
            padded,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fwd_pad: planner.plan_fft_forward(padded),
            inv_pad: planner.plan_fft_inverse(padded),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Points per axis of the dealiasing grid.
    pub fn padded_n(&self) -> usize {
        self.padded
    }

    pub fn padded_len(&self) -> usize {
        self.padded.pow(self.grid.dim() as u32)
    }

    fn run(&self, data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
        let mut scratch = vec![ZERO; plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        if self.grid.dim() == 2 {
            let mut t = vec![ZERO; data.len()];
            transpose(data, &mut t, n);
            plan.process_with_scratch(&mut t, &mut scratch);
            transpose(&t, data, n);
        }
    }

    /// Normalised coefficients of real samples; Nyquist modes are zeroed.
    pub fn forward(&self, values: &[f64]) -> Result<SpectralField> {
        if values.len() != self.grid.len() {
            return Err(KwgError::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                self.grid.len()
            )));
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.run(&mut data, self.grid.n(), &self.fwd);
        let norm = 1.0 / self.grid.len() as f64;
        for c in &mut data {
            *c *= norm;
        }
        let mut f = SpectralField::from_coeffs(self.grid, data)?;
        f.zero_nyquist();
        Ok(f)
    }

    /// Real samples of a field on the base grid.
    pub fn inverse(&self, field: &SpectralField) -> Vec<f64> {
        let mut data = field.coeffs().to_vec();
        self.run(&mut data, self.grid.n(), &self.inv);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Real samples on the padded grid (zero padding of the coefficients).
    pub fn to_padded(&self, field: &SpectralField) -> Vec<f64> {
        let (n, m) = (self.grid.n(), self.padded);
        let mut data = vec![ZERO; self.padded_len()];
        let map = |i: usize| if i < n / 2 { i } else { i + m - n };
        for (idx, c) in field.coeffs().iter().enumerate() {
            if self.grid.is_nyquist(idx) {
                continue;
            }
            let (i0, i1) = self.grid.split(idx);
            let pidx = if self.grid.dim() == 1 { map(i0) } else { map(i0) * m + map(i1) };
            data[pidx] = *c;
        }
        self.run(&mut data, m, &self.inv_pad);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Base-grid coefficients of padded-grid samples, truncated to retained modes.
    pub fn from_padded(&self, values: &[f64]) -> SpectralField {
        let (n, m) = (self.grid.n(), self.padded);
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.run(&mut data, m, &self.fwd_pad);
        let norm = 1.0 / self.padded_len() as f64;
        let map = |i: usize| if i < n / 2 { i } else { i + m - n };
        let mut out = SpectralField::zeros(self.grid);
        for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
            if self.grid.is_nyquist(idx) {
                continue;
            }
            let (i0, i1) = self.grid.split(idx);
            let pidx = if self.grid.dim() == 1 { map(i0) } else { map(i0) * m + map(i1) };
            *c = data[pidx] * norm;
        }
        out
    }

    /// Dealiased product `uv` truncated to the base lattice.
    pub fn product(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        u.same_grid(v)?;
        self.grid.same_as(u.grid())?;
        let a = self.to_padded(u);
        let b = self.to_padded(v);
        let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(self.from_padded(&p))
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}
