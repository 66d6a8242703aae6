use crate::lpaley::{DyadicFamily, SummabilityIndex, Transform};
use crate::solver::FluidState;
use crate::Result;

/// Mean-free Gaussian bump `A(e^{−|x−c|²/w²} − mean)` in `q` and in each velocity component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub q_amplitude: f64,
    pub u_amplitude: [f64; 2],
    pub width: f64,
    /// Centre; `None` puts it at the middle of the box.
    pub center: Option<[f64; 2]>,
}

impl GaussianBump {
    pub fn new(q_amplitude: f64, u_amplitude: [f64; 2], width: f64) -> Self {
        Self { q_amplitude, u_amplitude, width, center: None }
    }

    /// Same shape with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            q_amplitude: self.q_amplitude * factor,
            u_amplitude: [self.u_amplitude[0] * factor, self.u_amplitude[1] * factor],
            ..*self
        }
    }

    /// Periodic profile sampled on the grid, minimal-image distance to the centre.
    pub fn profile(&self, tr: &Transform) -> Vec<f64> {
        let g = tr.grid();
        let l = g.length();
        let c = self.center.unwrap_or([0.5 * l, if g.dim() == 2 { 0.5 * l } else { 0.0 }]);
        let wrap = |d: f64| d - l * (d / l).round();
        (0..g.len())
            .map(|i| {
                let x = g.point(i);
                let mut r2 = wrap(x[0] - c[0]).powi(2);
                if g.dim() == 2 {
                    r2 += wrap(x[1] - c[1]).powi(2);
                }
                (-r2 / (self.width * self.width)).exp()
            })
            .collect()
    }

    pub fn state(&self, tr: &Transform) -> Result<FluidState> {
        let base = tr.forward(&self.profile(tr))?;
        let mut shape = base.clone();
        shape.coeffs_mut()[0] = crate::Complex64::new(0.0, 0.0);
        let dim = tr.grid().dim();
        let q = shape.scaled(self.q_amplitude);
        let u = (0..dim).map(|a| shape.scaled(self.u_amplitude[a])).collect();
        FluidState::new(0.0, q, u)
    }
}

/// Smallness functional `‖q‖_{Ḃ^{d/2−1}} + ‖q‖_{Ḃ^{d/2}} + ‖u‖_{Ḃ^{d/2−1}}` and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessReport {
    pub q_low: f64,
    pub q_high: f64,
    pub u_low: f64,
}

impl SmallnessReport {
    pub fn of(state: &FluidState, family: &DyadicFamily) -> Result<Self> {
        let d = state.grid().dim() as f64;
        let qb = family.block_norms(&state.q)?;
        let ub = family.block_norms_vector(&state.u)?;
        Ok(Self {
            q_low: qb.besov(0.5 * d - 1.0, SummabilityIndex::One),
            q_high: qb.besov(0.5 * d, SummabilityIndex::One),
            u_low: ub.besov(0.5 * d - 1.0, SummabilityIndex::One),
        })
    }

    pub fn total(&self) -> f64 {
        self.q_low + self.q_high + self.u_low
    }
}
