//! Pseudospectral time integration of the local and non-local systems and of
//! their linearisation, on the periodic torus.

mod initial;
mod linear;
mod nonlinear;
mod params;
mod snapshot;
mod stepping;

pub use initial::{GaussianBump, SmallnessReport};
pub use linear::{build_linear_symbol, longitudinal_exponential, pade_expm, LinearPropagator, LinearSymbol};
pub use nonlinear::{explicit_linear_rhs, nonlinear_rhs, NonlinearTerms};
pub use params::{PhysParams, PressureModel};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SNAPSHOT_MAGIC};
pub use stepping::{
    friedrichs_project, linear_propagate, simulate, simulate_linear, step_strang, LinearForcing,
    SimulationOptions, Stepper, Trajectory, DEFAULT_VACUUM_FLOOR,
};

use crate::lpaley::{DyadicFamily, SpectralField, TorusGrid, Transform};
use crate::{KwgError, Result};

/// Density fluctuation `q` and velocity `u` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub t: f64,
    pub q: SpectralField,
    pub u: Vec<SpectralField>,
}

impl FluidState {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            t: 0.0,
            q: SpectralField::zeros(grid),
            u: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn new(t: f64, q: SpectralField, u: Vec<SpectralField>) -> Result<Self> {
        let grid = *q.grid();
        if u.len() != grid.dim() {
            return Err(KwgError::GridMismatch(format!(
                "{} velocity components in dimension {}",
                u.len(),
                grid.dim()
            )));
        }
        for c in &u {
            c.same_grid(&q)?;
        }
        Ok(Self { t, q, u })
    }

    pub fn grid(&self) -> &TorusGrid {
        self.q.grid()
    }

    /// `self += a x` on all components; time is left unchanged.
    pub fn axpy(&mut self, a: f64, dq: &SpectralField, du: &[SpectralField]) {
        self.q.axpy(a, dq);
        for (u, d) in self.u.iter_mut().zip(du) {
            u.axpy(a, d);
        }
    }

    /// Root-sum-square `L²` distance over all components.
    pub fn l2_distance(&self, other: &FluidState) -> f64 {
        let mut s = self.q.sub(&other.q).l2_norm_sqr();
        for (a, b) in self.u.iter().zip(&other.u) {
            s += a.sub(b).l2_norm_sqr();
        }
        s.sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.q.l2_norm_sqr() + self.u.iter().map(|c| c.l2_norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.u.iter().map(|c| c.hermitian_defect()).fold(self.q.hermitian_defect(), f64::max)
    }

    fn project_real(&mut self) {
        self.q.enforce_hermitian();
        self.q.zero_nyquist();
        for c in &mut self.u {
            c.enforce_hermitian();
            c.zero_nyquist();
        }
    }
}

/// Transforms and dyadic family shared by every run on one grid.
#[derive(Debug, Clone)]
pub struct SpectralContext {
    pub grid: TorusGrid,
    pub transform: Transform,
    pub family: DyadicFamily,
}

impl SpectralContext {
    pub fn new(grid: TorusGrid) -> Result<Self> {
        Ok(Self { grid, transform: Transform::new(grid), family: DyadicFamily::new(grid)? })
    }
}
