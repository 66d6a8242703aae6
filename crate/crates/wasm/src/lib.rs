//! Browser bindings: Van der Waals isotherms, linear dispersion of the local and
//! non-local systems, and a 1D twin run comparing them.
//!
//! Arrays cross the boundary flattened row-major as `Float64Array`.

use kwg_core::kernels::capillarity_symbol;
use kwg_core::lpaley::{TorusGrid, Transform};
use kwg_core::solver::{build_linear_symbol, step_strang, FluidState, GaussianBump, PhysParams};
use kwg_core::thermo::{phase_diagram, spinodal_points, PressureLaw, VdWParams};
use wasm_bindgen::prelude::*;

fn js(e: kwg_core::KwgError) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows `[ρ, P(ρ), P′(ρ)]` on `0 < ρ < b`.
#[wasm_bindgen]
pub fn isotherm(a: f64, b: f64, r: f64, tstar: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let law = VdWParams::new(a, b, r, tstar).map_err(js)?;
    let n = samples.max(2);
    Ok((1..=n)
        .flat_map(|i| {
            let rho = law.b * i as f64 / (n + 1) as f64;
            [rho, law.pressure(rho), law.derivative(rho)]
        })
        .collect())
}

/// `[subcritical, α₁, α₂, β₁, β₂]`; absent points are NaN.
#[wasm_bindgen]
pub fn phase_points(a: f64, b: f64, r: f64, tstar: f64) -> Result<Vec<f64>, JsError> {
    let law = VdWParams::new(a, b, r, tstar).map_err(js)?;
    if law.is_subcritical() {
        let d = phase_diagram(&law).map_err(js)?;
        return Ok(vec![1.0, d.alpha1, d.alpha2, d.beta1, d.beta2]);
    }
    let (a1, a2) = spinodal_points(&law).unwrap_or((f64::NAN, f64::NAN));
    Ok(vec![0.0, a1, a2, f64::NAN, f64::NAN])
}

/// Rows `[ξ, −Re λ_slow, |Im λ|, −Re λ_slow local, |Im λ| local, capillarity, capillarity local]`
/// for the longitudinal pair; `λ_slow` is the eigenvalue with the smaller decay rate.
#[wasm_bindgen]
pub fn dispersion(
    mu: f64,
    lambda: f64,
    kappa: f64,
    p: f64,
    eps: f64,
    xi_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    let params = PhysParams::new(mu, lambda, kappa, p, eps).map_err(js)?;
    let local = params.with_eps(0.0).map_err(js)?;
    let n = samples.max(2);
    let slow = |par: &PhysParams, xi: f64| {
        let ev = build_linear_symbol([xi, 0.0], 1, par).eigenvalues;
        let e = if ev[0].re >= ev[1].re { ev[0] } else { ev[1] };
        (-e.re, e.im.abs())
    };
    Ok((1..=n)
        .flat_map(|i| {
            let xi = xi_max * i as f64 / n as f64;
            let (d, w) = slow(&params, xi);
            let (dl, wl) = slow(&local, xi);
            let x2 = xi * xi;
            [xi, d, w, dl, wl, capillarity_symbol(x2, kappa, eps), capillarity_symbol(x2, kappa, 0.0)]
        })
        .collect())
}

/// Local and non-local systems advanced in lockstep from one Gaussian bump on a 1D torus.
#[wasm_bindgen]
pub struct TwinRun {
    transform: Transform,
    local: PhysParams,
    nonlocal: PhysParams,
    a: FluidState,
    b: FluidState,
    dt: f64,
}

#[wasm_bindgen]
impl TwinRun {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, length: f64, eps: f64, kappa: f64, amplitude: f64, width: f64, dt: f64) -> Result<TwinRun, JsError> {
        let grid = TorusGrid::new(1, n, length).map_err(js)?;
        let transform = Transform::new(grid);
        let nonlocal = PhysParams::new(1.0, 0.0, kappa, 1.0, eps).map_err(js)?;
        let local = nonlocal.with_eps(0.0).map_err(js)?;
        if !(dt > 0.0) {
            return Err(JsError::new("dt must be > 0"));
        }
        let s0 = GaussianBump::new(amplitude, [0.0, 0.0], width).state(&transform).map_err(js)?;
        Ok(TwinRun { transform, local, nonlocal, a: s0.clone(), b: s0, dt })
    }

    /// Advances both runs by `steps` Strang steps.
    pub fn step(&mut self, steps: usize) -> Result<(), JsError> {
        for _ in 0..steps {
            self.a = step_strang(&self.a, self.dt, &self.local, &self.transform).map_err(js)?;
            self.b = step_strang(&self.b, self.dt, &self.nonlocal, &self.transform).map_err(js)?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.a.t
    }

    /// Grid values of `q` for the local run.
    pub fn q_local(&self) -> Vec<f64> {
        self.transform.inverse(&self.a.q)
    }

    pub fn q_nonlocal(&self) -> Vec<f64> {
        self.transform.inverse(&self.b.q)
    }

    /// `‖(q, u)_local − (q, u)_nonlocal‖_{L²}`.
    pub fn difference(&self) -> f64 {
        self.a.l2_distance(&self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotherm_rows() {
        let v = isotherm(1.0, 2.0, 1.0, 1.0, 10).unwrap();
        assert_eq!(v.len(), 30);
        let p = phase_points(1.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(p[0], 1.0);
        assert!(p[3] < p[1] && p[1] < p[2] && p[2] < p[4]);
    }

    #[test]
    fn dispersion_local_limit() {
        let v = dispersion(1.0, 0.0, 1.0, 1.0, 1e-6, 2.0, 8).unwrap();
        for row in v.chunks(7) {
            assert!((row[1] - row[3]).abs() < 1e-9 && (row[5] - row[6]).abs() < 1e-9 * row[6].max(1.0));
        }
    }

    #[test]
    fn twins_start_equal_and_separate() {
        let mut t = TwinRun::new(64, 40.0, 0.5, 1.0, 0.1, 3.0, 0.05).unwrap();
        assert_eq!(t.difference(), 0.0);
        t.step(20).unwrap();
        assert!(t.difference() > 0.0);
        assert!((t.time() - 1.0).abs() < 1e-12);
        assert_eq!(t.q_local().len(), 64);
    }

    #[test]
    fn page_defaults_stay_bounded() {
        let mut t = TwinRun::new(256, 40.0, 0.5, 1.0, 0.2, 2.0, 0.02).unwrap();
        t.step(1500).unwrap();
        let peak = t.q_nonlocal().iter().chain(&t.q_local()).fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak.is_finite() && peak < 0.2, "{peak}");
    }
}
