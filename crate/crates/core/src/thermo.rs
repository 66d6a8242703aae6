//! Van der Waals thermodynamics, coefficient functions of the fluctuation
//! system, energy functionals and the characteristic fields of the
//! isothermal Euler system in Lagrangian form.

use crate::kernels::KernelSymbol;
use crate::lpaley::Transform;
use crate::numerics::{adaptive_simpson, bisect};
use crate::{KwgError, Result};

/// Barotropic pressure law `P(ρ)` on an open density interval.
pub trait PressureLaw: Send + Sync {
    fn pressure(&self, rho: f64) -> f64;
    fn derivative(&self, rho: f64) -> f64;
    fn second_derivative(&self, rho: f64) -> f64;
    /// Open interval of admissible densities.
    fn domain(&self) -> (f64, f64);

    fn check(&self, rho: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if rho > lo && rho < hi {
            Ok(())
        } else {
            Err(KwgError::Domain(format!(
                "density {rho} outside ({lo}, {hi})"
            )))
        }
    }
}

/// `P(ρ) = c ρ^γ` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn new(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient > 0.0 && exponent >= 1.0) {
            return Err(KwgError::InvalidParameter(format!(
                "power law needs c > 0 and exponent >= 1, got ({coefficient}, {exponent})"
            )));
        }
        Ok(Self { coefficient, exponent })
    }
}

impl PressureLaw for PowerLaw {
    fn pressure(&self, rho: f64) -> f64 {
        self.coefficient * rho.powf(self.exponent)
    }
    fn derivative(&self, rho: f64) -> f64 {
        self.coefficient * self.exponent * rho.powf(self.exponent - 1.0)
    }
    fn second_derivative(&self, rho: f64) -> f64 {
        let g = self.exponent;
        self.coefficient * g * (g - 1.0) * rho.powf(g - 2.0)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Van der Waals law `P(ρ) = R T ρ/(b − ρ) − a ρ²` at fixed temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdWParams {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub tstar: f64,
}

impl VdWParams {
    pub fn new(a: f64, b: f64, r: f64, tstar: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("R", r), ("Tstar", tstar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(KwgError::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { a, b, r, tstar })
    }

    fn rt(&self) -> f64 {
        self.r * self.tstar
    }

    pub fn is_subcritical(&self) -> bool {
        self.rt() < 8.0 * self.a * self.b * self.b / 27.0
    }

    /// Helmholtz energy density `W(ρ) = ρ[(RT/b) ln(ρ/(b−ρ)) − aρ]`, so that `P = ρW′ − W`.
    pub fn free_energy(&self, rho: f64) -> f64 {
        rho * (self.rt() / self.b * (rho / (self.b - rho)).ln() - self.a * rho)
    }

    /// Chemical potential `W′(ρ)`.
    pub fn chemical_potential(&self, rho: f64) -> f64 {
        let rt = self.rt();
        rt / self.b * (rho / (self.b - rho)).ln() + rt / (self.b - rho) - 2.0 * self.a * rho
    }

    /// `W″(ρ) = P′(ρ)/ρ`.
    pub fn free_energy_second(&self, rho: f64) -> f64 {
        let s = self.b - rho;
        self.rt() * self.b / (rho * s * s) - 2.0 * self.a
    }

    /// Density minimising `P′` on `(0, b)`.
    fn derivative_minimizer(&self) -> f64 {
        self.b - (self.rt() * self.b / self.a).cbrt()
    }
}

impl PressureLaw for VdWParams {
    fn pressure(&self, rho: f64) -> f64 {
        self.rt() * rho / (self.b - rho) - self.a * rho * rho
    }
    fn derivative(&self, rho: f64) -> f64 {
        let s = self.b - rho;
        self.rt() * self.b / (s * s) - 2.0 * self.a * rho
    }
    fn second_derivative(&self, rho: f64) -> f64 {
        let s = self.b - rho;
        2.0 * self.rt() * self.b / (s * s * s) - 2.0 * self.a
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.b)
    }
}

pub fn vdw_pressure(rho: f64, params: &VdWParams) -> Result<f64> {
    params.check(rho)?;
    Ok(params.pressure(rho))
}

pub fn vdw_pressure_derivative(rho: f64, params: &VdWParams) -> Result<f64> {
    params.check(rho)?;
    Ok(params.derivative(rho))
}

/// Spinodal densities `(α₁, α₂)`, the roots of `P′` in `(0, b)`; `None` when `P′ > 0` throughout.
pub fn spinodal_points(params: &VdWParams) -> Option<(f64, f64)> {
    if !params.is_subcritical() {
        return None;
    }
    let split = params.derivative_minimizer();
    let f = |rho: f64| params.derivative(rho);
    // P′(0⁺) = RT/b > 0 and P′ → +∞ at b, so both brackets change sign.
    let a1 = bisect(f, 0.0, split, 1e-15).ok()?;
    let a2 = bisect(f, split, params.b * (1.0 - 1e-15), 1e-15).ok()?;
    Some((a1, a2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiagram {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub subcritical: bool,
}

impl PhaseDiagram {
    /// Specific volumes `(1/α₂, 1/α₁)` on which the Euler system is elliptic.
    pub fn elliptic_volume_interval(&self) -> (f64, f64) {
        (1.0 / self.alpha2, 1.0 / self.alpha1)
    }
}

/// Residual of the common-tangent system at `(β₁, β₂)`.
pub fn maxwell_residual(params: &VdWParams, b1: f64, b2: f64) -> [f64; 2] {
    [
        params.chemical_potential(b1) - params.chemical_potential(b2),
        params.pressure(b1) - params.pressure(b2),
    ]
}

/// Maxwell densities `(β₁, β₂)`: equal pressure and equal chemical potential.
pub fn maxwell_states(params: &VdWParams) -> Result<(f64, f64)> {
    let (a1, a2) = spinodal_points(params).ok_or_else(|| {
        KwgError::NoConvergence("no two-phase equilibrium: parameters are supercritical".into())
    })?;
    let polished = |b1: f64, b2: f64| newton_common_tangent(params, b1, b2, a1, a2);
    if let Some(r) = polished(0.5 * a1, 0.5 * (a2 + params.b)) {
        return Ok(r);
    }
    let (b1, b2) = maxwell_by_pressure_level(params, a1, a2)?;
    polished(b1, b2).map(Ok).unwrap_or(Ok((b1, b2)))
}

fn newton_common_tangent(
    params: &VdWParams,
    mut b1: f64,
    mut b2: f64,
    a1: f64,
    a2: f64,
) -> Option<(f64, f64)> {
    let scale = params.pressure(a1).abs().max(params.chemical_potential(a1).abs()).max(1.0);
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut res = maxwell_residual(params, b1, b2);
    for _ in 0..200 {
        if norm(res) < 1e-13 * scale {
            return Some((b1, b2));
        }
        let (w1, w2) = (params.free_energy_second(b1), params.free_energy_second(b2));
        // Jacobian [[W″₁, −W″₂], [β₁W″₁, −β₂W″₂]].
        let det = w1 * w2 * (b1 - b2);
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let d1 = (-b2 * w2 * res[0] + w2 * res[1]) / det;
        let d2 = (-b1 * w1 * res[0] + w1 * res[1]) / det;
        let mut step = 1.0;
        loop {
            let (n1, n2) = (b1 - step * d1, b2 - step * d2);
            if n1 > 0.0 && n1 < a1 && n2 > a2 && n2 < params.b {
                let nres = maxwell_residual(params, n1, n2);
                if norm(nres) < norm(res) {
                    b1 = n1;
                    b2 = n2;
                    res = nres;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                return if norm(res) < 1e-10 * scale { Some((b1, b2)) } else { None };
            }
        }
    }
    (norm(res) < 1e-10 * scale).then_some((b1, b2))
}

/// Bisection on the pressure level `Π`: for each `Π` the two outer roots of
/// `P = Π` are found, then `Π` is adjusted until their chemical potentials agree.
fn maxwell_by_pressure_level(params: &VdWParams, a1: f64, a2: f64) -> Result<(f64, f64)> {
    let p_hi = params.pressure(a1);
    let p_lo = params.pressure(a2).max(0.0);
    let roots = |level: f64| -> Result<(f64, f64)> {
        let r1 = bisect(|r| params.pressure(r) - level, 0.0, a1, 1e-15)?;
        let r2 = bisect(|r| params.pressure(r) - level, a2, params.b * (1.0 - 1e-15), 1e-15)?;
        Ok((r1, r2))
    };
    let gap = |level: f64| -> f64 {
        match roots(level) {
            Ok((r1, r2)) => params.chemical_potential(r2) - params.chemical_potential(r1),
            Err(_) => f64::NAN,
        }
    };
    let width = p_hi - p_lo;
    let level = bisect(gap, p_lo + 1e-12 * width, p_hi - 1e-12 * width, 1e-15)?;
    roots(level)
}

/// Spinodal and Maxwell states together.
pub fn phase_diagram(params: &VdWParams) -> Result<PhaseDiagram> {
    let (alpha1, alpha2) = spinodal_points(params).ok_or_else(|| {
        KwgError::NoConvergence("no two-phase equilibrium: parameters are supercritical".into())
    })?;
    let (beta1, beta2) = maxwell_states(params)?;
    Ok(PhaseDiagram { alpha1, alpha2, beta1, beta2, subcritical: true })
}

fn check_fluctuation(q: f64) -> Result<()> {
    if q > -1.0 {
        Ok(())
    } else {
        Err(KwgError::Domain(format!("1 + q must be positive, got q = {q}")))
    }
}

/// `K(q) = P′(1) − P′(1+q)/(1+q)`.
pub fn coefficient_k(q: f64, law: &dyn PressureLaw) -> Result<f64> {
    check_fluctuation(q)?;
    law.check(1.0 + q)?;
    Ok(law.derivative(1.0) - law.derivative(1.0 + q) / (1.0 + q))
}

/// `I(q) = q/(1+q)`.
pub fn coefficient_i(q: f64) -> Result<f64> {
    check_fluctuation(q)?;
    Ok(q / (1.0 + q))
}

/// Primitive of `K` vanishing at zero.
pub fn coefficient_g(q: f64, law: &dyn PressureLaw) -> Result<f64> {
    check_fluctuation(q)?;
    law.check(1.0 + q)?;
    let p1 = law.derivative(1.0);
    let k = |s: f64| p1 - law.derivative(1.0 + s) / (1.0 + s);
    Ok(adaptive_simpson(&k, 0.0, q, 1e-12))
}

/// `K` and `I` sampled for the solver on a validity interval of `q`.
#[derive(Debug, Clone)]
pub struct CoefficientFns {
    pub p_prime1: f64,
    pub q_min: f64,
    pub q_max: f64,
    k: Vec<f64>,
    i: Vec<f64>,
    g: Vec<f64>,
}

impl CoefficientFns {
    pub fn tabulate(law: &dyn PressureLaw, q_min: f64, q_max: f64, samples: usize) -> Result<Self> {
        if !(q_min > -1.0 && q_max > q_min && samples >= 2) {
            return Err(KwgError::InvalidParameter(format!(
                "table interval ({q_min}, {q_max}) with {samples} samples"
            )));
        }
        let p_prime1 = law.derivative(1.0);
        let h = (q_max - q_min) / (samples - 1) as f64;
        let mut k = Vec::with_capacity(samples);
        let mut i = Vec::with_capacity(samples);
        let mut g = Vec::with_capacity(samples);
        for n in 0..samples {
            let q = q_min + h * n as f64;
            k.push(coefficient_k(q, law)?);
            i.push(coefficient_i(q)?);
            g.push(coefficient_g(q, law)?);
        }
        Ok(Self { p_prime1, q_min, q_max, k, i, g })
    }

    fn lerp(&self, table: &[f64], q: f64) -> f64 {
        let h = (self.q_max - self.q_min) / (table.len() - 1) as f64;
        let x = ((q - self.q_min) / h).clamp(0.0, (table.len() - 1) as f64);
        let n = (x.floor() as usize).min(table.len() - 2);
        let t = x - n as f64;
        table[n] * (1.0 - t) + table[n + 1] * t
    }

    pub fn k(&self, q: f64) -> f64 {
        self.lerp(&self.k, q)
    }
    pub fn i(&self, q: f64) -> f64 {
        self.lerp(&self.i, q)
    }
    pub fn g(&self, q: f64) -> f64 {
        self.lerp(&self.g, q)
    }
}

fn check_density_field(rho: &[f64], params: &VdWParams) -> Result<()> {
    match rho.iter().find(|&&r| !(r > 0.0 && r < params.b)) {
        Some(r) => Err(KwgError::Domain(format!("density {r} outside (0, {})", params.b))),
        None => Ok(()),
    }
}

/// `∫ W(ρ)` over the torus by the rectangle rule (spectrally accurate for periodic data).
pub fn eval_sharp_functional(rho: &[f64], transform: &Transform, params: &VdWParams) -> Result<f64> {
    check_density_field(rho, params)?;
    let cell = transform.grid().cell_volume();
    Ok(rho.iter().map(|&r| params.free_energy(r)).sum::<f64>() * cell)
}

/// `∫ W(ρ) + γ(ε²/2)|∇ρ|²`.
pub fn eval_local_functional(
    rho: &[f64],
    transform: &Transform,
    params: &VdWParams,
    gamma: f64,
    eps: f64,
) -> Result<f64> {
    let bulk = eval_sharp_functional(rho, transform, params)?;
    let field = transform.forward(rho)?;
    let grid = field.grid();
    let vol = grid.volume();
    let grad2: f64 = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| grid.xi_norm2(idx) * c.norm_sqr())
        .sum::<f64>()
        * vol;
    Ok(bulk + 0.5 * gamma * eps * eps * grad2)
}

/// `∫ W(ρ) + (γ/2)|Ω| Σ_ξ (1 − φ̂_ε(ξ))|c_ξ|²` with normalised coefficients `c_ξ`.
pub fn eval_nonlocal_functional(
    rho: &[f64],
    transform: &Transform,
    params: &VdWParams,
    gamma: f64,
    eps: f64,
    kernel: &KernelSymbol,
) -> Result<f64> {
    let bulk = eval_sharp_functional(rho, transform, params)?;
    let field = transform.forward(rho)?;
    let grid = field.grid();
    let penalty: f64 = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| kernel.one_minus_g(eps * eps * grid.xi_norm2(idx)) * c.norm_sqr())
        .sum::<f64>()
        * grid.volume();
    Ok(bulk + 0.5 * gamma * penalty)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Hyperbolic,
    Elliptic,
    Boundary,
}

/// Characteristic data of `τ_t − v_x = 0, v_t + P̃(τ)_x = 0` with `P̃(τ) = P(1/τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerFields {
    pub regime: Regime,
    pub dp_tilde: f64,
    pub d2p_tilde: f64,
    /// `(λ₁, λ₂)`, present only in the hyperbolic regime.
    pub eigenvalues: Option<(f64, f64)>,
    pub eigenvectors: Option<([f64; 2], [f64; 2])>,
    /// `(∇λ₁·w₁, ∇λ₂·w₂)`.
    pub genuine_nonlinearity: Option<(f64, f64)>,
}

pub fn euler_characteristics(tau: f64, law: &dyn PressureLaw) -> Result<EulerFields> {
    if !(tau > 0.0) {
        return Err(KwgError::Domain(format!("specific volume {tau} must be positive")));
    }
    let rho = 1.0 / tau;
    law.check(rho)?;
    let p1 = law.derivative(rho);
    let p2 = law.second_derivative(rho);
    let dp = -p1 / (tau * tau);
    let d2p = p2 / tau.powi(4) + 2.0 * p1 / tau.powi(3);
    if dp > 0.0 {
        return Ok(EulerFields {
            regime: Regime::Elliptic,
            dp_tilde: dp,
            d2p_tilde: d2p,
            eigenvalues: None,
            eigenvectors: None,
            genuine_nonlinearity: None,
        });
    }
    let c = (-dp).sqrt();
    let regime = if dp == 0.0 { Regime::Boundary } else { Regime::Hyperbolic };
    let gnl = if c > 0.0 {
        Some((d2p / (2.0 * c), -d2p / (2.0 * c)))
    } else {
        None
    };
    Ok(EulerFields {
        regime,
        dp_tilde: dp,
        d2p_tilde: d2p,
        eigenvalues: Some((-c, c)),
        eigenvectors: Some(([1.0, c], [1.0, -c])),
        genuine_nonlinearity: gnl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ref_params() -> VdWParams {
        VdWParams::new(1.0, 2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn pressure_examples() {
        let unit = VdWParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((vdw_pressure(0.5, &unit).unwrap() - 0.75).abs() < 1e-15);
        assert!(vdw_pressure(1e-12, &unit).unwrap().abs() < 1e-11);
        assert!(vdw_pressure(1.0, &ref_params()).unwrap().abs() < 1e-15);
        assert!(vdw_pressure(0.0, &unit).is_err());
        assert!(vdw_pressure(1.0, &unit).is_err());
    }

    #[test]
    fn derivative_examples() {
        let p = ref_params();
        assert!(vdw_pressure_derivative(1.0, &p).unwrap().abs() < 1e-15);
        let root = (3.0 - 5f64.sqrt()) / 2.0;
        assert!(vdw_pressure_derivative(root, &p).unwrap().abs() < 1e-12);
        assert!((vdw_pressure_derivative(0.1, &p).unwrap() - (2.0 / 3.61 - 0.2)).abs() < 1e-12);
    }

    #[test]
    fn spinodal_reference_roots() {
        let (a1, a2) = spinodal_points(&ref_params()).unwrap();
        assert!((a1 - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((a2 - 1.0).abs() < 1e-12);
        let p = ref_params();
        assert!(p.derivative(a1).abs() < 1e-10 && p.derivative(a2).abs() < 1e-10);
    }

    #[test]
    fn supercritical_has_no_spinodal() {
        let p = VdWParams::new(0.1, 2.0, 1.0, 1.0).unwrap();
        assert!(spinodal_points(&p).is_none());
        assert!(maxwell_states(&p).is_err());
    }

    #[test]
    fn maxwell_states_bracket_spinodal() {
        let p = ref_params();
        let d = phase_diagram(&p).unwrap();
        assert!(0.0 < d.beta1 && d.beta1 < d.alpha1 && d.alpha2 < d.beta2 && d.beta2 < p.b);
        let r = maxwell_residual(&p, d.beta1, d.beta2);
        assert!(r[0].hypot(r[1]) < 1e-10);
    }

    #[test]
    fn pressure_level_fallback_agrees_with_newton() {
        let p = ref_params();
        let (a1, a2) = spinodal_points(&p).unwrap();
        let (n1, n2) = maxwell_states(&p).unwrap();
        let (f1, f2) = maxwell_by_pressure_level(&p, a1, a2).unwrap();
        assert!((n1 - f1).abs() < 1e-9 && (n2 - f2).abs() < 1e-9);
    }

    #[test]
    fn coefficient_values() {
        let law = PowerLaw::new(1.0, 2.0).unwrap();
        assert_eq!(coefficient_k(0.0, &law).unwrap(), 0.0);
        assert_eq!(coefficient_i(0.0).unwrap(), 0.0);
        assert_eq!(coefficient_g(0.0, &law).unwrap(), 0.0);
        assert!((coefficient_i(1.0).unwrap() - 0.5).abs() < 1e-15);
        let fd = (coefficient_g(0.2, &law).unwrap() - coefficient_g(0.1, &law).unwrap()) / 0.1;
        assert!((fd - coefficient_k(0.15, &law).unwrap()).abs() < 1e-3);
        assert!(coefficient_i(-1.0).is_err());
    }

    #[test]
    fn tabulated_coefficients_interpolate() {
        let law = PowerLaw::new(1.0, 2.0).unwrap();
        let t = CoefficientFns::tabulate(&law, -0.5, 0.5, 2001).unwrap();
        for q in [-0.3, 0.0, 0.17] {
            assert!((t.k(q) - coefficient_k(q, &law).unwrap()).abs() < 1e-6);
            assert!((t.i(q) - coefficient_i(q).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn euler_isothermal_gas() {
        let law = PowerLaw::new(1.0, 1.0).unwrap();
        for tau in [0.5, 1.0, 3.0] {
            let f = euler_characteristics(tau, &law).unwrap();
            let (l1, l2) = f.eigenvalues.unwrap();
            assert!((l1 + 1.0 / tau).abs() < 1e-14 && (l2 - 1.0 / tau).abs() < 1e-14);
            assert!((l1 * l2 - f.dp_tilde).abs() < 1e-14);
        }
    }

    #[test]
    fn euler_spinodal_volume_is_elliptic() {
        let p = ref_params();
        let d = phase_diagram(&p).unwrap();
        let (lo, hi) = d.elliptic_volume_interval();
        let f = euler_characteristics(0.5 * (lo + hi), &p).unwrap();
        assert_eq!(f.regime, Regime::Elliptic);
        assert!(f.eigenvalues.is_none());
        let outside = euler_characteristics(1.5 * hi, &p).unwrap();
        assert_eq!(outside.regime, Regime::Hyperbolic);
    }
}
