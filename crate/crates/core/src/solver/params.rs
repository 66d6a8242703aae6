use crate::thermo::{PowerLaw, PressureLaw, VdWParams};
use crate::{KwgError, Result};

/// Pressure law driving the nonlinear coefficient `K(q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PressureModel {
    /// `P(ρ) = (p/γ) ρ^γ`, so that `P′(1) = p`.
    Power { exponent: f64 },
    VanDerWaals(VdWParams),
}

/// Physical constants of the fluctuation system; `eps = 0` selects local capillarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub p: f64,
    pub eps: f64,
    pub pressure: PressureModel,
}

impl PhysParams {
    /// Isothermal closure `P(ρ) = pρ`.
    pub fn new(mu: f64, lambda: f64, kappa: f64, p: f64, eps: f64) -> Result<Self> {
        Self::with_pressure(mu, lambda, kappa, p, eps, PressureModel::Power { exponent: 1.0 })
    }

    pub fn with_pressure(
        mu: f64,
        lambda: f64,
        kappa: f64,
        p: f64,
        eps: f64,
        pressure: PressureModel,
    ) -> Result<Self> {
        let finite = [mu, lambda, kappa, p, eps].iter().all(|v| v.is_finite());
        if !finite {
            return Err(KwgError::InvalidParameter("parameters must be finite".into()));
        }
        if !(mu > 0.0 && 2.0 * mu + lambda > 0.0) {
            return Err(KwgError::InvalidParameter(format!(
                "viscosities violate min(μ,2μ+λ)>0: mu = {mu}, lambda = {lambda}"
            )));
        }
        if !(p > 0.0) {
            return Err(KwgError::InvalidParameter(format!("P'(1) = {p} must be > 0")));
        }
        if !(kappa > 0.0) {
            return Err(KwgError::InvalidParameter(format!("kappa = {kappa} must be > 0")));
        }
        if !(eps >= 0.0) {
            return Err(KwgError::InvalidParameter(format!("eps = {eps} must be >= 0")));
        }
        match pressure {
            PressureModel::Power { exponent } if !(exponent >= 1.0) => {
                return Err(KwgError::InvalidParameter(format!(
                    "pressure exponent {exponent} must be >= 1"
                )))
            }
            PressureModel::VanDerWaals(v) => {
                let d = v.derivative(1.0);
                if !(v.b > 1.0) || (d - p).abs() > 1e-12 * p.max(1.0) {
                    return Err(KwgError::InvalidParameter(format!(
                        "Van der Waals law gives P'(1) = {d}, configured p = {p}"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self { mu, lambda, kappa, p, eps, pressure })
    }

    /// Van der Waals closure with `p = P′(1)` taken from the law.
    pub fn van_der_waals(mu: f64, lambda: f64, kappa: f64, eps: f64, vdw: VdWParams) -> Result<Self> {
        if !(vdw.b > 1.0) {
            return Err(KwgError::InvalidParameter("covolume b must exceed the reference density 1".into()));
        }
        let p = vdw.derivative(1.0);
        Self::with_pressure(mu, lambda, kappa, p, eps, PressureModel::VanDerWaals(vdw))
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::with_pressure(self.mu, self.lambda, self.kappa, self.p, eps, self.pressure)
    }

    /// `ν = λ + 2μ`.
    pub fn nu(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// `ν̲ = min(μ, ν)`.
    pub fn nubar(&self) -> f64 {
        self.mu.min(self.nu())
    }

    /// `P′(1+q)/(1+q)` for the configured law.
    pub fn pressure_ratio(&self, q: f64) -> f64 {
        let rho = 1.0 + q;
        match self.pressure {
            PressureModel::Power { exponent } => self.p * rho.powf(exponent - 2.0),
            PressureModel::VanDerWaals(v) => v.derivative(rho) / rho,
        }
    }

    /// `K(q) = P′(1) − P′(1+q)/(1+q)`.
    pub fn coefficient_k(&self, q: f64) -> f64 {
        self.p - self.pressure_ratio(q)
    }

    /// Pressure law as a trait object.
    pub fn law(&self) -> Box<dyn PressureLaw> {
        match self.pressure {
            PressureModel::Power { exponent } => Box::new(PowerLaw { coefficient: self.p / exponent, exponent }),
            PressureModel::VanDerWaals(v) => Box::new(v),
        }
    }
}
