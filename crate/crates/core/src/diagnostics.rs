//! Per-block energy functionals, their equivalence bounds, the capillarity
//! consistency remainder and the a priori estimate monitor.

use crate::kernels::{
    capillarity_symbol, consistency_constant, relaxation_defect, threshold_gamma, ThresholdSpec,
};
use crate::lpaley::{
    BlockNorms, DyadicFamily, HybridNormSpec, SpectralField, SummabilityIndex, TimeExponent, ANNULUS_INNER,
    ANNULUS_OUTER,
};
use crate::numerics::{bisect, linear_fit};
use crate::solver::{FluidState, PhysParams, Trajectory};
use crate::{Complex64, KwgError, Result};

/// Weight `α = ν̲/4` of the cross terms.
pub fn energy_alpha(params: &PhysParams) -> f64 {
    0.25 * params.nubar()
}

/// Terms of `h_l² = ‖u_l‖² + p‖q_l‖² + αν‖∇q_l‖² + 2α(u_l|∇q_l) + nonlocal`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyComponents {
    pub u2: f64,
    pub pq2: f64,
    pub alpha_nu_grad2: f64,
    pub alpha_cross: f64,
    /// `Σ_ξ c_ε(|ξ|²)|q̂_l|²·|Ω|`, equal to `(κ/ε²)(q_l | q_l − φ_ε∗q_l)`.
    pub nonlocal: f64,
    /// `‖∇q_l‖²` and `‖u_l‖‖∇q_l‖`, kept for the equivalence check.
    pub grad2: f64,
    pub cauchy_schwarz: f64,
}

impl EnergyComponents {
    pub fn h2(&self) -> f64 {
        self.u2 + self.pq2 + self.alpha_nu_grad2 + self.alpha_cross + self.nonlocal
    }
    pub fn h(&self) -> f64 {
        self.h2().max(0.0).sqrt()
    }
}

/// `h_l` components of block `l` of a state.
pub fn energy_block(state: &FluidState, l: i32, params: &PhysParams, family: &DyadicFamily) -> Result<EnergyComponents> {
    let grid = *family.grid();
    grid.same_as(state.grid())?;
    let vol = grid.volume();
    let alpha = energy_alpha(params);
    let mut c = EnergyComponents::default();
    let (mut u2, mut q2, mut g2, mut cross, mut nl) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for idx in 0..grid.len() {
        let w = family.weight(idx, l);
        if w == 0.0 {
            continue;
        }
        let w2 = w * w;
        let xi = grid.xi(idx);
        let r2 = grid.xi_norm2(idx);
        let q = state.q.coeffs()[idx];
        let qn = q.norm_sqr();
        q2 += w2 * qn;
        g2 += w2 * r2 * qn;
        nl += w2 * capillarity_symbol(r2, params.kappa, params.eps) * qn;
        // (u_l | ∇q_l) per mode: Re(û · conj(iξ q̂)).
        let grad_q_conj = (Complex64::new(0.0, 1.0) * q).conj();
        for (a, u) in state.u.iter().enumerate() {
            let uc = u.coeffs()[idx];
            u2 += w2 * uc.norm_sqr();
            cross += w2 * (uc * grad_q_conj * xi[a]).re;
        }
    }
    c.u2 = u2 * vol;
    c.pq2 = params.p * q2 * vol;
    c.grad2 = g2 * vol;
    c.alpha_nu_grad2 = alpha * params.nu() * c.grad2;
    c.alpha_cross = 2.0 * alpha * cross * vol;
    c.nonlocal = nl * vol;
    c.cauchy_schwarz = (c.u2 * c.grad2).sqrt();
    debug_assert!((c.alpha_cross / (2.0 * alpha)).abs() <= c.cauchy_schwarz * (1.0 + 1e-12) + 1e-300);
    Ok(c)
}

/// Lower and upper quadratic forms bracketing `h_l²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    pub lower: f64,
    pub h2: f64,
    pub upper: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        let tol = 1e-12 * self.upper.abs().max(1e-300);
        self.lower_margin >= -tol && self.upper_margin >= -tol
    }
}

/// `(1 − 2α/ν)‖u_l‖² + p‖q_l‖² + (αν/2)‖∇q_l‖² + nonlocal ≤ h_l² ≤ (1 + 2α/ν)‖u_l‖² + p‖q_l‖² + (3αν/2)‖∇q_l‖² + nonlocal`.
pub fn check_equivalence(c: &EnergyComponents, params: &PhysParams) -> Result<EquivalenceReport> {
    let alpha = energy_alpha(params);
    let nu = params.nu();
    let common = c.pq2 + c.nonlocal;
    let lower = (1.0 - 2.0 * alpha / nu) * c.u2 + common + 0.5 * alpha * nu * c.grad2;
    let upper = (1.0 + 2.0 * alpha / nu) * c.u2 + common + 1.5 * alpha * nu * c.grad2;
    let h2 = c.h2();
    let report = EquivalenceReport { lower, h2, upper, lower_margin: h2 - lower, upper_margin: upper - h2 };
    if report.holds() {
        Ok(report)
    } else {
        Err(KwgError::Domain(format!(
            "h_l equivalence violated: {lower:.6e} <= {h2:.6e} <= {upper:.6e} fails"
        )))
    }
}

/// Decay constants `α`, `m`, `m′` and the threshold `l_ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConstants {
    pub alpha: f64,
    pub m: f64,
    pub m_prime: f64,
    pub gamma: f64,
    pub l_eps: Option<i32>,
}

impl DecayConstants {
    pub fn new(params: &PhysParams) -> Result<Self> {
        let alpha = energy_alpha(params);
        let m = (params.nubar() - alpha).min(alpha * params.p).min(0.5 * alpha * params.kappa);
        let gamma = threshold_gamma();
        let ratio = ANNULUS_INNER / ANNULUS_OUTER;
        let m_prime = m * (gamma / (ANNULUS_OUTER * ANNULUS_OUTER)).min(-(-gamma * ratio * ratio).exp_m1());
        let l_eps = if params.eps > 0.0 {
            Some(ThresholdSpec::new(params.eps, ANNULUS_OUTER)?.l_eps)
        } else {
            None
        };
        Ok(Self { alpha, m, m_prime, gamma, l_eps })
    }

    pub fn is_low(&self, l: i32) -> bool {
        self.l_eps.map_or(true, |le| l <= le)
    }

    /// Envelope factor at time `t` for block `l` with lattice-calibrated minimum frequency `xi_min`.
    pub fn envelope(&self, l: i32, xi_min: f64, eps: f64, t: f64) -> f64 {
        if self.is_low(l) {
            (-0.5 * self.m * xi_min * xi_min * t).exp()
        } else {
            (-self.m_prime * t / (eps * eps)).exp()
        }
    }
}

/// Per-block energies of every snapshot of a run, with decay constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub j_min: i32,
    /// `entries[snapshot][block − j_min]`.
    pub entries: Vec<Vec<EnergyComponents>>,
    pub constants: DecayConstants,
    /// Smallest lattice `|ξ|` of each block.
    pub block_min_xi: Vec<f64>,
    pub eps: f64,
}

impl EnergyLedger {
    pub fn record(states: &[FluidState], params: &PhysParams, family: &DyadicFamily) -> Result<Self> {
        let entries = states
            .iter()
            .map(|s| family.blocks().map(|l| energy_block(s, l, params, family)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let block_min_xi = family.blocks().map(|l| family.block_min_xi(l).unwrap_or(f64::NAN)).collect();
        Ok(Self {
            times: states.iter().map(|s| s.t).collect(),
            j_min: family.j_min(),
            entries,
            constants: DecayConstants::new(params)?,
            block_min_xi,
            eps: params.eps,
        })
    }

    pub fn blocks(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.block_min_xi.len()).map(move |k| self.j_min + k as i32)
    }

    pub fn h(&self, snapshot: usize, l: i32) -> f64 {
        self.entries[snapshot][(l - self.j_min) as usize].h()
    }

    /// `h_l(0)` times the theoretical decay factor at snapshot time.
    pub fn envelope(&self, snapshot: usize, l: i32) -> f64 {
        let k = (l - self.j_min) as usize;
        self.h(0, l) * self.constants.envelope(l, self.block_min_xi[k], self.eps, self.times[snapshot])
    }

    /// Least-squares rate `-d ln h_l/dt` over the first half of the run, skipping zeros.
    pub fn fitted_rate(&self, l: i32) -> Option<f64> {
        let half = self.times.len().div_ceil(2).max(2).min(self.times.len());
        let (t, y): (Vec<f64>, Vec<f64>) = (0..half)
            .filter_map(|s| {
                let h = self.h(s, l);
                (h > 0.0).then(|| (self.times[s], h.ln()))
            })
            .unzip();
        if t.len() < 2 {
            return None;
        }
        Some(-linear_fit(&t, &y).0)
    }

    /// Equivalence check over every snapshot and block; returns the number of violations.
    pub fn equivalence_violations(&self, params: &PhysParams) -> usize {
        self.entries.iter().flatten().filter(|c| check_equivalence(c, params).is_err()).count()
    }

    /// CSV rows `l,t,h,u2,pq2,alpha_nu_grad2,alpha_cross,nonlocal,envelope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,t,h,u2,pq2,alpha_nu_grad2,alpha_cross,nonlocal,envelope\n");
        for l in self.blocks() {
            let k = (l - self.j_min) as usize;
            for (s, t) in self.times.iter().enumerate() {
                let c = &self.entries[s][k];
                out.push_str(&format!(
                    "{l},{},{},{},{},{},{},{},{}\n",
                    fmt(*t),
                    fmt(c.h()),
                    fmt(c.u2),
                    fmt(c.pq2),
                    fmt(c.alpha_nu_grad2),
                    fmt(c.alpha_cross),
                    fmt(c.nonlocal),
                    fmt(self.envelope(s, l))
                ));
            }
        }
        out
    }

    /// Key-value summary with the decay constants and fitted rates.
    pub fn summary(&self) -> String {
        let c = &self.constants;
        let mut out = format!(
            "alpha = {}\nm = {}\nm_prime = {}\ngamma = {}\nl_eps = {}\n",
            fmt(c.alpha),
            fmt(c.m),
            fmt(c.m_prime),
            fmt(c.gamma),
            c.l_eps.map_or("none".to_string(), |l| l.to_string())
        );
        for l in self.blocks() {
            if let Some(r) = self.fitted_rate(l) {
                out.push_str(&format!("rate[{l}] = {}\n", fmt(r)));
            }
        }
        out
    }
}

/// Fixed scientific format shared by all text artifacts.
pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Measured remainder norm against the right-hand side of its consistency bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderReport {
    pub beta: f64,
    pub eps: f64,
    pub s: f64,
    /// `‖R_ε‖_{Ḃ^s_{2,1}}`.
    pub lhs: f64,
    pub c_beta: f64,
    /// `κ C_β ε^{2(β−1)} ‖q‖_{Ḃ^{s+1+2β}_{2,1}}`.
    pub rhs: f64,
    /// The same bound with the block-frequency Bernstein factor `C₀^{1+2β}`.
    pub rhs_bernstein: f64,
}

impl RemainderReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
    pub fn holds_bernstein(&self) -> bool {
        self.lhs <= self.rhs_bernstein
    }
}

/// `R_ε = −(κ/ε²)∇(φ_ε∗q − q − ε²Δq)`: multiplier `−(κ/ε²) iξ (e^{−ε²|ξ|²} − 1 + ε²|ξ|²)`.
pub fn remainder_field(q: &SpectralField, kappa: f64, eps: f64) -> Vec<SpectralField> {
    let g = *q.grid();
    let e2 = eps * eps;
    (0..g.dim())
        .map(|a| {
            let mut f = q.clone();
            for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
                let xi = g.xi(idx);
                let m = -kappa / e2 * relaxation_defect(e2 * g.xi_norm2(idx)) * xi[a];
                *c *= Complex64::new(0.0, m);
            }
            f
        })
        .collect()
}

pub fn consistency_remainder(
    q: &SpectralField,
    kappa: f64,
    eps: f64,
    beta: f64,
    s: f64,
    family: &DyadicFamily,
) -> Result<(Vec<SpectralField>, RemainderReport)> {
    if !(eps > 0.0) {
        return Err(KwgError::InvalidParameter(format!("eps = {eps} must be > 0")));
    }
    let c_beta = consistency_constant(beta)?;
    let r = remainder_field(q, kappa, eps);
    let lhs = family.block_norms_vector(&r)?.besov(s, SummabilityIndex::One);
    let q_norm = family.block_norms(q)?.besov(s + 1.0 + 2.0 * beta, SummabilityIndex::One);
    let rhs = kappa * c_beta * eps.powf(2.0 * (beta - 1.0)) * q_norm;
    let rhs_bernstein = rhs * ANNULUS_OUTER.powf(1.0 + 2.0 * beta);
    Ok((r, RemainderReport { beta, eps, s, lhs, c_beta, rhs, rhs_bernstein }))
}

/// The six solution norms at regularity `s`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SixNorms {
    /// `‖u‖_{L̃^∞ Ḃ^{s−1}}`.
    pub u_inf_low: f64,
    /// `‖q‖_{L̃^∞ Ḃ^{s−1}}`.
    pub q_inf_low: f64,
    /// `‖q‖_{L̃^∞ Ḃ^s}`.
    pub q_inf: f64,
    /// `‖u‖_{L̃¹ Ḃ^{s+1}}`.
    pub u_l1: f64,
    /// `‖q‖_{L̃¹ Ḃ_ε^{s+1,s}}`.
    pub q_l1_hybrid1: f64,
    /// `‖q‖_{L̃¹ Ḃ_ε^{s+2,s}}`.
    pub q_l1_hybrid2: f64,
}

impl SixNorms {
    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.u_inf_low, self.q_inf_low, self.q_inf, self.u_l1, self.q_l1_hybrid1, self.q_l1_hybrid2]
    }

    pub fn scaled(&self, c: f64) -> Self {
        let a = self.as_array().map(|v| v * c.abs());
        Self {
            u_inf_low: a[0],
            q_inf_low: a[1],
            q_inf: a[2],
            u_l1: a[3],
            q_l1_hybrid1: a[4],
            q_l1_hybrid2: a[5],
        }
    }

    /// From per-snapshot block norms of `q` and `u` sampled every `dt`.
    pub fn from_series(q: &[BlockNorms], u: &[BlockNorms], dt: f64, s: f64, eps: f64) -> Result<Self> {
        let one = SummabilityIndex::One;
        let qi = BlockNorms::time_profile(q, dt, TimeExponent::Infinity)?;
        let ui = BlockNorms::time_profile(u, dt, TimeExponent::Infinity)?;
        let (q1, u1) = if q.len() >= 2 {
            (BlockNorms::time_profile(q, dt, TimeExponent::One)?, BlockNorms::time_profile(u, dt, TimeExponent::One)?)
        } else {
            (BlockNorms::new(qi.j_min, vec![0.0; qi.values.len()]), BlockNorms::new(ui.j_min, vec![0.0; ui.values.len()]))
        };
        let gamma = threshold_gamma();
        let h1 = HybridNormSpec::new(s + 1.0, s, eps, gamma, ANNULUS_OUTER)?;
        let h2 = HybridNormSpec::new(s + 2.0, s, eps, gamma, ANNULUS_OUTER)?;
        Ok(Self {
            u_inf_low: ui.besov(s - 1.0, one),
            q_inf_low: qi.besov(s - 1.0, one),
            q_inf: qi.besov(s, one),
            u_l1: u1.besov(s + 1.0, one),
            q_l1_hybrid1: q1.hybrid(&h1),
            q_l1_hybrid2: q1.hybrid(&h2),
        })
    }
}

/// Both sides of the a priori estimate and the smallest constant making it hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriReport {
    pub lhs: SixNorms,
    /// `∫(‖∇v‖_{Ḃ^{d/2}} + ‖v‖²_{Ḃ^{d/2}})`.
    pub convection_integral: f64,
    pub initial_norms: f64,
    pub forcing_norms: f64,
    /// Smallest `C` with `lhs ≤ C e^{C·integral} (initial + forcing)`.
    pub constant: f64,
}

pub fn apriori_monitor(traj: &Trajectory, s: f64, family: &DyadicFamily) -> Result<AprioriReport> {
    let eps = traj.params.eps;
    if !(eps > 0.0) {
        return Err(KwgError::InvalidParameter("a priori monitor needs eps > 0".into()));
    }
    let q: Vec<BlockNorms> = traj.states.iter().map(|st| family.block_norms(&st.q)).collect::<Result<_>>()?;
    let u: Vec<BlockNorms> = traj.states.iter().map(|st| family.block_norms_vector(&st.u)).collect::<Result<_>>()?;
    let lhs = SixNorms::from_series(&q, &u, traj.output_dt, s, eps)?;
    let one = SummabilityIndex::One;
    let t = traj.final_state().t - traj.states[0].t;
    let d = family.grid().dim() as f64;
    let initial_norms = u[0].besov(s - 1.0, one) + q[0].besov(s - 1.0, one) + q[0].besov(s, one);
    let (forcing_norms, convection_integral) = match &traj.forcing {
        None => (0.0, 0.0),
        Some(f) => {
            let fb = family.block_norms(&f.f)?;
            let gb = family.block_norms_vector(&f.g)?;
            let forcing = t * (fb.besov(s - 1.0, one) + fb.besov(s, one) + gb.besov(s - 1.0, one));
            let grads: Vec<SpectralField> =
                f.v.iter().flat_map(|c| (0..c.grid().dim()).map(move |b| c.derivative(b))).collect();
            let gv = family.block_norms_vector(&grads)?.besov(0.5 * d, one);
            let vv = family.block_norms_vector(&f.v)?.besov(0.5 * d, one);
            (forcing, t * (gv + vv * vv))
        }
    };
    let rhs_base = initial_norms + forcing_norms;
    let target = lhs.sum();
    let constant = if rhs_base == 0.0 {
        if target == 0.0 { 0.0 } else { f64::INFINITY }
    } else if convection_integral == 0.0 {
        target / rhs_base
    } else {
        let f = |c: f64| c * (c * convection_integral).exp() * rhs_base - target;
        let mut hi = target / rhs_base;
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        bisect(f, 0.0, hi, 1e-14)?
    };
    Ok(AprioriReport { lhs, convection_integral, initial_norms, forcing_norms, constant })
}
