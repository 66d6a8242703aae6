//! Twin runs of the local and non-local systems across an ε-sweep, with
//! difference norms and a log-log rate fit.

use crate::diagnostics::{fmt, SixNorms};
use crate::lpaley::{BlockNorms, DyadicFamily};
use crate::numerics::linear_fit;
use crate::solver::{simulate, FluidState, PhysParams, SimulationOptions, SmallnessReport, SpectralContext, Trajectory};
use crate::{KwgError, Result};

#[derive(Debug, Clone)]
pub struct SweepPlan {
    /// Strictly decreasing, positive.
    pub eps: Vec<f64>,
    pub initial: FluidState,
    /// Physical constants shared by every member; its `eps` is ignored.
    pub params: PhysParams,
    pub t_final: f64,
    pub dt: f64,
    pub options: SimulationOptions,
    /// Target exponent `α`.
    pub alpha: f64,
    /// Smallness bound on the initial data, when enforced.
    pub eta: Option<f64>,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.eps.len() < 2 || self.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(KwgError::InvalidParameter("sweep needs >= 2 positive eps values".into()));
        }
        if self.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(KwgError::InvalidParameter("eps values must be strictly decreasing".into()));
        }
        let d = self.initial.grid().dim();
        let ok = if d == 2 { self.alpha > 0.0 && self.alpha < 1.0 } else { self.alpha > 0.0 && self.alpha <= 1.0 };
        if !ok {
            return Err(KwgError::InvalidParameter(format!("alpha = {} outside its admissible range", self.alpha)));
        }
        Ok(())
    }
}

fn series(traj: &Trajectory, family: &DyadicFamily) -> Result<(Vec<BlockNorms>, Vec<BlockNorms>)> {
    let q = traj.states.iter().map(|s| family.block_norms(&s.q)).collect::<Result<_>>()?;
    let u = traj.states.iter().map(|s| family.block_norms_vector(&s.u)).collect::<Result<_>>()?;
    Ok((q, u))
}

/// The six norms of `(q_ε − q, u_ε − u)` at `s = d/2 − α`, hybrid norms taken at `eps`.
pub fn difference_norms(
    traj_k: &Trajectory,
    traj_r: &Trajectory,
    eps: f64,
    alpha: f64,
    family: &DyadicFamily,
) -> Result<SixNorms> {
    if traj_k.states.len() != traj_r.states.len() {
        return Err(KwgError::GridMismatch(format!(
            "trajectories hold {} and {} snapshots",
            traj_k.states.len(),
            traj_r.states.len()
        )));
    }
    let mut qd = Vec::with_capacity(traj_k.states.len());
    let mut ud = Vec::with_capacity(traj_k.states.len());
    for (a, b) in traj_k.states.iter().zip(&traj_r.states) {
        a.grid().same_as(b.grid())?;
        if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
            return Err(KwgError::GridMismatch(format!("snapshot times {} and {} differ", a.t, b.t)));
        }
        qd.push(family.block_norms(&b.q.sub(&a.q))?);
        let du: Vec<_> = b.u.iter().zip(&a.u).map(|(x, y)| x.sub(y)).collect();
        ud.push(family.block_norms_vector(&du)?);
    }
    let s = 0.5 * family.grid().dim() as f64 - alpha;
    SixNorms::from_series(&qd, &ud, traj_k.output_dt, s, eps)
}

/// Six norms of one trajectory at `s = d/2 − α`.
pub fn solution_norms(traj: &Trajectory, eps: f64, alpha: f64, family: &DyadicFamily) -> Result<SixNorms> {
    let (q, u) = series(traj, family)?;
    let s = 0.5 * family.grid().dim() as f64 - alpha;
    SixNorms::from_series(&q, &u, traj.output_dt, s, eps)
}

/// Least-squares fit of `ln S` against `ln ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// 2-norm condition number of the design matrix `[1, ln ε]`.
    pub condition: f64,
}

impl RateFit {
    /// Empirical constant `C = e^{intercept}`.
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }
}

pub fn fit_rate(eps: &[f64], values: &[f64]) -> Result<RateFit> {
    if eps.len() != values.len() || eps.len() < 2 {
        return Err(KwgError::InvalidParameter("rate fit needs >= 2 matched samples".into()));
    }
    if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(KwgError::InvalidParameter("rate fit needs positive finite values".into()));
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = linear_fit(&x, &y);
    let residuals = x.iter().zip(&y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    // Eigenvalues of [[n, sx], [sx, sxx]].
    let tr = n + sxx;
    let det = n * sxx - sx * sx;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let (lmax, lmin) = (0.5 * tr + disc, 0.5 * tr - disc);
    Ok(RateFit { slope, intercept, residuals, condition: (lmax / lmin).sqrt() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub norms: SixNorms,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub rows: Vec<SweepRow>,
    pub fit: RateFit,
    pub smallness: SmallnessReport,
    pub alpha: f64,
}

impl RateReport {
    pub fn sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.norms.sum()).collect()
    }

    /// True when `S(ε)` never grows by more than `tol` (relative) as `ε` decreases.
    pub fn monotone(&self, tol: f64) -> bool {
        self.sums().windows(2).all(|w| w[1] <= w[0] * (1.0 + tol))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,u_inf_low,q_inf_low,q_inf,u_l1,q_l1_hybrid1,q_l1_hybrid2,sum\n");
        for r in &self.rows {
            let a = r.norms.as_array();
            out.push_str(&fmt(r.eps));
            for v in a {
                out.push(',');
                out.push_str(&fmt(v));
            }
            out.push(',');
            out.push_str(&fmt(r.norms.sum()));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let res: Vec<String> = self.fit.residuals.iter().map(|v| fmt(*v)).collect();
        format!(
            "alpha = {}\nslope = {}\nintercept = {}\nconstant = {}\ncondition = {}\nresiduals = [{}]\nsmallness = {}\nmonotone = {}\n",
            fmt(self.alpha),
            fmt(self.fit.slope),
            fmt(self.fit.intercept),
            fmt(self.fit.constant()),
            fmt(self.fit.condition),
            res.join(", "),
            fmt(self.smallness.total()),
            self.monotone(0.05)
        )
    }
}

fn run_member(plan: &SweepPlan, ctx: &SpectralContext, eps: f64) -> Result<Trajectory> {
    let params = plan.params.with_eps(eps)?;
    simulate(&plan.initial, &params, ctx, plan.t_final, plan.dt, &plan.options)
        .map_err(|e| KwgError::SweepMember { eps, source: Box::new(e) })
}

/// Runs the local system and every sweep member, then fits `S(ε) ≈ C ε^slope`.
pub fn run_sweep(plan: &SweepPlan, ctx: &SpectralContext) -> Result<RateReport> {
    plan.validate()?;
    let smallness = SmallnessReport::of(&plan.initial, &ctx.family)?;
    if let Some(eta) = plan.eta {
        if smallness.total() > eta {
            return Err(KwgError::InvalidParameter(format!(
                "initial data norm {} exceeds smallness bound {eta}",
                smallness.total()
            )));
        }
    }
    let mut all_eps = vec![0.0];
    all_eps.extend_from_slice(&plan.eps);
    #[cfg(feature = "parallel")]
    let runs: Vec<Result<Trajectory>> = {
        use rayon::prelude::*;
        all_eps.par_iter().map(|&e| run_member(plan, ctx, e)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Result<Trajectory>> = all_eps.iter().map(|&e| run_member(plan, ctx, e)).collect();
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let local = runs.remove(0);
    let rows = plan
        .eps
        .iter()
        .zip(&runs)
        .map(|(&eps, tr)| Ok(SweepRow { eps, norms: difference_norms(&local, tr, eps, plan.alpha, &ctx.family)? }))
        .collect::<Result<Vec<_>>>()?;
    let sums: Vec<f64> = rows.iter().map(|r| r.norms.sum()).collect();
    let fit = fit_rate(&plan.eps, &sums)?;
    Ok(RateReport { rows, fit, smallness, alpha: plan.alpha })
}
