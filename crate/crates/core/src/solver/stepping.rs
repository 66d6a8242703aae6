use crate::diagnostics::EnergyLedger;
use crate::lpaley::{SpectralField, Transform};
use crate::solver::{
    explicit_linear_rhs, nonlinear_rhs, FluidState, LinearPropagator, NonlinearTerms, PhysParams,
    SmallnessReport, SpectralContext,
};
use crate::{Complex64, KwgError, Result};

/// Lower bound on `1 + q` below which a run aborts.
pub const DEFAULT_VACUUM_FLOOR: f64 = 0.05;
const BLOW_UP_FACTOR: f64 = 1e3;

/// Frozen convection `v` and forcings `F`, `G` of the linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForcing {
    pub v: Vec<SpectralField>,
    pub f: SpectralField,
    pub g: Vec<SpectralField>,
}

impl LinearForcing {
    pub fn zero(grid: crate::lpaley::TorusGrid) -> Self {
        let z = SpectralField::zeros(grid);
        Self { v: vec![z.clone(); grid.dim()], f: z.clone(), g: vec![z; grid.dim()] }
    }

    /// Mean of `v`, transported exactly by a phase factor.
    pub fn drift(&self) -> [f64; 2] {
        let mut d = [0.0; 2];
        for (a, c) in self.v.iter().enumerate() {
            d[a] = c.mean();
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    /// Snapshot stride in steps; the final state is always kept.
    pub output_every: usize,
    /// Friedrichs level `n` applied after every step.
    pub friedrichs: Option<f64>,
    pub vacuum_floor: f64,
    pub record_energy: bool,
    pub check_cfl: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { output_every: 1, friedrichs: None, vacuum_floor: DEFAULT_VACUUM_FLOOR, record_energy: false, check_cfl: true }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: PhysParams,
    pub dt: f64,
    /// Spacing of stored snapshots.
    pub output_dt: f64,
    pub states: Vec<FluidState>,
    pub smallness: SmallnessReport,
    pub ledger: Option<EnergyLedger>,
    pub forcing: Option<LinearForcing>,
}

impl Trajectory {
    pub fn final_state(&self) -> &FluidState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// `J_n`: keeps only `1/n ≤ |ξ| ≤ n`.
pub fn friedrichs_project(field: &SpectralField, n: f64) -> SpectralField {
    let g = *field.grid();
    let lo = 1.0 / n;
    field.multiplied(|i| {
        let r = g.xi_norm(i);
        if r < lo || r > n {
            0.0
        } else {
            1.0
        }
    })
}

enum Explicit<'a> {
    Nonlinear,
    Linear(&'a LinearForcing),
}

/// One configured Strang step: half linear, Heun on the explicit terms, half linear.
pub struct Stepper<'a> {
    pub params: PhysParams,
    pub dt: f64,
    half: LinearPropagator,
    tr: &'a Transform,
    vacuum_floor: f64,
    friedrichs: Option<f64>,
    explicit: Explicit<'a>,
    drift: [f64; 2],
}

impl<'a> Stepper<'a> {
    pub fn nonlinear(params: &PhysParams, tr: &'a Transform, dt: f64, vacuum_floor: f64, friedrichs: Option<f64>) -> Self {
        Self {
            params: *params,
            dt,
            half: LinearPropagator::new(tr.grid(), params, 0.5 * dt),
            tr,
            vacuum_floor,
            friedrichs,
            explicit: Explicit::Nonlinear,
            drift: [0.0; 2],
        }
    }

    pub fn linear(params: &PhysParams, tr: &'a Transform, dt: f64, forcing: &'a LinearForcing) -> Self {
        Self {
            params: *params,
            dt,
            half: LinearPropagator::new(tr.grid(), params, 0.5 * dt),
            tr,
            vacuum_floor: f64::NEG_INFINITY,
            friedrichs: None,
            explicit: Explicit::Linear(forcing),
            drift: forcing.drift(),
        }
    }

    fn half_linear(&self, s: &mut FluidState) {
        self.half.apply(&mut s.q, &mut s.u);
        if self.drift != [0.0, 0.0] {
            let g = *s.grid();
            let h = 0.5 * self.dt;
            let phase = |i: usize| {
                let xi = g.xi(i);
                Complex64::from_polar(1.0, -(xi[0] * self.drift[0] + xi[1] * self.drift[1]) * h)
            };
            for f in std::iter::once(&mut s.q).chain(s.u.iter_mut()) {
                for (i, c) in f.coeffs_mut().iter_mut().enumerate() {
                    *c *= phase(i);
                }
            }
        }
    }

    fn rhs(&self, s: &FluidState) -> Result<NonlinearTerms> {
        match self.explicit {
            Explicit::Nonlinear => nonlinear_rhs(s, &self.params, self.tr, self.vacuum_floor),
            Explicit::Linear(f) => explicit_linear_rhs(s, f, self.tr),
        }
    }

    pub fn step(&self, state: &FluidState) -> Result<FluidState> {
        let mut s1 = state.clone();
        self.half_linear(&mut s1);
        let k1 = self.rhs(&s1)?;
        let mut pred = s1.clone();
        pred.axpy(self.dt, &k1.dq, &k1.du);
        pred.t = state.t + self.dt;
        let k2 = self.rhs(&pred)?;
        s1.axpy(0.5 * self.dt, &k1.dq, &k1.du);
        s1.axpy(0.5 * self.dt, &k2.dq, &k2.du);
        self.half_linear(&mut s1);
        s1.t = state.t + self.dt;
        s1.project_real();
        if let Some(n) = self.friedrichs {
            s1.q = friedrichs_project(&s1.q, n);
            for c in &mut s1.u {
                *c = friedrichs_project(c, n);
            }
        }
        Ok(s1)
    }
}

/// Exact linear evolution over `dt` with no convection or forcing.
pub fn linear_propagate(state: &FluidState, dt: f64, params: &PhysParams) -> FluidState {
    let mut s = state.clone();
    LinearPropagator::new(state.grid(), params, dt).apply(&mut s.q, &mut s.u);
    s.t += dt;
    s
}

/// One Strang step of the nonlinear system.
pub fn step_strang(state: &FluidState, dt: f64, params: &PhysParams, tr: &Transform) -> Result<FluidState> {
    check_cfl(state, dt, tr)?;
    Stepper::nonlinear(params, tr, dt, DEFAULT_VACUUM_FLOOR, None).step(state)
}

fn sup_norm(fields: &[SpectralField], tr: &Transform) -> f64 {
    fields
        .iter()
        .flat_map(|f| tr.inverse(f))
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `dt ≤ 0.5 Δx / max(1, ‖u‖_∞)`; returns `‖u‖_∞`.
fn check_cfl(state: &FluidState, dt: f64, tr: &Transform) -> Result<f64> {
    let sup = sup_norm(&state.u, tr);
    let bound = 0.5 * state.grid().spacing() / sup.max(1.0);
    if dt > bound {
        return Err(KwgError::Cfl { dt, bound, t: state.t });
    }
    Ok(sup)
}

/// Step count and step size landing exactly on `t_final`.
fn schedule(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_final > 0.0 && dt > 0.0) {
        return Err(KwgError::InvalidParameter(format!("need T > 0 and dt > 0, got ({t_final}, {dt})")));
    }
    let steps = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, t_final / steps as f64))
}

fn run(
    initial: &FluidState,
    params: &PhysParams,
    ctx: &SpectralContext,
    t_final: f64,
    dt: f64,
    opts: &SimulationOptions,
    forcing: Option<&LinearForcing>,
) -> Result<Trajectory> {
    ctx.grid.same_as(initial.grid())?;
    if opts.output_every == 0 {
        return Err(KwgError::InvalidParameter("output stride must be >= 1".into()));
    }
    let (steps, dt) = schedule(t_final, dt)?;
    if steps % opts.output_every != 0 {
        return Err(KwgError::InvalidParameter(format!(
            "output stride {} does not divide the {steps} steps",
            opts.output_every
        )));
    }
    let tr = &ctx.transform;
    let smallness = SmallnessReport::of(initial, &ctx.family)?;
    let scale = sup_norm(&initial.u, tr).max(sup_norm(std::slice::from_ref(&initial.q), tr));
    let stepper = match forcing {
        None => Stepper::nonlinear(params, tr, dt, opts.vacuum_floor, opts.friedrichs),
        Some(f) => Stepper::linear(params, tr, dt, f),
    };
    let mut state = initial.clone();
    let mut states = vec![state.clone()];
    for n in 1..=steps {
        let sup = if opts.check_cfl { check_cfl(&state, dt, tr)? } else { sup_norm(&state.u, tr) };
        if scale > 0.0 && sup > BLOW_UP_FACTOR * scale {
            return Err(KwgError::BlowUp { sup, limit: BLOW_UP_FACTOR * scale, t: state.t });
        }
        state = stepper.step(&state)?;
        if n == steps {
            state.t = t_final;
        }
        if n % opts.output_every == 0 {
            states.push(state.clone());
        }
    }
    let output_dt = dt * opts.output_every as f64;
    let ledger = if opts.record_energy {
        Some(EnergyLedger::record(&states, params, &ctx.family)?)
    } else {
        None
    };
    Ok(Trajectory { params: *params, dt, output_dt, states, smallness, ledger, forcing: forcing.cloned() })
}

/// Integrates the nonlinear system from `initial` to `t_final`.
pub fn simulate(
    initial: &FluidState,
    params: &PhysParams,
    ctx: &SpectralContext,
    t_final: f64,
    dt: f64,
    opts: &SimulationOptions,
) -> Result<Trajectory> {
    run(initial, params, ctx, t_final, dt, opts, None)
}

/// Integrates the linear system with frozen convection and forcing.
pub fn simulate_linear(
    forcing: &LinearForcing,
    initial: &FluidState,
    params: &PhysParams,
    ctx: &SpectralContext,
    t_final: f64,
    dt: f64,
    opts: &SimulationOptions,
) -> Result<Trajectory> {
    run(initial, params, ctx, t_final, dt, opts, Some(forcing))
}
