//! Subcommand bodies. Each builds its artifacts in memory; nothing here touches the filesystem
//! except reading a snapshot named as initial data.

use std::fmt::Write as _;

use kwg_core::convergence::{run_sweep, SweepPlan};
use kwg_core::diagnostics::{fmt, DecayConstants};
use kwg_core::lpaley::{
    besov_norm_vector, hybrid_norm_vector, BlockNorms, HybridNormSpec, SpectralField,
    SummabilityIndex, TorusGrid, ANNULUS_OUTER,
};
use kwg_core::kernels::threshold_gamma;
use kwg_core::random;
use kwg_core::solver::{
    build_linear_symbol, read_snapshot, simulate, simulate_linear, write_snapshot, FluidState, GaussianBump,
    LinearForcing, SimulationOptions, SmallnessReport, SpectralContext,
};
use kwg_core::thermo::{euler_characteristics, maxwell_residual, phase_diagram, spinodal_points, PressureLaw, Regime};
use kwg_core::{selfcheck, KwgError};

use crate::config::{Command, InitialKind, RunConfig, SystemKind};
use crate::output::Artifacts;

/// Artifacts of a finished run; `failure` marks a property failure (exit 4).
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Artifacts,
    pub report: String,
    pub failure: Option<String>,
}

pub fn execute(cfg: &RunConfig) -> kwg_core::Result<Outcome> {
    match cfg.command {
        Command::Simulate => simulate_cmd(cfg),
        Command::Sweep => sweep_cmd(cfg),
        Command::Besov => besov_cmd(cfg),
        Command::Thermo => thermo_cmd(cfg),
        Command::LinearSpectrum => spectrum_cmd(cfg),
        Command::Check => check_cmd(cfg),
    }
}

fn context(cfg: &RunConfig) -> kwg_core::Result<SpectralContext> {
    SpectralContext::new(TorusGrid::new(cfg.grid.dim, cfg.grid.n, cfg.grid.length)?)
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn velocity_sup(state: &FluidState, ctx: &SpectralContext) -> f64 {
    state.u.iter().map(|c| sup(&ctx.transform.inverse(c))).fold(0.0, f64::max)
}

/// Rescales `f` so its physical-space maximum modulus equals `amplitude`.
fn with_peak(f: SpectralField, amplitude: f64, ctx: &SpectralContext) -> SpectralField {
    let m = sup(&ctx.transform.inverse(&f));
    if m > 0.0 {
        f.scaled(amplitude / m)
    } else {
        f
    }
}

pub fn initial_state(cfg: &RunConfig, ctx: &SpectralContext) -> kwg_core::Result<FluidState> {
    let i = &cfg.initial;
    match i.kind {
        InitialKind::Gaussian => {
            let bump = GaussianBump { q_amplitude: i.q_amplitude, u_amplitude: i.u_amplitude, width: i.width, center: i.center };
            bump.state(&ctx.transform)
        }
        InitialKind::Random => {
            let mut rng = random::rng(cfg.seed);
            let q = with_peak(random::band_limited(ctx.grid, i.xi_max, &mut rng), i.amplitude, ctx);
            let u = (0..ctx.grid.dim())
                .map(|_| with_peak(random::band_limited(ctx.grid, i.xi_max, &mut rng), i.amplitude, ctx))
                .collect();
            FluidState::new(0.0, q, u)
        }
        InitialKind::Snapshot => {
            let path = i.path.as_deref().expect("validated: snapshot kind has a path");
            let file = std::fs::File::open(path).map_err(|e| KwgError::Io(format!("{path}: {e}")))?;
            let snap = read_snapshot(std::io::BufReader::new(file))?;
            ctx.grid.same_as(snap.state.grid())?;
            let mut s = snap.state;
            s.t = 0.0;
            Ok(s)
        }
    }
}

/// Step size and stride: the step count is a multiple of the snapshot count and lands on `T`.
pub fn schedule(cfg: &RunConfig, initial: &FluidState, ctx: &SpectralContext) -> (f64, usize) {
    let r = &cfg.run;
    let dt = r.dt.unwrap_or_else(|| (0.25 * ctx.grid.spacing() / velocity_sup(initial, ctx).max(1.0)).min(1e-2));
    let snaps = r.snapshots;
    let steps = ((r.t_final / dt - 1e-9).ceil().max(1.0) as usize).div_ceil(snaps) * snaps;
    (r.t_final / steps as f64, steps / snaps)
}

fn options(cfg: &RunConfig, output_every: usize, record_energy: bool) -> SimulationOptions {
    SimulationOptions {
        output_every,
        friedrichs: cfg.run.friedrichs,
        vacuum_floor: cfg.run.vacuum_floor,
        record_energy,
        check_cfl: true,
    }
}

fn simulate_cmd(cfg: &RunConfig) -> kwg_core::Result<Outcome> {
    let ctx = context(cfg)?;
    let params = cfg.phys_params()?;
    let s0 = initial_state(cfg, &ctx)?;
    let (dt, every) = schedule(cfg, &s0, &ctx);
    let opts = options(cfg, every, true);
    let traj = match cfg.run.system {
        SystemKind::Nonlinear => simulate(&s0, &params, &ctx, cfg.run.t_final, dt, &opts)?,
        SystemKind::Linear => {
            simulate_linear(&LinearForcing::zero(ctx.grid), &s0, &params, &ctx, cfg.run.t_final, dt, &opts)?
        }
    };
    let mut art = Artifacts::default();
    let mut series = String::from("t,q_l2,u_l2,q_min,q_max,u_sup,smallness\n");
    for (k, st) in traj.states.iter().enumerate() {
        if cfg.run.write_snapshots {
            let mut buf = Vec::new();
            write_snapshot(&mut buf, st, &params)?;
            art.add(format!("snapshots/state_{k:04}.kwg"), buf);
        }
        let qv = ctx.transform.inverse(&st.q);
        let (qmin, qmax) = qv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let u_l2 = st.u.iter().map(|c| c.l2_norm_sqr()).sum::<f64>().sqrt();
        let small = SmallnessReport::of(st, &ctx.family)?.total();
        let row = [st.t, st.q.l2_norm(), u_l2, qmin, qmax, velocity_sup(st, &ctx), small];
        let row: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        series.push_str(&row.join(","));
        series.push('\n');
    }
    art.add_text("series.csv", series);
    let ledger = traj.ledger.as_ref().expect("energy recorded");
    art.add_text("energy.csv", ledger.to_csv());
    let mut summary = ledger.summary();
    let _ = writeln!(summary, "equivalence_violations = {}", ledger.equivalence_violations(&params));
    let _ = writeln!(summary, "dt = {}\nsteps = {}", fmt(traj.dt), every * cfg.run.snapshots);
    art.add_text("energy_summary.txt", summary.clone());
    let report = format!(
        "simulate: {} snapshots to t = {}, smallness {}\n",
        traj.states.len(),
        fmt(traj.final_state().t),
        fmt(traj.smallness.total())
    );
    Ok(Outcome { artifacts: art, report, failure: None })
}

fn sweep_cmd(cfg: &RunConfig) -> kwg_core::Result<Outcome> {
    let ctx = context(cfg)?;
    let params = cfg.phys_params()?;
    let s0 = initial_state(cfg, &ctx)?;
    let (dt, every) = schedule(cfg, &s0, &ctx);
    let plan = SweepPlan {
        eps: cfg.sweep.eps.clone(),
        initial: s0,
        params,
        t_final: cfg.run.t_final,
        dt,
        options: options(cfg, every, false),
        alpha: cfg.sweep.alpha,
        eta: cfg.sweep.eta,
    };
    let rep = run_sweep(&plan, &ctx)?;
    let mut art = Artifacts::default();
    art.add_text("rate.csv", rep.to_csv());
    let mut summary = rep.summary();
    let _ = writeln!(summary, "slope_floor = {}", fmt(cfg.sweep.slope_floor));
    art.add_text("rate_summary.txt", summary);
    let failure = (!(rep.fit.slope >= cfg.sweep.slope_floor))
        .then(|| format!("fitted slope {} below floor {}", fmt(rep.fit.slope), fmt(cfg.sweep.slope_floor)));
    let report = format!("sweep: slope {} constant {}\n", fmt(rep.fit.slope), fmt(rep.fit.constant()));
    Ok(Outcome { artifacts: art, report, failure })
}

fn besov_cmd(cfg: &RunConfig) -> kwg_core::Result<Outcome> {
    let ctx = context(cfg)?;
    let s0 = initial_state(cfg, &ctx)?;
    let fam = &ctx.family;
    let d = ctx.grid.dim() as f64;
    let ss = if cfg.besov.s.is_empty() { vec![0.5 * d - 1.0, 0.5 * d] } else { cfg.besov.s.clone() };
    let eps = cfg.params.eps;
    let gamma = threshold_gamma();
    let fields: [(&str, Vec<SpectralField>); 2] = [("q", vec![s0.q.clone()]), ("u", s0.u.clone())];
    let mut norms = String::from("field,norm,s,t,alpha,eps,value\n");
    let mut row = |field: &str, norm: &str, s: f64, t: Option<f64>, alpha: Option<f64>, v: f64| {
        let opt = |x: Option<f64>| x.map(fmt).unwrap_or_default();
        let _ = writeln!(norms, "{field},{norm},{},{},{},{},{}", fmt(s), opt(t), opt(alpha), fmt(eps), fmt(v));
    };
    for (name, comps) in &fields {
        for &s in &ss {
            row(name, "besov_r1", s, None, None, besov_norm_vector(fam, comps, s, SummabilityIndex::One)?);
            row(name, "besov_rinf", s, None, None, besov_norm_vector(fam, comps, s, SummabilityIndex::Infinity)?);
            let blocks = fam.block_norms_vector(comps)?;
            for &a in &cfg.besov.alpha {
                row(name, "tilde_alpha_r1", s, None, Some(a), blocks.tilde_alpha(s, a, SummabilityIndex::One));
                row(name, "tilde_alpha_rinf", s, None, Some(a), blocks.tilde_alpha(s, a, SummabilityIndex::Infinity));
            }
            if eps > 0.0 {
                for t in [s - 1.0, s - 2.0] {
                    let spec = HybridNormSpec::new(s, t, eps, gamma, ANNULUS_OUTER)?;
                    row(name, "hybrid", s, Some(t), None, hybrid_norm_vector(fam, comps, &spec)?);
                }
            }
        }
    }
    let mut blocks_csv = String::from("field,l,xi_min,l2\n");
    for (name, comps) in &fields {
        let b: BlockNorms = fam.block_norms_vector(comps)?;
        for (l, v) in b.iter() {
            let xi = fam.block_min_xi(l).map(fmt).unwrap_or_default();
            let _ = writeln!(blocks_csv, "{name},{l},{xi},{}", fmt(v));
        }
    }
    let mut art = Artifacts::default();
    art.add_text("norms.csv", norms);
    art.add_text("blocks.csv", blocks_csv);
    let report = format!("besov: {} blocks, s in {:?}\n", fam.block_count(), ss);
    Ok(Outcome { artifacts: art, report, failure: None })
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Hyperbolic => "hyperbolic",
        Regime::Elliptic => "elliptic",
        Regime::Boundary => "boundary",
    }
}

fn thermo_cmd(cfg: &RunConfig) -> kwg_core::Result<Outcome> {
    let law = cfg.thermo.vdw.law()?;
    let n = cfg.thermo.samples;
    let rhos: Vec<f64> = (1..=n).map(|i| law.b * i as f64 / (n + 1) as f64).collect();
    let mut iso = String::from("rho,pressure,dpressure,chemical_potential,free_energy\n");
    let mut chars = String::from("tau,regime,dp_tilde,d2p_tilde,lambda1,lambda2,gnl1,gnl2\n");
    for &rho in &rhos {
        let vals = [rho, law.pressure(rho), law.derivative(rho), law.chemical_potential(rho), law.free_energy(rho)];
        let vals: Vec<String> = vals.iter().map(|v| fmt(*v)).collect();
        let _ = writeln!(iso, "{}", vals.join(","));
        let tau = 1.0 / rho;
        let e = euler_characteristics(tau, &law)?;
        let pair = |p: Option<(f64, f64)>| p.map(|(a, b)| (fmt(a), fmt(b))).unwrap_or_default();
        let (l1, l2) = pair(e.eigenvalues);
        let (g1, g2) = pair(e.genuine_nonlinearity);
        let _ = writeln!(
            chars,
            "{},{},{},{},{l1},{l2},{g1},{g2}",
            fmt(tau),
            regime_name(e.regime),
            fmt(e.dp_tilde),
            fmt(e.d2p_tilde)
        );
    }
    let mut phase = format!(
        "a = {}\nb = {}\nr = {}\ntstar = {}\nsubcritical = {}\n",
        fmt(law.a),
        fmt(law.b),
        fmt(law.r),
        fmt(law.tstar),
        law.is_subcritical()
    );
    if law.is_subcritical() {
        let d = phase_diagram(&law)?;
        let (v1, v2) = d.elliptic_volume_interval();
        let res = maxwell_residual(&law, d.beta1, d.beta2);
        let _ = write!(
            phase,
            "alpha1 = {}\nalpha2 = {}\nbeta1 = {}\nbeta2 = {}\nelliptic_volume = [{}, {}]\nmaxwell_residual = [{}, {}]\n",
            fmt(d.alpha1),
            fmt(d.alpha2),
            fmt(d.beta1),
            fmt(d.beta2),
            fmt(v1),
            fmt(v2),
            fmt(res[0]),
            fmt(res[1])
        );
    } else if let Some((a1, a2)) = spinodal_points(&law) {
        let _ = write!(phase, "alpha1 = {}\nalpha2 = {}\n", fmt(a1), fmt(a2));
    }
    let mut art = Artifacts::default();
    art.add_text("isotherm.csv", iso);
    art.add_text("characteristics.csv", chars);
    art.add_text("phase.txt", phase.clone());
    Ok(Outcome { artifacts: art, report: phase, failure: None })
}

fn spectrum_cmd(cfg: &RunConfig) -> kwg_core::Result<Outcome> {
    let ctx = context(cfg)?;
    let params = cfg.phys_params()?;
    let local = params.with_eps(0.0)?;
    let dim = ctx.grid.dim();
    let dc = DecayConstants::new(&params)?;
    let mut csv = String::from(
        "xi,block_regime,re_plus,im_plus,re_minus,im_minus,local_re_plus,local_im_plus,local_re_minus,local_im_minus,transverse\n",
    );
    let k = ctx.grid.fundamental();
    for j in 1..=(ctx.grid.n() / 2) as i64 {
        let xi = k * j as f64;
        let a = build_linear_symbol([xi, 0.0], dim, &params).eigenvalues;
        let b = build_linear_symbol([xi, 0.0], dim, &local).eigenvalues;
        let block = xi.log2().floor() as i32;
        let regime = if dc.is_low(block) { "low" } else { "high" };
        let _ = writeln!(
            csv,
            "{},{regime},{},{},{},{},{},{},{},{},{}",
            fmt(xi),
            fmt(a[0].re),
            fmt(a[0].im),
            fmt(a[1].re),
            fmt(a[1].im),
            fmt(b[0].re),
            fmt(b[0].im),
            fmt(b[1].re),
            fmt(b[1].im),
            fmt(-params.mu * xi * xi)
        );
    }
    let mut art = Artifacts::default();
    art.add_text("spectrum.csv", csv);
    let report = format!(
        "linear-spectrum: alpha = {}, m = {}, m_prime = {}, l_eps = {}\n",
        fmt(dc.alpha),
        fmt(dc.m),
        fmt(dc.m_prime),
        dc.l_eps.map_or("none".to_string(), |l| l.to_string())
    );
    Ok(Outcome { artifacts: art, report, failure: None })
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn check_cmd(cfg: &RunConfig) -> kwg_core::Result<Outcome> {
    let results = selfcheck::run_all(cfg.seed);
    let mut csv = String::from("module,property,passed,detail\n");
    let mut report = String::new();
    let mut failed = 0;
    for r in &results {
        let _ = writeln!(csv, "{},{},{},{}", r.module, csv_quote(r.name), r.passed, csv_quote(&r.detail));
        let _ = writeln!(report, "{} {}::{} ({})", if r.passed { "PASS" } else { "FAIL" }, r.module, r.name, r.detail);
        failed += usize::from(!r.passed);
    }
    let mut art = Artifacts::default();
    art.add_text("check.csv", csv);
    let failure = (failed > 0).then(|| format!("{failed} of {} properties failed", results.len()));
    Ok(Outcome { artifacts: art, report, failure })
}

