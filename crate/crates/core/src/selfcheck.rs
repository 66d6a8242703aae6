//! Fast invariant suites across modules, run by the `check` command.

use crate::diagnostics::{check_equivalence, energy_block};
use crate::kernels::{
    check_admissibility, consistency_argmax, frequency_threshold, relaxation_defect, threshold_gamma, KernelSymbol,
};
use crate::lpaley::{bony_residual, DyadicFamily, SummabilityIndex, TorusGrid, Transform};
use crate::solver::{linear_propagate, simulate, FluidState, GaussianBump, PhysParams, SimulationOptions, SpectralContext};
use crate::thermo::{coefficient_g, coefficient_i, coefficient_k, phase_diagram, PowerLaw, PressureLaw, VdWParams};
use crate::{random, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(module: &'static str, name: &'static str, passed: bool, detail: String) -> PropertyResult {
    PropertyResult { module, name, passed, detail }
}

fn thermo_suite() -> Result<Vec<PropertyResult>> {
    let p = VdWParams::new(1.0, 2.0, 1.0, 1.0)?;
    let mut worst = 0.0f64;
    for i in 1..1000 {
        let rho = p.b * i as f64 / 1000.0;
        let lhs = p.pressure(rho);
        let rhs = rho * p.chemical_potential(rho) - p.free_energy(rho);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    let d = phase_diagram(&p)?;
    let mut sign_errors = 0;
    for i in 1..1000 {
        let rho = p.b * i as f64 / 1000.0;
        let inside = rho > d.alpha1 && rho < d.alpha2;
        if (p.derivative(rho) < 0.0) != inside {
            sign_errors += 1;
        }
    }
    let law = PowerLaw::new(1.0, 2.0)?;
    let zeros = coefficient_k(0.0, &law)? == 0.0 && coefficient_i(0.0)? == 0.0 && coefficient_g(0.0, &law)? == 0.0;
    Ok(vec![
        result("thermo", "pressure identity P = rho W' - W", worst < 1e-12, format!("max rel err {worst:.3e}")),
        result("thermo", "P' < 0 exactly on spinodal interval", sign_errors == 0, format!("{sign_errors} mismatches")),
        result(
            "thermo",
            "Maxwell ordering beta1 < alpha1 < alpha2 < beta2",
            d.beta1 < d.alpha1 && d.alpha2 < d.beta2,
            format!("{:.6} {:.6} {:.6} {:.6}", d.beta1, d.alpha1, d.alpha2, d.beta2),
        ),
        result("thermo", "K, I, G vanish at q = 0", zeros, String::new()),
    ])
}

fn kernels_suite() -> Result<Vec<PropertyResult>> {
    let gamma = threshold_gamma();
    let c0 = crate::lpaley::ANNULUS_OUTER;
    let mut bad = 0;
    for k in 0..200 {
        let eps = 10f64.powf(-3.0 + 3.0 * k as f64 / 200.0);
        let l = frequency_threshold(eps, gamma, c0)?;
        let lo = eps * 2f64.powi(l) * c0;
        if !(lo <= gamma.sqrt() && gamma.sqrt() < 2.0 * lo) {
            bad += 1;
        }
    }
    let mut dominated = true;
    for beta in [1.25, 1.5, 1.75] {
        let (_, c) = consistency_argmax(beta)?;
        dominated &= crate::numerics::log_space(1e-6, 1e4, 10_000)
            .iter()
            .all(|&x| relaxation_defect(x) <= c * x.powf(beta) * (1.0 + 1e-12));
    }
    Ok(vec![
        result("kernels", "gamma solves (1-e^-z)/z = 1/2", ((1.0 - (-gamma).exp()) / gamma - 0.5).abs() < 1e-12, format!("{gamma:.15}")),
        result("kernels", "l_eps two-sided characterization", bad == 0, format!("{bad} failures")),
        result("kernels", "C_beta dominates sampled ratio", dominated, String::new()),
        result("kernels", "gaussian symbol admissible", check_admissibility(&KernelSymbol::gaussian(0.1)).passed(), String::new()),
    ])
}

fn lpaley_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let grid = TorusGrid::new(2, 64, 20.0 * std::f64::consts::PI)?;
    let fam = DyadicFamily::new(grid)?;
    let tr = Transform::new(grid);
    let pu = (1..grid.len())
        .filter(|&i| !grid.is_nyquist(i))
        .map(|i| (fam.partition_sum(i) - 1.0).abs())
        .fold(0.0, f64::max);
    let mut rng = random::rng(seed);
    let mut interp_bad = 0;
    let mut bony_worst = 0.0f64;
    for _ in 0..20 {
        let u = random::multiscale(&fam, &mut rng)?;
        let b = fam.block_norms(&u)?;
        for alpha in [0.5, 1.0, 2.0] {
            let lhs = b.besov(1.0, SummabilityIndex::One).powi(2);
            let rhs = b.tilde_alpha(1.0, alpha, SummabilityIndex::Infinity) * b.tilde_alpha(1.0, alpha, SummabilityIndex::One);
            if lhs > rhs * (1.0 + 1e-12) {
                interp_bad += 1;
            }
        }
        let v = random::band_limited(grid, 2.0, &mut rng);
        let w = random::band_limited(grid, 2.0, &mut rng);
        bony_worst = bony_worst.max(bony_residual(&fam, &tr, &v, &w)?);
    }
    Ok(vec![
        result("lpaley", "partition of unity", pu < 1e-12, format!("max defect {pu:.3e}")),
        result("lpaley", "interpolation with constant 1", interp_bad == 0, format!("{interp_bad} violations")),
        result("lpaley", "Bony identity", bony_worst < 1e-10, format!("max residual {bony_worst:.3e}")),
    ])
}

fn solver_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let grid = TorusGrid::new(1, 64, 20.0 * std::f64::consts::PI)?;
    let ctx = SpectralContext::new(grid)?;
    let params = PhysParams::new(1.0, 0.0, 1.0, 1.0, 0.1)?;
    let mut rng = random::rng(seed);
    let s0 = FluidState::new(0.0, random::band_limited(grid, 3.0, &mut rng), vec![random::band_limited(grid, 3.0, &mut rng)])?;
    let full = linear_propagate(&s0, 0.2, &params);
    let half = linear_propagate(&linear_propagate(&s0, 0.1, &params), 0.1, &params);
    let semigroup = full.l2_distance(&half) / full.l2_norm();
    let bump = GaussianBump::new(0.05, [0.02, 0.0], 3.0).state(&ctx.transform)?;
    let traj = simulate(&bump, &params, &ctx, 0.5, 0.01, &SimulationOptions::default())?;
    let mass = traj.states.iter().map(|s| (s.q.mean() - bump.q.mean()).abs()).fold(0.0, f64::max);
    let herm = traj.states.iter().map(|s| s.hermitian_defect()).fold(0.0, f64::max);
    Ok(vec![
        result("solver", "propagator semigroup", semigroup < 1e-12, format!("rel gap {semigroup:.3e}")),
        result("solver", "mass conservation", mass < 1e-13, format!("max drift {mass:.3e}")),
        result("solver", "Hermitian symmetry preserved", herm < 1e-14, format!("max defect {herm:.3e}")),
    ])
}

fn diagnostics_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let grid = TorusGrid::new(1, 128, 20.0 * std::f64::consts::PI)?;
    let fam = DyadicFamily::new(grid)?;
    let params = PhysParams::new(1.0, 0.0, 1.0, 1.0, 0.1)?;
    let mut rng = random::rng(seed);
    let mut violations = 0;
    let mut negative_forms = 0;
    for _ in 0..100 {
        let s = FluidState::new(0.0, random::band_limited(grid, 20.0, &mut rng), vec![random::band_limited(grid, 20.0, &mut rng)])?;
        for l in fam.blocks() {
            let c = energy_block(&s, l, &params, &fam)?;
            if check_equivalence(&c, &params).is_err() {
                violations += 1;
            }
            if c.nonlocal < 0.0 {
                negative_forms += 1;
            }
        }
    }
    Ok(vec![
        result("diagnostics", "h_l equivalence bounds", violations == 0, format!("{violations} violations")),
        result("diagnostics", "nonlocal form nonnegative", negative_forms == 0, format!("{negative_forms} negative")),
    ])
}

/// Runs every suite; errors inside a suite surface as a failed property.
pub fn run_all(seed: u64) -> Vec<PropertyResult> {
    let suites: [(&'static str, Box<dyn Fn() -> Result<Vec<PropertyResult>>>); 5] = [
        ("thermo", Box::new(thermo_suite)),
        ("kernels", Box::new(kernels_suite)),
        ("lpaley", Box::new(move || lpaley_suite(seed))),
        ("solver", Box::new(move || solver_suite(seed))),
        ("diagnostics", Box::new(move || diagnostics_suite(seed))),
    ];
    suites
        .iter()
        .flat_map(|(module, f)| match f() {
            Ok(v) => v,
            Err(e) => vec![result(module, "suite completed", false, e.to_string())],
        })
        .collect()
}
