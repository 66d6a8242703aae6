use std::f64::consts::PI;

use approx::assert_relative_eq;
use kwg_core::convergence::*;
use kwg_core::diagnostics::apriori_monitor;
use kwg_core::lpaley::TorusGrid;
use kwg_core::solver::*;

fn ctx(dim: usize, n: usize) -> SpectralContext {
    SpectralContext::new(TorusGrid::new(dim, n, 20.0 * PI).unwrap()).unwrap()
}

fn params(eps: f64) -> PhysParams {
    PhysParams::new(1.0, 0.0, 1.0, 1.0, eps).unwrap()
}

fn bump_run(c: &SpectralContext, eps: f64, amp: f64) -> Trajectory {
    let s0 = GaussianBump::new(amp, [0.0, 0.0], 3.0).state(&c.transform).unwrap();
    simulate(&s0, &params(eps), c, 0.5, 0.05, &SimulationOptions::default()).unwrap()
}

#[test]
fn identical_twins_have_zero_difference() {
    let c = ctx(1, 64);
    let t = bump_run(&c, 0.1, 0.05);
    let n = difference_norms(&t, &t, 0.1, 0.9, &c.family).unwrap();
    assert_eq!(n.sum(), 0.0);
}

#[test]
fn difference_norms_are_homogeneous() {
    let c = ctx(1, 64);
    let base = bump_run(&c, 0.0, 0.05);
    let r = bump_run(&c, 0.1, 0.05);
    let mut scaled = r.clone();
    for (s, b) in scaled.states.iter_mut().zip(&base.states) {
        // b + 3(s − b)
        let mut q = s.q.sub(&b.q);
        q.scale(3.0);
        q.axpy(1.0, &b.q);
        s.q = q;
        for (u, ub) in s.u.iter_mut().zip(&b.u) {
            let mut d = u.sub(ub);
            d.scale(3.0);
            d.axpy(1.0, ub);
            *u = d;
        }
    }
    let n1 = difference_norms(&base, &r, 0.1, 0.9, &c.family).unwrap();
    let n3 = difference_norms(&base, &scaled, 0.1, 0.9, &c.family).unwrap();
    for (a, b) in n1.scaled(3.0).as_array().iter().zip(n3.as_array()) {
        assert_relative_eq!(*a, b, max_relative = 1e-10);
    }
}

#[test]
fn one_snapshot_sup_norm_is_instantaneous() {
    let c = ctx(1, 64);
    let mut a = bump_run(&c, 0.0, 0.05);
    let mut b = bump_run(&c, 0.2, 0.05);
    a.states.truncate(1);
    b.states.truncate(1);
    b.states[0].q.scale(1.5);
    let n = difference_norms(&a, &b, 0.2, 0.5, &c.family).unwrap();
    let d = b.states[0].q.sub(&a.states[0].q);
    let want = kwg_core::lpaley::besov_norm(&c.family, &d, 0.0, kwg_core::lpaley::SummabilityIndex::One).unwrap();
    assert_relative_eq!(n.q_inf, want, max_relative = 1e-14);
}

#[test]
fn mismatched_trajectories_are_rejected() {
    let c = ctx(1, 64);
    let a = bump_run(&c, 0.0, 0.05);
    let mut b = a.clone();
    b.states.pop();
    assert!(difference_norms(&a, &b, 0.1, 0.9, &c.family).is_err());
}

#[test]
fn plan_validation() {
    let c = ctx(2, 32);
    let s0 = FluidState::zeros(c.grid);
    let plan = |eps: Vec<f64>, alpha: f64| SweepPlan {
        eps,
        initial: s0.clone(),
        params: params(0.0),
        t_final: 1.0,
        dt: 0.1,
        options: SimulationOptions::default(),
        alpha,
        eta: None,
    };
    assert!(plan(vec![0.2, 0.1], 0.9).validate().is_ok());
    assert!(plan(vec![0.1, 0.2], 0.9).validate().is_err());
    assert!(plan(vec![0.2, 0.0], 0.9).validate().is_err());
    assert!(plan(vec![0.2, 0.1], 1.0).validate().is_err());
}

#[test]
fn rate_fit_recovers_power_law() {
    let eps = [0.2, 0.14, 0.1, 0.07, 0.05];
    let vals: Vec<f64> = eps.iter().map(|e: &f64| 3.0 * e.powf(1.7)).collect();
    let fit = fit_rate(&eps, &vals).unwrap();
    assert_relative_eq!(fit.slope, 1.7, max_relative = 1e-12);
    assert_relative_eq!(fit.constant(), 3.0, max_relative = 1e-12);
    assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    assert!(fit.condition > 1.0 && fit.condition.is_finite());
    assert!(fit_rate(&eps, &[1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
}

#[test]
fn local_member_matches_local_run_exactly() {
    let c = ctx(1, 64);
    let a = bump_run(&c, 0.0, 0.05);
    let b = bump_run(&c, 0.0, 0.05);
    assert_eq!(a.states, b.states);
}

#[test]
fn small_sweep_reports_a_rate() {
    let c = ctx(1, 128);
    let s0 = GaussianBump::new(0.02, [0.0, 0.0], 3.0).state(&c.transform).unwrap();
    let plan = SweepPlan {
        eps: vec![0.2, 0.1, 0.07, 0.05],
        initial: s0,
        params: params(0.0),
        t_final: 0.5,
        dt: 0.05,
        options: SimulationOptions::default(),
        alpha: 0.9,
        eta: Some(1.0),
    };
    let rep = run_sweep(&plan, &c).unwrap();
    assert!(rep.fit.slope > 0.9, "slope {}", rep.fit.slope);
    assert!(rep.monotone(0.05));
    assert_eq!(rep.to_csv().lines().count(), 5);
    let strict = SweepPlan { eta: Some(1e-6), ..plan };
    assert!(run_sweep(&strict, &c).is_err());
}

#[test]
fn apriori_constant_is_stable_across_eps() {
    let c = ctx(2, 32);
    let s0 = GaussianBump::new(1e-3, [5e-4, 0.0], 3.0).state(&c.transform).unwrap();
    let f = LinearForcing::zero(c.grid);
    let cs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&e| {
            let tr = simulate_linear(&f, &s0, &params(e), &c, 1.0, 0.05, &SimulationOptions::default()).unwrap();
            apriori_monitor(&tr, 1.0, &c.family).unwrap().constant
        })
        .collect();
    let mid = cs[1];
    assert!(cs.iter().all(|v| (v / mid - 1.0).abs() <= 0.2), "{cs:?}");
}
