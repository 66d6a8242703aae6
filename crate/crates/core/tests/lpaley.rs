use std::f64::consts::PI;

use approx::assert_relative_eq;
use kwg_core::lpaley::*;
use kwg_core::{random, Complex64};
use rand::Rng;

fn grid1(n: usize) -> TorusGrid {
    TorusGrid::new(1, n, 20.0 * PI).unwrap()
}

fn grid2(n: usize) -> TorusGrid {
    TorusGrid::new(2, n, 20.0 * PI).unwrap()
}

#[test]
fn chi_plateau_and_support() {
    assert_eq!(chi(0.5), 1.0);
    assert_eq!(chi(1.5), 0.0);
    let mut prev = 1.0;
    for i in 0..=2000 {
        let v = chi(i as f64 * 1e-3);
        assert!(v <= prev + 1e-15);
        prev = v;
    }
}

#[test]
fn phi_supported_in_annulus() {
    for i in 0..=10000 {
        let r = i as f64 * 4e-4;
        if r < ANNULUS_INNER || r > ANNULUS_OUTER {
            assert_eq!(phi(r), 0.0, "r = {r}");
        }
    }
}

#[test]
fn rejects_coarse_or_malformed_grids() {
    assert!(TorusGrid::new(3, 64, 1.0).is_err());
    assert!(TorusGrid::new(1, 8, 1.0).is_err());
    assert!(TorusGrid::new(1, 48, 1.0).is_err());
    assert!(TorusGrid::new(1, 64, 0.0).is_err());
}

#[test]
fn partition_of_unity_on_random_lattice_points() {
    let g = grid2(256);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(1);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let idx = rng.gen_range(1..g.len());
        if g.is_nyquist(idx) {
            continue;
        }
        worst = worst.max((fam.partition_sum(idx) - 1.0).abs());
        checked += 1;
    }
    assert!(worst < 1e-12, "worst {worst:e}");
}

#[test]
fn block_range_covers_lattice() {
    let g = grid1(1024);
    let fam = DyadicFamily::new(g).unwrap();
    let lo = 2f64.powi(fam.j_min()) * ANNULUS_INNER;
    let hi = 2f64.powi(fam.j_max()) * ANNULUS_OUTER;
    assert!(lo <= g.min_xi() && g.max_xi() <= hi);
}

#[test]
fn single_mode_blocks_are_local() {
    let g = grid1(512);
    let fam = DyadicFamily::new(g).unwrap();
    // |ξ| = 2π·80/L = 8 = 2^3.
    let u = SpectralField::single_mode(g, [80, 0], Complex64::new(1.0, 0.0));
    for j in fam.blocks() {
        let b = fam.block(&u, j).unwrap();
        if (j - 3).abs() >= 2 {
            assert_eq!(b.l2_norm(), 0.0, "block {j}");
        }
    }
}

#[test]
fn constant_field_has_no_blocks() {
    let g = grid1(64);
    let fam = DyadicFamily::new(g).unwrap();
    let c = SpectralField::single_mode(g, [0, 0], Complex64::new(2.5, 0.0));
    for j in fam.blocks() {
        assert_eq!(fam.block(&c, j).unwrap().l2_norm(), 0.0);
    }
}

#[test]
fn blocks_reconstruct_field() {
    let g = grid2(64);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(2);
    let mut u = random::band_limited(g, g.max_xi(), &mut rng);
    u.coeffs_mut()[0] = Complex64::new(0.7, 0.0);
    let mut sum = SpectralField::single_mode(g, [0, 0], Complex64::new(u.mean(), 0.0));
    for j in fam.blocks() {
        sum.axpy(1.0, &fam.block(&u, j).unwrap());
    }
    assert!(sum.max_abs_diff(&u) < 1e-12);
}

#[test]
fn single_mode_besov_oracle() {
    let g = grid1(512);
    let fam = DyadicFamily::new(g).unwrap();
    let k = 88;
    let u = SpectralField::single_mode(g, [k, 0], Complex64::new(0.5, 0.0));
    let xi = 2.0 * PI * k as f64 / g.length();
    // Direct Parseval: cos has ‖u‖² = L/2.
    let l2 = (0.5 * g.length()).sqrt();
    assert_relative_eq!(u.l2_norm(), l2, max_relative = 1e-13);
    let s = 0.75;
    let want: f64 = fam
        .blocks()
        .map(|j| 2f64.powf(j as f64 * s) * phi(xi * 2f64.powi(-j)).abs() * l2)
        .sum();
    let got = besov_norm(&fam, &u, s, SummabilityIndex::One).unwrap();
    assert_relative_eq!(got, want, max_relative = 1e-12);
    let nonzero = fam.blocks().filter(|&j| fam.block(&u, j).unwrap().l2_norm() > 0.0).count();
    assert!(nonzero <= 2);
    let js = xi.log2();
    assert!(got / (2f64.powf(js * s) * l2) > 0.5 && got / (2f64.powf(js * s) * l2) < 2.0);
}

#[test]
fn besov_zero_and_homogeneity() {
    let g = grid1(128);
    let fam = DyadicFamily::new(g).unwrap();
    let z = SpectralField::zeros(g);
    for r in [SummabilityIndex::One, SummabilityIndex::Infinity] {
        assert_eq!(besov_norm(&fam, &z, 0.3, r).unwrap(), 0.0);
    }
    let mut rng = random::rng(3);
    let u = random::band_limited(g, g.max_xi(), &mut rng);
    for r in [SummabilityIndex::One, SummabilityIndex::Infinity] {
        let a = besov_norm(&fam, &u, 0.5, r).unwrap();
        let b = besov_norm(&fam, &u.scaled(-3.0), 0.5, r).unwrap();
        assert_relative_eq!(b, 3.0 * a, max_relative = 1e-13);
    }
}

#[test]
fn embedding_chain() {
    let g = grid2(64);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(4);
    for _ in 0..50 {
        let u = random::multiscale(&fam, &mut rng).unwrap();
        let b1 = besov_norm(&fam, &u, 0.0, SummabilityIndex::One).unwrap();
        let binf = besov_norm(&fam, &u, 0.0, SummabilityIndex::Infinity).unwrap();
        let l2 = u.l2_norm();
        assert!(b1 >= l2 * (1.0 - 1e-12));
        // Each mode sits in at most two blocks with φ ≤ 1.
        assert!(l2 >= binf / 2f64.sqrt() * (1.0 - 1e-12));
    }
}

#[test]
fn bernstein_ratio_per_block() {
    let g = grid1(1024);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(5);
    for j in fam.blocks() {
        for _ in 0..5 {
            let u = random::block_localized(&fam, j, &mut rng).unwrap();
            if u.l2_norm() == 0.0 {
                continue;
            }
            let ratio = u.gradient_norm_sqr().sqrt() / u.l2_norm() / 2f64.powi(j);
            assert!((ANNULUS_INNER..=ANNULUS_OUTER).contains(&ratio), "block {j}: {ratio}");
        }
    }
}

#[test]
fn hybrid_norm_degenerate_regimes() {
    let g = grid1(256);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(6);
    let u = random::band_limited(g, g.max_xi(), &mut rng);
    let gamma = kwg_core::kernels::threshold_gamma();
    // ε large: every block is above the threshold.
    let spec = HybridNormSpec::new(1.0, 0.5, 40.0, gamma, ANNULUS_OUTER).unwrap();
    assert!(spec.l_eps < fam.j_min());
    let want = besov_norm(&fam, &u, 0.5, SummabilityIndex::One).unwrap() / (40.0 * 40.0);
    assert_relative_eq!(hybrid_norm(&fam, &u, &spec).unwrap(), want, max_relative = 1e-13);
    // Field below the threshold.
    let spec = HybridNormSpec::new(1.0, 0.5, 0.05, gamma, ANNULUS_OUTER).unwrap();
    let low = random::band_limited(g, 2f64.powi(spec.l_eps) * ANNULUS_INNER * 0.99, &mut rng);
    let want = besov_norm(&fam, &low, 1.0, SummabilityIndex::One).unwrap();
    assert_relative_eq!(hybrid_norm(&fam, &low, &spec).unwrap(), want, max_relative = 1e-13);
}

#[test]
fn hybrid_dominates_tilde_alpha() {
    let g = grid1(512);
    let fam = DyadicFamily::new(g).unwrap();
    let gamma = kwg_core::kernels::threshold_gamma();
    let mut rng = random::rng(7);
    for eps in [0.1, 0.05] {
        for _ in 0..100 {
            let u = random::multiscale(&fam, &mut rng).unwrap();
            let s = 0.3;
            let t1 = tilde_alpha_norm(&fam, &u, s, 1.0, SummabilityIndex::One).unwrap();
            let te = tilde_alpha_norm(&fam, &u, s, eps, SummabilityIndex::One).unwrap();
            let spec = HybridNormSpec::new(s + 1.0, s, eps, gamma, ANNULUS_OUTER).unwrap();
            let h = hybrid_norm(&fam, &u, &spec).unwrap();
            assert!(t1 <= te * (1.0 + 1e-12));
            assert!(te <= h * (1.0 + 1e-12), "eps {eps}: {te} > {h}");
        }
    }
}

#[test]
fn interpolation_with_unit_constant() {
    let g = grid2(32);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(8);
    for _ in 0..1000 {
        let u = random::multiscale(&fam, &mut rng).unwrap();
        let b = fam.block_norms(&u).unwrap();
        for s in [0.0, 1.0] {
            for a in [0.5, 1.0, 2.0] {
                let lhs = b.besov(s, SummabilityIndex::One).powi(2);
                let rhs = b.tilde_alpha(s, a, SummabilityIndex::Infinity) * b.tilde_alpha(s, a, SummabilityIndex::One);
                assert!(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn tilde_norm_constant_and_decaying_series() {
    let g = grid1(128);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(9);
    let u = random::band_limited(g, g.max_xi(), &mut rng);
    let dt = 0.1;
    let constant = vec![u.clone(); 11];
    let t1 = tilde_norm(&fam, &constant, dt, TimeExponent::One, 0.5).unwrap();
    let b = besov_norm(&fam, &u, 0.5, SummabilityIndex::One).unwrap();
    assert_relative_eq!(t1, 1.0 * b, max_relative = 1e-12);
    let decaying: Vec<_> = (0..11).map(|k| u.scaled((-0.3 * k as f64).exp())).collect();
    let tinf = tilde_norm(&fam, &decaying, dt, TimeExponent::Infinity, 0.5).unwrap();
    assert_relative_eq!(tinf, b, max_relative = 1e-12);
    assert!(tilde_norm(&fam, &decaying[..1], dt, TimeExponent::One, 0.5).is_err());
}

#[test]
fn tilde_norm_dominates_plain_time_norm() {
    let g = grid1(128);
    let fam = DyadicFamily::new(g).unwrap();
    let mut rng = random::rng(10);
    for _ in 0..20 {
        let a = random::multiscale(&fam, &mut rng).unwrap();
        let b = random::multiscale(&fam, &mut rng).unwrap();
        let dt = 0.05;
        let series: Vec<_> = (0..21)
            .map(|k| {
                let t = k as f64 * dt;
                let mut f = a.scaled((-2.0 * t).exp());
                f.axpy((-0.2 * t).exp() * t, &b);
                f
            })
            .collect();
        let tilde = tilde_norm(&fam, &series, dt, TimeExponent::One, 0.5).unwrap();
        let pointwise: Vec<f64> =
            series.iter().map(|f| besov_norm(&fam, f, 0.5, SummabilityIndex::One).unwrap()).collect();
        let plain = dt * (pointwise.iter().sum::<f64>() - 0.5 * (pointwise[0] + pointwise[20]));
        assert!(tilde >= plain * (1.0 - 1e-12));
    }
}

#[test]
fn bony_identity_on_random_pairs() {
    let g = grid2(32);
    let fam = DyadicFamily::new(g).unwrap();
    let tr = Transform::new(g);
    let mut rng = random::rng(11);
    for _ in 0..10 {
        let mut u = random::band_limited(g, g.max_xi(), &mut rng);
        let v = random::band_limited(g, g.max_xi(), &mut rng);
        u.coeffs_mut()[0] = Complex64::new(0.3, 0.0);
        assert!(bony_residual(&fam, &tr, &u, &v).unwrap() < 1e-10);
    }
}

#[test]
fn constant_paraproduct_and_disjoint_modes() {
    let g = grid1(256);
    let fam = DyadicFamily::new(g).unwrap();
    let tr = Transform::new(g);
    let mut rng = random::rng(12);
    let v = random::band_limited(g, g.max_xi(), &mut rng);
    let c = SpectralField::single_mode(g, [0, 0], Complex64::new(1.5, 0.0));
    let tcv = paraproduct(&fam, &tr, &c, &v).unwrap();
    assert!(tcv.max_abs_diff(&v.scaled(1.5)) < 1e-12);
    assert!(bony_residual(&fam, &tr, &c, &v).unwrap() < 1e-12);
    // ξ_u = 2π/L·1, ξ_v = 2π/L·100: the product sits in T_u v alone.
    let u = SpectralField::single_mode(g, [1, 0], Complex64::new(1.0, 0.0));
    let w = SpectralField::single_mode(g, [100, 0], Complex64::new(1.0, 0.0));
    let uv = tr.product(&u, &w).unwrap();
    let tuw = paraproduct(&fam, &tr, &u, &w).unwrap();
    assert!(tuw.max_abs_diff(&uv) < 1e-12);
    assert!(paraproduct(&fam, &tr, &w, &u).unwrap().l2_norm() < 1e-12);
    assert!(remainder(&fam, &tr, &u, &w).unwrap().l2_norm() < 1e-12);
}

#[test]
fn grid_mismatch_is_rejected() {
    let g = grid1(64);
    let h = TorusGrid::new(1, 64, 10.0).unwrap();
    let fam = DyadicFamily::new(g).unwrap();
    let tr = Transform::new(g);
    let u = SpectralField::zeros(g);
    let v = SpectralField::zeros(h);
    assert!(paraproduct(&fam, &tr, &u, &v).is_err());
}

#[test]
fn commutator_properties() {
    let g = grid2(32);
    let fam = DyadicFamily::new(g).unwrap();
    let tr = Transform::new(g);
    let mut rng = random::rng(13);
    let gfield = random::band_limited(g, g.max_xi(), &mut rng);
    let cv: Vec<_> = (0..2)
        .map(|a| SpectralField::single_mode(g, [0, 0], Complex64::new(0.4 + a as f64, 0.0)))
        .collect();
    let v: Vec<_> = (0..2).map(|_| random::band_limited(g, 1.0, &mut rng)).collect();
    let neg: Vec<_> = v.iter().map(|f| f.scaled(-1.0)).collect();
    for l in fam.blocks() {
        assert!(commutator(&fam, &tr, &cv, &gfield, l).unwrap().l2_norm() < 1e-12);
        let r = commutator(&fam, &tr, &v, &gfield, l).unwrap();
        let rn = commutator(&fam, &tr, &neg, &gfield, l).unwrap();
        let mut sum = r.clone();
        sum.axpy(1.0, &rn);
        assert!(sum.l2_norm() <= 1e-12 * r.l2_norm().max(1.0));
    }
}

#[test]
fn commutator_constant_is_bounded_across_blocks() {
    let g = grid2(64);
    let fam = DyadicFamily::new(g).unwrap();
    let tr = Transform::new(g);
    let mut rng = random::rng(14);
    let v: Vec<_> = (0..2).map(|_| random::band_limited(g, 1.0, &mut rng)).collect();
    let grads: Vec<_> = v.iter().flat_map(|c| (0..2).map(move |b| c.derivative(b))).collect();
    let gv = besov_norm_vector(&fam, &grads, 1.0, SummabilityIndex::One).unwrap();
    let s = 0.5;
    let mut worst = 0.0f64;
    for l in fam.blocks() {
        let gl = random::block_localized(&fam, l, &mut rng).unwrap();
        if gl.l2_norm() == 0.0 {
            continue;
        }
        let gb = besov_norm(&fam, &gl, s, SummabilityIndex::One).unwrap();
        let r = commutator(&fam, &tr, &v, &gl, l).unwrap().l2_norm();
        worst = worst.max(r * 2f64.powf(l as f64 * s) / (gv * gb));
    }
    assert!(worst.is_finite() && worst < 1e3, "constant {worst}");
}

#[test]
fn transform_round_trip_and_hermitian() {
    let g = grid2(32);
    let tr = Transform::new(g);
    let mut rng = random::rng(15);
    let u = random::band_limited(g, g.max_xi(), &mut rng);
    assert!(u.hermitian_defect() < 1e-15);
    let back = tr.forward(&tr.inverse(&u)).unwrap();
    assert!(back.max_abs_diff(&u) < 1e-13);
}
