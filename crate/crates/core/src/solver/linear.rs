use crate::kernels::capillarity_symbol;
use crate::lpaley::SpectralField;
use crate::solver::PhysParams;
use crate::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-wavevector generator of the linearised system acting on `(q̂, û)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSymbol {
    pub xi: [f64; 2],
    pub dim: usize,
    /// Row-major `(d+1)×(d+1)` matrix.
    pub matrix: Vec<Complex64>,
    pub eigenvalues: Vec<Complex64>,
    /// Longitudinal pair nearly coincident; the closed form falls back to series.
    pub near_defective: bool,
}

pub fn build_linear_symbol(xi: [f64; 2], dim: usize, params: &PhysParams) -> LinearSymbol {
    let n = dim + 1;
    let r2: f64 = xi[..dim].iter().map(|x| x * x).sum();
    let c = capillarity_symbol(r2, params.kappa, params.eps);
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..dim {
        m[1 + a] = -I * xi[a];
        m[(1 + a) * n] = -I * xi[a] * (params.p + c);
        for b in 0..dim {
            let delta = if a == b { params.mu * r2 } else { 0.0 };
            m[(1 + a) * n + 1 + b] = Complex64::new(-(delta + (params.lambda + params.mu) * xi[a] * xi[b]), 0.0);
        }
    }
    let (tau, det) = (-params.nu() * r2, r2 * (params.p + c));
    let disc = 0.25 * tau * tau - det;
    let omega = Complex64::new(disc, 0.0).sqrt();
    let mut eigenvalues = vec![0.5 * tau + omega, 0.5 * tau - omega];
    eigenvalues.extend(std::iter::repeat(Complex64::new(-params.mu * r2, 0.0)).take(dim - 1));
    let near_defective = r2 > 0.0 && disc.abs() <= 1e-8 * (0.25 * tau * tau).max(det);
    LinearSymbol { xi, dim, matrix: m, eigenvalues, near_defective }
}

/// `cosh(√z)` and `sinh(√z)/√z` for real `z` of either sign.
fn ch_shc(z: f64) -> (f64, f64) {
    if z.abs() < 1e-3 {
        let (mut c, mut s, mut tc, mut ts) = (0.0, 0.0, 1.0, 1.0);
        for k in 1..8 {
            c += tc;
            s += ts;
            let kf = k as f64;
            tc *= z / ((2.0 * kf - 1.0) * (2.0 * kf));
            ts *= z / ((2.0 * kf) * (2.0 * kf + 1.0));
        }
        (c, s)
    } else if z > 0.0 {
        let w = z.sqrt();
        (w.cosh(), w.sinh() / w)
    } else {
        let w = (-z).sqrt();
        (w.cos(), w.sin() / w)
    }
}

/// `exp(Bt)` for `B = [[0, −r], [r(p+c), −νr²]]`, the longitudinal block in
/// the variables `(q̂, i ξ̂·û)`.
pub fn longitudinal_exponential(r: f64, p_plus_c: f64, nu: f64, t: f64) -> [[f64; 2]; 2] {
    let tau = -nu * r * r;
    let det = r * r * p_plus_c;
    let b = [[0.0, -r], [r * p_plus_c, tau]];
    let disc = 0.25 * tau * tau - det;
    let z = disc * t * t;
    let (cf, sf) = if z > 1e-3 {
        // Separate the two real exponentials so large |τ|t cannot overflow.
        let omega = disc.sqrt();
        let slow = -det / (omega - 0.5 * tau);
        let fast = 0.5 * tau - omega;
        let (es, ef) = ((slow * t).exp(), (fast * t).exp());
        (0.5 * (es + ef), 0.5 * (es - ef) / omega)
    } else {
        let (c, s) = ch_shc(z);
        let decay = (0.5 * tau * t).exp();
        (decay * c, decay * s * t)
    };
    // exp(Bt) = cf·I + sf·(B − τ/2·I).
    [
        [cf + sf * (b[0][0] - 0.5 * tau), sf * b[0][1]],
        [sf * b[1][0], cf + sf * (b[1][1] - 0.5 * tau)],
    ]
}

/// Precomputed per-mode action of `exp(tL)` on a grid.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    pub dt: f64,
    modes: Vec<ModePropagator>,
}

#[derive(Debug, Clone, Copy)]
struct ModePropagator {
    e: [[f64; 2]; 2],
    transverse: f64,
    xi_hat: [f64; 2],
}

impl LinearPropagator {
    pub fn new(grid: &crate::lpaley::TorusGrid, params: &PhysParams, dt: f64) -> Self {
        let nu = params.nu();
        let modes = (0..grid.len())
            .map(|idx| {
                let xi = grid.xi(idx);
                let r = grid.xi_norm(idx);
                if r == 0.0 {
                    return ModePropagator { e: [[1.0, 0.0], [0.0, 1.0]], transverse: 1.0, xi_hat: [0.0, 0.0] };
                }
                let c = capillarity_symbol(r * r, params.kappa, params.eps);
                ModePropagator {
                    e: longitudinal_exponential(r, params.p + c, nu, dt),
                    transverse: (-params.mu * r * r * dt).exp(),
                    xi_hat: [xi[0] / r, xi[1] / r],
                }
            })
            .collect();
        Self { dt, modes }
    }

    /// Applies the propagator in place.
    pub fn apply(&self, q: &mut SpectralField, u: &mut [SpectralField]) {
        let dim = u.len();
        let qc = q.coeffs_mut();
        for (idx, m) in self.modes.iter().enumerate() {
            let mut a = Complex64::new(0.0, 0.0);
            for c in 0..dim {
                a += u[c].coeffs()[idx] * m.xi_hat[c];
            }
            let q0 = qc[idx];
            qc[idx] = q0 * m.e[0][0] + I * a * m.e[0][1];
            let a_new = -I * q0 * m.e[1][0] + a * m.e[1][1];
            for c in 0..dim {
                let uc = &mut u[c].coeffs_mut()[idx];
                let perp = *uc - a * m.xi_hat[c];
                *uc = a_new * m.xi_hat[c] + perp * m.transverse;
            }
        }
    }
}

/// Scaling-and-squaring diagonal Padé (6,6) exponential of a small dense
/// complex matrix; an independent route to the closed form.
pub fn pade_expm(a: &[Complex64], n: usize, t: f64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let norm: f64 = (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = t / 2f64.powi(s);
    let x: Vec<Complex64> = a.iter().map(|v| v * scale).collect();
    let mul = |p: &[Complex64], q: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![zero; n * n];
        for i in 0..n {
            for k in 0..n {
                let pik = p[i * n + k];
                for j in 0..n {
                    out[i * n + j] += pik * q[k * n + j];
                }
            }
        }
        out
    };
    let coef = [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0];
    let mut num = vec![zero; n * n];
    let mut den = vec![zero; n * n];
    let mut pow = vec![zero; n * n];
    for i in 0..n {
        pow[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for (k, &c) in coef.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..n * n {
            num[i] += pow[i] * c;
            den[i] += pow[i] * (c * sign);
        }
        pow = mul(&pow, &x);
    }
    let mut r = solve(&den, &num, n);
    for _ in 0..s {
        r = mul(&r, &r);
    }
    r
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
fn solve(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm())).unwrap();
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
                x.swap(col * n + j, piv * n + j);
            }
        }
        let d = m[col * n + col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let (mv, xv) = (m[col * n + j], x[col * n + j]);
                m[row * n + j] -= f * mv;
                x[row * n + j] -= f * xv;
            }
        }
    }
    for row in 0..n {
        let d = m[row * n + row];
        for j in 0..n {
            x[row * n + j] /= d;
        }
    }
    x
}
