use crate::lpaley::{SpectralField, Transform};
use crate::solver::{FluidState, LinearForcing, PhysParams};
use crate::{Complex64, KwgError, Result};

/// Explicit tendencies plus the pointwise extrema seen on the dealiasing grid.
#[derive(Debug, Clone)]
pub struct NonlinearTerms {
    pub dq: SpectralField,
    pub du: Vec<SpectralField>,
    pub min_density: f64,
    pub u_sup: f64,
}

/// `Au = μΔu + (λ+μ)∇div u` spectrally.
fn lame(u: &[SpectralField], params: &PhysParams) -> Vec<SpectralField> {
    let grid = *u[0].grid();
    let dim = u.len();
    let mut out: Vec<SpectralField> = (0..dim).map(|_| SpectralField::zeros(grid)).collect();
    for idx in 0..grid.len() {
        let xi = grid.xi(idx);
        let r2 = grid.xi_norm2(idx);
        let mut div = Complex64::new(0.0, 0.0);
        for b in 0..dim {
            div += u[b].coeffs()[idx] * xi[b];
        }
        for a in 0..dim {
            out[a].coeffs_mut()[idx] =
                -(u[a].coeffs()[idx] * (params.mu * r2)) - div * ((params.lambda + params.mu) * xi[a]);
        }
    }
    out
}

/// `−iξ·F`, the spectral `−div F`.
fn neg_divergence(flux: &[SpectralField]) -> SpectralField {
    let grid = *flux[0].grid();
    let mut out = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        let xi = grid.xi(idx);
        let mut s = Complex64::new(0.0, 0.0);
        for (a, f) in flux.iter().enumerate() {
            s += f.coeffs()[idx] * xi[a];
        }
        out.coeffs_mut()[idx] = Complex64::new(0.0, -1.0) * s;
    }
    out
}

/// Nonlinear tendencies `dq = −div(qu)`, `du = −u·∇u + K(q)∇q − I(q)Au`.
///
/// The conservative form equals `−u·∇q − q div u` and keeps the mean of `q` fixed exactly.
pub fn nonlinear_rhs(
    state: &FluidState,
    params: &PhysParams,
    tr: &Transform,
    vacuum_floor: f64,
) -> Result<NonlinearTerms> {
    let dim = state.u.len();
    let qp = tr.to_padded(&state.q);
    let min_density = qp.iter().fold(f64::INFINITY, |m, &q| m.min(1.0 + q));
    if !(min_density > vacuum_floor) {
        return Err(KwgError::Vacuum { min: min_density, floor: vacuum_floor, t: state.t });
    }
    let up: Vec<Vec<f64>> = state.u.iter().map(|c| tr.to_padded(c)).collect();
    let u_sup = up.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let au: Vec<Vec<f64>> = lame(&state.u, params).iter().map(|c| tr.to_padded(c)).collect();
    let gq: Vec<Vec<f64>> = (0..dim).map(|a| tr.to_padded(&state.q.derivative(a))).collect();

    let flux: Vec<SpectralField> = up
        .iter()
        .map(|ua| tr.from_padded(&ua.iter().zip(&qp).map(|(u, q)| u * q).collect::<Vec<_>>()))
        .collect();
    let dq = neg_divergence(&flux);

    let kq: Vec<f64> = qp.iter().map(|&q| params.coefficient_k(q)).collect();
    let iq: Vec<f64> = qp.iter().map(|&q| q / (1.0 + q)).collect();
    let mut du = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut acc: Vec<f64> = (0..qp.len()).map(|i| kq[i] * gq[a][i] - iq[i] * au[a][i]).collect();
        for b in 0..dim {
            let g = tr.to_padded(&state.u[a].derivative(b));
            for (x, (ub, gv)) in acc.iter_mut().zip(up[b].iter().zip(&g)) {
                *x -= ub * gv;
            }
        }
        du.push(tr.from_padded(&acc));
    }
    Ok(NonlinearTerms { dq, du, min_density, u_sup })
}

/// Explicit part of the forced linear system: `−ṽ·∇q + F`, `−ṽ·∇u + G`, where
/// `ṽ` is the convection field minus its mean (the mean acts as an exact phase).
pub fn explicit_linear_rhs(state: &FluidState, forcing: &LinearForcing, tr: &Transform) -> Result<NonlinearTerms> {
    let dim = state.u.len();
    let mut dq = forcing.f.clone();
    let mut du: Vec<SpectralField> = forcing.g.clone();
    let fluct: Vec<SpectralField> = forcing
        .v
        .iter()
        .map(|c| {
            let mut f = c.clone();
            f.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
            f
        })
        .collect();
    let active = fluct.iter().any(|c| c.coeffs().iter().any(|z| z.norm() > 0.0));
    if active {
        let vp: Vec<Vec<f64>> = fluct.iter().map(|c| tr.to_padded(c)).collect();
        let transport = |g: &SpectralField| -> SpectralField {
            let mut acc = vec![0.0; tr.padded_len()];
            for (a, va) in vp.iter().enumerate() {
                let d = tr.to_padded(&g.derivative(a));
                for (x, (v, dv)) in acc.iter_mut().zip(va.iter().zip(&d)) {
                    *x += v * dv;
                }
            }
            tr.from_padded(&acc)
        };
        dq.axpy(-1.0, &transport(&state.q));
        for a in 0..dim {
            du[a].axpy(-1.0, &transport(&state.u[a]));
        }
    }
    Ok(NonlinearTerms { dq, du, min_density: f64::NAN, u_sup: f64::NAN })
}
