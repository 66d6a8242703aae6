use std::io::{Read, Write};

use crate::lpaley::{SpectralField, TorusGrid};
use crate::solver::{FluidState, PhysParams};
use crate::{Complex64, KwgError, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"KWG1";

/// Header and state stored in a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: FluidState,
    pub eps: f64,
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub p: f64,
}

/// Flat indices in ascending wavenumber order `−N/2, …, N/2−1` per axis, row-major.
fn ascending_order(grid: &TorusGrid) -> Vec<usize> {
    let n = grid.n() as i64;
    let axis: Vec<usize> = (-n / 2..n / 2).map(|k| grid.axis_index(k)).collect();
    if grid.dim() == 1 {
        axis
    } else {
        axis.iter().flat_map(|&i0| axis.iter().map(move |&i1| grid.join(i0, i1))).collect()
    }
}

/// Writes magic, `u32` `(d, N)`, `f64` `(L, t, ε, μ, λ, κ, p)`, then `q` and each
/// `u` component as `(re, im)` pairs, all little-endian.
pub fn write_snapshot<W: Write>(mut w: W, state: &FluidState, params: &PhysParams) -> Result<()> {
    let g = state.grid();
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    for v in [g.length(), state.t, params.eps, params.mu, params.lambda, params.kappa, params.p] {
        w.write_all(&v.to_le_bytes())?;
    }
    let order = ascending_order(g);
    for f in std::iter::once(&state.q).chain(state.u.iter()) {
        let c = f.coeffs();
        for &i in &order {
            w.write_all(&c[i].re.to_le_bytes())?;
            w.write_all(&c[i].im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(KwgError::Format(format!("bad snapshot magic {magic:?}")));
    }
    let mut u32buf = [0u8; 4];
    let mut rd_u32 = |r: &mut R| -> Result<u32> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let dim = rd_u32(&mut r)? as usize;
    let n = rd_u32(&mut r)? as usize;
    let mut f64buf = [0u8; 8];
    let mut rd_f64 = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut f64buf)?;
        Ok(f64::from_le_bytes(f64buf))
    };
    let mut head = [0.0; 7];
    for h in &mut head {
        *h = rd_f64(&mut r)?;
    }
    let [l, t, eps, mu, lambda, kappa, p] = head;
    let grid = TorusGrid::new(dim, n, l)?;
    let order = ascending_order(&grid);
    let mut fields = Vec::with_capacity(dim + 1);
    for _ in 0..=dim {
        let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
        for &i in &order {
            let re = rd_f64(&mut r)?;
            let im = rd_f64(&mut r)?;
            c[i] = Complex64::new(re, im);
        }
        fields.push(SpectralField::from_coeffs(grid, c)?);
    }
    let q = fields.remove(0);
    Ok(Snapshot { state: FluidState::new(t, q, fields)?, eps, mu, lambda, kappa, p })
}
