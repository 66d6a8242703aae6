use crate::lpaley::{DyadicFamily, SpectralField, Transform};
use crate::Result;

/// Padded-grid samples of every block of `u` and of every `S_{q−1}u`.
struct BlockSamples {
    blocks: Vec<Vec<f64>>,
    lows: Vec<Vec<f64>>,
}

fn sample_blocks(family: &DyadicFamily, tr: &Transform, u: &SpectralField) -> Result<BlockSamples> {
    let mut blocks = Vec::with_capacity(family.block_count());
    for j in family.blocks() {
        blocks.push(tr.to_padded(&family.block(u, j)?));
    }
    // S_{q−1}u = mean + Σ_{j ≤ q−2} Δ_j u, accumulated so the identity is exact.
    let mean = u.mean();
    let mut running = vec![mean; tr.padded_len()];
    let mut lows = Vec::with_capacity(blocks.len());
    // lows[k] = mean + Σ_{i ≤ k−2} blocks[i].
    for k in 0..blocks.len() {
        lows.push(running.clone());
        if k >= 1 {
            for (r, b) in running.iter_mut().zip(&blocks[k - 1]) {
                *r += b;
            }
        }
    }
    Ok(BlockSamples { blocks, lows })
}

/// `T_u v = Σ_q S_{q−1}u Δ_q v`, dealiased.
pub fn paraproduct(family: &DyadicFamily, tr: &Transform, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_grid(v)?;
    let su = sample_blocks(family, tr, u)?;
    let sv = sample_blocks(family, tr, v)?;
    let mut acc = vec![0.0; tr.padded_len()];
    for (low, blk) in su.lows.iter().zip(&sv.blocks) {
        for ((a, l), b) in acc.iter_mut().zip(low).zip(blk) {
            *a += l * b;
        }
    }
    Ok(tr.from_padded(&acc))
}

/// `R(u, v) = Σ_{|q−q′| ≤ 1} Δ_q u Δ_{q′} v`, plus the product of the means
/// so that `T_u v + T_v u + R(u, v) = uv` on the torus.
pub fn remainder(family: &DyadicFamily, tr: &Transform, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_grid(v)?;
    let su = sample_blocks(family, tr, u)?;
    let sv = sample_blocks(family, tr, v)?;
    let nb = su.blocks.len();
    let mut acc = vec![u.mean() * v.mean(); tr.padded_len()];
    for q in 0..nb {
        for qp in q.saturating_sub(1)..(q + 2).min(nb) {
            for ((a, x), y) in acc.iter_mut().zip(&su.blocks[q]).zip(&sv.blocks[qp]) {
                *a += x * y;
            }
        }
    }
    Ok(tr.from_padded(&acc))
}

/// `‖T_u v + T_v u + R(u,v) − uv‖_{L²} / ‖uv‖_{L²}`.
pub fn bony_residual(family: &DyadicFamily, tr: &Transform, u: &SpectralField, v: &SpectralField) -> Result<f64> {
    let mut sum = paraproduct(family, tr, u, v)?;
    sum.axpy(1.0, &paraproduct(family, tr, v, u)?);
    sum.axpy(1.0, &remainder(family, tr, u, v)?);
    let uv = tr.product(u, v)?;
    Ok(sum.sub(&uv).l2_norm() / uv.l2_norm())
}

/// `[v·∇, Δ_l] g = v·∇(Δ_l g) − Δ_l(v·∇g)`, dealiased.
pub fn commutator(
    family: &DyadicFamily,
    tr: &Transform,
    v: &[SpectralField],
    g: &SpectralField,
    l: i32,
) -> Result<SpectralField> {
    let gl = family.block(g, l)?;
    let dim = g.grid().dim();
    let mut transported_block = SpectralField::zeros(*g.grid());
    let mut transported = SpectralField::zeros(*g.grid());
    for (a, va) in v.iter().enumerate().take(dim) {
        transported_block.axpy(1.0, &tr.product(va, &gl.derivative(a))?);
        transported.axpy(1.0, &tr.product(va, &g.derivative(a))?);
    }
    Ok(transported_block.sub(&family.block(&transported, l)?))
}
