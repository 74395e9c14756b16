//! Bony's paraproduct and resonant term, the abstract pair operator on
//! block sequences, and the moment paraproducts `g ⩕_ℓ h`.

use rayon::prelude::*;

use crate::besov::BlockSequence;
use crate::error::{Error, Result};
use crate::spectral::{
    low_pass, lp_block, moment_low_pass, require_resolvable, DyadicPartition, Field, MultiIndex,
};

fn check_product(f: &Field, g: &Field, p: &DyadicPartition) -> Result<()> {
    require_resolvable(f, p)?;
    require_resolvable(g, p)?;
    let bandwidth = f.support() + g.support();
    if bandwidth >= f.grid().nyquist() as f64 {
        return Err(Error::Aliasing {
            bandwidth,
            nyquist: f.grid().nyquist(),
        });
    }
    Ok(())
}

/// Fixed-order sum of terms computed in parallel.
fn ordered_sum(p: &DyadicPartition, terms: Vec<Result<Field>>) -> Result<Field> {
    let terms = terms.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Field::sum(p.grid(), &terms))
}

/// `f ⩕ g = Σ_j Δ_{<j−1} f · Δ_j g`.
pub fn paraproduct(f: &Field, g: &Field, p: &DyadicPartition) -> Result<Field> {
    check_product(f, g, p)?;
    let terms = (1..=p.j_max())
        .into_par_iter()
        .map(|j| Ok(low_pass(f, j - 1, p)?.mul(&lp_block(g, j, p)?)))
        .collect();
    ordered_sum(p, terms)
}

/// `f ⊙ g = Σ_{|i−j|≤1} Δ_i f · Δ_j g`.
pub fn resonant(f: &Field, g: &Field, p: &DyadicPartition) -> Result<Field> {
    check_product(f, g, p)?;
    let top = p.j_max();
    let terms = (-1..=top)
        .into_par_iter()
        .map(|j| {
            let gj = lp_block(g, j, p)?;
            let mut near = lp_block(f, j, p)?;
            if j > -1 {
                near = near.add(&lp_block(f, j - 1, p)?);
            }
            if j < top {
                near = near.add(&lp_block(f, j + 1, p)?);
            }
            Ok(near.mul(&gj))
        })
        .collect();
    ordered_sum(p, terms)
}

fn check_sequence_regularity(seq: &BlockSequence) -> Result<()> {
    match seq.regularity() {
        Some(a) if !(a > 0.0) => Err(Error::NonpositiveRegularity(a)),
        _ => Ok(()),
    }
}

/// `(𝒇, 𝒈) = {f^{<j−N} g^j}_j`, tagged with the regularity of `𝒈`.
pub fn pair_op(f: &BlockSequence, g: &BlockSequence, shift: usize) -> Result<BlockSequence> {
    check_sequence_regularity(f)?;
    check_sequence_regularity(g)?;
    if f.len() != g.len() {
        return Err(Error::InvalidArgument(format!(
            "sequence lengths differ: {} vs {}",
            f.len(),
            g.len()
        )));
    }
    let nyquist = f.grid().nyquist();
    let blocks = (0..g.len())
        .into_par_iter()
        .map(|j| {
            let low = f.prefix(j as i64 - shift as i64);
            let high = g.block(j);
            let bandwidth = low.support() + high.support();
            if bandwidth >= nyquist as f64 && low.sup_norm() > 0.0 && high.sup_norm() > 0.0 {
                return Err(Error::Aliasing { bandwidth, nyquist });
            }
            Ok(low.mul(high))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = BlockSequence::from_blocks(blocks);
    if let Some(b) = g.regularity() {
        out = out.with_regularity(b);
    }
    Ok(out)
}

/// Left-nested `(𝒇₁, …, 𝒇ₙ) = ((𝒇₁, …, 𝒇_{n−1}), 𝒇ₙ)`.
pub fn multi_op(seqs: &[&BlockSequence], shift: usize) -> Result<BlockSequence> {
    let (first, rest) = seqs
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("multi_op needs at least one sequence".into()))?;
    check_sequence_regularity(first)?;
    let mut acc = (*first).clone();
    for s in rest {
        acc = pair_op(&acc, s, shift)?;
    }
    Ok(acc)
}

/// `g ⩕_ℓ h = Σ_j Δ^ℓ_{<j−1} g · Δ_j h` for `ℓ ≠ 0`.
pub fn mpl(g: &Field, h: &Field, l: MultiIndex, p: &DyadicPartition) -> Result<Field> {
    if l.is_zero() {
        return Err(Error::ZeroMultiIndex);
    }
    check_product(g, h, p)?;
    let terms = (1..=p.j_max())
        .into_par_iter()
        .map(|j| Ok(moment_low_pass(g, j - 1, l, p)?.mul(&lp_block(h, j, p)?)))
        .collect();
    ordered_sum(p, terms)
}
