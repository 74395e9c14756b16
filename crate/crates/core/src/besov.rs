//! Besov norms with `p = q = ∞`, block sequences, synthetic test functions
//! of prescribed regularity, and classical Taylor remainders.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{
    self, lp_block, spectral_derivative, DyadicPartition, Field, Grid, GridPoint, MultiIndex,
};
use crate::stats::least_squares;

/// Distance from the integers below which a regularity counts as integer.
pub const INTEGER_TOLERANCE: f64 = 1e-9;

pub fn is_near_integer(a: f64) -> bool {
    (a - a.round()).abs() < INTEGER_TOLERANCE
}

/// A positive, non-integer regularity exponent.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Regularity(f64);

impl Regularity {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonpositiveRegularity(alpha));
        }
        if is_near_integer(alpha) {
            return Err(Error::IntegerRegularity(alpha));
        }
        Ok(Regularity(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A finite sequence `{f^j}` of band-limited fields, optionally tagged with
/// the regularity `α` of the space `𝔹^α` it is meant to belong to.
#[derive(Clone, Debug)]
pub struct BlockSequence {
    blocks: Vec<Field>,
    regularity: Option<f64>,
    note: String,
}

impl BlockSequence {
    pub fn from_blocks(blocks: Vec<Field>) -> Self {
        assert!(!blocks.is_empty(), "a block sequence needs at least one block");
        let grid = blocks[0].grid();
        assert!(blocks.iter().all(|b| b.grid() == grid), "blocks live on different grids");
        BlockSequence {
            blocks,
            regularity: None,
            note: String::new(),
        }
    }

    pub fn with_regularity(mut self, alpha: f64) -> Self {
        self.regularity = Some(alpha);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn grid(&self) -> Grid {
        self.blocks[0].grid()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn block(&self, j: usize) -> &Field {
        &self.blocks[j]
    }

    pub fn blocks(&self) -> &[Field] {
        &self.blocks
    }

    pub fn regularity(&self) -> Option<f64> {
        self.regularity
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    /// Smallest `B` with `supp F f^j ⊆ 2^j B` for every `j`, as a radius.
    pub fn ball(&self) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.support() / 2f64.powi(j as i32))
            .fold(0.0, f64::max)
    }

    /// `Σ_j f^j`.
    pub fn sum(&self) -> Field {
        Field::sum(self.grid(), &self.blocks)
    }

    /// `f^{<j} = Σ_{0≤i<j} f^i`; zero for `j ≤ 0`, everything past the end.
    pub fn prefix(&self, j: i64) -> Field {
        let end = j.clamp(0, self.len() as i64) as usize;
        Field::sum(self.grid(), &self.blocks[..end])
    }

    pub fn sup_norms(&self) -> Vec<f64> {
        self.blocks.iter().map(Field::sup_norm).collect()
    }

    /// `sup_j 2^{jα} ‖f^j‖_∞`.
    pub fn norm(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::NonpositiveRegularity(alpha));
        }
        Ok(self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| 2f64.powf(j as f64 * alpha) * b.sup_norm())
            .fold(0.0, f64::max))
    }

    /// `∂^k 𝒇 = {∂^k f^j}`, tagged `α − |k|`.
    pub fn derivative(&self, k: MultiIndex, p: &DyadicPartition) -> Result<BlockSequence> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| spectral_derivative(b, k, p))
            .collect::<Result<Vec<_>>>()?;
        let mut out = BlockSequence::from_blocks(blocks);
        out.regularity = self.regularity.map(|a| a - k.order() as f64);
        Ok(out)
    }
}

/// `sup_{j≥−1} 2^{jα} ‖Δ_j f‖_∞`.
pub fn besov_norm(f: &Field, alpha: f64, p: &DyadicPartition) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveRegularity(alpha));
    }
    spectral::require_resolvable(f, p)?;
    let mut best: f64 = 0.0;
    for j in -1..=p.j_max() {
        let b = lp_block(f, j, p)?;
        best = best.max(2f64.powf(j as f64 * alpha) * b.sup_norm());
    }
    Ok(best)
}

/// `sup_j 2^{jα} ‖f^j‖_∞` of a sequence.
pub fn besov_norm_seq(seq: &BlockSequence, alpha: f64) -> Result<f64> {
    seq.norm(alpha)
}

fn check_synth_range(j_top: i32, p: &DyadicPartition) -> Result<()> {
    if j_top < 0 || 2f64.powi(j_top) * spectral::RHO_OUTER >= p.grid().nyquist() as f64 {
        return Err(Error::UnresolvedBandwidth {
            j: j_top,
            j_max: p.j_max(),
        });
    }
    Ok(())
}

/// Integer wave vector of length in `[lo, hi]` along a random direction,
/// falling back to the first axis.
fn direction(rng: &mut Xoshiro256PlusPlus, dim: usize, radius: f64, lo: f64, hi: f64) -> [i64; 2] {
    if dim == 1 {
        return [radius.round() as i64, 0];
    }
    let t = TAU * rng.random::<f64>();
    let k = [(radius * t.cos()).round() as i64, (radius * t.sin()).round() as i64];
    let r = (k[0] as f64).hypot(k[1] as f64);
    if r >= lo && r <= hi {
        k
    } else {
        [radius.round() as i64, 0]
    }
}

/// `Σ_{j=0}^{J} 2^{−jα} a_j cos(κ_j·x + φ_j)` with `|κ_j| ∈ [2^{j+1}/3, 2^j]`
/// (exactly `2^j` in one dimension), so mode `j` sits in the plateau of
/// `ρ_{j−1}`. Amplitudes `a_j ∈ [1/2, 1]` and phases come from a
/// xoshiro256++ stream seeded with `seed`.
pub fn synth_lacunary(alpha: f64, seed: u64, j_top: i32, p: &DyadicPartition) -> Result<Field> {
    let alpha = Regularity::new(alpha)?.value();
    check_synth_range(j_top, p)?;
    let grid = p.grid();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut modes = Vec::new();
    for j in 0..=j_top {
        let a = 0.5 + 0.5 * rng.random::<f64>();
        let phase = TAU * rng.random::<f64>();
        let r = 2f64.powi(j);
        let kappa = direction(&mut rng, grid.dim(), r, 2.0 * r / 3.0, r);
        modes.push((kappa, 2f64.powf(-(j as f64) * alpha) * a, phase));
    }
    Ok(sum_of_modes(grid, &modes))
}

/// Like [`synth_lacunary`] but with `M = min(4, 2^j)` modes per octave at
/// radii `2^j(1 + m/M)`, each with amplitude `2^{−jα} a_{j,m} / M`. Unlike
/// the lacunary series these modes reach the transition zones of the
/// partition, so moment blocks do not vanish.
pub fn synth_octave(alpha: f64, seed: u64, j_top: i32, p: &DyadicPartition) -> Result<Field> {
    let alpha = Regularity::new(alpha)?.value();
    check_synth_range(j_top + 1, p)?;
    let grid = p.grid();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut modes = Vec::new();
    for j in 0..=j_top {
        let count = 4.min(1 << j);
        for m in 0..count {
            let a = 0.5 + 0.5 * rng.random::<f64>();
            let phase = TAU * rng.random::<f64>();
            let r = 2f64.powi(j) * (1.0 + m as f64 / count as f64);
            let kappa = direction(&mut rng, grid.dim(), r, 0.9 * r, 1.1 * r);
            let amp = 2f64.powf(-(j as f64) * alpha) * a / count as f64;
            modes.push((kappa, amp, phase));
        }
    }
    Ok(sum_of_modes(grid, &modes))
}

fn sum_of_modes(grid: Grid, modes: &[([i64; 2], f64, f64)]) -> Field {
    let support = modes
        .iter()
        .map(|(k, _, _)| (k[0] as f64).hypot(k[1] as f64))
        .fold(0.0, f64::max);
    let waves: Vec<([f64; 2], f64, f64)> = modes
        .iter()
        .map(|&(k, a, ph)| ([k[0] as f64, k[1] as f64], a, ph))
        .collect();
    Field::from_fn(grid, support, |x| {
        waves
            .iter()
            .map(|(k, a, ph)| a * (k[0] * x[0] + k[1] * x[1] + ph).cos())
            .sum()
    })
}

/// Taylor coefficients `∂^k f` for `|k| < θ`, precomputed so that many
/// remainders `Ω^θ(f)(y, x)` can be evaluated cheaply.
#[derive(Clone, Debug)]
pub struct TaylorExpansion {
    field: Field,
    theta: f64,
    derivatives: Vec<(MultiIndex, Field)>,
}

impl TaylorExpansion {
    pub fn new(f: &Field, theta: f64, p: &DyadicPartition) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::NonpositiveRegularity(theta));
        }
        let derivatives = MultiIndex::below(f.grid().dim(), theta)
            .into_iter()
            .map(|k| Ok((k, spectral_derivative(f, k, p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TaylorExpansion {
            field: f.clone(),
            theta,
            derivatives,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `∂^k f` for a stored `k`.
    pub fn derivative(&self, k: MultiIndex) -> Option<&Field> {
        self.derivatives.iter().find(|(m, _)| *m == k).map(|(_, f)| f)
    }

    /// `Σ_{|k|<θ′} h^k/k! ∂^k f(x)` for `θ′ ≤ θ`.
    pub fn polynomial(&self, theta: f64, x: GridPoint, h: [f64; 2]) -> f64 {
        self.derivatives
            .iter()
            .filter(|(k, _)| (k.order() as f64) < theta)
            .map(|(k, d)| k.taylor_weight(h) * d.eval(x))
            .sum()
    }

    /// `Ω^θ′(f)(y, x)` for `θ′ ≤ θ`.
    pub fn remainder_at(&self, theta: f64, x: GridPoint, y: GridPoint) -> f64 {
        let h = self.field.grid().displacement(x, y);
        self.field.eval(y) - self.polynomial(theta, x, h)
    }

    pub fn remainder(&self, x: GridPoint, y: GridPoint) -> f64 {
        self.remainder_at(self.theta, x, y)
    }
}

/// `Ω^θ(f)(y, x) = f(y) − Σ_{|k|<θ} (y − x)^k/k! ∂^k f(x)`.
pub fn classical_remainder(
    f: &Field,
    theta: f64,
    x: GridPoint,
    y: GridPoint,
    p: &DyadicPartition,
) -> Result<f64> {
    Ok(TaylorExpansion::new(f, theta, p)?.remainder(x, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub j_min: usize,
    pub j_max: usize,
}

pub const MIN_DECAY_SCALES: usize = 4;

/// Least-squares slope of `log2 norms[j]` against `j` over `range`, skipping
/// entries below `1e−14`.
pub fn decay_slope(norms: &[f64], range: RangeInclusive<usize>) -> Result<DecayFit> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in range.clone() {
        if let Some(&v) = norms.get(j) {
            if v >= 1e-14 {
                xs.push(j as f64);
                ys.push(v.log2());
            }
        }
    }
    if xs.len() < MIN_DECAY_SCALES {
        return Err(Error::InsufficientScales {
            found: xs.len(),
            required: MIN_DECAY_SCALES,
        });
    }
    let fit = least_squares(&xs, &ys).expect("at least four distinct scales");
    Ok(DecayFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        j_min: *range.start(),
        j_max: *range.end(),
    })
}

pub fn block_decay_slope(seq: &BlockSequence, range: RangeInclusive<usize>) -> Result<DecayFit> {
    decay_slope(&seq.sup_norms(), range)
}
