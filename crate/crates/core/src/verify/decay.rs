use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identity::component_seed;
use crate::besov::{decay_slope, synth_octave, DecayFit};
use crate::calculus::{r_seq, CalcContext};
use crate::error::{Error, Result};
use crate::spectral::{lp_decompose, moment_block, DyadicPartition, Grid, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayTarget {
    CKj,
    RSeq,
    DKj,
    MomentBlock,
}

impl DecayTarget {
    pub const ALL: [DecayTarget; 4] = [
        DecayTarget::CKj,
        DecayTarget::RSeq,
        DecayTarget::DKj,
        DecayTarget::MomentBlock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecayTarget::CKj => "c_kj",
            DecayTarget::RSeq => "r_seq",
            DecayTarget::DKj => "d_kj",
            DecayTarget::MomentBlock => "moment_block",
        }
    }
}

impl DecayTarget {
    /// Fit window for a sequence of `len` norms. The lowest octaves are
    /// pre-asymptotic and the top ones feel the truncation at `J_max`;
    /// `R^j` needs a later start because the commutator terms settle slowly.
    pub fn default_window(self, len: usize) -> (usize, usize) {
        let top = len.saturating_sub(1);
        match self {
            DecayTarget::CKj => (3, top.saturating_sub(4)),
            DecayTarget::DKj => (3, top.saturating_sub(3)),
            DecayTarget::RSeq => (5, top.saturating_sub(1)),
            DecayTarget::MomentBlock => (3, top.saturating_sub(2)),
        }
    }
}

impl fmt::Display for DecayTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecayTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecayTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownDecayTarget(s.to_string()))
    }
}

pub const DECAY_TOLERANCE: f64 = 0.15;
pub const MIN_DECAY_BINS: usize = 5;

/// Inputs of a decay run. `regularities` are the letters of the word for
/// `c_kj`/`d_kj`, `(α, β)` for `r_seq` and `(β)` for `moment_block`. The
/// derivative order `order` is taken along the first axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub dim: usize,
    pub grid: usize,
    pub regularities: Vec<f64>,
    pub order: usize,
    pub shift: usize,
    pub seeds: Vec<u64>,
    pub j_min: Option<usize>,
    pub j_max: Option<usize>,
}

impl DecayParams {
    pub fn new(regularities: Vec<f64>, order: usize) -> Self {
        DecayParams {
            dim: 1,
            grid: 1 << 14,
            regularities,
            order,
            shift: 1,
            seeds: (1..=5).collect(),
            j_min: None,
            j_max: None,
        }
    }

    fn k(&self) -> MultiIndex {
        let mut c = vec![0; self.dim];
        c[0] = self.order;
        MultiIndex::new(&c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub target: String,
    pub regularities: Vec<f64>,
    pub order: usize,
    /// `2^{mean_s log2 ‖·‖_∞}` over seeds, per `j`.
    pub norms: Vec<f64>,
    pub fit: DecayFit,
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Fit `log2 ‖X^j‖_∞` against `j`, averaging the logarithms over seeds.
///
/// Expected slopes: `−(α_w − |k|)` for `c_kj`, `−(α + β)` for `r_seq`,
/// `−(β + |k|)` for `moment_block`; `d_kj` only has to decay.
pub fn run_decay_suite(target: DecayTarget, params: &DecayParams) -> Result<DecayReport> {
    let p = DyadicPartition::for_grid(Grid::new(params.dim, params.grid)?)?;
    let k = params.k();
    let regs = &params.regularities;
    let arity = match target {
        DecayTarget::CKj | DecayTarget::DKj => None,
        DecayTarget::RSeq => Some(2),
        DecayTarget::MomentBlock => Some(1),
    };
    if regs.is_empty() || arity.is_some_and(|a| regs.len() != a) {
        return Err(Error::InvalidArgument(format!(
            "{target} takes {} regularities, got {}",
            arity.map_or("at least 1".to_string(), |a| a.to_string()),
            regs.len()
        )));
    }
    let alpha_w: f64 = regs.iter().sum();
    let expected = match target {
        DecayTarget::CKj => Some(-(alpha_w - params.order as f64)),
        DecayTarget::RSeq => Some(-alpha_w),
        DecayTarget::MomentBlock => Some(-(alpha_w + params.order as f64)),
        DecayTarget::DKj => {
            if params.order as f64 >= alpha_w {
                return Err(Error::OrderOutOfRange {
                    order: params.order,
                    alpha: alpha_w,
                });
            }
            None
        }
    };

    let runs = params
        .seeds
        .par_iter()
        .map(|&seed| norms_for_seed(target, params, &p, k, seed))
        .collect::<Result<Vec<_>>>()?;
    let len = runs[0].len();
    let norms: Vec<f64> = (0..len)
        .map(|j| {
            if runs.iter().any(|r| !(r[j] > 0.0)) {
                0.0
            } else {
                (runs.iter().map(|r| r[j].log2()).sum::<f64>() / runs.len() as f64).exp2()
            }
        })
        .collect();

    let (lo, hi) = target.default_window(len);
    let j_min = params.j_min.unwrap_or(lo);
    let j_max = params.j_max.unwrap_or(hi);
    let usable = (j_min..=j_max).filter(|&j| norms.get(j).is_some_and(|&v| v >= 1e-14)).count();
    if usable < MIN_DECAY_BINS {
        return Err(Error::InsufficientScales {
            found: usable,
            required: MIN_DECAY_BINS,
        });
    }
    let fit = decay_slope(&norms, j_min..=j_max)?;
    let pass = match expected {
        Some(e) => (fit.slope - e).abs() <= DECAY_TOLERANCE,
        None => fit.slope < 0.0,
    };
    Ok(DecayReport {
        target: target.name().to_string(),
        regularities: regs.clone(),
        order: params.order,
        norms,
        fit,
        expected,
        tolerance: DECAY_TOLERANCE,
        pass,
    })
}

fn norms_for_seed(
    target: DecayTarget,
    params: &DecayParams,
    p: &DyadicPartition,
    k: MultiIndex,
    seed: u64,
) -> Result<Vec<f64>> {
    let top = p.j_max() - 1;
    let fields = params
        .regularities
        .iter()
        .enumerate()
        .map(|(i, &a)| synth_octave(a, component_seed(seed, i), top, p))
        .collect::<Result<Vec<_>>>()?;
    match target {
        DecayTarget::CKj | DecayTarget::DKj => {
            let mut ctx = CalcContext::new(p.clone(), params.shift);
            for (i, (f, &a)) in fields.iter().zip(&params.regularities).enumerate() {
                ctx.bind(i + 1, lp_decompose(f, p)?, a)?;
            }
            let ids: Vec<usize> = (1..=fields.len()).collect();
            let w = ctx.word(&ids)?;
            if target == DecayTarget::CKj {
                (0..=ctx.len())
                    .map(|j| Ok(ctx.c_kj(&w, k, j as i64)?.sup_norm()))
                    .collect()
            } else {
                (0..ctx.len()).map(|j| Ok(ctx.d_kj(&w, k, j)?.sup_norm())).collect()
            }
        }
        DecayTarget::RSeq => {
            let (a, b) = (params.regularities[0], params.regularities[1]);
            Ok(r_seq(&fields[0], &fields[1], a, b, p)?.sup_norms())
        }
        DecayTarget::MomentBlock => (0..p.block_count() as i32)
            .map(|j| Ok(moment_block(&fields[0], j - 1, k, p)?.sup_norm()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for t in DecayTarget::ALL {
            assert_eq!(t.name().parse::<DecayTarget>().unwrap(), t);
        }
        assert!(matches!("nope".parse::<DecayTarget>(), Err(Error::UnknownDecayTarget(_))));
    }

    #[test]
    fn arity_and_order_are_checked() {
        assert!(run_decay_suite(DecayTarget::RSeq, &DecayParams::new(vec![0.6], 0)).is_err());
        assert!(matches!(
            run_decay_suite(DecayTarget::DKj, &DecayParams::new(vec![0.6, 0.7], 2)),
            Err(Error::OrderOutOfRange { .. })
        ));
    }

    #[test]
    fn short_grids_lack_scales() {
        let params = DecayParams {
            grid: 128,
            ..DecayParams::new(vec![0.7], 0)
        };
        assert!(matches!(
            run_decay_suite(DecayTarget::MomentBlock, &params),
            Err(Error::InsufficientScales { .. })
        ));
    }
}
