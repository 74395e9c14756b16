use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_exponent, ScalingFit, DEFAULT_DROP};
use super::identity::component_seed;
use super::sampling::{format_point, RemainderSample, SamplePair, SamplingPlan};
use crate::besov::{synth_lacunary, Regularity, TaylorExpansion};
use crate::calculus::{CalcContext, Omega2, Omega3};
use crate::error::{Error, Result};
use crate::spectral::{lp_decompose, norm, DyadicPartition, Grid, GridPoint};
use crate::stats::median;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Omega1,
    Omega2,
    Omega3,
    OmegaWord,
}

impl Formula {
    pub const ALL: [Formula; 4] = [Formula::Omega1, Formula::Omega2, Formula::Omega3, Formula::OmegaWord];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Omega1 => "omega1",
            Formula::Omega2 => "omega2",
            Formula::Omega3 => "omega3",
            Formula::OmegaWord => "omega_word",
        }
    }

    fn arity(self) -> Option<usize> {
        match self {
            Formula::Omega1 => Some(1),
            Formula::Omega2 => Some(2),
            Formula::Omega3 => Some(3),
            Formula::OmegaWord => None,
        }
    }

    /// Slope tolerance: ±0.10 for one component, ±0.15 for two, ±0.20 beyond.
    pub fn default_tolerance(self, components: usize) -> f64 {
        match components {
            1 => 0.10,
            2 => 0.15,
            _ => 0.20,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formula::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown formula `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderParams {
    pub formula: Formula,
    pub dim: usize,
    pub grid: usize,
    pub regularities: Vec<f64>,
    pub seeds: Vec<u64>,
    pub plan: SamplingPlan,
    pub drop: usize,
    pub shift: usize,
    pub tolerance: Option<f64>,
}

impl RemainderParams {
    pub fn new(formula: Formula, regularities: Vec<f64>) -> Self {
        RemainderParams {
            formula,
            dim: 1,
            grid: 1 << 14,
            regularities,
            seeds: (1..=10).collect(),
            plan: SamplingPlan::default(),
            drop: DEFAULT_DROP,
            shift: 1,
            tolerance: None,
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or_else(|| self.formula.default_tolerance(self.regularities.len()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderRun {
    #[serde(skip)]
    pub samples: Vec<RemainderSample>,
    pub fits: Vec<ScalingFit>,
    pub median_slope: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check every regularity, and every contiguous partial sum, is positive
/// and non-integer.
fn check_regularities(formula: Formula, regs: &[f64]) -> Result<()> {
    if let Some(a) = formula.arity() {
        if regs.len() != a {
            return Err(Error::InvalidArgument(format!(
                "{formula} takes {a} regularities, got {}",
                regs.len()
            )));
        }
    }
    if regs.is_empty() {
        return Err(Error::InvalidArgument("no regularities given".into()));
    }
    for start in 0..regs.len() {
        let mut total = 0.0;
        for a in &regs[start..] {
            Regularity::new(*a)?;
            total += a;
            Regularity::new(total)?;
        }
    }
    Ok(())
}

type Evaluator = Box<dyn Fn(GridPoint, GridPoint) -> Result<f64> + Send + Sync>;

fn evaluator(params: &RemainderParams, p: &DyadicPartition, seed: u64) -> Result<Evaluator> {
    let regs = &params.regularities;
    let fields = regs
        .iter()
        .enumerate()
        .map(|(i, &a)| synth_lacunary(a, component_seed(seed, i), p.j_max(), p))
        .collect::<Result<Vec<_>>>()?;
    Ok(match params.formula {
        Formula::Omega1 => {
            let t = TaylorExpansion::new(&fields[0], regs[0], p)?;
            Box::new(move |x, y| Ok(t.remainder(x, y)))
        }
        Formula::Omega2 => {
            let o = Omega2::new(&fields[0], &fields[1], regs[0], regs[1], p)?;
            Box::new(move |x, y| Ok(o.eval(x, y)))
        }
        Formula::Omega3 => {
            let o = Omega3::new(&fields[0], &fields[1], &fields[2], regs[0], regs[1], regs[2], p)?;
            Box::new(move |x, y| Ok(o.eval(x, y)))
        }
        Formula::OmegaWord => {
            let mut ctx = CalcContext::new(p.clone(), params.shift);
            for (i, (f, &a)) in fields.iter().zip(regs).enumerate() {
                ctx.bind(i + 1, lp_decompose(f, p)?, a)?;
            }
            let ids: Vec<usize> = (1..=regs.len()).collect();
            let w = ctx.word(&ids)?;
            // fills the coefficient tables once before the parallel sweep
            let origin = GridPoint([0, 0]);
            ctx.omega_word(&w, origin, origin)?;
            Box::new(move |x, y| ctx.omega_word(&w, x, y))
        }
    })
}

fn label(params: &RemainderParams) -> String {
    (1..=params.regularities.len()).map(|i| i.to_string()).collect()
}

/// Samples of `|Ω(y, x)|` for one seed, in plan order.
pub fn sample_remainder(params: &RemainderParams, seed: u64) -> Result<Vec<RemainderSample>> {
    check_regularities(params.formula, &params.regularities)?;
    let grid = Grid::new(params.dim, params.grid)?;
    let p = DyadicPartition::for_grid(grid)?;
    let eval = evaluator(params, &p, seed)?;
    let pairs: Vec<SamplePair> = params.plan.pairs(grid, seed);
    let alpha_total: f64 = params.regularities.iter().sum();
    let word = label(params);
    pairs
        .par_iter()
        .map(|s| {
            Ok(RemainderSample {
                formula: params.formula.name().to_string(),
                word: word.clone(),
                alpha_total,
                x: format_point(grid, s.x),
                h: norm(grid.displacement(s.x, s.y)),
                abs_omega: eval(s.x, s.y)?.abs(),
                scale_bin: s.bin,
            })
        })
        .collect()
}

/// Sample and fit every seed; pass iff the median slope is within tolerance
/// of the total regularity.
pub fn run_remainder(params: &RemainderParams) -> Result<RemainderRun> {
    check_regularities(params.formula, &params.regularities)?;
    if params.seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let mut samples = Vec::new();
    let mut fits = Vec::new();
    for &seed in &params.seeds {
        let s = sample_remainder(params, seed)?;
        fits.push(fit_exponent(&s, params.drop)?);
        samples.extend(s);
    }
    let slopes: Vec<f64> = fits.iter().filter(|f| !f.degenerate).map(|f| f.slope).collect();
    let median_slope = median(&slopes).unwrap_or(f64::NAN);
    let expected: f64 = params.regularities.iter().sum();
    let tolerance = params.tolerance();
    Ok(RemainderRun {
        samples,
        fits,
        median_slope,
        expected,
        tolerance,
        pass: (median_slope - expected).abs() <= tolerance,
    })
}
