use std::collections::BTreeMap;

use serde::Serialize;

use super::sampling::RemainderSample;
use crate::error::{Error, Result};
use crate::stats::least_squares;

pub const MIN_SAMPLES_PER_BIN: usize = 16;
pub const MIN_BINS: usize = 5;
pub const DEFAULT_DROP: usize = 2;

/// Fit of `log2 max|Ω|` against `log2 |h|` over scale bins.
///
/// `degenerate` is set when every sample in the fitted bins is zero; the
/// slope is then NaN (serialized as `null`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub r_min: u32,
    pub r_max: u32,
    pub samples_per_bin: Vec<usize>,
    pub max_residual: f64,
    pub degenerate: bool,
}

/// Per bin, the largest `|Ω|` and the `|h|` it was attained at; the fit uses
/// bins with at least 16 samples after dropping `drop` bins at each end.
pub fn fit_exponent(samples: &[RemainderSample], drop: usize) -> Result<ScalingFit> {
    let mut bins: BTreeMap<u32, (usize, f64, f64)> = BTreeMap::new();
    for s in samples {
        let e = bins.entry(s.scale_bin).or_insert((0, -1.0, 0.0));
        e.0 += 1;
        if s.abs_omega > e.1 {
            e.1 = s.abs_omega;
            e.2 = s.h;
        }
    }
    let full: Vec<(u32, (usize, f64, f64))> = bins
        .into_iter()
        .filter(|(_, (count, _, _))| *count >= MIN_SAMPLES_PER_BIN)
        .collect();
    let found = full.len().saturating_sub(2 * drop);
    if found < MIN_BINS {
        return Err(Error::InsufficientScales {
            found,
            required: MIN_BINS,
        });
    }
    let kept = &full[drop..full.len() - drop];
    let r_min = kept[0].0;
    let r_max = kept[kept.len() - 1].0;
    let samples_per_bin = kept.iter().map(|(_, (c, _, _))| *c).collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (_, (_, m, h)) in kept {
        if *m > 0.0 {
            xs.push(h.log2());
            ys.push(m.log2());
        }
    }
    if xs.is_empty() {
        return Ok(ScalingFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            r2: f64::NAN,
            r_min,
            r_max,
            samples_per_bin,
            max_residual: 0.0,
            degenerate: true,
        });
    }
    if xs.len() < MIN_BINS {
        return Err(Error::InsufficientScales {
            found: xs.len(),
            required: MIN_BINS,
        });
    }
    let fit = least_squares(&xs, &ys).ok_or(Error::InsufficientScales {
        found: 1,
        required: MIN_BINS,
    })?;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - fit.slope * x - fit.intercept).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        r_min,
        r_max,
        samples_per_bin,
        max_residual,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::sampling::scale_bin;

    fn samples(law: impl Fn(f64) -> f64) -> Vec<RemainderSample> {
        let mut out = Vec::new();
        for r in 1..=11 {
            for i in 0..20 {
                let h = 2f64.powi(-r - 1) * (1.0 + i as f64 / 20.0);
                out.push(RemainderSample {
                    formula: "synthetic".into(),
                    word: String::new(),
                    alpha_total: 0.0,
                    x: "0".into(),
                    h,
                    abs_omega: law(h),
                    scale_bin: scale_bin(h) as u32,
                });
            }
        }
        out
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_exponent(&samples(|h| h.powf(1.3)), 2).unwrap();
        assert!((fit.slope - 1.3).abs() < 1e-10);
        assert_eq!((fit.r_min, fit.r_max), (3, 9));
        assert!(fit.samples_per_bin.iter().all(|&c| c == 20));
    }

    #[test]
    fn wobbly_power_law() {
        // log-periodic wobble around the power law
        let fit = fit_exponent(&samples(|h| h.powf(2.1) * (1.0 + 0.1 * h.ln().sin())), 2).unwrap();
        assert!((fit.slope - 2.1).abs() < 0.05, "{}", fit.slope);
    }

    #[test]
    fn all_zero_is_degenerate() {
        let fit = fit_exponent(&samples(|_| 0.0), 2).unwrap();
        assert!(fit.degenerate);
        assert!(fit.slope.is_nan());
        let json = serde_json::to_string(&fit).unwrap();
        assert!(json.contains("\"slope\":null"));
    }

    #[test]
    fn too_few_bins() {
        let s: Vec<_> = samples(|h| h).into_iter().filter(|s| s.scale_bin <= 6).collect();
        assert!(matches!(fit_exponent(&s, 2), Err(Error::InsufficientScales { found: 2, .. })));
        // sparse bins do not count
        let sparse: Vec<_> = samples(|h| h).into_iter().step_by(2).collect();
        assert!(matches!(fit_exponent(&sparse, 2), Err(Error::InsufficientScales { found: 0, .. })));
    }
}
