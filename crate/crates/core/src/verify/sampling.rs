use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::spectral::{norm, Grid, GridPoint};

/// One evaluated remainder `|Ω(y, x)|` together with where it was taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub formula: String,
    pub word: String,
    pub alpha_total: f64,
    pub x: String,
    pub h: f64,
    pub abs_omega: f64,
    pub scale_bin: u32,
}

/// Where remainders are sampled: displacements `y − x` with
/// `|h| ∈ [2^{−r−1}, 2^{−r})` for `r_min ≤ r ≤ r_max`, at `base_points`
/// random grid nodes, with up to `per_bin` grid-multiple lengths per bin
/// along 1 (d = 1) or 8 (d = 2) fixed directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub base_points: usize,
    pub per_bin: usize,
    pub r_min: u32,
    pub r_max: u32,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            base_points: 64,
            per_bin: 8,
            r_min: 1,
            r_max: 11,
        }
    }
}

const DIRECTIONS_2D: [[i64; 2]; 8] = [[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]];

/// A sampled pair and the bin its displacement falls in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePair {
    pub x: GridPoint,
    pub y: GridPoint,
    pub bin: u32,
}

/// `r` with `|h| ∈ [2^{−r−1}, 2^{−r})`.
pub fn scale_bin(h: f64) -> i64 {
    (-h.log2()).ceil() as i64 - 1
}

impl SamplingPlan {
    /// The pairs in a fixed order: bin, then base point, then direction,
    /// then length.
    pub fn pairs(&self, grid: Grid, seed: u64) -> Vec<SamplePair> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let bases: Vec<GridPoint> = (0..self.base_points)
            .map(|_| grid.point(rng.random_range(0..grid.len())))
            .collect();
        let directions: Vec<[i64; 2]> = if grid.dim() == 1 {
            vec![[1, 0]]
        } else {
            DIRECTIONS_2D.to_vec()
        };
        let dx = grid.spacing();
        let mut out = Vec::new();
        for r in self.r_min..=self.r_max {
            let (lo, hi) = (2f64.powi(-(r as i32) - 1), 2f64.powi(-(r as i32)));
            let steps: Vec<Vec<i64>> = directions
                .iter()
                .map(|d| self.steps(lo, hi, dx * norm([d[0] as f64, d[1] as f64]), r))
                .collect();
            for &x in &bases {
                for (d, ms) in directions.iter().zip(&steps) {
                    for &m in ms {
                        let y = grid.offset(x, [d[0] * m, d[1] * m]);
                        out.push(SamplePair { x, y, bin: r });
                    }
                }
            }
        }
        out
    }

    /// Up to `per_bin` evenly spread integers `m` with `m·unit ∈ [lo, hi)`.
    fn steps(&self, lo: f64, hi: f64, unit: f64, r: u32) -> Vec<i64> {
        let first = (lo / unit).ceil() as i64;
        let mut last = (hi / unit).ceil() as i64 - 1;
        while last >= first && scale_bin(last as f64 * unit) != r as i64 {
            last -= 1;
        }
        let first = (first..=last)
            .find(|&m| scale_bin(m as f64 * unit) == r as i64)
            .unwrap_or(last + 1);
        if last < first {
            return Vec::new();
        }
        let count = ((last - first + 1) as usize).min(self.per_bin);
        let mut ms: Vec<i64> = (0..count)
            .map(|i| {
                if count == 1 {
                    first
                } else {
                    first + ((last - first) as f64 * i as f64 / (count - 1) as f64).round() as i64
                }
            })
            .collect();
        ms.dedup();
        ms
    }
}

/// Coordinates of a grid node as written to CSV: one number in 1D,
/// `a;b` in 2D.
pub fn format_point(grid: Grid, p: GridPoint) -> String {
    let c = grid.coords(p);
    match grid.dim() {
        1 => format!("{}", c[0]),
        _ => format!("{};{}", c[0], c[1]),
    }
}

/// `n` random pairs with `|y − x| ≤ π/4`.
pub fn random_pairs(grid: Grid, n: usize, seed: u64) -> Vec<(GridPoint, GridPoint)> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let reach = (grid.n() / 8) as i64;
    (0..n)
        .map(|_| {
            let x = grid.point(rng.random_range(0..grid.len()));
            loop {
                let off = [rng.random_range(-reach..=reach), rng.random_range(-reach..=reach)];
                let y = grid.offset(x, off);
                if norm(grid.displacement(x, y)) <= std::f64::consts::FRAC_PI_4 {
                    return (x, y);
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_are_half_open() {
        assert_eq!(scale_bin(0.25), 1);
        assert_eq!(scale_bin(0.2), 2);
        assert_eq!(scale_bin(0.125), 2);
        assert_eq!(scale_bin(0.124), 3);
    }

    #[test]
    fn every_pair_lands_in_its_bin() {
        for dim in [1, 2] {
            let grid = Grid::new(dim, 1 << 12).unwrap();
            let plan = SamplingPlan {
                base_points: 4,
                ..Default::default()
            };
            let pairs = plan.pairs(grid, 3);
            assert!(!pairs.is_empty());
            for p in &pairs {
                let h = norm(grid.displacement(p.x, p.y));
                assert_eq!(scale_bin(h), p.bin as i64, "|h| = {h}");
            }
            assert_eq!(pairs, plan.pairs(grid, 3));
        }
    }

    #[test]
    fn finest_bins_may_be_empty_on_coarse_grids() {
        let grid = Grid::new(1, 256).unwrap();
        let pairs = SamplingPlan::default().pairs(grid, 0);
        // spacing 2π/256 ≈ 2^{−5.35}: bins beyond r = 5 contain no grid multiple
        assert!(pairs.iter().all(|p| p.bin <= 5));
    }

    #[test]
    fn random_pairs_stay_within_reach() {
        let grid = Grid::new(2, 64).unwrap();
        for (x, y) in random_pairs(grid, 50, 9) {
            assert!(norm(grid.displacement(x, y)) <= std::f64::consts::FRAC_PI_4);
        }
    }
}
