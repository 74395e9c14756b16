use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, 2π)^d`, `d ∈ {1, 2}`, with `n`
/// nodes per axis. Samples are stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
}

/// A grid node, addressed by its per-axis indices. The second index is
/// ignored (and kept at zero) in one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint(pub [usize; 2]);

impl GridPoint {
    pub fn new_1d(i: usize) -> Self {
        GridPoint([i, 0])
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) || n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid { dim, n });
        }
        Ok(Grid { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of samples, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Signed integer frequency of an FFT bin along one axis.
    pub fn axis_frequency(&self, bin: usize) -> i64 {
        if bin < self.n / 2 {
            bin as i64
        } else {
            bin as i64 - self.n as i64
        }
    }

    /// Integer frequency vector of flat spectral index `idx`.
    pub fn frequency(&self, idx: usize) -> [i64; 2] {
        match self.dim {
            1 => [self.axis_frequency(idx), 0],
            _ => [
                self.axis_frequency(idx / self.n),
                self.axis_frequency(idx % self.n),
            ],
        }
    }

    /// True when some component of the frequency sits on the Nyquist bin,
    /// where real fields cannot carry odd multipliers.
    pub fn is_nyquist_bin(&self, idx: usize) -> bool {
        let h = self.n / 2;
        match self.dim {
            1 => idx == h,
            _ => idx / self.n == h || idx % self.n == h,
        }
    }

    pub fn flat(&self, p: GridPoint) -> usize {
        match self.dim {
            1 => p.0[0] % self.n,
            _ => (p.0[0] % self.n) * self.n + p.0[1] % self.n,
        }
    }

    pub fn point(&self, flat: usize) -> GridPoint {
        match self.dim {
            1 => GridPoint([flat, 0]),
            _ => GridPoint([flat / self.n, flat % self.n]),
        }
    }

    pub fn coords(&self, p: GridPoint) -> [f64; 2] {
        let dx = self.spacing();
        match self.dim {
            1 => [p.0[0] as f64 * dx, 0.0],
            _ => [p.0[0] as f64 * dx, p.0[1] as f64 * dx],
        }
    }

    /// Shift `p` by `offset` grid steps per axis (periodically).
    pub fn offset(&self, p: GridPoint, offset: [i64; 2]) -> GridPoint {
        let n = self.n as i64;
        let wrap = |i: usize, o: i64| ((i as i64 + o).rem_euclid(n)) as usize;
        match self.dim {
            1 => GridPoint([wrap(p.0[0], offset[0]), 0]),
            _ => GridPoint([wrap(p.0[0], offset[0]), wrap(p.0[1], offset[1])]),
        }
    }

    /// Displacement `y − x` lifted to the representative in `(−π, π]^d`.
    pub fn displacement(&self, x: GridPoint, y: GridPoint) -> [f64; 2] {
        let n = self.n as i64;
        let lift = |a: usize, b: usize| {
            let mut d = (b as i64 - a as i64).rem_euclid(n);
            if d > n / 2 {
                d -= n;
            }
            d as f64 * self.spacing()
        };
        let h = match self.dim {
            1 => [lift(x.0[0], y.0[0]), 0.0],
            _ => [lift(x.0[0], y.0[0]), lift(x.0[1], y.0[1])],
        };
        debug_assert!(h.iter().all(|c| *c > -PI - 1e-12 && *c <= PI + 1e-12));
        h
    }
}

pub fn norm(h: [f64; 2]) -> f64 {
    h[0].hypot(h[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1, 100).is_err());
        assert!(Grid::new(3, 64).is_err());
        assert!(Grid::new(2, 64).is_ok());
    }

    #[test]
    fn frequencies_wrap_to_signed_range() {
        let g = Grid::new(1, 8).unwrap();
        let f: Vec<i64> = (0..8).map(|i| g.frequency(i)[0]).collect();
        assert_eq!(f, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn displacement_is_lifted() {
        let g = Grid::new(1, 16).unwrap();
        let dx = g.spacing();
        let h = g.displacement(GridPoint::new_1d(1), GridPoint::new_1d(15));
        assert!((h[0] + 2.0 * dx).abs() < 1e-15);
        let h = g.displacement(GridPoint::new_1d(0), GridPoint::new_1d(8));
        assert!((h[0] - PI).abs() < 1e-15);
    }

    #[test]
    fn flat_roundtrip_2d() {
        let g = Grid::new(2, 8).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat(g.point(i)), i);
        }
    }
}
