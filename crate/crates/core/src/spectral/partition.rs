//! Smooth dyadic partition of unity on frequency space.
//!
//! `χ(ξ) = 1 − S(3(|ξ| − 1))` with the smooth step
//! `S(t) = h(t) / (h(t) + h(1 − t))`, `h(t) = exp(−σ/t)` for `t > 0`.
//! Then `χ = 1` on `|ξ| ≤ 1`, `χ = 0` on `|ξ| ≥ 4/3`, and
//! `ρ(ξ) = χ(ξ/2) − χ(ξ)` is supported in `1 ≤ |ξ| ≤ 8/3`. The blocks are
//! `ρ_{−1} = χ` and `ρ_j = ρ(2^{−j}·)`.

use super::grid::Grid;
use super::jet::Jet;
use super::multiindex::MultiIndex;
use crate::error::{Error, Result};

/// Outer radius of `supp χ`.
pub const CHI_OUTER: f64 = 4.0 / 3.0;
/// Outer radius of `supp ρ`.
pub const RHO_OUTER: f64 = 8.0 / 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicPartition {
    grid: Grid,
    sharpness: f64,
    k_max: usize,
    j_max: i32,
}

impl DyadicPartition {
    pub const DEFAULT_K_MAX: usize = 4;

    /// Build the partition for `grid`. `J_max` is the largest `j` whose
    /// annulus `2^j·[1, 8/3]` stays inside the Nyquist band.
    pub fn new(sharpness: f64, k_max: usize, grid: Grid) -> Result<Self> {
        if !(sharpness > 0.0 && sharpness.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step sharpness must be positive, got {sharpness}"
            )));
        }
        let half = grid.nyquist() as f64;
        let mut j_max = -1;
        while 2f64.powi(j_max + 1) * RHO_OUTER < half {
            j_max += 1;
        }
        if j_max < 4 {
            return Err(Error::GridTooSmall { n: grid.n(), j_max });
        }
        Ok(DyadicPartition {
            grid,
            sharpness,
            k_max,
            j_max,
        })
    }

    pub fn for_grid(grid: Grid) -> Result<Self> {
        Self::new(1.0, Self::DEFAULT_K_MAX, grid)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Number of sequence blocks `f^j = Δ_{j−1} f`, `j = 0..=J_max+1`.
    pub fn block_count(&self) -> usize {
        (self.j_max + 2) as usize
    }

    /// Radius up to which `Δ_{−1} + … + Δ_{J_max}` is the identity.
    pub fn resolved_radius(&self) -> f64 {
        2f64.powi(self.j_max + 1)
    }

    fn step(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            let a = (-self.sharpness / t).exp();
            let b = (-self.sharpness / (1.0 - t)).exp();
            a / (a + b)
        }
    }

    /// `χ` as a function of the radius `|ξ|`.
    pub fn chi(&self, r: f64) -> f64 {
        1.0 - self.step(3.0 * (r - 1.0))
    }

    /// `ρ` as a function of the radius.
    pub fn rho(&self, r: f64) -> f64 {
        self.chi(0.5 * r) - self.chi(r)
    }

    /// `ρ_j(ξ)` at radius `r`; `j = −1` gives `χ`.
    pub fn symbol(&self, j: i32, r: f64) -> f64 {
        if j < 0 {
            self.chi(r)
        } else {
            self.chi(r / 2f64.powi(j + 1)) - self.chi(r / 2f64.powi(j))
        }
    }

    /// Symbol of `Δ_{<m} = Δ_{−1} + … + Δ_{m−1}`, i.e. `χ(2^{−m}ξ)`.
    pub fn low_pass_symbol(&self, m: i32, r: f64) -> f64 {
        if m <= -1 {
            0.0
        } else {
            self.chi(r / 2f64.powi(m))
        }
    }

    /// Outer support radius of `ρ_j`.
    pub fn outer_radius(j: i32) -> f64 {
        if j < 0 {
            CHI_OUTER
        } else {
            RHO_OUTER * 2f64.powi(j)
        }
    }

    /// Inner radius below which `ρ_j` vanishes (0 for `j = −1`).
    pub fn inner_radius(j: i32) -> f64 {
        if j < 0 {
            0.0
        } else {
            2f64.powi(j)
        }
    }

    /// `max |χ(ξ) + Σ_{j≥0} ρ_j(ξ) − 1|` over integer frequencies `|ξ| ≤ radius`
    /// (one-dimensional radii suffice since the symbols are radial).
    pub fn unity_residual(&self, radius: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..=radius {
            let r = r as f64;
            let mut total = self.chi(r);
            let mut j = 0;
            while Self::inner_radius(j) < r.max(1.0) * 2.0 {
                total += self.symbol(j, r);
                j += 1;
            }
            worst = worst.max((total - 1.0).abs());
        }
        worst
    }

    /// Taylor jet of `ξ ↦ χ(|ξ|/scale)` at `xi`, of order `order`.
    fn chi_jet(&self, xi: [f64; 2], scale: f64, order: usize) -> Jet {
        let dim = self.grid.dim();
        let r0 = xi[0].hypot(if dim == 2 { xi[1] } else { 0.0 }) / scale;
        if r0 <= 1.0 {
            return Jet::constant(dim, order, 1.0);
        }
        if r0 >= CHI_OUTER {
            return Jet::constant(dim, order, 0.0);
        }
        let mut q = Jet::constant(dim, order, 0.0);
        for axis in 0..dim {
            let v = Jet::variable(dim, order, axis, xi[axis] / scale, 1.0 / scale);
            q = q.add(&v.mul(&v));
        }
        let t = q.sqrt().add_const(-1.0).scale(3.0);
        let h = |u: &Jet| u.recip().scale(-self.sharpness).exp();
        let a = h(&t);
        let b = h(&t.scale(-1.0).add_const(1.0));
        let step = a.mul(&a.add(&b).recip());
        step.scale(-1.0).add_const(1.0)
    }

    /// Taylor jet of `ρ_j` at frequency `xi`; coefficient `k` is `∂^k ρ_j(ξ)/k!`.
    pub(crate) fn symbol_jet(&self, j: i32, xi: [f64; 2], order: usize) -> Jet {
        if j < 0 {
            self.chi_jet(xi, 1.0, order)
        } else {
            let outer = self.chi_jet(xi, 2f64.powi(j + 1), order);
            outer.sub(&self.chi_jet(xi, 2f64.powi(j), order))
        }
    }

    /// Taylor jet of the low-pass symbol `χ(2^{−m}ξ)` of `Δ_{<m}`.
    pub(crate) fn low_pass_jet(&self, m: i32, xi: [f64; 2], order: usize) -> Jet {
        if m <= -1 {
            Jet::constant(self.grid.dim(), order, 0.0)
        } else {
            self.chi_jet(xi, 2f64.powi(m), order)
        }
    }

    /// `∂^k ρ_j(ξ)`.
    pub fn symbol_derivative(&self, j: i32, xi: [f64; 2], k: MultiIndex) -> f64 {
        self.symbol_jet(j, xi, k.order()).derivative(k)
    }
}
