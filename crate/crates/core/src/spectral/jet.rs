//! Truncated multivariate Taylor series ("jets") in one or two variables.
//!
//! A jet of order `K` at a point stores `∂^k F / k!` for every `|k| ≤ K`.
//! Arithmetic and composition with analytic scalar functions propagate the
//! coefficients exactly up to rounding, which gives the symbol derivatives
//! `∂^k ρ_j` without finite-difference error.

use super::multiindex::{factorial, MultiIndex};

#[derive(Clone, Debug)]
pub(crate) struct Jet {
    dim: usize,
    order: usize,
    c: Vec<f64>,
}

impl Jet {
    fn width(dim: usize, order: usize) -> usize {
        if dim == 1 {
            order + 1
        } else {
            (order + 1) * (order + 1)
        }
    }

    fn idx(&self, a: usize, b: usize) -> usize {
        if self.dim == 1 {
            a
        } else {
            a * (self.order + 1) + b
        }
    }

    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        let mut c = vec![0.0; Self::width(dim, order)];
        c[0] = value;
        Jet { dim, order, c }
    }

    /// The affine jet `value + slope · δ_axis`.
    pub fn variable(dim: usize, order: usize, axis: usize, value: f64, slope: f64) -> Jet {
        let mut j = Self::constant(dim, order, value);
        if order >= 1 {
            let i = if axis == 0 { j.idx(1, 0) } else { j.idx(0, 1) };
            j.c[i] = slope;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `∂^k F / k!` at the expansion point.
    pub fn coeff(&self, k: MultiIndex) -> f64 {
        if k.order() > self.order {
            return 0.0;
        }
        let comps = k.components();
        let b = if self.dim == 2 { comps[1] as usize } else { 0 };
        self.c[self.idx(comps[0] as usize, b)]
    }

    /// `∂^k F` at the expansion point.
    pub fn derivative(&self, k: MultiIndex) -> f64 {
        self.coeff(k) * k.factorial()
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (dim, order) = (self.dim, self.order);
        (0..=order).flat_map(move |a| {
            let bmax = if dim == 1 { 0 } else { order - a };
            (0..=bmax).map(move |b| (a, b))
        })
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut out = self.clone();
        for (x, y) in out.c.iter_mut().zip(&o.c) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let mut out = self.clone();
        for (x, y) in out.c.iter_mut().zip(&o.c) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn add_const(&self, v: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += v;
        out
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut out = Self::constant(self.dim, self.order, 0.0);
        let terms: Vec<_> = self.terms().collect();
        for &(a1, b1) in &terms {
            let x = self.c[self.idx(a1, b1)];
            if x == 0.0 {
                continue;
            }
            for &(a2, b2) in &terms {
                if a1 + a2 + b1 + b2 > self.order {
                    continue;
                }
                let i = out.idx(a1 + a2, b1 + b2);
                out.c[i] += x * o.c[self.idx(a2, b2)];
            }
        }
        out
    }

    /// `g(self)` where `coeffs[m] = g^{(m)}(u₀) / m!` at `u₀ = self.value()`.
    pub fn compose(&self, coeffs: &[f64]) -> Jet {
        let delta = self.add_const(-self.value());
        let top = coeffs.len().min(self.order + 1);
        let mut acc = Self::constant(self.dim, self.order, coeffs[top - 1]);
        for m in (0..top - 1).rev() {
            acc = acc.mul(&delta).add_const(coeffs[m]);
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let u = self.value();
        let coeffs: Vec<f64> = (0..=self.order)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign / u.powi(m as i32 + 1)
            })
            .collect();
        self.compose(&coeffs)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let coeffs: Vec<f64> = (0..=self.order).map(|m| e / factorial(m)).collect();
        self.compose(&coeffs)
    }

    pub fn sqrt(&self) -> Jet {
        let u = self.value();
        let s = u.sqrt();
        let mut binom = 1.0;
        let mut coeffs = Vec::with_capacity(self.order + 1);
        for m in 0..=self.order {
            if m > 0 {
                binom *= (0.5 - (m as f64 - 1.0)) / m as f64;
            }
            coeffs.push(s * binom / u.powi(m as i32));
        }
        self.compose(&coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_product_matches_closed_form() {
        // F(x, y) = exp(x·y) at (0.3, −0.7): ∂_x∂_y F = (1 + xy) e^{xy}
        let x = Jet::variable(2, 3, 0, 0.3, 1.0);
        let y = Jet::variable(2, 3, 1, -0.7, 1.0);
        let f = x.mul(&y).exp();
        let xy: f64 = 0.3 * -0.7;
        let want = (1.0 + xy) * xy.exp();
        assert!((f.derivative(MultiIndex::new(&[1, 1])) - want).abs() < 1e-14);
        // ∂_x^2 F = y^2 e^{xy}
        assert!((f.derivative(MultiIndex::new(&[2, 0])) - 0.49 * xy.exp()).abs() < 1e-14);
    }

    #[test]
    fn recip_and_sqrt_1d() {
        let x = Jet::variable(1, 4, 0, 2.0, 1.0);
        let r = x.recip();
        // d^3/dx^3 (1/x) = −6/x^4
        assert!((r.derivative(MultiIndex::d1(3)) + 6.0 / 16.0).abs() < 1e-14);
        let s = x.sqrt();
        // d^2/dx^2 sqrt(x) = −1/4 x^{−3/2}
        assert!((s.derivative(MultiIndex::d1(2)) + 0.25 * 2f64.powf(-1.5)).abs() < 1e-14);
    }
}
