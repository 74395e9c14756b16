use std::fmt;

/// A multi-index `k = (k_1, …, k_d) ∈ ℕ^d` for `d ∈ {1, 2}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    dim: u8,
    k: [u16; 2],
}

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "multi-index dimension must be 1 or 2");
        MultiIndex {
            dim: dim as u8,
            k: [0, 0],
        }
    }

    pub fn new(components: &[usize]) -> Self {
        let mut m = Self::zero(components.len());
        for (slot, &c) in m.k.iter_mut().zip(components) {
            *slot = c as u16;
        }
        m
    }

    pub fn d1(k: usize) -> Self {
        Self::new(&[k])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn components(&self) -> &[u16] {
        &self.k[..self.dim as usize]
    }

    /// `|k| = Σ k_i`.
    pub fn order(&self) -> usize {
        self.components().iter().map(|&c| c as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.order() == 0
    }

    /// `k! = Π k_i!`.
    pub fn factorial(&self) -> f64 {
        self.components().iter().map(|&c| factorial(c as usize)).product()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.components()
            .iter()
            .zip(other.components())
            .all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        let mut out = *self;
        for i in 0..self.dim() {
            out.k[i] -= other.k[i];
        }
        Some(out)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = *self;
        for i in 0..self.dim() {
            out.k[i] += other.k[i];
        }
        out
    }

    /// `(k choose ℓ) = k! / (ℓ! (k − ℓ)!)`; only defined for `ℓ ≤ k`.
    pub fn binomial(&self, sub: &MultiIndex) -> Option<f64> {
        let rest = self.checked_sub(sub)?;
        Some(self.factorial() / (sub.factorial() * rest.factorial()))
    }

    /// `h^k = Π h_i^{k_i}`.
    pub fn monomial(&self, h: [f64; 2]) -> f64 {
        self.components()
            .iter()
            .zip(h)
            .map(|(&c, hi)| hi.powi(c as i32))
            .product()
    }

    /// `h^k / k!`.
    pub fn taylor_weight(&self, h: [f64; 2]) -> f64 {
        self.monomial(h) / self.factorial()
    }

    /// All multi-indices with `|k| ≤ max_order`, ordered by `|k|` then
    /// lexicographically.
    pub fn up_to(dim: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for order in 0..=max_order {
            out.extend(Self::of_order(dim, order));
        }
        out
    }

    pub fn of_order(dim: usize, order: usize) -> Vec<MultiIndex> {
        match dim {
            1 => vec![Self::d1(order)],
            _ => (0..=order)
                .rev()
                .map(|a| Self::new(&[a, order - a]))
                .collect(),
        }
    }

    /// All multi-indices with `|k| < theta`.
    pub fn below(dim: usize, theta: f64) -> Vec<MultiIndex> {
        if theta <= 0.0 {
            return Vec::new();
        }
        let max = (theta.ceil() as usize).saturating_sub(1);
        Self::up_to(dim, max)
            .into_iter()
            .filter(|k| (k.order() as f64) < theta)
            .collect()
    }

    /// All splittings `k = k1 + k2`.
    pub fn splits(&self) -> Vec<(MultiIndex, MultiIndex)> {
        let mut out = Vec::new();
        for k1 in Self::up_to(self.dim(), self.order()) {
            if let Some(k2) = self.checked_sub(&k1) {
                out.push((k1, k2));
            }
        }
        out
    }

    /// All ordered compositions `k = k_1 + … + k_r` into `r ≥ 1` parts.
    pub fn compositions(&self, r: usize) -> Vec<Vec<MultiIndex>> {
        assert!(r >= 1);
        if r == 1 {
            return vec![vec![*self]];
        }
        let mut out = Vec::new();
        for (head, rest) in self.splits() {
            for mut tail in rest.compositions(r - 1) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }

    /// `k! / (k_1! ⋯ k_r!)`.
    pub fn multinomial(&self, parts: &[MultiIndex]) -> f64 {
        self.factorial() / parts.iter().map(|p| p.factorial()).product::<f64>()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            1 => write!(f, "{}", self.k[0]),
            _ => write!(f, "({},{})", self.k[0], self.k[1]),
        }
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_respects_strict_inequality() {
        assert_eq!(MultiIndex::below(1, 1.3).len(), 2);
        assert_eq!(MultiIndex::below(1, 0.6).len(), 1);
        assert_eq!(MultiIndex::below(1, 2.0).len(), 2);
        // |k| ∈ {0, 1, 2} in two dimensions: 1 + 2 + 3
        assert_eq!(MultiIndex::below(2, 2.3).len(), 6);
        assert!(MultiIndex::below(1, 0.0).is_empty());
    }

    #[test]
    fn binomial_and_multinomial() {
        let k = MultiIndex::new(&[3, 2]);
        let l = MultiIndex::new(&[1, 1]);
        assert_eq!(k.binomial(&l), Some(6.0));
        assert_eq!(l.binomial(&k), None);
        let parts = [MultiIndex::new(&[1, 0]), MultiIndex::new(&[2, 2])];
        assert_eq!(k.multinomial(&parts), 3.0);
    }

    #[test]
    fn compositions_count() {
        // compositions of 2 into 3 nonnegative parts: C(4,2) = 6
        assert_eq!(MultiIndex::d1(2).compositions(3).len(), 6);
        for parts in MultiIndex::new(&[1, 2]).compositions(2) {
            assert_eq!(parts[0].add(&parts[1]), MultiIndex::new(&[1, 2]));
        }
    }

    #[test]
    fn taylor_weight_matches_definition() {
        let k = MultiIndex::new(&[2, 1]);
        let w = k.taylor_weight([0.5, -2.0]);
        assert!((w - 0.25 * -2.0 / 2.0).abs() < 1e-15);
    }
}
