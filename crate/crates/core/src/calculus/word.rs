use std::fmt;

use crate::besov::is_near_integer;
use crate::error::{Error, Result};

/// A word `w = i₁⋯iₙ` of component ids with their regularities.
///
/// Construction rejects any contiguous run whose regularities sum to an
/// integer, so every subword used by the recursions is admissible.
#[derive(Clone, PartialEq)]
pub struct Word {
    ids: Vec<usize>,
    alphas: Vec<f64>,
}

impl Word {
    pub fn new(ids: Vec<usize>, alphas: Vec<f64>) -> Result<Self> {
        if ids.is_empty() || ids.len() != alphas.len() {
            return Err(Error::InvalidArgument(
                "a word needs at least one component and one regularity per component".into(),
            ));
        }
        for &a in &alphas {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::NonpositiveRegularity(a));
            }
        }
        for start in 0..alphas.len() {
            let mut total = 0.0;
            for a in &alphas[start..] {
                total += a;
                if is_near_integer(total) {
                    return Err(Error::IntegerRegularity(total));
                }
            }
        }
        Ok(Word { ids, alphas })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `α_w = α_{i₁} + ⋯ + α_{iₙ}`.
    pub fn alpha(&self) -> f64 {
        self.alphas.iter().sum()
    }

    /// The contiguous subword of positions `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Word {
        assert!(start < end && end <= self.len(), "empty or out-of-range subword");
        Word {
            ids: self.ids[start..end].to_vec(),
            alphas: self.alphas[start..end].to_vec(),
        }
    }

    /// First `m` letters, `1⋯m`.
    pub fn prefix(&self, m: usize) -> Word {
        self.slice(0, m)
    }

    /// Letters after the first `m`, `(m+1)⋯n`.
    pub fn suffix(&self, m: usize) -> Word {
        self.slice(m, self.len())
    }

    pub fn last(&self) -> Word {
        self.suffix(self.len() - 1)
    }

    /// All ways to cut the word into `r` nonempty contiguous pieces.
    pub fn partitions(&self, r: usize) -> Vec<Vec<Word>> {
        fn cuts(start: usize, n: usize, r: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if r == 1 {
                acc.push(n);
                out.push(acc.clone());
                acc.pop();
                return;
            }
            for end in start + 1..=n - (r - 1) {
                acc.push(end);
                cuts(end, n, r - 1, acc, out);
                acc.pop();
            }
        }
        let mut ends = Vec::new();
        if r >= 1 && r <= self.len() {
            cuts(0, self.len(), r, &mut Vec::new(), &mut ends);
        }
        ends.into_iter()
            .map(|e| {
                let mut start = 0;
                e.into_iter()
                    .map(|end| {
                        let w = self.slice(start, end);
                        start = end;
                        w
                    })
                    .collect()
            })
            .collect()
    }

    /// Compact label: ids concatenated when all are single digits,
    /// dash-separated otherwise.
    pub fn label(&self) -> String {
        let sep = if self.ids.iter().all(|&i| i < 10) { "" } else { "-" };
        self.ids
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({}; α={:?})", self.label(), self.alphas)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_integer_partial_sums() {
        assert!(Word::new(vec![1, 2, 3], vec![0.9, 0.8, 0.6]).is_ok());
        // 0.4 + 0.6 = 1 in the middle of the word
        assert!(matches!(
            Word::new(vec![1, 2, 3], vec![0.3, 0.4, 0.6]),
            Err(Error::IntegerRegularity(_))
        ));
        assert!(matches!(
            Word::new(vec![1], vec![2.0]),
            Err(Error::IntegerRegularity(_))
        ));
        assert!(matches!(
            Word::new(vec![1, 2], vec![0.5, -0.1]),
            Err(Error::NonpositiveRegularity(_))
        ));
    }

    #[test]
    fn partitions_cover_the_word() {
        let w = Word::new(vec![1, 2, 3, 4], vec![1.3, 0.4, 0.5, 0.7]).unwrap();
        assert_eq!(w.partitions(1).len(), 1);
        assert_eq!(w.partitions(2).len(), 3);
        assert_eq!(w.partitions(3).len(), 3);
        assert_eq!(w.partitions(4).len(), 1);
        for parts in w.partitions(3) {
            let ids: Vec<usize> = parts.iter().flat_map(|p| p.ids().to_vec()).collect();
            assert_eq!(ids, vec![1, 2, 3, 4]);
        }
        assert!((w.suffix(1).alpha() - 1.6).abs() < 1e-12);
        assert_eq!(w.prefix(2).label(), "12");
        assert_eq!(Word::new(vec![100, 4], vec![0.6, 0.7]).unwrap().label(), "100-4");
    }
}
