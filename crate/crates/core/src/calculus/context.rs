use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use super::word::Word;
use crate::besov::BlockSequence;
use crate::error::{Error, Result};
use crate::paraproduct::pair_op;
use crate::spectral::{spectral_derivative, DyadicPartition, Field, Grid, GridPoint, MultiIndex};

type Key = (Vec<usize>, MultiIndex, i64);

struct Memo<K, V> {
    table: RwLock<HashMap<K, V>>,
}

impl<K: Eq + Hash, V: Clone> Memo<K, V> {
    fn new() -> Self {
        Memo {
            table: RwLock::new(HashMap::new()),
        }
    }

    fn get_or(&self, key: K, compute: impl FnOnce() -> Result<V>) -> Result<V> {
        if let Some(v) = self.table.read().expect("memo lock").get(&key) {
            return Ok(v.clone());
        }
        // computed outside the lock; a racing thread produces the same value
        let v = compute()?;
        self.table
            .write()
            .expect("memo lock")
            .entry(key)
            .or_insert_with(|| v.clone());
        Ok(v)
    }
}

struct Component {
    seq: Arc<BlockSequence>,
    alpha: f64,
}

/// Component sequences bound to ids, plus memo tables for the recursively
/// defined objects `f_w^j`, `D^{k,j}_w`, `D^k_w` and `C^{k,j}_w`.
///
/// All sequences share a length `L`; block indices run over `0..L` and
/// prefix indices are clamped to `0..=L`.
pub struct CalcContext {
    partition: DyadicPartition,
    shift: usize,
    len: Option<usize>,
    components: HashMap<usize, Component>,
    words: Memo<Vec<usize>, Arc<BlockSequence>>,
    sums: Memo<Vec<usize>, Field>,
    block_derivs: Memo<Key, Field>,
    prefix_derivs: Memo<Key, Field>,
    dkj: Memo<Key, Field>,
    dk: Memo<(Vec<usize>, MultiIndex), Field>,
    ckj: Memo<Key, Field>,
}

impl CalcContext {
    pub fn new(partition: DyadicPartition, shift: usize) -> Self {
        CalcContext {
            partition,
            shift,
            len: None,
            components: HashMap::new(),
            words: Memo::new(),
            sums: Memo::new(),
            block_derivs: Memo::new(),
            prefix_derivs: Memo::new(),
            dkj: Memo::new(),
            dk: Memo::new(),
            ckj: Memo::new(),
        }
    }

    /// Bind `seq` to `id` with regularity `alpha`. Rebinding an id is not
    /// allowed because memoized values would go stale.
    pub fn bind(&mut self, id: usize, seq: BlockSequence, alpha: f64) -> Result<()> {
        if !(alpha > 0.0) {
            return Err(Error::NonpositiveRegularity(alpha));
        }
        if seq.grid() != self.partition.grid() {
            return Err(Error::InvalidArgument(format!("component {id} lives on another grid")));
        }
        if let Some(len) = self.len {
            if seq.len() != len {
                return Err(Error::InvalidArgument(format!(
                    "component {id} has {} blocks, expected {len}",
                    seq.len()
                )));
            }
        }
        if self.components.contains_key(&id) {
            return Err(Error::InvalidArgument(format!("component {id} is already bound")));
        }
        self.len = Some(seq.len());
        let seq = Arc::new(seq.with_regularity(alpha));
        self.components.insert(id, Component { seq, alpha });
        Ok(())
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    pub fn grid(&self) -> Grid {
        self.partition.grid()
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Number of blocks `L` per sequence.
    pub fn len(&self) -> usize {
        self.len.unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len.is_none()
    }

    /// The word `ids` with the regularities of the bound components.
    pub fn word(&self, ids: &[usize]) -> Result<Word> {
        let alphas = ids
            .iter()
            .map(|id| {
                self.components
                    .get(id)
                    .map(|c| c.alpha)
                    .ok_or(Error::UnboundComponent(*id))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(ids.to_vec(), alphas)
    }

    fn check(&self, w: &Word) -> Result<()> {
        for (id, a) in w.ids().iter().zip(w.alphas()) {
            match self.components.get(id) {
                Some(c) if c.alpha == *a => {}
                Some(_) => {
                    return Err(Error::InvalidArgument(format!(
                        "word {w} disagrees with the regularity bound to {id}"
                    )))
                }
                None => return Err(Error::UnboundComponent(*id)),
            }
        }
        Ok(())
    }

    /// `𝒇_w = (𝒇_{1⋯n−1}, 𝒇_n)`.
    pub fn f_word(&self, w: &Word) -> Result<Arc<BlockSequence>> {
        self.check(w)?;
        self.f_word_unchecked(w)
    }

    fn f_word_unchecked(&self, w: &Word) -> Result<Arc<BlockSequence>> {
        if w.len() == 1 {
            return Ok(self.components[&w.ids()[0]].seq.clone());
        }
        self.words.get_or(w.ids().to_vec(), || {
            let head = self.f_word_unchecked(&w.prefix(w.len() - 1))?;
            let last = &self.components[&w.ids()[w.len() - 1]].seq;
            Ok(Arc::new(pair_op(&head, last, self.shift)?))
        })
    }

    /// `f_w = Σ_j f_w^j`.
    pub fn f_sum(&self, w: &Word) -> Result<Field> {
        self.check(w)?;
        self.sums.get_or(w.ids().to_vec(), || Ok(self.f_word_unchecked(w)?.sum()))
    }

    fn block_index(&self, j: usize) -> Result<()> {
        if j >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "block index {j} is outside 0..{}",
                self.len()
            )));
        }
        Ok(())
    }

    /// `∂^k f_w^j`.
    pub fn block_derivative(&self, w: &Word, k: MultiIndex, j: usize) -> Result<Field> {
        self.check(w)?;
        self.block_index(j)?;
        self.block_derivative_unchecked(w, k, j)
    }

    fn block_derivative_unchecked(&self, w: &Word, k: MultiIndex, j: usize) -> Result<Field> {
        self.block_derivs.get_or((w.ids().to_vec(), k, j as i64), || {
            let block = self.f_word_unchecked(w)?.block(j).clone();
            if block.sup_norm() == 0.0 {
                return Ok(Field::zeros(self.grid()));
            }
            spectral_derivative(&block, k, &self.partition)
        })
    }

    /// `∂^k f_w^{<j}`, with `j` clamped to `0..=L`.
    pub fn prefix_derivative(&self, w: &Word, k: MultiIndex, j: i64) -> Result<Field> {
        self.check(w)?;
        self.prefix_derivative_unchecked(w, k, j)
    }

    fn prefix_derivative_unchecked(&self, w: &Word, k: MultiIndex, j: i64) -> Result<Field> {
        let j = j.clamp(0, self.len() as i64);
        self.prefix_derivs.get_or((w.ids().to_vec(), k, j), || {
            let terms = (0..j as usize)
                .into_par_iter()
                .map(|i| self.block_derivative_unchecked(w, k, i))
                .collect::<Result<Vec<_>>>()?;
            Ok(Field::sum(self.grid(), &terms))
        })
    }

    /// `D^{k,j}_w = ∂^k f_w^j − Σ_m Σ_{|k₁|<α_{1⋯m}, |k₂|≥α_{m+1⋯n}} C(k,k₁) D^{k₁}_{1⋯m} D^{k₂,j}_{m+1⋯n}`.
    pub fn d_kj(&self, w: &Word, k: MultiIndex, j: usize) -> Result<Field> {
        self.check(w)?;
        self.block_index(j)?;
        self.d_kj_unchecked(w, k, j)
    }

    fn d_kj_unchecked(&self, w: &Word, k: MultiIndex, j: usize) -> Result<Field> {
        if w.len() == 1 {
            return self.block_derivative_unchecked(w, k, j);
        }
        self.dkj.get_or((w.ids().to_vec(), k, j as i64), || {
            let mut acc = self.block_derivative_unchecked(w, k, j)?;
            for m in 1..w.len() {
                let (head, tail) = (w.prefix(m), w.suffix(m));
                for (k1, k2) in k.splits() {
                    if (k1.order() as f64) < head.alpha() && (k2.order() as f64) >= tail.alpha() {
                        let c = k.binomial(&k1).expect("k1 ≤ k");
                        let term = self.d_k_unchecked(&head, k1)?.mul(&self.d_kj_unchecked(&tail, k2, j)?);
                        acc = acc.add_scaled(-c, &term);
                    }
                }
            }
            Ok(acc)
        })
    }

    /// `D^k_w = Σ_j D^{k,j}_w`, defined for `|k| < α_w`.
    pub fn d_k(&self, w: &Word, k: MultiIndex) -> Result<Field> {
        self.check(w)?;
        self.d_k_unchecked(w, k)
    }

    fn d_k_unchecked(&self, w: &Word, k: MultiIndex) -> Result<Field> {
        if k.order() as f64 >= w.alpha() {
            return Err(Error::OrderOutOfRange {
                order: k.order(),
                alpha: w.alpha(),
            });
        }
        self.dk.get_or((w.ids().to_vec(), k), || {
            let terms = (0..self.len())
                .into_par_iter()
                .map(|j| self.d_kj_unchecked(w, k, j))
                .collect::<Result<Vec<_>>>()?;
            Ok(Field::sum(self.grid(), &terms))
        })
    }

    /// `C^{k,j}_w = ∂^k f_w^{<j} − 1_{|k|<α_w} D^k_w − Σ_m Σ_{|k₁|<α_{1⋯m}} C(k,k₁) D^{k₁}_{1⋯m} C^{k₂,j}_{m+1⋯n}`,
    /// with `j` clamped to `0..=L`.
    pub fn c_kj(&self, w: &Word, k: MultiIndex, j: i64) -> Result<Field> {
        self.check(w)?;
        self.c_kj_unchecked(w, k, j)
    }

    fn c_kj_unchecked(&self, w: &Word, k: MultiIndex, j: i64) -> Result<Field> {
        let j = j.clamp(0, self.len() as i64);
        self.ckj.get_or((w.ids().to_vec(), k, j), || {
            let mut acc = self.prefix_derivative_unchecked(w, k, j)?;
            if (k.order() as f64) < w.alpha() {
                acc = acc.sub(&self.d_k_unchecked(w, k)?);
            }
            for m in 1..w.len() {
                let (head, tail) = (w.prefix(m), w.suffix(m));
                for (k1, k2) in k.splits() {
                    if (k1.order() as f64) < head.alpha() {
                        let c = k.binomial(&k1).expect("k1 ≤ k");
                        let term = self.d_k_unchecked(&head, k1)?.mul(&self.c_kj_unchecked(&tail, k2, j)?);
                        acc = acc.add_scaled(-c, &term);
                    }
                }
            }
            Ok(acc)
        })
    }

    /// `T^θ_w(y, x) = Σ_{|k|<θ} (y − x)^k/k! D^k_w(x)`; `θ` must not exceed
    /// `⌈α_w⌉` since `D^k_w` only exists for `|k| < α_w`.
    pub fn t_poly(&self, w: &Word, theta: f64, x: GridPoint, y: GridPoint) -> Result<f64> {
        self.check(w)?;
        self.t_poly_unchecked(w, theta, x, y)
    }

    fn t_poly_unchecked(&self, w: &Word, theta: f64, x: GridPoint, y: GridPoint) -> Result<f64> {
        let h = self.grid().displacement(x, y);
        let mut total = 0.0;
        for k in MultiIndex::below(self.grid().dim(), theta) {
            total += k.taylor_weight(h) * self.d_k_unchecked(w, k)?.eval(x);
        }
        Ok(total)
    }

    /// `Ω_w(y, x) = f_w(y) − T_w(y, x) − Σ_m T_{1⋯m}(y, x) Ω_{m+1⋯n}(y, x)`.
    pub fn omega_word(&self, w: &Word, x: GridPoint, y: GridPoint) -> Result<f64> {
        self.check(w)?;
        let n = w.len();
        // suffix[s] = Ω over positions s..n, filled from the shortest suffix
        let mut suffix = vec![0.0; n];
        for s in (0..n).rev() {
            let u = w.slice(s, n);
            let mut v = self.sums.get_or(u.ids().to_vec(), || Ok(self.f_word_unchecked(&u)?.sum()))?.eval(y)
                - self.t_poly_unchecked(&u, u.alpha(), x, y)?;
            for m in s + 1..n {
                let head = w.slice(s, m);
                v -= self.t_poly_unchecked(&head, head.alpha(), x, y)? * suffix[m];
            }
            suffix[s] = v;
        }
        Ok(suffix[0])
    }

    /// `Ω^{θ,j}_w(y, x) = f_w^j(y) − Σ_{|k|<θ} (y − x)^k/k! D^{k,j}_w(x) − Σ_m T_{1⋯m}(y, x) Ω^{α_{m+1⋯n},j}_{m+1⋯n}(y, x)`.
    pub fn omega_theta_j(&self, w: &Word, theta: f64, j: usize, x: GridPoint, y: GridPoint) -> Result<f64> {
        Ok(self.omega_theta_j_scaled(w, theta, j, x, y)?.0)
    }

    /// [`omega_theta_j`](Self::omega_theta_j) together with the largest term
    /// that went into it, suffix terms weighted by their coefficients.
    pub fn omega_theta_j_scaled(
        &self,
        w: &Word,
        theta: f64,
        j: usize,
        x: GridPoint,
        y: GridPoint,
    ) -> Result<(f64, f64)> {
        self.check(w)?;
        self.block_index(j)?;
        let n = w.len();
        let h = self.grid().displacement(x, y);
        let dim = self.grid().dim();
        let mut suffix = vec![(0.0, 0.0); n];
        for s in (0..n).rev() {
            let u = w.slice(s, n);
            let th = if s == 0 { theta } else { u.alpha() };
            let mut v = self.f_word_unchecked(&u)?.block(j).eval(y);
            let mut scale = v.abs();
            for k in MultiIndex::below(dim, th) {
                let t = k.taylor_weight(h) * self.d_kj_unchecked(&u, k, j)?.eval(x);
                scale = scale.max(t.abs());
                v -= t;
            }
            for m in s + 1..n {
                let head = w.slice(s, m);
                let c = self.t_poly_unchecked(&head, head.alpha(), x, y)?;
                let (sv, ss) = suffix[m];
                scale = scale.max((c * sv).abs()).max(c.abs() * ss);
                v -= c * sv;
            }
            suffix[s] = (v, scale);
        }
        Ok(suffix[0])
    }
}
