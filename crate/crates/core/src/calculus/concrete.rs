use super::context::CalcContext;
use super::word::Word;
use crate::besov::{BlockSequence, Regularity, TaylorExpansion};
use crate::error::{Error, Result};
use crate::paraproduct::{mpl, paraproduct};
use crate::spectral::{
    lp_block, lp_decompose, low_pass, moment_block, spectral_derivative, DyadicPartition, Field,
    GridPoint, MultiIndex,
};

fn check_regularities(values: &[f64]) -> Result<()> {
    for &a in values {
        Regularity::new(a)?;
    }
    Ok(())
}

fn weighted_sum(terms: &[(MultiIndex, Field)], x: GridPoint, h: [f64; 2]) -> f64 {
    terms.iter().map(|(k, d)| k.taylor_weight(h) * d.eval(x)).sum()
}

/// `D^k(f, g) = ∂^k(f ⩕ g) − Σ_{|k₁|<α, |k₂|≥β} C(k,k₁) ∂^{k₁}f ∂^{k₂}g` for `|k| < α + β`.
pub fn d2(f: &Field, g: &Field, k: MultiIndex, alpha: f64, beta: f64, p: &DyadicPartition) -> Result<Field> {
    check_regularities(&[alpha, beta, alpha + beta])?;
    let fg = paraproduct(f, g, p)?;
    d2_with_product(&fg, f, g, k, alpha, beta, p)
}

fn d2_with_product(
    fg: &Field,
    f: &Field,
    g: &Field,
    k: MultiIndex,
    alpha: f64,
    beta: f64,
    p: &DyadicPartition,
) -> Result<Field> {
    if k.order() as f64 >= alpha + beta {
        return Err(Error::OrderOutOfRange {
            order: k.order(),
            alpha: alpha + beta,
        });
    }
    let mut acc = spectral_derivative(fg, k, p)?;
    for (k1, k2) in k.splits() {
        if (k1.order() as f64) < alpha && (k2.order() as f64) >= beta {
            let term = spectral_derivative(f, k1, p)?.mul(&spectral_derivative(g, k2, p)?);
            acc = acc.add_scaled(-k.binomial(&k1).expect("k1 ≤ k"), &term);
        }
    }
    Ok(acc)
}

/// The second-order remainder
/// `Ω(y, x) = (f ⩕ g)(y) − Σ_{|k|<α+β} h^k/k! D^k(f, g)(x) − Σ_{|k|<α} h^k/k! ∂^k f(x) Ω^β(g)(y, x)`
/// with its coefficient fields precomputed.
#[derive(Clone, Debug)]
pub struct Omega2 {
    alpha: f64,
    beta: f64,
    product: Field,
    coefficients: Vec<(MultiIndex, Field)>,
    f: TaylorExpansion,
    g: TaylorExpansion,
}

impl Omega2 {
    pub fn new(f: &Field, g: &Field, alpha: f64, beta: f64, p: &DyadicPartition) -> Result<Self> {
        check_regularities(&[alpha, beta, alpha + beta])?;
        let product = paraproduct(f, g, p)?;
        let coefficients = MultiIndex::below(f.grid().dim(), alpha + beta)
            .into_iter()
            .map(|k| Ok((k, d2_with_product(&product, f, g, k, alpha, beta, p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Omega2 {
            alpha,
            beta,
            product,
            coefficients,
            f: TaylorExpansion::new(f, alpha, p)?,
            g: TaylorExpansion::new(g, beta, p)?,
        })
    }

    /// `f ⩕ g`.
    pub fn product(&self) -> &Field {
        &self.product
    }

    /// `D^k(f, g)` for `|k| < α + β`.
    pub fn coefficients(&self) -> &[(MultiIndex, Field)] {
        &self.coefficients
    }

    pub fn eval(&self, x: GridPoint, y: GridPoint) -> f64 {
        let h = self.product.grid().displacement(x, y);
        self.product.eval(y)
            - weighted_sum(&self.coefficients, x, h)
            - self.f.polynomial(self.alpha, x, h) * self.g.remainder(x, y)
    }

    /// `(f ⩕ g)(y) − (f ⩕ g)(x) − f(x)(g(y) − g(x))`, the form the remainder
    /// takes when `α + β < 1`.
    pub fn eval_first_order(&self, x: GridPoint, y: GridPoint) -> Result<f64> {
        if self.alpha + self.beta > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "the first-order form needs α + β < 1, got {}",
                self.alpha + self.beta
            )));
        }
        let fg = &self.product;
        let f = self.f.derivative(MultiIndex::zero(fg.grid().dim())).expect("f itself");
        let g = self.g.derivative(MultiIndex::zero(fg.grid().dim())).expect("g itself");
        Ok(fg.eval(y) - fg.eval(x) - f.eval(x) * (g.eval(y) - g.eval(x)))
    }
}

pub fn omega2(
    f: &Field,
    g: &Field,
    alpha: f64,
    beta: f64,
    x: GridPoint,
    y: GridPoint,
    p: &DyadicPartition,
) -> Result<f64> {
    Ok(Omega2::new(f, g, alpha, beta, p)?.eval(x, y))
}

/// `R^j = Δ_{j−1}(f ⩕ g) − Σ_{|k|<α} Δ_{<j−2}(∂^k f) Δ^k_{j−1} g` for
/// `j = 0..=J_max+1`, tagged `α + β`.
pub fn r_seq(f: &Field, g: &Field, alpha: f64, beta: f64, p: &DyadicPartition) -> Result<BlockSequence> {
    check_regularities(&[alpha, beta, alpha + beta])?;
    let fg = paraproduct(f, g, p)?;
    r_seq_with_product(&fg, f, g, alpha, p).map(|r| r.with_regularity(alpha + beta))
}

fn r_seq_with_product(fg: &Field, f: &Field, g: &Field, alpha: f64, p: &DyadicPartition) -> Result<BlockSequence> {
    let ks = MultiIndex::below(f.grid().dim(), alpha);
    let df = ks
        .iter()
        .map(|&k| spectral_derivative(f, k, p))
        .collect::<Result<Vec<_>>>()?;
    let blocks = (0..p.block_count() as i32)
        .map(|j| {
            let mut acc = lp_block(fg, j - 1, p)?;
            for (k, dfk) in ks.iter().zip(&df) {
                let low = low_pass(dfk, j - 2, p)?;
                if low.sup_norm() > 0.0 {
                    acc = acc.sub(&low.mul(&moment_block(g, j - 1, *k, p)?));
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockSequence::from_blocks(blocks))
}

#[derive(Clone, Debug)]
enum Inner {
    Resonant(Omega2),
    Moment(TaylorExpansion),
}

impl Inner {
    fn eval(&self, x: GridPoint, y: GridPoint) -> f64 {
        match self {
            Inner::Resonant(o) => o.eval(x, y),
            Inner::Moment(t) => t.remainder(x, y),
        }
    }
}

const ID_F: usize = 100;
const ID_G: usize = 200;
const ID_R: usize = 3;
const ID_H: usize = 4;

/// The third-order remainder of `(f ⩕ g) ⩕ h`.
///
/// [`Omega3::eval`] uses the closed form in terms of `D^ℓ(f, g, h)`,
/// `Ω_ℓ^{β,γ}(g, h)`, `D^k(f, g)` and `Ω^γ(h)`; [`Omega3::eval_words`]
/// rebuilds the same quantity as `Σ_k Ω_{1^{(k)}2^{(k)}4} + Ω_{34}` from the
/// sequences `1^{(k)} = {Δ_{j−1}∂^k f}`, `2^{(k)} = {Δ^k_{j−1} g}`,
/// `3 = {R^j}` and `4 = {Δ_{j−1} h}`.
pub struct Omega3 {
    alpha: f64,
    triple: Field,
    coefficients: Vec<(MultiIndex, Field)>,
    f: TaylorExpansion,
    inner: Vec<(MultiIndex, Inner)>,
    pair: Vec<(MultiIndex, Field)>,
    h: TaylorExpansion,
    context: CalcContext,
    words: Vec<Word>,
}

impl Omega3 {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        f: &Field,
        g: &Field,
        h: &Field,
        alpha: f64,
        beta: f64,
        gamma: f64,
        p: &DyadicPartition,
    ) -> Result<Self> {
        check_regularities(&[alpha, beta, gamma, alpha + beta, beta + gamma, alpha + beta + gamma])?;
        let dim = f.grid().dim();
        let fg = paraproduct(f, g, p)?;
        let triple = paraproduct(&fg, h, p)?;

        let mut context = CalcContext::new(p.clone(), 1);
        let mut words = Vec::new();
        for (i, k) in MultiIndex::below(dim, alpha).into_iter().enumerate() {
            let a = alpha - k.order() as f64;
            let b = beta + k.order() as f64;
            context.bind(ID_F + i, lp_decompose(&spectral_derivative(f, k, p)?, p)?, a)?;
            let moments = (0..p.block_count() as i32)
                .map(|j| moment_block(g, j - 1, k, p))
                .collect::<Result<Vec<_>>>()?;
            context.bind(ID_G + i, BlockSequence::from_blocks(moments), b)?;
        }
        context.bind(ID_R, r_seq_with_product(&fg, f, g, alpha, p)?, alpha + beta)?;
        context.bind(ID_H, lp_decompose(h, p)?, gamma)?;
        for i in 0..MultiIndex::below(dim, alpha).len() {
            words.push(context.word(&[ID_F + i, ID_G + i, ID_H])?);
        }
        words.push(context.word(&[ID_R, ID_H])?);

        let total = alpha + beta + gamma;
        let mut coefficients = Vec::new();
        for l in MultiIndex::below(dim, total) {
            let mut acc = Field::zeros(f.grid());
            for w in &words {
                acc = acc.add(&context.d_k(w, l)?);
            }
            coefficients.push((l, acc));
        }

        let mut inner = Vec::new();
        for l in MultiIndex::below(dim, alpha) {
            let term = if l.is_zero() {
                Inner::Resonant(Omega2::new(g, h, beta, gamma, p)?)
            } else {
                let theta = beta + gamma + l.order() as f64;
                Inner::Moment(TaylorExpansion::new(&mpl(g, h, l, p)?, theta, p)?)
            };
            inner.push((l, term));
        }

        let pair = MultiIndex::below(dim, alpha + beta)
            .into_iter()
            .map(|k| Ok((k, d2_with_product(&fg, f, g, k, alpha, beta, p)?)))
            .collect::<Result<Vec<_>>>()?;

        Ok(Omega3 {
            alpha,
            triple,
            coefficients,
            f: TaylorExpansion::new(f, alpha, p)?,
            inner,
            pair,
            h: TaylorExpansion::new(h, gamma, p)?,
            context,
            words,
        })
    }

    /// `(f ⩕ g) ⩕ h`.
    pub fn product(&self) -> &Field {
        &self.triple
    }

    /// `D^ℓ(f, g, h)` for `|ℓ| < α + β + γ`.
    pub fn coefficients(&self) -> &[(MultiIndex, Field)] {
        &self.coefficients
    }

    /// `D^ℓ(f, g, h)(x)`.
    pub fn coefficients_at(&self, x: GridPoint) -> Vec<(MultiIndex, f64)> {
        self.coefficients.iter().map(|(l, d)| (*l, d.eval(x))).collect()
    }

    /// The word context behind [`Omega3::eval_words`].
    pub fn context(&self) -> &CalcContext {
        &self.context
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn eval(&self, x: GridPoint, y: GridPoint) -> f64 {
        let disp = self.triple.grid().displacement(x, y);
        let dim = self.triple.grid().dim();
        let mut v = self.triple.eval(y) - weighted_sum(&self.coefficients, x, disp);
        for (l, inner) in &self.inner {
            let mut taylor = 0.0;
            for k in MultiIndex::below(dim, self.alpha) {
                let kl = k.add(l);
                if (kl.order() as f64) < self.alpha {
                    let d = self.f.derivative(kl).expect("stored derivative");
                    taylor += k.taylor_weight(disp) * d.eval(x);
                }
            }
            if taylor != 0.0 {
                v -= taylor * inner.eval(x, y);
            }
        }
        v - weighted_sum(&self.pair, x, disp) * self.h.remainder(x, y)
    }

    pub fn eval_words(&self, x: GridPoint, y: GridPoint) -> Result<f64> {
        let mut total = 0.0;
        for w in &self.words {
            total += self.context.omega_word(w, x, y)?;
        }
        Ok(total)
    }
}

/// `Ω(y, x)` of `(f ⩕ g) ⩕ h` together with the coefficients `D^ℓ(f, g, h)(x)`.
#[allow(clippy::too_many_arguments)]
pub fn omega3(
    f: &Field,
    g: &Field,
    h: &Field,
    alpha: f64,
    beta: f64,
    gamma: f64,
    x: GridPoint,
    y: GridPoint,
    p: &DyadicPartition,
) -> Result<(f64, Vec<(MultiIndex, f64)>)> {
    let o = Omega3::new(f, g, h, alpha, beta, gamma, p)?;
    Ok((o.eval(x, y), o.coefficients_at(x)))
}
