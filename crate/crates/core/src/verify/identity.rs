use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sampling::random_pairs;
use crate::besov::{synth_octave, TaylorExpansion};
use crate::calculus::{CalcContext, Omega3, Word};
use crate::error::{Error, Result};
use crate::paraproduct::{paraproduct, resonant};
use crate::spectral::{lp_decompose, DyadicPartition, Field, Grid, GridPoint, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    Wdofd,
    ExplicitC,
    Lmm1,
    Lmm2,
    Bony,
    Reorg,
    Leibniz,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::Wdofd,
        IdentityId::ExplicitC,
        IdentityId::Lmm1,
        IdentityId::Lmm2,
        IdentityId::Bony,
        IdentityId::Reorg,
        IdentityId::Leibniz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Wdofd => "wdofd",
            IdentityId::ExplicitC => "explicit_c",
            IdentityId::Lmm1 => "lmm1",
            IdentityId::Lmm2 => "lmm2",
            IdentityId::Bony => "bony",
            IdentityId::Reorg => "reorg",
            IdentityId::Leibniz => "leibniz",
        }
    }

    /// Default number of letters exercised by the identity.
    pub fn default_letters(self) -> usize {
        match self {
            IdentityId::Wdofd | IdentityId::ExplicitC | IdentityId::Lmm1 | IdentityId::Lmm2 => 3,
            IdentityId::Bony | IdentityId::Leibniz => 2,
            IdentityId::Reorg => 3,
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

/// Inputs of an identity run: `letters` synthetic components with the given
/// regularities, built from [`synth_octave`] at consecutive seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityParams {
    pub dim: usize,
    pub grid: usize,
    pub regularities: Vec<f64>,
    pub shift: usize,
    pub seed: u64,
    pub pairs: usize,
    pub max_order: usize,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-8;

impl IdentityParams {
    /// Desk-scale defaults for a word of `letters` components.
    pub fn for_letters(letters: usize) -> Result<Self> {
        let all = [1.3, 0.4, 0.5, 0.7];
        if !(1..=all.len()).contains(&letters) {
            return Err(Error::InvalidArgument(format!(
                "default regularities exist for 1 to 4 letters, got {letters}"
            )));
        }
        Ok(IdentityParams {
            dim: 1,
            grid: 1 << 14,
            regularities: all[..letters].to_vec(),
            shift: 1,
            seed: 1,
            pairs: 100,
            max_order: 2,
        })
    }

    pub fn partition(&self) -> Result<DyadicPartition> {
        DyadicPartition::for_grid(Grid::new(self.dim, self.grid)?)
    }
}

/// Bind `Δ`-decompositions of synthetic components `1, …, n` to a fresh
/// context.
pub fn build_context(params: &IdentityParams) -> Result<CalcContext> {
    let p = params.partition()?;
    let top = p.j_max() - 1;
    let mut ctx = CalcContext::new(p.clone(), params.shift);
    for (i, &a) in params.regularities.iter().enumerate() {
        let f = synth_octave(a, component_seed(params.seed, i), top, &p)?;
        ctx.bind(i + 1, lp_decompose(&f, &p)?, a)?;
    }
    Ok(ctx)
}

pub(crate) fn component_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub word: String,
    pub regularities: Vec<f64>,
    pub shift: usize,
    pub checks: usize,
    pub max_residual: f64,
    pub scale: f64,
}

impl IdentityReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_residual <= tolerance
    }
}

/// Running maximum of `|lhs − rhs| / max|term|`.
#[derive(Default)]
struct Residual {
    worst: f64,
    scale: f64,
    checks: usize,
}

impl Residual {
    fn record(&mut self, diff: f64, scale: f64) {
        self.checks += 1;
        self.scale = self.scale.max(scale);
        if scale > 0.0 {
            self.worst = self.worst.max(diff / scale);
        } else if diff > 0.0 {
            self.worst = f64::INFINITY;
        }
    }
}

/// A sum that remembers the size of its largest summand.
struct Terms<T> {
    total: T,
    largest: f64,
}

impl Terms<Field> {
    fn new(grid: Grid) -> Self {
        Terms {
            total: Field::zeros(grid),
            largest: 0.0,
        }
    }

    fn add(&mut self, c: f64, t: &Field) {
        self.largest = self.largest.max(c.abs() * t.sup_norm());
        self.total = self.total.add_scaled(c, t);
    }
}

impl Terms<f64> {
    fn scalar() -> Self {
        Terms {
            total: 0.0,
            largest: 0.0,
        }
    }

    fn add(&mut self, t: f64) {
        self.largest = self.largest.max(t.abs());
        self.total += t;
    }
}

/// Evaluate both sides of the identity on the configured sample set.
pub fn run_identity_suite(ctx: &CalcContext, id: IdentityId, params: &IdentityParams) -> Result<IdentityReport> {
    let ids: Vec<usize> = (1..=params.regularities.len()).collect();
    let w = ctx.word(&ids)?;
    let needs = |n: usize| {
        if w.len() < n {
            Err(Error::InvalidArgument(format!("identity {id} needs at least {n} letters")))
        } else {
            Ok(())
        }
    };
    let mut res = Residual::default();
    match id {
        IdentityId::Wdofd => {
            needs(2)?;
            wdofd(ctx, &w, params.max_order, &mut res)?
        }
        IdentityId::ExplicitC => {
            needs(2)?;
            explicit_c(ctx, &w, params.max_order, &mut res)?
        }
        IdentityId::Lmm1 => {
            needs(2)?;
            lmm1(ctx, &w, &random_pairs(ctx.grid(), params.pairs, params.seed), &mut res)?
        }
        IdentityId::Lmm2 => {
            needs(2)?;
            lmm2(ctx, &w, &random_pairs(ctx.grid(), params.pairs, params.seed), &mut res)?
        }
        IdentityId::Bony => {
            needs(2)?;
            bony(ctx, &w, &mut res)?
        }
        IdentityId::Reorg => {
            needs(3)?;
            reorg(ctx, &w, &random_pairs(ctx.grid(), params.pairs, params.seed), &mut res)?
        }
        IdentityId::Leibniz => {
            needs(2)?;
            leibniz(ctx, &w, &random_pairs(ctx.grid(), params.pairs, params.seed), &mut res)?
        }
    }
    Ok(IdentityReport {
        identity: id.name().to_string(),
        word: w.label(),
        regularities: w.alphas().to_vec(),
        shift: ctx.shift(),
        checks: res.checks,
        max_residual: res.worst,
        scale: res.scale,
    })
}

/// `floor` is the size of the largest term in the definition of `lhs`.
fn field_check(res: &mut Residual, lhs: &Field, rhs: &Terms<Field>, floor: f64) {
    let scale = lhs.sup_norm().max(rhs.largest).max(floor);
    res.record(lhs.max_abs_diff(&rhs.total), scale);
}

fn scalar_check(res: &mut Residual, lhs: f64, rhs: &Terms<f64>) {
    res.record((lhs - rhs.total).abs(), lhs.abs().max(rhs.largest));
}

fn orders(w: &Word, max_order: usize) -> usize {
    max_order.max(w.alpha().ceil() as usize)
}

/// `D^{k,j}_w` against its expansion over contiguous partitions of `w`.
fn wdofd(ctx: &CalcContext, w: &Word, max_order: usize, res: &mut Residual) -> Result<()> {
    let n = w.len();
    let (head, last) = (w.prefix(n - 1), w.last());
    let shift = ctx.shift() as i64;
    for k in MultiIndex::up_to(ctx.grid().dim(), max_order) {
        for j in 0..ctx.len() {
            let lhs = ctx.d_kj(w, k, j)?;
            let mut rhs = Terms::new(ctx.grid());
            for (k1, k2) in k.splits() {
                let t = ctx.c_kj(&head, k1, j as i64 - shift)?.mul(&ctx.block_derivative(&last, k2, j)?);
                rhs.add(k.binomial(&k1).expect("k1 ≤ k"), &t);
            }
            for r in 2..=n {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                for parts in w.partitions(r) {
                    for ks in k.compositions(r) {
                        if parts.iter().zip(&ks).any(|(p, ki)| ki.order() as f64 >= p.alpha()) {
                            continue;
                        }
                        let mut t = ctx.d_kj(&parts[r - 1], ks[r - 1], j)?;
                        for (p, ki) in parts[..r - 1].iter().zip(&ks) {
                            t = t.mul(&ctx.d_k(p, *ki)?);
                        }
                        rhs.add(sign * k.multinomial(&ks), &t);
                    }
                }
            }
            let floor = ctx.block_derivative(w, k, j)?.sup_norm();
            field_check(res, &lhs, &rhs, floor);
        }
    }
    Ok(())
}

/// `C^{k,j}_w` as a tail sum (`|k| < α_w`) or a head sum (`|k| ≥ α_w`) of
/// `C^{k₁,i−N}_{1⋯n−1} ∂^{k₂} f_n^i`.
fn explicit_c(ctx: &CalcContext, w: &Word, max_order: usize, res: &mut Residual) -> Result<()> {
    let n = w.len();
    let (head, last) = (w.prefix(n - 1), w.last());
    let shift = ctx.shift() as i64;
    let max = orders(w, max_order).min(ctx.partition().k_max());
    for k in MultiIndex::up_to(ctx.grid().dim(), max) {
        let below = (k.order() as f64) < w.alpha();
        // products C^{k₁,i−N} ∂^{k₂} f_n^i, one per block i
        let mut pieces = Vec::with_capacity(ctx.len());
        for i in 0..ctx.len() {
            let mut piece = Terms::new(ctx.grid());
            for (k1, k2) in k.splits() {
                let t = ctx.c_kj(&head, k1, i as i64 - shift)?.mul(&ctx.block_derivative(&last, k2, i)?);
                piece.add(k.binomial(&k1).expect("k1 ≤ k"), &t);
            }
            pieces.push(piece);
        }
        for j in 0..=ctx.len() {
            let lhs = ctx.c_kj(w, k, j as i64)?;
            let mut rhs = Terms::new(ctx.grid());
            let range = if below { j..ctx.len() } else { 0..j };
            for piece in &pieces[range] {
                rhs.add(if below { -1.0 } else { 1.0 }, &piece.total);
                rhs.largest = rhs.largest.max(piece.largest);
            }
            let mut floor = ctx.prefix_derivative(w, k, j as i64)?.sup_norm();
            if below {
                floor = floor.max(ctx.d_k(w, k)?.sup_norm());
            }
            field_check(res, &lhs, &rhs, floor);
        }
    }
    Ok(())
}

fn thetas(w: &Word) -> [f64; 2] {
    [w.alpha(), w.alpha() + 1.0]
}

/// `Ω^{θ,j}_w = Ω^θ(f_w^j) − Σ_m Σ_{|k|<α_{1⋯m}} h^k/k! D^k_{1⋯m}(x) Ω^{θ−|k|,j}_{m+1⋯n}`.
fn lmm1(ctx: &CalcContext, w: &Word, pairs: &[(GridPoint, GridPoint)], res: &mut Residual) -> Result<()> {
    let dim = ctx.grid().dim();
    let n = w.len();
    for theta in thetas(w) {
        for j in 0..ctx.len() {
            for &(x, y) in pairs {
                let h = ctx.grid().displacement(x, y);
                let (lhs, floor) = ctx.omega_theta_j_scaled(w, theta, j, x, y)?;
                let mut rhs = Terms::scalar();
                rhs.largest = floor;
                rhs.add(ctx.f_word(w)?.block(j).eval(y));
                for k in MultiIndex::below(dim, theta) {
                    rhs.add(-k.taylor_weight(h) * ctx.block_derivative(w, k, j)?.eval(x));
                }
                for m in 1..n {
                    let (pre, suf) = (w.prefix(m), w.suffix(m));
                    for k in MultiIndex::below(dim, pre.alpha()) {
                        let c = -k.taylor_weight(h) * ctx.d_k(&pre, k)?.eval(x);
                        let (inner, inner_scale) = ctx.omega_theta_j_scaled(&suf, theta - k.order() as f64, j, x, y)?;
                        rhs.largest = rhs.largest.max(c.abs() * inner_scale);
                        rhs.add(c * inner);
                    }
                }
                scalar_check(res, lhs, &rhs);
            }
        }
    }
    Ok(())
}

/// `Ω^{θ,j}_w = Ω^{θ,<j−N}_{1⋯n−1} f_n^j + Σ_{|k|<θ} h^k/k! C^{k,j−N}_{1⋯n−1}(x) Ω^{θ−|k|}(f_n^j)`.
fn lmm2(ctx: &CalcContext, w: &Word, pairs: &[(GridPoint, GridPoint)], res: &mut Residual) -> Result<()> {
    let dim = ctx.grid().dim();
    let n = w.len();
    let (head, last) = (w.prefix(n - 1), w.last());
    let shift = ctx.shift() as i64;
    let last_seq = ctx.f_word(&last)?;
    for theta in thetas(w) {
        for &(x, y) in pairs {
            let h = ctx.grid().displacement(x, y);
            let head_blocks = (0..ctx.len())
                .map(|i| ctx.omega_theta_j_scaled(&head, theta, i, x, y))
                .collect::<Result<Vec<_>>>()?;
            for j in 0..ctx.len() {
                let (lhs, floor) = ctx.omega_theta_j_scaled(w, theta, j, x, y)?;
                let mut rhs = Terms::scalar();
                rhs.largest = floor;
                let end = (j as i64 - shift).clamp(0, ctx.len() as i64) as usize;
                let fj = last_seq.block(j).eval(y);
                for &(_, s) in &head_blocks[..end] {
                    rhs.largest = rhs.largest.max(s * fj.abs());
                }
                let low: f64 = head_blocks[..end].iter().map(|b| b.0).sum();
                rhs.add(low * fj);
                for k in MultiIndex::below(dim, theta) {
                    let c = k.taylor_weight(h) * ctx.c_kj(&head, k, j as i64 - shift)?.eval(x);
                    let (inner, inner_scale) = ctx.omega_theta_j_scaled(&last, theta - k.order() as f64, j, x, y)?;
                    rhs.largest = rhs.largest.max(c.abs() * inner_scale);
                    rhs.add(c * inner);
                }
                scalar_check(res, lhs, &rhs);
            }
        }
    }
    Ok(())
}

/// `f g = f ⩕ g + g ⩕ f + f ⊙ g` for the first two components.
fn bony(ctx: &CalcContext, w: &Word, res: &mut Residual) -> Result<()> {
    let p = ctx.partition();
    let f = ctx.f_sum(&w.slice(0, 1))?;
    let g = ctx.f_sum(&w.slice(1, 2))?;
    let lhs = f.mul(&g);
    let mut rhs = Terms::new(ctx.grid());
    rhs.add(1.0, &paraproduct(&f, &g, p)?);
    rhs.add(1.0, &paraproduct(&g, &f, p)?);
    rhs.add(1.0, &resonant(&f, &g, p)?);
    field_check(res, &lhs, &rhs, 0.0);
    Ok(())
}

/// The closed-form triple remainder against `Σ_k Ω_{1^{(k)}2^{(k)}4} + Ω_{34}`.
fn reorg(ctx: &CalcContext, w: &Word, pairs: &[(GridPoint, GridPoint)], res: &mut Residual) -> Result<()> {
    let a = w.alphas();
    let fields = (0..3)
        .map(|i| ctx.f_sum(&w.slice(i, i + 1)))
        .collect::<Result<Vec<_>>>()?;
    let o = Omega3::new(&fields[0], &fields[1], &fields[2], a[0], a[1], a[2], ctx.partition())?;
    for &(x, y) in pairs {
        let lhs = o.eval(x, y);
        let mut rhs = Terms::scalar();
        for word in o.words() {
            rhs.add(o.context().omega_word(word, x, y)?);
        }
        rhs.largest = rhs.largest.max(o.product().eval(y).abs());
        scalar_check(res, lhs, &rhs);
    }
    Ok(())
}

/// `Ω^θ(fg) = Ω^θ(f) g(y) + Σ_{|k|<θ} h^k/k! ∂^k f(x) Ω^{θ−|k|}(g)`.
fn leibniz(ctx: &CalcContext, w: &Word, pairs: &[(GridPoint, GridPoint)], res: &mut Residual) -> Result<()> {
    let p = ctx.partition();
    let dim = ctx.grid().dim();
    let f = ctx.f_sum(&w.slice(0, 1))?;
    let g = ctx.f_sum(&w.slice(1, 2))?;
    let fg = f.mul(&g);
    for theta in [w.alphas()[0], w.slice(0, 2).alpha(), w.slice(0, 2).alpha() + 1.0] {
        let tfg = TaylorExpansion::new(&fg, theta, p)?;
        let tf = TaylorExpansion::new(&f, theta, p)?;
        let tg = TaylorExpansion::new(&g, theta, p)?;
        for &(x, y) in pairs {
            let h = ctx.grid().displacement(x, y);
            let lhs = tfg.remainder(x, y);
            let mut rhs = Terms::scalar();
            rhs.add(tf.remainder(x, y) * g.eval(y));
            for k in MultiIndex::below(dim, theta) {
                let dk = tf.derivative(k).expect("stored derivative").eval(x);
                rhs.add(k.taylor_weight(h) * dk * tg.remainder_at(theta - k.order() as f64, x, y));
            }
            rhs.largest = rhs.largest.max(fg.eval(y).abs());
            scalar_check(res, lhs, &rhs);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(letters: usize) -> IdentityParams {
        IdentityParams {
            grid: 1024,
            pairs: 20,
            ..IdentityParams::for_letters(letters).unwrap()
        }
    }

    #[test]
    fn names_roundtrip() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert!(matches!("nosuch".parse::<IdentityId>(), Err(Error::UnknownIdentity(_))));
    }

    #[test]
    fn identities_hold_on_a_small_grid() {
        for letters in [2, 3] {
            let params = small(letters);
            let ctx = build_context(&params).unwrap();
            for id in IdentityId::ALL {
                if id == IdentityId::Reorg && letters < 3 {
                    continue;
                }
                let r = run_identity_suite(&ctx, id, &params).unwrap();
                assert!(r.checks > 0);
                assert!(r.scale > 0.0);
                assert!(r.passes(IDENTITY_TOLERANCE), "{id} n={letters}: {}", r.max_residual);
            }
        }
    }

    #[test]
    fn shift_two_is_consistent() {
        let params = IdentityParams { shift: 2, ..small(3) };
        let ctx = build_context(&params).unwrap();
        for id in [IdentityId::Wdofd, IdentityId::ExplicitC, IdentityId::Lmm2] {
            let r = run_identity_suite(&ctx, id, &params).unwrap();
            assert!(r.passes(IDENTITY_TOLERANCE), "{id}: {}", r.max_residual);
        }
    }

    #[test]
    fn a_wrong_sign_is_detected() {
        // perturbing one side must show up at the tolerance
        let params = small(2);
        let ctx = build_context(&params).unwrap();
        let w = ctx.word(&[1, 2]).unwrap();
        let mut res = Residual::default();
        let lhs = ctx.d_kj(&w, MultiIndex::d1(1), 5).unwrap();
        let mut rhs = Terms::new(ctx.grid());
        rhs.add(-1.0, &lhs);
        field_check(&mut res, &lhs, &rhs, 0.0);
        assert!(res.worst > 1.0);
    }

    #[test]
    fn reorg_needs_three_letters() {
        let params = small(2);
        let ctx = build_context(&params).unwrap();
        assert!(run_identity_suite(&ctx, IdentityId::Reorg, &params).is_err());
    }
}
