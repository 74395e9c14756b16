//! Littlewood-Paley machinery on the torus: the dyadic partition, block
//! projections, spectral derivatives and moment-weighted blocks, all applied
//! as Fourier multipliers.

pub mod fft;
mod field;
mod grid;
pub(crate) mod jet;
mod multiindex;
mod partition;
pub mod pfld;

pub use field::Field;
pub use grid::{norm, Grid, GridPoint};
pub use multiindex::MultiIndex;
pub use partition::{DyadicPartition, CHI_OUTER, RHO_OUTER};

pub(crate) use field::i_power;
#[cfg(test)]
pub(crate) use field::freq_radius;

use rustfft::num_complex::Complex64;

use crate::besov::BlockSequence;
use crate::error::{Error, Result};

fn check_block_index(j: i32, p: &DyadicPartition) -> Result<()> {
    if j < -1 || j > p.j_max() {
        return Err(Error::UnresolvedBandwidth { j, j_max: p.j_max() });
    }
    Ok(())
}

fn check_order(k: MultiIndex, p: &DyadicPartition) -> Result<()> {
    if k.order() > p.k_max() {
        return Err(Error::OrderExceeded {
            order: k.order(),
            k_max: p.k_max(),
        });
    }
    Ok(())
}

/// Fails unless every frequency of `f` is covered by `Δ_{−1}, …, Δ_{J_max}`.
pub fn require_resolvable(f: &Field, p: &DyadicPartition) -> Result<()> {
    f.require_band_limited()?;
    if f.support() > p.resolved_radius() {
        let j = (f.support().log2().ceil() as i32) - 1;
        return Err(Error::UnresolvedBandwidth {
            j: j.max(p.j_max() + 1),
            j_max: p.j_max(),
        });
    }
    Ok(())
}

/// `Δ_j f`.
pub fn lp_block(f: &Field, j: i32, p: &DyadicPartition) -> Result<Field> {
    check_block_index(j, p)?;
    f.apply_multiplier(DyadicPartition::outer_radius(j), |xi| {
        Complex64::new(p.symbol(j, xi[0].hypot(xi[1])), 0.0)
    })
}

/// `Δ_{<m} f = Σ_{i<m} Δ_i f`, zero for `m ≤ −1`.
pub fn low_pass(f: &Field, m: i32, p: &DyadicPartition) -> Result<Field> {
    if m <= -1 {
        f.require_band_limited()?;
        return Ok(Field::zeros(f.grid()));
    }
    if m > p.j_max() + 1 {
        return Err(Error::UnresolvedBandwidth { j: m - 1, j_max: p.j_max() });
    }
    f.apply_multiplier(CHI_OUTER * 2f64.powi(m), |xi| {
        Complex64::new(p.low_pass_symbol(m, xi[0].hypot(xi[1])), 0.0)
    })
}

/// The sequence `{f^j = Δ_{j−1} f}` for `j = 0..=J_max+1`.
pub fn lp_decompose(f: &Field, p: &DyadicPartition) -> Result<BlockSequence> {
    require_resolvable(f, p)?;
    let blocks = (0..p.block_count() as i32)
        .map(|j| lp_block(f, j - 1, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockSequence::from_blocks(blocks))
}

/// `∂^k f` via the multiplier `(iξ)^k`.
pub fn spectral_derivative(f: &Field, k: MultiIndex, p: &DyadicPartition) -> Result<Field> {
    check_order(k, p)?;
    f.derivative(k)
}

fn moment_multiplier(
    f: &Field,
    k: MultiIndex,
    cap: f64,
    jet: impl Fn([f64; 2]) -> f64,
) -> Result<Field> {
    // the kernel weight (y − x)^k turns into (−i∂_ξ)^k on the symbol
    let phase = i_power(3 * k.order());
    f.apply_multiplier(cap, |xi| phase * jet(xi))
}

/// Moment block `Δ^k_j g = ∫ K_j(x − y) (y − x)^k/k! g(y) dy` with
/// `K_j = F^{−1} ρ_j`; its symbol is `(−i)^{|k|} ∂^k ρ_j / k!`.
pub fn moment_block(g: &Field, j: i32, k: MultiIndex, p: &DyadicPartition) -> Result<Field> {
    check_order(k, p)?;
    check_block_index(j, p)?;
    if k.is_zero() {
        return lp_block(g, j, p);
    }
    let order = k.order();
    moment_multiplier(g, k, DyadicPartition::outer_radius(j), |xi| {
        p.symbol_jet(j, xi, order).coeff(k)
    })
}

/// `Δ^k_{<m} g = Σ_{i<m} Δ^k_i g`.
pub fn moment_low_pass(g: &Field, m: i32, k: MultiIndex, p: &DyadicPartition) -> Result<Field> {
    check_order(k, p)?;
    if k.is_zero() {
        return low_pass(g, m, p);
    }
    if m <= -1 {
        g.require_band_limited()?;
        return Ok(Field::zeros(g.grid()));
    }
    if m > p.j_max() + 1 {
        return Err(Error::UnresolvedBandwidth { j: m - 1, j_max: p.j_max() });
    }
    let order = k.order();
    moment_multiplier(g, k, CHI_OUTER * 2f64.powi(m), |xi| {
        p.low_pass_jet(m, xi, order).coeff(k)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn desk() -> DyadicPartition {
        DyadicPartition::for_grid(Grid::new(1, 1 << 14).unwrap()).unwrap()
    }

    fn small() -> DyadicPartition {
        DyadicPartition::for_grid(Grid::new(1, 512).unwrap()).unwrap()
    }

    /// A band-limited field with a few random modes below `max_mode`.
    fn random_field(grid: Grid, seed: u64, max_mode: i64) -> Field {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut f = Field::zeros(grid);
        for _ in 0..12 {
            let kx = (next() * max_mode as f64) as i64;
            let ky = if grid.dim() == 2 {
                (next() * max_mode as f64) as i64 - max_mode / 2
            } else {
                0
            };
            let r = (kx as f64).hypot(ky as f64);
            if r > max_mode as f64 {
                continue;
            }
            f = f.add(&Field::cosine(grid, [kx, ky], next() - 0.5, TAU * next()));
        }
        f
    }

    #[test]
    fn cos32_lands_in_block_four() {
        let p = desk();
        let f = Field::cosine(p.grid(), [32, 0], 1.0, 0.0);
        assert!(lp_block(&f, 4, &p).unwrap().max_abs_diff(&f) < 1e-12);
        assert!(lp_block(&f, 1, &p).unwrap().sup_norm() < 1e-14);
        let seq = lp_decompose(&f, &p).unwrap();
        for (j, b) in seq.blocks().iter().enumerate() {
            assert_eq!(b.sup_norm() > 0.5, j == 5, "block {j}");
        }
    }

    #[test]
    fn constant_lives_in_first_block() {
        let p = small();
        let seq = lp_decompose(&Field::constant(p.grid(), 2.5), &p).unwrap();
        assert!((seq.block(0).sup_norm() - 2.5).abs() < 1e-14);
        assert!(seq.blocks()[1..].iter().all(|b| b.sup_norm() == 0.0));
    }

    #[test]
    fn block_index_beyond_j_max_is_rejected() {
        let p = small();
        let f = Field::cosine(p.grid(), [3, 0], 1.0, 0.0);
        assert!(matches!(
            lp_block(&f, p.j_max() + 1, &p),
            Err(Error::UnresolvedBandwidth { .. })
        ));
        assert!(matches!(
            spectral_derivative(&f, MultiIndex::d1(5), &p),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn support_discipline_is_exact() {
        let p = small();
        let f = random_field(p.grid(), 3, 255);
        for j in -1..=p.j_max() {
            let b = lp_block(&f, j, &p).unwrap();
            for (i, c) in b.spectrum().iter().enumerate() {
                let r = freq_radius(p.grid().frequency(i));
                let inside = r > DyadicPartition::inner_radius(j)
                    && r < DyadicPartition::outer_radius(j)
                    || (j == -1 && r < CHI_OUTER);
                if !inside {
                    assert_eq!(c.norm(), 0.0, "j={j} r={r}");
                }
            }
        }
    }

    #[test]
    fn low_pass_is_telescoped_blocks() {
        let p = small();
        let f = random_field(p.grid(), 11, 200);
        for m in 0..=p.j_max() + 1 {
            let direct = low_pass(&f, m, &p).unwrap();
            let blocks: Vec<Field> = (-1..m).map(|i| lp_block(&f, i, &p).unwrap()).collect();
            let summed = Field::sum(p.grid(), &blocks);
            assert!(direct.max_abs_diff(&summed) < 1e-12);
        }
    }

    /// Physical-space evaluation of the moment block: periodic kernel from
    /// an inverse DFT of the symbol, weighted by the lifted displacement.
    fn moment_block_by_quadrature(g: &Field, j: i32, k: usize, p: &DyadicPartition) -> Vec<f64> {
        let grid = g.grid();
        let n = grid.n();
        let symbol: Vec<Complex64> = (0..n)
            .map(|i| {
                let r = freq_radius(grid.frequency(i));
                Complex64::new(p.symbol(j, r), 0.0)
            })
            .collect();
        // K(z_m) · 2π/N = (1/N) Σ ρ(ξ) e^{iξ z_m}
        let kernel = fft::inverse_real(grid, symbol);
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let z = (x + n - y) % n;
                        let h = grid.displacement(GridPoint::new_1d(x), GridPoint::new_1d(y))[0];
                        kernel[z] * h.powi(k as i32) / fact * g.values()[y]
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn moment_block_matches_physical_kernel() {
        // the periodized kernel weighted by the lifted displacement only
        // matches the multiplier once the kernel is negligible at |z| = π,
        // hence the finer grid and the high blocks
        let p = DyadicPartition::for_grid(Grid::new(1, 8192).unwrap()).unwrap();
        for &(j, k) in &[(9, 1), (10, 1), (10, 2), (9, 3)] {
            let base = 2f64.powi(j);
            let mut g = Field::zeros(p.grid());
            for (i, s) in [1.1, 1.2, 1.3, 1.45, 2.2, 2.5, 2.6].iter().enumerate() {
                let kappa = (base * s).round() as i64;
                g = g.add(&Field::cosine(p.grid(), [kappa, 0], 1.0 / (1.0 + i as f64), 0.3 * i as f64));
            }
            let spectral = moment_block(&g, j, MultiIndex::d1(k), &p).unwrap();
            let direct = moment_block_by_quadrature(&g, j, k, &p);
            let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = spectral
                .values()
                .iter()
                .zip(&direct)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(scale > 0.0);
            assert!(err <= 1e-8 * scale, "j={j} k={k}: {err} vs {scale}");
        }
    }

    #[test]
    fn moment_blocks_commute_with_blocks() {
        let p = small();
        let g = random_field(p.grid(), 9, 250);
        let k = MultiIndex::d1(2);
        for j in 0..=p.j_max() {
            let mj = moment_block(&g, j, k, &p).unwrap();
            for i in -1..=p.j_max() {
                let a = lp_block(&mj, i, &p).unwrap();
                let b = moment_block(&lp_block(&g, i, &p).unwrap(), j, k, &p).unwrap();
                assert!(a.max_abs_diff(&b) <= 1e-12 * (1.0 + mj.sup_norm()));
                if (i - j).abs() >= 2 {
                    assert_eq!(a.sup_norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn moment_low_pass_sums_moment_blocks() {
        let p = small();
        let g = random_field(p.grid(), 21, 250);
        let k = MultiIndex::d1(1);
        for m in 0..=p.j_max() + 1 {
            let direct = moment_low_pass(&g, m, k, &p).unwrap();
            let parts: Vec<Field> = (-1..m)
                .map(|i| moment_block(&g, i, k, &p).unwrap())
                .collect();
            assert!(direct.max_abs_diff(&Field::sum(p.grid(), &parts)) < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_blocks_reconstruct() {
        let p = DyadicPartition::for_grid(Grid::new(2, 128).unwrap()).unwrap();
        let f = random_field(p.grid(), 4, 30);
        let seq = lp_decompose(&f, &p).unwrap();
        assert!(seq.sum().max_abs_diff(&f) <= 1e-10 * f.sup_norm());
        let m = moment_block(&f, 3, MultiIndex::new(&[1, 1]), &p).unwrap();
        assert!(m.values().iter().all(|v| v.is_finite()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pure_modes_are_scaled_by_the_symbol(kappa in 0i64..255, j in -1i32..=6) {
            let p = small();
            let f = Field::cosine(p.grid(), [kappa, 0], 1.0, 0.4);
            let b = lp_block(&f, j, &p).unwrap();
            let want = f.scale(p.symbol(j, kappa as f64));
            prop_assert!(b.max_abs_diff(&want) <= 1e-12);
        }

        #[test]
        fn blocks_reconstruct_random_fields(seed in any::<u64>()) {
            let p = small();
            let f = random_field(p.grid(), seed, 120);
            let seq = lp_decompose(&f, &p).unwrap();
            prop_assert!(seq.sum().max_abs_diff(&f) <= 1e-10 * f.sup_norm().max(1.0));
        }

        #[test]
        fn far_blocks_annihilate(seed in any::<u64>(), i in -1i32..=6, gap in 2i32..6) {
            let p = small();
            let j = i + gap;
            prop_assume!(j <= p.j_max());
            let f = random_field(p.grid(), seed, 255);
            let b = lp_block(&lp_block(&f, j, &p).unwrap(), i, &p).unwrap();
            prop_assert_eq!(b.sup_norm(), 0.0);
        }

        #[test]
        fn operators_are_linear(s1 in any::<u64>(), s2 in any::<u64>(), j in -1i32..=6, k in 0usize..=3) {
            let p = small();
            let f = random_field(p.grid(), s1, 255);
            let g = random_field(p.grid(), s2, 255);
            let k = MultiIndex::d1(k);
            let lhs = moment_block(&f.add(&g), j, k, &p).unwrap();
            let rhs = moment_block(&f, j, k, &p).unwrap().add(&moment_block(&g, j, k, &p).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + lhs.sup_norm()));
            let lhs = spectral_derivative(&f.add(&g), k, &p).unwrap();
            let rhs = spectral_derivative(&f, k, &p).unwrap().add(&spectral_derivative(&g, k, &p).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + lhs.sup_norm()));
        }

        #[test]
        fn bernstein_bound(seed in any::<u64>(), j in 0i32..=6, k in 1usize..=3) {
            let p = small();
            let f = random_field(p.grid(), seed, 255);
            let b = lp_block(&f, j, &p).unwrap();
            let db = spectral_derivative(&b, MultiIndex::d1(k), &p).unwrap();
            // the constant depends only on the annulus; 8/3 per derivative
            // plus a margin for the sampled sup
            let c = RHO_OUTER.powi(k as i32) * 4.0;
            prop_assert!(db.sup_norm() <= c * 2f64.powi(j * k as i32) * b.sup_norm() + 1e-12);
        }
    }
}
