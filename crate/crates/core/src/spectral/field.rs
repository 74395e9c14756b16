use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;

use super::fft;
use super::grid::{Grid, GridPoint};
use super::multiindex::MultiIndex;
use crate::error::{Error, Result};

/// A real function sampled on a periodic grid.
///
/// Alongside the samples a field carries an upper bound on the radius of its
/// frequency support. Pointwise products add the bounds; once the bound
/// reaches the Nyquist frequency the samples no longer determine the
/// un-aliased product, so spectral operations (blocks, derivatives) refuse
/// such a field. Fields are immutable and cheap to clone.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    values: Arc<[f64]>,
    support: f64,
    spectrum: Arc<OnceLock<Arc<[Complex64]>>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("support", &self.support)
            .field("sup_norm", &self.sup_norm())
            .finish()
    }
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self::from_samples(grid, vec![0.0; grid.len()], 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_samples(grid, vec![c; grid.len()], 0.0)
    }

    /// Wrap samples with a declared support radius.
    pub fn from_samples(grid: Grid, values: Vec<f64>, support: f64) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count does not match grid");
        Field {
            grid,
            values: values.into(),
            support,
            spectrum: Arc::new(OnceLock::new()),
        }
    }

    /// Wrap samples, measuring the support radius from the spectrum
    /// (coefficients below `1e−12` of the largest are treated as zero).
    pub fn from_samples_detect(grid: Grid, values: Vec<f64>) -> Self {
        let spectrum = fft::forward(grid, &values);
        let peak = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut support: f64 = 0.0;
        if peak > 0.0 {
            for (i, c) in spectrum.iter().enumerate() {
                if c.norm() > 1e-12 * peak {
                    support = support.max(freq_radius(grid.frequency(i)));
                }
            }
        }
        let field = Self::from_samples(grid, values, support);
        let _ = field.spectrum.set(spectrum.into());
        field
    }

    /// Build from a spectrum (in the convention of [`fft::forward`]).
    pub fn from_spectrum(grid: Grid, spectrum: Vec<Complex64>, support: f64) -> Self {
        let values = fft::inverse_real(grid, spectrum.clone());
        let field = Self::from_samples(grid, values, support);
        let _ = field.spectrum.set(spectrum.into());
        field
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: Grid, support: f64, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| f(grid.coords(grid.point(i))))
            .collect();
        Self::from_samples(grid, values, support)
    }

    /// `amp · cos(κ·x + phase)`, with `κ·x` reduced modulo `2π` in integer
    /// arithmetic so high modes are sampled to full precision.
    pub fn cosine(grid: Grid, kappa: [i64; 2], amp: f64, phase: f64) -> Self {
        let n = grid.n() as i64;
        let values = (0..grid.len())
            .map(|i| {
                let GridPoint(idx) = grid.point(i);
                let m = (kappa[0] * idx[0] as i64 + kappa[1] * idx[1] as i64).rem_euclid(n);
                amp * (TAU * m as f64 / n as f64 + phase).cos()
            })
            .collect();
        Self::from_samples(grid, values, freq_radius(kappa))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Declared upper bound on `|ξ|` over the nonzero spectrum.
    pub fn support(&self) -> f64 {
        self.support
    }

    /// True when the declared support stays strictly below Nyquist, so the
    /// spectrum is exact and spectral multipliers are meaningful.
    pub fn is_band_limited(&self) -> bool {
        self.support < self.grid.nyquist() as f64
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| fft::forward(self.grid, &self.values).into())
    }

    pub fn eval(&self, p: GridPoint) -> f64 {
        self.values[self.grid.flat(p)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.check_grid(other);
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn check_grid(&self, other: &Field) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
    }

    fn zip_with(&self, other: &Field, support: f64, op: impl Fn(f64, f64) -> f64) -> Field {
        self.check_grid(other);
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| op(a, b))
            .collect();
        Field::from_samples(self.grid, values, support)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_with(other, self.support.max(other.support), |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_with(other, self.support.max(other.support), |a, b| a - b)
    }

    /// Pointwise product; the support bound is the sum of the factors'.
    pub fn mul(&self, other: &Field) -> Field {
        self.zip_with(other, self.support + other.support, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Field {
        let values = self.values.iter().map(|v| c * v).collect();
        let support = if c == 0.0 { 0.0 } else { self.support };
        Field::from_samples(self.grid, values, support)
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Field {
        self.zip_with(other, self.support.max(other.support), |a, b| a + c * b)
    }

    /// Sum of fields in iteration order.
    pub fn sum<'a>(grid: Grid, fields: impl IntoIterator<Item = &'a Field>) -> Field {
        let mut acc = vec![0.0; grid.len()];
        let mut support: f64 = 0.0;
        for f in fields {
            assert_eq!(f.grid, grid, "fields live on different grids");
            for (a, v) in acc.iter_mut().zip(f.values.iter()) {
                *a += v;
            }
            support = support.max(f.support);
        }
        Field::from_samples(grid, acc, support)
    }

    pub(crate) fn require_band_limited(&self) -> Result<()> {
        if self.is_band_limited() {
            Ok(())
        } else {
            Err(Error::Aliasing {
                bandwidth: self.support,
                nyquist: self.grid.nyquist(),
            })
        }
    }

    /// Apply a Fourier multiplier `m(ξ)`; Nyquist bins are zeroed. The new
    /// support bound is `min(self.support, support_cap)`.
    pub fn apply_multiplier(
        &self,
        support_cap: f64,
        multiplier: impl Fn([f64; 2]) -> Complex64,
    ) -> Result<Field> {
        self.require_band_limited()?;
        let grid = self.grid;
        let support = self.support.min(support_cap);
        let spectrum = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let xi = grid.frequency(i);
                if grid.is_nyquist_bin(i) || freq_radius(xi) > support || c == Complex64::new(0.0, 0.0)
                {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * multiplier([xi[0] as f64, xi[1] as f64])
                }
            })
            .collect();
        Ok(Field::from_spectrum(grid, spectrum, support))
    }

    /// Exact spectral derivative: multiplies the spectrum by `(iξ)^k`.
    pub fn derivative(&self, k: MultiIndex) -> Result<Field> {
        if k.is_zero() {
            self.require_band_limited()?;
            return Ok(self.clone());
        }
        let order = k.order();
        let i_pow = i_power(order);
        self.apply_multiplier(f64::INFINITY, |xi| i_pow * k.monomial(xi))
    }
}

/// `i^n`.
pub(crate) fn i_power(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

pub(crate) fn freq_radius(xi: [i64; 2]) -> f64 {
    (xi[0] as f64).hypot(xi[1] as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid() -> Grid {
        Grid::new(1, 256).unwrap()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = grid();
        let f = Field::from_fn(g, 1.0, |x| x[0].sin());
        let df = f.derivative(MultiIndex::d1(1)).unwrap();
        let expected = Field::from_fn(g, 1.0, |x| x[0].cos());
        assert!(df.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn second_derivative_of_high_mode() {
        let g = grid();
        let f = Field::cosine(g, [32, 0], 1.0, 0.0);
        let d2 = f.derivative(MultiIndex::d1(2)).unwrap();
        assert!(d2.max_abs_diff(&f.scale(-1024.0)) < 1e-9);
    }

    #[test]
    fn aliased_product_refuses_spectral_ops() {
        let g = grid();
        let f = Field::cosine(g, [100, 0], 1.0, 0.0);
        let sq = f.mul(&f);
        assert!(!sq.is_band_limited());
        assert!(matches!(
            sq.derivative(MultiIndex::d1(1)),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn support_detection() {
        let g = grid();
        let f = Field::cosine(g, [7, 0], 2.0, 0.3).add(&Field::cosine(g, [19, 0], 0.1, 1.0));
        let detected = Field::from_samples_detect(g, f.values().to_vec());
        assert_eq!(detected.support(), 19.0);
    }

    #[test]
    fn samples_match_stored_spectrum() {
        let g = Grid::new(2, 32).unwrap();
        let f = Field::from_fn(g, 5.0, |x| (3.0 * x[0] - 4.0 * x[1]).sin() + (TAU - x[1]).cos());
        let back = Field::from_spectrum(g, f.spectrum().to_vec(), f.support());
        assert!(back.max_abs_diff(&f) <= 1e-12 * f.sup_norm());
    }
}
