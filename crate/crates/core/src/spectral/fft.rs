//! Forward/inverse DFT on the grid. Plans are cached per thread, so no
//! planner state is shared between workers.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transform(grid: Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let fft = plan(n, inverse);
    // rows (the contiguous axis)
    fft.process(data);
    if grid.dim() == 2 {
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            fft.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
    }
}

/// Unnormalized forward transform: `ĉ_κ = Σ_x f(x) e^{−iκ·x}`.
pub fn forward(grid: Grid, values: &[f64]) -> Vec<Complex64> {
    debug_assert_eq!(values.len(), grid.len());
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, false);
    data
}

/// Inverse of [`forward`], keeping the real part.
pub fn inverse_real(grid: Grid, mut spectrum: Vec<Complex64>) -> Vec<f64> {
    debug_assert_eq!(spectrum.len(), grid.len());
    transform(grid, &mut spectrum, true);
    let scale = 1.0 / grid.len() as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let grid = Grid::new(2, 16).unwrap();
        let values: Vec<f64> = (0..grid.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let back = inverse_real(grid, forward(grid, &values));
        for (a, b) in values.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_mode_lands_in_its_bin() {
        let grid = Grid::new(1, 32).unwrap();
        let values: Vec<f64> = (0..32)
            .map(|i| (3.0 * i as f64 * grid.spacing()).cos())
            .collect();
        let spec = forward(grid, &values);
        for (i, c) in spec.iter().enumerate() {
            let expected = if i == 3 || i == 29 { 16.0 } else { 0.0 };
            assert!((c.re - expected).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
    }
}
