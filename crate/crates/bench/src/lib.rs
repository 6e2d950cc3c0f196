//! Shared fixtures for the criterion benchmarks.

use bosonwalk_core::{BandedMatrix, ComplexMatrix, RngSeed, C64};
use num_complex::Complex;
use rand::Rng;

pub fn random_dense(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = RngSeed(seed).rng();
    ComplexMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    })
}

pub fn random_banded(n: usize, lower: usize, upper: usize, cyclic: bool, seed: u64) -> BandedMatrix {
    let mut rng = RngSeed(seed).rng();
    let diagonals = (0..lower + upper + 1)
        .map(|_| {
            (0..n)
                .map(|_| Complex::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
                .collect()
        })
        .collect();
    BandedMatrix::from_diagonals(n, lower, upper, cyclic, diagonals).unwrap()
}

/// Circulant with entries of modulus near 1 so transfer powers stay in range.
pub fn random_circulant(n: usize, halfwidth: usize, seed: u64) -> BandedMatrix {
    let mut rng = RngSeed(seed).rng();
    let values: Vec<C64> = (0..2 * halfwidth + 1)
        .map(|_| Complex::from_polar(0.5 + rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU))
        .collect();
    let diagonals = values.into_iter().map(|v| vec![v; n]).collect();
    BandedMatrix::from_diagonals(n, halfwidth, halfwidth, true, diagonals).unwrap()
}
