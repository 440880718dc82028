#![allow(dead_code)]

use liesynth::matrix::{AlgebraElement, Matrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random anti-Hermitian matrix with entries of size about `scale`.
pub fn random_anti_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> AlgebraElement {
    let g = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let a = (&g - g.adjoint()) * Complex64::new(0.5 * scale, 0.0);
    AlgebraElement::new(Matrix::new(a).unwrap()).unwrap()
}

/// Random real skew-symmetric matrix.
pub fn random_skew(rng: &mut impl Rng, dim: usize, scale: f64) -> AlgebraElement {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let a = (&g - g.transpose()) * (0.5 * scale);
    AlgebraElement::new(Matrix::new(a.map(|v| Complex64::new(v, 0.0))).unwrap()).unwrap()
}

/// Taylor series with scaling and squaring, independent of any eigensolver.
pub fn expm_oracle(a: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = a.nrows();
    let m = a * Complex64::new(t, 0.0);
    let norm = m.norm();
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.25 {
        s += 1;
    }
    let scaled = &m * Complex64::new(f64::powi(2.0, -s), 0.0);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn commutator_oracle(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

pub fn frob(m: &DMatrix<Complex64>) -> f64 {
    m.norm()
}

pub fn e_jk(j: usize, k: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    m[(j - 1, k - 1)] = Complex64::new(1.0, 0.0);
    m[(k - 1, j - 1)] = Complex64::new(-1.0, 0.0);
    m
}

/// Linear combination of `E_jk`.
pub fn skew_combo(terms: &[(f64, usize, usize)]) -> DMatrix<Complex64> {
    terms.iter().fold(DMatrix::zeros(4, 4), |acc, &(c, j, k)| {
        acc + e_jk(j, k) * Complex64::new(c, 0.0)
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// `x = 2^-4, …, 2^-12`.
pub fn slope_grid() -> Vec<f64> {
    (4..=12).map(|k| f64::powi(2.0, -k)).collect()
}
