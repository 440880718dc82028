//! Worked systems used by the CLI, the tests and the Python bindings.
//!
//! `su2`: a two-level system with generators `iσ_z` and `i(σ_x + σ_y)`, where
//! `σ_y = [[0, i], [-i, 0]]`. `so4`: a lossless LC switching network with
//! parameters ν = 1, β = 3, γ = 1, δ = 2.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::BasisCatalog;
use crate::matrix::{AlgebraElement, Matrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn element(rows: &[Vec<Complex64>], label: &str) -> AlgebraElement {
    AlgebraElement::new(Matrix::from_rows(rows).expect("fixture matrix"))
        .expect("fixture element")
        .with_label(label)
}

/// `i σ_z`.
pub fn su2_a1() -> AlgebraElement {
    element(
        &[
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -1.0)],
        ],
        "A1",
    )
}

/// `i (σ_x + σ_y)`.
pub fn su2_a2() -> AlgebraElement {
    element(
        &[
            vec![c(0.0, 0.0), c(-1.0, 1.0)],
            vec![c(1.0, 1.0), c(0.0, 0.0)],
        ],
        "A2",
    )
}

pub fn su2_generators() -> Vec<AlgebraElement> {
    vec![su2_a1(), su2_a2()]
}

/// `[[1, i], [i, 1]] / √2`.
pub fn su2_target() -> Matrix {
    let s = 1.0 / 2f64.sqrt();
    Matrix::from_rows(&[vec![c(s, 0.0), c(0.0, s)], vec![c(0.0, s), c(s, 0.0)]])
        .expect("fixture target")
}

/// Conjugation time producing the third su(2) basis element from `A1` and `A2`.
pub const SU2_CONJUGATION_TIME: f64 = -3.0 * PI / 8.0;

/// Skew-symmetric unit `E_jk` (1-based): `+1` at `(j,k)`, `-1` at `(k,j)`.
pub fn e_jk(dim: usize, j: usize, k: usize) -> Matrix {
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    m[(j - 1, k - 1)] = c(1.0, 0.0);
    m[(k - 1, j - 1)] = c(-1.0, 0.0);
    Matrix::new(m).expect("unit matrix")
}

fn real_element(rows: &[&[f64]], label: &str) -> AlgebraElement {
    AlgebraElement::new(Matrix::from_real_rows(rows).expect("fixture matrix"))
        .expect("fixture element")
        .with_label(label)
}

pub fn so4_a1() -> AlgebraElement {
    real_element(
        &[
            &[0.0, -1.0, 0.0, 1.0],
            &[1.0, 0.0, 2.0, 0.0],
            &[0.0, -2.0, 0.0, -3.0],
            &[-1.0, 0.0, 3.0, 0.0],
        ],
        "A1",
    )
}

pub fn so4_a2() -> AlgebraElement {
    real_element(
        &[
            &[0.0, -1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, -3.0],
            &[0.0, 0.0, 3.0, 0.0],
        ],
        "A2",
    )
}

pub fn so4_generators() -> Vec<AlgebraElement> {
    vec![so4_a1(), so4_a2()]
}

/// `22 E_14 + 26 E_23`, the depth-2 bracket `[[A2, A1], A2]`.
pub fn so4_a5() -> AlgebraElement {
    let m = &e_jk(4, 1, 4).scale(22.0) + &e_jk(4, 2, 3).scale(26.0);
    AlgebraElement::new(m).expect("A5").with_label("A5")
}

pub const SO4_TARGET_SCALE: f64 = PI / 44.0;

/// Logarithm of the so(4) target: `A5 π/44`.
pub fn so4_target_log() -> AlgebraElement {
    so4_a5().scale(SO4_TARGET_SCALE).with_label("A5*pi/44")
}

/// `e^{A5 π/44}`, written out in closed form.
pub fn so4_target() -> Matrix {
    let (s, co) = (13.0 * PI / 22.0).sin_cos();
    Matrix::from_real_rows(&[
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, co, s, 0.0],
        &[0.0, -s, co, 0.0],
        &[-1.0, 0.0, 0.0, 0.0],
    ])
    .expect("target")
}

/// Conjugation time for `F = e^{A2 π/2} A1 e^{-A2 π/2}`.
pub const SO4_CONJUGATION_TIME: f64 = PI / 2.0;

/// Catalog `(A1, A2, F)` with `F = e^{A2 π/2} A1 e^{-A2 π/2}`.
pub fn so4_similarity_catalog() -> BasisCatalog {
    let mut catalog = BasisCatalog::from_generators(&so4_generators()).expect("generators");
    catalog
        .push_similarity(1, 0, SO4_CONJUGATION_TIME)
        .expect("conjugation")
        .expect("F independent of A1, A2");
    catalog
}

/// Product order `(A1, F, A2)` over [`so4_similarity_catalog`].
pub const SO4_COMBINED_ORDERING: [usize; 3] = [0, 2, 1];
