mod common;

use std::f64::consts::PI;

use common::{frob, random_anti_hermitian, rng, skew_combo};
use liesynth::algebra::{
    close_by_brackets, close_by_similarity, close_by_similarity_with, conjugate, decompose,
    BasisCatalog, Provenance, SimilarityOptions,
};
use liesynth::fixtures::{
    so4_a5, so4_generators, so4_similarity_catalog, su2_generators, SU2_CONJUGATION_TIME,
};
use liesynth::matrix::{AlgebraElement, Matrix};
use liesynth::Error;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(entries: &[Complex64]) -> AlgebraElement {
    let n = entries.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { entries[i] } else { c(0.0, 0.0) })
                .collect()
        })
        .collect();
    AlgebraElement::new(Matrix::from_rows(&rows).unwrap()).unwrap()
}

fn pauli() -> Vec<AlgebraElement> {
    let z = c(0.0, 0.0);
    let i = c(0.0, 1.0);
    let m = |rows: [[Complex64; 2]; 2]| {
        AlgebraElement::new(Matrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).unwrap())
            .unwrap()
    };
    vec![
        m([[z, i], [i, z]]),
        m([[z, c(1.0, 0.0)], [c(-1.0, 0.0), z]]),
        m([[i, z], [z, -i]]),
    ]
}

#[test]
fn so4_bracket_closure() {
    let catalog = close_by_brackets(&so4_generators()).unwrap();
    assert_eq!(catalog.algebra_dim(), 6);
    assert_eq!(catalog.depths(), vec![0, 0, 1, 2, 2, 3]);
    assert_eq!(catalog.max_depth(), 3);
    let want = [
        skew_combo(&[(-5.0, 1, 3), (7.0, 2, 4)]),
        skew_combo(&[(17.0, 1, 2), (22.0, 1, 4), (26.0, 2, 3), (19.0, 3, 4)]),
        skew_combo(&[(22.0, 1, 4), (26.0, 2, 3)]),
        skew_combo(&[(145.0, 1, 3), (-155.0, 2, 4)]),
    ];
    for (k, w) in want.iter().enumerate() {
        assert!(
            frob(&(catalog.element(k + 2).matrix().inner() - w)) < 1e-9,
            "A{}",
            k + 3
        );
    }
}

#[test]
fn su2_bracket_closure() {
    let catalog = close_by_brackets(&su2_generators()).unwrap();
    assert_eq!(catalog.algebra_dim(), 3);
    assert_eq!(catalog.max_depth(), 1);
}

#[test]
fn commuting_pair_closes_to_itself() {
    let gens = vec![
        diag(&[c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]),
        diag(&[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]),
    ];
    let catalog = close_by_brackets(&gens).unwrap();
    assert_eq!(catalog.algebra_dim(), 2);
    assert_eq!(catalog.max_depth(), 0);
}

#[test]
fn su2_similarity_element() {
    let gens = su2_generators();
    let mut catalog = BasisCatalog::from_generators(&gens).unwrap();
    let index = catalog
        .push_similarity(0, 1, SU2_CONJUGATION_TIME)
        .unwrap()
        .unwrap();
    // -i√2 σ_y with σ_y = [[0, i], [-i, 0]]
    let r2 = 2f64.sqrt();
    let want = Matrix::from_rows(&[
        vec![c(0.0, 0.0), c(r2, 0.0)],
        vec![c(-r2, 0.0), c(0.0, 0.0)],
    ])
    .unwrap();
    assert!(catalog.element(index).matrix().distance(&want) < 1e-12);
    assert_eq!(
        catalog.entries()[index].provenance,
        Provenance::Similarity {
            conjugator: 0,
            conjugated: 1,
            t: SU2_CONJUGATION_TIME
        }
    );

    let scanned = close_by_similarity(&gens, &[SU2_CONJUGATION_TIME]).unwrap();
    assert_eq!(scanned.algebra_dim(), 3);
    assert!(scanned.element(2).matrix().distance(&want) < 1e-12);
}

#[test]
fn so4_similarity_element() {
    let catalog = so4_similarity_catalog();
    let want = skew_combo(&[(-1.0, 1, 2), (2.0, 1, 4), (1.0, 2, 3), (-3.0, 3, 4)]);
    assert!(frob(&(catalog.element(2).matrix().inner() - want)) < 1e-12);
    let direct = conjugate(catalog.element(1), catalog.element(0), PI / 2.0).unwrap();
    assert!(direct.matrix().distance(catalog.element(2).matrix()) < 1e-12);
}

#[test]
fn similarity_closure_spans_so4() {
    let catalog =
        close_by_similarity_with(&so4_generators(), &SimilarityOptions::default()).unwrap();
    assert_eq!(catalog.algebra_dim(), 6);
    assert!(catalog
        .entries()
        .iter()
        .all(|e| !matches!(e.provenance, Provenance::Bracket { .. })));
}

#[test]
fn basis_is_returned_unchanged() {
    let basis = pauli();
    let catalog = close_by_similarity(&basis, &[0.3]).unwrap();
    assert_eq!(catalog.algebra_dim(), 3);
    for (k, b) in basis.iter().enumerate() {
        assert_eq!(catalog.element(k).matrix(), b.matrix());
    }
    assert_eq!(close_by_brackets(&basis).unwrap().algebra_dim(), 3);
}

#[test]
fn decomposition_examples() {
    let brackets = close_by_brackets(&so4_generators()).unwrap();
    let d = decompose(&so4_a5(), &brackets).unwrap();
    for (k, coeff) in d.coefficients.iter().enumerate() {
        let want = if k == 4 { 1.0 } else { 0.0 };
        assert!((coeff - want).abs() < 1e-12);
    }

    let sub = so4_similarity_catalog();
    let d = decompose(&so4_a5(), &sub).unwrap();
    // catalog order (A1, A2, F)
    for (got, want) in d.coefficients.iter().zip([10.0, -16.0, 6.0]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn decomposition_recovers_random_coefficients() {
    let mut g = rng(5);
    let gens = vec![
        random_anti_hermitian(&mut g, 3, 1.0),
        random_anti_hermitian(&mut g, 3, 1.0),
    ];
    let catalog = close_by_brackets(&gens).unwrap();
    let coeffs: Vec<f64> = (0..catalog.algebra_dim())
        .map(|k| (k as f64 * 0.37).sin() * 3.0)
        .collect();
    let h = catalog
        .entries()
        .iter()
        .zip(&coeffs)
        .fold(Matrix::zeros(3), |acc, (e, a)| {
            &acc + &e.element.matrix().scale(*a)
        });
    let d = decompose(&AlgebraElement::new(h).unwrap(), &catalog).unwrap();
    for (got, want) in d.coefficients.iter().zip(&coeffs) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn element_outside_span_is_rejected() {
    let gens = vec![diag(&[c(0.0, 1.0), c(0.0, -1.0)])];
    let catalog = close_by_brackets(&gens).unwrap();
    let off = pauli().remove(0);
    assert!(matches!(
        decompose(&off, &catalog),
        Err(Error::ResidualTooLarge(_))
    ));
}

#[test]
fn similarity_scan_is_seeded() {
    let mut g = rng(9);
    let gens = vec![
        random_anti_hermitian(&mut g, 3, 1.0),
        random_anti_hermitian(&mut g, 3, 1.0),
    ];
    let opts = SimilarityOptions {
        t_candidates: vec![],
        random_draws: 8,
        seed: 42,
    };
    let a = close_by_similarity_with(&gens, &opts).unwrap();
    let b = close_by_similarity_with(&gens, &opts).unwrap();
    assert_eq!(a.algebra_dim(), b.algebra_dim());
    for (x, y) in a.entries().iter().zip(b.entries()) {
        assert_eq!(x.provenance, y.provenance);
    }
}
