mod common;

use std::f64::consts::PI;

use common::{e_jk, random_anti_hermitian, rng, slope};
use liesynth::algebra::{BasisCatalog, SimilarityOptions};
use liesynth::combined::{compare_methods, direct_error, synthesize_combined, CombinedPlan};
use liesynth::exact::{
    neighborhood_solve, reachability_check, synthesize_exact, synthesize_exact_over, ExactOptions,
    NewtonOptions,
};
use liesynth::fixtures::{
    so4_generators, so4_similarity_catalog, so4_target, so4_target_log, su2_generators, su2_target,
    SO4_COMBINED_ORDERING, SU2_CONJUGATION_TIME,
};
use liesynth::matrix::{expm, sqrtm_unitary, AlgebraElement, Matrix};
use liesynth::trotter::{error_curve, synthesize_trotter, TrotterPlan};
use liesynth::Error;

fn element(m: nalgebra::DMatrix<num_complex::Complex64>) -> AlgebraElement {
    AlgebraElement::new(Matrix::new(m).unwrap()).unwrap()
}

#[test]
fn trotter_error_endpoints() {
    let h = so4_target_log();
    let gens = so4_generators();
    assert!((synthesize_trotter(&h, 2, &gens).unwrap().error - 3.1531).abs() < 5e-3);
    assert!((synthesize_trotter(&h, 100_000_000, &gens).unwrap().error - 0.0411).abs() < 5e-3);
}

#[test]
fn trotter_error_curve() {
    let ns = [2, 10, 20, 30, 100, 500, 1000, 5000];
    let expected = [
        3.1531, 2.3964, 2.0500, 1.8604, 1.3761, 0.9089, 0.7599, 0.5022,
    ];
    let rows = error_curve(&so4_target_log(), &ns, &so4_generators()).unwrap();
    for (row, want) in rows.iter().zip(expected) {
        assert!((row.error - want).abs() < 5e-3, "n={}", row.n);
        assert!((row.error - row.error_trace).abs() < 1e-6);
    }
    let rows = error_curve(&so4_target_log(), &[100_000], &so4_generators()).unwrap();
    assert!((rows[0].error - 0.2341).abs() < 5e-3);

    let grid: Vec<u64> = vec![2, 10, 20, 30, 100, 500, 1000, 5000, 50000, 100000];
    let rows = error_curve(&so4_target_log(), &grid, &so4_generators()).unwrap();
    let xs: Vec<f64> = grid.iter().map(|n| *n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.error).collect();
    assert!(slope(&xs, &ys) < 0.0);
}

#[test]
fn trotter_schedule_reproduces_error() {
    let plan = TrotterPlan::new(&so4_target_log(), &so4_generators()).unwrap();
    let run = plan.run(50).unwrap();
    assert_eq!(run.schedule.repeats, 50);
    let via_schedule = run
        .schedule
        .evaluate(&so4_generators())
        .unwrap()
        .distance(&so4_target());
    assert!((via_schedule - run.error).abs() < 1e-10);
}

#[test]
fn combined_combined_errors() {
    let plan = CombinedPlan::new(
        so4_similarity_catalog(),
        Some(SO4_COMBINED_ORDERING.to_vec()),
    )
    .unwrap();
    let h = so4_target_log();
    let rows = plan.error_curve(&h, &[2, 10, 100, 1000, 10000]).unwrap();
    for ((_, got), want) in rows.iter().zip([2.2819, 0.4544, 0.0453, 0.0045, 0.0005]) {
        assert!((got - want).abs() < 5e-3);
    }
    // expanded generator words agree with the direct catalog product
    for n in [2, 10, 100] {
        let run = plan.run(&h, n).unwrap();
        assert!((run.error - direct_error(&plan, &h, n).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn combined_single_generator_is_exact() {
    let gens = so4_generators();
    for n in [1, 7, 1000] {
        assert!(
            synthesize_combined(&gens[0].scale(-0.8), n, &gens)
                .unwrap()
                .error
                < 1e-10
        );
    }
}

#[test]
fn combined_grows_its_own_catalog() {
    let gens = so4_generators();
    let plan =
        CombinedPlan::for_target(&so4_target_log(), &gens, &SimilarityOptions::default()).unwrap();
    let run = plan.run(&so4_target_log(), 10_000).unwrap();
    assert!(run.error < 0.05);
    let coarse = plan.run(&so4_target_log(), 10).unwrap();
    assert!(run.error < coarse.error);
}

#[test]
fn method_comparison() {
    let trotter = TrotterPlan::new(&so4_target_log(), &so4_generators()).unwrap();
    let combined = CombinedPlan::new(
        so4_similarity_catalog(),
        Some(SO4_COMBINED_ORDERING.to_vec()),
    )
    .unwrap();
    let rows = compare_methods(&so4_target_log(), &[100, 1000], &trotter, &combined).unwrap();
    assert!((rows[0].err_m2 - 1.3761).abs() < 5e-3 && (rows[0].err_m3 - 0.0453).abs() < 5e-3);
    assert!((rows[1].err_m2 - 0.7599).abs() < 5e-3 && (rows[1].err_m3 - 0.0045).abs() < 5e-3);
    assert!(rows.iter().all(|r| r.err_m3 < r.err_m2));
}

#[test]
fn neighborhood_solve_recovers_products() {
    let mut g = rng(31);
    let opts = NewtonOptions::default();
    for dim in [2, 3] {
        let basis: Vec<AlgebraElement> = (0..dim * dim)
            .map(|_| random_anti_hermitian(&mut g, dim, 1.0))
            .collect();
        let refs: Vec<&AlgebraElement> = basis.iter().collect();
        for _ in 0..3 {
            let taus: Vec<f64> = (0..refs.len())
                .map(|k| 0.1 * ((k as f64 * 1.7 + dim as f64).sin()))
                .collect();
            let w = refs
                .iter()
                .zip(&taus)
                .fold(Matrix::identity(dim), |acc, (e, t)| {
                    &acc * &expm(e, *t).unwrap()
                });
            let t = neighborhood_solve(&w, &refs, &opts).unwrap();
            let got = refs
                .iter()
                .zip(&t)
                .fold(Matrix::identity(dim), |acc, (e, t)| {
                    &acc * &expm(e, *t).unwrap()
                });
            assert!(got.distance(&w) < 1e-9);
        }
    }
}

#[test]
fn su2_half_root_in_reference_order() {
    let mut catalog = BasisCatalog::from_generators(&su2_generators()).unwrap();
    catalog
        .push_similarity(0, 1, SU2_CONJUGATION_TIME)
        .unwrap()
        .unwrap();
    let w = sqrtm_unitary(&su2_target()).unwrap();
    // order (A1, A3, A2)
    let refs = [catalog.element(0), catalog.element(2), catalog.element(1)];
    let t = neighborhood_solve(&w, &refs, &NewtonOptions::default()).unwrap();
    let got = refs
        .iter()
        .zip(&t)
        .fold(Matrix::identity(2), |acc, (e, t)| {
            &acc * &expm(e, *t).unwrap()
        });
    assert!(got.distance(&w) < 1e-9);
}

#[test]
fn su2_exact_with_reference_catalog() {
    let mut catalog = BasisCatalog::from_generators(&su2_generators()).unwrap();
    catalog
        .push_similarity(0, 1, SU2_CONJUGATION_TIME)
        .unwrap()
        .unwrap();
    let sol = synthesize_exact_over(&su2_target(), &catalog, &ExactOptions::default()).unwrap();
    assert!(sol.residual < 1e-10);
    let via_catalog = (0..3).fold(Matrix::identity(2), |acc, k| {
        &acc * &expm(catalog.element(k), sol.times[k]).unwrap()
    });
    let whole = (0..sol.m).fold(Matrix::identity(2), |acc, _| &acc * &via_catalog);
    assert!(whole.distance(&su2_target()) < 1e-10);
    // the word only uses the two generators
    assert!(sol.schedule.steps.iter().all(|s| s.gen < 2));
    assert!(
        sol.schedule
            .evaluate(&su2_generators())
            .unwrap()
            .distance(&su2_target())
            < 1e-10
    );
}

#[test]
fn so4_exact() {
    let sol = synthesize_exact(&so4_target(), &so4_generators(), &ExactOptions::default()).unwrap();
    assert!(sol.residual < 1e-8);
    assert!(sol.m.is_power_of_two());
    assert_eq!(sol.times.len(), 6);
}

#[test]
fn exact_identity_is_empty() {
    let sol = synthesize_exact(
        &Matrix::identity(4),
        &so4_generators(),
        &ExactOptions::default(),
    )
    .unwrap();
    assert_eq!(sol.m, 1);
    assert!(sol.schedule.steps.is_empty());
}

#[test]
fn exact_unreachable_target() {
    // so(3) acting on the first three coordinates
    let gens = vec![element(e_jk(1, 2)), element(e_jk(2, 3))];
    let target = expm(&element(e_jk(3, 4)), 0.5).unwrap();
    let report = reachability_check(&target, &gens);
    assert!(!report.reachable);
    assert_eq!(report.algebra_dim, 3);
    let err = synthesize_exact(&target, &gens, &ExactOptions::default()).unwrap_err();
    assert!(matches!(err, Error::TargetUnreachable(_)));

    let inside = expm(&element(e_jk(1, 3)), 0.9).unwrap();
    assert!(reachability_check(&inside, &gens).reachable);
}

#[test]
fn reachability_examples() {
    assert!(reachability_check(&so4_target(), &so4_generators()).reachable);
    assert!(reachability_check(&Matrix::identity(4), &so4_generators()).reachable);
    // eigenvalue -1 twice: rooted before taking the logarithm
    let minus = expm(&element(e_jk(1, 2) + e_jk(3, 4)), PI).unwrap();
    let report = reachability_check(&minus, &so4_generators());
    assert!(report.reachable);
    assert!(report.root_order >= 2);
}

#[test]
fn exact_m_cap_is_reported() {
    let opts = ExactOptions {
        m_cap: 1,
        newton: NewtonOptions {
            max_iterations: 0,
            ..NewtonOptions::default()
        },
        ..ExactOptions::default()
    };
    let err = synthesize_exact(&so4_target(), &so4_generators(), &opts).unwrap_err();
    assert!(matches!(err, Error::MNotFound { cap: 1 }));
}

#[test]
fn exact_minus_identity_in_so4() {
    let minus = Matrix::identity(4).scale(-1.0);
    let sol = synthesize_exact(&minus, &so4_generators(), &ExactOptions::default()).unwrap();
    assert!(sol.m >= 2);
    assert!(sol.residual < 1e-8);
}

#[test]
fn combined_slope_is_first_order() {
    let plan = CombinedPlan::new(
        so4_similarity_catalog(),
        Some(SO4_COMBINED_ORDERING.to_vec()),
    )
    .unwrap();
    let ns = [2u64, 10, 20, 50, 100, 1000, 10000];
    let rows = plan.error_curve(&so4_target_log(), &ns).unwrap();
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let s = slope(&xs, &ys);
    assert!((-1.15..=-0.85).contains(&s), "slope {s}");
}
