mod common;

use common::{random_anti_hermitian, rng};
use liesynth::io::{matrix_from_json, matrix_to_json, read_schedule_csv, write_schedule_csv};
use liesynth::matrix::{expm, logm_principal, matrix_power, AlgebraElement, Matrix};
use liesynth::program::{ProductProgram, PulseSchedule, Sign, Step};
use liesynth::timefix::{positive_time, rewrite_schedule, TimefixOptions};
use proptest::prelude::*;
use rand::Rng;

/// Random program over `gens` generators built with atom/invert/concat/commutate.
fn random_program(r: &mut impl Rng, gens: usize, depth: u32) -> ProductProgram {
    let sign = if r.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    };
    let atom = ProductProgram::atom(r.gen_range(0..gens), sign);
    if depth == 0 {
        return atom;
    }
    let a = random_program(r, gens, depth - 1);
    let b = random_program(r, gens, depth - 1);
    match r.gen_range(0..4) {
        0 => a.concat(&b),
        1 => a.commutate(&b),
        2 => a.invert().concat(&b.scale(r.gen_range(0.0..3.0)).unwrap()),
        _ => atom,
    }
}

fn random_gens(seed: u64, dim: usize, count: usize) -> Vec<AlgebraElement> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| random_anti_hermitian(&mut r, dim, 1.0))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponentials_are_unitary(seed in any::<u64>(), dim in 1usize..6, t in -50.0f64..50.0) {
        let a = &random_gens(seed, dim, 1)[0];
        prop_assert!(expm(a, t).unwrap().unitarity_defect() < 1e-10);
    }

    #[test]
    fn logarithm_inverts_exponential(seed in any::<u64>(), dim in 1usize..6, frac in 0.05f64..0.97) {
        let a = &random_gens(seed, dim, 1)[0];
        let radius = a.spectrum().omegas().iter().fold(0.0f64, |m, w| m.max(w.abs()));
        prop_assume!(radius > 1e-6);
        let a = a.scale(frac * (std::f64::consts::PI - 0.1) / radius);
        let back = logm_principal(&expm(&a, 1.0).unwrap()).unwrap();
        prop_assert!(back.matrix().distance(a.matrix()) < 1e-9);
    }

    #[test]
    fn inverse_program_cancels(seed in any::<u64>(), x in 0.0f64..2.0) {
        let gens = random_gens(seed, 3, 3);
        let p = random_program(&mut rng(seed ^ 1), 3, 3);
        prop_assert_eq!(p.invert().invert(), p.clone());
        let id = &p.evaluate(x, &gens).unwrap() * &p.invert().evaluate(x, &gens).unwrap();
        prop_assert!(id.distance(&Matrix::identity(3)) < 1e-10);
    }

    #[test]
    fn scaling_is_exact(seed in any::<u64>(), x in 0.0f64..1.0, a in 0.0f64..4.0) {
        let gens = random_gens(seed, 2, 2);
        let p = random_program(&mut rng(seed ^ 2), 2, 3);
        let lhs = p.scale(a).unwrap().evaluate(x, &gens).unwrap();
        let rhs = p.evaluate(a * x, &gens).unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-12 * (1.0 + p.len() as f64));
    }

    #[test]
    fn programs_are_unitary(seed in any::<u64>(), x in 0.0f64..3.0) {
        let gens = random_gens(seed, 4, 2);
        let p = random_program(&mut rng(seed ^ 3), 2, 4);
        prop_assert!(p.evaluate(x, &gens).unwrap().unitarity_defect() < 1e-9);
    }

    #[test]
    fn power_inequality(seed in any::<u64>(), dim in 1usize..5, n in 1u64..500) {
        let gens = random_gens(seed, dim, 2);
        let a = expm(&gens[0], 1.0).unwrap();
        let b = expm(&gens[1], 1.0).unwrap();
        let lhs = matrix_power(&a, n).distance(&matrix_power(&b, n));
        prop_assert!(lhs <= n as f64 * a.distance(&b) + 1e-9);
    }

    #[test]
    fn power_matches_repeated_product(seed in any::<u64>(), n in 0u64..40) {
        let a = expm(&random_gens(seed, 3, 1)[0], 0.7).unwrap();
        let direct = (0..n).fold(Matrix::identity(3), |acc, _| &acc * &a);
        prop_assert!(matrix_power(&a, n).distance(&direct) < 1e-11);
    }

    #[test]
    fn merging_preserves_the_product(seed in any::<u64>()) {
        let gens = random_gens(seed, 2, 3);
        let mut r = rng(seed ^ 4);
        let steps: Vec<Step> = (0..12)
            .map(|_| Step { gen: r.gen_range(0..3), duration: if r.gen_bool(0.2) { 0.0 } else { r.gen_range(-1.0..1.0) } })
            .collect();
        let s = PulseSchedule::new(steps).with_repeats(3);
        let m = s.merged();
        prop_assert!(m.steps.windows(2).all(|w| w[0].gen != w[1].gen));
        prop_assert!(m.steps.iter().all(|s| s.duration != 0.0));
        prop_assert!(s.evaluate(&gens).unwrap().distance(&m.evaluate(&gens).unwrap()) < 1e-12);
    }

    #[test]
    fn schedule_csv_round_trips(durations in prop::collection::vec((0usize..4, -1e6f64..1e6), 0..20)) {
        let s = PulseSchedule::new(durations.into_iter().map(|(gen, duration)| Step { gen, duration }).collect());
        let mut buf = Vec::new();
        write_schedule_csv(&s, &mut buf).unwrap();
        prop_assert_eq!(read_schedule_csv(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn matrix_json_round_trips(seed in any::<u64>(), dim in 1usize..5) {
        let m = expm(&random_gens(seed, dim, 1)[0], 1.3).unwrap();
        prop_assert_eq!(matrix_from_json(&matrix_to_json(&m).unwrap()).unwrap(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certified_bound_dominates(seed in any::<u64>(), t in -3.0f64..-0.01, eps in 1e-3f64..1e-1) {
        let b = &random_gens(seed, 2, 1)[0];
        let r = positive_time(b, t, eps).unwrap();
        prop_assert!(r.t_bar >= 0.0);
        let actual = expm(b, t).unwrap().distance(&expm(b, r.t_bar).unwrap());
        prop_assert!(actual <= r.bound + 1e-12);
        prop_assert!(r.bound <= eps);
    }

    #[test]
    fn rewritten_schedule_within_bound(seed in any::<u64>()) {
        let gens = random_gens(seed, 2, 2);
        let mut r = rng(seed ^ 5);
        let steps: Vec<Step> = (0..4).map(|k| Step { gen: k % 2, duration: r.gen_range(-1.0..1.0) }).collect();
        let s = PulseSchedule::new(steps).with_repeats(2);
        let out = rewrite_schedule(&s, &gens, 0.05, &TimefixOptions::default()).unwrap();
        prop_assert!(!out.schedule.has_negative());
        let actual = s.evaluate(&gens).unwrap().distance(&out.schedule.evaluate(&gens).unwrap());
        prop_assert!(actual <= out.bound + 1e-12);
        prop_assert!(out.bound <= 0.05);
    }
}
