//! Exact synthesis: principal logarithm, fractional root `e^{A/M}`, a Newton
//! solve for `Π_j e^{A_j t_j} = e^{A/M}` over a similarity basis, then
//! expansion of derived exponentials into generator words.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{
    close_by_brackets, close_by_similarity_with, decompose, BasisCatalog, SimilarityOptions,
};
use crate::error::{Error, Result};
use crate::matrix::{expm, logm_principal, sqrtm_unitary, AlgebraElement, Matrix};
use crate::program::{expand_exponential, PulseSchedule, Step};

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub fd_step: f64,
    /// Stop once `‖Π e^{A_j t_j} − W‖` falls below this.
    pub tolerance: f64,
    /// Accept the final iterate if within this, even without reaching `tolerance`.
    pub acceptance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 100,
            fd_step: 1e-6,
            tolerance: 1e-13,
            acceptance: 1e-9,
        }
    }
}

fn ordered_product(elements: &[&AlgebraElement], times: &[f64]) -> Result<Matrix> {
    let mut acc = Matrix::identity(elements[0].dim());
    for (e, t) in elements.iter().zip(times) {
        acc = &acc * &expm(e, *t)?;
    }
    Ok(acc)
}

/// Real coordinates of `log(P(t) W^{-1})`.
fn residual(
    elements: &[&AlgebraElement],
    times: &[f64],
    w_inv: &Matrix,
) -> Result<nalgebra::DVector<f64>> {
    let p = ordered_product(elements, times)?;
    Ok(logm_principal(&(&p * w_inv))?.matrix().to_real_vector())
}

/// Finds `t` with `Π_j e^{E_j t_j} = w` (factors in the given order) by damped
/// Gauss–Newton on the logarithm of the mismatch, starting from `t = 0`.
pub fn neighborhood_solve(
    w: &Matrix,
    elements: &[&AlgebraElement],
    options: &NewtonOptions,
) -> Result<Vec<f64>> {
    if elements.is_empty() {
        return Err(Error::invalid("no basis elements to solve over"));
    }
    if elements.iter().any(|e| e.dim() != w.dim()) {
        return Err(Error::invalid("dimension mismatch in neighborhood solve"));
    }
    let w_inv = w.adjoint();
    let count = elements.len();
    let mut t = vec![0.0; count];
    let mut r = residual(elements, &t, &w_inv)?;
    let mut mismatch = ordered_product(elements, &t)?.distance(w);
    for _ in 0..options.max_iterations {
        if mismatch < options.tolerance {
            return Ok(t);
        }
        let mut jac = DMatrix::<f64>::zeros(r.len(), count);
        for j in 0..count {
            let mut fwd = t.clone();
            let mut bwd = t.clone();
            fwd[j] += options.fd_step;
            bwd[j] -= options.fd_step;
            let col = (residual(elements, &fwd, &w_inv)? - residual(elements, &bwd, &w_inv)?)
                / (2.0 * options.fd_step);
            jac.set_column(j, &col);
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let delta = svd
            .solve(&(-&r), cutoff)
            .map_err(|e| Error::invalid(format!("Newton step failed: {e}")))?;

        let current = r.norm();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = t
                .iter()
                .zip(delta.iter())
                .map(|(a, d)| a + lambda * d)
                .collect();
            if let Ok(trial_r) = residual(elements, &trial, &w_inv) {
                if trial_r.norm() < current {
                    t = trial;
                    r = trial_r;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        mismatch = ordered_product(elements, &t)?.distance(w);
        if !accepted {
            break;
        }
    }
    if mismatch < options.acceptance {
        return Ok(t);
    }
    Err(Error::NoConvergence {
        residual: mismatch,
        iterations: options.max_iterations,
    })
}

#[derive(Clone, Debug)]
pub struct ExactOptions {
    pub similarity: SimilarityOptions,
    /// Product order over the catalog; catalog order when `None`.
    pub ordering: Option<Vec<usize>>,
    /// Largest root order tried.
    pub m_cap: u64,
    pub newton: NewtonOptions,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            similarity: SimilarityOptions::default(),
            ordering: None,
            m_cap: 1 << 16,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactSolution {
    #[serde(rename = "M")]
    pub m: u64,
    /// `t_j` aligned with catalog order.
    pub times: Vec<f64>,
    #[serde(skip)]
    pub ordering: Vec<usize>,
    #[serde(serialize_with = "serialize_steps")]
    pub schedule: PulseSchedule,
    pub residual: f64,
}

fn serialize_steps<S: serde::Serializer>(
    s: &PulseSchedule,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.steps.serialize(ser)
}

/// A logarithm of `x` and the root order it was taken at: `e^{A} = x` with
/// `A = 2^r log(x^{1/2^r})`, rooting past eigenvalues at −1.
pub fn logarithm_with_root(x: &Matrix) -> Result<(AlgebraElement, u64)> {
    let mut root = x.clone();
    let mut order = 1u64;
    for _ in 0..8 {
        match logm_principal(&root) {
            Ok(log) => return Ok((log.scale(order as f64), order)),
            Err(Error::BranchPoint(_)) => {
                root = sqrtm_unitary(&root)?;
                order *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::BranchPoint(0.0))
}

fn resolve_ordering(ordering: &Option<Vec<usize>>, n: usize) -> Result<Vec<usize>> {
    let ordering = ordering.clone().unwrap_or_else(|| (0..n).collect());
    let mut sorted = ordering.clone();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::invalid(
            "ordering is not a permutation of the catalog",
        ));
    }
    Ok(ordering)
}

/// Exact synthesis over a given similarity catalog.
pub fn synthesize_exact_over(
    x_f: &Matrix,
    catalog: &BasisCatalog,
    options: &ExactOptions,
) -> Result<ExactSolution> {
    if x_f.dim() != catalog.dim_group() {
        return Err(Error::invalid("target dimension does not match generators"));
    }
    let ordering = resolve_ordering(&options.ordering, catalog.algebra_dim())?;
    let (log, root_order) = logarithm_with_root(x_f)?;
    match decompose(&log, catalog) {
        Ok(_) => {}
        Err(Error::ResidualTooLarge(r)) => {
            return Err(Error::TargetUnreachable(format!(
                "logarithm of the target is outside the dynamical Lie algebra (residual {r:.3e})"
            )))
        }
        Err(e) => return Err(e),
    }
    let elements: Vec<&AlgebraElement> = ordering.iter().map(|&i| catalog.element(i)).collect();
    let mut m = root_order;
    while m <= options.m_cap {
        let w = expm(&log, 1.0 / m as f64)?;
        match neighborhood_solve(&w, &elements, &options.newton) {
            Ok(ordered_times) => {
                log::info!("neighborhood solve converged at M = {m}");
                let mut times = vec![0.0; ordering.len()];
                for (pos, &idx) in ordering.iter().enumerate() {
                    times[idx] = ordered_times[pos];
                }
                let mut steps: Vec<Step> = Vec::new();
                for &idx in &ordering {
                    steps.extend(expand_exponential(catalog, idx, times[idx])?);
                }
                let schedule = PulseSchedule::new(steps).merged().with_repeats(m);
                let residual = schedule.evaluate(&catalog.generators())?.distance(x_f);
                return Ok(ExactSolution {
                    m,
                    times,
                    ordering,
                    schedule,
                    residual,
                });
            }
            Err(Error::NoConvergence { residual, .. }) => {
                log::debug!("M = {m}: no convergence (residual {residual:.3e})");
            }
            Err(Error::BranchPoint(_)) => log::debug!("M = {m}: branch point"),
            Err(e) => return Err(e),
        }
        m *= 2;
    }
    Err(Error::MNotFound { cap: options.m_cap })
}

/// Exact synthesis of `x_f` from the generators.
pub fn synthesize_exact(
    x_f: &Matrix,
    generators: &[AlgebraElement],
    options: &ExactOptions,
) -> Result<ExactSolution> {
    let catalog = close_by_similarity_with(generators, &options.similarity)?;
    synthesize_exact_over(x_f, &catalog, options)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReachabilityReport {
    pub reachable: bool,
    pub residual: f64,
    pub algebra_dim: usize,
    pub root_order: u64,
    pub detail: Option<String>,
}

/// Whether `x_f` lies in the group generated by the generators.
pub fn reachability_check(x_f: &Matrix, generators: &[AlgebraElement]) -> ReachabilityReport {
    let fail = |detail: String| ReachabilityReport {
        reachable: false,
        residual: f64::INFINITY,
        algebra_dim: 0,
        root_order: 0,
        detail: Some(detail),
    };
    let catalog = match close_by_brackets(generators) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    if x_f.dim() != catalog.dim_group() {
        return fail("target dimension does not match generators".into());
    }
    let (log, root_order) = match logarithm_with_root(x_f) {
        Ok(v) => v,
        Err(e) => return fail(e.to_string()),
    };
    let elements: Vec<&Matrix> = catalog
        .entries()
        .iter()
        .map(|e| e.element.matrix())
        .collect();
    match crate::algebra::least_squares(log.matrix(), &elements) {
        Ok(d) => ReachabilityReport {
            reachable: d.residual_norm < crate::algebra::MAX_DECOMPOSITION_RESIDUAL,
            residual: d.residual_norm,
            algebra_dim: catalog.algebra_dim(),
            root_order,
            detail: None,
        },
        Err(e) => fail(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{so4_generators, su2_generators};

    #[test]
    fn identity_solves_to_zero() {
        let gens = su2_generators();
        let refs: Vec<&AlgebraElement> = gens.iter().collect();
        let t = neighborhood_solve(&Matrix::identity(2), &refs, &NewtonOptions::default()).unwrap();
        assert!(t.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn identity_target() {
        let sol = synthesize_exact(
            &Matrix::identity(2),
            &su2_generators(),
            &ExactOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.m, 1);
        assert!(sol.schedule.steps.is_empty());
        assert!(sol.residual < 1e-15);
    }

    #[test]
    fn identity_is_reachable() {
        assert!(reachability_check(&Matrix::identity(4), &so4_generators()).reachable);
    }

    #[test]
    fn invalid_ordering() {
        let opts = ExactOptions {
            ordering: Some(vec![0, 0, 1]),
            ..Default::default()
        };
        assert!(synthesize_exact(&Matrix::identity(2), &su2_generators(), &opts).is_err());
    }
}
