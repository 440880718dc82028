//! Combined method: expand `H` over a similarity-generated basis and iterate
//! the first-order split product `Π_j e^{α_j A_j x}`.

use rayon::prelude::*;

use crate::algebra::{
    decompose, BasisCatalog, Decomposition, SimilarityClosure, SimilarityOptions,
};
use crate::error::{Error, Result};
use crate::matrix::{expm, frob_norm, matrix_power, AlgebraElement, Matrix};
use crate::program::{expand_exponential, PulseSchedule, Step};
use crate::trotter::{IteratedSynthesis, TrotterPlan};

const NEGLIGIBLE_COEFFICIENT: f64 = 1e-12;

/// A similarity catalog and the order in which its exponentials are multiplied.
#[derive(Clone, Debug)]
pub struct CombinedPlan {
    catalog: BasisCatalog,
    ordering: Vec<usize>,
}

impl CombinedPlan {
    /// `ordering` must be a permutation of the catalog indices; `None` keeps catalog order.
    pub fn new(catalog: BasisCatalog, ordering: Option<Vec<usize>>) -> Result<Self> {
        let n = catalog.algebra_dim();
        let ordering = ordering.unwrap_or_else(|| (0..n).collect());
        let mut seen = vec![false; n];
        if ordering.len() != n {
            return Err(Error::invalid(format!(
                "ordering has {} entries, catalog has {n}",
                ordering.len()
            )));
        }
        for &i in &ordering {
            if i >= n || seen[i] {
                return Err(Error::invalid(
                    "ordering is not a permutation of the catalog",
                ));
            }
            seen[i] = true;
        }
        Ok(CombinedPlan { catalog, ordering })
    }

    /// Grows a similarity catalog one element at a time until `h` decomposes over it.
    pub fn for_target(
        h: &AlgebraElement,
        generators: &[AlgebraElement],
        options: &SimilarityOptions,
    ) -> Result<Self> {
        Self::for_target_from(h, BasisCatalog::from_generators(generators)?, options)
    }

    /// As [`CombinedPlan::for_target`], starting from a partial catalog.
    pub fn for_target_from(
        h: &AlgebraElement,
        catalog: BasisCatalog,
        options: &SimilarityOptions,
    ) -> Result<Self> {
        let mut closure = SimilarityClosure::from_catalog(catalog, options.clone());
        loop {
            if decompose(h, closure.catalog()).is_ok() {
                return Self::new(closure.into_catalog(), None);
            }
            if !closure.step()? {
                // Closed and still no fit: the residual error is the answer.
                decompose(h, closure.catalog())?;
                return Self::new(closure.into_catalog(), None);
            }
        }
    }

    pub fn catalog(&self) -> &BasisCatalog {
        &self.catalog
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn coefficients(&self, h: &AlgebraElement) -> Result<Decomposition> {
        decompose(h, &self.catalog)
    }

    fn active_terms(&self, decomposition: &Decomposition) -> Vec<(usize, f64)> {
        let largest = decomposition
            .coefficients
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        self.ordering
            .iter()
            .map(|&j| (j, decomposition.coefficients[j]))
            .filter(|(_, a)| *a != 0.0 && a.abs() > NEGLIGIBLE_COEFFICIENT * largest)
            .collect()
    }

    /// `Π_j e^{α_j A_j x}` from the catalog elements themselves.
    pub fn split_product(&self, decomposition: &Decomposition, x: f64) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.catalog.dim_group());
        for (j, alpha) in self.active_terms(decomposition) {
            acc = &acc * &expm(self.catalog.element(j), alpha * x)?;
        }
        Ok(acc)
    }

    /// The same product as a word in the generators.
    pub fn split_schedule(&self, decomposition: &Decomposition, x: f64) -> Result<PulseSchedule> {
        let mut steps: Vec<Step> = Vec::new();
        for (j, alpha) in self.active_terms(decomposition) {
            steps.extend(expand_exponential(&self.catalog, j, alpha * x)?);
        }
        Ok(PulseSchedule::new(steps).merged())
    }

    pub fn run(&self, h: &AlgebraElement, n: u64) -> Result<IteratedSynthesis> {
        let decomposition = self.coefficients(h)?;
        self.run_with(&decomposition, &expm(h, 1.0)?, n)
    }

    fn run_with(
        &self,
        decomposition: &Decomposition,
        target: &Matrix,
        n: u64,
    ) -> Result<IteratedSynthesis> {
        if n == 0 {
            return Err(Error::invalid("iteration count must be at least 1"));
        }
        let x = 1.0 / n as f64;
        let schedule = self.split_schedule(decomposition, x)?.with_repeats(n);
        let achieved = schedule.evaluate(&self.catalog.generators())?;
        Ok(IteratedSynthesis {
            program: None,
            error: frob_norm(&(target - &achieved)),
            schedule,
            n,
            achieved,
        })
    }

    pub fn error_curve(&self, h: &AlgebraElement, ns: &[u64]) -> Result<Vec<(u64, f64)>> {
        let decomposition = self.coefficients(h)?;
        let target = expm(h, 1.0)?;
        ns.par_iter()
            .map(|&n| Ok((n, self.run_with(&decomposition, &target, n)?.error)))
            .collect()
    }
}

/// Combined synthesis over a similarity catalog grown with default options.
pub fn synthesize_combined(
    h: &AlgebraElement,
    n: u64,
    generators: &[AlgebraElement],
) -> Result<IteratedSynthesis> {
    CombinedPlan::for_target(h, generators, &SimilarityOptions::default())?.run(h, n)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonRow {
    pub n: u64,
    pub err_m2: f64,
    pub err_m3: f64,
}

/// Side-by-side errors of the iterated bracket program and the combined split product.
pub fn compare_methods(
    h: &AlgebraElement,
    ns: &[u64],
    trotter: &TrotterPlan,
    combined: &CombinedPlan,
) -> Result<Vec<ComparisonRow>> {
    let m2 = trotter.error_curve(ns)?;
    let m3 = combined.error_curve(h, ns)?;
    Ok(m2
        .iter()
        .zip(m3)
        .map(|(a, (n, e3))| ComparisonRow {
            n,
            err_m2: a.error,
            err_m3: e3,
        })
        .collect())
}

/// Error of `[R(1/n)]^n` computed without expanding to generator words.
pub fn direct_error(plan: &CombinedPlan, h: &AlgebraElement, n: u64) -> Result<f64> {
    let d = plan.coefficients(h)?;
    let period = plan.split_product(&d, 1.0 / n as f64)?;
    Ok(frob_norm(&(&expm(h, 1.0)? - &matrix_power(&period, n))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{so4_generators, so4_similarity_catalog};

    #[test]
    fn single_generator_is_exact() {
        let gens = so4_generators();
        let h = gens[0].scale(1.3);
        for n in [1, 2, 50] {
            assert!(synthesize_combined(&h, n, &gens).unwrap().error < 1e-12);
        }
    }

    #[test]
    fn bad_orderings_rejected() {
        let cat = so4_similarity_catalog();
        assert!(CombinedPlan::new(cat.clone(), Some(vec![0, 1])).is_err());
        assert!(CombinedPlan::new(cat.clone(), Some(vec![0, 0, 1])).is_err());
        assert!(CombinedPlan::new(cat, Some(vec![0, 3, 1])).is_err());
    }
}
