//! Arbitrary-accuracy synthesis by iterating a product program: `[T(1/n)]^n → e^H`.

use rayon::prelude::*;

use crate::algebra::{close_by_brackets, BasisCatalog};
use crate::error::{Error, Result};
use crate::matrix::{expm, frob_norm, matrix_power, AlgebraElement, Matrix};
use crate::program::{program_for, ProductProgram, PulseSchedule};

/// Outcome of an iterated product.
#[derive(Clone, Debug)]
pub struct IteratedSynthesis {
    /// The symbolic program, when the product is one (method 2 only).
    pub program: Option<ProductProgram>,
    /// One period at `x = 1/n`, repeated `n` times.
    pub schedule: PulseSchedule,
    pub n: u64,
    pub achieved: Matrix,
    /// Frobenius distance from `achieved` to the target.
    pub error: f64,
}

/// `√(2d − 2 Re Tr(A B†))`, which equals `‖A − B‖` when both are unitary.
pub fn trace_identity_error(achieved: &Matrix, target: &Matrix) -> f64 {
    let dim = achieved.dim() as f64;
    let overlap = (achieved * &target.adjoint()).trace().re;
    (2.0 * dim - 2.0 * overlap).max(0.0).sqrt()
}

/// A program together with the target it approximates.
#[derive(Clone, Debug)]
pub struct TrotterPlan {
    pub generators: Vec<AlgebraElement>,
    pub program: ProductProgram,
    pub target: Matrix,
}

impl TrotterPlan {
    /// Builds the bracket catalog and the program for `h`.
    pub fn new(h: &AlgebraElement, generators: &[AlgebraElement]) -> Result<Self> {
        let catalog = close_by_brackets(generators)?;
        Self::with_catalog(h, &catalog)
    }

    pub fn with_catalog(h: &AlgebraElement, catalog: &BasisCatalog) -> Result<Self> {
        Ok(TrotterPlan {
            generators: catalog.generators(),
            program: program_for(h, catalog)?,
            target: expm(h, 1.0)?,
        })
    }

    /// Uses a given program, e.g. one written out by hand.
    pub fn from_program(
        program: ProductProgram,
        target: Matrix,
        generators: &[AlgebraElement],
    ) -> Self {
        TrotterPlan {
            generators: generators.to_vec(),
            program,
            target,
        }
    }

    pub fn run(&self, n: u64) -> Result<IteratedSynthesis> {
        if n == 0 {
            return Err(Error::invalid("iteration count must be at least 1"));
        }
        let x = 1.0 / n as f64;
        let period = self.program.evaluate(x, &self.generators)?;
        let achieved = matrix_power(&period, n);
        let error = frob_norm(&(&self.target - &achieved));
        Ok(IteratedSynthesis {
            program: Some(self.program.clone()),
            schedule: self.program.to_schedule(x).with_repeats(n),
            n,
            achieved,
            error,
        })
    }
}

/// Approximates `e^h` by `[T(1/n)]^n` with `T` the program for `h`.
pub fn synthesize_trotter(
    h: &AlgebraElement,
    n: u64,
    generators: &[AlgebraElement],
) -> Result<IteratedSynthesis> {
    TrotterPlan::new(h, generators)?.run(n)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub n: u64,
    pub error: f64,
    /// The same error through the trace identity.
    pub error_trace: f64,
}

impl TrotterPlan {
    /// One row per `n`, computed in parallel and returned in input order.
    pub fn error_curve(&self, ns: &[u64]) -> Result<Vec<ErrorRow>> {
        if ns.is_empty() {
            return Err(Error::invalid("error curve needs at least one n"));
        }
        ns.par_iter()
            .map(|&n| {
                let run = self.run(n)?;
                Ok(ErrorRow {
                    n,
                    error: run.error,
                    error_trace: trace_identity_error(&run.achieved, &self.target),
                })
            })
            .collect()
    }
}

pub fn error_curve(
    h: &AlgebraElement,
    ns: &[u64],
    generators: &[AlgebraElement],
) -> Result<Vec<ErrorRow>> {
    TrotterPlan::new(h, generators)?.error_curve(ns)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
