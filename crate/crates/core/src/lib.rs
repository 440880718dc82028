//! Control synthesis on compact matrix Lie groups.
//!
//! Given generators `A_1, …, A_m` of a right-invariant system `X' = A(u) X`,
//! this crate builds the dynamical Lie algebra, and produces switching
//! schedules `Π e^{A_{g_k} t_k}` that reach a target `X_f` either exactly or to
//! any accuracy, with negative durations replaced by nonnegative ones.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod combined;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod io;
pub mod matrix;
pub mod program;
pub mod timefix;
pub mod trotter;

pub use algebra::{
    close_by_brackets, close_by_similarity, close_by_similarity_with, decompose, BasisCatalog,
    CatalogEntry, Decomposition, Provenance, SimilarityClosure, SimilarityOptions,
};
pub use combined::{compare_methods, synthesize_combined, CombinedPlan, ComparisonRow};
pub use error::{Error, Result};
pub use exact::{
    reachability_check, synthesize_exact, synthesize_exact_over, ExactOptions, ExactSolution,
};
pub use matrix::{bracket, expm, frob_norm, logm_principal, AlgebraElement, Matrix};
pub use program::{factor_budget, program_for, Factor, ProductProgram, PulseSchedule, Sign, Step};
pub use timefix::{positive_time, rewrite_schedule, Replacement, TimefixOptions, TimefixOutcome};
pub use trotter::{error_curve, synthesize_trotter, ErrorRow, IteratedSynthesis, TrotterPlan};
