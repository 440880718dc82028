//! Dense small-matrix kernel.
//!
//! Every matrix the synthesis code touches is normal: algebra elements are
//! anti-Hermitian and group elements are unitary. Exponentials and logarithms
//! therefore go through a unitary diagonalization rather than Padé or
//! scaling-and-squaring, which also exposes the eigenfrequencies needed when
//! negative times are replaced.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `‖A + A†‖` (relative to `max(1, ‖A‖)`) for algebra elements.
pub const TOL_ANTI_HERMITIAN: f64 = 1e-10;
/// Tolerance on `‖U†U − 1‖` accepted by the logarithm and root.
pub const TOL_UNITARY: f64 = 1e-8;
/// Distance from -1 below which an eigenvalue is treated as the branch point.
pub const TOL_BRANCH: f64 = 1e-8;
/// Default relative singular-value gap for the independence test.
pub const DEFAULT_INDEPENDENCE_TOL: f64 = 1e-8;

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct Matrix(DMatrix<Complex64>);

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}", self.0)
    }
}

impl Matrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::invalid(format!(
                "matrix must be square, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.nrows() == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(Matrix(inner))
    }

    pub fn identity(dim: usize) -> Self {
        Matrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Matrix(DMatrix::zeros(dim, dim))
    }

    /// Builds a matrix from rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "rows must all have length equal to the row count",
            ));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds a real matrix from rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "rows must all have length equal to the row count",
            ));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Matrix {
        Matrix(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `‖U†U − 1‖` in the Frobenius norm.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.0.adjoint() * &self.0;
        frob_norm_raw(&(prod - DMatrix::identity(self.dim(), self.dim())))
    }

    /// `‖A + A†‖` in the Frobenius norm.
    pub fn anti_hermitian_defect(&self) -> f64 {
        frob_norm_raw(&(&self.0 + self.0.adjoint()))
    }

    /// Stacks real and imaginary parts column by column.
    pub fn to_real_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.0.len());
        for (k, z) in self.0.iter().enumerate() {
            v[2 * k] = z.re;
            v[2 * k + 1] = z.im;
        }
        v
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &Matrix) -> f64 {
        frob_norm_raw(&(&self.0 - &other.0))
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &'a Matrix) -> Matrix {
        Matrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &'a Matrix) -> Matrix {
        Matrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &'a Matrix) -> Matrix {
        Matrix(&self.0 - &rhs.0)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix(-&self.0)
    }
}

/// Unitary diagonalization `A = V diag(iω) V†` of an anti-Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    vectors: DMatrix<Complex64>,
    omegas: Vec<f64>,
}

impl Spectrum {
    fn of_anti_hermitian(a: &DMatrix<Complex64>) -> Self {
        // -iA is Hermitian with eigenvalues ω.
        let hermitian = a.map(|z| z * Complex64::new(0.0, -1.0));
        let eig = hermitian.symmetric_eigen();
        Spectrum {
            vectors: eig.eigenvectors,
            omegas: eig.eigenvalues.iter().copied().collect(),
        }
    }

    /// Eigenvalue phases ω_j, with multiplicity.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// `e^{At}`.
    pub fn exp(&self, t: f64) -> Matrix {
        let phases: Vec<Complex64> = self
            .omegas
            .iter()
            .map(|w| Complex64::from_polar(1.0, w * t))
            .collect();
        Matrix(diag_conjugate(&self.vectors, &phases))
    }
}

/// `V diag(d) V†`.
fn diag_conjugate(v: &DMatrix<Complex64>, d: &[Complex64]) -> DMatrix<Complex64> {
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[j];
    }
    scaled * v.adjoint()
}

/// An element of the dynamical Lie algebra: an anti-Hermitian matrix.
#[derive(Clone)]
pub struct AlgebraElement {
    mat: Matrix,
    label: Option<String>,
    spectrum: OnceLock<Spectrum>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlgebraElement")
            .field("label", &self.label)
            .field("mat", &self.mat)
            .finish()
    }
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat && self.label == other.label
    }
}

impl AlgebraElement {
    /// Validates anti-Hermiticity; violating inputs are rejected, not projected.
    pub fn new(mat: Matrix) -> Result<Self> {
        let scale = frob_norm(&mat).max(1.0);
        let defect = mat.anti_hermitian_defect();
        if defect > TOL_ANTI_HERMITIAN * scale {
            return Err(Error::invalid(format!(
                "matrix is not anti-Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self::from_valid(mat))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub(crate) fn from_valid(mat: Matrix) -> Self {
        AlgebraElement {
            mat,
            label: None,
            spectrum: OnceLock::new(),
        }
    }

    /// Projects onto the anti-Hermitian part; for internally computed values only.
    pub(crate) fn from_computed(m: DMatrix<Complex64>) -> Self {
        let ah = (&m - m.adjoint()) * Complex64::new(0.5, 0.0);
        Self::from_valid(Matrix(ah))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get_or_init(|| Spectrum::of_anti_hermitian(&self.mat.0))
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        AlgebraElement::from_valid(self.mat.scale(s))
    }

    pub fn neg(&self) -> AlgebraElement {
        self.scale(-1.0)
    }
}

/// `e^{At}`.
pub fn expm(a: &AlgebraElement, t: f64) -> Result<Matrix> {
    if !t.is_finite() {
        return Err(Error::invalid("time must be finite"));
    }
    if t == 0.0 {
        return Ok(Matrix::identity(a.dim()));
    }
    Ok(a.spectrum().exp(t))
}

/// Angles for the Hermitian parts `Re(e^{-iφ} U)` used to split a normal matrix.
/// Two eigenphases collide at angle φ only when they sum to 2φ, so distinct
/// phases cannot collide at two of these angles.
const SPLIT_ANGLES: [f64; 3] = [0.917_3, 2.386_1, 0.312_7];
/// Off-diagonal size in `W† U W` above which columns are split further.
const SPLIT_TOL: f64 = 1e-12;

/// Eigendecomposition `U = Q diag(λ) Q†` of a (numerically) normal matrix.
fn normal_eigen(u: &Matrix) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let n = u.dim();
    let mut cols = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    refine(&u.0, DMatrix::identity(n, n), 0, &mut cols, &mut lambdas);
    (DMatrix::from_columns(&cols), lambdas)
}

/// Diagonalizes `U` on the span of `v`, recursing on blocks whose Hermitian
/// part was degenerate while `U` is not.
fn refine(
    u: &DMatrix<Complex64>,
    v: DMatrix<Complex64>,
    level: usize,
    cols: &mut Vec<DVector<Complex64>>,
    lambdas: &mut Vec<Complex64>,
) {
    let k = v.ncols();
    let (w, d) = if k == 1 || level >= SPLIT_ANGLES.len() {
        let d = v.adjoint() * u * &v;
        (v, d)
    } else {
        let b = v.adjoint() * u * &v;
        let rot = Complex64::from_polar(1.0, -SPLIT_ANGLES[level]);
        let h = (&b * rot + b.adjoint() * rot.conj()) * Complex64::new(0.5, 0.0);
        let w = &v * h.symmetric_eigen().eigenvectors;
        let d = w.adjoint() * u * &w;
        (w, d)
    };
    let final_level = k == 1 || level >= SPLIT_ANGLES.len();
    let mut group = (0..k).collect::<Vec<usize>>();
    fn root(group: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while group[r] != r {
            r = group[r];
        }
        group[i] = r;
        r
    }
    if !final_level {
        for i in 0..k {
            for j in i + 1..k {
                if d[(i, j)].norm().max(d[(j, i)].norm()) > SPLIT_TOL {
                    let (a, b) = (root(&mut group, i), root(&mut group, j));
                    group[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut seen = vec![false; k];
    for i in 0..k {
        let r = root(&mut group, i);
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let members: Vec<usize> = (0..k).filter(|&j| root(&mut group, j) == r).collect();
        if members.len() == 1 || final_level {
            for &j in &members {
                cols.push(w.column(j).into_owned());
                lambdas.push(d[(j, j)]);
            }
        } else {
            refine(u, w.select_columns(&members), level + 1, cols, lambdas);
        }
    }
}

fn check_unitary(u: &Matrix) -> Result<()> {
    let defect = u.unitarity_defect();
    if defect > TOL_UNITARY {
        return Err(Error::invalid(format!(
            "matrix is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Principal logarithm of a unitary matrix: eigenvalue phases in (−π, π).
pub fn logm_principal(u: &Matrix) -> Result<AlgebraElement> {
    check_unitary(u)?;
    let (q, lambdas) = normal_eigen(u);
    let mut logs = Vec::with_capacity(lambdas.len());
    for lambda in &lambdas {
        let gap = (lambda + 1.0).norm();
        if gap < TOL_BRANCH {
            return Err(Error::BranchPoint(gap));
        }
        logs.push(Complex64::new(0.0, lambda.arg()));
    }
    Ok(AlgebraElement::from_computed(diag_conjugate(&q, &logs)))
}

/// Square root of a unitary matrix through its eigendecomposition.
///
/// Phases are halved from (−π, π). On the eigenspace of −1 the root is a
/// complex structure `J` (`J² = −1`): real and skew when `u` is real and the
/// eigenspace even-dimensional, so orthogonal inputs keep orthogonal roots;
/// otherwise `+i` and `−i` alternate over the eigenvectors, which keeps the
/// trace of the logarithm unchanged for a repeated −1 (e.g. `−1 ∈ SU(2)`).
pub fn sqrtm_unitary(u: &Matrix) -> Result<Matrix> {
    check_unitary(u)?;
    let (q, lambdas) = normal_eigen(u);
    let n = u.dim();
    let is_branch: Vec<bool> = lambdas
        .iter()
        .map(|l| (l + 1.0).norm() < TOL_BRANCH)
        .collect();
    let branch: Vec<usize> = (0..n).filter(|&j| is_branch[j]).collect();
    let regular: Vec<usize> = (0..n).filter(|&j| !is_branch[j]).collect();
    let real_input = u.0.iter().all(|z| z.im.abs() <= 1e-14);

    let roots: Vec<Complex64> = regular
        .iter()
        .map(|&j| Complex64::from_polar(1.0, lambdas[j].arg() / 2.0))
        .collect();
    let mut out = diag_conjugate(&q.select_columns(&regular), &roots);
    if branch.is_empty() {
        return Ok(Matrix(out));
    }
    if real_input && branch.len().is_multiple_of(2) {
        out += real_complex_structure(&q.select_columns(&branch));
        return Ok(Matrix(out.map(|z| Complex64::new(z.re, 0.0))));
    }
    let signs: Vec<Complex64> = (0..branch.len())
        .map(|k| Complex64::new(0.0, if k % 2 == 0 { 1.0 } else { -1.0 }))
        .collect();
    out += diag_conjugate(&q.select_columns(&branch), &signs);
    Ok(Matrix(out))
}

/// Real skew `J` with `J² = −P` on the (conjugation-invariant) span of `basis`.
fn real_complex_structure(basis: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (n, k) = basis.shape();
    let mut parts = DMatrix::<f64>::zeros(n, 2 * k);
    for j in 0..k {
        for i in 0..n {
            parts[(i, j)] = basis[(i, j)].re;
            parts[(i, k + j)] = basis[(i, j)].im;
        }
    }
    let svd = parts.svd(true, false);
    let vectors = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut j = DMatrix::<f64>::zeros(n, n);
    for pair in order[..k].chunks(2) {
        let (a, b) = (vectors.column(pair[0]), vectors.column(pair[1]));
        j += b * a.transpose() - a * b.transpose();
    }
    j.map(|v| Complex64::new(v, 0.0))
}

/// `[A, B] = AB − BA`.
pub fn bracket(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch in bracket: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let (x, y) = (&a.mat.0, &b.mat.0);
    Ok(AlgebraElement::from_valid(Matrix(x * y - y * x)))
}

fn frob_norm_raw(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `√Tr(MM†)`.
pub fn frob_norm(m: &Matrix) -> f64 {
    frob_norm_raw(&m.0)
}

/// `M^n` by repeated squaring; `n = 0` gives the identity.
pub fn matrix_power(m: &Matrix, n: u64) -> Matrix {
    let mut result: Option<DMatrix<Complex64>> = None;
    let mut base = m.0.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                Some(r) => r * &base,
                None => base.clone(),
            });
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    Matrix(result.unwrap_or_else(|| DMatrix::identity(m.dim(), m.dim())))
}

/// True iff `candidate` lies outside the span of `set`, judged by the ratio of
/// the smallest to the largest singular value of the normalized, vectorized
/// system.
pub fn independent<'a, I>(set: I, candidate: &Matrix, tol: f64) -> Result<bool>
where
    I: IntoIterator<Item = &'a Matrix>,
{
    let set: Vec<&Matrix> = set.into_iter().collect();
    if set.iter().any(|m| m.dim() != candidate.dim()) {
        return Err(Error::invalid("dimension mismatch in independence test"));
    }
    let cand_norm = frob_norm(candidate);
    if cand_norm == 0.0 {
        return Ok(false);
    }
    let rows = 2 * candidate.dim() * candidate.dim();
    let cols = set.len() + 1;
    if cols > rows {
        return Ok(false);
    }
    let mut system = DMatrix::<f64>::zeros(rows, cols);
    for (j, m) in set.iter().chain(std::iter::once(&candidate)).enumerate() {
        let norm = frob_norm(m);
        if norm == 0.0 {
            return Ok(false);
        }
        system.set_column(j, &(m.to_real_vector() / norm));
    }
    let sv = system.singular_values();
    let max = sv.max();
    let min = sv.min();
    Ok(min > tol * max)
}
