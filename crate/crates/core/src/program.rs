//! Symbolic products of exponentials and the composition rules that build them.
//!
//! A [`ProductProgram`] stands for `T(x) = Π_j exp(L_j · s_j c_j x^(2^-d_j))`
//! with `L_j` a generator and `s_j = ±1`. Atoms, inversion, nonnegative scaling,
//! concatenation and the group commutator with a square-root substitution are
//! enough to approximate `e^{Hx}` for any `H` in the bracket-generated algebra.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{decompose, BasisCatalog, Provenance};
use crate::error::{Error, Result};
use crate::matrix::{expm, matrix_power, AlgebraElement, Matrix};

/// Coefficients below this fraction of the largest one are dropped by
/// [`program_for`]. Fractional exponents would otherwise turn rounding noise
/// into visible factors.
const NEGLIGIBLE_COEFFICIENT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Sign, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be 1 or -1, got {other}")),
        }
    }
}

/// One factor `exp(L · sign · coeff · x^(2^-depth_exp))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub gen: usize,
    pub sign: Sign,
    pub coeff: f64,
    pub depth_exp: u32,
}

/// `x^(2^-d)` by repeated square roots.
fn root_power(x: f64, d: u32) -> f64 {
    (0..d).fold(x, |acc, _| acc.sqrt())
}

impl Factor {
    /// Duration of this factor at parameter `x`.
    pub fn time_at(&self, x: f64) -> f64 {
        self.sign.value() * self.coeff * root_power(x, self.depth_exp)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign == Sign::Plus { "" } else { "-" };
        write!(
            f,
            "exp({s}A{} * {}x^(1/{}))",
            self.gen + 1,
            self.coeff,
            1u64 << self.depth_exp
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductProgram {
    pub factors: Vec<Factor>,
    /// Tracked δ in `e^{Hx} = T(x) + O(x^{1+δ})`.
    pub order_delta: f64,
}

impl Default for ProductProgram {
    fn default() -> Self {
        Self::identity()
    }
}

impl ProductProgram {
    /// The empty product.
    pub fn identity() -> Self {
        ProductProgram {
            factors: Vec::new(),
            order_delta: 1.0,
        }
    }

    /// `T(x) = e^{±A_gen x}`, exact.
    pub fn atom(gen: usize, sign: Sign) -> Self {
        ProductProgram {
            factors: vec![Factor {
                gen,
                sign,
                coeff: 1.0,
                depth_exp: 0,
            }],
            order_delta: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `T^{-1}(x)`, the program for `−H`.
    pub fn invert(&self) -> Self {
        ProductProgram {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| Factor {
                    sign: f.sign.flip(),
                    ..*f
                })
                .collect(),
            order_delta: self.order_delta,
        }
    }

    /// `T(a x)`, the program for `a H` with `a ≥ 0`.
    pub fn scale(&self, a: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::invalid(format!(
                "scale factor must be finite and nonnegative, got {a}"
            )));
        }
        Ok(ProductProgram {
            factors: self
                .factors
                .iter()
                .map(|f| Factor {
                    coeff: f.coeff * root_power(a, f.depth_exp),
                    ..*f
                })
                .collect(),
            order_delta: self.order_delta,
        })
    }

    /// `T_A(x) T_B(x)`, the program for `A + B`.
    pub fn concat(&self, other: &ProductProgram) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        ProductProgram {
            factors,
            order_delta: self.order_delta.min(other.order_delta).min(1.0),
        }
    }

    /// `T_A^{-1}(√x) T_B^{-1}(√x) T_A(√x) T_B(√x)`, the program for `[A, B]`.
    pub fn commutate(&self, other: &ProductProgram) -> Self {
        let body = self
            .invert()
            .concat(&other.invert())
            .concat(self)
            .concat(other);
        ProductProgram {
            factors: body
                .factors
                .into_iter()
                .map(|f| Factor {
                    depth_exp: f.depth_exp + 1,
                    ..f
                })
                .collect(),
            order_delta: self.order_delta.min(other.order_delta).min(1.0) / 2.0,
        }
    }

    /// Concrete steps at parameter `x`, one per factor.
    pub fn steps_at(&self, x: f64) -> Vec<Step> {
        self.factors
            .iter()
            .map(|f| Step {
                gen: f.gen,
                duration: f.time_at(x),
            })
            .collect()
    }

    /// `T(x)`, multiplied left to right.
    pub fn evaluate(&self, x: f64, generators: &[AlgebraElement]) -> Result<Matrix> {
        if !(x >= 0.0) {
            return Err(Error::invalid(format!("x must be nonnegative, got {x}")));
        }
        let dim = generators
            .first()
            .ok_or_else(|| Error::invalid("generator set is empty"))?
            .dim();
        product_of_steps(&self.steps_at(x), generators, dim)
    }

    /// Schedule at `x` with adjacent same-generator steps merged.
    pub fn to_schedule(&self, x: f64) -> PulseSchedule {
        PulseSchedule::new(self.steps_at(x)).merged()
    }
}

fn product_of_steps(steps: &[Step], generators: &[AlgebraElement], dim: usize) -> Result<Matrix> {
    let mut acc = Matrix::identity(dim);
    for step in steps {
        let g = generators.get(step.gen).ok_or_else(|| {
            Error::invalid(format!(
                "step refers to generator {} but only {} are available",
                step.gen,
                generators.len()
            ))
        })?;
        acc = &acc * &expm(g, step.duration)?;
    }
    Ok(acc)
}

/// Builds the program approximating `e^{Hx}` from a bracket catalog.
///
/// Each basis element's program comes from its provenance (atoms for
/// generators, commutators for brackets). Per depth level the scaled element
/// programs are concatenated; levels are concatenated from depth 0 upward.
pub fn program_for(h: &AlgebraElement, catalog: &BasisCatalog) -> Result<ProductProgram> {
    let decomposition = decompose(h, catalog)?;
    let largest = decomposition
        .coefficients
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let mut cache: HashMap<usize, ProductProgram> = HashMap::new();
    let mut result = ProductProgram::identity();
    for depth in 0..=catalog.max_depth() {
        for (index, entry) in catalog.entries().iter().enumerate() {
            if entry.depth != depth {
                continue;
            }
            let alpha = decomposition.coefficients[index];
            if alpha.abs() <= NEGLIGIBLE_COEFFICIENT * largest || alpha == 0.0 {
                continue;
            }
            let base = element_program(catalog, index, &mut cache)?;
            let signed = if alpha > 0.0 { base } else { base.invert() };
            result = result.concat(&signed.scale(alpha.abs())?);
        }
    }
    Ok(result)
}

fn element_program(
    catalog: &BasisCatalog,
    index: usize,
    cache: &mut HashMap<usize, ProductProgram>,
) -> Result<ProductProgram> {
    if let Some(p) = cache.get(&index) {
        return Ok(p.clone());
    }
    let program = match catalog.entries()[index].provenance {
        Provenance::Generator { index: gen } => ProductProgram::atom(gen, Sign::Plus),
        Provenance::Bracket { left, right } => {
            let l = element_program(catalog, left, cache)?;
            let r = element_program(catalog, right, cache)?;
            l.commutate(&r)
        }
        Provenance::Similarity { .. } => {
            return Err(Error::invalid(
                "product programs need a bracket catalog; element has similarity provenance",
            ))
        }
    };
    cache.insert(index, program.clone());
    Ok(program)
}

/// `e^{E_index · t}` rewritten as a word in the generators.
///
/// Similarity elements expand to `e^{E_l t̄} e^{E_k t} e^{-E_l t̄}`, recursively.
pub fn expand_exponential(catalog: &BasisCatalog, index: usize, t: f64) -> Result<Vec<Step>> {
    let mut out = Vec::new();
    expand_into(catalog, index, t, &mut out)?;
    Ok(out)
}

fn expand_into(catalog: &BasisCatalog, index: usize, t: f64, out: &mut Vec<Step>) -> Result<()> {
    let entry = catalog
        .entries()
        .get(index)
        .ok_or_else(|| Error::invalid(format!("catalog index {index} out of range")))?;
    match entry.provenance {
        Provenance::Generator { index: gen } => out.push(Step { gen, duration: t }),
        Provenance::Similarity {
            conjugator,
            conjugated,
            t: t_bar,
        } => {
            expand_into(catalog, conjugator, t_bar, out)?;
            expand_into(catalog, conjugated, t, out)?;
            expand_into(catalog, conjugator, -t_bar, out)?;
        }
        Provenance::Bracket { .. } => {
            return Err(Error::invalid(
                "bracket elements have no exact exponential word; use a product program",
            ))
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub gen: usize,
    pub duration: f64,
}

/// A switching sequence: `steps` applied left to right, the whole period
/// repeated `repeats` times.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    pub steps: Vec<Step>,
    pub repeats: u64,
}

impl PulseSchedule {
    pub fn new(steps: Vec<Step>) -> Self {
        PulseSchedule { steps, repeats: 1 }
    }

    pub fn with_repeats(mut self, repeats: u64) -> Self {
        self.repeats = repeats;
        self
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    /// Adjacent steps on the same generator summed; zero-duration steps dropped.
    pub fn merged(&self) -> PulseSchedule {
        let mut out: Vec<Step> = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            if step.duration == 0.0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.gen == step.gen => {
                    last.duration += step.duration;
                    if last.duration == 0.0 {
                        out.pop();
                    }
                }
                _ => out.push(*step),
            }
        }
        PulseSchedule {
            steps: out,
            repeats: self.repeats,
        }
    }

    pub fn has_negative(&self) -> bool {
        self.steps.iter().any(|s| s.duration < 0.0)
    }

    /// Total number of exponentials applied.
    pub fn factor_count(&self) -> u64 {
        (self.steps.len() as u64).saturating_mul(self.repeats)
    }

    /// Product of one period.
    pub fn period_product(&self, generators: &[AlgebraElement]) -> Result<Matrix> {
        let dim = generators
            .first()
            .ok_or_else(|| Error::invalid("generator set is empty"))?
            .dim();
        if self.steps.iter().any(|s| !s.duration.is_finite()) {
            return Err(Error::invalid("schedule has non-finite durations"));
        }
        product_of_steps(&self.steps, generators, dim)
    }

    /// Product of the whole schedule, periods combined by repeated squaring.
    pub fn evaluate(&self, generators: &[AlgebraElement]) -> Result<Matrix> {
        Ok(matrix_power(
            &self.period_product(generators)?,
            self.repeats,
        ))
    }
}

/// The sequence `d_0 = 1, d_1 = 3, d_j = 2 d_{j-1} + d_{j-2}`.
pub fn budget_sequence(len: usize) -> Vec<u64> {
    let mut d: Vec<u64> = Vec::with_capacity(len);
    for j in 0..len {
        let next = match j {
            0 => 1,
            1 => 3,
            _ => d[j - 1].saturating_mul(2).saturating_add(d[j - 2]),
        };
        d.push(next);
    }
    d
}

/// Worst-case exponential count for `m` generators plus `new_elements`
/// similarity-generated basis elements: `m d_0 + Σ_{j=1}^{new} d_j`.
pub fn factor_budget(m: u64, new_elements: usize) -> u64 {
    budget_sequence(new_elements + 1)
        .iter()
        .skip(1)
        .fold(m, |acc, d| acc.saturating_add(*d))
}
