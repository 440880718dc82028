//! Construction of the dynamical Lie algebra from a generator set.
//!
//! Two closure routines produce a [`BasisCatalog`]: breadth-first bracketing
//! (each element tagged with its bracket depth) and closure by similarity
//! transforms `e^{L t} K e^{-L t}`, whose exponentials can be rewritten as
//! conjugation words in the generators.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    bracket, expm, frob_norm, independent, AlgebraElement, Matrix, DEFAULT_INDEPENDENCE_TOL,
};

/// Residual above which a decomposition is rejected as outside the algebra.
pub const MAX_DECOMPOSITION_RESIDUAL: f64 = 1e-6;

/// Brackets smaller than this fraction of `‖A‖‖B‖` are treated as zero.
const NEGLIGIBLE_BRACKET: f64 = 1e-12;

/// How a catalog element was obtained. Indices refer to earlier catalog entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Generator {
        index: usize,
    },
    /// `[left, right]`, `right` always a generator.
    Bracket {
        left: usize,
        right: usize,
    },
    /// `e^{conjugator · t} conjugated e^{-conjugator · t}`.
    Similarity {
        conjugator: usize,
        conjugated: usize,
        t: f64,
    },
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub element: AlgebraElement,
    pub depth: u32,
    pub provenance: Provenance,
}

/// Ordered, depth-tagged, linearly independent spanning set.
#[derive(Clone, Debug)]
pub struct BasisCatalog {
    dim_group: usize,
    num_generators: usize,
    entries: Vec<CatalogEntry>,
}

impl BasisCatalog {
    /// A catalog holding only the generators, at depth 0.
    pub fn from_generators(generators: &[AlgebraElement]) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::invalid("generator set is empty"))?;
        let dim_group = first.dim();
        let mut catalog = BasisCatalog {
            dim_group,
            num_generators: generators.len(),
            entries: Vec::with_capacity(generators.len()),
        };
        for (index, g) in generators.iter().enumerate() {
            if g.dim() != dim_group {
                return Err(Error::invalid("generators have different dimensions"));
            }
            if !catalog.admits(g.matrix())? {
                return Err(Error::invalid(format!(
                    "generator {index} is linearly dependent on the preceding ones"
                )));
            }
            let element = match g.label() {
                Some(_) => g.clone(),
                None => g.clone().with_label(format!("A{}", index + 1)),
            };
            catalog.entries.push(CatalogEntry {
                element,
                depth: 0,
                provenance: Provenance::Generator { index },
            });
        }
        Ok(catalog)
    }

    pub fn dim_group(&self) -> usize {
        self.dim_group
    }

    pub fn algebra_dim(&self) -> usize {
        self.entries.len()
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn element(&self, index: usize) -> &AlgebraElement {
        &self.entries[index].element
    }

    pub fn generators(&self) -> Vec<AlgebraElement> {
        self.entries[..self.num_generators]
            .iter()
            .map(|e| e.element.clone())
            .collect()
    }

    pub fn max_depth(&self) -> u32 {
        self.entries.iter().map(|e| e.depth).max().unwrap_or(0)
    }

    pub fn depths(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.depth).collect()
    }

    fn matrices(&self) -> impl Iterator<Item = &Matrix> {
        self.entries.iter().map(|e| e.element.matrix())
    }

    fn admits(&self, candidate: &Matrix) -> Result<bool> {
        independent(self.matrices(), candidate, DEFAULT_INDEPENDENCE_TOL)
    }

    fn push(&mut self, element: AlgebraElement, depth: u32, provenance: Provenance) -> usize {
        let index = self.entries.len();
        let element = element.with_label(format!("D{}", index + 1));
        self.entries.push(CatalogEntry {
            element,
            depth,
            provenance,
        });
        index
    }

    /// Appends `e^{E_l t} E_k e^{-E_l t}` if it is independent of the catalog.
    /// Returns the new index, or `None` when the conjugate is dependent.
    pub fn push_similarity(
        &mut self,
        conjugator: usize,
        conjugated: usize,
        t: f64,
    ) -> Result<Option<usize>> {
        let n = self.entries.len();
        if conjugator >= n || conjugated >= n {
            return Err(Error::invalid("similarity indices out of range"));
        }
        let candidate = conjugate(self.element(conjugator), self.element(conjugated), t)?;
        if !self.admits(candidate.matrix())? {
            return Ok(None);
        }
        let depth = self.max_depth() + 1;
        Ok(Some(self.push(
            candidate,
            depth,
            Provenance::Similarity {
                conjugator,
                conjugated,
                t,
            },
        )))
    }

    /// First pair `(l, k)`, `l < k`, whose bracket leaves the span.
    fn first_escaping_pair(&self) -> Result<Option<(usize, usize)>> {
        let n = self.entries.len();
        for l in 0..n {
            for k in (l + 1)..n {
                let (a, b) = (self.element(l), self.element(k));
                let br = bracket(a, b)?;
                if is_negligible(&br, a, b) {
                    continue;
                }
                if self.admits(br.matrix())? {
                    return Ok(Some((l, k)));
                }
            }
        }
        Ok(None)
    }
}

fn is_negligible(br: &AlgebraElement, a: &AlgebraElement, b: &AlgebraElement) -> bool {
    frob_norm(br.matrix()) <= NEGLIGIBLE_BRACKET * frob_norm(a.matrix()) * frob_norm(b.matrix())
}

/// `e^{L t} K e^{-L t}`.
pub fn conjugate(l: &AlgebraElement, k: &AlgebraElement, t: f64) -> Result<AlgebraElement> {
    if l.dim() != k.dim() {
        return Err(Error::invalid("dimension mismatch in conjugation"));
    }
    let u = expm(l, t)?;
    let m = &(&u * k.matrix()) * &u.adjoint();
    Ok(AlgebraElement::from_computed(m.into_inner()))
}

/// Breadth-first bracket closure.
///
/// Level `k+1` is extracted from `[D, A_j]` for `D` in level `k`; candidates
/// are enumerated with the generator index outer and the level element inner,
/// and each is kept if independent of everything kept so far.
pub fn close_by_brackets(generators: &[AlgebraElement]) -> Result<BasisCatalog> {
    let mut catalog = BasisCatalog::from_generators(generators)?;
    let mut level: Vec<usize> = (0..catalog.num_generators).collect();
    let mut depth = 0;
    while !level.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for j in 0..catalog.num_generators {
            for &d in &level {
                let (a, b) = (catalog.element(d), catalog.element(j));
                let br = bracket(a, b)?;
                if is_negligible(&br, a, b) || !catalog.admits(br.matrix())? {
                    continue;
                }
                let index = catalog.push(br, depth, Provenance::Bracket { left: d, right: j });
                next.push(index);
            }
        }
        log::debug!("bracket depth {depth}: {} new elements", next.len());
        level = next;
    }
    Ok(catalog)
}

#[derive(Clone, Debug)]
pub struct SimilarityOptions {
    /// Conjugation times tried in order before the random scan.
    pub t_candidates: Vec<f64>,
    /// Number of random draws after the fixed candidates fail.
    pub random_draws: usize,
    pub seed: u64,
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        SimilarityOptions {
            t_candidates: default_t_candidates(),
            random_draws: 64,
            seed: 0,
        }
    }
}

impl SimilarityOptions {
    pub fn with_candidates(t_candidates: Vec<f64>) -> Self {
        SimilarityOptions {
            t_candidates,
            ..Default::default()
        }
    }
}

/// `±π/8, ±π/4, ±3π/8, ±π/2, ±3π/4`.
pub fn default_t_candidates() -> Vec<f64> {
    [1.0, 2.0, 3.0, 4.0, 6.0]
        .iter()
        .flat_map(|k| [k * PI / 8.0, -k * PI / 8.0])
        .collect()
}

/// Incremental similarity closure; each [`SimilarityClosure::step`] adds one element.
pub struct SimilarityClosure {
    catalog: BasisCatalog,
    options: SimilarityOptions,
    rng: ChaCha8Rng,
}

impl SimilarityClosure {
    pub fn new(generators: &[AlgebraElement], options: SimilarityOptions) -> Result<Self> {
        Ok(Self::from_catalog(
            BasisCatalog::from_generators(generators)?,
            options,
        ))
    }

    /// Continues from a partial catalog, e.g. one with hand-picked similarity elements.
    pub fn from_catalog(catalog: BasisCatalog, options: SimilarityOptions) -> Self {
        SimilarityClosure {
            catalog,
            rng: ChaCha8Rng::seed_from_u64(options.seed),
            options,
        }
    }

    pub fn catalog(&self) -> &BasisCatalog {
        &self.catalog
    }

    pub fn into_catalog(self) -> BasisCatalog {
        self.catalog
    }

    /// Adds one similarity element. Returns `false` once the catalog is bracket-closed.
    pub fn step(&mut self) -> Result<bool> {
        let Some((l, k)) = self.catalog.first_escaping_pair()? else {
            return Ok(false);
        };
        for &t in &self.options.t_candidates {
            if self.catalog.push_similarity(l, k, t)?.is_some() {
                return Ok(true);
            }
        }
        // Widen the range every 16 draws.
        let mut half_width = PI;
        for draw in 0..self.options.random_draws {
            if draw > 0 && draw % 16 == 0 {
                half_width *= 2.0;
            }
            let t = -half_width + 2.0 * half_width * (1.0 - self.rng.gen::<f64>());
            if self.catalog.push_similarity(l, k, t)?.is_some() {
                return Ok(true);
            }
        }
        Err(Error::ExhaustedCandidates {
            conjugator: l,
            conjugated: k,
            tried: self.options.t_candidates.len() + self.options.random_draws,
        })
    }
}

/// Closure where every non-generator element is a similarity transform.
pub fn close_by_similarity_with(
    generators: &[AlgebraElement],
    options: &SimilarityOptions,
) -> Result<BasisCatalog> {
    let mut closure = SimilarityClosure::new(generators, options.clone())?;
    while closure.step()? {}
    Ok(closure.into_catalog())
}

pub fn close_by_similarity(
    generators: &[AlgebraElement],
    t_candidates: &[f64],
) -> Result<BasisCatalog> {
    close_by_similarity_with(
        generators,
        &SimilarityOptions::with_candidates(t_candidates.to_vec()),
    )
}

/// Coefficients of `H` over the catalog, aligned with catalog order.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
}

/// Least-squares expansion of `h` over `elements`; no residual check.
pub fn least_squares(h: &Matrix, elements: &[&Matrix]) -> Result<Decomposition> {
    if elements.iter().any(|e| e.dim() != h.dim()) {
        return Err(Error::invalid("dimension mismatch in decomposition"));
    }
    if elements.is_empty() {
        return Ok(Decomposition {
            coefficients: Vec::new(),
            residual_norm: frob_norm(h),
        });
    }
    let rows = 2 * h.dim() * h.dim();
    let norms: Vec<f64> = elements
        .iter()
        .map(|e| frob_norm(e).max(f64::MIN_POSITIVE))
        .collect();
    let mut system = DMatrix::<f64>::zeros(rows, elements.len());
    for (j, e) in elements.iter().enumerate() {
        system.set_column(j, &(e.to_real_vector() / norms[j]));
    }
    let rhs: DVector<f64> = h.to_real_vector();
    let solution = system
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?;
    let coefficients: Vec<f64> = solution.iter().zip(&norms).map(|(x, n)| x / n).collect();
    let mut recon = Matrix::zeros(h.dim());
    for (c, e) in coefficients.iter().zip(elements) {
        recon = &recon + &e.scale(*c);
    }
    Ok(Decomposition {
        residual_norm: h.distance(&recon),
        coefficients,
    })
}

/// Expansion of `h` over the catalog; fails if `h` is outside its span.
pub fn decompose(h: &AlgebraElement, catalog: &BasisCatalog) -> Result<Decomposition> {
    if h.dim() != catalog.dim_group() {
        return Err(Error::invalid("dimension mismatch in decomposition"));
    }
    let elements: Vec<&Matrix> = catalog.matrices().collect();
    let d = least_squares(h.matrix(), &elements)?;
    if d.residual_norm > MAX_DECOMPOSITION_RESIDUAL {
        return Err(Error::ResidualTooLarge(d.residual_norm));
    }
    Ok(d)
}
