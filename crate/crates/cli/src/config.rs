//! Job configuration: a JSON file, optionally layered over a built-in fixture.

use std::path::{Path, PathBuf};

use liesynth::algebra::{close_by_brackets, BasisCatalog, SimilarityOptions};
use liesynth::exact::logarithm_with_root;
use liesynth::fixtures;
use liesynth::{expm, AlgebraElement, Matrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_NS: [u64; 9] = [1, 2, 5, 10, 20, 50, 100, 1000, 10000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Trotter,
    Combined,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Trotter => "trotter",
            Method::Combined => "combined",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogKind {
    #[default]
    Brackets,
    Similarity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub label: Option<String>,
    pub matrix: Matrix,
}

/// Either `matrix` (the target group element) or `coefficients` over a named
/// catalog, giving the logarithm `scale · Σ c_i B_i`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub matrix: Option<Matrix>,
    pub coefficients: Option<Vec<f64>>,
    #[serde(default)]
    pub catalog: CatalogKind,
    pub scale: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conjugation {
    pub conjugator: usize,
    pub conjugated: usize,
    pub t: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySpec {
    pub t_candidates: Option<Vec<f64>>,
    pub random_draws: Option<usize>,
    /// Similarity elements pushed in this order before any scan.
    #[serde(default)]
    pub recipe: Vec<Conjugation>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub fixture: Option<String>,
    pub generators: Option<Vec<GeneratorSpec>>,
    pub target: Option<TargetSpec>,
    pub method: Option<Method>,
    pub n: Option<u64>,
    pub error_goal: Option<f64>,
    /// Total error allowed for replacing negative durations; no replacement when absent.
    pub eps_timefix: Option<f64>,
    pub ordering: Option<Vec<usize>>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub ns: Option<Vec<u64>>,
    pub closure: Option<CatalogKind>,
    pub similarity: Option<SimilaritySpec>,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("malformed config {}: {e}", path.display())))
    }

    pub fn fixture(name: &str) -> Result<Self, CliError> {
        let spec = |e: &AlgebraElement| GeneratorSpec {
            label: e.label().map(str::to_owned),
            matrix: e.matrix().clone(),
        };
        match name {
            "su2" => Ok(JobConfig {
                generators: Some(fixtures::su2_generators().iter().map(spec).collect()),
                target: Some(TargetSpec {
                    matrix: Some(fixtures::su2_target()),
                    ..Default::default()
                }),
                method: Some(Method::Exact),
                ..Default::default()
            }),
            "so4" => {
                let mut coefficients = vec![0.0; 6];
                coefficients[4] = 1.0;
                Ok(JobConfig {
                    generators: Some(fixtures::so4_generators().iter().map(spec).collect()),
                    target: Some(TargetSpec {
                        coefficients: Some(coefficients),
                        catalog: CatalogKind::Brackets,
                        scale: Some(fixtures::SO4_TARGET_SCALE),
                        ..Default::default()
                    }),
                    method: Some(Method::Combined),
                    n: Some(10_000),
                    ordering: Some(fixtures::SO4_COMBINED_ORDERING.to_vec()),
                    similarity: Some(SimilaritySpec {
                        recipe: vec![Conjugation {
                            conjugator: 1,
                            conjugated: 0,
                            t: fixtures::SO4_CONJUGATION_TIME,
                        }],
                        ..Default::default()
                    }),
                    ..Default::default()
                })
            }
            other => Err(CliError::config(format!(
                "unknown fixture '{other}' (expected su2 or so4)"
            ))),
        }
    }

    /// Fields set here replace those of `base`. Setting `error_goal` also drops the base `n`.
    pub fn over(self, base: JobConfig) -> JobConfig {
        let base_n = if self.error_goal.is_some() {
            None
        } else {
            base.n
        };
        JobConfig {
            fixture: self.fixture.or(base.fixture),
            generators: self.generators.or(base.generators),
            target: self.target.or(base.target),
            method: self.method.or(base.method),
            n: self.n.or(base_n),
            error_goal: self.error_goal.or(base.error_goal),
            eps_timefix: self.eps_timefix.or(base.eps_timefix),
            ordering: self.ordering.or(base.ordering),
            output_dir: self.output_dir.or(base.output_dir),
            seed: self.seed.or(base.seed),
            ns: self.ns.or(base.ns),
            closure: self.closure.or(base.closure),
            similarity: self.similarity.or(base.similarity),
        }
    }
}

/// Where the target came from; `log` is always available, `matrix` is `e^log`
/// unless the target was given as a matrix.
pub struct Target {
    pub log: AlgebraElement,
    pub matrix: Matrix,
}

/// A validated job.
pub struct Job {
    pub generators: Vec<AlgebraElement>,
    target: Option<TargetSpec>,
    pub method: Method,
    pub n: Option<u64>,
    pub error_goal: Option<f64>,
    pub eps_timefix: Option<f64>,
    pub ordering: Option<Vec<usize>>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub ns: Vec<u64>,
    pub closure: CatalogKind,
    similarity: SimilaritySpec,
}

impl Job {
    pub fn from_config(cfg: JobConfig) -> Result<Self, CliError> {
        let specs = cfg.generators.ok_or_else(|| {
            CliError::config("config has no generators (set `generators` or `fixture`)")
        })?;
        if specs.is_empty() {
            return Err(CliError::config("generator list is empty"));
        }
        let generators = specs
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                let e = AlgebraElement::new(g.matrix)
                    .map_err(|e| CliError::config(format!("generator {i}: {e}")))?;
                Ok(match g.label {
                    Some(l) => e.with_label(l),
                    None => e.with_label(format!("A{}", i + 1)),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        if cfg.n.is_some() && cfg.error_goal.is_some() {
            return Err(CliError::config("set only one of `n` and `error_goal`"));
        }
        if cfg.n == Some(0) {
            return Err(CliError::config("`n` must be at least 1"));
        }
        if let Some(g) = cfg.error_goal {
            if !(g > 0.0) {
                return Err(CliError::config("`error_goal` must be positive"));
            }
        }
        if let Some(e) = cfg.eps_timefix {
            if !(e > 0.0) {
                return Err(CliError::config("`eps_timefix` must be positive"));
            }
        }
        let ns = cfg.ns.unwrap_or_else(|| DEFAULT_NS.to_vec());
        if ns.contains(&0) {
            return Err(CliError::config("`ns` entries must be at least 1"));
        }
        Ok(Job {
            generators,
            target: cfg.target,
            method: cfg.method.unwrap_or(Method::Combined),
            n: cfg.n,
            error_goal: cfg.error_goal,
            eps_timefix: cfg.eps_timefix,
            ordering: cfg.ordering,
            output_dir: cfg.output_dir,
            seed: cfg.seed.unwrap_or(0),
            ns,
            closure: cfg.closure.unwrap_or_default(),
            similarity: cfg.similarity.unwrap_or_default(),
        })
    }

    pub fn similarity_options(&self) -> SimilarityOptions {
        let mut opts = SimilarityOptions {
            seed: self.seed,
            ..Default::default()
        };
        if let Some(t) = &self.similarity.t_candidates {
            opts.t_candidates = t.clone();
        }
        if let Some(d) = self.similarity.random_draws {
            opts.random_draws = d;
        }
        opts
    }

    /// Generators plus the configured similarity recipe.
    pub fn seeded_catalog(&self) -> Result<BasisCatalog, CliError> {
        let mut catalog = BasisCatalog::from_generators(&self.generators)?;
        for (i, c) in self.similarity.recipe.iter().enumerate() {
            if catalog
                .push_similarity(c.conjugator, c.conjugated, c.t)?
                .is_none()
            {
                return Err(CliError::config(format!(
                    "similarity recipe entry {i} is dependent on the catalog so far"
                )));
            }
        }
        Ok(catalog)
    }

    pub fn target(&self) -> Result<Target, CliError> {
        let spec = self
            .target
            .as_ref()
            .ok_or_else(|| CliError::config("config has no target"))?;
        match (&spec.matrix, &spec.coefficients) {
            (Some(m), None) => {
                if spec.scale.is_some() {
                    return Err(CliError::config(
                        "`scale` applies only to coefficient targets",
                    ));
                }
                if m.dim() != self.generators[0].dim() {
                    return Err(CliError::config(
                        "target dimension does not match generators",
                    ));
                }
                if m.unitarity_defect() > 1e-8 {
                    return Err(CliError::config("target matrix is not unitary"));
                }
                let (log, _) = logarithm_with_root(m)?;
                Ok(Target {
                    log,
                    matrix: m.clone(),
                })
            }
            (None, Some(c)) => {
                let catalog = match spec.catalog {
                    CatalogKind::Brackets => close_by_brackets(&self.generators)?,
                    CatalogKind::Similarity => liesynth::algebra::close_by_similarity_with(
                        &self.generators,
                        &self.similarity_options(),
                    )?,
                };
                if c.len() != catalog.algebra_dim() {
                    return Err(CliError::config(format!(
                        "target has {} coefficients, the {} catalog has {} elements",
                        c.len(),
                        match spec.catalog {
                            CatalogKind::Brackets => "bracket",
                            CatalogKind::Similarity => "similarity",
                        },
                        catalog.algebra_dim()
                    )));
                }
                let scale = spec.scale.unwrap_or(1.0);
                let mut sum = Matrix::zeros(catalog.dim_group());
                for (i, ci) in c.iter().enumerate() {
                    sum = &sum + &catalog.element(i).matrix().scale(ci * scale);
                }
                let log = AlgebraElement::new(sum)?;
                let matrix = expm(&log, 1.0)?;
                Ok(Target { log, matrix })
            }
            _ => Err(CliError::config(
                "target needs exactly one of `matrix` and `coefficients`",
            )),
        }
    }
}
