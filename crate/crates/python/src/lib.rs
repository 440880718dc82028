//! Python bindings. Matrices cross the boundary as lists of rows of `complex`.

use liesynth::algebra::{close_by_similarity_with, BasisCatalog, SimilarityOptions};
use liesynth::io::{read_schedule_csv, write_schedule_csv, CatalogReport};
use liesynth::{
    fixtures, AlgebraElement, IteratedSynthesis, Matrix, PulseSchedule, Step, TimefixOptions,
};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(liesynth_py, LiesynthError, PyException);

type Rows = Vec<Vec<Complex64>>;

fn err(e: liesynth::Error) -> PyErr {
    LiesynthError::new_err(e.to_string())
}

fn matrix(rows: Rows) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(err)
}

fn element(rows: Rows) -> PyResult<AlgebraElement> {
    AlgebraElement::new(matrix(rows)?).map_err(err)
}

fn elements(list: Vec<Rows>) -> PyResult<Vec<AlgebraElement>> {
    list.into_iter().map(element).collect()
}

fn rows(m: &Matrix) -> Rows {
    m.rows()
}

#[pyclass(name = "Schedule", module = "liesynth_py", skip_from_py_object)]
#[derive(Clone)]
struct PySchedule {
    inner: PulseSchedule,
}

#[pymethods]
impl PySchedule {
    #[new]
    #[pyo3(signature = (steps, repeats = 1))]
    fn new(steps: Vec<(usize, f64)>, repeats: u64) -> Self {
        let steps = steps
            .into_iter()
            .map(|(gen, duration)| Step { gen, duration })
            .collect();
        PySchedule {
            inner: PulseSchedule::new(steps).with_repeats(repeats),
        }
    }

    #[getter]
    fn steps(&self) -> Vec<(usize, f64)> {
        self.inner
            .steps
            .iter()
            .map(|s| (s.gen, s.duration))
            .collect()
    }

    #[getter]
    fn repeats(&self) -> u64 {
        self.inner.repeats
    }

    fn factor_count(&self) -> u64 {
        self.inner.factor_count()
    }

    fn has_negative(&self) -> bool {
        self.inner.has_negative()
    }

    fn merged(&self) -> Self {
        PySchedule {
            inner: self.inner.merged(),
        }
    }

    fn evaluate(&self, generators: Vec<Rows>) -> PyResult<Rows> {
        Ok(rows(
            &self.inner.evaluate(&elements(generators)?).map_err(err)?,
        ))
    }

    /// One period as `step,gen,duration` CSV.
    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_schedule_csv(&self.inner, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }

    #[staticmethod]
    #[pyo3(signature = (text, repeats = 1))]
    fn from_csv(text: &str, repeats: u64) -> PyResult<Self> {
        Ok(PySchedule {
            inner: read_schedule_csv(text.as_bytes())
                .map_err(err)?
                .with_repeats(repeats),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.steps.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Schedule({} steps, repeats={})",
            self.inner.steps.len(),
            self.inner.repeats
        )
    }
}

#[pyclass(name = "Catalog", module = "liesynth_py")]
struct PyCatalog {
    inner: BasisCatalog,
}

#[pymethods]
impl PyCatalog {
    #[getter]
    fn dim_group(&self) -> usize {
        self.inner.dim_group()
    }

    #[getter]
    fn algebra_dim(&self) -> usize {
        self.inner.algebra_dim()
    }

    #[getter]
    fn max_depth(&self) -> u32 {
        self.inner.max_depth()
    }

    #[getter]
    fn depths(&self) -> Vec<u32> {
        self.inner.depths()
    }

    fn element(&self, index: usize) -> PyResult<Rows> {
        if index >= self.inner.algebra_dim() {
            return Err(pyo3::exceptions::PyIndexError::new_err(index));
        }
        Ok(rows(self.inner.element(index).matrix()))
    }

    /// Coefficients of `h` over the catalog and the least-squares residual.
    fn decompose(&self, h: Rows) -> PyResult<(Vec<f64>, f64)> {
        let d = liesynth::decompose(&element(h)?, &self.inner).map_err(err)?;
        Ok((d.coefficients, d.residual_norm))
    }

    /// The catalog report as JSON: matrices, depths and provenance.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&CatalogReport::of(&self.inner)).map_err(|e| err(e.into()))
    }

    fn __len__(&self) -> usize {
        self.inner.algebra_dim()
    }
}

#[pyclass(name = "Synthesis", module = "liesynth_py")]
struct PySynthesis {
    #[pyo3(get)]
    n: u64,
    #[pyo3(get)]
    error: f64,
    #[pyo3(get)]
    achieved: Rows,
    #[pyo3(get)]
    schedule: PySchedule,
}

impl From<IteratedSynthesis> for PySynthesis {
    fn from(s: IteratedSynthesis) -> Self {
        PySynthesis {
            n: s.n,
            error: s.error,
            achieved: rows(&s.achieved),
            schedule: PySchedule { inner: s.schedule },
        }
    }
}

#[pyclass(name = "ExactSolution", module = "liesynth_py")]
struct PyExactSolution {
    #[pyo3(get)]
    m: u64,
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    schedule: PySchedule,
}

#[pyfunction]
fn expm(a: Rows, t: f64) -> PyResult<Rows> {
    Ok(rows(&liesynth::expm(&element(a)?, t).map_err(err)?))
}

#[pyfunction]
fn logm(u: Rows) -> PyResult<Rows> {
    Ok(rows(
        liesynth::logm_principal(&matrix(u)?).map_err(err)?.matrix(),
    ))
}

#[pyfunction]
fn bracket(a: Rows, b: Rows) -> PyResult<Rows> {
    Ok(rows(
        liesynth::bracket(&element(a)?, &element(b)?)
            .map_err(err)?
            .matrix(),
    ))
}

#[pyfunction]
fn distance(a: Rows, b: Rows) -> PyResult<f64> {
    Ok(matrix(a)?.distance(&matrix(b)?))
}

#[pyfunction]
fn close_by_brackets(generators: Vec<Rows>) -> PyResult<PyCatalog> {
    Ok(PyCatalog {
        inner: liesynth::close_by_brackets(&elements(generators)?).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (generators, seed = 0))]
fn close_by_similarity(generators: Vec<Rows>, seed: u64) -> PyResult<PyCatalog> {
    let options = SimilarityOptions {
        seed,
        ..Default::default()
    };
    Ok(PyCatalog {
        inner: close_by_similarity_with(&elements(generators)?, &options).map_err(err)?,
    })
}

#[pyfunction]
fn synthesize_trotter(h: Rows, n: u64, generators: Vec<Rows>) -> PyResult<PySynthesis> {
    Ok(
        liesynth::synthesize_trotter(&element(h)?, n, &elements(generators)?)
            .map_err(err)?
            .into(),
    )
}

#[pyfunction]
fn synthesize_combined(h: Rows, n: u64, generators: Vec<Rows>) -> PyResult<PySynthesis> {
    Ok(
        liesynth::synthesize_combined(&element(h)?, n, &elements(generators)?)
            .map_err(err)?
            .into(),
    )
}

#[pyfunction]
fn synthesize_exact(target: Rows, generators: Vec<Rows>) -> PyResult<PyExactSolution> {
    let sol = liesynth::synthesize_exact(
        &matrix(target)?,
        &elements(generators)?,
        &Default::default(),
    )
    .map_err(err)?;
    Ok(PyExactSolution {
        m: sol.m,
        times: sol.times,
        residual: sol.residual,
        schedule: PySchedule {
            inner: sol.schedule,
        },
    })
}

/// Nonnegative `t̄` with `‖e^{Bt} − e^{Bt̄}‖ ≤ eps`; returns `(t̄, bound, exact)`.
#[pyfunction]
fn positive_time(b: Rows, t: f64, eps: f64) -> PyResult<(f64, f64, bool)> {
    let r = liesynth::positive_time(&element(b)?, t, eps).map_err(err)?;
    Ok((r.t_bar, r.bound, r.exact))
}

/// Replaces every negative duration; returns the new schedule and the certified bound.
#[pyfunction]
fn rewrite_schedule(
    schedule: &PySchedule,
    generators: Vec<Rows>,
    eps: f64,
) -> PyResult<(PySchedule, f64)> {
    let out = liesynth::rewrite_schedule(
        &schedule.inner,
        &elements(generators)?,
        eps,
        &TimefixOptions::default(),
    )
    .map_err(err)?;
    Ok((
        PySchedule {
            inner: out.schedule,
        },
        out.bound,
    ))
}

#[pyfunction]
fn factor_budget(m: u64, new_elements: usize) -> u64 {
    liesynth::factor_budget(m, new_elements)
}

/// Generators and target of a built-in system, `"su2"` or `"so4"`.
#[pyfunction]
fn fixture(name: &str) -> PyResult<(Vec<Rows>, Rows)> {
    let (gens, target) = match name {
        "su2" => (fixtures::su2_generators(), fixtures::su2_target()),
        "so4" => (fixtures::so4_generators(), fixtures::so4_target()),
        other => {
            return Err(pyo3::exceptions::PyValueError::new_err(format!(
                "unknown fixture {other}"
            )))
        }
    };
    Ok((
        gens.iter().map(|g| rows(g.matrix())).collect(),
        rows(&target),
    ))
}

#[pymodule]
pub fn liesynth_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LiesynthError", m.py().get_type::<LiesynthError>())?;
    m.add_class::<PySchedule>()?;
    m.add_class::<PyCatalog>()?;
    m.add_class::<PySynthesis>()?;
    m.add_class::<PyExactSolution>()?;
    m.add_function(wrap_pyfunction!(expm, m)?)?;
    m.add_function(wrap_pyfunction!(logm, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(close_by_brackets, m)?)?;
    m.add_function(wrap_pyfunction!(close_by_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_trotter, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_combined, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_exact, m)?)?;
    m.add_function(wrap_pyfunction!(positive_time, m)?)?;
    m.add_function(wrap_pyfunction!(rewrite_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(factor_budget, m)?)?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    Ok(())
}
