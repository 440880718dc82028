use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn run(code: &std::ffi::CStr) {
    Python::attach(|py| {
        let module = wrap_pymodule!(liesynth_py::liesynth_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("ls", module).unwrap();
        if let Err(e) = py.run(code, Some(&globals), None) {
            e.display(py);
            panic!("python check failed");
        }
    });
}

#[test]
fn fixtures_and_closure() {
    run(c"
gens, target = ls.fixture('so4')
cat = ls.close_by_brackets(gens)
assert cat.algebra_dim == 6 and cat.max_depth == 3
assert cat.depths == [0, 0, 1, 2, 2, 3]
coeffs, residual = cat.decompose(cat.element(4))
assert abs(coeffs[4] - 1) < 1e-12 and residual < 1e-12
assert ls.close_by_similarity(ls.fixture('su2')[0]).algebra_dim == 3
");
}

#[test]
fn synthesis_round_trip() {
    run(c"
gens, target = ls.fixture('su2')
sol = ls.synthesize_exact(target, gens)
assert sol.residual < 1e-10
assert ls.distance(sol.schedule.evaluate(gens), target) < 1e-10
run = ls.synthesize_combined(ls.logm(target), 50, gens)
assert run.n == 50 and run.schedule.repeats == 50
assert abs(ls.distance(run.achieved, target) - run.error) < 1e-12
");
}

#[test]
fn errors_become_exceptions() {
    run(c"
try:
    ls.expm([[1, 0], [0, 1]], 1.0)
except ls.LiesynthError as e:
    assert 'anti-Hermitian' in str(e) or 'invalid' in str(e)
else:
    raise AssertionError('expected LiesynthError')
try:
    ls.fixture('so3')
except ValueError:
    pass
else:
    raise AssertionError('expected ValueError')
");
}
