use std::ffi::CString;

use pyo3::prelude::*;

use lemniscatic_py::lemniscatic_py;

fn run(code: &str) {
    pyo3::append_to_inittab!(lemniscatic_py);
    Python::initialize();
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        py.run(&code, None, None).unwrap_or_else(|e| {
            e.display(py);
            panic!("python code failed");
        });
    });
}

#[test]
fn solve_and_evaluate_from_python() {
    run(r#"
import lemniscatic_py as lp
p = lp.Problem.two_disks(0.5, n=64)
assert p.ell == 2 and p.n == 64
s = p.solve()
assert s.converged, s.failure
assert abs(sum(s.exponents) - 1) < 1e-12
assert abs(s.tau - p.capacity()) < 1e-8
assert len(s.gmres_iterations) == 2
vals = s.evaluate([0 + 2j, 1 + 0j, 5 + 0j], policy="normalized")
assert vals[1] is None and s.modulus(vals[0]) > s.tau
try:
    s.evaluate([3j], policy="fast")
    raise AssertionError("bad policy accepted")
except ValueError:
    pass
try:
    lp.Problem.circle(0j, -1.0)
    raise AssertionError("negative radius accepted")
except ValueError:
    pass
"#);
}
