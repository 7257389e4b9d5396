//! Drives the module through an embedded interpreter.

use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(uhs_lab::uhs_lab)(py);
        let globals = PyDict::new(py);
        globals.set_item("uhs_lab", module).unwrap();
        globals.set_item("json", py.import("json").unwrap()).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            panic!("{e}");
        }
    });
}

#[test]
fn structure_queries() {
    run(r#"
q = uhs_lab.Structure("Q", 100)
assert len(q) == 100
assert q.label(3) == "q 1/2" and q.relation(3, 1) == "<"
assert repr(q) == "Structure('Q', 100)"
b = uhs_lab.Structure("B(2)", 10)
assert b.relation(0, 1) in "<>|="
"#);
}

#[test]
fn prefix_round_trip() {
    run(r#"
d = uhs_lab.Structure("D", 200)
assert uhs_lab.Structure.load(d.save()).save() == d.save()
"#);
}

#[test]
fn copies_and_errors() {
    run(r#"
q = uhs_lab.Structure("Q", 2000)
v = json.loads(q.check_copy("integers"))
assert v["status"] == "fail" and v["witness"]["base"] == [0, 1]
assert json.loads(q.check_copy("dyadics"))["status"] == "pass"
for bad in (lambda: uhs_lab.Structure("B(0)", 3), lambda: q.check_copy("{"), lambda: uhs_lab.Structure("D", 10).label(10**6)):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("accepted")
"#);
}

#[test]
fn suite_and_replay() {
    run(r#"
r = uhs_lab.run_suite(1)
assert uhs_lab.exit_code(r) == 0
assert uhs_lab.exit_code(uhs_lab.replay(r)) == 0
"#);
}
