//! Python bindings for `viscodual`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use viscodual::duality;
use viscodual::eigenstress::assemble_eigenstress;
use viscodual::io::{self, Spacing, TOL_SYMMETRY};
use viscodual::kernel::{Kernel, Limit, LimitReport, Mode};
use viscodual::matrix6::{Matrix6, Vector6};
use viscodual::response::{respond, respond_creep, StrainHistory};
use viscodual::verify::{self, CheckReport};
use viscodual::{Error, MatrixCreep, MatrixRelaxation, ScalarCreep, ScalarRelaxation};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numeric(m) => PyArithmeticError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

type Rows = Vec<Vec<f64>>;

fn matrix(rows: &Rows) -> PyResult<Matrix6> {
    if rows.len() != 6 || rows.iter().any(|r| r.len() != 6) {
        return Err(PyValueError::new_err("matrix coefficients must be 6x6"));
    }
    let arr: [[f64; 6]; 6] = std::array::from_fn(|i| std::array::from_fn(|j| rows[i][j]));
    Matrix6::from_rows(&arr, TOL_SYMMETRY).map_err(to_py)
}

fn rows(m: &Matrix6) -> Rows {
    m.to_rows().iter().map(|r| r.to_vec()).collect()
}

/// A number, a Voigt 6-vector or a 6x6 matrix, as returned to Python.
#[derive(IntoPyObject)]
enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(Rows),
}

fn limit<T>(l: &Limit<T>, f: impl Fn(&T) -> Value) -> Value {
    match l {
        Limit::Finite(v) => f(v),
        Limit::Infinite => Value::Scalar(f64::INFINITY),
    }
}

fn limit_pairs<T>(r: &LimitReport<T>, f: impl Fn(&T) -> Value) -> BTreeMap<&'static str, Value> {
    let mut out = vec![
        ("value_at_zero", limit(&r.value_at_zero, &f)),
        ("value_at_infinity", limit(&r.value_at_infinity, &f)),
        ("derivative_at_zero", limit(&r.derivative_at_zero, &f)),
        ("derivative_at_infinity", limit(&r.derivative_at_infinity, &f)),
    ];
    if let Some(n) = &r.impulse {
        out.push(("impulse", f(n)));
    }
    out.into_iter().collect()
}

fn entries(report: CheckReport) -> Vec<(String, bool, f64, f64)> {
    report.entries.into_iter().map(|e| (e.name, e.passed, e.residual, e.tolerance)).collect()
}

/// Relaxation or creep kernel, scalar or 6x6 (Voigt).
#[pyclass(name = "Kernel", module = "viscodual", frozen)]
pub struct PyKernel {
    inner: Kernel,
}

#[pymethods]
impl PyKernel {
    /// `N·δ(t) + B + Σ w·exp(−r t)` from `(rate, weight)` pairs.
    #[staticmethod]
    #[pyo3(signature = (newtonian, equilibrium, modes))]
    fn scalar_relaxation(newtonian: f64, equilibrium: f64, modes: Vec<(f64, f64)>) -> PyResult<Self> {
        let modes = modes.into_iter().map(|(r, w)| Mode::new(r, w)).collect();
        let k = ScalarRelaxation::new(newtonian, equilibrium, modes).map_err(to_py)?;
        Ok(PyKernel { inner: Kernel::ScalarRelaxation(k) })
    }

    /// Pure Newtonian relaxation kernel `N·δ(t)`.
    #[staticmethod]
    fn dashpot(newtonian: f64) -> PyResult<Self> {
        let k = ScalarRelaxation::pure_newtonian(newtonian).map_err(to_py)?;
        Ok(PyKernel { inner: Kernel::ScalarRelaxation(k) })
    }

    /// `A + D·t + Σ (w/r)(1 − exp(−r t))` from `(rate, weight)` pairs.
    #[staticmethod]
    #[pyo3(signature = (instantaneous, fluidity, modes))]
    fn scalar_creep(instantaneous: f64, fluidity: f64, modes: Vec<(f64, f64)>) -> PyResult<Self> {
        let modes = modes.into_iter().map(|(r, w)| Mode::new(r, w)).collect();
        let c = ScalarCreep::new(instantaneous, fluidity, modes).map_err(to_py)?;
        Ok(PyKernel { inner: Kernel::ScalarCreep(c) })
    }

    #[staticmethod]
    fn matrix_relaxation(newtonian: Rows, equilibrium: Rows, modes: Vec<(f64, Rows)>) -> PyResult<Self> {
        let modes = modes
            .iter()
            .map(|(r, w)| Ok(Mode::new(*r, matrix(w)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let k = MatrixRelaxation::new(matrix(&newtonian)?, matrix(&equilibrium)?, modes).map_err(to_py)?;
        Ok(PyKernel { inner: Kernel::MatrixRelaxation(k) })
    }

    #[staticmethod]
    fn matrix_creep(instantaneous: Rows, fluidity: Rows, modes: Vec<(f64, Rows)>) -> PyResult<Self> {
        let modes = modes
            .iter()
            .map(|(r, w)| Ok(Mode::new(*r, matrix(w)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let c = MatrixCreep::new(matrix(&instantaneous)?, matrix(&fluidity)?, modes).map_err(to_py)?;
        Ok(PyKernel { inner: Kernel::MatrixCreep(c) })
    }

    /// Parses a material document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyKernel { inner: io::parse_material(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        io::serialize_material(&self.inner)
    }

    /// "relaxation" or "creep".
    #[getter]
    fn kind(&self) -> &'static str {
        if self.inner.is_relaxation() {
            "relaxation"
        } else {
            "creep"
        }
    }

    #[getter]
    fn is_matrix(&self) -> bool {
        self.inner.is_matrix()
    }

    /// `(rate, weight)` pairs, ascending in rate.
    #[getter]
    fn modes(&self) -> Vec<(f64, Value)> {
        match &self.inner {
            Kernel::ScalarRelaxation(k) => k.modes().iter().map(|m| (m.rate, Value::Scalar(m.weight))).collect(),
            Kernel::ScalarCreep(c) => c.modes().iter().map(|m| (m.rate, Value::Scalar(m.weight))).collect(),
            Kernel::MatrixRelaxation(k) => k.modes().iter().map(|m| (m.rate, Value::Matrix(rows(&m.weight)))).collect(),
            Kernel::MatrixCreep(c) => c.modes().iter().map(|m| (m.rate, Value::Matrix(rows(&m.weight)))).collect(),
        }
    }

    /// The two non-modal coefficients: `(newtonian, equilibrium)` for
    /// relaxation, `(instantaneous, fluidity)` for creep.
    #[getter]
    fn coefficients(&self) -> (Value, Value) {
        match &self.inner {
            Kernel::ScalarRelaxation(k) => (Value::Scalar(k.newtonian()), Value::Scalar(k.equilibrium())),
            Kernel::ScalarCreep(c) => (Value::Scalar(c.instantaneous()), Value::Scalar(c.fluidity())),
            Kernel::MatrixRelaxation(k) => (Value::Matrix(rows(&k.newtonian())), Value::Matrix(rows(&k.equilibrium()))),
            Kernel::MatrixCreep(c) => (Value::Matrix(rows(&c.instantaneous())), Value::Matrix(rows(&c.fluidity()))),
        }
    }

    /// Kernel value at `t ≥ 0`, without the Dirac term; at `t = 0` the
    /// right-hand limit.
    fn __call__(&self, t: f64) -> PyResult<Value> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(PyValueError::new_err(format!("time must be finite and nonnegative (got {t})")));
        }
        Ok(match &self.inner {
            Kernel::ScalarRelaxation(k) => Value::Scalar(k.eval_continuous(t)),
            Kernel::ScalarCreep(c) => Value::Scalar(c.eval(t).map_err(to_py)?),
            Kernel::MatrixRelaxation(k) => Value::Matrix(rows(&k.eval_continuous(t))),
            Kernel::MatrixCreep(c) => Value::Matrix(rows(&c.eval(t).map_err(to_py)?)),
        })
    }

    /// `p` times the Laplace transform at `p > 0`.
    fn laplace_times_p(&self, p: f64) -> PyResult<Value> {
        Ok(match &self.inner {
            Kernel::ScalarRelaxation(k) => Value::Scalar(k.laplace_times_p(p).map_err(to_py)?),
            Kernel::ScalarCreep(c) => Value::Scalar(c.laplace_times_p(p).map_err(to_py)?),
            Kernel::MatrixRelaxation(k) => Value::Matrix(rows(&k.laplace_times_p(p).map_err(to_py)?)),
            Kernel::MatrixCreep(c) => Value::Matrix(rows(&c.laplace_times_p(p).map_err(to_py)?)),
        })
    }

    /// Boundary values at `t → 0+` and `t → ∞`; unbounded limits are `inf`.
    fn limits(&self) -> BTreeMap<&'static str, Value> {
        let s = |x: &f64| Value::Scalar(*x);
        let m = |x: &Matrix6| Value::Matrix(rows(x));
        match &self.inner {
            Kernel::ScalarRelaxation(k) => limit_pairs(&k.limits(), s),
            Kernel::ScalarCreep(c) => limit_pairs(&c.limits(), s),
            Kernel::MatrixRelaxation(k) => limit_pairs(&k.limits(), m),
            Kernel::MatrixCreep(c) => limit_pairs(&c.limits(), m),
        }
    }

    fn dualize(&self) -> PyResult<PyKernel> {
        dualize(self)
    }

    /// Structural checks as `(name, passed, residual, tolerance)` tuples.
    fn check(&self) -> Vec<(String, bool, f64, f64)> {
        entries(verify::check_kernel(&self.inner))
    }

    fn __eq__(&self, other: &PyKernel) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let n = match &self.inner {
            Kernel::ScalarRelaxation(k) => k.modes().len(),
            Kernel::ScalarCreep(c) => c.modes().len(),
            Kernel::MatrixRelaxation(k) => k.modes().len(),
            Kernel::MatrixCreep(c) => c.modes().len(),
        };
        format!("Kernel({}, modes={n})", self.inner.kind_name())
    }
}

/// Creep dual of a relaxation kernel, or relaxation dual of a creep kernel.
#[pyfunction]
fn dualize(kernel: &PyKernel) -> PyResult<PyKernel> {
    Ok(PyKernel { inner: duality::dualize(&kernel.inner).map_err(to_py)? })
}

/// Checks both kernels and the pair identities. Returns
/// `(passed, entries)`.
#[pyfunction]
#[pyo3(signature = (a, b, tol=None))]
fn check_pair(a: &PyKernel, b: &PyKernel, tol: Option<f64>) -> PyResult<(bool, Vec<(String, bool, f64, f64)>)> {
    let mut report = verify::check_kernel(&a.inner);
    report.extend(verify::check_kernel(&b.inner));
    if report.passed() {
        report.extend(verify::check_pair(&a.inner, &b.inner, tol).map_err(to_py)?);
    }
    Ok((report.passed(), entries(report)))
}

/// `(times, values)` on a linear or geometric grid.
#[pyfunction]
#[pyo3(signature = (kernel, t0, t1, n, log=false))]
fn sample(kernel: &PyKernel, t0: f64, t1: f64, n: usize, log: bool) -> PyResult<(Vec<f64>, Vec<Value>)> {
    let spacing = if log { Spacing::Log } else { Spacing::Linear };
    let times = io::sample_times(t0, t1, n, spacing).map_err(to_py)?;
    let values = times.iter().map(|&t| kernel.__call__(t)).collect::<PyResult<Vec<_>>>()?;
    Ok((times, values))
}

/// Response to a piecewise-linear input through `(times, values)`,
/// sampled at `samples`. Scalar kernels take numbers, matrix kernels
/// 6-vectors. Returns `(values, impulses)`; only nonzero impulses are
/// listed.
#[pyfunction]
fn response(
    kernel: &PyKernel,
    times: Vec<f64>,
    values: Bound<'_, PyAny>,
    samples: Vec<f64>,
) -> PyResult<(Vec<Value>, Vec<(f64, Value)>)> {
    if kernel.inner.is_matrix() {
        let vals: Vec<[f64; 6]> = values.extract()?;
        let vals = vals.iter().map(|v| Vector6::from_column_slice(v)).collect();
        let seg = StrainHistory::new(times, vals).map_err(to_py)?.to_segmented();
        let series = match &kernel.inner {
            Kernel::MatrixRelaxation(k) => respond(k, &seg, &samples),
            Kernel::MatrixCreep(c) => respond_creep(c, &seg, &samples),
            _ => unreachable!(),
        }
        .map_err(to_py)?;
        let vec = |v: &Vector6| Value::Vector(v.as_slice().to_vec());
        Ok((
            series.values.iter().map(vec).collect(),
            series.impulses.iter().filter(|(_, v)| v.norm() > 0.0).map(|(t, v)| (*t, vec(v))).collect(),
        ))
    } else {
        let vals: Vec<f64> = values.extract()?;
        let seg = StrainHistory::new(times, vals).map_err(to_py)?.to_segmented();
        let series = match &kernel.inner {
            Kernel::ScalarRelaxation(k) => respond(k, &seg, &samples),
            Kernel::ScalarCreep(c) => respond_creep(c, &seg, &samples),
            _ => unreachable!(),
        }
        .map_err(to_py)?;
        Ok((
            series.values.into_iter().map(Value::Scalar).collect(),
            series.impulses.into_iter().filter(|(_, v)| *v != 0.0).map(|(t, v)| (t, Value::Scalar(v))).collect(),
        ))
    }
}

/// Matrix relaxation kernel from an eigenstress basis document.
#[pyfunction]
fn eigenstress(text: &str) -> PyResult<PyKernel> {
    let (basis, eq) = io::parse_eigenstress(text).map_err(to_py)?;
    let k = assemble_eigenstress(&basis, eq).map_err(to_py)?;
    Ok(PyKernel { inner: Kernel::MatrixRelaxation(k) })
}

#[pymodule(name = "viscodual")]
fn viscodual_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(dualize, m)?)?;
    m.add_function(wrap_pyfunction!(check_pair, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(response, m)?)?;
    m.add_function(wrap_pyfunction!(eigenstress, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_conversion_round_trips() {
        let mut r = vec![vec![0.0; 6]; 6];
        r[0][1] = 2.0;
        r[1][0] = 2.0;
        r[5][5] = 1.5;
        assert_eq!(rows(&matrix(&r).unwrap()), r);
    }

    #[test]
    fn matrix_conversion_rejects_bad_shapes() {
        assert!(matrix(&vec![vec![0.0; 6]; 5]).is_err());
    }
}
