//! Python bindings for the soliton-lab toolkit.
//!
//! Rationals cross the boundary as `"p/q"` strings (or anything the
//! rational parser accepts, such as `"0.25"` or `"3"`).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use soliton_lab::boxball::{simulate, BbscState, Carrier};
use soliton_lab::lattice::{step_gkdv, Slice};
use soliton_lab::measure::detect_bbsc_solitons;
use soliton_lab::soliton::{self as sol, scan_monotonicity, Soliton, SolitonSpec};
use soliton_lab::{Rat, SystemParams};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat(s: &str) -> PyResult<Rat> {
    s.parse().map_err(value_error)
}

fn spec(solitons: Vec<(String, String)>) -> PyResult<SolitonSpec> {
    let list = solitons
        .into_iter()
        .map(|(p, g)| Ok(Soliton::new(rat(&p)?, rat(&g)?)))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(SolitonSpec::new(list))
}

/// Lattice parameters `(alpha, beta)` with `0 < alpha, beta < 1`.
#[pyclass(name = "System", frozen)]
pub struct PySystem {
    inner: SystemParams,
}

#[pymethods]
impl PySystem {
    #[new]
    fn new(alpha: &str, beta: &str) -> PyResult<Self> {
        let inner = SystemParams::new(rat(alpha)?, rat(beta)?).map_err(value_error)?;
        Ok(PySystem { inner })
    }

    #[getter]
    fn alpha(&self) -> String {
        self.inner.alpha().to_string()
    }

    #[getter]
    fn beta(&self) -> String {
        self.inner.beta().to_string()
    }

    /// Upper end `alpha + beta - 1` of the admissible soliton parameters.
    fn p_max(&self) -> String {
        self.inner.p_max().to_string()
    }

    fn velocity(&self, p: &str) -> PyResult<f64> {
        sol::velocity(&self.inner, &rat(p)?).map_err(value_error)
    }

    fn amplitude(&self, p: &str) -> PyResult<f64> {
        sol::amplitude(&self.inner, &rat(p)?).map_err(value_error)
    }

    /// Exact `x` on the window, one list of `"p/q"` strings per time.
    fn exact_x(
        &self,
        py: Python<'_>,
        solitons: Vec<(String, String)>,
        n: (i64, i64),
        t: (i64, i64),
    ) -> PyResult<Vec<Vec<String>>> {
        let spec = spec(solitons)?;
        let field = py
            .detach(|| sol::sample_field(&self.inner, &spec, n, t))
            .map_err(value_error)?;
        Ok(field.rows.iter().map(|r| r.x.iter().map(Rat::to_string).collect()).collect())
    }

    /// Same field as `exact_x`, converted to floats.
    fn sample_x(
        &self,
        py: Python<'_>,
        solitons: Vec<(String, String)>,
        n: (i64, i64),
        t: (i64, i64),
    ) -> PyResult<Vec<Vec<f64>>> {
        let spec = spec(solitons)?;
        let field = py
            .detach(|| sol::sample_field(&self.inner, &spec, n, t))
            .map_err(value_error)?;
        Ok(field.to_float_x().rows)
    }

    /// One sweep from the left with incoming `y = 1`. Returns
    /// `(x_next, y)` where `y` has one more entry than `x`.
    fn step(&self, x: Vec<String>) -> PyResult<(Vec<String>, Vec<String>)> {
        let x = x.iter().map(|s| rat(s)).collect::<PyResult<Vec<_>>>()?;
        let out = step_gkdv(&Slice { n_lo: 0, x, y_in: Rat::one() }, &self.inner).map_err(value_error)?;
        let show = |v: &[Rat]| v.iter().map(Rat::to_string).collect();
        Ok((show(&out.x_next), show(&out.y)))
    }

    /// `(zero_residual_points, points)` of the exact residual check on a
    /// `grid x grid` block.
    fn verify_exactness(
        &self,
        py: Python<'_>,
        solitons: Vec<(String, String)>,
        grid: usize,
    ) -> PyResult<(usize, usize)> {
        let spec = spec(solitons)?;
        let rep = py
            .detach(|| sol::verify_exactness(&self.inner, &spec, grid))
            .map_err(value_error)?;
        Ok((rep.zero_residual_points, rep.points))
    }

    /// Monotonicity scan as a JSON string.
    fn scan(&self, grid: usize) -> PyResult<String> {
        let rep = scan_monotonicity(&self.inner, grid).map_err(value_error)?;
        serde_json::to_string(&rep).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("System(alpha='{}', beta='{}')", self.inner.alpha(), self.inner.beta())
    }
}

fn carrier(cc: Option<u32>) -> Carrier {
    cc.map_or(Carrier::Infinite, Carrier::Finite)
}

/// Box-ball history from a digit string; `cc=None` is an unbounded
/// carrier.
#[pyfunction]
#[pyo3(signature = (cb, cc, init, steps))]
fn bbsc_simulate(cb: u32, cc: Option<u32>, init: &str, steps: usize) -> PyResult<Vec<Vec<u32>>> {
    let state = BbscState::from_digits(init, cb, carrier(cc)).map_err(value_error)?;
    let history = simulate(&state, steps).map_err(value_error)?;
    Ok(history.into_iter().map(|s| s.u).collect())
}

/// `(balls, speed)` for every cluster present at time 0, speeds as
/// `"p/q"` strings.
#[pyfunction]
#[pyo3(signature = (cb, cc, init, steps))]
fn bbsc_speeds(cb: u32, cc: Option<u32>, init: &str, steps: usize) -> PyResult<Vec<(u64, Option<String>)>> {
    let state = BbscState::from_digits(init, cb, carrier(cc)).map_err(value_error)?;
    let history = simulate(&state, steps).map_err(value_error)?;
    let tracks = detect_bbsc_solitons(&history).map_err(value_error)?;
    Ok(tracks
        .iter()
        .filter(|t| t.times[0] == 0)
        .map(|t| (t.amplitude, t.speed().map(|s| s.to_string())))
        .collect())
}

/// Exact determinant of a square matrix of rationals, returned as `"p/q"`.
#[pyfunction]
fn det(rows: Vec<Vec<String>>) -> PyResult<String> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| rat(s)).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    let m = soliton_lab::RatMatrix::from_rows(rows).map_err(value_error)?;
    Ok(m.det().to_string())
}

#[pymodule]
fn soliton_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(bbsc_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(bbsc_speeds, m)?)?;
    m.add_function(wrap_pyfunction!(det, m)?)?;
    Ok(())
}
