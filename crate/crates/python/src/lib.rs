//! Python bindings.  `System` mirrors the system-file model the CLI works
//! on; `Expr` exposes the exact expression layer.  Reports come back as
//! plain dicts so they compose with the usual Python tooling.

use mechquot_core::accessibility::is_geodesically_accessible;
use mechquot_core::distribution::SymClosureOptions;
use mechquot_core::quotient::{build_quotient_system, check_both_routes, ConditionWitness};
use mechquot_core::simulate::{check_commutation, integrate, trajectory_csv};
use mechquot_core::symexpr::{parse_expr as parse_expr_core, RationalExpr};
use mechquot_core::sysfile::{self, SystemFile};
use mechquot_core::verify::run_identity_suite;
use mechquot_core::Error;
use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use std::collections::BTreeMap;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::CapExceeded(_) | Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn exact(name: &str, s: &str) -> PyResult<BigRational> {
    parse_expr_core(s, &[])
        .map_err(to_py)?
        .as_constant()
        .ok_or_else(|| PyValueError::new_err(format!("value for `{name}` is not an exact constant: {s}")))
}

/// An exact rational expression over named coordinates.
#[pyclass(frozen)]
struct Expr {
    inner: RationalExpr,
}

#[pymethods]
impl Expr {
    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr({})", self.inner)
    }

    fn __add__(&self, other: PyRef<'_, Expr>) -> Expr {
        Expr { inner: &self.inner + &other.inner }
    }

    fn __sub__(&self, other: PyRef<'_, Expr>) -> Expr {
        Expr { inner: &self.inner - &other.inner }
    }

    fn __mul__(&self, other: PyRef<'_, Expr>) -> Expr {
        Expr { inner: &self.inner * &other.inner }
    }

    fn __truediv__(&self, other: PyRef<'_, Expr>) -> PyResult<Expr> {
        Ok(Expr { inner: self.inner.div(&other.inner).map_err(to_py)? })
    }

    fn __neg__(&self) -> Expr {
        Expr { inner: -&self.inner }
    }

    /// Exact partial derivative with respect to a coordinate.
    fn differentiate(&self, var: &str) -> Expr {
        Expr { inner: self.inner.differentiate(var) }
    }

    /// Semantic equality by cross multiplication.
    fn equivalent(&self, other: PyRef<'_, Expr>) -> bool {
        self.inner.equivalent(&other.inner)
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    /// Evaluate at a point of exact rational values (strings like `"-1/2"`).
    /// The result is again an exact rational, rendered as a string.
    fn eval(&self, values: BTreeMap<String, String>) -> PyResult<String> {
        let mut point = BTreeMap::new();
        for (k, v) in &values {
            point.insert(k.clone(), exact(k, v)?);
        }
        Ok(self.inner.eval(&point).map_err(to_py)?.to_string())
    }
}

/// Parse an expression string over the given coordinate names.
#[pyfunction]
fn parse_expr(src: &str, coords: Vec<String>) -> PyResult<Expr> {
    Ok(Expr { inner: parse_expr_core(src, &coords).map_err(to_py)? })
}

/// A named point argument: either the name of a `[[point]]` in the file or
/// a mapping of coordinate names to exact value strings.
#[derive(FromPyObject)]
enum PointArg {
    Name(String),
    Values(BTreeMap<String, String>),
}

fn witness_list<'py>(py: Python<'py>, ws: &[ConditionWitness]) -> PyResult<Bound<'py, PyList>> {
    let items = PyList::empty(py);
    for w in ws {
        let d = PyDict::new(py);
        d.set_item("condition", w.condition)?;
        d.set_item("context", &w.context)?;
        d.set_item("field", w.field.to_string())?;
        items.append(d)?;
    }
    Ok(items)
}

/// A parsed system file: chart, connection, controls, and any named
/// distributions, points, maps, explicit systems, and scenarios.
#[pyclass(frozen)]
struct System {
    inner: SystemFile,
}

#[pymethods]
impl System {
    /// Parse a system-file document from a string.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<System> {
        Ok(System { inner: sysfile::parse(text).map_err(to_py)? })
    }

    /// Load a system file from disk.
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<System> {
        Ok(System { inner: sysfile::parse_path(&path).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "System(dim={}, inputs={})",
            self.inner.system.dim(),
            self.inner.system.controls().len()
        )
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.system.dim()
    }

    #[getter]
    fn base_coords(&self) -> Vec<String> {
        self.inner.system.chart().base_coords().to_vec()
    }

    #[getter]
    fn tangent_coords(&self) -> Vec<String> {
        self.inner.system.chart().tangent_coords().to_vec()
    }

    #[getter]
    fn controls(&self) -> Vec<String> {
        self.inner.system.controls().iter().map(|g| g.to_string()).collect()
    }

    #[getter]
    fn distributions(&self) -> Vec<String> {
        self.inner.distributions.keys().cloned().collect()
    }

    #[getter]
    fn scenarios(&self) -> Vec<String> {
        self.inner.scenarios.keys().cloned().collect()
    }

    /// Christoffel symbol `Γ^k_{ij}` as an `Expr`, with 1-based indices as
    /// in the file format.
    fn gamma(&self, k: usize, i: usize, j: usize) -> PyResult<Expr> {
        let n = self.inner.system.dim();
        for (label, v) in [("k", k), ("i", i), ("j", j)] {
            if v == 0 || v > n {
                return Err(PyValueError::new_err(format!(
                    "index {label} = {v} out of range 1..={n}"
                )));
            }
        }
        Ok(Expr { inner: self.inner.system.connection().gamma(k - 1, i - 1, j - 1).clone() })
    }

    /// Canonical document for the system part (chart, christoffel, control).
    fn emit(&self) -> String {
        sysfile::emit(&self.inner.system)
    }

    /// Decide geodesic accessibility at a point via the Sym-closure.
    #[pyo3(signature = (point=None, max_rounds=None))]
    fn check_accessibility<'py>(
        &self,
        py: Python<'py>,
        point: Option<PointArg>,
        max_rounds: Option<usize>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (name, x0) = match point {
            Some(PointArg::Name(n)) => self.inner.resolve_point(Some(&n)).map_err(to_py)?,
            Some(PointArg::Values(vals)) => {
                let mut p = BTreeMap::new();
                for (k, v) in &vals {
                    p.insert(k.clone(), exact(k, v)?);
                }
                ("explicit".to_string(), p)
            }
            None => self.inner.resolve_point(None).map_err(to_py)?,
        };
        let opts = SymClosureOptions { max_rounds, ..SymClosureOptions::default() };
        let rep = is_geodesically_accessible(&self.inner.system, &x0, &opts).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("point", name)?;
        d.set_item("dimension", self.inner.system.dim())?;
        d.set_item("sym_rank_generic", rep.sym_rank_generic)?;
        d.set_item("sym_rank_at_point", rep.sym_rank_at_point)?;
        d.set_item("singular_at_point", rep.singular_at_point)?;
        d.set_item("closure_rounds", rep.closure_rounds)?;
        d.set_item("closure_fields", rep.closure_fields.clone())?;
        d.set_item("geodesically_accessible", rep.geodesically_accessible)?;
        Ok(d)
    }

    /// Check the four quotient conditions on a named distribution, through
    /// both decision routes.
    fn check_quotient<'py>(
        &self,
        py: Python<'py>,
        distribution: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let dist = self.inner.distribution(distribution).map_err(to_py)?;
        let (direct, lifted) = check_both_routes(&self.inner.system, dist).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("distribution", distribution)?;
        d.set_item("generic_rank", dist.generic_rank())?;
        d.set_item("involutive", direct.involutive)?;
        d.set_item("connection_restricts", direct.connection_restricts)?;
        d.set_item("curvature_invariance", direct.curvature_ok)?;
        d.set_item("controls_invariant", direct.controls_invariant)?;
        d.set_item("overall", direct.overall)?;
        d.set_item("witnesses", witness_list(py, &direct.witnesses)?)?;
        d.set_item("note", direct.note)?;
        d.set_item("lifted_route_invariant", lifted.invariant)?;
        d.set_item("lifted_rank", lifted.lifted_rank)?;
        d.set_item("lifted_witnesses", witness_list(py, &lifted.witnesses)?)?;
        d.set_item("routes_agree", true)?;
        Ok(d)
    }

    /// Build the quotient system.  Returns the kept and struck coordinate
    /// names plus the emitted document (`None` when zero-dimensional),
    /// which `System.parse` accepts back.
    fn build_quotient<'py>(
        &self,
        py: Python<'py>,
        distribution: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let dist = self.inner.distribution(distribution).map_err(to_py)?;
        let q = build_quotient_system(&self.inner.system, dist).map_err(to_py)?;
        let chart = self.inner.system.chart();
        let names = |ix: &[usize]| -> Vec<String> {
            ix.iter().map(|&i| chart.base_coords()[i].clone()).collect()
        };
        let d = PyDict::new(py);
        d.set_item("kept_coordinates", names(&q.kept))?;
        d.set_item("struck_coordinates", names(&q.killed))?;
        d.set_item("dimension", q.kept.len())?;
        d.set_item("file", q.system.as_ref().map(sysfile::emit))?;
        Ok(d)
    }

    /// Integrate a scenario with classical RK4.  Returns the flow's
    /// coordinate names, the time grid, and the state rows.
    #[pyo3(signature = (scenario, dt=None))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        scenario: &str,
        dt: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let sc = self.inner.scenario(scenario).map_err(to_py)?;
        let flow = self.inner.flow(sc.source.as_deref()).map_err(to_py)?;
        let u = sc.control_or_zero(flow.input_count());
        let traj =
            integrate(&flow, &sc.x0, &u, sc.t_end, dt.unwrap_or(sc.dt)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("coords", flow.coords().to_vec())?;
        d.set_item("times", traj.times.clone())?;
        d.set_item("states", traj.states.clone())?;
        Ok(d)
    }

    /// CSV text for a simulated scenario, full float precision.
    #[pyo3(signature = (scenario, dt=None))]
    fn simulate_csv(&self, scenario: &str, dt: Option<f64>) -> PyResult<String> {
        let sc = self.inner.scenario(scenario).map_err(to_py)?;
        let flow = self.inner.flow(sc.source.as_deref()).map_err(to_py)?;
        let u = sc.control_or_zero(flow.input_count());
        let traj =
            integrate(&flow, &sc.x0, &u, sc.t_end, dt.unwrap_or(sc.dt)).map_err(to_py)?;
        Ok(trajectory_csv(&traj, flow.coords()))
    }

    /// Run a commutation scenario: integrate the source, project, integrate
    /// the target, and compare trajectories in the sup norm.
    #[pyo3(signature = (scenario, dt=None, tol=None))]
    fn check_commutation<'py>(
        &self,
        py: Python<'py>,
        scenario: &str,
        dt: Option<f64>,
        tol: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let sc = self.inner.scenario(scenario).map_err(to_py)?;
        let setup = self.inner.commutation_setup(scenario).map_err(to_py)?;
        let u = sc.control_or_zero(setup.source.input_count());
        let rep = check_commutation(
            &setup.source,
            &setup.target,
            &setup.map,
            &sc.x0,
            &u,
            sc.t_end,
            dt.unwrap_or(sc.dt),
            tol.unwrap_or(sc.tol),
        )
        .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("scenario", scenario)?;
        d.set_item("target", setup.target_desc)?;
        d.set_item("steps", rep.steps)?;
        d.set_item("residual", rep.residual)?;
        d.set_item("tol", rep.tol)?;
        d.set_item("pass", rep.pass)?;
        d.set_item("times", rep.projected.times.clone())?;
        d.set_item("projected_states", rep.projected.states.clone())?;
        d.set_item("target_states", rep.target.states.clone())?;
        Ok(d)
    }

    /// Randomized exact check of the structural bracket identities on this
    /// file's connection.
    #[pyo3(signature = (seed=0, trials=5))]
    fn verify_identities<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        trials: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let suite =
            run_identity_suite(self.inner.system.connection(), seed, trials, 3).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("seed", suite.seed)?;
        d.set_item("trials", suite.trials)?;
        let tallies = PyDict::new(py);
        for (name, held) in &suite.tallies {
            tallies.set_item(name, held)?;
        }
        d.set_item("tallies", tallies)?;
        d.set_item("failures", suite.failures.clone())?;
        d.set_item("all_identities_hold", suite.all_pass())?;
        Ok(d)
    }
}

#[pymodule]
fn mechquot(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add_class::<Expr>()?;
    m.add_function(wrap_pyfunction!(parse_expr, m)?)?;
    Ok(())
}
