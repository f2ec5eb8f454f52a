//! Fixed-step numerical integration of control-affine systems and the
//! trajectory-projection check that makes a claimed quotient falsifiable.
//!
//! Symbolic data is lowered once per run to a flat evaluation tape over
//! `f64`; integration is classical fourth-order Runge-Kutta with controls
//! held constant on grid-aligned intervals.  Denominators below
//! [`POLE_THRESHOLD`] abort the run with the time of failure.

use crate::error::{Error, Result};
use crate::geometry::{AccsSystem, Chart, TangentSystem, VectorField};
use crate::symexpr::RationalExpr;
use num_traits::ToPrimitive;
use std::fmt::Write as _;

pub const POLE_THRESHOLD: f64 = 1e-12;

/// One polynomial lowered to (coefficient, [(coordinate index, exponent)])
/// terms.
#[derive(Debug, Clone)]
struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    fn compile(p: &crate::symexpr::Polynomial, coords: &[String]) -> Result<Self> {
        let mut terms = Vec::with_capacity(p.term_count());
        for (m, c) in p.terms() {
            let coeff = c
                .to_f64()
                .ok_or_else(|| Error::Internal("coefficient too large for f64".into()))?;
            let mut powers = Vec::new();
            for (name, e) in m.exps() {
                let idx = coords
                    .iter()
                    .position(|c| c.as_str() == name)
                    .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))?;
                powers.push((idx, e));
            }
            terms.push((coeff, powers));
        }
        Ok(CompiledPoly { terms })
    }

    fn eval(&self, state: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, powers) in &self.terms {
            let mut t = *c;
            for &(idx, e) in powers {
                t *= state[idx].powi(e as i32);
            }
            acc += t;
        }
        acc
    }
}

/// A rational expression on the tape.  `den` is `None` for polynomials.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    num: CompiledPoly,
    den: Option<CompiledPoly>,
}

impl CompiledExpr {
    pub fn compile(e: &RationalExpr, coords: &[String]) -> Result<Self> {
        Ok(CompiledExpr {
            num: CompiledPoly::compile(e.num(), coords)?,
            den: if e.den().is_one() {
                None
            } else {
                Some(CompiledPoly::compile(e.den(), coords)?)
            },
        })
    }

    /// Evaluate; `Err` carries no time context, callers add it.
    pub fn eval(&self, state: &[f64]) -> std::result::Result<f64, ()> {
        let n = self.num.eval(state);
        match &self.den {
            None => Ok(n),
            Some(d) => {
                let dv = d.eval(state);
                if dv.abs() < POLE_THRESHOLD {
                    Err(())
                } else {
                    Ok(n / dv)
                }
            }
        }
    }
}

/// First-order control-affine flow `x' = f0(x) + sum_r u_r f_r(x)` over
/// named coordinates.
#[derive(Debug, Clone)]
pub struct FlowSystem {
    coords: Vec<String>,
    drift: Vec<RationalExpr>,
    inputs: Vec<Vec<RationalExpr>>,
}

impl FlowSystem {
    pub fn new(
        coords: Vec<String>,
        drift: Vec<RationalExpr>,
        inputs: Vec<Vec<RationalExpr>>,
    ) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::InvalidScenario("a flow needs at least one coordinate".into()));
        }
        if drift.len() != n {
            return Err(Error::InvalidScenario(format!(
                "drift has {} components for {} coordinates",
                drift.len(),
                n
            )));
        }
        for (r, f) in inputs.iter().enumerate() {
            if f.len() != n {
                return Err(Error::InvalidScenario(format!(
                    "input field {} has {} components for {} coordinates",
                    r + 1,
                    f.len(),
                    n
                )));
            }
        }
        for e in drift.iter().chain(inputs.iter().flatten()) {
            for v in e.variables() {
                if !coords.contains(&v) {
                    return Err(Error::UnknownCoordinate(v));
                }
            }
        }
        Ok(FlowSystem { coords, drift, inputs })
    }

    pub fn from_tangent(tsys: &TangentSystem) -> Self {
        FlowSystem {
            coords: tsys.chart().tangent_coords().to_vec(),
            drift: tsys.drift().components().to_vec(),
            inputs: tsys
                .inputs()
                .iter()
                .map(|g| g.components().to_vec())
                .collect(),
        }
    }

    pub fn from_system_lift(sys: &AccsSystem) -> Result<Self> {
        Ok(FlowSystem::from_tangent(&sys.lift()?))
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    fn compile(&self) -> Result<CompiledFlow> {
        Ok(CompiledFlow {
            drift: self
                .drift
                .iter()
                .map(|e| CompiledExpr::compile(e, &self.coords))
                .collect::<Result<Vec<_>>>()?,
            inputs: self
                .inputs
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|e| CompiledExpr::compile(e, &self.coords))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

struct CompiledFlow {
    drift: Vec<CompiledExpr>,
    inputs: Vec<Vec<CompiledExpr>>,
}

impl CompiledFlow {
    fn deriv(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> std::result::Result<(), ()> {
        for (k, e) in self.drift.iter().enumerate() {
            out[k] = e.eval(x)?;
        }
        for (r, f) in self.inputs.iter().enumerate() {
            if u[r] == 0.0 {
                continue;
            }
            for (k, e) in f.iter().enumerate() {
                out[k] += u[r] * e.eval(x)?;
            }
        }
        Ok(())
    }
}

/// Piecewise-constant control: `values[i]` applies on
/// `[breakpoints[i], breakpoints[i+1])`.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl ControlSignal {
    pub fn constant(v: Vec<f64>) -> Self {
        ControlSignal {
            breakpoints: vec![0.0],
            values: vec![v],
        }
    }

    pub fn new(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidSignal(
                "need one value vector per breakpoint".into(),
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidSignal("first breakpoint must be 0".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidSignal("breakpoints must be strictly increasing".into()));
            }
        }
        let m = values[0].len();
        for v in &values {
            if v.len() != m {
                return Err(Error::InvalidSignal("value vectors differ in length".into()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSignal("control values must be finite".into()));
            }
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidSignal("breakpoints must be finite".into()));
        }
        Ok(ControlSignal { breakpoints, values })
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn value_at(&self, t: f64) -> &[f64] {
        let idx = self.breakpoints.partition_point(|b| *b <= t);
        &self.values[idx.saturating_sub(1)]
    }

    /// Keep only the first `m` channels (used when a quotient has fewer
    /// inputs than the source; input order is preserved by construction).
    pub fn truncated(&self, m: usize) -> Result<ControlSignal> {
        if m > self.dim() {
            return Err(Error::InvalidSignal(format!(
                "cannot widen a {}-channel signal to {m} channels",
                self.dim()
            )));
        }
        Ok(ControlSignal {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v[..m].to_vec()).collect(),
        })
    }

    fn check_grid_alignment(&self, dt: f64) -> Result<()> {
        for b in &self.breakpoints {
            let k = (b / dt).round();
            if (k * dt - b).abs() > 1e-9 * b.abs().max(1.0) {
                return Err(Error::InvalidSignal(format!(
                    "breakpoint {b} does not lie on the dt = {dt} grid"
                )));
            }
        }
        Ok(())
    }
}

/// Uniform-step trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Smooth map from a source chart to named target coordinates.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    pub target_coords: Vec<String>,
    pub components: Vec<RationalExpr>,
}

impl QuotientMap {
    pub fn new(target_coords: Vec<String>, components: Vec<RationalExpr>) -> Result<Self> {
        if target_coords.len() != components.len() {
            return Err(Error::InvalidScenario(format!(
                "{} map components for {} target coordinates",
                components.len(),
                target_coords.len()
            )));
        }
        Ok(QuotientMap { target_coords, components })
    }
}

fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidScenario("dt must be positive".into()));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidScenario("t_end must be nonnegative".into()));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.abs().max(1.0) {
        return Err(Error::InvalidScenario(format!(
            "t_end = {t_end} is not a multiple of dt = {dt}"
        )));
    }
    Ok(steps as usize)
}

/// Classical RK4 over `[0, t_end]` with `x(0) = x0`.
pub fn integrate(
    sys: &FlowSystem,
    x0: &[f64],
    u: &ControlSignal,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let n = sys.dim();
    if x0.len() != n {
        return Err(Error::InvalidScenario(format!(
            "initial state has {} entries for {} coordinates",
            x0.len(),
            n
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidScenario("initial state must be finite".into()));
    }
    if u.dim() != sys.input_count() {
        return Err(Error::InvalidScenario(format!(
            "control signal has {} channels, system expects {}",
            u.dim(),
            sys.input_count()
        )));
    }
    let steps = steps_for(t_end, dt)?;
    u.check_grid_alignment(dt)?;
    let flow = sys.compile()?;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(0.0);
    states.push(x.clone());

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    for s in 0..steps {
        let t = s as f64 * dt;
        // the control is constant across the step because breakpoints are
        // grid-aligned; sample mid-interval to stay clear of the boundary
        let uv = u.value_at(t + 0.5 * dt);
        let fail = |stage_t: f64| Error::Integration {
            time: stage_t,
            msg: format!("denominator magnitude below {POLE_THRESHOLD}"),
        };
        flow.deriv(&x, uv, &mut k1).map_err(|_| fail(t))?;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        flow.deriv(&tmp, uv, &mut k2).map_err(|_| fail(t))?;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        flow.deriv(&tmp, uv, &mut k3).map_err(|_| fail(t))?;
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        flow.deriv(&tmp, uv, &mut k4).map_err(|_| fail(t))?;
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (s + 1) as f64 * dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                time: t_next,
                msg: "state became non-finite".into(),
            });
        }
        times.push(t_next);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

/// Apply a map pointwise along a trajectory.
pub fn project(traj: &Trajectory, map: &QuotientMap, source_coords: &[String]) -> Result<Trajectory> {
    let compiled = map
        .components
        .iter()
        .map(|e| CompiledExpr::compile(e, source_coords))
        .collect::<Result<Vec<_>>>()?;
    let mut states = Vec::with_capacity(traj.states.len());
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let mut z = Vec::with_capacity(compiled.len());
        for c in &compiled {
            z.push(c.eval(x).map_err(|_| Error::Integration {
                time: *t,
                msg: "pole of the quotient map along the trajectory".into(),
            })?);
        }
        states.push(z);
    }
    Ok(Trajectory {
        times: traj.times.clone(),
        states,
    })
}

/// Commutation check: integrate the source, project, integrate the target
/// from the mapped initial state under the (possibly truncated) same
/// control, and report the sup-norm gap over the grid.
#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub steps: usize,
    /// Source trajectory pushed through the map.
    pub projected: Trajectory,
    /// Trajectory of the target system from the mapped initial state.
    pub target: Trajectory,
}

#[allow(clippy::too_many_arguments)]
pub fn check_commutation(
    source: &FlowSystem,
    target: &FlowSystem,
    map: &QuotientMap,
    x0: &[f64],
    u: &ControlSignal,
    t_end: f64,
    dt: f64,
    tol: f64,
) -> Result<CommutationReport> {
    if map.components.len() != target.dim() {
        return Err(Error::InvalidScenario(format!(
            "map has {} components, target system has dimension {}",
            map.components.len(),
            target.dim()
        )));
    }
    let src_traj = integrate(source, x0, u, t_end, dt)?;
    let projected = project(&src_traj, map, source.coords())?;
    let z0 = projected.states[0].clone();
    let u_target = u.truncated(target.input_count())?;
    let tgt_traj = integrate(target, &z0, &u_target, t_end, dt)?;
    let mut residual: f64 = 0.0;
    for (p, q) in projected.states.iter().zip(&tgt_traj.states) {
        for (a, b) in p.iter().zip(q) {
            residual = residual.max((a - b).abs());
        }
    }
    Ok(CommutationReport {
        residual,
        tol,
        pass: residual <= tol,
        steps: src_traj.times.len() - 1,
        projected,
        target: tgt_traj,
    })
}

/// Sup-norm gap at matching times between a run with step `dt` and one with
/// `dt/2`, used for the step-halving order estimate.
fn grid_gap(a: &Trajectory, b: &Trajectory, stride: usize) -> f64 {
    let mut gap: f64 = 0.0;
    for (i, x) in a.states.iter().enumerate() {
        let y = &b.states[i * stride];
        for (p, q) in x.iter().zip(y) {
            gap = gap.max((p - q).abs());
        }
    }
    gap
}

/// Ratio `err(dt) / err(dt/2)` where `err(h)` is the gap between runs at
/// `h` and `h/2`; for a 4th-order scheme on smooth flows this sits near 16.
pub fn step_halving_ratio(
    sys: &FlowSystem,
    x0: &[f64],
    u: &ControlSignal,
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    let full = integrate(sys, x0, u, t_end, dt)?;
    let half = integrate(sys, x0, u, t_end, dt / 2.0)?;
    let quarter = integrate(sys, x0, u, t_end, dt / 4.0)?;
    let e1 = grid_gap(&full, &half, 2);
    let e2 = grid_gap(&half, &quarter, 2);
    if e2 == 0.0 {
        return Err(Error::Internal(
            "step-halving gap vanished; the trajectory is too trivial for an order estimate".into(),
        ));
    }
    Ok(e1 / e2)
}

/// Largest pointwise distance between a trajectory's velocity part and the
/// span of `gens` evaluated along the base part, measured in the 2-norm
/// after orthogonal projection.  Numerical shadow of geodesic invariance:
/// for a passing distribution and initial velocity inside it, this stays at
/// integration-error scale.
pub fn max_velocity_span_residual(
    traj: &Trajectory,
    chart: &Chart,
    gens: &[VectorField],
) -> Result<f64> {
    let n = chart.dim();
    let base_coords = chart.base_coords();
    let compiled: Vec<Vec<CompiledExpr>> = gens
        .iter()
        .map(|g| {
            g.components()
                .iter()
                .map(|e| CompiledExpr::compile(e, base_coords))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let base = &state[..n];
        let vel = &state[n..];
        // columns of the generator matrix at this base point
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(compiled.len());
        for g in &compiled {
            let mut col = Vec::with_capacity(n);
            for e in g {
                col.push(e.eval(base).map_err(|_| Error::Integration {
                    time: *t,
                    msg: "pole of a generator along the trajectory".into(),
                })?);
            }
            cols.push(col);
        }
        // modified Gram-Schmidt; drop numerically dependent columns
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for mut c in cols {
            for q in &basis {
                let dot: f64 = q.iter().zip(&c).map(|(a, b)| a * b).sum();
                for (ci, qi) in c.iter_mut().zip(q) {
                    *ci -= dot * qi;
                }
            }
            let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-10 {
                for ci in c.iter_mut() {
                    *ci /= norm;
                }
                basis.push(c);
            }
        }
        let mut resid: Vec<f64> = vel.to_vec();
        for q in &basis {
            let dot: f64 = q.iter().zip(resid.iter()).map(|(a, b)| a * b).sum();
            for (ri, qi) in resid.iter_mut().zip(q) {
                *ri -= dot * qi;
            }
        }
        let r = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// CSV with a time column and one column per coordinate, 17 significant
/// digits.
pub fn trajectory_csv(traj: &Trajectory, coords: &[String]) -> String {
    let mut out = String::new();
    out.push('t');
    for c in coords {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let _ = write!(out, "{t:.16e}");
        for v in x {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::body_system;
    use crate::geometry::Connection;
    use crate::symexpr::parse_expr;

    fn flat_line_flow() -> FlowSystem {
        let chart = Chart::with_velocity(vec!["x".into()], vec!["y".into()]).unwrap();
        let conn = Connection::flat(chart.clone());
        let g = VectorField::on_base(chart, vec![RationalExpr::one()]).unwrap();
        let sys = AccsSystem::new(conn, vec![g]).unwrap();
        FlowSystem::from_system_lift(&sys).unwrap()
    }

    #[test]
    fn straight_line_geodesic_is_exact() {
        let flow = flat_line_flow();
        let traj = integrate(&flow, &[0.0, 1.0], &ControlSignal::constant(vec![0.0]), 1.0, 1e-3)
            .unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - 1.0).abs() <= 1e-12);
        assert!((last[1] - 1.0).abs() <= 1e-12);
        assert_eq!(traj.times.len(), 1001);
    }

    #[test]
    fn constant_acceleration_from_rest() {
        let flow = flat_line_flow();
        let traj = integrate(&flow, &[0.0, 0.0], &ControlSignal::constant(vec![1.0]), 1.0, 1e-3)
            .unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - 0.5).abs() <= 1e-9);
        assert!((last[1] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn body_lift_step_halving_self_consistency() {
        let flow = FlowSystem::from_system_lift(&body_system()).unwrap();
        let x0 = [0.0, 0.0, 0.0, -1.0, 1.0, 0.0];
        let u = ControlSignal::constant(vec![0.0, 0.0]);
        let full = integrate(&flow, &x0, &u, 0.5, 1e-3).unwrap();
        let half = integrate(&flow, &x0, &u, 0.5, 5e-4).unwrap();
        let gap = grid_gap(&full, &half, 2);
        assert!(gap <= 1e-8, "gap {gap}");
    }

    #[test]
    fn step_halving_ratio_is_fourth_order() {
        let flow = FlowSystem::from_system_lift(&body_system()).unwrap();
        // u = 0 keeps the velocity dynamics away from equilibrium
        let x0 = [0.0, 0.0, 0.0, -1.0, 1.0, 0.0];
        let u = ControlSignal::constant(vec![0.0, 0.0]);
        let ratio = step_halving_ratio(&flow, &x0, &u, 0.5, 2e-2).unwrap();
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn piecewise_controls_select_the_right_interval() {
        let u = ControlSignal::new(
            vec![0.0, 0.25, 0.5],
            vec![vec![-1.0], vec![0.5], vec![2.0]],
        )
        .unwrap();
        assert_eq!(u.value_at(0.1)[0], -1.0);
        assert_eq!(u.value_at(0.25)[0], 0.5);
        assert_eq!(u.value_at(0.49)[0], 0.5);
        assert_eq!(u.value_at(0.75)[0], 2.0);
        assert!(ControlSignal::new(vec![0.1], vec![vec![1.0]]).is_err());
        assert!(ControlSignal::new(vec![0.0, 0.0], vec![vec![1.0], vec![2.0]]).is_err());
        // misaligned breakpoint is rejected at integration time
        let flow = flat_line_flow();
        let bad = ControlSignal::new(vec![0.0, 0.0015], vec![vec![1.0], vec![0.0]]).unwrap();
        assert!(matches!(
            integrate(&flow, &[0.0, 0.0], &bad, 1.0, 1e-3),
            Err(Error::InvalidSignal(_))
        ));
    }

    #[test]
    fn pole_reports_the_failure_time() {
        // x' = 1, z' = 1/x starting left of the pole at x = 0
        let coords = vec!["x".to_string(), "z".to_string()];
        let drift = vec![
            parse_expr("1", &coords).unwrap(),
            parse_expr("1/x", &coords).unwrap(),
        ];
        let flow = FlowSystem::new(coords, drift, vec![]).unwrap();
        let u = ControlSignal::constant(vec![]);
        match integrate(&flow, &[-0.05, 0.0], &u, 1.0, 1e-3) {
            Err(Error::Integration { time, .. }) => {
                assert!((0.04..=0.06).contains(&time), "time {time}");
            }
            other => panic!("expected a pole failure, got {other:?}"),
        }
    }

    #[test]
    fn projection_and_commutation_on_a_flat_quotient() {
        // flat R^3, controls d2, d3, quotient by D = span{d1}
        let chart = Chart::with_velocity(
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec!["y1".into(), "y2".into(), "y3".into()],
        )
        .unwrap();
        let conn = Connection::flat(chart.clone());
        let mk = |comps: [&str; 3]| {
            VectorField::on_base(
                chart.clone(),
                comps
                    .iter()
                    .map(|s| parse_expr(s, chart.base_coords()).unwrap())
                    .collect(),
            )
            .unwrap()
        };
        let sys = AccsSystem::new(conn, vec![mk(["0", "1", "0"]), mk(["0", "0", "1"])]).unwrap();
        let d = crate::distribution::Distribution::new(vec![mk(["1", "0", "0"])]).unwrap();
        let q = crate::quotient::build_quotient_system(&sys, &d).unwrap();
        let reduced = q.system.as_ref().unwrap();
        let (names, comps) = q.adapted_projection(sys.chart());
        let map = QuotientMap::new(names, comps).unwrap();
        let source = FlowSystem::from_system_lift(&sys).unwrap();
        let target = FlowSystem::from_system_lift(reduced).unwrap();
        let u = ControlSignal::new(
            vec![0.0, 0.5],
            vec![vec![-1.0, 0.5], vec![0.5, -1.0]],
        )
        .unwrap();
        let rep = check_commutation(
            &source,
            &target,
            &map,
            &[0.2, -0.3, 0.4, 0.1, 0.0, -0.2],
            &u,
            1.0,
            1e-3,
            1e-9,
        )
        .unwrap();
        assert!(rep.pass, "residual {}", rep.residual);
    }

    #[test]
    fn identity_projection_is_no_op() {
        let flow = flat_line_flow();
        let traj = integrate(&flow, &[0.3, -0.7], &ControlSignal::constant(vec![1.0]), 0.25, 1e-3)
            .unwrap();
        let map = QuotientMap::new(
            vec!["x".into(), "y".into()],
            vec![
                parse_expr("x", flow.coords()).unwrap(),
                parse_expr("y", flow.coords()).unwrap(),
            ],
        )
        .unwrap();
        let p = project(&traj, &map, flow.coords()).unwrap();
        assert_eq!(p.states, traj.states);
    }

    #[test]
    fn velocity_stays_in_invariant_span() {
        // body system, D = span{d3} is geodesically invariant; start with
        // velocity in D and no control on the first input
        let sys = body_system();
        let chart = sys.chart().clone();
        let d3 = VectorField::basis(chart.clone(), crate::geometry::Space::Base, 2).unwrap();
        let flow = FlowSystem::from_system_lift(&sys).unwrap();
        let traj = integrate(
            &flow,
            &[0.0, 0.0, 0.0, 0.0, 0.0, 0.8],
            &ControlSignal::constant(vec![0.0, 0.0]),
            0.5,
            1e-3,
        )
        .unwrap();
        let r = max_velocity_span_residual(&traj, &chart, &[d3.clone()]).unwrap();
        assert!(r <= 1e-6, "residual {r}");
        // sanity: a velocity outside D is reported as such
        let traj2 = integrate(
            &flow,
            &[0.0, 0.0, 0.0, 0.0, 0.5, 0.8],
            &ControlSignal::constant(vec![0.0, 0.0]),
            0.1,
            1e-3,
        )
        .unwrap();
        let r2 = max_velocity_span_residual(&traj2, &chart, &[d3]).unwrap();
        assert!(r2 > 0.1, "residual {r2}");
    }

    #[test]
    fn csv_has_seventeen_significant_digits() {
        let traj = Trajectory {
            times: vec![0.0, 0.001],
            states: vec![vec![1.0, -0.5], vec![0.1234567890123456789, 2.0]],
        };
        let csv = trajectory_csv(&traj, &["a".to_string(), "b".to_string()]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,a,b");
        let row = lines.nth(1).unwrap();
        assert!(row.contains("1.2345678901234568e-1"), "row: {row}");
    }
}
