//! Charts, vector fields, affine connections, and the tangent-bundle
//! constructions built from them: geodesic spray, vertical and horizontal
//! lifts, Lie brackets, symmetric products, torsion, and curvature.
//!
//! Everything lives in a single chart.  A [`VectorField`] is tagged with the
//! space it lives on: `Base` fields have components over the base
//! coordinates, `Tangent` fields over base plus velocity coordinates.

use crate::error::{Error, Result};
use crate::symexpr::RationalExpr;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;

fn valid_ident(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Base coordinates plus matching velocity coordinates for the tangent
/// chart.  Velocity names default to `v_<base>` when not given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    base: Vec<String>,
    velocity: Vec<String>,
    all: Vec<String>,
}

impl Chart {
    pub fn new(base: Vec<String>) -> Result<Self> {
        let velocity = base.iter().map(|b| format!("v_{b}")).collect();
        Chart::with_velocity(base, velocity)
    }

    pub fn with_velocity(base: Vec<String>, velocity: Vec<String>) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::InvalidChart("chart needs at least one coordinate".into()));
        }
        if base.len() != velocity.len() {
            return Err(Error::InvalidChart(format!(
                "{} base coordinates but {} velocity coordinates",
                base.len(),
                velocity.len()
            )));
        }
        let mut all: Vec<String> = base.clone();
        all.extend(velocity.iter().cloned());
        let mut seen = std::collections::BTreeSet::new();
        for name in &all {
            if !valid_ident(name) {
                return Err(Error::InvalidChart(format!("bad coordinate name `{name}`")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{name}`")));
            }
        }
        Ok(Chart { base, velocity, all })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base_coords(&self) -> &[String] {
        &self.base
    }

    pub fn velocity_coords(&self) -> &[String] {
        &self.velocity
    }

    /// Base coordinates followed by velocity coordinates.
    pub fn tangent_coords(&self) -> &[String] {
        &self.all
    }

    pub fn coords_for(&self, space: Space) -> &[String] {
        match space {
            Space::Base => &self.base,
            Space::Tangent => &self.all,
        }
    }

    pub fn base_index(&self, name: &str) -> Option<usize> {
        self.base.iter().position(|c| c == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Base,
    Tangent,
}

impl Space {
    fn label(self) -> &'static str {
        match self {
            Space::Base => "base",
            Space::Tangent => "tangent",
        }
    }
}

/// Vector field in coordinates: one rational-function component per
/// coordinate of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    space: Space,
    components: Vec<RationalExpr>,
}

impl VectorField {
    pub fn new(chart: Chart, space: Space, components: Vec<RationalExpr>) -> Result<Self> {
        let coords = chart.coords_for(space);
        if components.len() != coords.len() {
            return Err(Error::InvalidField(format!(
                "{} components for a {}-coordinate {} field",
                components.len(),
                coords.len(),
                space.label()
            )));
        }
        for (idx, c) in components.iter().enumerate() {
            for v in c.variables() {
                if !coords.contains(&v) {
                    return Err(Error::InvalidField(format!(
                        "component {idx} mentions `{v}`, which is not a {} coordinate",
                        space.label()
                    )));
                }
            }
        }
        Ok(VectorField { chart, space, components })
    }

    pub fn on_base(chart: Chart, components: Vec<RationalExpr>) -> Result<Self> {
        VectorField::new(chart, Space::Base, components)
    }

    pub fn on_tangent(chart: Chart, components: Vec<RationalExpr>) -> Result<Self> {
        VectorField::new(chart, Space::Tangent, components)
    }

    pub fn zero(chart: Chart, space: Space) -> Self {
        let k = chart.coords_for(space).len();
        VectorField {
            chart,
            space,
            components: vec![RationalExpr::zero(); k],
        }
    }

    /// Coordinate basis field `d/dx_i`.
    pub fn basis(chart: Chart, space: Space, i: usize) -> Result<Self> {
        let k = chart.coords_for(space).len();
        if i >= k {
            return Err(Error::InvalidField(format!("basis index {i} out of range for dimension {k}")));
        }
        let mut components = vec![RationalExpr::zero(); k];
        components[i] = RationalExpr::one();
        Ok(VectorField { chart, space, components })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn components(&self) -> &[RationalExpr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &RationalExpr {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(RationalExpr::is_zero)
    }

    pub fn checked_add(&self, other: &VectorField) -> Result<VectorField> {
        same_frame(self, other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            chart: self.chart.clone(),
            space: self.space,
            components,
        })
    }

    pub fn checked_sub(&self, other: &VectorField) -> Result<VectorField> {
        self.checked_add(&other.negate())
    }

    pub fn negate(&self) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            space: self.space,
            components: self.components.iter().map(|c| -c).collect(),
        }
    }

    /// Multiply by a scalar function.
    pub fn scale(&self, f: &RationalExpr) -> Result<VectorField> {
        let components = self
            .components
            .iter()
            .map(|c| c.checked_mul(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            chart: self.chart.clone(),
            space: self.space,
            components,
        })
    }

    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Result<Vec<BigRational>> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.components
            .iter()
            .map(RationalExpr::total_degree)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn same_frame(a: &VectorField, b: &VectorField) -> Result<()> {
    if a.chart != b.chart {
        return Err(Error::ChartMismatch("fields live on different charts".into()));
    }
    if a.space != b.space {
        return Err(Error::ChartMismatch(format!(
            "cannot combine a {} field with a {} field",
            a.space.label(),
            b.space.label()
        )));
    }
    Ok(())
}

/// Lie bracket `[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k`, summing over the
/// coordinates of the fields' common space.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    same_frame(x, y)?;
    let coords = x.chart.coords_for(x.space).to_vec();
    let mut components = Vec::with_capacity(coords.len());
    for k in 0..coords.len() {
        let mut acc = RationalExpr::zero();
        for (i, ci) in coords.iter().enumerate() {
            if !x.components[i].is_zero() {
                let d = y.components[k].differentiate(ci);
                if !d.is_zero() {
                    acc = acc.checked_add(&x.components[i].checked_mul(&d)?)?;
                }
            }
            if !y.components[i].is_zero() {
                let d = x.components[k].differentiate(ci);
                if !d.is_zero() {
                    acc = acc.checked_add(&-&y.components[i].checked_mul(&d)?)?;
                }
            }
        }
        components.push(acc);
    }
    Ok(VectorField {
        chart: x.chart.clone(),
        space: x.space,
        components,
    })
}

/// Vertical lift of a base field: `(0, ..., 0, X^1, ..., X^n)` on the
/// tangent chart.
pub fn vertical_lift(x: &VectorField) -> Result<VectorField> {
    if x.space != Space::Base {
        return Err(Error::ChartMismatch("vertical lift takes a base field".into()));
    }
    let n = x.chart.dim();
    let mut components = vec![RationalExpr::zero(); n];
    components.extend(x.components.iter().cloned());
    Ok(VectorField {
        chart: x.chart.clone(),
        space: Space::Tangent,
        components,
    })
}

/// Christoffel symbols of an affine connection on a chart.  The table is
/// symmetrised on construction (`Gamma^k_{ij} = Gamma^k_{ji}`), so the
/// connection is torsion-free by construction; `torsion` exists as a check.
#[derive(Debug, Clone)]
pub struct Connection {
    chart: Chart,
    table: GammaTable,
    zero: RationalExpr,
}

#[derive(Debug, Clone)]
enum GammaTable {
    /// Row-major `k * n^2 + i * n + j`, populated only at `i <= j`.
    Dense(Vec<Option<RationalExpr>>),
    Sparse(BTreeMap<(usize, usize, usize), RationalExpr>),
}

/// Threshold between the dense table and the sparse map.
const DENSE_DIM_LIMIT: usize = 8;

/// One Christoffel symbol `Gamma^k_{ij}`, indices 0-based.
#[derive(Debug, Clone)]
pub struct ChristoffelEntry {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub expr: RationalExpr,
}

impl Connection {
    pub fn new(chart: Chart, entries: Vec<ChristoffelEntry>) -> Result<Self> {
        let n = chart.dim();
        let mut table = if n <= DENSE_DIM_LIMIT {
            GammaTable::Dense(vec![None; n * n * n])
        } else {
            GammaTable::Sparse(BTreeMap::new())
        };
        for entry in entries {
            let ChristoffelEntry { k, i, j, expr } = entry;
            if k >= n || i >= n || j >= n {
                return Err(Error::InconsistentChristoffel(format!(
                    "index ({k}, {i}, {j}) out of range for dimension {n}"
                )));
            }
            for v in expr.variables() {
                if !chart.base_coords().contains(&v) {
                    return Err(Error::InconsistentChristoffel(format!(
                        "Gamma^{k}_{{{i},{j}}} mentions `{v}`, which is not a base coordinate"
                    )));
                }
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let existing = match &mut table {
                GammaTable::Dense(v) => &mut v[k * n * n + lo * n + hi],
                GammaTable::Sparse(m) => {
                    match m.entry((k, lo, hi)) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            if !expr.is_zero() {
                                e.insert(expr);
                            }
                            continue;
                        }
                        std::collections::btree_map::Entry::Occupied(e) => {
                            if !e.get().equivalent(&expr) {
                                return Err(Error::InconsistentChristoffel(format!(
                                    "conflicting values for Gamma^{k}_{{{i},{j}}}"
                                )));
                            }
                            continue;
                        }
                    }
                }
            };
            match existing {
                None => *existing = Some(expr),
                Some(old) => {
                    if !old.equivalent(&expr) {
                        return Err(Error::InconsistentChristoffel(format!(
                            "conflicting values for Gamma^{k}_{{{i},{j}}}"
                        )));
                    }
                }
            }
        }
        Ok(Connection {
            chart,
            table,
            zero: RationalExpr::zero(),
        })
    }

    /// The flat connection: all symbols zero.
    pub fn flat(chart: Chart) -> Self {
        Connection::new(chart, Vec::new()).expect("empty table is consistent")
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// `Gamma^k_{ij}`; symmetric in `(i, j)`.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &RationalExpr {
        let n = self.chart.dim();
        let (lo, hi) = (i.min(j), i.max(j));
        match &self.table {
            GammaTable::Dense(v) => v[k * n * n + lo * n + hi].as_ref().unwrap_or(&self.zero),
            GammaTable::Sparse(m) => m.get(&(k, lo, hi)).unwrap_or(&self.zero),
        }
    }

    /// Nonzero symbols as 0-based entries with `i <= j`, in `(k, i, j)` order.
    pub fn entries(&self) -> Vec<ChristoffelEntry> {
        let n = self.chart.dim();
        let mut out = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let g = self.gamma(k, i, j);
                    if !g.is_zero() {
                        out.push(ChristoffelEntry { k, i, j, expr: g.clone() });
                    }
                }
            }
        }
        out
    }

    /// Covariant derivative of base fields:
    /// `(nabla_X Y)^k = X^i d_i Y^k + Gamma^k_{ij} X^i Y^j`.
    pub fn covariant_derivative(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        self.check_base_field(x)?;
        self.check_base_field(y)?;
        let n = self.chart.dim();
        let coords = self.chart.base_coords();
        let mut components = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = RationalExpr::zero();
            for i in 0..n {
                if x.components[i].is_zero() {
                    continue;
                }
                let d = y.components[k].differentiate(&coords[i]);
                if !d.is_zero() {
                    acc = acc.checked_add(&x.components[i].checked_mul(&d)?)?;
                }
                for j in 0..n {
                    if y.components[j].is_zero() {
                        continue;
                    }
                    let g = self.gamma(k, i, j);
                    if g.is_zero() {
                        continue;
                    }
                    let t = g.checked_mul(&x.components[i])?.checked_mul(&y.components[j])?;
                    acc = acc.checked_add(&t)?;
                }
            }
            components.push(acc);
        }
        VectorField::on_base(self.chart.clone(), components)
    }

    /// Symmetric product `<X : Y> = nabla_X Y + nabla_Y X`.
    pub fn symmetric_product(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        let a = self.covariant_derivative(x, y)?;
        let b = self.covariant_derivative(y, x)?;
        a.checked_add(&b)
    }

    /// Torsion `nabla_X Y - nabla_Y X - [X, Y]`; identically zero for the
    /// symmetrised tables this type builds.
    pub fn torsion(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        let a = self.covariant_derivative(x, y)?;
        let b = self.covariant_derivative(y, x)?;
        a.checked_sub(&b)?.checked_sub(&lie_bracket(x, y)?)
    }

    /// Curvature `R(X, Y) W = nabla_X nabla_Y W - nabla_Y nabla_X W -
    /// nabla_{[X,Y]} W`.
    pub fn curvature(&self, x: &VectorField, y: &VectorField, w: &VectorField) -> Result<VectorField> {
        let xyw = self.covariant_derivative(x, &self.covariant_derivative(y, w)?)?;
        let yxw = self.covariant_derivative(y, &self.covariant_derivative(x, w)?)?;
        let bw = self.covariant_derivative(&lie_bracket(x, y)?, w)?;
        xyw.checked_sub(&yxw)?.checked_sub(&bw)
    }

    /// Geodesic spray on the tangent chart:
    /// `S = v^i d_{q_i} - Gamma^j_{kl} v^k v^l d_{v_j}`.
    pub fn geodesic_spray(&self) -> VectorField {
        let n = self.chart.dim();
        let mut components = Vec::with_capacity(2 * n);
        for vname in self.chart.velocity_coords() {
            components.push(RationalExpr::var(vname));
        }
        for j in 0..n {
            let mut acc = RationalExpr::zero();
            for k in 0..n {
                for l in 0..n {
                    let g = self.gamma(j, k, l);
                    if g.is_zero() {
                        continue;
                    }
                    let vk = RationalExpr::var(&self.chart.velocity_coords()[k]);
                    let vl = RationalExpr::var(&self.chart.velocity_coords()[l]);
                    let t = g
                        .checked_mul(&vk)
                        .and_then(|t| t.checked_mul(&vl))
                        .expect("spray term");
                    acc = acc.checked_add(&t).expect("spray accumulation");
                }
            }
            components.push(-&acc);
        }
        VectorField {
            chart: self.chart.clone(),
            space: Space::Tangent,
            components,
        }
    }

    /// Horizontal lift `X^H = X^i (d_{q_i} - Gamma^j_{ik} v^k d_{v_j})`.
    pub fn horizontal_lift(&self, x: &VectorField) -> Result<VectorField> {
        self.check_base_field(x)?;
        let n = self.chart.dim();
        let mut components: Vec<RationalExpr> = x.components.to_vec();
        for j in 0..n {
            let mut acc = RationalExpr::zero();
            for i in 0..n {
                if x.components[i].is_zero() {
                    continue;
                }
                for k in 0..n {
                    let g = self.gamma(j, i, k);
                    if g.is_zero() {
                        continue;
                    }
                    let vk = RationalExpr::var(&self.chart.velocity_coords()[k]);
                    let t = g.checked_mul(&x.components[i])?.checked_mul(&vk)?;
                    acc = acc.checked_add(&t)?;
                }
            }
            components.push(-&acc);
        }
        VectorField::on_tangent(self.chart.clone(), components)
    }

    /// `nabla_v X` with the formal velocity in place of the lower argument:
    /// component `k` is `v^i d_i X^k + Gamma^k_{ij} v^i X^j`, a function on
    /// the tangent chart.
    pub fn covariant_derivative_along_velocity(&self, x: &VectorField) -> Result<Vec<RationalExpr>> {
        self.check_base_field(x)?;
        let n = self.chart.dim();
        let coords = self.chart.base_coords();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = RationalExpr::zero();
            for i in 0..n {
                let vi = RationalExpr::var(&self.chart.velocity_coords()[i]);
                let d = x.components[k].differentiate(&coords[i]);
                if !d.is_zero() {
                    acc = acc.checked_add(&vi.checked_mul(&d)?)?;
                }
                for j in 0..n {
                    let g = self.gamma(k, i, j);
                    if g.is_zero() || x.components[j].is_zero() {
                        continue;
                    }
                    let t = g.checked_mul(&vi)?.checked_mul(&x.components[j])?;
                    acc = acc.checked_add(&t)?;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    fn check_base_field(&self, x: &VectorField) -> Result<()> {
        if x.chart != self.chart {
            return Err(Error::ChartMismatch("field chart differs from connection chart".into()));
        }
        if x.space != Space::Base {
            return Err(Error::ChartMismatch("expected a base field".into()));
        }
        Ok(())
    }
}

/// An affine connection control system: chart, connection, and input fields
/// `g_1 .. g_m` on the base.
#[derive(Debug, Clone)]
pub struct AccsSystem {
    connection: Connection,
    controls: Vec<VectorField>,
}

impl AccsSystem {
    pub fn new(connection: Connection, controls: Vec<VectorField>) -> Result<Self> {
        for g in &controls {
            if g.chart() != connection.chart() {
                return Err(Error::ChartMismatch("control field chart differs from connection chart".into()));
            }
            if g.space() != Space::Base {
                return Err(Error::ChartMismatch("control fields must live on the base".into()));
            }
        }
        Ok(AccsSystem { connection, controls })
    }

    pub fn chart(&self) -> &Chart {
        self.connection.chart()
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn controls(&self) -> &[VectorField] {
        &self.controls
    }

    pub fn dim(&self) -> usize {
        self.chart().dim()
    }

    /// Control-affine lift on the tangent chart: drift is the geodesic
    /// spray, inputs are the vertical lifts of the control fields.
    pub fn lift(&self) -> Result<TangentSystem> {
        let drift = self.connection.geodesic_spray();
        let inputs = self
            .controls
            .iter()
            .map(vertical_lift)
            .collect::<Result<Vec<_>>>()?;
        Ok(TangentSystem {
            chart: self.chart().clone(),
            drift,
            inputs,
        })
    }
}

/// First-order control-affine system on the tangent chart.
#[derive(Debug, Clone)]
pub struct TangentSystem {
    chart: Chart,
    drift: VectorField,
    inputs: Vec<VectorField>,
}

impl TangentSystem {
    pub fn new(chart: Chart, drift: VectorField, inputs: Vec<VectorField>) -> Result<Self> {
        if drift.chart() != &chart || drift.space() != Space::Tangent {
            return Err(Error::ChartMismatch("drift must be a tangent field on the system chart".into()));
        }
        for g in &inputs {
            if g.chart() != &chart || g.space() != Space::Tangent {
                return Err(Error::ChartMismatch("inputs must be tangent fields on the system chart".into()));
            }
        }
        Ok(TangentSystem { chart, drift, inputs })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn drift(&self) -> &VectorField {
        &self.drift
    }

    pub fn inputs(&self) -> &[VectorField] {
        &self.inputs
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::symexpr::parse_expr;

    fn expr(src: &str, chart: &Chart, space: Space) -> RationalExpr {
        parse_expr(src, chart.coords_for(space)).unwrap()
    }

    fn base_field(chart: &Chart, comps: [&str; 3]) -> VectorField {
        let components = comps
            .iter()
            .map(|s| expr(s, chart, Space::Base))
            .collect();
        VectorField::on_base(chart.clone(), components).unwrap()
    }

    fn chart3() -> Chart {
        Chart::with_velocity(
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec!["y1".into(), "y2".into(), "y3".into()],
        )
        .unwrap()
    }

    /// Planar rigid body with a fore-aft thruster: the running example
    /// connection with nonzero symbols
    /// G^1_11 = -1, G^1_12 = -1/2, G^2_11 = -1, G^2_12 = -1/2, G^2_22 = 1.
    pub(crate) fn body_connection() -> Connection {
        let chart = chart3();
        let e = |k: usize, i: usize, j: usize, s: &str| ChristoffelEntry {
            k,
            i,
            j,
            expr: parse_expr(s, chart.base_coords()).unwrap(),
        };
        let entries = vec![
            e(0, 0, 0, "-1"),
            e(0, 0, 1, "-1/2"),
            e(1, 0, 0, "-1"),
            e(1, 0, 1, "-1/2"),
            e(1, 1, 1, "1"),
        ];
        Connection::new(chart, entries).unwrap()
    }

    pub(crate) fn body_system() -> AccsSystem {
        let conn = body_connection();
        let chart = conn.chart().clone();
        let g1 = base_field(&chart, ["0", "1", "0"]);
        let g2 = base_field(&chart, ["0", "0", "1"]);
        AccsSystem::new(conn, vec![g1, g2]).unwrap()
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(vec![]).is_err());
        assert!(Chart::new(vec!["x".into(), "x".into()]).is_err());
        assert!(Chart::new(vec!["2x".into()]).is_err());
        assert!(Chart::with_velocity(vec!["x".into()], vec!["x".into()]).is_err());
        let c = Chart::new(vec!["q".into()]).unwrap();
        assert_eq!(c.velocity_coords(), ["v_q".to_string()]);
    }

    #[test]
    fn symmetrized_table_lookup() {
        let conn = body_connection();
        assert_eq!(conn.gamma(0, 0, 1), conn.gamma(0, 1, 0));
        assert_eq!(conn.gamma(0, 0, 1).to_string(), "-1/2");
        assert!(conn.gamma(2, 1, 1).is_zero());
    }

    #[test]
    fn conflicting_entries_rejected() {
        let chart = chart3();
        let mk = |s: &str| parse_expr(s, chart.base_coords()).unwrap();
        let entries = vec![
            ChristoffelEntry { k: 0, i: 0, j: 1, expr: mk("1") },
            ChristoffelEntry { k: 0, i: 1, j: 0, expr: mk("2") },
        ];
        assert!(matches!(
            Connection::new(chart, entries),
            Err(Error::InconsistentChristoffel(_))
        ));
    }

    #[test]
    fn spray_of_body_connection() {
        let conn = body_connection();
        let s = conn.geodesic_spray();
        let chart = conn.chart();
        let want = [
            "y1",
            "y2",
            "y3",
            "y1^2 + y1*y2",
            "y1^2 - y2^2 + y1*y2",
            "0",
        ];
        for (k, w) in want.iter().enumerate() {
            let target = expr(w, chart, Space::Tangent);
            assert!(
                s.component(k).equivalent(&target),
                "spray component {k}: {} vs {w}",
                s.component(k)
            );
        }
    }

    #[test]
    fn lift_of_body_system() {
        let sys = body_system();
        let lifted = sys.lift().unwrap();
        assert_eq!(lifted.inputs()[0].to_string(), "(0, 0, 0, 0, 1, 0)");
        assert_eq!(lifted.inputs()[1].to_string(), "(0, 0, 0, 0, 0, 1)");
        assert_eq!(lifted.drift().component(0).to_string(), "y1");
    }

    #[test]
    fn symmetric_products_of_body_inputs() {
        let sys = body_system();
        let conn = sys.connection();
        let g1 = &sys.controls()[0];
        let g2 = &sys.controls()[1];
        let chart = sys.chart();
        let p11 = conn.symmetric_product(g1, g1).unwrap();
        assert_eq!(p11.to_string(), "(0, 2, 0)");
        let p12 = conn.symmetric_product(g1, g2).unwrap();
        assert!(p12.is_zero());
        let d1 = VectorField::basis(chart.clone(), Space::Base, 0).unwrap();
        let p_d1_d1 = conn.symmetric_product(&d1, &d1).unwrap();
        assert_eq!(p_d1_d1.to_string(), "(-2, -2, 0)");
    }

    #[test]
    fn bracket_is_antisymmetric_and_matches_hand_computation() {
        let chart = chart3();
        let x = base_field(&chart, ["x2", "0", "0"]);
        let y = base_field(&chart, ["0", "x1", "x1*x2"]);
        let b = lie_bracket(&x, &y).unwrap();
        // [x2 d1, x1 d2 + x1 x2 d3] = x2 d2 + x2^2 d3 - x1 d1
        assert_eq!(b.to_string(), "(-x1, x2, x2^2)");
        let br = lie_bracket(&y, &x).unwrap();
        assert!(b.checked_add(&br).unwrap().is_zero());
    }

    #[test]
    fn torsion_vanishes_for_symmetrized_tables() {
        let conn = body_connection();
        let chart = conn.chart().clone();
        let x = base_field(&chart, ["x2^2", "x1 - x3", "1"]);
        let y = base_field(&chart, ["x3", "x1*x2", "x2"]);
        assert!(conn.torsion(&x, &y).unwrap().is_zero());
    }

    /// Classical component formula for curvature on basis fields, used as an
    /// independent oracle for the operator definition.
    fn curvature_components(conn: &Connection, i: usize, j: usize, k: usize) -> Vec<RationalExpr> {
        let n = conn.chart().dim();
        let coords = conn.chart().base_coords();
        let mut out = Vec::with_capacity(n);
        for l in 0..n {
            let mut acc = conn.gamma(l, j, k).differentiate(&coords[i]);
            acc = (&acc - &conn.gamma(l, i, k).differentiate(&coords[j])).clone();
            for m in 0..n {
                let a = conn.gamma(l, i, m).checked_mul(conn.gamma(m, j, k)).unwrap();
                let b = conn.gamma(l, j, m).checked_mul(conn.gamma(m, i, k)).unwrap();
                acc = acc.checked_add(&(&a - &b)).unwrap();
            }
            out.push(acc);
        }
        out
    }

    #[test]
    fn curvature_operator_matches_component_formula() {
        let chart = chart3();
        let mk = |s: &str| parse_expr(s, chart.base_coords()).unwrap();
        let curved = Connection::new(
            chart.clone(),
            vec![
                ChristoffelEntry { k: 1, i: 1, j: 1, expr: mk("x1") },
                ChristoffelEntry { k: 0, i: 1, j: 2, expr: mk("x2*x3") },
                ChristoffelEntry { k: 2, i: 0, j: 0, expr: mk("1/(x1^2 + 1)") },
            ],
        )
        .unwrap();
        for conn in [&body_connection(), &curved] {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let di = VectorField::basis(chart.clone(), Space::Base, i).unwrap();
                        let dj = VectorField::basis(chart.clone(), Space::Base, j).unwrap();
                        let dk = VectorField::basis(chart.clone(), Space::Base, k).unwrap();
                        let op = conn.curvature(&di, &dj, &dk).unwrap();
                        let comp = curvature_components(conn, i, j, k);
                        for l in 0..3 {
                            assert!(
                                op.component(l).equivalent(&comp[l]),
                                "R(d{i}, d{j}) d{k} component {l}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn flat_connection_has_zero_curvature_and_straight_spray() {
        let chart = chart3();
        let conn = Connection::flat(chart.clone());
        let x = base_field(&chart, ["x2^2", "x1", "x3"]);
        let y = base_field(&chart, ["1", "x1*x3", "0"]);
        let w = base_field(&chart, ["x1", "0", "x2"]);
        assert!(conn.curvature(&x, &y, &w).unwrap().is_zero());
        assert_eq!(conn.geodesic_spray().to_string(), "(y1, y2, y3, 0, 0, 0)");
        let h = conn.horizontal_lift(&x).unwrap();
        assert_eq!(h.to_string(), "(x2^2, x1, x3, 0, 0, 0)");
    }

    #[test]
    fn known_curvature_witness_in_dimension_two() {
        // G^2_22 = x1 gives R(d1, d2) d2 = d2
        let chart = Chart::with_velocity(
            vec!["x1".into(), "x2".into()],
            vec!["y1".into(), "y2".into()],
        )
        .unwrap();
        let conn = Connection::new(
            chart.clone(),
            vec![ChristoffelEntry {
                k: 1,
                i: 1,
                j: 1,
                expr: parse_expr("x1", chart.base_coords()).unwrap(),
            }],
        )
        .unwrap();
        let d1 = VectorField::basis(chart.clone(), Space::Base, 0).unwrap();
        let d2 = VectorField::basis(chart.clone(), Space::Base, 1).unwrap();
        let r = conn.curvature(&d1, &d2, &d2).unwrap();
        assert_eq!(r.to_string(), "(0, 1)");
    }

    #[test]
    fn bracket_of_spray_with_vertical_lift() {
        // [S, vlft(X)] = -hlft(X) + vlft(nabla_v X), exactly.
        let conn = body_connection();
        let chart = conn.chart().clone();
        let s = conn.geodesic_spray();
        for x in [
            base_field(&chart, ["0", "1", "0"]),
            base_field(&chart, ["x1*x2", "x3^2", "x1 - 1"]),
        ] {
            let lhs = lie_bracket(&s, &vertical_lift(&x).unwrap()).unwrap();
            let h = conn.horizontal_lift(&x).unwrap();
            let nabla_v = conn.covariant_derivative_along_velocity(&x).unwrap();
            let mut comps = vec![RationalExpr::zero(); 3];
            comps.extend(nabla_v);
            let vpart = VectorField::on_tangent(chart.clone(), comps).unwrap();
            let rhs = h.negate().checked_add(&vpart).unwrap();
            assert!(lhs.checked_sub(&rhs).unwrap().is_zero());
        }
    }

    #[test]
    fn double_vertical_bracket_is_lifted_symmetric_product() {
        // [vlft(X1), [S, vlft(X2)]] = vlft(<X1 : X2>), exactly.
        let conn = body_connection();
        let chart = conn.chart().clone();
        let s = conn.geodesic_spray();
        let x1 = base_field(&chart, ["0", "1", "0"]);
        let x2 = base_field(&chart, ["x2", "0", "x1"]);
        let inner = lie_bracket(&s, &vertical_lift(&x2).unwrap()).unwrap();
        let lhs = lie_bracket(&vertical_lift(&x1).unwrap(), &inner).unwrap();
        let rhs = vertical_lift(&conn.symmetric_product(&x1, &x2).unwrap()).unwrap();
        assert!(lhs.checked_sub(&rhs).unwrap().is_zero());
    }
}
