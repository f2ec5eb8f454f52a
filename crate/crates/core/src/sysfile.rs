//! The system-description file: a TOML document declaring a chart, sparse
//! Christoffel entries, control fields, and optional named distributions,
//! points, quotient maps, explicit first-order systems, and simulation
//! scenarios.  Expression fields are strings in the `symexpr` grammar.
//!
//! A minimal file:
//!
//! ```toml
//! [chart]
//! base = ["x1", "x2"]
//!
//! [[christoffel]]        # 1-based indices, lower pair (i, j) with i <= j
//! k = 2
//! i = 2
//! j = 2
//! expr = "x1"
//!
//! [[control]]
//! components = ["0", "1"]
//! ```
//!
//! `parse` then `emit` round-trips: the reparsed file describes the same
//! system (all expressions symbolically equal).

use crate::error::{Error, Result};
use crate::distribution::Distribution;
use crate::geometry::{AccsSystem, Chart, ChristoffelEntry, Connection, VectorField};
use crate::simulate::{ControlSignal, FlowSystem, QuotientMap};
use crate::symexpr::{parse_expr, RationalExpr};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    chart: RawChart,
    #[serde(default)]
    christoffel: Vec<RawGamma>,
    #[serde(default)]
    control: Vec<RawControl>,
    #[serde(default)]
    distribution: Vec<RawDistribution>,
    #[serde(default)]
    point: Vec<RawPoint>,
    #[serde(default)]
    quotient_map: Vec<RawQuotientMap>,
    #[serde(default)]
    explicit_system: Vec<RawExplicitSystem>,
    #[serde(default)]
    scenario: Vec<RawScenario>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    base: Vec<String>,
    velocity: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGamma {
    k: usize,
    i: usize,
    j: usize,
    expr: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    components: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    name: String,
    generators: Vec<Vec<String>>,
    base_point: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    name: String,
    values: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuotientMap {
    name: String,
    /// Chart the components are written over: `"main"` (default, the
    /// file's tangent chart) or an explicit system's coordinates.
    source: Option<String>,
    target: Vec<String>,
    components: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExplicitSystem {
    name: String,
    coords: Vec<String>,
    drift: Vec<String>,
    #[serde(default)]
    inputs: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    source: Option<String>,
    x0: Vec<f64>,
    t_end: f64,
    dt: f64,
    tol: Option<f64>,
    control: Option<RawSignal>,
    map: Option<String>,
    target: Option<String>,
    target_distribution: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// A simulation or commutation scenario.  `source`/`target` name either
/// `"main"` (the lift of the file's system) or an `[[explicit_system]]`;
/// `target_distribution` asks for the target to be built as the quotient
/// by a named distribution.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub source: Option<String>,
    pub x0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub tol: f64,
    pub control: Option<ControlSignal>,
    pub map: Option<String>,
    pub target: Option<String>,
    pub target_distribution: Option<String>,
}

pub const DEFAULT_TOL: f64 = 1e-6;

impl Scenario {
    /// The scenario's control, or the zero signal of the given width.
    pub fn control_or_zero(&self, width: usize) -> ControlSignal {
        self.control
            .clone()
            .unwrap_or_else(|| ControlSignal::constant(vec![0.0; width]))
    }
}

#[derive(Debug, Clone)]
pub struct SystemFile {
    pub system: AccsSystem,
    pub distributions: BTreeMap<String, Distribution>,
    pub points: BTreeMap<String, BTreeMap<String, BigRational>>,
    pub maps: BTreeMap<String, QuotientMap>,
    pub explicit: BTreeMap<String, FlowSystem>,
    pub scenarios: BTreeMap<String, Scenario>,
}

/// Everything needed to run a commutation check for a scenario: the two
/// flows, the map between them, and a printable description of the target.
pub struct CommutationSetup {
    pub source: FlowSystem,
    pub target: FlowSystem,
    pub map: QuotientMap,
    pub target_desc: String,
}

impl SystemFile {
    pub fn distribution(&self, name: &str) -> Result<&Distribution> {
        self.distributions.get(name).ok_or_else(|| {
            Error::InvalidFile(format!("distribution `{name}` is not defined in the file"))
        })
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario> {
        self.scenarios.get(name).ok_or_else(|| {
            Error::InvalidFile(format!("scenario `{name}` is not defined in the file"))
        })
    }

    pub fn quotient_map(&self, name: &str) -> Result<&QuotientMap> {
        self.maps
            .get(name)
            .ok_or_else(|| Error::InvalidFile(format!("no quotient_map named `{name}`")))
    }

    /// A named point, the file's `default` point, or the origin — in that
    /// order of preference.
    pub fn resolve_point(
        &self,
        name: Option<&str>,
    ) -> Result<(String, BTreeMap<String, BigRational>)> {
        match name {
            Some(n) => {
                let p = self.points.get(n).ok_or_else(|| {
                    Error::InvalidFile(format!("point `{n}` is not defined in the file"))
                })?;
                Ok((n.to_string(), p.clone()))
            }
            None => {
                if let Some(p) = self.points.get("default") {
                    return Ok(("default".to_string(), p.clone()));
                }
                let origin = self
                    .system
                    .chart()
                    .base_coords()
                    .iter()
                    .map(|c| (c.clone(), BigRational::zero()))
                    .collect();
                Ok(("origin".to_string(), origin))
            }
        }
    }

    /// The flow a scenario field names: `None` or `"main"` is the lift of
    /// the file's system; anything else is an `[[explicit_system]]`.
    pub fn flow(&self, name: Option<&str>) -> Result<FlowSystem> {
        match name {
            None | Some("main") => FlowSystem::from_system_lift(&self.system),
            Some(n) => self
                .explicit
                .get(n)
                .cloned()
                .ok_or_else(|| Error::InvalidFile(format!("no explicit_system named `{n}`"))),
        }
    }

    /// Resolve a commutation scenario into concrete flows and a map.  The
    /// scenario must name exactly one of `target` (an explicit system or
    /// `"main"`, compared through its `map`) or `target_distribution` (the
    /// quotient is built on the fly; the map defaults to the adapted
    /// projection).
    pub fn commutation_setup(&self, scenario: &str) -> Result<CommutationSetup> {
        let sc = self.scenario(scenario)?;
        let source = self.flow(sc.source.as_deref())?;
        let (target, map, target_desc) = match (&sc.target, &sc.target_distribution) {
            (Some(t), None) => {
                let map_name = sc.map.as_deref().ok_or_else(|| {
                    Error::InvalidScenario(format!(
                        "scenario `{scenario}` needs a map to compare against `{t}`"
                    ))
                })?;
                let map = self.quotient_map(map_name)?.clone();
                (self.flow(Some(t))?, map, t.clone())
            }
            (None, Some(dname)) => {
                let d = self.distribution(dname)?;
                let q = crate::quotient::build_quotient_system(&self.system, d)?;
                let reduced = q.system.as_ref().ok_or_else(|| {
                    Error::InvalidScenario(
                        "quotient is zero-dimensional; nothing to simulate".into(),
                    )
                })?;
                let map = match sc.map.as_deref() {
                    Some(m) => self.quotient_map(m)?.clone(),
                    None => {
                        let (names, comps) = q.adapted_projection(self.system.chart());
                        QuotientMap::new(names, comps)?
                    }
                };
                (
                    FlowSystem::from_system_lift(reduced)?,
                    map,
                    format!("quotient by `{dname}`"),
                )
            }
            _ => {
                return Err(Error::InvalidScenario(format!(
                    "scenario `{scenario}` must name exactly one of target or target_distribution"
                )))
            }
        };
        Ok(CommutationSetup { source, target, map, target_desc })
    }
}

fn exact_value(name: &str, s: &str) -> Result<BigRational> {
    let e = parse_expr(s, &[])?;
    e.as_constant()
        .ok_or_else(|| Error::InvalidFile(format!("value for `{name}` is not an exact constant: {s}")))
}

fn exact_point(values: &BTreeMap<String, String>) -> Result<BTreeMap<String, BigRational>> {
    values
        .iter()
        .map(|(k, v)| Ok((k.clone(), exact_value(k, v)?)))
        .collect()
}

fn base_field(chart: &Chart, comps: &[String], what: &str) -> Result<VectorField> {
    if comps.len() != chart.dim() {
        return Err(Error::InvalidFile(format!(
            "{what} has {} components for a {}-dimensional chart",
            comps.len(),
            chart.dim()
        )));
    }
    let parsed = comps
        .iter()
        .map(|s| parse_expr(s, chart.base_coords()))
        .collect::<Result<Vec<_>>>()?;
    VectorField::on_base(chart.clone(), parsed)
}

fn unique_name<T>(map: &BTreeMap<String, T>, name: &str, what: &str) -> Result<()> {
    if map.contains_key(name) {
        return Err(Error::InvalidFile(format!("duplicate {what} name `{name}`")));
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<SystemFile> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::InvalidFile(e.to_string()))?;

    let chart = match raw.chart.velocity {
        Some(v) => Chart::with_velocity(raw.chart.base, v)?,
        None => Chart::new(raw.chart.base)?,
    };
    let n = chart.dim();

    let mut entries = Vec::with_capacity(raw.christoffel.len());
    for g in &raw.christoffel {
        for (label, idx) in [("k", g.k), ("i", g.i), ("j", g.j)] {
            if idx == 0 || idx > n {
                return Err(Error::InvalidFile(format!(
                    "christoffel index {label} = {idx} out of range 1..={n}"
                )));
            }
        }
        if g.i > g.j {
            return Err(Error::InvalidFile(format!(
                "christoffel entry ({}, {}, {}) must have i <= j",
                g.k, g.i, g.j
            )));
        }
        entries.push(ChristoffelEntry {
            k: g.k - 1,
            i: g.i - 1,
            j: g.j - 1,
            expr: parse_expr(&g.expr, chart.base_coords())?,
        });
    }
    let connection = Connection::new(chart.clone(), entries)?;

    let controls = raw
        .control
        .iter()
        .enumerate()
        .map(|(i, c)| base_field(&chart, &c.components, &format!("control {}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    let system = AccsSystem::new(connection, controls)?;

    let mut points = BTreeMap::new();
    for p in &raw.point {
        unique_name(&points, &p.name, "point")?;
        let vals = exact_point(&p.values)?;
        for c in chart.base_coords() {
            if !vals.contains_key(c) {
                return Err(Error::InvalidFile(format!(
                    "point `{}` is missing coordinate `{c}`",
                    p.name
                )));
            }
        }
        points.insert(p.name.clone(), vals);
    }

    let mut distributions = BTreeMap::new();
    for d in &raw.distribution {
        unique_name(&distributions, &d.name, "distribution")?;
        let gens = d
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| {
                base_field(&chart, g, &format!("generator {} of `{}`", i + 1, d.name))
            })
            .collect::<Result<Vec<_>>>()?;
        let dist = match &d.base_point {
            Some(vals) => Distribution::with_base_point(gens, exact_point(vals)?)?,
            None => Distribution::new(gens)?,
        };
        distributions.insert(d.name.clone(), dist);
    }

    let mut explicit = BTreeMap::new();
    for e in &raw.explicit_system {
        unique_name(&explicit, &e.name, "explicit_system")?;
        let parse_field = |f: &[String]| -> Result<Vec<RationalExpr>> {
            f.iter().map(|s| parse_expr(s, &e.coords)).collect()
        };
        let drift = parse_field(&e.drift)?;
        let inputs = e
            .inputs
            .iter()
            .map(|f| parse_field(f))
            .collect::<Result<Vec<_>>>()?;
        explicit.insert(
            e.name.clone(),
            FlowSystem::new(e.coords.clone(), drift, inputs)?,
        );
    }

    let mut maps = BTreeMap::new();
    for m in &raw.quotient_map {
        unique_name(&maps, &m.name, "quotient_map")?;
        let source_coords: &[String] = match m.source.as_deref() {
            None | Some("main") => chart.tangent_coords(),
            Some(n) => explicit
                .get(n)
                .map(|f| f.coords())
                .ok_or_else(|| {
                    Error::InvalidFile(format!(
                        "quotient_map `{}` source `{n}` names no explicit_system",
                        m.name
                    ))
                })?,
        };
        let comps = m
            .components
            .iter()
            .map(|s| parse_expr(s, source_coords))
            .collect::<Result<Vec<_>>>()?;
        maps.insert(m.name.clone(), QuotientMap::new(m.target.clone(), comps)?);
    }

    let mut scenarios = BTreeMap::new();
    for s in &raw.scenario {
        unique_name(&scenarios, &s.name, "scenario")?;
        let control = match &s.control {
            Some(sig) => Some(ControlSignal::new(sig.breakpoints.clone(), sig.values.clone())?),
            None => None,
        };
        let resolve = |label: &str, name: &Option<String>| -> Result<()> {
            if let Some(n) = name {
                if n != "main" && !explicit.contains_key(n) {
                    return Err(Error::InvalidFile(format!(
                        "scenario `{}` {label} `{n}` names no explicit_system (use \"main\" for the file's system)",
                        s.name
                    )));
                }
            }
            Ok(())
        };
        resolve("source", &s.source)?;
        resolve("target", &s.target)?;
        if let Some(d) = &s.target_distribution {
            if !distributions.contains_key(d) {
                return Err(Error::InvalidFile(format!(
                    "scenario `{}` target_distribution `{d}` names no distribution",
                    s.name
                )));
            }
            if s.target.is_some() {
                return Err(Error::InvalidFile(format!(
                    "scenario `{}` sets both target and target_distribution",
                    s.name
                )));
            }
        }
        if let Some(m) = &s.map {
            if !maps.contains_key(m) {
                return Err(Error::InvalidFile(format!(
                    "scenario `{}` map `{m}` names no quotient_map",
                    s.name
                )));
            }
        }
        scenarios.insert(
            s.name.clone(),
            Scenario {
                source: s.source.clone(),
                x0: s.x0.clone(),
                t_end: s.t_end,
                dt: s.dt,
                tol: s.tol.unwrap_or(DEFAULT_TOL),
                control,
                map: s.map.clone(),
                target: s.target.clone(),
                target_distribution: s.target_distribution.clone(),
            },
        );
    }

    Ok(SystemFile {
        system,
        distributions,
        points,
        maps,
        explicit,
        scenarios,
    })
}

pub fn parse_path(path: &std::path::Path) -> Result<SystemFile> {
    parse(&std::fs::read_to_string(path)?)
}

fn toml_str(s: &str) -> String {
    // expressions and names contain no control characters; basic strings
    // with escaped quotes/backslashes cover everything we emit
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn toml_str_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| toml_str(s)).collect();
    format!("[{}]", quoted.join(", "))
}

/// Render a system back to file syntax: chart, nonzero Christoffel entries
/// in (k, i, j) order, and controls.  `parse(emit(sys))` reconstructs the
/// same system.
pub fn emit(sys: &AccsSystem) -> String {
    let chart = sys.chart();
    let mut out = String::new();
    out.push_str("[chart]\n");
    let _ = writeln!(out, "base = {}", toml_str_list(chart.base_coords()));
    let _ = writeln!(out, "velocity = {}", toml_str_list(chart.velocity_coords()));
    for e in sys.connection().entries() {
        out.push_str("\n[[christoffel]]\n");
        let _ = writeln!(out, "k = {}", e.k + 1);
        let _ = writeln!(out, "i = {}", e.i + 1);
        let _ = writeln!(out, "j = {}", e.j + 1);
        let _ = writeln!(out, "expr = {}", toml_str(&e.expr.to_string()));
    }
    for c in sys.controls() {
        out.push_str("\n[[control]]\n");
        let comps: Vec<String> = c.components().iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "components = {}", toml_str_list(&comps));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::body_system;
    use num_traits::Zero;

    const BODY: &str = r#"
[chart]
base = ["x1", "x2", "x3"]
velocity = ["y1", "y2", "y3"]

[[christoffel]]
k = 1
i = 1
j = 1
expr = "-1"

[[christoffel]]
k = 1
i = 1
j = 2
expr = "-1/2"

[[christoffel]]
k = 2
i = 1
j = 1
expr = "-1"

[[christoffel]]
k = 2
i = 1
j = 2
expr = "-1/2"

[[christoffel]]
k = 2
i = 2
j = 2
expr = "1"

[[control]]
components = ["0", "1", "0"]

[[control]]
components = ["0", "0", "1"]

[[distribution]]
name = "d3"
generators = [["0", "0", "1"]]

[[point]]
name = "origin"
values = { x1 = "0", x2 = "0", x3 = "0" }

[[quotient_map]]
name = "tau"
target = ["z1", "z2"]
components = ["y1", "y2"]

[[explicit_system]]
name = "velocity"
coords = ["z1", "z2"]
drift = ["z1^2 + z1*z2", "z1^2 - z2^2 + z1*z2"]
inputs = [["0", "1"]]

[[scenario]]
name = "project"
x0 = [0.0, 0.0, 0.0, -1.0, 1.0, 0.0]
t_end = 0.5
dt = 0.001
tol = 1e-6
control = { breakpoints = [0.0], values = [[1.0, 0.0]] }
map = "tau"
target = "velocity"
"#;

    #[test]
    fn parses_a_full_document() {
        let f = parse(BODY).unwrap();
        assert_eq!(f.system.dim(), 3);
        assert_eq!(f.system.controls().len(), 2);
        let expected = body_system();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let got = f.system.connection().gamma(k, i, j);
                    let want = expected.connection().gamma(k, i, j);
                    assert!(got.equivalent(want), "gamma {k} {i} {j}");
                }
            }
        }
        assert!(f.distributions.contains_key("d3"));
        assert_eq!(f.points["origin"]["x2"], BigRational::zero());
        assert_eq!(f.maps["tau"].target_coords, vec!["z1", "z2"]);
        assert_eq!(f.explicit["velocity"].dim(), 2);
        let sc = &f.scenarios["project"];
        assert_eq!(sc.tol, 1e-6);
        assert_eq!(sc.control.as_ref().unwrap().dim(), 2);
        assert_eq!(sc.target.as_deref(), Some("velocity"));
    }

    #[test]
    fn emit_round_trips_symbolically() {
        let sys = body_system();
        let text = emit(&sys);
        let back = parse(&text).unwrap();
        assert_eq!(back.system.chart().base_coords(), sys.chart().base_coords());
        for k in 0..3 {
            for i in 0..3 {
                for j in i..3 {
                    let a = back.system.connection().gamma(k, i, j);
                    let b = sys.connection().gamma(k, i, j);
                    assert!(a.equivalent(b));
                }
            }
        }
        for (a, b) in back.system.controls().iter().zip(sys.controls()) {
            for (x, y) in a.components().iter().zip(b.components()) {
                assert!(x.equivalent(y));
            }
        }
    }

    #[test]
    fn index_and_symmetry_validation() {
        let bad_index = r#"
[chart]
base = ["x1", "x2"]
[[christoffel]]
k = 3
i = 1
j = 1
expr = "1"
"#;
        assert!(matches!(parse(bad_index), Err(Error::InvalidFile(_))));

        let swapped = r#"
[chart]
base = ["x1", "x2"]
[[christoffel]]
k = 1
i = 2
j = 1
expr = "1"
"#;
        assert!(matches!(parse(swapped), Err(Error::InvalidFile(_))));

        let inconsistent = r#"
[chart]
base = ["x1", "x2"]
[[christoffel]]
k = 1
i = 1
j = 2
expr = "1"
[[christoffel]]
k = 1
i = 1
j = 2
expr = "2"
"#;
        assert!(matches!(
            parse(inconsistent),
            Err(Error::InconsistentChristoffel(_))
        ));
    }

    #[test]
    fn unknown_keys_and_names_are_rejected() {
        let typo = r#"
[chart]
base = ["x1"]
christofel = []
"#;
        assert!(matches!(parse(typo), Err(Error::InvalidFile(_))));

        let missing_map = r#"
[chart]
base = ["x1"]
[[scenario]]
name = "s"
x0 = [0.0, 0.0]
t_end = 1.0
dt = 0.001
map = "nope"
"#;
        assert!(matches!(parse(missing_map), Err(Error::InvalidFile(_))));
    }

    #[test]
    fn expressions_validate_against_the_chart() {
        let bad_var = r#"
[chart]
base = ["x1"]
[[control]]
components = ["x2"]
"#;
        match parse(bad_var) {
            Err(Error::UnknownIdentifier { name, .. }) => assert_eq!(name, "x2"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }
}
