//! The mechanical-quotient decision procedure and the reduced-system
//! constructor.
//!
//! A regular distribution `D` on the base gives a mechanical quotient
//! exactly when (a) `D` is involutive, (b) the connection restricts to `D`,
//! (c) the curvature maps `D x TQ x TQ` back into `D` in the polarized
//! sense below, and (d) the input fields preserve `D` under brackets.
//! [`check_quotient_conditions`] evaluates the four conditions directly on
//! the base; [`verify_lifted_invariance`] independently tests invariance of
//! the lifted distribution `span{D^vlft, [S, D^vlft]}` on the tangent
//! chart.  The two routes are equivalent and the crate treats disagreement
//! as an internal bug.
//!
//! For coordinate-aligned `D` (each generator supported on a single
//! coordinate axis), [`build_quotient_system`] strikes the killed
//! coordinates and emits the reduced affine connection control system.

use crate::distribution::{
    is_involutive, restricts_connection, CheckOutcome, Distribution, Witness,
};
use crate::error::{Error, Result};
use crate::geometry::{
    lie_bracket, vertical_lift, AccsSystem, Chart, ChristoffelEntry, Connection, Space,
    VectorField,
};
use crate::symexpr::RationalExpr;
use num_rational::BigRational;

/// A counterexample attached to one of the four conditions.
#[derive(Debug, Clone)]
pub struct ConditionWitness {
    /// Which condition failed: "involutivity", "connection-restriction",
    /// "curvature-invariance", or "control-invariance" (and on the lifted
    /// route, "spray-invariance" / "input-invariance").
    pub condition: &'static str,
    /// Human-readable description of the offending combination.
    pub context: String,
    /// The field that escaped the span.
    pub field: VectorField,
}

/// Verdict of the direct condition check.
#[derive(Debug, Clone)]
pub struct QuotientVerdict {
    pub involutive: bool,
    pub connection_restricts: bool,
    pub curvature_ok: bool,
    pub controls_invariant: bool,
    pub overall: bool,
    pub witnesses: Vec<ConditionWitness>,
    /// Records the generator-level semantics of the membership checks.
    pub note: &'static str,
}

const GENERATOR_NOTE: &str = "memberships checked on generators; arbitrary sections follow by \
     function-linearity and the Leibniz rule";

fn absorb(
    outcome: CheckOutcome,
    condition: &'static str,
    witnesses: &mut Vec<ConditionWitness>,
) -> bool {
    for Witness { label, field } in outcome.witnesses {
        witnesses.push(ConditionWitness {
            condition,
            context: label,
            field,
        });
    }
    outcome.holds
}

fn check_same_base(sys: &AccsSystem, d: &Distribution) -> Result<()> {
    if d.chart() != sys.chart() || d.space() != Space::Base {
        return Err(Error::ChartMismatch(
            "distribution must live on the system's base chart".into(),
        ));
    }
    Ok(())
}

/// Evaluate the four quotient conditions on the base chart.  With a base
/// point attached to `D`, a pointwise rank drop is rejected as a singular
/// point before any condition is evaluated.
pub fn check_quotient_conditions(sys: &AccsSystem, d: &Distribution) -> Result<QuotientVerdict> {
    check_same_base(sys, d)?;
    let rank = d.rank()?;
    if rank.singular_at_point {
        return Err(Error::SingularPoint {
            pointwise: rank.at_point.unwrap_or(0),
            generic: rank.generic,
        });
    }
    let conn = sys.connection();
    let chart = sys.chart();
    let n = chart.dim();
    let mut witnesses = Vec::new();

    let involutive = absorb(is_involutive(d)?, "involutivity", &mut witnesses);
    let connection_restricts = absorb(
        restricts_connection(conn, d)?,
        "connection-restriction",
        &mut witnesses,
    );

    // curvature: R(X, v)v stays in D for sections X of D and arbitrary v.
    // R is tensorial in every slot, so generators suffice for X, and
    // polarization over basis pairs (j <= l) covers all v:
    // R(X, d_j)d_l + R(X, d_l)d_j in D.
    let mut curvature_ok = true;
    for (a, g) in d.generators().iter().enumerate() {
        for j in 0..n {
            let dj = VectorField::basis(chart.clone(), Space::Base, j)?;
            for l in j..n {
                let dl = VectorField::basis(chart.clone(), Space::Base, l)?;
                let w = conn
                    .curvature(g, &dj, &dl)?
                    .checked_add(&conn.curvature(g, &dl, &dj)?)?;
                if !d.contains(&w)?.member {
                    curvature_ok = false;
                    witnesses.push(ConditionWitness {
                        condition: "curvature-invariance",
                        context: format!(
                            "R(g_{}, d/d{})d/d{} + R(g_{}, d/d{})d/d{}",
                            a + 1,
                            chart.base_coords()[j],
                            chart.base_coords()[l],
                            a + 1,
                            chart.base_coords()[l],
                            chart.base_coords()[j],
                        ),
                        field: w,
                    });
                }
            }
        }
    }

    let mut controls_invariant = true;
    for (i, u) in sys.controls().iter().enumerate() {
        for (a, g) in d.generators().iter().enumerate() {
            let b = lie_bracket(u, g)?;
            if !d.contains(&b)?.member {
                controls_invariant = false;
                witnesses.push(ConditionWitness {
                    condition: "control-invariance",
                    context: format!("[u_{}, g_{}]", i + 1, a + 1),
                    field: b,
                });
            }
        }
    }

    let overall = involutive && connection_restricts && curvature_ok && controls_invariant;
    Ok(QuotientVerdict {
        involutive,
        connection_restricts,
        curvature_ok,
        controls_invariant,
        overall,
        witnesses,
        note: GENERATOR_NOTE,
    })
}

/// The invariant lift `span{D^H, D^vlft}` on the tangent chart.  Requires
/// the connection to restrict to `D`; without restriction this span is not
/// the lifted-invariance object and the call is refused.
pub fn build_lifted_distribution(sys: &AccsSystem, d: &Distribution) -> Result<Distribution> {
    check_same_base(sys, d)?;
    let restricts = restricts_connection(sys.connection(), d)?;
    if !restricts.holds {
        return Err(Error::QuotientConditionsFailed(
            "connection does not restrict to the distribution; the horizontal-plus-vertical \
             span is not invariant"
                .into(),
        ));
    }
    let mut gens = Vec::with_capacity(2 * d.generators().len());
    for g in d.generators() {
        gens.push(sys.connection().horizontal_lift(g)?);
    }
    for g in d.generators() {
        gens.push(vertical_lift(g)?);
    }
    Distribution::new(gens)
}

/// Verdict of the lifted-invariance route.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub lifted_rank: usize,
    pub witnesses: Vec<ConditionWitness>,
}

/// Independent route to the quotient verdict: build
/// `D~ = span{D^vlft, [S, D^vlft]}` and test `[S, g~]` and `[g_i^vlft, g~]`
/// for membership, for every generator `g~`.  Runs even on failing inputs
/// so callers can cross-check the two routes.
pub fn verify_lifted_invariance(sys: &AccsSystem, d: &Distribution) -> Result<InvarianceReport> {
    check_same_base(sys, d)?;
    let conn = sys.connection();
    let spray = conn.geodesic_spray();
    let mut gens = Vec::with_capacity(2 * d.generators().len());
    let mut labels = Vec::new();
    for (a, g) in d.generators().iter().enumerate() {
        gens.push(vertical_lift(g)?);
        labels.push(format!("vlft(g_{})", a + 1));
    }
    for (a, g) in d.generators().iter().enumerate() {
        gens.push(lie_bracket(&spray, &vertical_lift(g)?)?);
        labels.push(format!("[S, vlft(g_{})]", a + 1));
    }
    let lifted = Distribution::new(gens)?;
    let lifted_rank = lifted.generic_rank();

    let mut witnesses = Vec::new();
    let mut invariant = true;
    for (gt, label) in lifted.generators().iter().zip(&labels) {
        let b = lie_bracket(&spray, gt)?;
        if !lifted.contains(&b)?.member {
            invariant = false;
            witnesses.push(ConditionWitness {
                condition: "spray-invariance",
                context: format!("[S, {label}]"),
                field: b,
            });
        }
        for (i, u) in sys.controls().iter().enumerate() {
            let b = lie_bracket(&vertical_lift(u)?, gt)?;
            if !lifted.contains(&b)?.member {
                invariant = false;
                witnesses.push(ConditionWitness {
                    condition: "input-invariance",
                    context: format!("[vlft(u_{}), {label}]", i + 1),
                    field: b,
                });
            }
        }
    }
    Ok(InvarianceReport {
        invariant,
        lifted_rank,
        witnesses,
    })
}

/// The reduced system.  `kept` lists the retained base-coordinate indices
/// (0-based, ascending).  `system` is `None` exactly when every coordinate
/// was quotiented away (`D = TQ`).
#[derive(Debug, Clone)]
pub struct QuotientSystem {
    pub kept: Vec<usize>,
    pub killed: Vec<usize>,
    pub system: Option<AccsSystem>,
}

impl QuotientSystem {
    /// Canonical projection onto the kept coordinates of the tangent chart:
    /// target coordinate names plus their expressions over the source chart.
    pub fn adapted_projection(&self, source: &Chart) -> (Vec<String>, Vec<RationalExpr>) {
        let mut names = Vec::new();
        let mut comps = Vec::new();
        for &i in &self.kept {
            names.push(source.base_coords()[i].clone());
            comps.push(RationalExpr::var(&source.base_coords()[i]));
        }
        for &i in &self.kept {
            names.push(source.velocity_coords()[i].clone());
            comps.push(RationalExpr::var(&source.velocity_coords()[i]));
        }
        (names, comps)
    }
}

/// Which coordinate axes a coordinate-aligned distribution spans.  Errors
/// with `NOT_ADAPTED` when some generator touches more than one axis.
fn aligned_axes(d: &Distribution) -> Result<Vec<usize>> {
    let mut axes = std::collections::BTreeSet::new();
    for (a, g) in d.generators().iter().enumerate() {
        let nonzero: Vec<usize> = g
            .components()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect();
        match nonzero.len() {
            0 => {}
            1 => {
                axes.insert(nonzero[0]);
            }
            _ => {
                return Err(Error::NotAdapted(format!(
                    "generator {} spans several coordinate axes; quotient emission needs \
                     coordinate-aligned generators and rectification is out of scope",
                    a + 1
                )))
            }
        }
    }
    Ok(axes.into_iter().collect())
}

/// Remove `var` from an expression whose derivative in `var` is identically
/// zero, substituting a constant that avoids the denominator's zero set.
fn eliminate_var(expr: &RationalExpr, var: &str) -> Result<RationalExpr> {
    if !expr.variables().contains(var) {
        return Ok(expr.clone());
    }
    debug_assert!(expr.differentiate(var).is_zero());
    let tries = expr.den().degree_in(var) + 2;
    for c in 0..tries {
        let mut map = std::collections::BTreeMap::new();
        map.insert(
            var.to_string(),
            RationalExpr::constant(BigRational::from_integer(c.into())),
        );
        match expr.substitute(&map) {
            Ok(reduced) => return Ok(reduced),
            Err(Error::DivisionByZero) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Internal(format!(
        "could not eliminate `{var}` from an expression independent of it"
    )))
}

/// Strike the killed coordinates from a system whose quotient conditions
/// hold.  Factored out of [`build_quotient_system`] so the dependence check
/// can be exercised directly on hand-made violating inputs.
pub(crate) fn reduce_system(
    sys: &AccsSystem,
    kept: &[usize],
    killed: &[usize],
) -> Result<Option<AccsSystem>> {
    if kept.is_empty() {
        return Ok(None);
    }
    let chart = sys.chart();
    let base = chart.base_coords();
    let velocity = chart.velocity_coords();
    let conn = sys.connection();

    // dependence check: every retained Christoffel symbol and control
    // component must be independent of the killed coordinates
    for (ai, &a) in kept.iter().enumerate() {
        let _ = ai;
        for &b in kept {
            for &c in kept {
                if c < b {
                    continue;
                }
                let g = conn.gamma(a, b, c);
                for &e in killed {
                    if !g.differentiate(&base[e]).is_zero() {
                        return Err(Error::DependenceViolation(format!(
                            "Gamma^{}_{{{},{}}} depends on `{}`",
                            base[a], base[b], base[c], base[e]
                        )));
                    }
                }
            }
        }
    }
    for (i, u) in sys.controls().iter().enumerate() {
        for &a in kept {
            for &e in killed {
                if !u.component(a).differentiate(&base[e]).is_zero() {
                    return Err(Error::DependenceViolation(format!(
                        "control {} component `{}` depends on `{}`",
                        i + 1,
                        base[a],
                        base[e]
                    )));
                }
            }
        }
    }

    let killed_names: Vec<&String> = killed.iter().map(|&e| &base[e]).collect();
    let strip = |expr: &RationalExpr| -> Result<RationalExpr> {
        let mut cur = expr.clone();
        for v in &killed_names {
            cur = eliminate_var(&cur, v)?;
        }
        Ok(cur)
    };

    let new_chart = Chart::with_velocity(
        kept.iter().map(|&i| base[i].clone()).collect(),
        kept.iter().map(|&i| velocity[i].clone()).collect(),
    )?;
    let mut entries = Vec::new();
    for (ka, &a) in kept.iter().enumerate() {
        for (kb, &b) in kept.iter().enumerate() {
            for (kc, &c) in kept.iter().enumerate() {
                if kc < kb {
                    continue;
                }
                let g = conn.gamma(a, b, c);
                if g.is_zero() {
                    continue;
                }
                entries.push(ChristoffelEntry {
                    k: ka,
                    i: kb,
                    j: kc,
                    expr: strip(g)?,
                });
            }
        }
    }
    let new_conn = Connection::new(new_chart.clone(), entries)?;
    let mut new_controls = Vec::new();
    for u in sys.controls() {
        let comps = kept
            .iter()
            .map(|&a| strip(u.component(a)))
            .collect::<Result<Vec<_>>>()?;
        // zero projected controls are retained to preserve input indexing
        new_controls.push(VectorField::on_base(new_chart.clone(), comps)?);
    }
    Ok(Some(AccsSystem::new(new_conn, new_controls)?))
}

/// Build the reduced system for a coordinate-aligned distribution.  The
/// quotient conditions are re-checked; the killed coordinates are the axes
/// `D` spans and the kept ones are the rest, in their original order.
pub fn build_quotient_system(sys: &AccsSystem, d: &Distribution) -> Result<QuotientSystem> {
    let verdict = check_quotient_conditions(sys, d)?;
    if !verdict.overall {
        let mut failing = Vec::new();
        if !verdict.involutive {
            failing.push("involutivity");
        }
        if !verdict.connection_restricts {
            failing.push("connection-restriction");
        }
        if !verdict.curvature_ok {
            failing.push("curvature-invariance");
        }
        if !verdict.controls_invariant {
            failing.push("control-invariance");
        }
        return Err(Error::QuotientConditionsFailed(failing.join(", ")));
    }
    let killed = aligned_axes(d)?;
    let rank = d.generic_rank();
    if killed.len() != rank {
        return Err(Error::Internal(format!(
            "aligned axis count {} disagrees with generic rank {rank}",
            killed.len()
        )));
    }
    let kept: Vec<usize> = (0..sys.dim()).filter(|i| !killed.contains(i)).collect();
    let system = reduce_system(sys, &kept, &killed)?;
    Ok(QuotientSystem { kept, killed, system })
}

/// Convenience wrapper asserting the two verdict routes agree; returns the
/// shared verdict.  Disagreement is an internal error by contract.
pub fn check_both_routes(sys: &AccsSystem, d: &Distribution) -> Result<(QuotientVerdict, InvarianceReport)> {
    let direct = check_quotient_conditions(sys, d)?;
    let lifted = verify_lifted_invariance(sys, d)?;
    if direct.overall != lifted.invariant {
        return Err(Error::Internal(format!(
            "condition route says {}, lifted-invariance route says {}",
            direct.overall, lifted.invariant
        )));
    }
    Ok((direct, lifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::geometry::tests::{body_connection, body_system};
    use crate::symexpr::parse_expr;

    fn chart2() -> Chart {
        Chart::with_velocity(vec!["x1".into(), "x2".into()], vec!["y1".into(), "y2".into()])
            .unwrap()
    }

    fn field(chart: &Chart, comps: &[&str]) -> VectorField {
        let components = comps
            .iter()
            .map(|s| parse_expr(s, chart.base_coords()).unwrap())
            .collect();
        VectorField::on_base(chart.clone(), components).unwrap()
    }

    fn flat2_system() -> AccsSystem {
        let chart = chart2();
        let conn = Connection::flat(chart.clone());
        let g = field(&chart, &["0", "1"]);
        AccsSystem::new(conn, vec![g]).unwrap()
    }

    fn curved2_system() -> AccsSystem {
        // G^2_22 = x1, sole nonzero symbol; curvature R(d1,d2)d2 = d2
        let chart = chart2();
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
        let g = field(&chart, &["0", "1"]);
        AccsSystem::new(conn, vec![g]).unwrap()
    }

    fn span_d1(chart: &Chart) -> Distribution {
        Distribution::new(vec![field(chart, &["1", "0"])]).unwrap()
    }

    #[test]
    fn flat_plane_passes_all_conditions() {
        let sys = flat2_system();
        let d = span_d1(sys.chart());
        let v = check_quotient_conditions(&sys, &d).unwrap();
        assert!(v.involutive && v.connection_restricts && v.curvature_ok && v.controls_invariant);
        assert!(v.overall);
        assert!(v.witnesses.is_empty());
        let inv = verify_lifted_invariance(&sys, &d).unwrap();
        assert!(inv.invariant);
        assert_eq!(inv.lifted_rank, 2);
    }

    #[test]
    fn curvature_failure_carries_the_known_witness() {
        let sys = curved2_system();
        let d = span_d1(sys.chart());
        let v = check_quotient_conditions(&sys, &d).unwrap();
        assert!(v.involutive && v.connection_restricts && v.controls_invariant);
        assert!(!v.curvature_ok);
        assert!(!v.overall);
        let w = v
            .witnesses
            .iter()
            .find(|w| w.condition == "curvature-invariance")
            .unwrap();
        // R(d1, d2)d2 + R(d1, d2)d2 = 2 d2
        assert_eq!(w.context, "R(g_1, d/dx2)d/dx2 + R(g_1, d/dx2)d/dx2");
        assert_eq!(w.field.to_string(), "(0, 2)");
        // the lifted route fails too: [S, [S, d/dy1]] leaves the span
        let inv = verify_lifted_invariance(&sys, &d).unwrap();
        assert!(!inv.invariant);
        assert!(inv
            .witnesses
            .iter()
            .any(|w| w.context == "[S, [S, vlft(g_1)]]"));
    }

    #[test]
    fn body_system_with_third_axis_passes_and_lifts() {
        let sys = body_system();
        let chart = sys.chart().clone();
        let d = Distribution::new(vec![field(&chart, &["0", "0", "1"])]).unwrap();
        let v = check_quotient_conditions(&sys, &d).unwrap();
        assert!(v.overall, "witnesses: {:?}", v.witnesses);
        let inv = verify_lifted_invariance(&sys, &d).unwrap();
        assert!(inv.invariant);
        assert_eq!(inv.lifted_rank, 2);
        // index-3 Christoffels vanish, so the horizontal lift of d3 is the
        // plain coordinate field
        let dt = build_lifted_distribution(&sys, &d).unwrap();
        assert_eq!(dt.generators()[0].to_string(), "(0, 0, 1, 0, 0, 0)");
        assert_eq!(dt.generators()[1].to_string(), "(0, 0, 0, 0, 0, 1)");
        assert_eq!(dt.generic_rank(), 2);
    }

    #[test]
    fn lifted_distribution_requires_restriction() {
        let sys = body_system();
        let chart = sys.chart().clone();
        // span{d2} is not parallel under the body connection
        let d = Distribution::new(vec![field(&chart, &["0", "1", "0"])]).unwrap();
        assert!(matches!(
            build_lifted_distribution(&sys, &d),
            Err(Error::QuotientConditionsFailed(_))
        ));
    }

    #[test]
    fn quotient_of_body_system_strikes_the_third_coordinate() {
        let sys = body_system();
        let chart = sys.chart().clone();
        let d = Distribution::new(vec![field(&chart, &["0", "0", "1"])]).unwrap();
        let q = build_quotient_system(&sys, &d).unwrap();
        assert_eq!(q.kept, vec![0, 1]);
        assert_eq!(q.killed, vec![2]);
        let qs = q.system.unwrap();
        assert_eq!(qs.chart().base_coords(), ["x1".to_string(), "x2".to_string()]);
        assert_eq!(qs.chart().velocity_coords(), ["y1".to_string(), "y2".to_string()]);
        // the reduced connection is the body connection's upper-left block
        let body = body_connection();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(qs.connection().gamma(k, i, j).equivalent(body.gamma(k, i, j)));
                }
            }
        }
        // first control survives as d2 of the plane, second projects to zero
        assert_eq!(qs.controls()[0].to_string(), "(0, 1)");
        assert!(qs.controls()[1].is_zero());
        assert_eq!(qs.controls().len(), 2);
        // reduced velocity equations match the original first two blocks
        let spray = qs.connection().geodesic_spray();
        let tc = qs.chart().tangent_coords().to_vec();
        let want2 = parse_expr("y1^2 + y1*y2", &tc).unwrap();
        let want3 = parse_expr("y1^2 - y2^2 + y1*y2", &tc).unwrap();
        assert!(spray.component(2).equivalent(&want2));
        assert!(spray.component(3).equivalent(&want3));
    }

    #[test]
    fn quotient_of_flat_space_is_flat() {
        let chart = Chart::with_velocity(
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec!["y1".into(), "y2".into(), "y3".into()],
        )
        .unwrap();
        let conn = Connection::flat(chart.clone());
        let g2 = field(&chart, &["0", "1", "0"]);
        let g3 = field(&chart, &["0", "0", "1"]);
        let sys = AccsSystem::new(conn, vec![g2, g3]).unwrap();
        let d = Distribution::new(vec![field(&chart, &["1", "0", "0"])]).unwrap();
        let q = build_quotient_system(&sys, &d).unwrap();
        let qs = q.system.unwrap();
        assert_eq!(qs.dim(), 2);
        assert!(qs.connection().entries().is_empty());
        assert_eq!(qs.controls()[0].to_string(), "(1, 0)");
        assert_eq!(qs.controls()[1].to_string(), "(0, 1)");
    }

    #[test]
    fn dependent_christoffel_retained_after_reduction() {
        // G^1_22 = x2 on the plane, D = span{d1}: the quotient keeps x2 and
        // has no Christoffels left (G^2_22 = 0), so the dynamics are y' = u
        let chart = chart2();
        let conn = Connection::new(
            chart.clone(),
            vec![ChristoffelEntry {
                k: 0,
                i: 1,
                j: 1,
                expr: parse_expr("x2", chart.base_coords()).unwrap(),
            }],
        )
        .unwrap();
        let sys = AccsSystem::new(conn, vec![field(&chart, &["0", "1"])]).unwrap();
        let d = span_d1(&chart);
        let v = check_quotient_conditions(&sys, &d).unwrap();
        assert!(v.overall, "witnesses: {:?}", v.witnesses);
        let q = build_quotient_system(&sys, &d).unwrap();
        let qs = q.system.unwrap();
        assert_eq!(qs.dim(), 1);
        assert!(qs.connection().entries().is_empty());
        assert_eq!(qs.controls()[0].to_string(), "(1)");
    }

    #[test]
    fn extreme_ranks() {
        let sys = flat2_system();
        let chart = sys.chart().clone();
        // D = TQ: all conditions trivially pass, quotient is 0-dimensional
        let full = Distribution::new(vec![
            field(&chart, &["1", "0"]),
            field(&chart, &["0", "1"]),
        ])
        .unwrap();
        let (v, inv) = check_both_routes(&sys, &full).unwrap();
        assert!(v.overall && inv.invariant);
        let q = build_quotient_system(&sys, &full).unwrap();
        assert!(q.system.is_none());
        assert!(q.kept.is_empty());
        // D = 0: quotient equals the original system
        let zero = Distribution::new(vec![VectorField::zero(chart.clone(), Space::Base)]).unwrap();
        let (v, inv) = check_both_routes(&sys, &zero).unwrap();
        assert!(v.overall && inv.invariant);
        let q = build_quotient_system(&sys, &zero).unwrap();
        assert_eq!(q.kept, vec![0, 1]);
        let qs = q.system.unwrap();
        assert_eq!(qs.dim(), 2);
        assert_eq!(qs.controls()[0].to_string(), "(0, 1)");
    }

    #[test]
    fn non_aligned_distribution_is_refused() {
        let sys = flat2_system();
        let chart = sys.chart().clone();
        let d = Distribution::new(vec![field(&chart, &["1", "1"])]).unwrap();
        let v = check_quotient_conditions(&sys, &d).unwrap();
        assert!(v.overall);
        assert!(matches!(
            build_quotient_system(&sys, &d),
            Err(Error::NotAdapted(_))
        ));
    }

    #[test]
    fn scaled_single_axis_generators_are_accepted() {
        let sys = flat2_system();
        let chart = sys.chart().clone();
        let d = Distribution::new(vec![field(&chart, &["x2^2 + 1", "0"])]).unwrap();
        let q = build_quotient_system(&sys, &d).unwrap();
        assert_eq!(q.killed, vec![0]);
        assert_eq!(q.system.unwrap().dim(), 1);
    }

    #[test]
    fn dependence_violation_detected_by_the_reducer() {
        // G^2_22 = x1 depends on the killed coordinate x1; the full
        // condition check rejects this system via curvature, and the
        // reducer's own dependence check rejects it too
        let sys = curved2_system();
        match reduce_system(&sys, &[1], &[0]) {
            Err(Error::DependenceViolation(msg)) => {
                assert!(msg.contains("Gamma^x2_{x2,x2}"), "message: {msg}");
            }
            other => panic!("expected DEPENDENCE_VIOLATION, got {other:?}"),
        }
        // control dependence is caught as well
        let chart = chart2();
        let conn = Connection::flat(chart.clone());
        let sys = AccsSystem::new(conn, vec![field(&chart, &["0", "x1"])]).unwrap();
        match reduce_system(&sys, &[1], &[0]) {
            Err(Error::DependenceViolation(msg)) => {
                assert!(msg.contains("control 1"), "message: {msg}");
            }
            other => panic!("expected DEPENDENCE_VIOLATION, got {other:?}"),
        }
    }

    #[test]
    fn singular_base_point_rejected() {
        let sys = flat2_system();
        let chart = sys.chart().clone();
        let origin: std::collections::BTreeMap<String, BigRational> = chart
            .base_coords()
            .iter()
            .map(|c| (c.clone(), BigRational::zero()))
            .collect();
        let d = Distribution::with_base_point(vec![field(&chart, &["x1", "0"])], origin).unwrap();
        assert!(matches!(
            check_quotient_conditions(&sys, &d),
            Err(Error::SingularPoint { .. })
        ));
    }
}
