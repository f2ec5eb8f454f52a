//! Seeded randomized verification: exact bracket-identity suites over
//! arbitrary polynomial connections, and generated quotient instances for
//! exercising the two decision routes against each other.
//!
//! Everything here is deterministic in the seed (ChaCha8), so reports built
//! from these results are byte-identical across runs.

use crate::error::Result;
use crate::distribution::Distribution;
use crate::geometry::{
    lie_bracket, vertical_lift, AccsSystem, Chart, ChristoffelEntry, Connection, VectorField,
};
use crate::symexpr::RationalExpr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn standard_chart(n: usize) -> Chart {
    let base = (1..=n).map(|i| format!("x{i}")).collect();
    let velocity = (1..=n).map(|i| format!("y{i}")).collect();
    Chart::with_velocity(base, velocity).expect("standard chart names are valid")
}

/// Random polynomial over `coords`, few terms, small integer coefficients,
/// total degree ≤ `max_degree`.
pub fn random_polynomial(
    rng: &mut ChaCha8Rng,
    coords: &[String],
    max_degree: u32,
) -> RationalExpr {
    let n_terms = rng.random_range(1..=3);
    let mut acc = RationalExpr::zero();
    for _ in 0..n_terms {
        let c = loop {
            let c = rng.random_range(-3i64..=3);
            if c != 0 {
                break c;
            }
        };
        let mut term = RationalExpr::from_int(c);
        let deg = rng.random_range(0..=max_degree);
        for _ in 0..deg {
            let v = &coords[rng.random_range(0..coords.len())];
            term = term.checked_mul(&RationalExpr::var(v)).expect("monomial product");
        }
        acc = acc.checked_add(&term).expect("polynomial sum");
    }
    acc
}

pub fn random_field(rng: &mut ChaCha8Rng, chart: &Chart, max_degree: u32) -> VectorField {
    let comps = (0..chart.dim())
        .map(|_| random_polynomial(rng, chart.base_coords(), max_degree))
        .collect();
    VectorField::on_base(chart.clone(), comps).expect("components are over the base chart")
}

/// Random symmetric Christoffel table; roughly half the canonical slots are
/// populated.
pub fn random_connection(rng: &mut ChaCha8Rng, chart: &Chart, max_degree: u32) -> Connection {
    let n = chart.dim();
    let mut entries = Vec::new();
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                if rng.random_bool(0.5) {
                    entries.push(ChristoffelEntry {
                        k,
                        i,
                        j,
                        expr: random_polynomial(rng, chart.base_coords(), max_degree),
                    });
                }
            }
        }
    }
    Connection::new(chart.clone(), entries).expect("generated entries are canonical")
}

#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

fn check(name: &'static str, gap: VectorField) -> IdentityCheck {
    if gap.is_zero() {
        IdentityCheck {
            name,
            holds: true,
            detail: "exact".into(),
        }
    } else {
        IdentityCheck {
            name,
            holds: false,
            detail: format!("nonzero gap {gap}"),
        }
    }
}

/// The exact identity suite for one connection and a triple of fields:
///
/// * `[S, vlft(X)] = -hlft(X) + vlft(nabla_v X)`
/// * `[vlft(X1), [S, vlft(X2)]] = vlft(<X1 : X2>)`
/// * base part of `[S, [S, vlft(X)]]` equals `-2 nabla_v X`
/// * torsion vanishes
/// * `R(X, Y)Z = -R(Y, X)Z`
/// * first Bianchi identity
pub fn check_identities(
    conn: &Connection,
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
) -> Result<Vec<IdentityCheck>> {
    let chart = conn.chart().clone();
    let n = chart.dim();
    let s = conn.geodesic_spray();
    let mut out = Vec::with_capacity(6);

    let spray_vlft = lie_bracket(&s, &vertical_lift(x1)?)?;
    let h = conn.horizontal_lift(x1)?;
    let nabla_v = conn.covariant_derivative_along_velocity(x1)?;
    let mut comps = vec![RationalExpr::zero(); n];
    comps.extend(nabla_v.iter().cloned());
    let vpart = VectorField::on_tangent(chart.clone(), comps)?;
    let rhs = h.negate().checked_add(&vpart)?;
    out.push(check("spray-vlft-bracket", spray_vlft.checked_sub(&rhs)?));

    let inner = lie_bracket(&s, &vertical_lift(x2)?)?;
    let lhs = lie_bracket(&vertical_lift(x1)?, &inner)?;
    let rhs = vertical_lift(&conn.symmetric_product(x1, x2)?)?;
    out.push(check("vlft-vlft-symmetric-product", lhs.checked_sub(&rhs)?));

    let double = lie_bracket(&s, &spray_vlft)?;
    let mut gap_comps = Vec::with_capacity(2 * n);
    for k in 0..n {
        // gap = base component minus (-2 nabla_v X)^k
        let two_nabla = nabla_v[k].checked_mul(&RationalExpr::from_int(2))?;
        gap_comps.push(double.components()[k].checked_add(&two_nabla)?);
    }
    // pad to a tangent field so the zero test is uniform
    gap_comps.extend(std::iter::repeat_n(RationalExpr::zero(), n));
    out.push(check(
        "double-spray-horizontal-part",
        VectorField::on_tangent(chart.clone(), gap_comps)?,
    ));

    out.push(check("torsion-vanishes", conn.torsion(x1, x2)?));

    let r12 = conn.curvature(x1, x2, x3)?;
    let r21 = conn.curvature(x2, x1, x3)?;
    out.push(check("curvature-antisymmetry", r12.checked_add(&r21)?));

    let b = conn
        .curvature(x1, x2, x3)?
        .checked_add(&conn.curvature(x2, x3, x1)?)?
        .checked_add(&conn.curvature(x3, x1, x2)?)?;
    out.push(check("first-bianchi", b));

    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    /// (identity name, number of trials in which it held)
    pub tallies: Vec<(&'static str, usize)>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run the identity suite `trials` times with fresh random fields drawn
/// from a ChaCha stream seeded by `seed`.
pub fn run_identity_suite(
    conn: &Connection,
    seed: u64,
    trials: usize,
    max_degree: u32,
) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = conn.chart();
    let mut tallies: Vec<(&'static str, usize)> = Vec::new();
    let mut failures = Vec::new();
    for t in 0..trials {
        let x1 = random_field(&mut rng, chart, max_degree);
        let x2 = random_field(&mut rng, chart, max_degree);
        let x3 = random_field(&mut rng, chart, max_degree);
        for c in check_identities(conn, &x1, &x2, &x3)? {
            match tallies.iter_mut().find(|(n, _)| *n == c.name) {
                Some((_, count)) => {
                    if c.holds {
                        *count += 1;
                    }
                }
                None => tallies.push((c.name, c.holds as usize)),
            }
            if !c.holds {
                failures.push(format!("trial {}: {}: {}", t + 1, c.name, c.detail));
            }
        }
    }
    Ok(SuiteReport {
        seed,
        trials,
        tallies,
        failures,
    })
}

/// A generated instance for the two-route agreement exercise.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub system: AccsSystem,
    pub distribution: Distribution,
    pub expect_pass: bool,
    pub label: String,
}

/// Generate a system with `D = span{d/dx^1 .. d/dx^k}` that satisfies all
/// four quotient conditions by construction: transverse Christoffel
/// entries live over transverse coordinates only, and transverse control
/// components do likewise.  With `passing = false`, one condition is then
/// deliberately broken (restriction, curvature, controls, or — when room
/// allows — involutivity of a non-coordinate distribution).
pub fn random_quotient_instance(rng: &mut ChaCha8Rng, passing: bool) -> RandomInstance {
    let n = rng.random_range(2..=3usize);
    let k = rng.random_range(1..n);
    let chart = standard_chart(n);
    let base = chart.base_coords().to_vec();
    let transverse: Vec<String> = base[k..].to_vec();

    let mut table: BTreeMap<(usize, usize, usize), RationalExpr> = BTreeMap::new();
    for m in 0..n {
        for i in 0..n {
            for j in i..n {
                if m < k {
                    if rng.random_bool(0.5) {
                        table.insert((m, i, j), random_polynomial(rng, &base, 2));
                    }
                } else if i >= k && j >= k && rng.random_bool(0.6) {
                    table.insert((m, i, j), random_polynomial(rng, &transverse, 2));
                }
            }
        }
    }

    let n_controls = rng.random_range(1..=2usize);
    let mut controls: Vec<Vec<RationalExpr>> = Vec::new();
    for _ in 0..n_controls {
        let mut comps = Vec::with_capacity(n);
        for idx in 0..n {
            if rng.random_bool(0.7) {
                let vars = if idx < k { &base } else { &transverse };
                comps.push(random_polynomial(rng, vars, 2));
            } else {
                comps.push(RationalExpr::zero());
            }
        }
        controls.push(comps);
    }

    let mut gens: Vec<Vec<RationalExpr>> = (0..k)
        .map(|a| {
            let mut g = vec![RationalExpr::zero(); n];
            // a nonzero constant scaling leaves the span and the axis
            // alignment untouched
            g[a] = if rng.random_bool(0.3) {
                RationalExpr::from_int(2)
            } else {
                RationalExpr::one()
            };
            g
        })
        .collect();

    let mut label = format!("n={n} k={k} pass");
    if !passing {
        let mut kind = rng.random_range(0..4usize);
        if kind == 3 && !(n == 3 && k == 2) {
            kind = rng.random_range(0..3usize);
        }
        let t0 = k; // first transverse index
        match kind {
            0 => {
                // restriction break: a transverse component of nabla_{d/dx^j} d/dx^1
                let j = rng.random_range(0..n);
                table.insert((t0, 0, j), RationalExpr::from_int(1));
                label = format!("n={n} k={k} break=restriction");
            }
            1 => {
                // curvature break: transverse entry gaining x1 dependence
                let cur = table
                    .get(&(t0, t0, t0))
                    .cloned()
                    .unwrap_or_else(RationalExpr::zero);
                table.insert(
                    (t0, t0, t0),
                    cur.checked_add(&RationalExpr::var(&base[0])).expect("entry sum"),
                );
                label = format!("n={n} k={k} break=curvature");
            }
            2 => {
                // control break: transverse control component gaining x1 dependence
                let g = &mut controls[0];
                g[t0] = g[t0]
                    .checked_add(&RationalExpr::var(&base[0]))
                    .expect("component sum");
                label = format!("n={n} k={k} break=controls");
            }
            _ => {
                // involutivity break: the Heisenberg pair d1, d2 + x1 d3
                gens = vec![
                    vec![RationalExpr::one(), RationalExpr::zero(), RationalExpr::zero()],
                    vec![
                        RationalExpr::zero(),
                        RationalExpr::one(),
                        RationalExpr::var(&base[0]),
                    ],
                ];
                label = format!("n={n} k={k} break=involutivity");
            }
        }
    }

    let entries: Vec<ChristoffelEntry> = table
        .into_iter()
        .map(|((m, i, j), expr)| ChristoffelEntry { k: m, i, j, expr })
        .collect();
    let conn = Connection::new(chart.clone(), entries).expect("canonical entries");
    let control_fields = controls
        .into_iter()
        .map(|c| VectorField::on_base(chart.clone(), c).expect("base components"))
        .collect();
    let system = AccsSystem::new(conn, control_fields).expect("valid system");
    let gen_fields = gens
        .into_iter()
        .map(|g| VectorField::on_base(chart.clone(), g).expect("base components"))
        .collect();
    let distribution = Distribution::new(gen_fields).expect("valid distribution");

    RandomInstance {
        system,
        distribution,
        expect_pass: passing,
        label,
    }
}
