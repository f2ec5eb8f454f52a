//! Distributions (spans of vector fields over the ring of rational
//! functions), their ranks, membership tests with certificates, and the
//! closure properties the quotient theory needs: involutivity, geodesic
//! invariance, connection restriction, and the symmetric-product closure.
//!
//! All membership statements are *generic*: they hold on the complement of
//! the vanishing locus of finitely many polynomials.  Pointwise ranks are
//! reported separately so callers can flag singular points.

mod elim;

pub(crate) use elim::{clear_denominators, poly_rank, rational_rank, span_coefficients};

use crate::error::{Error, Result};
use crate::geometry::{lie_bracket, Connection, Space, VectorField};
use crate::symexpr::RationalExpr;
use num_rational::BigRational;
use std::collections::BTreeMap;

/// Span of finitely many vector fields on a common chart and space, with an
/// optional distinguished base point for pointwise rank reporting.
#[derive(Debug, Clone)]
pub struct Distribution {
    generators: Vec<VectorField>,
    base_point: Option<BTreeMap<String, BigRational>>,
}

/// Generic rank, and the rank at the distinguished base point when one is
/// attached.  `singular_at_point` flags a pointwise drop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    pub generic: usize,
    pub at_point: Option<usize>,
    pub singular_at_point: bool,
}

/// Outcome of a membership test.  When `member` is true the certificate
/// expresses the tested field as a rational-function combination of the
/// generators, in generator order.
#[derive(Debug, Clone)]
pub struct Membership {
    pub member: bool,
    pub certificate: Option<Vec<RationalExpr>>,
}

/// A named counterexample produced by a failed closure check.
#[derive(Debug, Clone)]
pub struct Witness {
    pub label: String,
    pub field: VectorField,
}

/// Verdict of a closure check, with every counterexample found.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub holds: bool,
    pub witnesses: Vec<Witness>,
}

impl CheckOutcome {
    fn passing() -> Self {
        CheckOutcome { holds: true, witnesses: Vec::new() }
    }

    fn note_failure(&mut self, label: String, field: VectorField) {
        self.holds = false;
        self.witnesses.push(Witness { label, field });
    }
}

impl Distribution {
    pub fn new(generators: Vec<VectorField>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidDistribution("a distribution needs at least one generator".into()));
        }
        let chart = generators[0].chart().clone();
        let space = generators[0].space();
        for g in &generators[1..] {
            if g.chart() != &chart || g.space() != space {
                return Err(Error::InvalidDistribution(
                    "generators live on different charts or spaces".into(),
                ));
            }
        }
        Ok(Distribution { generators, base_point: None })
    }

    pub fn with_base_point(
        generators: Vec<VectorField>,
        point: BTreeMap<String, BigRational>,
    ) -> Result<Self> {
        let mut d = Distribution::new(generators)?;
        for coord in d.coords() {
            if !point.contains_key(coord) {
                return Err(Error::UnboundCoordinate(coord.clone()));
            }
        }
        for name in point.keys() {
            if !d.coords().contains(name) {
                return Err(Error::UnknownCoordinate(name.clone()));
            }
        }
        // a pole of a generator at the base point is a hard error
        for g in &d.generators {
            g.eval(&point)?;
        }
        d.base_point = Some(point);
        Ok(d)
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn chart(&self) -> &crate::geometry::Chart {
        self.generators[0].chart()
    }

    pub fn space(&self) -> Space {
        self.generators[0].space()
    }

    pub fn base_point(&self) -> Option<&BTreeMap<String, BigRational>> {
        self.base_point.as_ref()
    }

    fn coords(&self) -> &[String] {
        self.chart().coords_for(self.space())
    }

    fn poly_rows(&self) -> Vec<Vec<crate::symexpr::Polynomial>> {
        self.generators
            .iter()
            .map(|g| clear_denominators(g.components()))
            .collect()
    }

    pub fn generic_rank(&self) -> usize {
        poly_rank(self.poly_rows())
    }

    /// Pointwise rank of the generator span at an explicit point.
    pub fn rank_at(&self, point: &BTreeMap<String, BigRational>) -> Result<usize> {
        let rows = self
            .generators
            .iter()
            .map(|g| g.eval(point))
            .collect::<Result<Vec<_>>>()?;
        Ok(rational_rank(rows))
    }

    pub fn rank(&self) -> Result<RankReport> {
        let generic = self.generic_rank();
        let at_point = match &self.base_point {
            Some(p) => Some(self.rank_at(p)?),
            None => None,
        };
        Ok(RankReport {
            generic,
            at_point,
            singular_at_point: at_point.map(|r| r < generic).unwrap_or(false),
        })
    }

    /// Generic membership of `w` in the span, decided by rank comparison on
    /// denominator-cleared rows; on success a certificate is solved for over
    /// the function field.
    pub fn contains(&self, w: &VectorField) -> Result<Membership> {
        if w.chart() != self.chart() || w.space() != self.space() {
            return Err(Error::ChartMismatch("membership test across charts or spaces".into()));
        }
        if w.is_zero() {
            return Ok(Membership {
                member: true,
                certificate: Some(vec![RationalExpr::zero(); self.generators.len()]),
            });
        }
        let mut rows = self.poly_rows();
        let base_rank = poly_rank(rows.clone());
        rows.push(clear_denominators(w.components()));
        if poly_rank(rows) > base_rank {
            return Ok(Membership { member: false, certificate: None });
        }
        let gens: Vec<&[RationalExpr]> = self.generators.iter().map(|g| g.components()).collect();
        match span_coefficients(&gens, w.components())? {
            Some(certificate) => Ok(Membership { member: true, certificate: Some(certificate) }),
            None => Err(Error::Internal(
                "rank test and certificate solve disagree on span membership".into(),
            )),
        }
    }
}

/// Is the span closed under Lie brackets of its generators?  By the Leibniz
/// rule this is equivalent to closure under brackets of arbitrary sections.
pub fn is_involutive(d: &Distribution) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::passing();
    for i in 0..d.generators.len() {
        for j in i + 1..d.generators.len() {
            let b = lie_bracket(&d.generators[i], &d.generators[j])?;
            if !d.contains(&b)?.member {
                out.note_failure(format!("[g_{}, g_{}]", i + 1, j + 1), b);
            }
        }
    }
    Ok(out)
}

/// Is the span closed under the symmetric product of its generators?
pub fn is_geodesically_invariant(conn: &Connection, d: &Distribution) -> Result<CheckOutcome> {
    check_base_distribution(conn, d)?;
    let mut out = CheckOutcome::passing();
    for i in 0..d.generators.len() {
        for j in i..d.generators.len() {
            let p = conn.symmetric_product(&d.generators[i], &d.generators[j])?;
            if !d.contains(&p)?.member {
                out.note_failure(format!("<g_{} : g_{}>", i + 1, j + 1), p);
            }
        }
    }
    Ok(out)
}

/// Does the connection restrict to the span: `nabla_X Y` stays in `D` for
/// every field `X` and section `Y` of `D`?  Function-linearity in `X` and
/// the Leibniz rule in `Y` reduce this to coordinate basis fields against
/// generators.
pub fn restricts_connection(conn: &Connection, d: &Distribution) -> Result<CheckOutcome> {
    check_base_distribution(conn, d)?;
    let chart = conn.chart();
    let mut out = CheckOutcome::passing();
    for i in 0..chart.dim() {
        let di = VectorField::basis(chart.clone(), Space::Base, i)?;
        for (a, g) in d.generators.iter().enumerate() {
            let cd = conn.covariant_derivative(&di, g)?;
            if !d.contains(&cd)?.member {
                out.note_failure(
                    format!("nabla_{{d/d{}}} g_{}", chart.base_coords()[i], a + 1),
                    cd,
                );
            }
        }
    }
    Ok(out)
}

/// Caps for the symmetric-product closure.
#[derive(Debug, Clone)]
pub struct SymClosureOptions {
    /// Adjoin passes; each productive pass raises the generic rank, so the
    /// closure stabilises within `dim + 1` passes.  `None` uses that bound.
    pub max_rounds: Option<usize>,
    /// Abort when any component of a new product exceeds this total degree.
    pub degree_cap: u32,
    /// Abort when the generator list grows past this length.
    pub max_generators: usize,
}

impl Default for SymClosureOptions {
    fn default() -> Self {
        SymClosureOptions {
            max_rounds: None,
            degree_cap: 64,
            max_generators: 512,
        }
    }
}

/// Result of a symmetric-product closure run.
#[derive(Debug, Clone)]
pub struct SymClosure {
    pub distribution: Distribution,
    pub rounds: usize,
    pub products_added: usize,
}

/// Smallest distribution containing `seed` and closed under the symmetric
/// product, computed by round-based saturation.  Only products independent
/// of the current span are adjoined; the order is fixed (pass by pass, pair
/// index order) so results are deterministic.
pub fn sym_closure(
    conn: &Connection,
    seed: &Distribution,
    opts: &SymClosureOptions,
) -> Result<SymClosure> {
    check_base_distribution(conn, seed)?;
    let n = conn.chart().dim();
    let max_rounds = opts.max_rounds.unwrap_or(n + 1);
    let mut gens = seed.generators.to_vec();
    let mut added = 0usize;
    let mut rounds = 0usize;
    loop {
        let current = Distribution::new(gens.clone())?;
        if current.generic_rank() == n {
            break;
        }
        if rounds == max_rounds {
            return Err(Error::CapExceeded(format!(
                "symmetric-product closure still growing after {max_rounds} passes"
            )));
        }
        rounds += 1;
        let snapshot_len = gens.len();
        let mut grew = false;
        let mut live = current;
        for i in 0..snapshot_len {
            for j in i..snapshot_len {
                let p = conn.symmetric_product(&gens[i], &gens[j])?;
                if p.is_zero() {
                    continue;
                }
                if p.max_degree() > opts.degree_cap {
                    return Err(Error::CapExceeded(format!(
                        "symmetric product <g_{} : g_{}> reached degree {}, cap {}",
                        i + 1,
                        j + 1,
                        p.max_degree(),
                        opts.degree_cap
                    )));
                }
                if live.contains(&p)?.member {
                    continue;
                }
                gens.push(p);
                added += 1;
                grew = true;
                if gens.len() > opts.max_generators {
                    return Err(Error::CapExceeded(format!(
                        "symmetric-product closure exceeded {} generators",
                        opts.max_generators
                    )));
                }
                live = Distribution::new(gens.clone())?;
            }
        }
        if !grew {
            break;
        }
    }
    let distribution = match &seed.base_point {
        Some(p) => Distribution::with_base_point(gens, p.clone())?,
        None => Distribution::new(gens)?,
    };
    Ok(SymClosure {
        distribution,
        rounds,
        products_added: added,
    })
}

fn check_base_distribution(conn: &Connection, d: &Distribution) -> Result<()> {
    if d.chart() != conn.chart() {
        return Err(Error::ChartMismatch("distribution chart differs from connection chart".into()));
    }
    if d.space() != Space::Base {
        return Err(Error::ChartMismatch("expected a base distribution".into()));
    }
    Ok(())
}
