use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A power product of named coordinates.  Zero exponents are never stored,
/// so the empty map is the constant monomial 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: BTreeMap<String, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(name: &str) -> Self {
        let mut exps = BTreeMap::new();
        exps.insert(name.to_string(), 1);
        Monomial { exps }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// Total degree.  Errors on u32 overflow rather than wrapping.
    pub fn degree(&self) -> u32 {
        self.exps.values().fold(0u32, |acc, e| {
            acc.checked_add(*e).expect("monomial degree overflow")
        })
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        self.exps.get(var).copied().unwrap_or(0)
    }

    pub fn checked_mul(&self, other: &Monomial) -> Result<Monomial> {
        let mut exps = self.exps.clone();
        for (name, e) in &other.exps {
            let slot = exps.entry(name.clone()).or_insert(0);
            *slot = slot
                .checked_add(*e)
                .ok_or_else(|| Error::ExponentOverflow(format!("{self} * {other}")))?;
        }
        Ok(Monomial { exps })
    }

    /// Divide by `other`; `None` when some exponent would go negative.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = self.exps.clone();
        for (name, e) in &other.exps {
            let have = exps.get_mut(name)?;
            if *have < *e {
                return None;
            }
            *have -= e;
            if *have == 0 {
                exps.remove(name);
            }
        }
        Some(Monomial { exps })
    }

    pub fn exps(&self) -> impl Iterator<Item = (&str, u32)> {
        self.exps.iter().map(|(n, e)| (n.as_str(), *e))
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for name in self.exps.keys() {
            out.insert(name.clone());
        }
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: compare total degree first, then
    /// lexicographically with alphabetically earlier coordinates dominating.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let mut a = self.exps.iter().peekable();
            let mut b = other.exps.iter().peekable();
            loop {
                match (a.peek(), b.peek()) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some((na, ea)), Some((nb, eb))) => match na.cmp(nb) {
                        // a positive power of an earlier variable outranks
                        // its absence
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => match ea.cmp(eb) {
                            Ordering::Equal => {
                                a.next();
                                b.next();
                            }
                            ord => return ord,
                        },
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (name, e) in &self.exps {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Multivariate polynomial with exact rational coefficients.  The term map
/// never holds zero coefficients, so structural equality is semantic
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Polynomial { terms }
    }

    pub fn from_int(c: i64) -> Self {
        Polynomial::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(name), BigRational::one());
        Polynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Monomial::one())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Largest term in graded lex order; `None` for the zero polynomial.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(var))
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&Monomial::one()))
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.checked_mul(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Polynomial> {
        let mut out = Polynomial::one();
        for _ in 0..e {
            out = out.checked_mul(self)?;
        }
        Ok(out)
    }

    pub fn differentiate(&self, var: &str) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(var);
            if e == 0 {
                continue;
            }
            let lowered = m
                .try_div(&Monomial::var(var))
                .expect("positive exponent admits division");
            out.add_term(lowered, c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (name, e) in m.exps() {
                let v = point
                    .get(name)
                    .ok_or_else(|| Error::UnboundCoordinate(name.to_string()))?;
                let mut p = BigRational::one();
                for _ in 0..e {
                    p *= v;
                }
                term *= p;
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for m in self.terms.keys() {
            m.collect_vars(out);
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients.  Defined for nonzero polynomials.
    pub fn content(&self) -> BigRational {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(&c.numer().abs());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            return BigRational::one();
        }
        BigRational::new(num_gcd, den_lcm)
    }

    /// Exact polynomial division: `Some(q)` with `self = q * d` when the
    /// division leaves no remainder, `None` otherwise.  Standard leading-term
    /// algorithm; each step strictly lowers the leading monomial, so it
    /// terminates.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        if d.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quo = Polynomial::zero();
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().map(|(m, c)| (m.clone(), c.clone()))?;
            let m = rm.try_div(&dm)?;
            let c = rc / &dc;
            for (mb, cb) in &d.terms {
                let prod = m.checked_mul(mb).ok()?;
                rem.add_term(prod, -(&c * cb));
            }
            quo.add_term(m, c);
        }
        Some(quo)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("polynomial product overflow")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Polynomial {
    /// Terms in descending graded lex order; round-trips through the
    /// expression parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            if m.is_one() {
                write_rational(f, &mag)?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write_rational(f, &mag)?;
                write!(f, "*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Polynomial {
        let vars: Vec<String> = ["x1", "x2", "x3"].iter().map(|s| s.to_string()).collect();
        let e = crate::symexpr::parse_expr(src, &vars).unwrap();
        assert!(e.den().is_one(), "test helper expects a polynomial");
        e.num().clone()
    }

    #[test]
    fn graded_lex_ordering() {
        let x1 = Monomial::var("x1");
        let x2 = Monomial::var("x2");
        let x1x1 = x1.checked_mul(&x1).unwrap();
        let x1x2 = x1.checked_mul(&x2).unwrap();
        let x2x2 = x2.checked_mul(&x2).unwrap();
        // degree dominates
        assert!(x1x1 > x2);
        // within a degree, earlier variables dominate
        assert!(x1x1 > x1x2);
        assert!(x1x2 > x2x2);
        assert!(Monomial::one() < x2);
    }

    #[test]
    fn leading_term_is_graded_lex_max() {
        let q = p("x2^3 + x1*x2 + x1^2 + 7");
        let (m, _) = q.leading().unwrap();
        assert_eq!(m.to_string(), "x2^3");
    }

    #[test]
    fn arithmetic_cancels_to_zero() {
        let a = p("x1^2 - x2");
        let b = p("x2 - x1^2");
        assert!((&a + &b).is_zero());
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn division_is_exact_inverse_of_multiplication() {
        let a = p("x1^2*x2 - x3 + 1/2");
        let b = p("x1 - x2^2 + 3");
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        let with_rem = &prod + &Polynomial::one();
        assert!(with_rem.div_exact(&b).is_none());
    }

    #[test]
    fn derivative_of_known_polynomial() {
        let q = p("x1^3*x2 - 2*x1 + x2");
        assert_eq!(q.differentiate("x1"), p("3*x1^2*x2 - 2"));
        assert_eq!(q.differentiate("x2"), p("x1^3 + 1"));
        assert!(q.differentiate("x3").is_zero());
    }

    #[test]
    fn content_normalizes_integer_scale() {
        let q = p("4*x1 - 6*x2");
        assert_eq!(q.content(), BigRational::from_integer(BigInt::from(2)));
        let h = p("3/2*x1 + 9/4");
        assert_eq!(h.content(), BigRational::new(BigInt::from(3), BigInt::from(4)));
    }

    #[test]
    fn display_round_trips() {
        let cases = [
            "x1^2*x2 - 1/2*x3 + 5",
            "-x1 + x2",
            "0",
            "-3/4",
            "x1^2 - 2*x1*x2 + x2^2",
        ];
        for src in cases {
            let q = p(src);
            assert_eq!(p(&q.to_string()), q, "round trip of {src}");
        }
    }
}
