use super::poly::Polynomial;
use crate::error::{Error, Result};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A rational function `num/den` in canonical form: the denominator is
/// nonzero with integer content one and a positive leading coefficient, and
/// a zero numerator forces the denominator to one.  Common polynomial
/// factors are *not* cancelled; semantic equality goes through
/// [`RationalExpr::equivalent`], which cross-multiplies.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalExpr {
    num: Polynomial,
    den: Polynomial,
}

impl RationalExpr {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RationalExpr {
                num,
                den: Polynomial::one(),
            });
        }
        let mut scale = den.content().recip();
        if den.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            scale = -scale;
        }
        Ok(RationalExpr {
            num: num.scale(&scale),
            den: den.scale(&scale),
        })
    }

    pub fn from_poly(num: Polynomial) -> Self {
        RationalExpr {
            num,
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        RationalExpr::from_poly(Polynomial::zero())
    }

    pub fn one() -> Self {
        RationalExpr::from_poly(Polynomial::one())
    }

    pub fn constant(c: BigRational) -> Self {
        RationalExpr::from_poly(Polynomial::constant(c))
    }

    pub fn from_int(c: i64) -> Self {
        RationalExpr::from_poly(Polynomial::from_int(c))
    }

    pub fn var(name: &str) -> Self {
        RationalExpr::from_poly(Polynomial::var(name))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        Some(self.num.as_constant()? / self.den.as_constant()?)
    }

    /// Semantic equality by cross multiplication: `a/b = c/d` iff
    /// `a*d - c*b = 0`.
    pub fn equivalent(&self, other: &RationalExpr) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        (&self.num * &other.den) == (&other.num * &self.den)
    }

    pub fn checked_add(&self, rhs: &RationalExpr) -> Result<Self> {
        if self.den == rhs.den {
            return RationalExpr::new(&self.num + &rhs.num, self.den.clone());
        }
        RationalExpr::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }

    pub fn checked_mul(&self, rhs: &RationalExpr) -> Result<Self> {
        RationalExpr::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }

    pub fn div(&self, rhs: &RationalExpr) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RationalExpr::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        RationalExpr::new(self.num.pow(e)?, self.den.pow(e)?)
    }

    /// Partial derivative.  Quotient rule, specialised to skip the
    /// denominator square when the expression is polynomial.
    pub fn differentiate(&self, var: &str) -> Self {
        if self.den.is_one() {
            return RationalExpr::from_poly(self.num.differentiate(var));
        }
        let dn = self.num.differentiate(var);
        let dd = self.den.differentiate(var);
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        let den = &self.den * &self.den;
        RationalExpr::new(num, den).expect("square of nonzero denominator is nonzero")
    }

    /// Substitute expressions for coordinates; unmapped coordinates pass
    /// through.  Errors when the substituted denominator collapses to zero.
    pub fn substitute(&self, map: &BTreeMap<String, RationalExpr>) -> Result<Self> {
        let num = substitute_poly(&self.num, map)?;
        let den = substitute_poly(&self.den, map)?;
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        num.div(&den)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Result<BigRational> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return Err(Error::Pole(self.to_string()));
        }
        Ok(self.num.eval(point)? / d)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.num.collect_vars(&mut out);
        self.den.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        self.num.collect_vars(out);
        self.den.collect_vars(out);
    }

    pub fn total_degree(&self) -> u32 {
        self.num.total_degree().max(self.den.total_degree())
    }

    pub fn term_count(&self) -> usize {
        self.num.term_count() + self.den.term_count()
    }
}

fn substitute_poly(p: &Polynomial, map: &BTreeMap<String, RationalExpr>) -> Result<RationalExpr> {
    let mut acc = RationalExpr::zero();
    for (m, c) in p.terms() {
        let mut term = RationalExpr::constant(c.clone());
        for (name, e) in m.exps() {
            let base = match map.get(name) {
                Some(expr) => expr.clone(),
                None => RationalExpr::var(name),
            };
            term = term.checked_mul(&base.pow(e)?)?;
        }
        acc = acc.checked_add(&term)?;
    }
    Ok(acc)
}

impl Add for &RationalExpr {
    type Output = RationalExpr;
    fn add(self, rhs: &RationalExpr) -> RationalExpr {
        self.checked_add(rhs).expect("exponent overflow in +")
    }
}

impl Sub for &RationalExpr {
    type Output = RationalExpr;
    fn sub(self, rhs: &RationalExpr) -> RationalExpr {
        self.checked_add(&-rhs).expect("exponent overflow in -")
    }
}

impl Mul for &RationalExpr {
    type Output = RationalExpr;
    fn mul(self, rhs: &RationalExpr) -> RationalExpr {
        self.checked_mul(rhs).expect("exponent overflow in *")
    }
}

impl Neg for &RationalExpr {
    type Output = RationalExpr;
    fn neg(self) -> RationalExpr {
        RationalExpr {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
