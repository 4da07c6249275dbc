use std::fmt;

use super::{Poly, Rat};
use crate::error::{Error, Result};

/// Element of the rational function field Q(x1, ..., xn).
///
/// Stored in lowest terms with a monic denominator. Constants use a separate
/// variant so that constant-coefficient operators never touch polynomial gcds.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum RatFunc {
    Const(Rat),
    Frac(Poly, Poly),
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn zero() -> RatFunc {
        RatFunc::Const(Rat::zero())
    }

    pub fn one() -> RatFunc {
        RatFunc::Const(Rat::one())
    }

    pub fn int(v: i64) -> RatFunc {
        RatFunc::Const(Rat::int(v))
    }

    pub fn var(i: usize) -> RatFunc {
        RatFunc::Frac(Poly::var(i), Poly::one())
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        match p.constant_value() {
            Some(c) => RatFunc::Const(c),
            None => RatFunc::Frac(p, Poly::one()),
        }
    }

    /// Builds `num / den` in canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> RatFunc {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(d) = den.constant_value() {
            return RatFunc::from_poly(num.scale(&d.recip().expect("nonzero")));
        }
        let g = Poly::gcd(&num, &den);
        let (n, d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        let lc = d.leading().map(|(_, c)| c.clone()).expect("nonzero");
        let inv = lc.recip().expect("nonzero");
        let (n, d) = (n.scale(&inv), d.scale(&inv));
        if d.is_one() {
            RatFunc::from_poly(n)
        } else {
            RatFunc::Frac(n, d)
        }
    }

    /// Re-canonicalizes; idempotent on values built through the public API.
    pub fn canonical(&self) -> RatFunc {
        let (n, d) = self.parts();
        Self::normalize(n, d)
    }

    pub fn parts(&self) -> (Poly, Poly) {
        match self {
            RatFunc::Const(c) => (Poly::constant(c.clone()), Poly::one()),
            RatFunc::Frac(n, d) => (n.clone(), d.clone()),
        }
    }

    pub fn numer(&self) -> Poly {
        self.parts().0
    }

    pub fn denom(&self) -> Poly {
        self.parts().1
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RatFunc::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, RatFunc::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&Rat> {
        match self {
            RatFunc::Const(c) => Some(c),
            RatFunc::Frac(..) => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, RatFunc::Const(_))
    }

    /// Polynomial value when the denominator is one.
    pub fn as_poly(&self) -> Option<Poly> {
        match self {
            RatFunc::Const(c) => Some(Poly::constant(c.clone())),
            RatFunc::Frac(n, d) if d.is_one() => Some(n.clone()),
            RatFunc::Frac(..) => None,
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        match (self, other) {
            (RatFunc::Const(a), RatFunc::Const(b)) => RatFunc::Const(a + b),
            (RatFunc::Const(a), x) | (x, RatFunc::Const(a)) if a.is_zero() => x.clone(),
            _ => {
                let (an, ad) = self.parts();
                let (bn, bd) = other.parts();
                if ad == bd {
                    Self::normalize(an.add(&bn), ad)
                } else {
                    Self::normalize(an.mul(&bd).add(&bn.mul(&ad)), ad.mul(&bd))
                }
            }
        }
    }

    pub fn neg(&self) -> RatFunc {
        match self {
            RatFunc::Const(c) => RatFunc::Const(-c),
            RatFunc::Frac(n, d) => RatFunc::Frac(n.neg(), d.clone()),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        match self {
            _ if c.is_zero() => RatFunc::zero(),
            RatFunc::Const(a) => RatFunc::Const(a * c),
            RatFunc::Frac(n, d) => RatFunc::Frac(n.scale(c), d.clone()),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        match (self, other) {
            (RatFunc::Const(a), x) | (x, RatFunc::Const(a)) => x.scale(a),
            (RatFunc::Frac(an, ad), RatFunc::Frac(bn, bd)) => {
                if ad.is_one() && bd.is_one() {
                    RatFunc::from_poly(an.mul(bn))
                } else {
                    Self::normalize(an.mul(bn), ad.mul(bd))
                }
            }
        }
    }

    pub fn inv(&self) -> Result<RatFunc> {
        match self {
            RatFunc::Const(c) => Ok(RatFunc::Const(c.recip()?)),
            RatFunc::Frac(n, d) => Ok(Self::normalize(d.clone(), n.clone())),
        }
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        (0..e).fold(RatFunc::one(), |acc, _| acc.mul(self))
    }

    /// Partial derivative with respect to `x{i+1}`.
    pub fn partial(&self, i: usize) -> RatFunc {
        match self {
            RatFunc::Const(_) => RatFunc::zero(),
            RatFunc::Frac(n, d) if d.is_one() => RatFunc::from_poly(n.partial(i)),
            RatFunc::Frac(n, d) => {
                let num = n.partial(i).mul(d).sub(&n.mul(&d.partial(i)));
                Self::normalize(num, d.mul(d))
            }
        }
    }

    pub fn partial_multi(&self, mu: &[u16]) -> RatFunc {
        let mut r = self.clone();
        for (i, &e) in mu.iter().enumerate() {
            for _ in 0..e {
                if r.is_const() {
                    return RatFunc::zero();
                }
                r = r.partial(i);
            }
        }
        r
    }

    /// Substitutes `x_i -> sum_j map[i][j] x_j`.
    pub fn substitute_linear(&self, map: &[Vec<Rat>]) -> RatFunc {
        match self {
            RatFunc::Const(_) => self.clone(),
            RatFunc::Frac(n, d) => Self::normalize(n.substitute_linear(map), d.substitute_linear(map)),
        }
    }

    /// Evaluates at a rational point; `Err` if the denominator vanishes there.
    pub fn eval(&self, point: &[Rat]) -> Result<Rat> {
        match self {
            RatFunc::Const(c) => Ok(c.clone()),
            RatFunc::Frac(n, d) => n.eval(point).checked_div(&d.eval(point)),
        }
    }

    pub fn nvars(&self) -> usize {
        match self {
            RatFunc::Const(_) => 0,
            RatFunc::Frac(n, d) => n.nvars().max(d.nvars()),
        }
    }

    /// Whether a printed form needs parentheses when used as a factor.
    pub fn is_compound(&self) -> bool {
        match self {
            RatFunc::Const(c) => !c.is_integer(),
            RatFunc::Frac(n, d) => n.len() > 1 || !d.is_one(),
        }
    }

    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: Option<&[String]>) -> fmt::Result {
        match self {
            RatFunc::Const(c) => write!(f, "{c}"),
            RatFunc::Frac(n, d) => {
                if d.is_one() {
                    return n.fmt_with(f, names);
                }
                let single = |p: &Poly| p.len() == 1 && p.terms().next().map(|(_, c)| c.is_one()).unwrap_or(false);
                if single(n) {
                    n.fmt_with(f, names)?;
                } else {
                    write!(f, "(")?;
                    n.fmt_with(f, names)?;
                    write!(f, ")")?;
                }
                write!(f, "/")?;
                if single(d) {
                    d.fmt_with(f, names)
                } else {
                    write!(f, "(")?;
                    d.fmt_with(f, names)?;
                    write!(f, ")")
                }
            }
        }
    }
}

impl From<Rat> for RatFunc {
    fn from(c: Rat) -> RatFunc {
        RatFunc::Const(c)
    }
}

impl From<i64> for RatFunc {
    fn from(v: i64) -> RatFunc {
        RatFunc::int(v)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, None)
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x(i: usize) -> RatFunc {
        RatFunc::var(i)
    }

    #[test]
    fn canonical_examples() {
        let half = RatFunc::Const(Rat::new(1, 2).unwrap());
        let third = RatFunc::Const(Rat::new(1, 3).unwrap());
        assert_eq!(half.add(&third), RatFunc::Const(Rat::new(5, 6).unwrap()));
        let sq = x(2).mul(&x(2));
        assert_eq!(sq.numer(), Poly::var(2).pow(2));
        let s = x(0).add(&x(1));
        assert_eq!(s.div(&s).unwrap(), RatFunc::one());
        assert!(matches!(s.div(&RatFunc::zero()), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(x(2).partial(2), RatFunc::one());
        assert_eq!(x(2).partial(0), RatFunc::zero());
        let f = x(1).mul(&x(2)).div(&x(0)).unwrap();
        assert_eq!(f.partial(1), x(2).div(&x(0)).unwrap());
    }

    #[test]
    fn denominator_is_monic() {
        let f = RatFunc::new(Poly::one(), Poly::var(0).scale(&Rat::int(-3))).unwrap();
        assert_eq!(f.denom(), Poly::var(0));
        assert_eq!(f.numer(), Poly::constant(Rat::new(-1, 3).unwrap()));
    }

    fn small_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec(((0u16..3, 0u16..3, 0u16..2), -3i64..4), 0..4).prop_map(|ts| {
            Poly::from_terms(ts.into_iter().map(|((a, b, c), k)| {
                (super::super::Monomial::from_exponents(&[a, b, c]), Rat::int(k))
            }))
        })
    }

    fn ratfunc() -> impl Strategy<Value = RatFunc> {
        (small_poly(), small_poly()).prop_map(|(n, d)| {
            let d = if d.is_zero() { Poly::one() } else { d };
            RatFunc::new(n, d).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn field_axioms(a in ratfunc(), b in ratfunc(), c in ratfunc()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            if !a.is_zero() {
                prop_assert_eq!(a.mul(&a.inv().unwrap()), RatFunc::one());
            }
        }

        #[test]
        fn derivations_commute(a in ratfunc(), i in 0usize..3, j in 0usize..3) {
            prop_assert_eq!(a.partial(i).partial(j), a.partial(j).partial(i));
        }

        #[test]
        fn normalization_is_idempotent(a in ratfunc()) {
            prop_assert_eq!(a.canonical(), a.clone());
            prop_assert_eq!(a.canonical().canonical(), a.canonical());
        }
    }
}
