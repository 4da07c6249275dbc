use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use super::Rat;

/// Exponent vector of a monomial in `x1, x2, ...` with trailing zeros trimmed.
///
/// Ordered graded-lexicographically with the highest-index variable largest.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[u16; 6]>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(SmallVec::new())
    }

    pub fn from_exponents(exps: &[u16]) -> Monomial {
        let mut v: SmallVec<[u16; 6]> = exps.iter().copied().collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        Monomial(v)
    }

    pub fn var(i: usize) -> Monomial {
        let mut v = SmallVec::from_elem(0, i + 1);
        v[i] = 1;
        Monomial(v)
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of variable slots, i.e. one past the highest variable present.
    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.width().max(other.width());
        let v: SmallVec<[u16; 6]> = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Monomial(v)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.width() <= other.width() && (0..self.width()).all(|i| self.exp(i) <= other.exp(i))
    }

    /// `self / other`, assuming `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Monomial {
        let v: Vec<u16> = (0..self.width()).map(|i| self.exp(i) - other.exp(i)).collect();
        Monomial::from_exponents(&v)
    }

    pub(crate) fn with_exp(&self, i: usize, e: u16) -> Monomial {
        let mut v: Vec<u16> = self.0.to_vec();
        if v.len() <= i {
            v.resize(i + 1, 0);
        }
        v[i] = e;
        Monomial::from_exponents(&v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.width().max(other.width());
            for i in (0..n).rev() {
                match self.exp(i).cmp(&other.exp(i)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate().rev() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// Multivariate polynomial over the rationals; no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    /// The variable `x{i+1}`.
    pub fn var(i: usize) -> Poly {
        Poly::monomial(Monomial::var(i), Rat::one())
    }

    pub fn monomial(m: Monomial, c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, Rat)>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in iter {
            p.add_term(m, &c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().map(|(m, c)| m.is_one() && c.is_one()).unwrap()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// One past the highest variable index occurring.
    pub fn nvars(&self) -> usize {
        self.terms.keys().map(Monomial::width).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u16 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: &Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e += c;
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c);
        }
        r
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), &-c);
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = other.constant_value() {
            return self.scale(&c);
        }
        if let Some(c) = self.constant_value() {
            return other.scale(&c);
        }
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn partial(&self, i: usize) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e > 0 {
                r.add_term(m.with_exp(i, e - 1), &(c * &Rat::int(e as i64)));
            }
        }
        r
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    let xi = point.get(i).cloned().unwrap_or_else(Rat::zero);
                    t = &t * &xi.pow(e as u32);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Substitutes `x_i -> sum_j map[i][j] x_j` for every variable `i < map.len()`.
    pub fn substitute_linear(&self, map: &[Vec<Rat>]) -> Poly {
        let images: Vec<Poly> = map
            .iter()
            .map(|row| {
                Poly::from_terms(row.iter().enumerate().map(|(j, c)| (Monomial::var(j), c.clone())))
            })
            .collect();
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = images.get(i).cloned().unwrap_or_else(|| Poly::var(i));
                t = t.mul(&base.pow(e as u32));
            }
            r = r.add(&t);
        }
        r
    }

    /// Exact quotient `self / other`, or `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &Poly) -> Option<Poly> {
        if other.is_zero() {
            return None;
        }
        if let Some(c) = other.constant_value() {
            return Some(self.scale(&c.recip().ok()?));
        }
        let (lm_b, lc_b) = other.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((lm_r, lc_r)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !lm_b.divides(&lm_r) {
                return None;
            }
            let tm = lm_r.div(&lm_b);
            let tc = &lc_r / &lc_b;
            r = r.sub(&other.mul_monomial(&tm, &tc));
            q.add_term(tm, &tc);
        }
        Some(q)
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip().expect("nonzero leading coefficient")),
            None => Poly::zero(),
        }
    }

    /// Coefficient of `x_v^d`, as a polynomial free of `x_v`.
    fn coeff_in(&self, v: usize, d: u16) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            if m.exp(v) == d {
                r.add_term(m.with_exp(v, 0), c);
            }
        }
        r
    }

    fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v);
        (0..=deg).map(|d| self.coeff_in(v, d)).filter(|p| !p.is_zero()).collect()
    }

    /// Content with respect to `x_v`: gcd of the coefficients, made monic.
    fn content_in(&self, v: usize) -> Poly {
        let mut coeffs = self.coeffs_in(v);
        if coeffs.iter().any(Poly::is_constant) {
            return Poly::one();
        }
        coeffs.sort_by_key(Poly::len);
        let mut g = coeffs[0].monic();
        for c in &coeffs[1..] {
            if g.is_one() {
                break;
            }
            g = Poly::gcd(&g, c);
        }
        g
    }

    /// Largest monomial dividing every term, and the cofactor.
    fn split_monomial(&self) -> (Monomial, Poly) {
        let w = self.nvars();
        let mins: Vec<u16> = (0..w).map(|i| self.terms.keys().map(|m| m.exp(i)).min().unwrap_or(0)).collect();
        let m = Monomial::from_exponents(&mins);
        if m.is_one() {
            return (m, self.clone());
        }
        let rest = Poly { terms: self.terms.iter().map(|(k, c)| (k.div(&m), c.clone())).collect() };
        (m, rest)
    }

    fn pseudo_rem(a: &Poly, b: &Poly, v: usize) -> Poly {
        let db = b.degree_in(v);
        let lcb = b.coeff_in(v, db);
        let mut r = a.clone();
        let mut steps = a.degree_in(v) as i64 - db as i64 + 1;
        while !r.is_zero() && r.degree_in(v) >= db {
            let dr = r.degree_in(v);
            let lcr = r.coeff_in(v, dr);
            let shift = Monomial::var(v).with_exp(v, dr - db);
            r = r.mul(&lcb).sub(&lcr.mul(b).mul_monomial(&shift, &Rat::one()));
            steps -= 1;
        }
        if steps > 0 && !r.is_zero() {
            r = r.mul(&lcb.pow(steps as u32));
        }
        r
    }

    fn primitive_in(&self, v: usize) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides")
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Poly::one();
        }
        let (ma, a1) = a.split_monomial();
        let (mb, b1) = b.split_monomial();
        let w = ma.width().min(mb.width());
        let mins: Vec<u16> = (0..w).map(|i| ma.exp(i).min(mb.exp(i))).collect();
        let mg = Poly::monomial(Monomial::from_exponents(&mins), Rat::one());
        if a1.is_constant() || b1.is_constant() {
            return mg;
        }
        let g = super::heugcd::gcd(&a1, &b1).unwrap_or_else(|| Poly::gcd_primitive(&a1, &b1));
        mg.mul(&g)
    }

    fn univariate_image(&self, v: usize, point: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if i != v && e > 0 {
                    t = &t * &point[i].pow(e as u32);
                }
            }
            out[m.exp(v) as usize] += &t;
        }
        out
    }

    /// Upper bound for the degree in `x_v` of `gcd(a, b)`, from an evaluation of
    /// the other variables that keeps both leading coefficients nonzero.
    fn image_gcd_degree(a: &Poly, b: &Poly, v: usize) -> Option<usize> {
        let w = a.nvars().max(b.nvars());
        for attempt in 0..24i64 {
            let point: Vec<Rat> = (0..w as i64).map(|i| Rat::int((i * 7 + attempt * 11) % 31 + 2)).collect();
            let ia = a.univariate_image(v, &point);
            let ib = b.univariate_image(v, &point);
            if ia.last().is_none_or(Rat::is_zero) || ib.last().is_none_or(Rat::is_zero) {
                continue;
            }
            return Some(univariate_gcd_degree(ia, ib));
        }
        None
    }

    /// gcd of two non-constant polynomials without monomial content.
    fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
        let (am, bm) = (a.monic(), b.monic());
        if am == bm {
            return am;
        }
        let w = a.nvars().max(b.nvars());
        let mut best: Option<(u16, usize)> = None;
        for v in 0..w {
            let (da, db) = (a.degree_in(v), b.degree_in(v));
            if da > 0 && db == 0 {
                return Poly::gcd(&a.content_in(v), b);
            }
            if db > 0 && da == 0 {
                return Poly::gcd(a, &b.content_in(v));
            }
            if da > 0 && best.is_none_or(|(d, _)| da.max(db) <= d) {
                best = Some((da.max(db), v));
            }
        }
        let mut v = best.expect("common variable").1;
        // Degree of the gcd in x_u is bounded by that of a univariate image
        // taken where neither leading coefficient vanishes.
        let mut best_bound: Option<(usize, usize)> = None;
        for u in (0..w).filter(|&u| a.degree_in(u) > 0) {
            let bound = match Poly::image_gcd_degree(a, b, u) {
                Some(d) => d,
                None => continue,
            };
            if bound == 0 {
                return Poly::gcd(&a.content_in(u), &b.content_in(u));
            }
            if best_bound.is_none_or(|(d, _)| bound <= d) {
                best_bound = Some((bound, u));
            }
        }
        let mut bound_v = None;
        if let Some((d, u)) = best_bound {
            v = u;
            bound_v = Some(d);
        }
        let (ca, cb) = (a.content_in(v), b.content_in(v));
        let gc = Poly::gcd(&ca, &cb);
        let mut p = a.div_exact(&ca).expect("content divides");
        let mut q = b.div_exact(&cb).expect("content divides");
        if p.degree_in(v) < q.degree_in(v) {
            std::mem::swap(&mut p, &mut q);
        }
        // the bound is attained when the smaller input already divides the larger
        if bound_v == Some(q.degree_in(v) as usize) && p.div_exact(&q).is_some() {
            return gc.mul(&q).monic();
        }
        let gp = Poly::subresultant_gcd(p, q, v);
        gc.mul(&gp).monic()
    }

    /// Primitive gcd (in `x_v`) of two polynomials primitive in `x_v`, via the subresultant PRS.
    fn subresultant_gcd(mut p: Poly, mut q: Poly, v: usize) -> Poly {
        let mut g = Poly::one();
        let mut h = Poly::one();
        loop {
            let d = p.degree_in(v) - q.degree_in(v);
            let r = Poly::pseudo_rem(&p, &q, v);
            if r.is_zero() {
                return q.primitive_in(v).monic();
            }
            if r.degree_in(v) == 0 {
                return Poly::one();
            }
            let div = g.mul(&h.pow(d as u32));
            p = q;
            q = r.div_exact(&div).expect("subresultant division is exact");
            g = p.coeff_in(v, p.degree_in(v));
            h = if d == 0 {
                h
            } else {
                g.pow(d as u32).div_exact(&h.pow(d as u32 - 1)).expect("subresultant division is exact")
            };
        }
    }

    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: Option<&[String]>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{}", a)?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", a)?;
                }
                match names {
                    None => write!(f, "{}", m)?,
                    Some(ns) => {
                        let mut firstv = true;
                        for (i, &e) in m.exponents().iter().enumerate().rev() {
                            if e == 0 {
                                continue;
                            }
                            if !firstv {
                                write!(f, "*")?;
                            }
                            firstv = false;
                            let nm = ns.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
                            if e == 1 {
                                write!(f, "{nm}")?;
                            } else {
                                write!(f, "{nm}^{e}")?;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn trim_zeros(v: &mut Vec<Rat>) {
    while v.last().is_some_and(Rat::is_zero) {
        v.pop();
    }
}

fn univariate_gcd_degree(mut a: Vec<Rat>, mut b: Vec<Rat>) -> usize {
    trim_zeros(&mut a);
    trim_zeros(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let lb = b.last().unwrap().recip().expect("trimmed");
        while a.len() >= b.len() {
            let f = &a[a.len() - 1] * &lb;
            let off = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                let t = &f * c;
                a[off + i] -= &t;
            }
            a.pop();
            trim_zeros(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, None)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(i)
    }

    fn c(v: i64) -> Poly {
        Poly::constant(Rat::int(v))
    }

    #[test]
    fn grlex_order_prefers_high_variables() {
        let a = Monomial::from_exponents(&[0, 0, 1]);
        let b = Monomial::from_exponents(&[1, 0, 0]);
        let c2 = Monomial::from_exponents(&[2]);
        assert!(a > b);
        assert!(c2 > a);
        assert_eq!(x(0).add(&x(2)).leading().unwrap().0, &a);
    }

    #[test]
    fn gcd_of_products() {
        let f = x(0).add(&x(1));
        let g = x(2).sub(&c(1));
        let h = x(0).mul(&x(2)).add(&c(3));
        let a = f.mul(&g).mul(&h);
        let b = f.mul(&h).mul(&x(1));
        let expect = f.mul(&h).monic();
        assert_eq!(Poly::gcd(&a, &b), expect);
        assert_eq!(Poly::gcd(&g, &x(1)), Poly::one());
    }

    #[test]
    fn exact_division() {
        let f = x(0).add(&x(1));
        let g = x(2).pow(2).sub(&c(2));
        let p = f.mul(&g);
        assert_eq!(p.div_exact(&f), Some(g.clone()));
        assert_eq!(p.div_exact(&x(0)), None);
    }

    #[test]
    fn linear_substitution_and_derivative() {
        // x3 -> x1 + x2 + x3 applied to x3^2
        let map = vec![
            vec![Rat::one()],
            vec![Rat::zero(), Rat::one()],
            vec![Rat::one(), Rat::one(), Rat::one()],
        ];
        let p = x(2).pow(2).substitute_linear(&map);
        let s = x(0).add(&x(1)).add(&x(2));
        assert_eq!(p, s.pow(2));
        assert_eq!(x(2).pow(2).partial(2), x(2).scale(&Rat::int(2)));
        assert_eq!(x(2).partial(0), Poly::zero());
    }

    fn small_poly() -> impl proptest::strategy::Strategy<Value = Poly> {
        use proptest::prelude::*;
        proptest::collection::vec(((0u16..3, 0u16..3, 0u16..2), -4i64..5), 1..4).prop_map(|ts| {
            Poly::from_terms(ts.into_iter().map(|((a, b, e), k)| (Monomial::from_exponents(&[a, b, e]), Rat::int(k))))
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn heuristic_and_subresultant_gcd_agree(f in small_poly(), g in small_poly(), h in small_poly()) {
            let (a, b) = (f.mul(&h), g.mul(&h));
            let fast = Poly::gcd(&a, &b);
            if !h.is_zero() {
                proptest::prop_assert!(a.is_zero() || a.div_exact(&fast).is_some());
                proptest::prop_assert!(fast.div_exact(&h.monic()).is_some());
            }
            let (ma, a1) = a.split_monomial();
            let (mb, b1) = b.split_monomial();
            if !a1.is_constant() && !b1.is_constant() && !a.is_zero() && !b.is_zero() {
                let w = ma.width().min(mb.width());
                let mins: Vec<u16> = (0..w).map(|i| ma.exp(i).min(mb.exp(i))).collect();
                let slow = Poly::monomial(Monomial::from_exponents(&mins), Rat::one()).mul(&Poly::gcd_primitive(&a1, &b1));
                proptest::prop_assert_eq!(fast, slow.monic());
            }
        }
    }
}
