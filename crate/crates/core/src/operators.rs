//! Linear differential operators with rational-function coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::algebra::{Monomial, Poly, Rat, RatFunc};
use crate::coords::CoordinateChange;
use crate::error::{Error, Result};
use crate::linalg;

/// Multi-index `mu` of a derivative `d_mu`, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(SmallVec<[u8; 8]>);

impl MultiIndex {
    pub fn zero() -> MultiIndex {
        MultiIndex(SmallVec::new())
    }

    pub fn from_slice(exps: &[u8]) -> MultiIndex {
        let mut v: SmallVec<[u8; 8]> = exps.iter().copied().collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        MultiIndex(v)
    }

    /// `1_i`, the index of `d_i` (0-based `i`).
    pub fn unit(i: usize) -> MultiIndex {
        let mut v = SmallVec::from_elem(0, i + 1);
        v[i] = 1;
        MultiIndex(v)
    }

    /// Parses a digit string such as `"112"` meaning `d1 d1 d2`.
    pub fn from_digits(digits: &str) -> Option<MultiIndex> {
        let mut v = [0u8; 9];
        for ch in digits.chars() {
            let d = ch.to_digit(10)?;
            if d == 0 {
                return None;
            }
            v[d as usize - 1] += 1;
        }
        Some(MultiIndex::from_slice(&v))
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// Smallest (0-based) `i` with `mu_i != 0`.
    pub fn class(&self) -> Option<usize> {
        self.0.iter().position(|&e| e != 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let w = self.width().max(other.width());
        MultiIndex((0..w).map(|i| self.get(i) + other.get(i)).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if other.width() > self.width() {
            return None;
        }
        let mut v = SmallVec::<[u8; 8]>::new();
        for i in 0..self.width() {
            v.push(self.get(i).checked_sub(other.get(i))?);
        }
        Some(MultiIndex::from_slice(&v))
    }

    pub fn plus_unit(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        if v.len() <= i {
            v.resize(i + 1, 0);
        }
        v[i] += 1;
        MultiIndex(v)
    }

    pub fn minus_unit(&self, i: usize) -> Option<MultiIndex> {
        if self.get(i) == 0 {
            return None;
        }
        let mut v = self.0.to_vec();
        v[i] -= 1;
        Some(MultiIndex::from_slice(&v))
    }

    /// All `lambda <= mu` componentwise.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero()];
        for i in 0..self.width() {
            let mut next = Vec::with_capacity(out.len() * (self.get(i) as usize + 1));
            for base in &out {
                for e in 0..=self.get(i) {
                    let mut v = base.0.clone();
                    v.resize(i + 1, 0);
                    v[i] = e;
                    next.push(MultiIndex::from_slice(&v));
                }
            }
            out = next;
        }
        out
    }

    /// Product of binomials `C(mu_i, lambda_i)`.
    pub fn binom(&self, lambda: &MultiIndex) -> Rat {
        let mut acc = Rat::one();
        for i in 0..self.width() {
            acc = &acc * &Rat::binomial(self.get(i) as u64, lambda.get(i) as u64);
        }
        acc
    }

    /// All indices of exact order `q` in `n` variables, highest priority first.
    pub fn all_of_order(n: usize, q: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if i + 1 == n {
                cur[i] = left as u8;
                out.push(MultiIndex::from_slice(cur));
                return;
            }
            for e in 0..=left {
                cur[i] = e as u8;
                rec(n, i + 1, left - e, cur, out);
            }
        }
        if n == 0 {
            return if q == 0 { vec![MultiIndex::zero()] } else { vec![] };
        }
        let mut out = Vec::new();
        rec(n, 0, q, &mut vec![0; n], &mut out);
        out.sort_by(|a, b| b.cmp(a));
        out
    }

    /// The commutative monomial `chi^mu`, with `chi_i` placed at variable `offset + i`.
    pub fn to_monomial(&self, offset: usize) -> Monomial {
        let mut e = vec![0u16; offset + self.width()];
        for i in 0..self.width() {
            e[offset + i] = self.get(i) as u16;
        }
        Monomial::from_exponents(&e)
    }

    pub fn digits(&self) -> String {
        let mut s = String::new();
        for i in 0..self.width() {
            for _ in 0..self.get(i) {
                s.push(char::from_digit(i as u32 + 1, 10).unwrap_or('?'));
            }
        }
        s
    }
}

impl Ord for MultiIndex {
    /// Priority order: higher order, then higher class, then larger `mu_n`, `mu_{n-1}`, ...
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.class().cmp(&other.class()))
            .then_with(|| {
                let w = self.width().max(other.width());
                for i in (0..w).rev() {
                    match self.get(i).cmp(&other.get(i)) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order() == 0 {
            write!(f, "1")
        } else {
            write!(f, "d{}", self.digits())
        }
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Applies `d_lambda` to a coefficient.
pub fn derive(f: &RatFunc, lambda: &MultiIndex) -> RatFunc {
    let mut r = f.clone();
    for i in 0..lambda.width() {
        for _ in 0..lambda.get(i) {
            if r.is_const() {
                return RatFunc::zero();
            }
            r = r.partial(i);
        }
    }
    r
}

/// Scalar operator `sum a^mu d_mu` with every `d` to the right of its coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffOp {
    terms: BTreeMap<MultiIndex, RatFunc>,
}

impl DiffOp {
    pub fn zero() -> DiffOp {
        DiffOp::default()
    }

    pub fn one() -> DiffOp {
        DiffOp::coeff(RatFunc::one())
    }

    pub fn coeff(a: RatFunc) -> DiffOp {
        DiffOp::term(MultiIndex::zero(), a)
    }

    pub fn d(i: usize) -> DiffOp {
        DiffOp::term(MultiIndex::unit(i), RatFunc::one())
    }

    pub fn dmu(mu: MultiIndex) -> DiffOp {
        DiffOp::term(mu, RatFunc::one())
    }

    pub fn term(mu: MultiIndex, a: RatFunc) -> DiffOp {
        let mut terms = BTreeMap::new();
        if !a.is_zero() {
            terms.insert(mu, a);
        }
        DiffOp { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (MultiIndex, RatFunc)>) -> DiffOp {
        let mut op = DiffOp::zero();
        for (mu, a) in iter {
            op.add_term(mu, &a);
        }
        op
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &RatFunc)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mu: &MultiIndex) -> RatFunc {
        self.terms.get(mu).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.terms.keys().next_back().map_or(0, MultiIndex::order)
    }

    pub fn leading(&self) -> Option<(&MultiIndex, &RatFunc)> {
        self.terms.iter().next_back()
    }

    pub fn is_constant_coeff(&self) -> bool {
        self.terms.values().all(RatFunc::is_const)
    }

    /// One past the highest variable index appearing in derivatives or coefficients.
    pub fn nvars(&self) -> usize {
        self.terms.iter().map(|(m, a)| m.width().max(a.nvars())).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, mu: MultiIndex, a: &RatFunc) {
        if a.is_zero() {
            return;
        }
        match self.terms.get_mut(&mu) {
            Some(c) => {
                *c = c.add(a);
                if c.is_zero() {
                    self.terms.remove(&mu);
                }
            }
            None => {
                self.terms.insert(mu, a.clone());
            }
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut r = self.clone();
        for (mu, a) in &other.terms {
            r.add_term(mu.clone(), a);
        }
        r
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffOp {
        DiffOp { terms: self.terms.iter().map(|(m, a)| (m.clone(), a.neg())).collect() }
    }

    /// Left multiplication by a coefficient, `a o P`.
    pub fn scale(&self, a: &RatFunc) -> DiffOp {
        if a.is_zero() {
            return DiffOp::zero();
        }
        DiffOp { terms: self.terms.iter().map(|(m, c)| (m.clone(), a.mul(c))).collect() }
    }

    pub fn scale_rat(&self, c: &Rat) -> DiffOp {
        self.scale(&RatFunc::Const(c.clone()))
    }

    /// Normal form of `self o other`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero();
        for (mu, a) in &self.terms {
            let subs = mu.sub_indices();
            for (nu, b) in &other.terms {
                if b.is_const() {
                    out.add_term(mu.add(nu), &a.mul(b));
                    continue;
                }
                for lambda in &subs {
                    let db = derive(b, lambda);
                    if db.is_zero() {
                        continue;
                    }
                    let rest = mu.checked_sub(lambda).expect("sub-index");
                    let c = a.mul(&db).scale(&mu.binom(lambda));
                    out.add_term(rest.add(nu), &c);
                }
            }
        }
        out
    }

    /// `sum a^mu d_mu f`.
    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero();
        for (mu, a) in &self.terms {
            let df = derive(f, mu);
            if !df.is_zero() {
                acc = acc.add(&a.mul(&df));
            }
        }
        acc
    }

    /// Formal adjoint `sum (-1)^|mu| d_mu o a^mu`.
    pub fn adjoint(&self) -> DiffOp {
        let mut out = DiffOp::zero();
        for (mu, a) in &self.terms {
            let sign = if mu.order() % 2 == 0 { Rat::one() } else { Rat::int(-1) };
            for lambda in mu.sub_indices() {
                let da = derive(a, &lambda);
                if da.is_zero() {
                    continue;
                }
                let rest = mu.checked_sub(&lambda).expect("sub-index");
                out.add_term(rest, &da.scale(&(&sign * &mu.binom(&lambda))));
            }
        }
        out
    }

    /// Terms of exact order `q`.
    pub fn homogeneous_part(&self, q: usize) -> DiffOp {
        DiffOp { terms: self.terms.iter().filter(|(m, _)| m.order() == q).map(|(m, a)| (m.clone(), a.clone())).collect() }
    }

    pub fn is_homogeneous(&self) -> bool {
        let q = self.order();
        self.terms.keys().all(|m| m.order() == q)
    }

    /// Rewrites the operator in the coordinates `xbar = A x`.
    pub fn change_coordinates(&self, t: &CoordinateChange) -> DiffOp {
        self.transform(t, true)
    }

    /// Transforms only the derivatives, leaving coefficients as they are. Ranks of
    /// top-order parts are unaffected by the coefficient substitution.
    pub fn change_derivatives(&self, t: &CoordinateChange) -> DiffOp {
        self.transform(t, false)
    }

    fn transform(&self, t: &CoordinateChange, substitute: bool) -> DiffOp {
        let n = t.n();
        let a = t.matrix();
        // old d_i = sum_j A[j][i] dbar_j, expanded commutatively since A is constant
        let lin: Vec<Poly> = (0..n)
            .map(|i| Poly::from_terms((0..n).map(|j| (Monomial::var(j), a[j][i].clone()))))
            .collect();
        let inv_map = t.inverse_matrix().to_vec();
        let mut cache: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
        let mut out = DiffOp::zero();
        for (mu, c) in &self.terms {
            let image = cache
                .entry(mu.clone())
                .or_insert_with(|| {
                    let mut p = Poly::one();
                    for (i, l) in lin.iter().enumerate() {
                        p = p.mul(&l.pow(mu.get(i) as u32));
                    }
                    p
                })
                .clone();
            let cbar = if substitute { c.substitute_linear(&inv_map) } else { c.clone() };
            for (m, k) in image.terms() {
                let e: Vec<u8> = m.exponents().iter().map(|&x| x as u8).collect();
                out.add_term(MultiIndex::from_slice(&e), &cbar.scale(k));
            }
        }
        out
    }

    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: Option<&[String]>, target: Option<&str>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mu, a) in self.terms.iter().rev() {
            let (neg, mag) = match a {
                RatFunc::Const(c) => (c.is_negative(), RatFunc::Const(c.abs())),
                RatFunc::Frac(n, _) if n.len() == 1 && n.leading().is_some_and(|(_, c)| c.is_negative()) => {
                    (true, a.neg())
                }
                _ => (false, a.clone()),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let atom = match target {
                Some(u) if mu.order() == 0 => u.to_string(),
                Some(u) => format!("d{}({u})", mu.digits()),
                None => mu.to_string(),
            };
            let bare = target.is_none() && mu.order() == 0;
            if mag.is_one() {
                write!(f, "{atom}")?;
            } else {
                if mag.is_compound() {
                    write!(f, "(")?;
                    mag.fmt_with(f, names)?;
                    write!(f, ")")?;
                } else {
                    mag.fmt_with(f, names)?;
                }
                if !bare {
                    write!(f, "*{atom}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, None, None)
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A `p x m` matrix of scalar operators acting on `m` unknowns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OpMatrix {
    n: usize,
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), DiffOp>,
    source_labels: Vec<String>,
    target_labels: Vec<String>,
    source_weights: Option<Vec<Rat>>,
    target_weights: Option<Vec<Rat>>,
}

fn default_labels(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

impl OpMatrix {
    /// Zero matrix with default labels `u1..um` (unknowns) and `e1..ep` (equations).
    pub fn zeros(n: usize, rows: usize, cols: usize) -> OpMatrix {
        OpMatrix {
            n,
            rows,
            cols,
            entries: BTreeMap::new(),
            source_labels: default_labels("u", cols),
            target_labels: default_labels("e", rows),
            source_weights: None,
            target_weights: None,
        }
    }

    pub fn identity(n: usize, m: usize) -> OpMatrix {
        let mut a = OpMatrix::zeros(n, m, m);
        for i in 0..m {
            a.set(i, i, DiffOp::one());
        }
        a
    }

    pub fn from_rows(n: usize, cols: usize, rows: Vec<Vec<DiffOp>>) -> OpMatrix {
        let mut a = OpMatrix::zeros(n, rows.len(), cols);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, op) in row.into_iter().enumerate() {
                a.set(i, j, op);
            }
        }
        a
    }

    pub fn with_labels(mut self, sources: Vec<String>, targets: Vec<String>) -> Result<OpMatrix> {
        if sources.len() != self.cols || targets.len() != self.rows {
            return Err(Error::Shape("label count does not match matrix shape".into()));
        }
        self.source_labels = sources;
        self.target_labels = targets;
        Ok(self)
    }

    pub fn with_source_labels(mut self, sources: Vec<String>) -> OpMatrix {
        assert_eq!(sources.len(), self.cols);
        self.source_labels = sources;
        self
    }

    pub fn with_target_labels(mut self, targets: Vec<String>) -> OpMatrix {
        assert_eq!(targets.len(), self.rows);
        self.target_labels = targets;
        self
    }

    /// Attaches diagonal pairing weights used by [`OpMatrix::adjoint`].
    pub fn with_weights(mut self, source: Option<Vec<Rat>>, target: Option<Vec<Rat>>) -> OpMatrix {
        if let Some(w) = &source {
            assert_eq!(w.len(), self.cols);
        }
        if let Some(w) = &target {
            assert_eq!(w.len(), self.rows);
        }
        self.source_weights = source;
        self.target_weights = target;
        self
    }

    pub fn source_weights(&self) -> Option<&[Rat]> {
        self.source_weights.as_deref()
    }

    pub fn target_weights(&self) -> Option<&[Rat]> {
        self.target_weights.as_deref()
    }

    /// Drops labels and weights, keeping the entries.
    pub fn plain(&self) -> OpMatrix {
        let mut r = OpMatrix::zeros(self.n, self.rows, self.cols);
        r.entries = self.entries.clone();
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn source_labels(&self) -> &[String] {
        &self.source_labels
    }

    pub fn target_labels(&self) -> &[String] {
        &self.target_labels
    }

    pub fn set(&mut self, i: usize, j: usize, op: DiffOp) {
        assert!(i < self.rows && j < self.cols, "entry out of range");
        if op.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), op);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&DiffOp> {
        self.entries.get(&(i, j))
    }

    pub fn entry(&self, i: usize, j: usize) -> DiffOp {
        self.get(i, j).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &DiffOp)> {
        self.entries.iter()
    }

    pub fn row(&self, i: usize) -> Vec<DiffOp> {
        (0..self.cols).map(|j| self.entry(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn order(&self) -> usize {
        self.entries.values().map(DiffOp::order).max().unwrap_or(0)
    }

    pub fn row_order(&self, i: usize) -> usize {
        (0..self.cols).filter_map(|j| self.get(i, j)).map(DiffOp::order).max().unwrap_or(0)
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        (0..self.cols).all(|j| self.get(i, j).is_none())
    }

    pub fn is_constant_coeff(&self) -> bool {
        self.entries.values().all(DiffOp::is_constant_coeff)
    }

    /// Whether every row is homogeneous (all terms of each row share one order).
    pub fn rows_homogeneous(&self) -> bool {
        (0..self.rows).all(|i| {
            let q = self.row_order(i);
            (0..self.cols).filter_map(|j| self.get(i, j)).all(|op| op.terms().all(|(m, _)| m.order() == q))
        })
    }

    /// Same shape and entries, ignoring labels.
    pub fn entries_eq(&self, other: &OpMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }

    pub fn neg(&self) -> OpMatrix {
        let mut r = self.clone();
        for v in r.entries.values_mut() {
            *v = v.neg();
        }
        r
    }

    pub fn add(&self, other: &OpMatrix) -> Result<OpMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut r = self.clone();
        r.n = self.n.max(other.n);
        for (&(i, j), op) in &other.entries {
            let s = r.entry(i, j).add(op);
            r.set(i, j, s);
        }
        Ok(r)
    }

    /// `self * other`, composing entries.
    pub fn matmul(&self, other: &OpMatrix) -> Result<OpMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut by_row: BTreeMap<usize, Vec<(usize, &DiffOp)>> = BTreeMap::new();
        for (&(k, j), op) in &other.entries {
            by_row.entry(k).or_default().push((j, op));
        }
        let mut out = OpMatrix::zeros(self.n.max(other.n), self.rows, other.cols);
        out.source_labels = other.source_labels.clone();
        out.target_labels = self.target_labels.clone();
        out.source_weights = other.source_weights.clone();
        out.target_weights = self.target_weights.clone();
        let mut acc: BTreeMap<(usize, usize), DiffOp> = BTreeMap::new();
        for (&(i, k), a) in &self.entries {
            if let Some(list) = by_row.get(&k) {
                for &(j, b) in list {
                    let c = a.compose(b);
                    let e = acc.entry((i, j)).or_default();
                    *e = e.add(&c);
                }
            }
        }
        for ((i, j), op) in acc {
            out.set(i, j, op);
        }
        Ok(out)
    }

    pub fn apply(&self, f: &[RatFunc]) -> Result<Vec<RatFunc>> {
        if f.len() != self.cols {
            return Err(Error::Shape(format!("expected {} components, got {}", self.cols, f.len())));
        }
        let mut out = vec![RatFunc::zero(); self.rows];
        for (&(i, j), op) in &self.entries {
            out[i] = out[i].add(&op.apply(&f[j]));
        }
        Ok(out)
    }

    /// Transposed matrix of entrywise formal adjoints, ignoring any pairing weights.
    pub fn adjoint_plain(&self) -> OpMatrix {
        let mut out = OpMatrix::zeros(self.n, self.cols, self.rows);
        out.source_labels = self.target_labels.clone();
        out.target_labels = self.source_labels.clone();
        out.source_weights = self.target_weights.clone();
        out.target_weights = self.source_weights.clone();
        for (&(i, j), op) in &self.entries {
            out.set(j, i, op.adjoint());
        }
        out
    }

    /// Formal adjoint. With pairing weights `W_src`, `W_tgt` attached this is
    /// `W_src^{-1} ad(A) W_tgt`, otherwise the plain transposed adjoint.
    pub fn adjoint(&self) -> OpMatrix {
        let mut out = self.adjoint_plain();
        if let Some(w) = &self.target_weights {
            out = out.scale_cols(w);
        }
        if let Some(w) = &self.source_weights {
            let inv: Vec<Rat> = w.iter().map(|c| c.recip().expect("nonzero weight")).collect();
            out = out.scale_rows(&inv);
        }
        out
    }

    /// Adjoint with respect to explicit diagonal pairings: `W_src^{-1} ad(A) W_tgt`.
    pub fn adjoint_paired(&self, w_src: &[Rat], w_tgt: &[Rat]) -> Result<OpMatrix> {
        if w_src.len() != self.cols || w_tgt.len() != self.rows {
            return Err(Error::Shape("pairing weights do not match matrix shape".into()));
        }
        let inv: Vec<Rat> = w_src.iter().map(Rat::recip).collect::<Result<_>>()?;
        Ok(self.adjoint_plain().scale_cols(w_tgt).scale_rows(&inv))
    }

    pub fn scale_rows(&self, w: &[Rat]) -> OpMatrix {
        let mut r = self.clone();
        for (&(i, _), v) in r.entries.iter_mut() {
            *v = v.scale_rat(&w[i]);
        }
        r.entries.retain(|_, v| !v.is_zero());
        r
    }

    /// Right multiplication by a constant diagonal matrix.
    pub fn scale_cols(&self, w: &[Rat]) -> OpMatrix {
        let mut r = self.clone();
        for (&(_, j), v) in r.entries.iter_mut() {
            *v = v.scale_rat(&w[j]);
        }
        r.entries.retain(|_, v| !v.is_zero());
        r
    }

    pub fn select_rows(&self, idx: &[usize]) -> OpMatrix {
        let mut out = OpMatrix::zeros(self.n, idx.len(), self.cols);
        out.source_labels = self.source_labels.clone();
        out.target_labels = idx.iter().map(|&i| self.target_labels[i].clone()).collect();
        out.source_weights = self.source_weights.clone();
        out.target_weights = self.target_weights.as_ref().map(|w| idx.iter().map(|&i| w[i].clone()).collect());
        for (k, &i) in idx.iter().enumerate() {
            for j in 0..self.cols {
                if let Some(op) = self.get(i, j) {
                    out.set(k, j, op.clone());
                }
            }
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> OpMatrix {
        let mut out = OpMatrix::zeros(self.n, self.rows, idx.len());
        out.target_labels = self.target_labels.clone();
        out.source_labels = idx.iter().map(|&j| self.source_labels[j].clone()).collect();
        out.target_weights = self.target_weights.clone();
        out.source_weights = self.source_weights.as_ref().map(|w| idx.iter().map(|&j| w[j].clone()).collect());
        for (k, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                if let Some(op) = self.get(i, j) {
                    out.set(i, k, op.clone());
                }
            }
        }
        out
    }

    /// Stacks row blocks over the same unknowns; target labels are made unique.
    pub fn vstack(parts: &[&OpMatrix]) -> Result<OpMatrix> {
        let first = parts.first().ok_or_else(|| Error::Shape("nothing to stack".into()))?;
        let cols = first.cols;
        let n = parts.iter().map(|p| p.n).max().unwrap_or(0);
        let total: usize = parts.iter().map(|p| p.rows).sum();
        let mut out = OpMatrix::zeros(n, total, cols);
        out.source_labels = first.source_labels.clone();
        out.source_weights = first.source_weights.clone();
        if parts.iter().any(|p| p.target_weights.is_some()) {
            let mut w = Vec::with_capacity(total);
            for p in parts {
                match &p.target_weights {
                    Some(v) => w.extend(v.iter().cloned()),
                    None => w.extend((0..p.rows).map(|_| Rat::one())),
                }
            }
            out.target_weights = Some(w);
        }
        let mut labels = Vec::new();
        let mut off = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::Shape("row blocks have different column counts".into()));
            }
            for (&(i, j), op) in &p.entries {
                out.set(off + i, j, op.clone());
            }
            labels.extend(p.target_labels.iter().cloned());
            off += p.rows;
        }
        out.target_labels = unique_labels(labels);
        Ok(out)
    }

    /// Rewrites every entry in the coordinates `xbar = A x`.
    pub fn change_coordinates(&self, t: &CoordinateChange) -> OpMatrix {
        let mut r = self.clone();
        for v in r.entries.values_mut() {
            *v = v.change_coordinates(t);
        }
        r.entries.retain(|_, v| !v.is_zero());
        r
    }

    pub fn principal_symbol(&self, q: usize) -> SymbolMatrix {
        let entries = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j).homogeneous_part(q)).collect())
            .collect();
        SymbolMatrix { n: self.n, q, entries }
    }

    /// Removes zero rows.
    pub fn drop_zero_rows(&self) -> OpMatrix {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| !self.row_is_zero(i)).collect();
        self.select_rows(&keep)
    }

    /// Human-readable rows in the operator file syntax.
    pub fn row_string(&self, i: usize) -> String {
        struct Row<'a>(&'a OpMatrix, usize);
        impl fmt::Display for Row<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let (a, i) = (self.0, self.1);
                let mut first = true;
                for j in 0..a.cols {
                    let Some(op) = a.get(i, j) else { continue };
                    let mut s = String::new();
                    {
                        use std::fmt::Write;
                        let _ = write!(s, "{}", OpDisplay(op, &a.source_labels[j]));
                    }
                    if first {
                        write!(f, "{s}")?;
                    } else if let Some(rest) = s.strip_prefix('-') {
                        write!(f, " - {rest}")?;
                    } else {
                        write!(f, " + {s}")?;
                    }
                    first = false;
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
        Row(self, i).to_string()
    }
}

struct OpDisplay<'a>(&'a DiffOp, &'a str);

impl fmt::Display for OpDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, None, Some(self.1))
    }
}

/// Makes labels pairwise distinct by suffixing repeats with `_2`, `_3`, ...
pub fn unique_labels(labels: Vec<String>) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(labels.len());
    let taken: std::collections::BTreeSet<String> = labels.iter().cloned().collect();
    for l in labels {
        let c = seen.entry(l.clone()).or_insert(0);
        *c += 1;
        if *c == 1 {
            out.push(l);
        } else {
            let mut k = *c;
            let mut cand = format!("{l}_{k}");
            while taken.contains(&cand) || out.contains(&cand) {
                k += 1;
                cand = format!("{l}_{k}");
            }
            out.push(cand);
        }
    }
    out
}

impl fmt::Display for OpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{}: {}", self.target_labels[i], self.row_string(i))?;
        }
        Ok(())
    }
}

/// Top-order parts of an operator matrix, with `d_mu` read as `chi^mu`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolMatrix {
    n: usize,
    q: usize,
    entries: Vec<Vec<DiffOp>>,
}

impl SymbolMatrix {
    pub fn order(&self) -> usize {
        self.q
    }

    pub fn nrows(&self) -> usize {
        self.entries.len()
    }

    pub fn ncols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn entry(&self, i: usize, j: usize) -> &DiffOp {
        &self.entries[i][j]
    }

    /// Entries as rational functions in `x1..xn, chi1..chin` (`chi_i` is variable `n + i`).
    pub fn as_ratfunc_matrix(&self) -> Vec<Vec<RatFunc>> {
        let n = self.n;
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|op| {
                        let mut acc = RatFunc::zero();
                        for (mu, a) in op.terms() {
                            let chi = RatFunc::from_poly(Poly::monomial(mu.to_monomial(n), Rat::one()));
                            acc = acc.add(&a.mul(&chi));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Rank over `K(chi)`, i.e. at a generic covector.
    pub fn generic_rank(&self) -> usize {
        linalg::rank_ratfunc(&self.as_ratfunc_matrix())
    }

    pub fn determinant(&self) -> Result<RatFunc> {
        if self.nrows() != self.ncols() {
            return Err(Error::Shape("determinant of a non-square symbol".into()));
        }
        Ok(linalg::det_ratfunc(&self.as_ratfunc_matrix()))
    }

    /// Entry `(i, j)` printed as a polynomial in `chi`.
    pub fn entry_string(&self, i: usize, j: usize) -> String {
        let op = &self.entries[i][j];
        if op.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (mu, a) in op.terms().rev() {
            let mut m = String::new();
            for k in 0..mu.width() {
                match mu.get(k) {
                    0 => {}
                    1 => m.push_str(&format!("chi{}", k + 1)),
                    e => m.push_str(&format!("chi{}^{}", k + 1, e)),
                }
            }
            let coef = a.to_string();
            let t = if a.is_one() {
                m
            } else if *a == RatFunc::int(-1) {
                format!("-{m}")
            } else if a.is_compound() {
                format!("({coef})*{m}")
            } else {
                format!("{coef}*{m}")
            };
            parts.push(t);
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(r) = p.strip_prefix('-') {
                s.push_str(&format!(" - {r}"));
            } else {
                s.push_str(&format!(" + {p}"));
            }
        }
        s
    }
}
