//! Linear systems on jet space.
//!
//! A system of order `q` is kept as a reduced row echelon basis of linear forms
//! in the jet coordinates `y^k_mu`, `|mu| <= q`. Rows may carry certificates:
//! operator rows expressing them as combinations of the original equations.

mod coords;
mod involution;
mod spencer;

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{Rat, RatFunc};
use crate::coords::CoordinateChange;
use crate::error::{Error, Result};
use crate::operators::{DiffOp, MultiIndex, OpMatrix};

pub use coords::{beta_signature, find_delta_regular};
pub use involution::{
    characters, complete_to_involution, involutive_completion, is_involutive, janet_tabular, CharacterTable,
    Completion, Involution, JanetTabular, TabularRow,
};
pub use spencer::{spencer_apply, spencer_apply_form, JetSection};

const MU_BITS: u32 = 6;
const MAX_VARS: usize = 9;
const K_BITS: u32 = 16;

/// Jet coordinate `y^k_mu`, packed so that the derived order is the priority order:
/// higher `|mu|`, then higher class, then larger `mu_n, mu_{n-1}, ...`, then smaller `k`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jet(u128);

impl Jet {
    pub fn new(k: usize, mu: &MultiIndex) -> Jet {
        assert!(mu.width() <= MAX_VARS, "at most nine independent variables");
        assert!(k < (1 << K_BITS) - 1, "too many unknowns");
        let mut key: u128 = 0;
        for i in 0..mu.width() {
            let e = mu.get(i) as u128;
            assert!(e < (1 << MU_BITS), "derivative order too large");
            key |= e << (K_BITS + MU_BITS * i as u32);
        }
        let class_code = mu.class().map_or(0, |c| c as u128 + 1);
        let top = K_BITS + MU_BITS * MAX_VARS as u32;
        key |= class_code << top;
        key |= (mu.order() as u128) << (top + 4);
        key |= ((1u128 << K_BITS) - 1) - k as u128;
        Jet(key)
    }

    pub fn unknown(&self) -> usize {
        (((1u128 << K_BITS) - 1) - (self.0 & ((1 << K_BITS) - 1))) as usize
    }

    pub fn index(&self) -> MultiIndex {
        let mut v = [0u8; MAX_VARS];
        for (i, e) in v.iter_mut().enumerate() {
            *e = ((self.0 >> (K_BITS + MU_BITS * i as u32)) & ((1 << MU_BITS) - 1)) as u8;
        }
        MultiIndex::from_slice(&v)
    }

    pub fn order(&self) -> usize {
        (self.0 >> (K_BITS + MU_BITS * MAX_VARS as u32 + 4)) as usize
    }

    /// 0-based class of the multi-index; `None` at order zero.
    pub fn class(&self) -> Option<usize> {
        let c = (self.0 >> (K_BITS + MU_BITS * MAX_VARS as u32)) & 0xF;
        (c > 0).then(|| c as usize - 1)
    }

    pub fn plus(&self, i: usize) -> Jet {
        Jet::new(self.unknown(), &self.index().plus_unit(i))
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mu = self.index();
        if mu.order() == 0 {
            write!(f, "y{}", self.unknown() + 1)
        } else {
            write!(f, "y{}_{}", self.unknown() + 1, mu.digits())
        }
    }
}

/// Linear form in jet coordinates.
pub type JetForm = BTreeMap<Jet, RatFunc>;

/// Adds `c * src` into `dst`.
pub fn axpy(dst: &mut JetForm, c: &RatFunc, src: &JetForm) {
    for (j, a) in src {
        let t = c.mul(a);
        match dst.get_mut(j) {
            Some(v) => {
                *v = v.add(&t);
                if v.is_zero() {
                    dst.remove(j);
                }
            }
            None => {
                if !t.is_zero() {
                    dst.insert(*j, t);
                }
            }
        }
    }
}

/// Formal derivative `d_i` of a linear form.
pub fn derive_form(form: &JetForm, i: usize) -> JetForm {
    let mut out = JetForm::new();
    for (j, c) in form {
        let up = j.plus(i);
        let e = out.entry(up).or_insert_with(RatFunc::zero);
        *e = e.add(c);
        let dc = c.partial(i);
        if !dc.is_zero() {
            let e = out.entry(*j).or_insert_with(RatFunc::zero);
            *e = e.add(&dc);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// The jet form `sum_k sum_mu a^mu y^k_mu` of one operator row.
pub fn form_of_row(ops: &[DiffOp]) -> JetForm {
    let mut form = JetForm::new();
    for (k, op) in ops.iter().enumerate() {
        for (mu, a) in op.terms() {
            form.insert(Jet::new(k, mu), a.clone());
        }
    }
    form
}

/// Inverse of [`form_of_row`].
pub fn row_of_form(form: &JetForm, m: usize) -> Vec<DiffOp> {
    let mut ops = vec![DiffOp::zero(); m];
    for (j, c) in form {
        ops[j.unknown()].add_term(j.index(), c);
    }
    ops
}

pub fn form_order(form: &JetForm) -> usize {
    form.keys().next_back().map_or(0, Jet::order)
}

/// One equation with an optional certificate over `p0` original equations.
#[derive(Clone, Debug, PartialEq)]
pub struct JetRow {
    pub form: JetForm,
    pub cert: Option<Vec<DiffOp>>,
}

impl JetRow {
    pub fn leading(&self) -> Option<Jet> {
        self.form.keys().next_back().copied()
    }

    pub fn order(&self) -> usize {
        form_order(&self.form)
    }

    fn sub_scaled(&mut self, c: &RatFunc, other: &JetRow) {
        axpy(&mut self.form, &c.neg(), &other.form);
        if let (Some(a), Some(b)) = (self.cert.as_mut(), other.cert.as_ref()) {
            for (x, y) in a.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.sub(&y.scale(c));
                }
            }
        }
    }

    fn scale(&mut self, c: &RatFunc) {
        for v in self.form.values_mut() {
            *v = v.mul(c);
        }
        if let Some(cert) = self.cert.as_mut() {
            for x in cert.iter_mut() {
                *x = x.scale(c);
            }
        }
    }

    /// Formal derivative `d_i`, certificate composed on the left with `d_i`.
    pub fn derive(&self, i: usize) -> JetRow {
        JetRow {
            form: derive_form(&self.form, i),
            cert: self.cert.as_ref().map(|c| c.iter().map(|op| DiffOp::d(i).compose(op)).collect()),
        }
    }
}

/// Reduced row echelon basis of jet forms, grown incrementally.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<JetRow>,
    pivots: BTreeMap<Jet, usize>,
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[JetRow] {
        &self.rows
    }

    pub fn pivot_jets(&self) -> impl Iterator<Item = &Jet> {
        self.pivots.keys()
    }

    pub fn has_pivot(&self, j: &Jet) -> bool {
        self.pivots.contains_key(j)
    }

    pub fn row_for_pivot(&self, j: &Jet) -> Option<&JetRow> {
        self.pivots.get(j).map(|&i| &self.rows[i])
    }

    /// Reduces `row` modulo the basis (no pivot jets remain).
    pub fn reduce(&self, row: &mut JetRow) {
        let hits: Vec<(Jet, RatFunc)> =
            row.form.iter().filter(|(j, _)| self.pivots.contains_key(j)).map(|(j, c)| (*j, c.clone())).collect();
        for (j, c) in hits {
            let r = &self.rows[self.pivots[&j]];
            row.sub_scaled(&c, r);
        }
    }

    pub fn reduce_form(&self, form: &JetForm) -> JetForm {
        let mut row = JetRow { form: form.clone(), cert: None };
        self.reduce(&mut row);
        row.form
    }

    pub fn contains(&self, form: &JetForm) -> bool {
        self.reduce_form(form).is_empty()
    }

    /// Inserts a row. Returns `Err(reduced)` with the zero-form remainder (and its
    /// certificate, a relation among the original equations) if the row is dependent.
    pub fn insert(&mut self, mut row: JetRow) -> std::result::Result<Jet, JetRow> {
        self.reduce(&mut row);
        let Some(lead) = row.leading() else { return Err(row) };
        let inv = row.form[&lead].inv().expect("nonzero leading coefficient");
        if !inv.is_one() {
            row.scale(&inv);
        }
        let idx = self.rows.len();
        for r in self.rows.iter_mut() {
            if let Some(c) = r.form.get(&lead).cloned() {
                r.sub_scaled(&c, &row);
            }
        }
        self.rows.push(row);
        self.pivots.insert(lead, idx);
        Ok(lead)
    }

    /// Rows sorted by leading jet, highest first.
    pub fn sorted_rows(&self) -> Vec<&JetRow> {
        self.pivots.values().rev().map(|&i| &self.rows[i]).collect()
    }
}

/// A linear system `R_q` in jet space, together with the operator it came from.
#[derive(Clone, Debug)]
pub struct JetSystem {
    n: usize,
    m: usize,
    q: usize,
    ech: Echelon,
    base: OpMatrix,
    coords: CoordinateChange,
    track: bool,
}

impl JetSystem {
    /// One row per operator row, with identity certificates.
    pub fn from_operator(a: &OpMatrix) -> JetSystem {
        JetSystem::build(a, true)
    }

    /// As [`JetSystem::from_operator`] without certificate tracking.
    pub fn from_operator_untracked(a: &OpMatrix) -> JetSystem {
        JetSystem::build(a, false)
    }

    fn build(a: &OpMatrix, track: bool) -> JetSystem {
        let p0 = a.nrows();
        let mut ech = Echelon::new();
        for i in 0..p0 {
            let cert = track.then(|| {
                let mut c = vec![DiffOp::zero(); p0];
                c[i] = DiffOp::one();
                c
            });
            let _ = ech.insert(JetRow { form: form_of_row(&a.row(i)), cert });
        }
        JetSystem {
            n: a.n(),
            m: a.ncols(),
            q: a.order(),
            ech,
            base: a.clone(),
            coords: CoordinateChange::identity(a.n()),
            track,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn tracks_certificates(&self) -> bool {
        self.track
    }

    /// The operator whose equations the certificates refer to (in current coordinates).
    pub fn base(&self) -> &OpMatrix {
        &self.base
    }

    /// Cumulative coordinate change from the coordinates of the original input.
    pub fn coords(&self) -> &CoordinateChange {
        &self.coords
    }

    pub fn echelon(&self) -> &Echelon {
        &self.ech
    }

    pub fn len(&self) -> usize {
        self.ech.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ech.is_empty()
    }

    /// Rows sorted by leading jet, highest first.
    pub fn rows(&self) -> Vec<&JetRow> {
        self.ech.sorted_rows()
    }

    /// Rows whose leading jet has order exactly `q`.
    pub fn top_rows(&self) -> Vec<&JetRow> {
        self.rows().into_iter().filter(|r| r.order() == self.q).collect()
    }

    /// Number of jet coordinates of order at most `q`.
    pub fn jet_count(&self) -> usize {
        self.m * binom(self.n + self.q, self.q)
    }

    /// `dim R_q`: jet coordinates minus independent equations.
    pub fn dim(&self) -> usize {
        self.jet_count() - self.len()
    }

    pub(crate) fn with_rows(&self, q: usize, ech: Echelon) -> JetSystem {
        JetSystem { n: self.n, m: self.m, q, ech, base: self.base.clone(), coords: self.coords.clone(), track: self.track }
    }

    /// Adds all formal derivatives up to order `r`.
    pub fn prolong(&self, r: usize) -> JetSystem {
        let mut cur = self.clone();
        for _ in 0..r {
            let mut ech = cur.ech.clone();
            let src: Vec<JetRow> = cur.rows().into_iter().cloned().collect();
            for row in &src {
                for i in 0..self.n {
                    let _ = ech.insert(row.derive(i));
                }
            }
            cur = cur.with_rows(cur.q + 1, ech);
        }
        cur
    }

    /// Equations of order at most `to_order`; these span `R_{to_order}` restricted from `R_q`.
    pub fn project(&self, to_order: usize) -> JetSystem {
        let mut ech = Echelon::new();
        for row in self.rows().into_iter().rev() {
            if row.order() <= to_order {
                let _ = ech.insert(row.clone());
            }
        }
        self.with_rows(to_order.min(self.q), ech)
    }

    /// Adds derivatives of lower-order rows up to order `q` until nothing new appears.
    pub fn close(&self) -> JetSystem {
        let mut ech = self.ech.clone();
        loop {
            let mut added = false;
            let src: Vec<JetRow> = ech.sorted_rows().into_iter().filter(|r| r.order() < self.q).cloned().collect();
            for row in &src {
                for i in 0..self.n {
                    if ech.insert(row.derive(i)).is_ok() {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        self.with_rows(self.q, ech)
    }

    /// Inserts an extra row (with certificate when tracking).
    pub fn insert_row(&mut self, row: JetRow) -> bool {
        self.ech.insert(row).is_ok()
    }

    /// The rows as an operator matrix (in current coordinates), highest leading jet first.
    pub fn to_operator(&self) -> OpMatrix {
        let rows: Vec<Vec<DiffOp>> = self.rows().iter().map(|r| row_of_form(&r.form, self.m)).collect();
        OpMatrix::from_rows(self.n, self.m, rows).with_source_labels(self.base.source_labels().to_vec())
    }

    /// Rewrites the system in the coordinates `xbar = T x` (relative to the current ones).
    pub fn change_coordinates(&self, t: &CoordinateChange) -> JetSystem {
        let base = self.base.change_coordinates(t);
        let mut ech = Echelon::new();
        for row in self.rows().into_iter().rev() {
            let ops: Vec<DiffOp> = row_of_form(&row.form, self.m).iter().map(|o| o.change_coordinates(t)).collect();
            let cert = row.cert.as_ref().map(|c| c.iter().map(|o| o.change_coordinates(t)).collect());
            let _ = ech.insert(JetRow { form: form_of_row(&ops), cert });
        }
        JetSystem { n: self.n, m: self.m, q: self.q, ech, base, coords: self.coords.then(t), track: self.track }
    }

    /// Checks that every certificate reproduces its row from the base operator.
    pub fn verify_certificates(&self) -> Result<bool> {
        if !self.track {
            return Err(Error::PreconditionFailed("system does not track certificates".into()));
        }
        for row in self.rows() {
            let cert = row.cert.as_ref().expect("tracked");
            let mut acc = vec![DiffOp::zero(); self.m];
            for (l, c) in cert.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (k, slot) in acc.iter_mut().enumerate() {
                    if let Some(op) = self.base.get(l, k) {
                        *slot = slot.add(&c.compose(op));
                    }
                }
            }
            if form_of_row(&acc) != row.form {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Symbol of order `q` as a list of top-order forms.
    pub fn symbol_forms(&self) -> Vec<JetForm> {
        self.top_rows()
            .into_iter()
            .map(|r| r.form.iter().filter(|(j, _)| j.order() == self.q).map(|(j, c)| (*j, c.clone())).collect())
            .collect()
    }
}

pub(crate) fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Constant jet form scaled by a rational.
pub fn scale_form(form: &JetForm, c: &Rat) -> JetForm {
    form.iter().map(|(j, v)| (*j, v.scale(c))).filter(|(_, v)| !v.is_zero()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn jet_packing_round_trips() {
        let mu = MultiIndex::from_digits("1123").unwrap();
        let j = Jet::new(4, &mu);
        assert_eq!(j.unknown(), 4);
        assert_eq!(j.index(), mu);
        assert_eq!(j.order(), 4);
        assert_eq!(j.class(), Some(0));
        let a = Jet::new(0, &MultiIndex::from_digits("33").unwrap());
        let b = Jet::new(0, &MultiIndex::from_digits("23").unwrap());
        let c = Jet::new(1, &MultiIndex::from_digits("33").unwrap());
        assert!(a > b && a > c && c > b);
        assert!(Jet::new(0, &MultiIndex::from_digits("1").unwrap()) > Jet::new(0, &MultiIndex::zero()));
    }

    #[test]
    fn contact_from_operator() {
        let s = JetSystem::from_operator(&gallery::contact_system());
        assert_eq!(s.len(), 3);
        assert_eq!(s.jet_count(), 12);
    }

    #[test]
    fn airy_leading_jets() {
        let s = JetSystem::from_operator(&gallery::airy());
        let leads: Vec<String> = s.rows().iter().map(|r| format!("{:?}", r.leading().unwrap())).collect();
        assert_eq!(leads, ["y1_22", "y1_12", "y1_11"]);
        assert!(JetSystem::from_operator(&OpMatrix::zeros(2, 2, 3)).is_empty());
    }

    #[test]
    fn prolongation_of_d2() {
        let a = OpMatrix::from_rows(2, 1, vec![vec![DiffOp::d(1)]]);
        let s = JetSystem::from_operator(&a).prolong(1);
        let leads: Vec<String> = s.rows().iter().map(|r| format!("{:?}", r.leading().unwrap())).collect();
        assert_eq!(leads, ["y1_22", "y1_12", "y1_2"]);
        assert_eq!(s.dim(), 3);
        assert!(s.verify_certificates().unwrap());
    }

    #[test]
    fn contact_subsystem_projection_gains_a_row() {
        let d = gallery::contact_system_original();
        let sub = d.select_rows(&[0, 1]);
        let s = JetSystem::from_operator(&sub);
        let p = s.prolong(1).project(1);
        assert_eq!(p.len(), 3);
        assert!(p.verify_certificates().unwrap());
        let full = JetSystem::from_operator(&d).prolong(1).project(1);
        assert_eq!(full.len(), 3);
    }
}
