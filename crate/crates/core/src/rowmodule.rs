//! Left submodules of `D^p` generated by operator rows, with membership tests.
//!
//! Rows with constant coefficients that are homogeneous of one order generate a graded
//! module whose degree-`s` part is spanned by the derivatives `d_mu g` of total order `s`;
//! membership there is plain linear algebra. Any other generating set is completed to
//! involution first, after which the order-`s` part of the module is read off the
//! (prolonged) involutive system.

use std::collections::BTreeMap;

use crate::coords::CoordinateChange;
use crate::error::Result;
use crate::jet::{form_of_row, involutive_completion, Echelon, JetForm, JetRow, JetSystem};
use crate::operators::{DiffOp, MultiIndex, OpMatrix};

const SEARCH_SEED: u64 = 0;
const SEARCH_TRIES: usize = 16;
const EXTRA_ORDERS: usize = 5;

fn row_is_graded(row: &[DiffOp]) -> Option<usize> {
    let mut order = None;
    for op in row.iter().filter(|o| !o.is_zero()) {
        if !op.is_constant_coeff() || !op.is_homogeneous() {
            return None;
        }
        match order {
            None => order = Some(op.order()),
            Some(o) if o != op.order() => return None,
            _ => {}
        }
    }
    order
}

fn derive_row(row: &[DiffOp], mu: &MultiIndex) -> Vec<DiffOp> {
    let d = DiffOp::dmu(mu.clone());
    row.iter().map(|op| d.compose(op)).collect()
}

#[derive(Clone, Debug)]
struct Completed {
    system: JetSystem,
    coords: CoordinateChange,
}

/// Row module `D g_1 + ... + D g_r` inside `D^p`.
#[derive(Clone, Debug)]
pub struct RowModule {
    n: usize,
    p: usize,
    rows: Vec<Vec<DiffOp>>,
    /// Degree of each generator when every generator is graded.
    grades: Option<Vec<usize>>,
    levels: BTreeMap<usize, Echelon>,
    completed: Option<Completed>,
}

impl RowModule {
    pub fn new(n: usize, p: usize) -> RowModule {
        RowModule { n, p, rows: Vec::new(), grades: Some(Vec::new()), levels: BTreeMap::new(), completed: None }
    }

    pub fn from_matrix(a: &OpMatrix) -> RowModule {
        let mut m = RowModule::new(a.n(), a.ncols());
        for i in 0..a.nrows() {
            if !a.row_is_zero(i) {
                m.push(a.row(i));
            }
        }
        m
    }

    pub fn generators(&self) -> &[Vec<DiffOp>] {
        &self.rows
    }

    pub fn is_graded(&self) -> bool {
        self.grades.is_some()
    }

    pub fn push(&mut self, row: Vec<DiffOp>) {
        assert_eq!(row.len(), self.p, "row length must match the module rank");
        if let Some(g) = self.grades.as_mut() {
            match row_is_graded(&row) {
                Some(o) => {
                    g.push(o);
                    for (&s, ech) in self.levels.iter_mut() {
                        if s >= o {
                            for mu in MultiIndex::all_of_order(self.n, s - o) {
                                let _ = ech.insert(JetRow { form: form_of_row(&derive_row(&row, &mu)), cert: None });
                            }
                        }
                    }
                }
                None => {
                    self.grades = None;
                    self.levels.clear();
                }
            }
        }
        self.rows.push(row);
        self.completed = None;
    }

    fn graded_level(&mut self, s: usize) -> &Echelon {
        if !self.levels.contains_key(&s) {
            let mut ech = Echelon::new();
            let grades = self.grades.as_ref().expect("graded module");
            for (row, &o) in self.rows.iter().zip(grades) {
                if s >= o {
                    for mu in MultiIndex::all_of_order(self.n, s - o) {
                        let _ = ech.insert(JetRow { form: form_of_row(&derive_row(row, &mu)), cert: None });
                    }
                }
            }
            self.levels.insert(s, ech);
        }
        &self.levels[&s]
    }

    fn completed(&mut self, min_order: usize) -> Result<&Completed> {
        if self.completed.is_none() {
            let a = OpMatrix::from_rows(self.n, self.p, self.rows.clone());
            let s = JetSystem::from_operator_untracked(&a);
            let budget = s.q() + EXTRA_ORDERS;
            let c = involutive_completion(&s, budget, SEARCH_SEED, SEARCH_TRIES)?;
            self.completed = Some(Completed { system: c.system, coords: c.coords });
        }
        let c = self.completed.as_mut().expect("just completed");
        if c.system.q() < min_order {
            c.system = c.system.prolong(min_order - c.system.q());
        }
        Ok(self.completed.as_ref().expect("just completed"))
    }

    /// Remainder of `row` modulo the module, as a jet form (in the coordinates the
    /// module is represented in). Zero exactly when `row` belongs to the module.
    pub fn remainder(&mut self, row: &[DiffOp]) -> Result<JetForm> {
        if row.iter().all(DiffOp::is_zero) {
            return Ok(JetForm::new());
        }
        if self.rows.is_empty() {
            return Ok(form_of_row(row));
        }
        if self.grades.is_some() {
            if let Some(s) = row_is_graded(row) {
                return Ok(self.graded_level(s).reduce_form(&form_of_row(row)));
            }
        }
        let order = row.iter().map(DiffOp::order).max().unwrap_or(0);
        let c = self.completed(order)?;
        let moved: Vec<DiffOp> = if c.coords.is_identity() {
            row.to_vec()
        } else {
            row.iter().map(|o| o.change_coordinates(&c.coords)).collect()
        };
        Ok(c.system.echelon().reduce_form(&form_of_row(&moved)))
    }

    pub fn contains(&mut self, row: &[DiffOp]) -> Result<bool> {
        Ok(self.remainder(row)?.is_empty())
    }

    /// Whether every row of `a` lies in the module.
    pub fn contains_all(&mut self, a: &OpMatrix) -> Result<bool> {
        for i in 0..a.nrows() {
            if !self.contains(&a.row(i))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A nonzero scalar operator `P` of order at most `max_order` with `P . row` in the
    /// module, of least order, if one exists.
    pub fn annihilator(&mut self, row: &[DiffOp], max_order: usize) -> Result<Option<DiffOp>> {
        let mut mus: Vec<MultiIndex> = Vec::new();
        for k in 0..=max_order {
            let mut level = MultiIndex::all_of_order(self.n, k);
            level.reverse();
            mus.extend(level);
        }
        let mut ech = Echelon::new();
        for (idx, mu) in mus.iter().enumerate() {
            let rem = self.remainder(&derive_row(row, mu))?;
            let mut cert = vec![DiffOp::zero(); mus.len()];
            cert[idx] = DiffOp::one();
            if let Err(dep) = ech.insert(JetRow { form: rem, cert: Some(cert) }) {
                let coeffs = dep.cert.expect("tracked");
                let mut p = DiffOp::zero();
                for (c, mu) in coeffs.iter().zip(&mus) {
                    let a = c.coefficient(&MultiIndex::zero());
                    if !a.is_zero() {
                        p.add_term(mu.clone(), &a);
                    }
                }
                let lead = p.leading().map(|(_, c)| c.clone()).expect("nonzero relation");
                return Ok(Some(p.scale(&lead.inv()?)));
            }
        }
        Ok(None)
    }
}

/// Whether the rows of `a` and `b` generate the same left module.
pub fn row_module_eq(a: &OpMatrix, b: &OpMatrix) -> Result<bool> {
    if a.ncols() != b.ncols() {
        return Ok(false);
    }
    Ok(RowModule::from_matrix(a).contains_all(b)? && RowModule::from_matrix(b).contains_all(a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rat;
    use crate::gallery::{self, Metric};

    #[test]
    fn graded_membership() {
        let g = gallery::grad(3).unwrap();
        let mut m = RowModule::from_matrix(&g);
        assert!(m.is_graded());
        assert!(m.contains(&[DiffOp::dmu(MultiIndex::from_digits("123").unwrap())]).unwrap());
        assert!(!m.contains(&[DiffOp::one()]).unwrap());
    }

    #[test]
    fn scaled_rows_generate_the_same_module() {
        let b = gallery::beltrami();
        let w = gallery::sym_weights(3);
        assert!(row_module_eq(&b, &b.scale_rows(&w)).unwrap());
        assert!(!row_module_eq(&b, &b.select_rows(&[0, 1, 2])).unwrap());
    }

    #[test]
    fn riemann_three_is_adjoint_beltrami() {
        let r = gallery::riemann(3, &Metric::euclid(3)).unwrap();
        assert!(row_module_eq(&r.adjoint(), &gallery::beltrami()).unwrap());
    }

    #[test]
    fn variable_coefficient_membership() {
        let d = gallery::contact_system();
        let mut m = RowModule::from_matrix(&d);
        assert!(!m.is_graded());
        let combo: Vec<DiffOp> = d
            .row(1)
            .iter()
            .zip(d.row(2))
            .map(|(a, b)| DiffOp::d(2).compose(a).add(&b.scale_rat(&Rat::int(3))))
            .collect();
        assert!(m.contains(&combo).unwrap());
        assert!(!m.contains(&[DiffOp::one(), DiffOp::zero(), DiffOp::zero()]).unwrap());
    }

    #[test]
    fn laplacian_annihilates_modulo_cauchy_riemann() {
        let z = DiffOp::zero;
        let cr = OpMatrix::from_rows(
            2,
            2,
            vec![vec![DiffOp::d(0).neg(), DiffOp::d(1)], vec![DiffOp::d(1), DiffOp::d(0)]],
        );
        let mut m = RowModule::from_matrix(&cr);
        let p = m.annihilator(&[DiffOp::one(), z()], 2).unwrap().unwrap();
        let lap = DiffOp::dmu(MultiIndex::from_digits("11").unwrap()).add(&DiffOp::dmu(MultiIndex::from_digits("22").unwrap()));
        assert_eq!(p, lap);
    }
}
