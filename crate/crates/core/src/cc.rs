//! Generating compatibility conditions and differential sequences.

use serde::Serialize;

use crate::coords::CoordinateChange;
use crate::error::{Error, Result};
use crate::jet::{complete_to_involution, form_of_row, involutive_completion, row_of_form, Echelon, JetRow, JetSystem};
use crate::operators::{DiffOp, OpMatrix};
use crate::rowmodule::RowModule;

/// Number of random coordinate changes tried when a symbol looks delta-singular.
pub const SEARCH_TRIES: usize = 16;

/// Generating compatibility conditions of an operator.
#[derive(Clone, Debug)]
pub struct CCResult {
    /// Rows act on the target unknowns of the input operator.
    pub cc: OpMatrix,
    pub order: usize,
    /// Order at which the input system became involutive.
    pub completion_order: usize,
    /// Coordinates in which the completion was carried out.
    pub coords: CoordinateChange,
}

fn unit(p: usize, i: usize) -> Vec<DiffOp> {
    let mut v = vec![DiffOp::zero(); p];
    v[i] = DiffOp::one();
    v
}

/// Raw syzygies of the rows of the completed system, read in the original equations.
fn syzygy_candidates(s: &JetSystem, p0: usize) -> Vec<Vec<DiffOp>> {
    let n = s.n();
    let mut out = Vec::new();
    let mut keep = |r: JetRow| {
        if let Some(c) = r.cert {
            if c.iter().any(|o| !o.is_zero()) {
                out.push(c);
            }
        }
    };
    let mut ech: Echelon = s.echelon().clone();
    let rows: Vec<JetRow> = s.rows().into_iter().cloned().collect();
    let class_of = |r: &JetRow| r.leading().and_then(|j| j.class()).unwrap_or(n - 1);
    // multiplicative prolongations first, so the remaining ones reduce against them
    for r in rows.iter().filter(|r| r.order() == s.q()) {
        for j in 0..=class_of(r) {
            if let Err(rem) = ech.insert(r.derive(j)) {
                keep(rem);
            }
        }
    }
    for r in &rows {
        let top = r.order() == s.q();
        for j in 0..n {
            if top && j <= class_of(r) {
                continue;
            }
            if let Err(rem) = ech.insert(r.derive(j)) {
                keep(rem);
            }
        }
    }
    let base = s.base();
    for i in 0..p0 {
        let row = JetRow { form: form_of_row(&base.row(i)), cert: Some(unit(p0, i)) };
        if let Err(rem) = ech.insert(row) {
            keep(rem);
        }
    }
    out
}

/// Keeps a deterministic generating subset: candidates are taken by increasing order,
/// row-reduced within each order, and kept unless already in the module of kept rows.
fn minimize(n: usize, p: usize, candidates: Vec<Vec<DiffOp>>) -> Result<Vec<Vec<DiffOp>>> {
    let order_of = |r: &Vec<DiffOp>| r.iter().map(DiffOp::order).max().unwrap_or(0);
    let max = candidates.iter().map(order_of).max().unwrap_or(0);
    let mut module = RowModule::new(n, p);
    let mut kept = Vec::new();
    for s in 0..=max {
        let mut level = Echelon::new();
        for c in candidates.iter().filter(|c| order_of(c) == s) {
            let _ = level.insert(JetRow { form: form_of_row(c), cert: None });
        }
        let mut rows: Vec<&JetRow> = level.sorted_rows();
        rows.reverse();
        for r in rows {
            let row = row_of_form(&r.form, p);
            if !module.contains(&row)? {
                module.push(row.clone());
                kept.push(row);
            }
        }
    }
    Ok(kept)
}

fn cc_labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("z{i}")).collect()
}

pub fn generate_cc(a: &OpMatrix, max_order: usize) -> Result<CCResult> {
    generate_cc_seeded(a, max_order, 0)
}

/// [`generate_cc`] with an explicit seed for the coordinate search.
pub fn generate_cc_seeded(a: &OpMatrix, max_order: usize, seed: u64) -> Result<CCResult> {
    generate(a, max_order, Some(seed))
}

/// [`generate_cc`] without any change of coordinates.
pub fn generate_cc_fixed_coords(a: &OpMatrix, max_order: usize) -> Result<CCResult> {
    generate(a, max_order, None)
}

fn generate(a: &OpMatrix, max_order: usize, seed: Option<u64>) -> Result<CCResult> {
    let (n, p0) = (a.n(), a.nrows());
    let s = JetSystem::from_operator(&a.plain());
    let completion = match seed {
        Some(seed) => involutive_completion(&s, max_order, seed, SEARCH_TRIES)?,
        None => complete_to_involution(&s, max_order)?,
    };
    let coords = completion.coords.clone();
    let mut candidates = syzygy_candidates(&completion.system, p0);
    if !coords.is_identity() {
        let back = coords.inverse();
        for c in candidates.iter_mut() {
            for op in c.iter_mut() {
                *op = op.change_coordinates(&back);
            }
        }
    }
    let rows = minimize(n, p0, candidates)?;
    let order = rows.iter().flat_map(|r| r.iter().map(DiffOp::order)).max().unwrap_or(0);
    let k = rows.len();
    let cc = OpMatrix::from_rows(n, p0, rows)
        .with_labels(a.target_labels().to_vec(), cc_labels(k))?
        .with_weights(a.target_weights().map(<[_]>::to_vec), None);
    debug_assert!(cc.matmul(&a.plain()).map(|z| z.is_zero()).unwrap_or(false));
    Ok(CCResult { cc, order, completion_order: completion.system.q(), coords })
}

/// Whether `cc . a` vanishes identically.
pub fn verify_cc(cc: &OpMatrix, a: &OpMatrix) -> Result<bool> {
    Ok(cc.plain().matmul(&a.plain())?.is_zero())
}

/// Chain of operators, each generating the compatibility conditions of the previous one.
#[derive(Clone, Debug)]
pub struct DiffSequence {
    pub operators: Vec<OpMatrix>,
    /// Source fiber of the first operator followed by each target fiber.
    pub fiber_dims: Vec<usize>,
    pub orders: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceSummary {
    pub fiber_dims: Vec<usize>,
    pub orders: Vec<usize>,
    pub euler_poincare: i64,
}

impl DiffSequence {
    pub fn new(first: OpMatrix) -> DiffSequence {
        DiffSequence {
            fiber_dims: vec![first.ncols(), first.nrows()],
            orders: vec![first.order()],
            operators: vec![first],
        }
    }

    pub fn push(&mut self, next: OpMatrix) -> Result<()> {
        let last = self.operators.last().expect("nonempty");
        if next.ncols() != last.nrows() {
            return Err(Error::Shape(format!(
                "operator with {} columns cannot follow one with {} rows",
                next.ncols(),
                last.nrows()
            )));
        }
        self.fiber_dims.push(next.nrows());
        self.orders.push(next.order());
        self.operators.push(next);
        Ok(())
    }

    /// Whether every consecutive composition vanishes.
    pub fn is_complex(&self) -> Result<bool> {
        for w in self.operators.windows(2) {
            if !verify_cc(&w[1], &w[0])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn summary(&self) -> SequenceSummary {
        SequenceSummary {
            fiber_dims: self.fiber_dims.clone(),
            orders: self.orders.clone(),
            euler_poincare: euler_poincare_dims(&self.fiber_dims),
        }
    }
}

/// Iterates [`generate_cc`] `steps` times, stopping early once no conditions remain.
pub fn build_sequence(a: &OpMatrix, steps: usize, max_order: usize) -> Result<DiffSequence> {
    let mut seq = DiffSequence::new(a.clone());
    for _ in 0..steps {
        let last = seq.operators.last().expect("nonempty");
        let budget = max_order.max(last.order());
        let next = generate_cc(last, budget)?.cc;
        if next.nrows() == 0 {
            break;
        }
        seq.push(next)?;
    }
    Ok(seq)
}

pub fn euler_poincare(seq: &DiffSequence) -> i64 {
    euler_poincare_dims(&seq.fiber_dims)
}

/// Alternating sum `d_0 - d_1 + d_2 - ...`.
pub fn euler_poincare_dims(dims: &[usize]) -> i64 {
    dims.iter().enumerate().map(|(i, &d)| if i % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{self, Metric};
    use crate::rowmodule::row_module_eq;

    #[test]
    fn plane_killing_gives_trace_of_riemann() {
        let r = generate_cc(&gallery::killing(2, &Metric::euclid(2)).unwrap(), 4).unwrap();
        assert_eq!(r.cc.nrows(), 1);
        assert_eq!(r.order, 2);
        assert_eq!(r.cc.row_string(0), "d22(O11) - 2*d12(O12) + d11(O22)");
    }

    #[test]
    fn contact_cc_is_zeta() {
        let r = generate_cc(&gallery::contact_system(), 4).unwrap();
        assert_eq!(r.cc.nrows(), 1);
        assert!(r.cc.entries_eq(&gallery::contact_cc()));
    }

    #[test]
    fn contact_subsystem_cc_uses_original_labels() {
        let sub = gallery::contact_system_original().select_rows(&[0, 1]);
        let r = generate_cc(&sub, 4).unwrap();
        assert_eq!(r.cc.ncols(), 2);
        assert!(verify_cc(&r.cc, &sub).unwrap());
    }

    #[test]
    fn grad_to_curl() {
        let g = gallery::grad(3).unwrap();
        let r = generate_cc(&g, 3).unwrap();
        assert_eq!(r.cc.nrows(), 3);
        assert!(row_module_eq(&r.cc, &gallery::curl()).unwrap());
        let c = generate_cc(&gallery::curl(), 3).unwrap();
        assert_eq!(c.cc.nrows(), 1);
    }

    #[test]
    fn zero_rows_are_their_own_conditions() {
        let a = OpMatrix::zeros(2, 2, 1);
        let r = generate_cc(&a, 2).unwrap();
        assert_eq!(r.cc.nrows(), 2);
        assert!(row_module_eq(&r.cc, &OpMatrix::identity(2, 2)).unwrap());
    }

    #[test]
    fn verify_cc_shapes() {
        assert!(verify_cc(&gallery::curl(), &gallery::grad(3).unwrap()).unwrap());
        assert!(matches!(verify_cc(&gallery::grad(3).unwrap(), &gallery::curl()), Err(Error::Shape(_))));
    }

    #[test]
    fn euler_poincare_counts() {
        assert_eq!(euler_poincare_dims(&[1, 3, 3, 1]), 0);
        assert_eq!(euler_poincare_dims(&[6, 20, 20, 10, 4]), 0);
        assert_eq!(euler_poincare_dims(&[5, 2]), 3);
    }

    #[test]
    fn contact_sequence() {
        let seq = build_sequence(&gallery::contact_system(), 1, 4).unwrap();
        assert_eq!(seq.fiber_dims, vec![3, 3, 1]);
        assert!(seq.is_complex().unwrap());
    }

    #[test]
    fn maxwell_cc_is_cauchy() {
        let r = generate_cc(&gallery::maxwell(), 4).unwrap();
        assert!(row_module_eq(&r.cc, &gallery::cauchy(3, &Metric::euclid(3)).unwrap()).unwrap());
    }

    #[test]
    fn killing_sequences() {
        let seq = build_sequence(&gallery::killing(3, &Metric::euclid(3)).unwrap(), 3, 4).unwrap();
        assert_eq!(seq.fiber_dims, vec![3, 6, 6, 3]);
        assert_eq!(seq.orders, vec![1, 2, 1]);
        assert_eq!(euler_poincare(&seq), 0);
        assert!(seq.is_complex().unwrap());
    }

    #[test]
    fn spacetime_killing_sequence() {
        let k = gallery::killing(4, &Metric::minkowski(4)).unwrap();
        let seq = build_sequence(&k, 2, 4).unwrap();
        assert_eq!(seq.fiber_dims, vec![4, 10, 20, 20]);
        assert_eq!(seq.orders, vec![1, 2, 1]);
        let m = Metric::minkowski(4);
        assert!(verify_cc(&gallery::div_op(4, &m).unwrap(), &gallery::einstein(4, &m).unwrap()).unwrap());
    }
}
