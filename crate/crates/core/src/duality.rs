//! Differential rank, the double-duality torsion test and parametrizations.

use serde::Serialize;

use crate::algebra::{Poly, RatFunc};
use crate::cc::{generate_cc, verify_cc};
use crate::error::{Error, Result};
use crate::gallery::{self, Metric};
use crate::jet::{involutive_completion, CharacterTable, JetSystem};
use crate::linalg::rank_ratfunc;
use crate::operators::{DiffOp, OpMatrix};
use crate::rowmodule::{row_module_eq, RowModule};

const SEED: u64 = 0;
const TRIES: usize = 16;
const EXTRA_ORDERS: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct RankCertificate {
    /// Differential rank of the operator.
    pub rank: usize,
    /// Differential rank of its cokernel module.
    pub module_rank: usize,
    pub witness_rows: Vec<usize>,
    pub character_table: CharacterTable,
}

/// Full symbol `A(chi)` of a constant-coefficient operator, with `chi_i` in place of `d_i`.
fn polynomial_matrix(a: &OpMatrix) -> Vec<Vec<RatFunc>> {
    (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .map(|j| {
                    let op = a.entry(i, j);
                    let p = Poly::from_terms(
                        op.terms().map(|(mu, c)| (mu.to_monomial(0), c.as_const().cloned().expect("constant"))),
                    );
                    RatFunc::from_poly(p)
                })
                .collect()
        })
        .collect()
}

fn completion_characters(a: &OpMatrix) -> Result<CharacterTable> {
    let s = JetSystem::from_operator_untracked(&a.plain());
    Ok(involutive_completion(&s, s.q() + EXTRA_ORDERS, SEED, TRIES)?.characters)
}

/// Differential rank of the operator made of the given rows.
fn rows_rank(a: &OpMatrix, rows: &[usize]) -> Result<usize> {
    if rows.is_empty() {
        return Ok(0);
    }
    let sub = a.select_rows(rows);
    if sub.is_constant_coeff() {
        return Ok(rank_ratfunc(&polynomial_matrix(&sub)));
    }
    let ch = completion_characters(&sub)?;
    Ok(sub.ncols() - ch.alpha[ch.n - 1])
}

/// Rows chosen greedily in `order` until `target` is reached.
fn greedy_rows(a: &OpMatrix, order: &[usize], target: usize) -> Result<Vec<usize>> {
    let mut chosen = Vec::new();
    let mut rank = 0;
    for &i in order {
        if rank == target {
            break;
        }
        chosen.push(i);
        let r = rows_rank(a, &chosen)?;
        if r > rank {
            rank = r;
        } else {
            chosen.pop();
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// `rank = m - alpha^n` of the involutive completion.
pub fn differential_rank(a: &OpMatrix) -> Result<RankCertificate> {
    let ch = completion_characters(a)?;
    let module_rank = ch.alpha[ch.n - 1];
    let rank = a.ncols() - module_rank;
    let all: Vec<usize> = (0..a.nrows()).collect();
    let witness_rows = greedy_rows(a, &all, rank)?;
    Ok(RankCertificate { rank, module_rank, witness_rows, character_table: ch })
}

/// For `B` generating the compatibility conditions of `A`, checks that the cokernel ranks
/// of `A` and `B` add up to the number of rows of `A`.
pub fn rank_additivity_check(a: &OpMatrix, b: &OpMatrix) -> Result<bool> {
    if b.ncols() != a.nrows() || !verify_cc(b, a)? {
        return Err(Error::PreconditionFailed("second operator does not annihilate the first".into()));
    }
    let cc = generate_cc(a, a.order() + EXTRA_ORDERS)?.cc;
    if !row_module_eq(&cc, b)? {
        return Err(Error::PreconditionFailed("second operator does not generate the compatibility conditions".into()));
    }
    let ma = differential_rank(a)?.module_rank;
    let mb = if b.nrows() == 0 { b.ncols() } else { differential_rank(b)?.module_rank };
    Ok(ma + mb == a.ncols())
}

/// Outcome of a scalar annihilator search for one torsion generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TorsionCertificate {
    Annihilated { operator: String, order: usize },
    Uncertified,
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub d1: OpMatrix,
    pub ad_d1: OpMatrix,
    pub ad_d: OpMatrix,
    pub d: OpMatrix,
    pub d1_prime: OpMatrix,
    /// Rows of `d1_prime` that enlarge the row module of `d1`, taken greedily.
    pub torsion_generators: Vec<Vec<DiffOp>>,
    /// Indices of the generators among the rows of `d1_prime`.
    pub torsion_rows: Vec<usize>,
    /// Annihilators found in the scalar operators `P` with `P t` in the module of `d1`.
    pub annihilators: Vec<Option<DiffOp>>,
    pub torsion_free: bool,
}

impl DualityReport {
    pub fn certificates(&self) -> Vec<TorsionCertificate> {
        self.annihilators
            .iter()
            .map(|a| match a {
                Some(p) => TorsionCertificate::Annihilated { operator: p.to_string(), order: p.order() },
                None => TorsionCertificate::Uncertified,
            })
            .collect()
    }
}

fn budget(a: &OpMatrix, max_order: usize) -> usize {
    max_order.max(a.order())
}

/// Smallest scalar operator killing `row` modulo `module`: order at most 2, then 4.
pub fn certify_torsion(module: &mut RowModule, row: &[DiffOp]) -> Result<Option<DiffOp>> {
    if let Some(p) = module.annihilator(row, 2)? {
        return Ok(Some(p));
    }
    module.annihilator(row, 4)
}

/// Adjoint, compatibility conditions, adjoint, compatibility conditions; rows of the
/// result outside the row module of `d1` generate its torsion.
pub fn double_duality_test(d1: &OpMatrix, max_order: usize) -> Result<DualityReport> {
    let ad_d1 = d1.adjoint();
    let ad_d = generate_cc(&ad_d1, budget(&ad_d1, max_order))?.cc;
    let d = ad_d.adjoint();
    let d1_prime = generate_cc(&d, budget(&d, max_order))?.cc;
    let mut module = RowModule::from_matrix(d1);
    let mut grown = module.clone();
    let mut torsion_generators = Vec::new();
    let mut torsion_rows = Vec::new();
    for i in 0..d1_prime.nrows() {
        let row = d1_prime.row(i);
        if !grown.contains(&row)? {
            grown.push(row.clone());
            torsion_generators.push(row);
            torsion_rows.push(i);
        }
    }
    let annihilators =
        torsion_generators.iter().map(|t| certify_torsion(&mut module, t)).collect::<Result<Vec<_>>>()?;
    let torsion_free = torsion_generators.is_empty();
    Ok(DualityReport { d1: d1.clone(), ad_d1, ad_d, d, d1_prime, torsion_generators, torsion_rows, annihilators, torsion_free })
}

/// Preference order for rows: highest class of the leading derivative first, then index.
fn class_preference(a: &OpMatrix) -> Vec<usize> {
    let n = a.n();
    let key = |i: usize| -> usize {
        let q = a.row_order(i);
        a.row(i)
            .iter()
            .filter_map(|op| op.homogeneous_part(q).terms().map(|(mu, _)| mu.class().unwrap_or(n)).max())
            .max()
            .unwrap_or(0)
    };
    let mut idx: Vec<usize> = (0..a.nrows()).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(key(i)), i));
    idx
}

/// Parametrization of `d1` by `rank(ad(d))` potentials, `d` being the parametrization found
/// by the double-duality test.
pub fn minimum_parametrization(d1: &OpMatrix, max_order: usize) -> Result<OpMatrix> {
    let report = double_duality_test(d1, max_order)?;
    if !report.torsion_free {
        return Err(Error::NotTorsionFree { generators: report.torsion_generators.len() });
    }
    let ad_d = &report.ad_d;
    let l = differential_rank(ad_d)?.rank;
    let rows = greedy_rows(ad_d, &class_preference(ad_d), l)?;
    let selection = ad_d.select_rows(&rows);
    let labels: Vec<String> = (1..=rows.len()).map(|i| format!("phi{i}")).collect();
    let param = selection.adjoint().with_source_labels(labels);
    debug_assert!(verify_cc(d1, &param).unwrap_or(false));
    Ok(param)
}

/// `(ad(Ricci), d_i lambda^{ri})`: the adjoint of the Ricci operator parametrizes the Cauchy
/// operator once its potentials satisfy the returned first-order constraints.
pub fn relative_parametrization_ricci(n: usize, metric: &Metric) -> Result<(OpMatrix, OpMatrix)> {
    if metric.n() != n {
        return Err(Error::DegenerateMetric(format!("metric of size {} used in dimension {n}", metric.n())));
    }
    if n < 3 {
        return Err(Error::UnsupportedDimension(format!("n = {n}, need n >= 3")));
    }
    let ricci = gallery::ricci(n, metric)?;
    let x = ricci.adjoint();
    let pairs = gallery::sym_pairs(n);
    let lambda: Vec<String> = pairs.iter().map(|(i, j)| format!("lambda{}{}", i + 1, j + 1)).collect();
    let x = x.with_source_labels(lambda.clone());
    let mut constraint = OpMatrix::zeros(n, n, pairs.len());
    for r in 0..n {
        for i in 0..n {
            let col = gallery::sym_position(n, r.min(i), r.max(i));
            let e = constraint.entry(r, col).add(&DiffOp::d(i));
            constraint.set(r, col, e);
        }
    }
    let constraint = constraint.with_labels(lambda, (1..=n).map(|r| format!("c{r}")).collect())?;
    let cauchy = gallery::cauchy(n, metric)?;
    if !cauchy.matmul(&x)?.is_zero() {
        return Err(Error::Domain("Cauchy operator does not annihilate ad(Ricci)".into()));
    }
    Ok((x, constraint))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contact_ranks() {
        let r = differential_rank(&gallery::contact_system()).unwrap();
        assert_eq!((r.rank, r.module_rank), (2, 1));
        assert_eq!(r.witness_rows.len(), 2);
        let z = differential_rank(&gallery::contact_cc()).unwrap();
        assert_eq!((z.rank, z.module_rank), (1, 2));
    }

    #[test]
    fn grad_rank() {
        let r = differential_rank(&gallery::grad(3).unwrap()).unwrap();
        assert_eq!((r.rank, r.module_rank), (1, 0));
        assert_eq!(r.witness_rows, vec![0]);
    }

    #[test]
    fn additivity() {
        assert!(rank_additivity_check(&gallery::contact_system(), &gallery::contact_cc()).unwrap());
        assert!(rank_additivity_check(&gallery::grad(3).unwrap(), &gallery::curl()).unwrap());
        let id = OpMatrix::identity(3, 2);
        assert!(rank_additivity_check(&id, &OpMatrix::zeros(3, 0, 2)).unwrap());
        assert!(matches!(
            rank_additivity_check(&gallery::grad(3).unwrap(), &gallery::curl().select_rows(&[0])),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn contact_cc_double_duality() {
        let rep = double_duality_test(&gallery::contact_cc(), 4).unwrap();
        assert!(rep.torsion_free);
        assert!(verify_cc(&rep.d1, &rep.d).unwrap());
        assert!(row_module_eq(&rep.d.adjoint(), &gallery::contact_system().adjoint()).unwrap());
    }

    #[test]
    fn plane_stress_potential_is_airy() {
        let c = gallery::cauchy(2, &Metric::euclid(2)).unwrap();
        let p = minimum_parametrization(&c, 4).unwrap();
        assert_eq!(p.ncols(), 1);
        assert!(verify_cc(&c, &p).unwrap());
        assert!(row_module_eq(&p.adjoint(), &gallery::airy().adjoint()).unwrap());
    }

    #[test]
    fn contact_minimum_parametrizations() {
        let p = minimum_parametrization(&gallery::contact_system(), 4).unwrap();
        assert_eq!(p.ncols(), 1);
        assert!(row_module_eq(&p.adjoint(), &gallery::contact_parametrization().adjoint()).unwrap());
        let q = minimum_parametrization(&gallery::contact_cc(), 4).unwrap();
        assert_eq!(q.ncols(), 2);
    }

    #[test]
    fn torsion_of_decoupled_equations() {
        let curl = double_duality_test(&gallery::curl(), 3).unwrap();
        assert!(curl.torsion_free);
        assert!(row_module_eq(&curl.d.adjoint(), &gallery::grad(3).unwrap().adjoint()).unwrap());
        let t = OpMatrix::from_rows(2, 2, vec![vec![DiffOp::d(0), DiffOp::zero()], vec![DiffOp::zero(), DiffOp::d(1)]]);
        let rep = double_duality_test(&t, 3).unwrap();
        assert!(!rep.torsion_free);
        assert_eq!(rep.torsion_generators.len(), 2);
        assert!(rep.annihilators.iter().all(Option::is_some));
    }

    #[test]
    fn ricci_parametrizes_cauchy() {
        for (n, m) in [(3, Metric::euclid(3)), (4, Metric::minkowski(4))] {
            let (x, c) = relative_parametrization_ricci(n, &m).unwrap();
            assert!(gallery::cauchy(n, &m).unwrap().matmul(&x).unwrap().is_zero());
            assert_eq!(c.nrows(), n);
            let e = x.matmul(&gallery::trace_reversal(n, &m).unwrap()).unwrap();
            assert!(e.entries_eq(&gallery::einstein(n, &m).unwrap()));
        }
        assert!(matches!(relative_parametrization_ricci(2, &Metric::euclid(2)), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn space_stress_potentials() {
        let c = gallery::cauchy(3, &Metric::euclid(3)).unwrap();
        let rep = double_duality_test(&c, 4).unwrap();
        assert!(rep.torsion_free);
        assert!(row_module_eq(&rep.d.adjoint(), &gallery::riemann(3, &Metric::euclid(3)).unwrap()).unwrap());
        let p = minimum_parametrization(&c, 4).unwrap();
        assert_eq!(p.ncols(), 3);
        assert!(verify_cc(&c, &p).unwrap());
        let ch = completion_characters(&p).unwrap();
        assert_eq!(ch.alpha, vec![9, 3, 0]);
        assert_eq!(ch.dim_g_q, 12);
    }

    #[test]
    fn einstein_duality() {
        let m = Metric::minkowski(4);
        let e = gallery::einstein(4, &m).unwrap();
        assert_eq!(differential_rank(&e).unwrap().rank, 6);
        let rep = double_duality_test(&e, 4).unwrap();
        assert!(!rep.torsion_free);
        assert_eq!(rep.ad_d.nrows(), 4);
        assert_eq!(rep.d1_prime.nrows(), 20);
        assert_eq!(rep.torsion_generators.len(), 10);
        let wave = DiffOp::from_terms((0..4).map(|i| {
            let mu = crate::operators::MultiIndex::unit(i).plus_unit(i);
            (mu, RatFunc::int(if i == 3 { -1 } else { 1 }))
        }));
        for p in &rep.annihilators {
            let p = p.as_ref().expect("certified");
            assert_eq!(p.order(), 2);
            assert!(p == &wave || p == &wave.neg());
        }
        assert!(matches!(minimum_parametrization(&e, 4), Err(Error::NotTorsionFree { generators: 10 })));
    }
}
