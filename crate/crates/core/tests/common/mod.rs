#![allow(dead_code)]

use pdmod::gallery::{self, Metric};
use pdmod::linalg::{kernel_rat, rank_rat};
use pdmod::{DiffOp, MultiIndex, OpMatrix, Rat};

/// All multi-indices of order at most `r`.
pub fn indices_up_to(n: usize, r: usize) -> Vec<MultiIndex> {
    (0..=r).flat_map(|k| MultiIndex::all_of_order(n, k)).collect()
}

/// Brute-force syzygies of the rows of a constant-coefficient operator: every combination
/// `sum_i P_i A_i = 0` with `ord P_i <= r`, as a basis of the rational solution space.
pub struct SyzygyOracle {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    unknowns: Vec<(usize, MultiIndex)>,
    basis: Vec<Vec<Rat>>,
}

impl SyzygyOracle {
    pub fn new(a: &OpMatrix, r: usize) -> SyzygyOracle {
        assert!(a.is_constant_coeff(), "oracle needs constant coefficients");
        let (n, p, m) = (a.n(), a.nrows(), a.ncols());
        let unknowns: Vec<(usize, MultiIndex)> =
            (0..p).flat_map(|i| indices_up_to(n, r).into_iter().map(move |mu| (i, mu))).collect();
        let eqs: Vec<(usize, MultiIndex)> =
            (0..m).flat_map(|j| indices_up_to(n, r + a.order()).into_iter().map(move |nu| (j, nu))).collect();
        let mut mat = vec![vec![Rat::zero(); unknowns.len()]; eqs.len()];
        for (c, (i, mu)) in unknowns.iter().enumerate() {
            let d = DiffOp::dmu(mu.clone());
            for j in 0..m {
                let prod = d.compose(&a.entry(*i, j));
                for (nu, coef) in prod.terms() {
                    let e = eqs.iter().position(|(jj, nn)| *jj == j && nn == nu).expect("equation index");
                    mat[e][c] = coef.as_const().expect("constant").clone();
                }
            }
        }
        let basis = kernel_rat(&mat, unknowns.len());
        SyzygyOracle { n, p, r, unknowns, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn to_row(&self, v: &[Rat]) -> Vec<DiffOp> {
        let mut row = vec![DiffOp::zero(); self.p];
        for (c, (i, mu)) in v.iter().zip(&self.unknowns) {
            if !c.is_zero() {
                row[*i].add_term(mu.clone(), &c.clone().into());
            }
        }
        row
    }

    pub fn syzygies(&self) -> Vec<Vec<DiffOp>> {
        self.basis.iter().map(|v| self.to_row(v)).collect()
    }

    fn to_vector(&self, row: &[DiffOp]) -> Option<Vec<Rat>> {
        let mut v = vec![Rat::zero(); self.unknowns.len()];
        for (i, op) in row.iter().enumerate() {
            for (mu, c) in op.terms() {
                let k = self.unknowns.iter().position(|(ii, m)| *ii == i && m == mu)?;
                v[k] = c.as_const()?.clone();
            }
        }
        Some(v)
    }

    /// Whether `row` reduces to zero against the oracle basis.
    pub fn contains(&self, row: &[DiffOp]) -> bool {
        let Some(v) = self.to_vector(row) else { return false };
        let mut m = self.basis.clone();
        let before = rank_rat(&m);
        m.push(v);
        rank_rat(&m) == before
    }
}

/// Gallery operators in the dimensions where they are defined.
pub fn gallery_samples() -> Vec<(String, OpMatrix)> {
    let mut out = Vec::new();
    for name in gallery::GALLERY_NAMES {
        for (n, metric) in [(2, "euclid"), (3, "euclid"), (4, "minkowski")] {
            let m = if metric == "euclid" { Metric::euclid(n) } else { Metric::minkowski(n) };
            if let Ok(a) = gallery::by_name(name, n, &m) {
                if a.n() == n && !out.iter().any(|(_, b): &(String, OpMatrix)| b == &a) {
                    out.push((format!("{name}(n={n}, {metric})"), a));
                }
            }
        }
    }
    out
}

pub fn data_file(name: &str) -> String {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub const CORPUS: &[&str] = &[
    "contact.ops",
    "contact_original.ops",
    "contact_cc.ops",
    "maxwell.ops",
    "morera.ops",
    "beltrami.ops",
    "airy.ops",
    "killing2.ops",
    "cauchy3.ops",
];
