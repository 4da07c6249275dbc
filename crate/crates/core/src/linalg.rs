//! Dense exact elimination over Q and over Q(x).

use crate::algebra::{Rat, RatFunc};

/// Inverse of a square rational matrix, `None` when singular.
pub fn invert(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip().ok()?;
        for v in a[c].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivot_row = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= &(&f * y);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    let mut s = Rat::zero();
                    for t in 0..k {
                        if !row[t].is_zero() && !b[t][j].is_zero() {
                            s += &(&row[t] * &b[t][j]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Rank over Q.
pub fn rank_rat(m: &[Vec<Rat>]) -> usize {
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        let inv = a[rank][c].recip().expect("nonzero pivot");
        for r in rank + 1..a.len() {
            if !a[r][c].is_zero() {
                let f = &a[r][c] * &inv;
                let pivot_row = a[rank].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row.iter()).skip(c) {
                    *x -= &(&f * y);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Basis of the right kernel `{v : m v = 0}` over Q.
pub fn kernel_rat(m: &[Vec<Rat>], cols: usize) -> Vec<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        let Some(p) = (row..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(row, p);
        let inv = a[row][c].recip().expect("nonzero pivot");
        for v in a[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..a.len() {
            if r != row && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivot_row = a[row].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= &(&f * y);
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -&a[r][f];
            }
            v
        })
        .collect()
}

fn weight(f: &RatFunc) -> usize {
    match f {
        RatFunc::Const(_) => 1,
        RatFunc::Frac(n, d) => n.len() + d.len(),
    }
}

/// Gaussian elimination over Q(x); returns the rank and the signed product of pivots
/// (the determinant when the matrix is square and of full rank).
fn eliminate(m: &[Vec<RatFunc>]) -> (usize, RatFunc) {
    let mut a: Vec<Vec<RatFunc>> = m.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut det = RatFunc::one();
    for c in 0..cols {
        let best = (rank..a.len()).filter(|&r| !a[r][c].is_zero()).min_by_key(|&r| weight(&a[r][c]));
        let Some(p) = best else { continue };
        if p != rank {
            a.swap(rank, p);
            det = det.neg();
        }
        let piv = a[rank][c].clone();
        det = det.mul(&piv);
        let inv = piv.inv().expect("nonzero pivot");
        for r in rank + 1..a.len() {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].mul(&inv);
            let pivot_row = a[rank].clone();
            for (x, y) in a[r].iter_mut().zip(pivot_row.iter()).skip(c) {
                if !y.is_zero() {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        rank += 1;
    }
    (rank, det)
}

/// Rank over the field of rational functions.
pub fn rank_ratfunc(m: &[Vec<RatFunc>]) -> usize {
    eliminate(m).0
}

/// Determinant of a square matrix over Q(x).
pub fn det_ratfunc(m: &[Vec<RatFunc>]) -> RatFunc {
    let (rank, det) = eliminate(m);
    if rank < m.len() {
        RatFunc::zero()
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> Rat {
        Rat::int(v)
    }

    #[test]
    fn inverse_and_kernel() {
        let m = vec![vec![r(1), r(0), r(0)], vec![r(1), r(1), r(0)], vec![r(1), r(1), r(1)]];
        let inv = invert(&m).unwrap();
        let id = mat_mul(&m, &inv);
        for (i, row) in id.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { r(1) } else { r(0) });
            }
        }
        assert!(invert(&[vec![r(1), r(2)], vec![r(2), r(4)]]).is_none());
        let k = kernel_rat(&[vec![r(1), r(2), r(3)]], 3);
        assert_eq!(k.len(), 2);
        assert_eq!(rank_rat(&[vec![r(1), r(2)], vec![r(2), r(4)]]), 1);
    }

    #[test]
    fn symbolic_rank_and_det() {
        let x = RatFunc::var(0);
        let y = RatFunc::var(1);
        let m = vec![vec![x.clone(), y.clone()], vec![x.mul(&x), x.mul(&y)]];
        assert_eq!(rank_ratfunc(&m), 1);
        assert!(det_ratfunc(&m).is_zero());
        let m2 = vec![vec![x.clone(), y.clone()], vec![y.clone(), x.clone()]];
        assert_eq!(det_ratfunc(&m2), x.mul(&x).sub(&y.mul(&y)));
    }
}
