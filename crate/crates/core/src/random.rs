//! Seeded random sparse operators for property checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Rat, RatFunc};
use crate::operators::{DiffOp, MultiIndex, OpMatrix};

#[derive(Clone, Copy, Debug)]
pub struct SampleShape {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub order: usize,
    pub constant: bool,
}

fn coefficient(rng: &mut ChaCha8Rng, n: usize, constant: bool) -> RatFunc {
    let c = loop {
        let v = rng.gen_range(-3i64..=3);
        if v != 0 {
            break v;
        }
    };
    let mut f = RatFunc::int(c);
    if !constant && rng.gen_bool(0.4) {
        let i = rng.gen_range(0..n);
        f = f.add(&RatFunc::var(i).scale(&Rat::int(rng.gen_range(1i64..=2))));
    }
    f
}

fn random_index(rng: &mut ChaCha8Rng, n: usize, order: usize) -> MultiIndex {
    let k = rng.gen_range(0..=order);
    let mut e = vec![0u8; n];
    for _ in 0..k {
        e[rng.gen_range(0..n)] += 1;
    }
    MultiIndex::from_slice(&e)
}

/// Operator of the given shape whose entries are nonzero with probability one half.
pub fn random_operator(rng: &mut ChaCha8Rng, shape: SampleShape) -> OpMatrix {
    let SampleShape { n, rows, cols, order, constant } = shape;
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut row = vec![DiffOp::zero(); cols];
        for op in row.iter_mut() {
            if rng.gen_bool(0.5) {
                for _ in 0..rng.gen_range(1..=2) {
                    let mu = random_index(rng, n, order);
                    op.add_term(mu, &coefficient(rng, n, constant));
                }
            }
        }
        if row.iter().all(DiffOp::is_zero) {
            let j = rng.gen_range(0..cols);
            row[j] = DiffOp::term(random_index(rng, n, order), coefficient(rng, n, constant));
        }
        out.push(row);
    }
    OpMatrix::from_rows(n, cols, out)
}

/// Random shape with `n <= 3`, order at most 2 and at most three rows and columns.
pub fn random_shape(rng: &mut ChaCha8Rng) -> SampleShape {
    SampleShape {
        n: rng.gen_range(1..=3),
        rows: rng.gen_range(1..=3),
        cols: rng.gen_range(1..=3),
        order: rng.gen_range(1..=2),
        constant: rng.gen_bool(0.5),
    }
}

/// `count` operators drawn from a generator seeded with `seed`.
pub fn sample_operators(seed: u64, count: usize) -> Vec<OpMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let shape = random_shape(&mut rng);
            random_operator(&mut rng, shape)
        })
        .collect()
}

/// Composable pairs `(A, B)` with `A` acting after `B`.
pub fn sample_pairs(seed: u64, count: usize) -> Vec<(OpMatrix, OpMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = random_shape(&mut rng);
            let mid = rng.gen_range(1..=3);
            let b = random_operator(&mut rng, SampleShape { rows: mid, ..s });
            let a = random_operator(&mut rng, SampleShape { cols: mid, ..s });
            (a, b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_samples_repeat() {
        assert_eq!(sample_operators(7, 5), sample_operators(7, 5));
        assert!(sample_operators(0, 50).iter().all(|a| a.n() <= 3 && a.order() <= 2 && !a.is_zero()));
        for (a, b) in sample_pairs(1, 10) {
            assert!(a.matmul(&b).is_ok());
        }
    }
}
