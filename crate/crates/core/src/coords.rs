use std::fmt;

use serde::Serialize;

use crate::algebra::Rat;
use crate::error::{Error, Result};
use crate::linalg;

/// Linear change of independent variables `xbar = A x`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoordinateChange {
    matrix: Vec<Vec<Rat>>,
    inverse: Vec<Vec<Rat>>,
}

impl CoordinateChange {
    pub fn new(matrix: Vec<Vec<Rat>>) -> Result<CoordinateChange> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("coordinate change must be square".into()));
        }
        let inverse = linalg::invert(&matrix).ok_or_else(|| Error::Domain("singular coordinate change".into()))?;
        Ok(CoordinateChange { matrix, inverse })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<CoordinateChange> {
        CoordinateChange::new(rows.iter().map(|r| r.iter().map(|&v| Rat::int(v)).collect()).collect())
    }

    pub fn identity(n: usize) -> CoordinateChange {
        let id: Vec<Vec<Rat>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect();
        CoordinateChange { matrix: id.clone(), inverse: id }
    }

    pub fn n(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.matrix
    }

    /// Matrix of the inverse change, expressing `x` in terms of `xbar`.
    pub fn inverse_matrix(&self) -> &[Vec<Rat>] {
        &self.inverse
    }

    pub fn inverse(&self) -> CoordinateChange {
        CoordinateChange { matrix: self.inverse.clone(), inverse: self.matrix.clone() }
    }

    /// The change `x -> other(self(x))`.
    pub fn then(&self, other: &CoordinateChange) -> CoordinateChange {
        CoordinateChange {
            matrix: linalg::mat_mul(&other.matrix, &self.matrix),
            inverse: linalg::mat_mul(&self.inverse, &other.inverse),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == CoordinateChange::identity(self.n())
    }

    /// Human-readable form such as `xbar3 = x1 + x2 + x3` for each non-trivial row.
    pub fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, row) in self.matrix.iter().enumerate() {
            let trivial = row.iter().enumerate().all(|(j, c)| if i == j { c.is_one() } else { c.is_zero() });
            if trivial {
                continue;
            }
            let mut s = String::new();
            for (j, c) in row.iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let neg = c.is_negative();
                if s.is_empty() {
                    if neg {
                        s.push('-');
                    }
                } else {
                    s.push_str(if neg { " - " } else { " + " });
                }
                if !c.abs().is_one() {
                    s.push_str(&format!("{}*", c.abs()));
                }
                s.push_str(&format!("x{}", j + 1));
            }
            out.push(format!("xbar{} = {}", i + 1, s));
        }
        out
    }
}

impl Serialize for CoordinateChange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self.matrix.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
        rows.serialize(s)
    }
}

impl fmt::Display for CoordinateChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.describe();
        if d.is_empty() {
            write!(f, "identity")
        } else {
            write!(f, "{}", d.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_change_is_rejected() {
        assert!(matches!(CoordinateChange::from_ints(&[&[1, 1], &[2, 2]]), Err(Error::Domain(_))));
    }

    #[test]
    fn composition_and_description() {
        let t = CoordinateChange::from_ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]]).unwrap();
        assert_eq!(t.describe(), vec!["xbar3 = x3 + x2 + x1".to_string()]);
        assert!(t.then(&t.inverse()).is_identity());
        assert!(CoordinateChange::identity(3).is_identity());
    }
}
