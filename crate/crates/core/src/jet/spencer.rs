use std::collections::BTreeMap;

use super::Jet;
use crate::algebra::RatFunc;
use crate::operators::MultiIndex;

/// A section of `J_r(E)`: one function `f^k_mu` per jet coordinate with `|mu| <= r`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetSection {
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub comps: BTreeMap<Jet, RatFunc>,
}

impl JetSection {
    pub fn zero(n: usize, m: usize, order: usize) -> JetSection {
        JetSection { n, m, order, comps: BTreeMap::new() }
    }

    /// The holonomic section `j_r(f)`.
    pub fn prolongation_of(n: usize, f: &[RatFunc], order: usize) -> JetSection {
        let mut s = JetSection::zero(n, f.len(), order);
        for (k, fk) in f.iter().enumerate() {
            for q in 0..=order {
                for mu in MultiIndex::all_of_order(n, q) {
                    s.set(k, &mu, crate::operators::derive(fk, &mu));
                }
            }
        }
        s
    }

    pub fn get(&self, k: usize, mu: &MultiIndex) -> RatFunc {
        self.comps.get(&Jet::new(k, mu)).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn set(&mut self, k: usize, mu: &MultiIndex, v: RatFunc) {
        let j = Jet::new(k, mu);
        if v.is_zero() {
            self.comps.remove(&j);
        } else {
            self.comps.insert(j, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }
}

/// Spencer operator `J_{q+1}(E) -> T* (x) J_q(E)`:
/// `(df)^k_{mu,i} = d_i f^k_mu - f^k_{mu+1_i}` for `|mu| <= q`. Entry `i` of the result is the
/// `dx^i` component.
pub fn spencer_apply(f: &JetSection) -> Vec<JetSection> {
    assert!(f.order >= 1, "the Spencer operator needs a section of order at least one");
    let q = f.order - 1;
    (0..f.n)
        .map(|i| {
            let mut out = JetSection::zero(f.n, f.m, q);
            for k in 0..f.m {
                for ord in 0..=q {
                    for mu in MultiIndex::all_of_order(f.n, ord) {
                        let v = f.get(k, &mu).partial(i).sub(&f.get(k, &mu.plus_unit(i)));
                        out.set(k, &mu, v);
                    }
                }
            }
            out
        })
        .collect()
}

/// Extension of the Spencer operator to 1-forms: `T* (x) J_{q+1} -> /\^2 T* (x) J_q`,
/// keyed by `(i, j)` with `i < j`.
pub fn spencer_apply_form(w: &[JetSection]) -> BTreeMap<(usize, usize), JetSection> {
    let n = w.len();
    let mut out = BTreeMap::new();
    if n == 0 {
        return out;
    }
    let (m, order) = (w[0].m, w[0].order);
    assert!(order >= 1, "the Spencer operator needs sections of order at least one");
    let q = order - 1;
    for i in 0..n {
        for j in i + 1..n {
            let mut s = JetSection::zero(n, m, q);
            for k in 0..m {
                for ord in 0..=q {
                    for mu in MultiIndex::all_of_order(n, ord) {
                        let a = w[j].get(k, &mu).partial(i).sub(&w[j].get(k, &mu.plus_unit(i)));
                        let b = w[i].get(k, &mu).partial(j).sub(&w[i].get(k, &mu.plus_unit(j)));
                        s.set(k, &mu, a.sub(&b));
                    }
                }
            }
            out.insert((i, j), s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Poly, Rat};
    use proptest::prelude::*;

    #[test]
    fn holonomic_sections_are_closed() {
        let f = RatFunc::var(0).mul(&RatFunc::var(1)).mul(&RatFunc::var(1));
        let s = JetSection::prolongation_of(2, &[f], 3);
        assert!(spencer_apply(&s).iter().all(JetSection::is_zero));
    }

    #[test]
    fn one_variable_example() {
        let mut s = JetSection::zero(1, 1, 1);
        s.set(0, &MultiIndex::zero(), RatFunc::var(0));
        let d = spencer_apply(&s);
        assert_eq!(d[0].get(0, &MultiIndex::zero()), RatFunc::one());
    }

    fn random_section() -> impl Strategy<Value = JetSection> {
        proptest::collection::vec((0i64..4, 0u16..3, 0u16..3, -3i64..4), 20).prop_map(|cs| {
            let mut s = JetSection::zero(2, 1, 3);
            let mut it = cs.into_iter();
            for q in 0..=3 {
                for mu in MultiIndex::all_of_order(2, q) {
                    let (c0, a, b, c1) = it.next().unwrap_or((0, 0, 0, 0));
                    let p = Poly::from_terms([
                        (crate::algebra::Monomial::from_exponents(&[a, b]), Rat::int(c1)),
                        (crate::algebra::Monomial::one(), Rat::int(c0)),
                    ]);
                    s.set(0, &mu, RatFunc::from_poly(p));
                }
            }
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn d_squared_vanishes(s in random_section()) {
            let w = spencer_apply(&s);
            for v in spencer_apply_form(&w).values() {
                prop_assert!(v.is_zero());
            }
        }
    }
}
