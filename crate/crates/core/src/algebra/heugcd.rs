//! Heuristic gcd of integer polynomials by evaluation at a large integer and
//! `xi`-adic reconstruction, confirmed by trial division.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Monomial, Poly, Rat};

type IPoly = BTreeMap<Monomial, BigInt>;

const MAX_BITS: u64 = 6000;

fn to_ipoly(p: &Poly) -> IPoly {
    let lcm = p.terms().fold(BigInt::one(), |l, (_, c)| l.lcm(c.denom()));
    p.terms()
        .map(|(m, c)| (m.clone(), c.numer() * (&lcm / c.denom())))
        .collect()
}

fn to_poly(p: &IPoly) -> Poly {
    Poly::from_terms(
        p.iter()
            .map(|(m, c)| (m.clone(), Rat::from_big(c.clone(), BigInt::one()).expect("unit denominator"))),
    )
}

fn content(p: &IPoly) -> BigInt {
    p.values().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn divide_coeffs(p: &IPoly, c: &BigInt) -> IPoly {
    p.iter().map(|(m, v)| (m.clone(), v / c)).collect()
}

fn norm(p: &IPoly) -> BigInt {
    p.values().map(|c| c.abs()).max().unwrap_or_default()
}

fn degree_in(p: &IPoly, v: usize) -> u16 {
    p.keys().map(|m| m.exp(v)).max().unwrap_or(0)
}

fn top_var(a: &IPoly, b: &IPoly) -> Option<usize> {
    a.keys().chain(b.keys()).filter_map(|m| m.exponents().iter().rposition(|&e| e > 0)).max()
}

fn eval(p: &IPoly, v: usize, xi: &BigInt) -> IPoly {
    let mut powers = vec![BigInt::one()];
    let mut out = IPoly::new();
    for (m, c) in p {
        let e = m.exp(v) as usize;
        while powers.len() <= e {
            let next = powers.last().expect("nonempty") * xi;
            powers.push(next);
        }
        let key = m.with_exp(v, 0);
        let acc = out.entry(key).or_default();
        *acc += c * &powers[e];
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn reconstruct(mut gamma: IPoly, xi: &BigInt, v: usize) -> IPoly {
    let half = xi / 2;
    let mut out = IPoly::new();
    let mut i: u16 = 0;
    while !gamma.is_empty() {
        let mut next = IPoly::new();
        for (m, c) in &gamma {
            let mut r = c.mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                out.insert(m.with_exp(v, i), r.clone());
            }
            let q = (c - &r) / xi;
            if !q.is_zero() {
                next.insert(m.clone(), q);
            }
        }
        gamma = next;
        i += 1;
    }
    out
}

fn divides(g: &IPoly, p: &IPoly) -> bool {
    to_poly(p).div_exact(&to_poly(g)).is_some()
}

/// gcd over the integers, or `None` when the heuristic gives up.
fn heu(a: &IPoly, b: &IPoly) -> Option<IPoly> {
    if a.is_empty() {
        return Some(b.clone());
    }
    if b.is_empty() {
        return Some(a.clone());
    }
    let gc = content(a).gcd(&content(b));
    let a = divide_coeffs(a, &content(a));
    let b = divide_coeffs(b, &content(b));
    let v = match top_var(&a, &b) {
        Some(v) => v,
        None => return Some(IPoly::from([(Monomial::one(), gc)])),
    };
    let deg = degree_in(&a, v).max(degree_in(&b, v)) as u64;
    let mut xi: BigInt = 2 * norm(&a).min(norm(&b)) + 29;
    for _ in 0..6 {
        if xi.bits() * deg.max(1) > MAX_BITS {
            return None;
        }
        let gamma = heu(&eval(&a, v, &xi), &eval(&b, v, &xi))?;
        let g = reconstruct(gamma, &xi, v);
        if !g.is_empty() {
            let g = divide_coeffs(&g, &content(&g));
            if divides(&g, &a) && divides(&g, &b) {
                return Some(g.into_iter().map(|(m, c)| (m, c * &gc)).collect());
            }
        }
        xi = xi * 73794 / 27011;
    }
    None
}

/// Monic gcd of two nonzero polynomials if the heuristic succeeds.
pub(crate) fn gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    heu(&to_ipoly(a), &to_ipoly(b)).map(|g| to_poly(&g).monic())
}
