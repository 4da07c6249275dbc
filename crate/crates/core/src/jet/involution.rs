use serde::Serialize;

use super::{binom, find_delta_regular, beta_signature, Jet, JetSystem};
use crate::coords::CoordinateChange;
use crate::error::{Error, Result};

/// 0-based class of a leading jet; order-zero jets count as class `n`.
fn jet_class(j: &Jet, n: usize) -> usize {
    j.class().unwrap_or(n - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TabularRow {
    /// Leading jet, e.g. `y2_13`.
    pub leading: String,
    /// 1-based class.
    pub class: usize,
    pub multiplicative: Vec<usize>,
    pub non_multiplicative: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JanetTabular {
    pub n: usize,
    pub q: usize,
    pub rows: Vec<TabularRow>,
    /// `beta[i-1]` is the number of rows of class `i`.
    pub beta: Vec<usize>,
    /// Set when the characters are not non-increasing, a sign of delta-irregular coordinates.
    pub delta_irregular: bool,
}

impl JanetTabular {
    /// Rows rendered as in `[1 2 3 / 1 2 •]`.
    pub fn render(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                (1..=self.n)
                    .map(|i| if i <= r.class { i.to_string() } else { "•".to_string() })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        format!("[{}]", rows.join(" / "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterTable {
    pub q: usize,
    pub n: usize,
    pub m: usize,
    /// `beta[i-1] = beta^i_q`.
    pub beta: Vec<usize>,
    /// `alpha[i-1] = alpha^i_q`.
    pub alpha: Vec<usize>,
    pub dim_g_q: usize,
    /// `sum i * alpha^i_q`, the dimension of the next symbol when involutive.
    pub dim_g_q1: usize,
}

/// Number of multi-indices of order `q` and 1-based class `i` in `n` variables.
fn class_count(n: usize, q: usize, i: usize) -> usize {
    if q == 0 {
        return usize::from(i == n);
    }
    binom(q + n - i - 1, q - 1)
}

pub fn janet_tabular(s: &JetSystem) -> JanetTabular {
    let n = s.n();
    let mut rows = Vec::new();
    let mut beta = vec![0usize; n];
    for r in s.top_rows() {
        let lead = r.leading().expect("nonzero row");
        let c = jet_class(&lead, n) + 1;
        beta[c - 1] += 1;
        rows.push(TabularRow {
            leading: format!("{lead:?}"),
            class: c,
            multiplicative: (1..=c).collect(),
            non_multiplicative: (c + 1..=n).collect(),
        });
    }
    let ch = characters(s);
    let delta_irregular = ch.alpha.windows(2).any(|w| w[0] < w[1]);
    JanetTabular { n, q: s.q(), rows, beta, delta_irregular }
}

pub fn characters(s: &JetSystem) -> CharacterTable {
    let (n, m, q) = (s.n(), s.m(), s.q());
    let mut beta = vec![0usize; n];
    for r in s.top_rows() {
        let lead = r.leading().expect("nonzero row");
        beta[jet_class(&lead, n)] += 1;
    }
    let alpha: Vec<usize> = (1..=n).map(|i| m * class_count(n, q, i) - beta[i - 1]).collect();
    let dim_g_q = alpha.iter().sum();
    let dim_g_q1 = alpha.iter().enumerate().map(|(i, a)| (i + 1) * a).sum();
    CharacterTable { q, n, m, beta, alpha, dim_g_q, dim_g_q1 }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Involution {
    Involutive,
    NotInvolutive(String),
}

impl Involution {
    pub fn is_involutive(&self) -> bool {
        matches!(self, Involution::Involutive)
    }
}

fn untracked(s: &JetSystem) -> JetSystem {
    if !s.tracks_certificates() {
        return s.clone();
    }
    let mut ech = super::Echelon::new();
    for r in s.rows().into_iter().rev() {
        let _ = ech.insert(super::JetRow { form: r.form.clone(), cert: None });
    }
    let mut out = s.with_rows(s.q(), ech);
    out.track = false;
    out
}

/// Outcome of one prolongation step, shared by the involution test and the completion loop.
struct Step {
    prolonged: JetSystem,
    new_lower: bool,
    symbol_ok: bool,
}

fn step(s: &JetSystem) -> Step {
    let p = s.prolong(1);
    let proj_len = p.rows().iter().filter(|r| r.order() <= s.q()).count();
    let new_lower = proj_len > s.len();
    let n = s.n();
    let multiplicative: usize =
        s.top_rows().iter().map(|r| jet_class(&r.leading().expect("nonzero"), n) + 1).sum();
    let top = p.rows().iter().filter(|r| r.order() == s.q() + 1).count();
    Step { prolonged: p, new_lower, symbol_ok: top == multiplicative }
}

/// Symbol criterion (multiplicative prolongations span the prolonged symbol)
/// plus the absence of new lower-order equations after one prolongation.
pub fn is_involutive(s: &JetSystem) -> Involution {
    let st = step(&untracked(s));
    if st.new_lower {
        Involution::NotInvolutive("projection of the first prolongation yields new equations".into())
    } else if !st.symbol_ok {
        Involution::NotInvolutive("non-multiplicative prolongations are needed to span the prolonged symbol".into())
    } else {
        Involution::Involutive
    }
}

/// Result of a completion: the involutive system, its characters and the coordinates used.
#[derive(Clone, Debug)]
pub struct Completion {
    pub system: JetSystem,
    pub characters: CharacterTable,
    /// Cumulative change from the input coordinates.
    pub coords: CoordinateChange,
    pub log: Vec<String>,
}

/// Prolongation/projection in the given coordinates until the system is involutive.
pub fn complete_to_involution(s: &JetSystem, max_order: usize) -> Result<Completion> {
    complete(s, max_order, None)
}

/// As [`complete_to_involution`], searching for delta-regular coordinates whenever the
/// symbol test fails.
pub fn involutive_completion(s: &JetSystem, max_order: usize, seed: u64, tries: usize) -> Result<Completion> {
    complete(s, max_order, Some((seed, tries)))
}

fn complete(s: &JetSystem, max_order: usize, search: Option<(u64, usize)>) -> Result<Completion> {
    if max_order < s.q() {
        return Err(Error::PreconditionFailed(format!("max_order {} is below the system order {}", max_order, s.q())));
    }
    let mut cur = s.clone();
    let mut log = Vec::new();
    let mut searched_at: Option<(usize, usize)> = None;
    loop {
        let st = step(&cur);
        if st.new_lower {
            cur = st.prolonged.project(cur.q()).close();
            log.push(format!("order {}: projection added equations ({} rows)", cur.q(), cur.len()));
            continue;
        }
        if st.symbol_ok {
            let characters = characters(&cur);
            log.push(format!("order {}: involutive", cur.q()));
            return Ok(Completion { coords: cur.coords().clone(), system: cur, characters, log });
        }
        if let Some((seed, tries)) = search {
            if searched_at != Some((cur.q(), cur.len())) {
                searched_at = Some((cur.q(), cur.len()));
                let id = CoordinateChange::identity(cur.n());
                let (t, changed) = find_delta_regular(&cur, seed, tries);
                if beta_signature(&cur, &t) > beta_signature(&cur, &id) {
                    log.push(format!("order {}: coordinate change {}", cur.q(), t));
                    cur = changed;
                    continue;
                }
            }
        }
        if cur.q() + 1 > max_order {
            return Err(Error::OrderBudgetExceeded { max_order });
        }
        cur = st.prolonged;
        log.push(format!("order {}: prolonged ({} rows)", cur.q(), cur.len()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::operators::OpMatrix;

    #[test]
    fn contact_characters_and_tabular() {
        let s = JetSystem::from_operator(&gallery::contact_system());
        let ch = characters(&s);
        assert_eq!(ch.alpha, vec![3, 2, 1]);
        assert_eq!(ch.beta, vec![0, 1, 2]);
        assert_eq!(ch.dim_g_q, 6);
        assert_eq!(janet_tabular(&s).render(), "[1 2 3 / 1 2 3 / 1 2 •]");
        assert!(is_involutive(&s).is_involutive());
    }

    #[test]
    fn beltrami_characters() {
        let s = JetSystem::from_operator_untracked(&gallery::beltrami());
        let ch = characters(&s);
        assert_eq!(ch.alpha, vec![18, 9, 3]);
        assert_eq!(ch.dim_g_q, 30);
        assert_eq!(ch.dim_g_q1, 45);
        assert_eq!(s.prolong(1).rows().iter().filter(|r| r.order() == 3).count(), 6 * 10 - 45);
        assert!(is_involutive(&s).is_involutive());
        let t = janet_tabular(&s);
        assert_eq!(t.beta, vec![0, 3, 3]);
    }

    #[test]
    fn maxwell_is_not_involutive_in_original_coordinates() {
        let s = JetSystem::from_operator_untracked(&gallery::maxwell());
        assert!(!is_involutive(&s).is_involutive());
        let t = CoordinateChange::from_ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]]).unwrap();
        let c = s.change_coordinates(&t);
        assert!(is_involutive(&c).is_involutive());
        assert_eq!(characters(&c).alpha, vec![9, 3, 0]);
    }

    #[test]
    fn contact_subsystem_completes_at_order_one() {
        let sub = gallery::contact_system_original().select_rows(&[0, 1]);
        let c = complete_to_involution(&JetSystem::from_operator(&sub), 6).unwrap();
        assert_eq!(c.system.q(), 1);
        assert_eq!(c.system.len(), 3);
        assert!(c.system.verify_certificates().unwrap());
    }

    #[test]
    fn injective_parametrization_completes_to_first_jets() {
        let c = complete_to_involution(&JetSystem::from_operator(&gallery::contact_parametrization()), 6).unwrap();
        assert_eq!(c.system.q(), 1);
        assert_eq!(c.system.dim(), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let s = JetSystem::from_operator(&gallery::maxwell());
        assert!(matches!(complete_to_involution(&s, 2), Err(Error::OrderBudgetExceeded { max_order: 2 })));
        assert!(matches!(complete_to_involution(&s, 1), Err(Error::PreconditionFailed(_))));
        assert!(involutive_completion(&s, 2, 0, 16).is_ok());
        assert!(complete_to_involution(&JetSystem::from_operator(&OpMatrix::zeros(3, 0, 2)), 3).is_ok());
    }
}
