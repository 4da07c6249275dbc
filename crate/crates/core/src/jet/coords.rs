use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{form_of_row, row_of_form, Echelon, JetRow, JetSystem};
use crate::algebra::Rat;
use crate::coords::CoordinateChange;

/// `(beta^n, ..., beta^1)` of the order-`q` symbol after the change `t`.
pub fn beta_signature(s: &JetSystem, t: &CoordinateChange) -> Vec<usize> {
    let n = s.n();
    let mut ech = Echelon::new();
    for form in s.symbol_forms() {
        let ops: Vec<_> = row_of_form(&form, s.m()).iter().map(|o| o.change_derivatives(t)).collect();
        let _ = ech.insert(JetRow { form: form_of_row(&ops), cert: None });
    }
    let mut beta = vec![0usize; n];
    for j in ech.pivot_jets() {
        let c = j.class().unwrap_or(n.saturating_sub(1));
        beta[c] += 1;
    }
    beta.reverse();
    beta
}

fn random_unipotent(rng: &mut ChaCha8Rng, n: usize) -> CoordinateChange {
    let mut a: Vec<Vec<Rat>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect();
    for (i, row) in a.iter_mut().enumerate() {
        for entry in row.iter_mut().take(i) {
            *entry = Rat::int(rng.gen_range(-2..=2));
        }
    }
    CoordinateChange::new(a).expect("unipotent matrices are invertible")
}

/// Best linear change among the identity and `tries` seeded random unipotent
/// lower-triangular changes, ranked by `(beta^n, ..., beta^1)`; ties keep the earlier candidate.
pub fn find_delta_regular(s: &JetSystem, seed: u64, tries: usize) -> (CoordinateChange, JetSystem) {
    let n = s.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = CoordinateChange::identity(n);
    let mut best_sig = beta_signature(s, &best);
    for _ in 0..tries {
        let t = random_unipotent(&mut rng, n);
        let sig = beta_signature(s, &t);
        if sig > best_sig {
            best_sig = sig;
            best = t;
        }
    }
    let changed = if best.is_identity() { s.clone() } else { s.change_coordinates(&best) };
    (best, changed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::jet::characters;

    #[test]
    fn maxwell_needs_a_change() {
        let s = JetSystem::from_operator_untracked(&gallery::maxwell());
        let id = CoordinateChange::identity(3);
        assert!(beta_signature(&s, &id)[0] < 3);
        let shear = CoordinateChange::from_ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]]).unwrap();
        assert_eq!(beta_signature(&s, &shear)[0], 3);
        let (t, found) = find_delta_regular(&s, 0, 16);
        assert!(!t.is_identity());
        assert_eq!(characters(&found).beta[2], 3);
    }

    #[test]
    fn regular_inputs_keep_identity() {
        let s = JetSystem::from_operator_untracked(&gallery::beltrami());
        assert!(find_delta_regular(&s, 0, 16).0.is_identity());
        let c = JetSystem::from_operator_untracked(&gallery::contact_system());
        assert!(find_delta_regular(&c, 7, 0).0.is_identity());
    }
}
