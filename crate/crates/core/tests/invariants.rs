use std::collections::HashSet;

use kothe::classifier::{classify_report, recheck};
use kothe::conjugacy::{apply_generalized_shift, transform, Direction, WeightSequence};
use kothe::family::{pair, IndexKind};
use kothe::gallery::{builtin, canonical_names};
use kothe::hints::Hint;
use kothe::sets::{syndetic_scan, IndexWindowSet};
use kothe::symbol::{snake_symbol, verify_symbol};
use kothe::{Exponent, LogWeight, RatVector, Rational, Status, Symbol};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn vector() -> impl Strategy<Value = RatVector> {
    prop::collection::vec((1usize..64, -6i64..=6, 1i64..=6), 0..12)
        .prop_map(|es| RatVector::from_entries(es.into_iter().map(|(j, n, d)| (j, rat(n, d)))).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn log_weights_add_like_products(a in -50.0f64..50.0, b in -50.0f64..50.0) {
        let (x, y) = (LogWeight::new(a).unwrap(), LogWeight::new(b).unwrap());
        let s = (x + y).value();
        prop_assert!((s.exp() - a.exp() * b.exp()).abs() <= 1e-9 * a.exp() * b.exp());
        let inf = LogWeight::new(f64::INFINITY).unwrap();
        prop_assert!((x + inf).is_forbidden());
        prop_assert!((inf + x).is_forbidden());
    }

    #[test]
    fn finite_exponents_are_at_least_one(p in -5.0f64..5.0) {
        prop_assert_eq!(Exponent::finite(p).is_ok(), p >= 1.0);
    }

    #[test]
    fn vectors_store_no_zeros(x in vector(), y in vector()) {
        for v in [x.add(&y), x.sub(&y), x.sub(&x), x.scale(&Rational::from_integer(0.into())), x.backward_shift_by(3)] {
            prop_assert!(v.iter().all(|(j, s)| j >= 1 && *s != Rational::from_integer(0.into())));
        }
        prop_assert!(x.sub(&x).is_empty());
    }

    #[test]
    fn window_sets_respect_their_bounds(lo in 1usize..50, len in 0usize..200, modulus in 1usize..9) {
        let hi = lo + len;
        let a = IndexWindowSet::from_predicate(lo, hi, move |j| j % modulus == 0).unwrap();
        prop_assert!(a.members().iter().all(|&j| lo <= j && j <= hi));
        let want: Vec<usize> = (lo..=hi).filter(|j| j % modulus == 0).collect();
        prop_assert_eq!(a.members(), &want[..]);
        prop_assert!(IndexWindowSet::new(lo, hi, [lo - 1, hi + 1, hi]).unwrap().members() == [hi]);
        prop_assert!(IndexWindowSet::new(0, hi, []).is_err());
    }

    #[test]
    fn syndetic_bound_matches_brute_force(bits in prop::collection::vec(any::<bool>(), 1..300)) {
        let hi = bits.len();
        let a = IndexWindowSet::new(1, hi, (1..=hi).filter(|&j| bits[j - 1])).unwrap();
        let scan = syndetic_scan(&a);
        let Some(last) = a.members().last().copied() else {
            prop_assert!(scan.is_none());
            return Ok(());
        };
        let oracle = (1..=last).map(|j| (j..=last).find(|&i| bits[i - 1]).unwrap() - j).max().unwrap();
        prop_assert_eq!(scan.unwrap().bound, oracle);
    }

    #[test]
    fn snake_symbols_enumerate_without_repetition(a in 0usize..=2) {
        let psi = snake_symbol(move |k| k * k + a * k * (k - 1) / 2).unwrap();
        let mut seen = HashSet::new();
        let mut cur = pair(1, 1);
        seen.insert(cur);
        for p in 2..=2000 {
            cur = psi.apply(cur);
            prop_assert_ne!(cur, pair(1, 1));
            prop_assert!(seen.insert(cur), "repeat at step {}", p);
            prop_assert_eq!(psi.chi(p).unwrap(), cur);
            prop_assert_eq!(psi.position(cur).unwrap(), p);
        }
        prop_assert_ne!(verify_symbol(&psi, 2000).status, Status::CertifiedFails);
    }

    #[test]
    fn conjugacy_on_the_successor_symbol(x in vector(), ws in prop::collection::vec((1i64..=7, 1i64..=7), 80)) {
        let w = WeightSequence::from_exact("w", move |j| {
            let (n, d) = ws[(j - 1) % ws.len()];
            rat(if j % 3 == 0 { -n } else { n }, d)
        });
        let psi = Symbol::successor();
        let direct = apply_generalized_shift(&w, &psi, &x).unwrap();
        let tx = transform(&w, &psi, &x, Direction::Forward).unwrap();
        let back = transform(&w, &psi, &tx.backward_shift_by(1), Direction::Inverse).unwrap();
        prop_assert_eq!(back, direct);
        prop_assert_eq!(transform(&w, &psi, &tx, Direction::Inverse).unwrap(), x);
    }

    #[test]
    fn gallery_families_obey_declared_monotonicity(entry in 0usize..11, m in 1usize..6, k in 1usize..6, j in 1usize..5000) {
        let names = canonical_names();
        let spec = builtin(&names[entry % names.len()]).unwrap();
        let f = &spec.family;
        if !f.is_graded() {
            prop_assert_eq!(f.log_weight(m, k, j).to_bits(), f.log_weight(m, 1, j).to_bits());
        }
        for h in f.hints() {
            match h {
                Hint::DecreasingInLevel => prop_assert!(f.log_weight(m + 1, k, j) <= f.log_weight(m, k, j)),
                Hint::IncreasingInGrade => prop_assert!(f.log_weight(m, k, j) <= f.log_weight(m, k + 1, j)),
                _ => {}
            }
        }
        prop_assert!(f.log_weight(m, k, j) > f64::NEG_INFINITY);
    }
}

#[test]
fn forbidden_and_degenerate_values_are_rejected() {
    assert!(LogWeight::new(f64::NEG_INFINITY).is_err());
    assert!(LogWeight::new(f64::NAN).is_err());
    assert!(RatVector::basis(0).is_err());
    assert!(snake_symbol(|k| k).is_err());
    let stuck = Symbol::from_fn("stuck", IndexKind::Linear, |j| if j < 3 { j + 1 } else { 2 });
    assert_eq!(verify_symbol(&stuck, 10).status, Status::CertifiedFails);
}

#[test]
fn certified_verdicts_replay_on_every_entry() {
    for name in canonical_names() {
        let spec = builtin(&name).unwrap();
        let report = classify_report(&spec).unwrap();
        recheck(&report, &spec).unwrap();
    }
}
