use std::sync::Arc;

use proptest::prelude::*;
use seqindex_core::witness::{closed_interval_integers, interval_diagnostics};
use seqindex_core::{
    enumerate_minimal, find_witness, index, interval_integers, reduce_by_content, to_normal_form,
    verify_witness, GroupOrder, NormalForm, NormalizationOutcome, Sequence, WitnessOutcome,
};

fn order(n: u64) -> Arc<GroupOrder> {
    Arc::new(GroupOrder::new(n).unwrap())
}

#[test]
fn normal_form_outcomes_are_sound_up_to_100() {
    for n in 5..=100 {
        let ord = order(n);
        for s in enumerate_minimal(&ord, 4) {
            let outcome = match to_normal_form(&s) {
                Ok(o) => o,
                Err(_) => {
                    // Content above one, or no two-and-two orientation.
                    continue;
                }
            };
            match outcome {
                NormalizationOutcome::Witness(w) => assert!(verify_witness(&s, &w), "{s}"),
                NormalizationOutcome::Form { form, trail } => {
                    assert_eq!(form.e + form.c, form.a + form.b);
                    let rep = form.represented();
                    assert_eq!(rep.sum(), 2 * n);
                    assert_eq!(trail.replay(&s).unwrap(), rep, "{s}");
                    assert_eq!(index(&rep).value(), index(&s).value(), "{s}");
                }
            }
        }
    }
}

#[test]
fn content_reduction_keeps_the_index_up_to_100() {
    for n in 4..=100 {
        let ord = order(n);
        for s in enumerate_minimal(&ord, 4) {
            if let Ok(r) = reduce_by_content(&s) {
                assert_eq!(index(&r).value(), index(&s).value(), "{s}");
            }
        }
    }
}

fn random_minimal() -> impl Strategy<Value = Sequence> {
    (5u64..=1225)
        .prop_flat_map(|n| (Just(n), 1..n, 1..n, 1..n))
        .prop_filter_map("not minimal", |(n, a, b, c)| {
            let d = (3 * n - (a + b + c) % n) % n;
            if d == 0 {
                return None;
            }
            let s = Sequence::from_terms(n, &[a, b, c, d]).unwrap();
            seqindex_core::is_minimal_zero_sum(&s).then_some(s)
        })
}

fn random_form() -> impl Strategy<Value = NormalForm> {
    (7u64..=2000)
        .prop_flat_map(|n| (Just(n), 3..=(n - 1) / 2))
        .prop_flat_map(|(n, c)| (Just(n), Just(c), 2..c))
        .prop_flat_map(|(n, c, b)| (Just(n), Just(c), Just(b), 1..=b))
        .prop_filter_map("invalid form", |(n, c, b, a)| {
            let e = (a + b).checked_sub(c).filter(|&e| e >= 1)?;
            NormalForm::new(order(n), e, a, b, c).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn witness_engine_agrees_with_exhaustive_index(s in random_minimal()) {
        let exact = index(&s).as_integer().unwrap();
        match find_witness(&s).unwrap() {
            WitnessOutcome::Found(cert) => {
                prop_assert_eq!(exact, 1);
                prop_assert!(verify_witness(&s, &cert.witness));
            }
            WitnessOutcome::HighIndex(h) => prop_assert_eq!(h.index(), exact),
        }
    }

    #[test]
    fn interval_membership_is_exact(nf in random_form(), k in 1u64..40) {
        let n = nf.n();
        let members = interval_integers(k, &nf);
        let expected: Vec<u64> = (0..=k * n / nf.b + 1)
            .filter(|&m| k * n <= m * nf.c && m * nf.b < k * n)
            .collect();
        prop_assert_eq!(members, expected);
        let closed: Vec<u64> = closed_interval_integers(k, &nf).collect();
        let expected: Vec<u64> = (0..=k * n / nf.b + 1)
            .filter(|&m| k * n <= m * nf.c && m * nf.b <= k * n)
            .collect();
        prop_assert_eq!(closed, expected);
    }

    #[test]
    fn diagnostics_satisfy_their_definitions(nf in random_form()) {
        let d = interval_diagnostics(&nf).unwrap();
        let count = |k: u64| interval_integers(k, &nf).len();
        prop_assert!(count(d.k1) >= 1);
        prop_assert!((1..d.k1).all(|j| count(j) == 0));
        prop_assert!(count(d.l) >= 3);
        prop_assert!((1..d.l).all(|j| count(j) <= 2));
        prop_assert!(d.k1 <= d.l);
    }
}
