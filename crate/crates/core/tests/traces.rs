use nagata_core::nagata::trace::{trace, trace_step2, Check, Relation, Verdict};
use nagata_core::{Rational, RuledClass};
use proptest::prelude::*;

fn is_identity(c: &Check) -> bool {
    matches!(
        c,
        Check::ClassEqual { .. } | Check::Compare { relation: Relation::Eq, .. }
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn identities_hold_everywhere(step in 1u8..=5, r in 5u64..400, mu in 1u64..40, j in 1u64..40) {
        let p = nagata_core::profile(r).unwrap();
        prop_assume!(!p.square);
        let rep = trace(step, r, mu, j).unwrap();
        prop_assert!(rep.recheck());
        for c in rep.claims.iter().filter(|c| is_identity(&c.check)) {
            prop_assert!(c.holds, "step {} r {} mu {} j {}: {}", step, r, mu, j, c.name);
        }
    }

    #[test]
    fn step2_reproduces_displayed_class(k in 3u64..=30, mu in 1u64..=50, jr in 0.0f64..1.0) {
        let j = 1 + ((mu - 1) as f64 * jr) as u64;
        let r = k * k + 1 + (k % 2);
        let rep = trace_step2(r, mu, j).unwrap();
        let (k, a, mu, j) = (k as i64, rep.params.alpha as i64, mu as i64, j as i64);
        let mut m = vec![j; (2 * k - 2) as usize];
        m.extend(vec![mu; (a + 1) as usize]);
        let expected = RuledClass::f1_ints(k * j + mu, (k - 1) * j, &m);
        prop_assert_eq!(rep.class("after").unwrap().as_ruled().unwrap(), &expected);
        prop_assert_eq!(rep.verdict, Verdict::Pass);
    }
}

#[test]
fn step3_documented_instance() {
    let rep = trace(3, 14, 4, 3).unwrap();
    assert!(!rep.hypothetical);
    assert_eq!(rep.verdict, Verdict::Pass);
    assert_eq!(rep.value("L.K"), Some(&Rational::from_integer((-3).into())));
}

#[test]
fn unhypothetical_passes_in_case2_range() {
    // r with eps in [sqrt3 - 1, 2 sqrt2 - 2) and alpha even
    let mut seen = 0;
    for r in 30..400u64 {
        assert!(trace(5, r, 50, 0).is_err());
        let p = nagata_core::profile(r).unwrap();
        if p.square {
            continue;
        }
        let rep5 = trace(5, r, 1000, 1 + (p.epsilon.to_f64() * 1000.0) as u64).unwrap();
        if !rep5.hypothetical {
            seen += 1;
            assert_eq!(rep5.verdict, Verdict::Pass, "r = {r}: {:?}", rep5.failed_claims());
        }
    }
    assert!(seen > 0);
}
