use nagata_core::cremona::is_standard;
use nagata_core::{
    apply_rule, elementary_quadratic, from_ruled, reduce, PicardClass, ReduceStatus, Rule,
    RuledClass,
};
use num_bigint::BigInt;
use proptest::prelude::*;

fn picard(d: i64, m: &[i64]) -> PicardClass {
    PicardClass::from_ints(d, m)
}

fn invariants(c: &PicardClass) -> (BigInt, BigInt) {
    (c.self_intersection(), c.anticanonical_degree())
}

fn ruled_for(rule: Rule, s: u32, x: i64, y: i64, m: &[i64]) -> RuledClass {
    let n = rule.arity(s);
    let m = &m[..n.min(m.len())];
    match rule {
        Rule::Rule1 | Rule::Rule3 => RuledClass::f0_ints(x, y, m),
        Rule::Rule2 | Rule::Rule4 => RuledClass::f1_ints(x, y, m),
    }
}

/// The composition of elementary transforms a rule factors through.
fn conjugate(rule: Rule, s: u32, c: &RuledClass) -> PicardClass {
    let mut p = from_ruled(c).unwrap();
    for i in 1..=s as usize {
        p = match rule {
            Rule::Rule1 | Rule::Rule2 => elementary_quadratic(&p, 0, 2 * i - 1, 2 * i).unwrap(),
            Rule::Rule3 | Rule::Rule4 => elementary_quadratic(&p, 0, 2 * i, 2 * i + 1).unwrap(),
        };
    }
    p
}

fn rule_strategy() -> impl Strategy<Value = (Rule, u32)> {
    prop_oneof![
        (1u32..=4).prop_map(|s| (Rule::Rule1, s)),
        (1u32..=4).prop_map(|s| (Rule::Rule2, s)),
        (0u32..=4).prop_map(|s| (Rule::Rule3, s)),
        (0u32..=4).prop_map(|s| (Rule::Rule4, s)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn elementary_preserves_invariants(
        d in -10i64..=10,
        m in prop::collection::vec(-10i64..=10, 3..8),
        idx in Just((0usize..8).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let l = picard(d, &m);
        let pick: Vec<usize> = idx.into_iter().filter(|&i| i < m.len()).take(3).collect();
        let img = elementary_quadratic(&l, pick[0], pick[1], pick[2]).unwrap();
        prop_assert_eq!(invariants(&img), invariants(&l));
    }

    #[test]
    fn elementary_is_an_involution(
        d in -10i64..=10,
        m in prop::collection::vec(-10i64..=10, 3..8),
        i in 0usize..3, j in 3usize..5, k in 5usize..8,
    ) {
        let l = picard(d, &m);
        let n = m.len();
        let (i, j, k) = (i % n, j % n, k % n);
        prop_assume!(i != j && j != k && i != k);
        let once = elementary_quadratic(&l, i, j, k).unwrap();
        prop_assert_eq!(elementary_quadratic(&once, i, j, k).unwrap(), l);
    }

    #[test]
    fn rules_preserve_invariants(
        (rule, s) in rule_strategy(),
        x in -10i64..=10, y in -10i64..=10,
        m in prop::collection::vec(-10i64..=10, 9..12),
    ) {
        let c = ruled_for(rule, s, x, y, &m);
        let img = apply_rule(rule, &c, s, None).unwrap();
        prop_assert_eq!(img.self_intersection(), c.self_intersection());
        prop_assert_eq!(img.anticanonical_degree(), c.anticanonical_degree());
        if rule.arity(s) > 0 {
            let (a, b) = (from_ruled(&c).unwrap(), from_ruled(&img).unwrap());
            prop_assert_eq!(invariants(&a), invariants(&b));
        }
    }

    #[test]
    fn rules_factor_through_elementary_transforms(
        (rule, s) in rule_strategy(),
        x in -10i64..=10, y in -10i64..=10,
        m in prop::collection::vec(-10i64..=10, 9..12),
    ) {
        let c = ruled_for(rule, s, x, y, &m);
        prop_assume!(c.n_points() > 0);
        let img = apply_rule(rule, &c, s, None).unwrap();
        let via = conjugate(rule, s, &c);
        prop_assert!(from_ruled(&img).unwrap().equal_up_to_permutation(&via));
    }

    #[test]
    fn reduce_preserves_invariants(
        d in 0i64..=12,
        m in prop::collection::vec(0i64..=6, 0..9),
    ) {
        let l = picard(d, &m);
        let red = reduce(&l);
        prop_assert_eq!(invariants(&red.result), invariants(&l));
        match red.status {
            ReduceStatus::Standard => prop_assert!(is_standard(&red.result)),
            ReduceStatus::DegreeNegative => prop_assert!(red.result.degree() < &BigInt::from(0)),
            ReduceStatus::TooFewPoints => prop_assert!(red.result.r() < 3),
        }
        let replayed = red.log.replay().unwrap();
        if let Some(last) = replayed {
            prop_assert!(last.as_picard().unwrap().equal_up_to_permutation(&red.result));
        }
    }

    #[test]
    fn class_text_round_trips(
        d in -50i64..=50,
        m in prop::collection::vec(-50i64..=50, 0..12),
        ruled in 0u8..3,
    ) {
        match ruled {
            0 => {
                let c = picard(d, &m);
                prop_assert_eq!(c.to_string().parse::<PicardClass>().unwrap(), c);
            }
            1 => {
                let c = RuledClass::f1_ints(d, d / 2, &m);
                prop_assert_eq!(c.to_string().parse::<RuledClass>().unwrap(), c);
            }
            _ => {
                let c = RuledClass::f0_ints(d, -d / 3, &m);
                prop_assert_eq!(c.to_string().parse::<RuledClass>().unwrap(), c);
            }
        }
    }
}

#[test]
fn rule2_matches_documented_step() {
    let c: RuledClass = "(15:8; 4^10)@F1".parse().unwrap();
    let img = apply_rule(Rule::Rule2, &c, 2, None).unwrap();
    assert_eq!(img.to_string(), "(13:6; 3,3,3,3,4,4,4,4,4,4)@F1");
}
