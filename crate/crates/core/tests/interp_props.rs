use nagata_core::interp::{h0_generic, InterpolationProblem, OracleParams};
use nagata_core::{chi_class, PicardClass};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn problem(d: u64, mults: Vec<u64>, seed: u64) -> InterpolationProblem {
    InterpolationProblem { d, mults, params: OracleParams::with_seed(seed) }
}

fn class(d: u64, mults: &[u64]) -> PicardClass {
    let m: Vec<i64> = mults.iter().map(|&x| x as i64).collect();
    PicardClass::from_ints(d as i64, &m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn adding_a_condition_never_raises_h0(
        d in 0u64..=8,
        mults in prop::collection::vec(0u64..=3, 1..7),
        which in 0usize..7,
        seed in any::<u64>(),
    ) {
        let i = which % mults.len();
        let base = h0_generic(&problem(d, mults.clone(), seed)).unwrap();
        let mut more = mults.clone();
        more[i] += 1;
        let bigger = h0_generic(&problem(d, more, seed)).unwrap();
        prop_assert!(bigger.h0 <= base.h0);
    }

    #[test]
    fn h0_bounds_chi(d in 0u64..=9, mults in prop::collection::vec(0u64..=3, 0..8), seed in any::<u64>()) {
        let res = h0_generic(&problem(d, mults.clone(), seed)).unwrap();
        let chi = chi_class(&class(d, &mults)).to_i64().unwrap();
        prop_assert!(res.h0 as i64 >= chi.max(0));
        prop_assert_eq!(res.expected as i64, chi.max(0));
    }

    #[test]
    fn fixed_seed_is_deterministic(d in 0u64..=8, mults in prop::collection::vec(0u64..=3, 0..6), seed in any::<u64>()) {
        let a = h0_generic(&problem(d, mults.clone(), seed)).unwrap();
        let b = h0_generic(&problem(d, mults, seed)).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn simple_points_are_never_special() {
    for d in 0..=8u64 {
        for r in 0..=45usize {
            let res = h0_generic(&problem(d, vec![1; r], 0)).unwrap();
            assert_eq!(res.h0, res.expected, "d = {d}, r = {r}");
        }
    }
}

#[test]
fn trials_agree_on_small_systems() {
    let mut outliers = 0;
    let mut total = 0;
    for d in 0..=10u64 {
        for mu in 1..=3u64 {
            for r in 1..=8usize {
                let res = h0_generic(&problem(d, vec![mu; r], 11)).unwrap();
                let at_min = res.coranks.iter().filter(|&&c| c == res.h0).count();
                total += 1;
                if at_min + 1 < res.trials as usize {
                    outliers += 1;
                }
            }
        }
    }
    // a single disagreeing trial is tolerated; two would flag sampling trouble
    assert!(outliers <= 1, "{outliers} of {total} systems had two or more outlying trials");
}
