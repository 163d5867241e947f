use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use rankone::descendants::{decompose, descendant_table, pair_census};
use rankone::heights::{
    build_family, comb_construct, default_n, height_sets_from_parameters, verify_comb_properties,
    HeightSet, RankOneSpec,
};

/// Every ordered quadruple with `|x1 + x2 - x3 - x4| < M` is explained by
/// the pair structure; checked here without the library's case logic.
fn quadruples_explained(h: &HeightSet) -> bool {
    let e: Vec<BigInt> = h.elements().iter().map(|x| BigInt::from(x.clone())).collect();
    let m = BigInt::from(h.m().clone());
    let pair_of = |x: usize, y: usize| -> Option<char> {
        let key = [x.min(y), x.max(y)];
        if h.upper_pairs().iter().any(|p| [p[0].min(p[1]), p[0].max(p[1])] == key) {
            Some('U')
        } else if h.lower_pairs().iter().any(|p| [p[0].min(p[1]), p[0].max(p[1])] == key) {
            Some('L')
        } else {
            None
        }
    };
    let n = e.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let diff = &e[a] + &e[b] - &e[c] - &e[d];
                    if diff.magnitude() >= m.magnitude() {
                        continue;
                    }
                    let same = (a, b) == (c, d) || (a, b) == (d, c);
                    let ok = match (pair_of(a, b), pair_of(c, d)) {
                        _ if same => diff == BigInt::from(0),
                        (Some(x), Some(y)) if x == y => diff == BigInt::from(0),
                        (Some('U'), Some('L')) => diff == BigInt::from(-1),
                        (Some('L'), Some('U')) => diff == BigInt::from(1),
                        _ => false,
                    };
                    if !ok {
                        return false;
                    }
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn comb_output_passes_both_verifiers(m in 2u32..40, big in 1usize..4, small in 1usize..4, extra in 0u32..3) {
        let n = default_n(big, small) << extra;
        let h = comb_construct(&BigUint::from(m), big, small, Some(&n)).unwrap();
        let report = verify_comb_properties(&h);
        prop_assert!(report.passed(), "{:?}", report.counterexample);
        prop_assert_eq!(report.quadruples_checked, (h.len() as u64).pow(4));
        prop_assert!(quadruples_explained(&h));
        prop_assert_eq!(h.elements()[0].clone(), BigUint::from(0u32));
        prop_assert_eq!(h.len(), 2 * (big + small));
    }

    #[test]
    fn pair_census_counts(m in 2u32..20, big in 1usize..4, small in 1usize..4) {
        let h = comb_construct(&BigUint::from(m), big, small, None).unwrap();
        let c = pair_census(&h);
        let (g, s) = (big as u64, small as u64);
        prop_assert_eq!(c.negative_mixed, 4 * g * s);
        prop_assert_eq!(c.positive_mixed, 4 * g * s);
        prop_assert_eq!(c.pure_ordered, 2 * (g + s));
        prop_assert_eq!(c.total, c.negative_mixed + c.positive_mixed + c.pure_ordered + c.other);
    }

    #[test]
    fn family_invariants(gammas in prop::collection::vec(1usize..4, 1..4)) {
        let spec = build_family(&gammas).unwrap();
        prop_assert_eq!(spec.gamma_sequence(), gammas.clone());
        // gaps leave room for a full copy of the previous column
        for (k, h) in spec.height_sets().iter().enumerate() {
            for w in h.elements().windows(2) {
                prop_assert!(&w[1] - &w[0] >= spec.column_height(k).clone());
            }
            prop_assert!(verify_comb_properties(h).passed());
        }
        // cut/spacer parameters reproduce the elements
        let rebuilt = height_sets_from_parameters(spec.cut_counts(), spec.spacer_counts()).unwrap();
        for (k, elements) in rebuilt.iter().enumerate() {
            prop_assert_eq!(elements.as_slice(), spec.height_set(k).elements());
        }
        let back = RankOneSpec::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn descendants_are_distinct_and_decompose(gammas in prop::collection::vec(1usize..3, 2..4), pick in any::<prop::sample::Index>()) {
        let spec = build_family(&gammas).unwrap();
        let j = spec.stages();
        let table = descendant_table(&spec, 0, j).unwrap();
        let mut naive: Vec<BigUint> = vec![BigUint::from(0u32)];
        for h in spec.height_sets() {
            naive = naive.iter().flat_map(|a| h.elements().iter().map(move |e| a + e)).collect();
        }
        let distinct: HashSet<_> = naive.iter().cloned().collect();
        prop_assert_eq!(distinct.len(), naive.len());
        naive.sort();
        prop_assert_eq!(table.values(), naive.as_slice());
        let idx = pick.index(table.len());
        let d = decompose(&spec, &table.values()[idx], 0, j).unwrap();
        let sum: BigUint = d
            .components
            .iter()
            .enumerate()
            .map(|(k, &c)| spec.height_set(k).elements()[c].clone())
            .sum();
        prop_assert_eq!(sum, table.values()[idx].clone());
    }
}
