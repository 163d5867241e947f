//! Hand-checkable values for the construction and the chain.

use num_bigint::BigUint;
use num_rational::BigRational;
use rankone::descendants::{classify_pair, pair_census, PairClass};
use rankone::heights::{build_family, comb_base, comb_construct, obstruction_product};
use rankone::markov::{cylinder_measure, stationary, CylinderWord, MarkovChainSpec};
use rankone::tower::Tower;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

#[test]
fn small_comb_example() {
    let base = comb_base(&big(3), 1, 1, &big(64)).unwrap();
    let raw: Vec<u64> = base.elements().iter().map(|e| e.try_into().unwrap()).collect();
    assert_eq!(raw, vec![5, 12, 180, 186]);
    let h = comb_construct(&big(3), 1, 1, Some(&big(64))).unwrap();
    let e: Vec<u64> = h.elements().iter().map(|e| e.try_into().unwrap()).collect();
    assert_eq!(e, vec![0, 7, 175, 181]);
    let pair = |p: [usize; 2]| [e[p[0]], e[p[1]]];
    assert_eq!(pair(h.upper_pairs()[0]), [0, 181]);
    assert_eq!(pair(h.lower_pairs()[0]), [7, 175]);
    assert_eq!(0 + 181, 7 + 175 - 1);
}

#[test]
fn negative_pair_correspondent() {
    let h = comb_construct(&big(3), 1, 1, Some(&big(64))).unwrap();
    // V = 0, W = 181, v = 7, w = 175
    let class = classify_pair(&h, &big(0), &big(7)).unwrap();
    assert_eq!(
        class,
        PairClass::NegativeMixed {
            correspondent: [big(175), big(181)]
        }
    );
    assert_eq!(0i64 - 175, 7 - 181 - 1);
}

#[test]
fn census_quarter_and_pure_share() {
    for gamma in 1..=3usize {
        let h = comb_construct(&big(7), gamma, gamma, None).unwrap();
        let c = pair_census(&h);
        assert_eq!(c.negative_fraction(), BigRational::new(1.into(), 4.into()));
        assert_eq!(
            c.pure_fraction(),
            BigRational::new(1.into(), (4 * gamma as i64).into())
        );
    }
}

#[test]
fn obstruction_bound_for_two_unit_stages() {
    let one = BigRational::from_integer(1.into());
    assert_eq!(
        one - obstruction_product(&[1, 1]),
        BigRational::new(7.into(), 16.into())
    );
}

#[test]
fn first_column_is_the_unit_interval() {
    let tower = Tower::new(&build_family(&[1]).unwrap()).unwrap();
    let c0 = tower.column(0).unwrap();
    assert_eq!(c0.height, big(1));
    assert_eq!(c0.descendant_heights, vec![big(0)]);
}

#[test]
fn kernel_entries_and_lambda() {
    let spec = MarkovChainSpec::new(0.5, 20, false).unwrap();
    assert_eq!(spec.kernel_entry(0, 1).unwrap(), 0.5);
    assert_eq!(spec.kernel_entry(0, -1).unwrap(), 0.5);
    assert_eq!(spec.kernel_entry(1, 2).unwrap(), 0.25);
    assert_eq!(spec.kernel_entry(1, 0).unwrap(), 0.75);
    let lam = stationary(&spec);
    assert!((lam.get(1) / (2.0 / 3.0) - 1.0).abs() < 1e-12);
    assert_eq!(lam.get(-3), lam.get(3));
    for i in 1..20i64 {
        let f = i as f64;
        let expected = (f + 1.0) / f * (f - 0.5) / (f + 1.5);
        assert!((lam.get(i + 1) / lam.get(i) / expected - 1.0).abs() < 1e-12);
    }
}

#[test]
fn short_cylinder_values() {
    let spec = MarkovChainSpec::new(0.4, 10, false).unwrap();
    let (k, lam) = (spec.kernel(), stationary(&spec));
    let w = |states: Vec<i64>| CylinderWord { offset: 0, states };
    assert_eq!(cylinder_measure(&k, &lam, &w(vec![0])).unwrap().value, 1.0);
    assert_eq!(cylinder_measure(&k, &lam, &w(vec![0, 1])).unwrap().value, 0.5);
    let fwd = cylinder_measure(&k, &lam, &w(vec![0, 1, 2])).unwrap().value;
    let back = cylinder_measure(&k, &lam, &w(vec![2, 1, 0])).unwrap().value;
    assert!((fwd - back).abs() <= 1e-12 * fwd);
}
