//! Descendant sets `D(I, j) = H_i ⊕ ... ⊕ H_{j-1}` and the exhaustive
//! counting certificates built on them.
//!
//! Every descendant is stored as a component vector (one element index per
//! stage) together with its exact value.

mod census;
mod classify;
mod report;
mod search;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::heights::RankOneSpec;
use crate::value::CensusValue;

pub use census::{
    certify_conservative_inverse, certify_general_product, certify_txt,
    certify_u_obstruction, Backend, CensusConfig, CensusMode, DEFAULT_PAIR_BUDGET,
    DEFAULT_TUPLE_BUDGET,
};
pub use classify::{classify_pair, pair_census, PairCensus, PairClass};
pub use report::{BoundKind, CertificateKind, CertificateReport, Check, CSV_HEADER};

pub(crate) use classify::KindTable;

/// One descendant with its component decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descendant {
    pub base_stage: usize,
    pub target_stage: usize,
    /// Element index into `H_k` for `k = base_stage..target_stage`.
    pub components: Vec<usize>,
    pub value: BigUint,
}

/// All of `D(I, j)` for `I` the base of `C_i`, sorted by value.
#[derive(Debug, Clone)]
pub struct DescendantTable {
    base: usize,
    target: usize,
    values: Vec<BigUint>,
    components: Vec<u16>,
}

impl DescendantTable {
    pub fn base_stage(&self) -> usize {
        self.base
    }

    pub fn target_stage(&self) -> usize {
        self.target
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn width(&self) -> usize {
        self.target - self.base
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn components(&self, idx: usize) -> &[u16] {
        let w = self.width();
        &self.components[idx * w..(idx + 1) * w]
    }

    pub fn descendant(&self, idx: usize) -> Descendant {
        Descendant {
            base_stage: self.base,
            target_stage: self.target,
            components: self.components(idx).iter().map(|&c| c as usize).collect(),
            value: self.values[idx].clone(),
        }
    }

    pub fn position(&self, value: &BigUint) -> Option<usize> {
        self.values.binary_search(value).ok()
    }
}

/// `|D(I, j)|`, saturating.
pub fn descendant_count(spec: &RankOneSpec, i: usize, j: usize) -> u128 {
    spec.height_sets()[i..j]
        .iter()
        .fold(1u128, |acc, h| acc.saturating_mul(h.len() as u128))
}

pub fn descendant_table(spec: &RankOneSpec, i: usize, j: usize) -> Result<DescendantTable> {
    spec.check_range(i, j)?;
    let stages = Stages::<BigInt>::new(spec, i, j);
    let table = Table::build(&stages)?;
    Ok(DescendantTable {
        base: i,
        target: j,
        values: table
            .values
            .into_iter()
            .map(|v| v.to_biguint().expect("descendants are nonnegative"))
            .collect(),
        components: table.comps,
    })
}

/// Splits `value` into its unique components, walking from the top stage
/// down and taking the only element that leaves a reachable remainder.
pub fn decompose(spec: &RankOneSpec, value: &BigUint, i: usize, j: usize) -> Result<Descendant> {
    spec.check_range(i, j)?;
    let not_descendant = || Error::NotADescendant {
        value: value.to_string(),
        base: i,
        target: j,
    };
    let mut rest = value.clone();
    let mut components = vec![0usize; j - i];
    for k in (i..j).rev() {
        let below = spec.max_descendant(i, k);
        let h = spec.height_set(k);
        let mut found = None;
        for (idx, e) in h.elements().iter().enumerate() {
            if e <= &rest && &rest - e <= below {
                if found.is_some() {
                    return Err(Error::violation(
                        k,
                        format!("{value} decomposes ambiguously at stage {k}"),
                    ));
                }
                found = Some(idx);
            }
        }
        let idx = found.ok_or_else(not_descendant)?;
        rest -= &h.elements()[idx];
        components[k - i] = idx;
    }
    if !rest.is_zero() {
        return Err(not_descendant());
    }
    Ok(Descendant {
        base_stage: i,
        target_stage: j,
        components,
        value: value.clone(),
    })
}

/// For `a + a' = d + d' + 1` in `D(I, j)`, returns the largest stage where
/// the component sums differ, after checking that the component pairs there
/// are pure and split between the upper and lower families.
pub fn mixed_pair_witness(
    spec: &RankOneSpec,
    a: &BigUint,
    a2: &BigUint,
    d: &BigUint,
    d2: &BigUint,
    i: usize,
    j: usize,
) -> Result<usize> {
    if a + a2 != d + d2 + 1u32 {
        return Err(Error::Precondition(format!(
            "{a} + {a2} != {d} + {d2} + 1"
        )));
    }
    let comps = |v: &BigUint| -> Result<Vec<u16>> {
        Ok(decompose(spec, v, i, j)?
            .components
            .into_iter()
            .map(|c| c as u16)
            .collect())
    };
    let stages = Stages::<BigInt>::new(spec, i, j);
    witness_stage(&stages, &comps(a)?, &comps(a2)?, &comps(d)?, &comps(d2)?)
}

/// Per-stage data for a census over `D(I, j)`, in a chosen integer backend.
#[derive(Debug, Clone)]
pub(crate) struct Stages<V> {
    pub(crate) base: usize,
    pub(crate) elements: Vec<Vec<V>>,
    pub(crate) kinds: Vec<KindTable>,
}

impl<V: CensusValue> Stages<V> {
    pub(crate) fn new(spec: &RankOneSpec, i: usize, j: usize) -> Self {
        let sets = &spec.height_sets()[i..j];
        Stages {
            base: i,
            elements: sets
                .iter()
                .map(|h| {
                    h.elements()
                        .iter()
                        .map(|e| {
                            V::from_big(&BigInt::from(e.clone()))
                                .expect("backend chosen to fit every element")
                        })
                        .collect()
                })
                .collect(),
            kinds: sets.iter().map(KindTable::new).collect(),
        }
    }

    pub(crate) fn width(&self) -> usize {
        self.elements.len()
    }

    pub(crate) fn sizes(&self) -> Vec<usize> {
        self.elements.iter().map(Vec::len).collect()
    }

    #[inline]
    pub(crate) fn element(&self, p: usize, idx: u16) -> &V {
        &self.elements[p][idx as usize]
    }

    pub(crate) fn value_of(&self, comps: &[u16]) -> V {
        comps
            .iter()
            .enumerate()
            .fold(V::from_i64(0), |acc, (p, &c)| acc.add(self.element(p, c)))
    }
}

/// Exhaustive table of `D(I, j)` in a census backend, sorted by value.
#[derive(Debug, Clone)]
pub(crate) struct Table<V> {
    pub(crate) width: usize,
    pub(crate) values: Vec<V>,
    pub(crate) comps: Vec<u16>,
}

impl<V: CensusValue> Table<V> {
    pub(crate) fn build(stages: &Stages<V>) -> Result<Self> {
        let width = stages.width();
        let sizes = stages.sizes();
        let total: usize = sizes.iter().product();
        let mut raw_comps = Vec::with_capacity(total * width);
        let mut raw_values = Vec::with_capacity(total);
        let mut counter = vec![0u16; width];
        for _ in 0..total {
            raw_values.push(stages.value_of(&counter));
            raw_comps.extend_from_slice(&counter);
            for p in 0..width {
                counter[p] += 1;
                if (counter[p] as usize) < sizes[p] {
                    break;
                }
                counter[p] = 0;
            }
        }
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&x, &y| raw_values[x].cmp(&raw_values[y]));
        let mut values = Vec::with_capacity(total);
        let mut comps = Vec::with_capacity(total * width);
        for &o in &order {
            values.push(raw_values[o].clone());
            comps.extend_from_slice(&raw_comps[o * width..(o + 1) * width]);
        }
        if let Some(pos) = values.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::violation(
                stages.base,
                format!(
                    "descendant value {:?} has two decompositions",
                    values[pos].to_big()
                ),
            ));
        }
        Ok(Table {
            width,
            values,
            comps,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub(crate) fn comps(&self, idx: usize) -> &[u16] {
        &self.comps[idx * self.width..(idx + 1) * self.width]
    }
}

/// Core of [`mixed_pair_witness`] on component vectors.
pub(crate) fn witness_stage<V: CensusValue>(
    stages: &Stages<V>,
    a: &[u16],
    a2: &[u16],
    d: &[u16],
    d2: &[u16],
) -> Result<usize> {
    for p in (0..stages.width()).rev() {
        let lhs = stages.element(p, a[p]).add(stages.element(p, a2[p]));
        let rhs = stages.element(p, d[p]).add(stages.element(p, d2[p]));
        if lhs == rhs {
            continue;
        }
        let stage = stages.base + p;
        let top = stages.kinds[p].kind(a[p], a2[p]);
        let bottom = stages.kinds[p].kind(d[p], d2[p]);
        let split = top.is_pure() && bottom.is_pure() && top != bottom;
        return if split {
            Ok(stage)
        } else {
            Err(Error::violation(
                stage,
                format!("component pairs at stage {stage} are {top:?} and {bottom:?}, not a pure U/L split"),
            ))
        };
    }
    Err(Error::Precondition(
        "component sums agree at every stage".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::build_family;

    #[test]
    fn table_sizes_and_single_stage() {
        let spec = build_family(&[1, 1]).unwrap();
        let t = descendant_table(&spec, 0, 2).unwrap();
        assert_eq!(t.len(), 16);
        let single = descendant_table(&spec, 1, 2).unwrap();
        assert_eq!(single.values(), spec.height_set(1).elements());
        assert!(descendant_table(&spec, 1, 1).is_err());
        assert!(descendant_table(&spec, 0, 3).is_err());
    }

    #[test]
    fn decompose_round_trips_the_whole_table() {
        let spec = build_family(&[1, 1]).unwrap();
        let t = descendant_table(&spec, 0, 2).unwrap();
        for idx in 0..t.len() {
            let d = decompose(&spec, &t.values()[idx], 0, 2).unwrap();
            assert_eq!(d, t.descendant(idx));
        }
        let zero = decompose(&spec, &BigUint::zero(), 0, 2).unwrap();
        assert_eq!(zero.components, vec![0, 0]);
        let max = decompose(&spec, &spec.max_descendant(0, 2), 0, 2).unwrap();
        assert_eq!(max.components, vec![3, 3]);
        let err = decompose(&spec, &BigUint::from(1u32), 0, 2).unwrap_err();
        assert!(matches!(err, Error::NotADescendant { .. }));
    }

    #[test]
    fn mixed_witness_on_an_l_to_u_swap() {
        let spec = build_family(&[1, 1]).unwrap();
        let h1 = spec.height_set(1);
        let [v, w] = h1.upper_pairs()[0];
        let [lv, lw] = h1.lower_pairs()[0];
        let base0 = &spec.height_set(0).elements()[2];
        let e = |i: usize| h1.elements()[i].clone();
        // a' and a carry the lower pair at stage 1, d and d' the upper pair.
        let a = base0 + e(lv);
        let a2 = e(lw);
        let d = base0 + e(v);
        let d2 = e(w);
        assert_eq!(mixed_pair_witness(&spec, &a, &a2, &d, &d2, 0, 2).unwrap(), 1);
        let err = mixed_pair_witness(&spec, &a, &a2, &a, &a2, 0, 2).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
