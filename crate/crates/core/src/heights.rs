//! Height sets and the rank-one specs built from them.
//!
//! A height set `H_k` lists the offsets at which the copies of column `C_k`
//! sit inside `C_{k+1}`. The sets built here come in two families of
//! designated pairs: upper pairs `{V, W}` and lower pairs `{v, w}` with
//! `V + W = v + w - 1`, and every small-difference quadruple of elements is
//! explained by that pair structure alone.


use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairFamily {
    Upper,
    Lower,
}

impl PairFamily {
    pub fn label(self) -> &'static str {
        match self {
            PairFamily::Upper => "U",
            PairFamily::Lower => "L",
        }
    }
}

/// Position of an element inside the designated pair structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Role {
    pub family: PairFamily,
    /// Index of the pair inside its family.
    pub pair: usize,
    /// `true` for `V_r` / `v_s`, `false` for `W_r` / `w_s`.
    pub first: bool,
}

/// One stage's height set together with its pair structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightSet {
    stage: usize,
    elements: Vec<BigUint>,
    upper_pairs: Vec<[usize; 2]>,
    lower_pairs: Vec<[usize; 2]>,
    m: BigUint,
    roles: Vec<Option<Role>>,
}

impl HeightSet {
    /// Assembles a height set from raw parts.
    ///
    /// Only checks that the elements are strictly increasing and that the pair
    /// indices are in range and pairwise disjoint; the comb properties
    /// are checked by [`HeightSet::validate_structure`] and
    /// [`verify_comb_properties`].
    pub fn from_parts(
        stage: usize,
        elements: Vec<BigUint>,
        upper_pairs: Vec<[usize; 2]>,
        lower_pairs: Vec<[usize; 2]>,
        m: BigUint,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::violation(stage, "height set is empty"));
        }
        if elements.len() > u16::MAX as usize {
            return Err(Error::violation(stage, "height set has more than 65535 elements"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::violation(
                stage,
                "elements must be strictly increasing",
            ));
        }
        let mut roles = vec![None; elements.len()];
        for (family, pairs) in [
            (PairFamily::Upper, &upper_pairs),
            (PairFamily::Lower, &lower_pairs),
        ] {
            for (pair, idx) in pairs.iter().enumerate() {
                for (slot, &i) in idx.iter().enumerate() {
                    if i >= elements.len() {
                        return Err(Error::violation(
                            stage,
                            format!("pair index {i} out of range"),
                        ));
                    }
                    if roles[i].is_some() {
                        return Err(Error::violation(
                            stage,
                            format!("element index {i} belongs to more than one pair"),
                        ));
                    }
                    roles[i] = Some(Role {
                        family,
                        pair,
                        first: slot == 0,
                    });
                }
            }
        }
        Ok(HeightSet {
            stage,
            elements,
            upper_pairs,
            lower_pairs,
            m,
            roles,
        })
    }

    /// A height set with no designated pairs, for analysing arbitrary sumsets.
    pub fn plain(stage: usize, mut elements: Vec<BigUint>) -> Result<Self> {
        elements.sort();
        HeightSet::from_parts(stage, elements, Vec::new(), Vec::new(), BigUint::one())
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn with_stage(mut self, stage: usize) -> Self {
        self.stage = stage;
        self
    }

    pub fn elements(&self) -> &[BigUint] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn upper_pairs(&self) -> &[[usize; 2]] {
        &self.upper_pairs
    }

    pub fn lower_pairs(&self) -> &[[usize; 2]] {
        &self.lower_pairs
    }

    /// The separation parameter `M`.
    pub fn m(&self) -> &BigUint {
        &self.m
    }

    /// Number of upper pairs (`Γ`).
    pub fn big_gamma(&self) -> usize {
        self.upper_pairs.len()
    }

    /// Number of lower pairs (`γ`).
    pub fn small_gamma(&self) -> usize {
        self.lower_pairs.len()
    }

    pub fn has_pairs(&self) -> bool {
        !self.upper_pairs.is_empty() || !self.lower_pairs.is_empty()
    }

    pub fn role(&self, idx: usize) -> Option<Role> {
        self.roles.get(idx).copied().flatten()
    }

    pub fn index_of(&self, value: &BigUint) -> Option<usize> {
        self.elements.binary_search(value).ok()
    }

    pub fn max_element(&self) -> &BigUint {
        self.elements.last().expect("height sets are nonempty")
    }

    /// Index of the partner of element `idx` inside its designated pair.
    pub fn partner(&self, idx: usize) -> Option<usize> {
        let role = self.role(idx)?;
        let pair = match role.family {
            PairFamily::Upper => self.upper_pairs[role.pair],
            PairFamily::Lower => self.lower_pairs[role.pair],
        };
        Some(if role.first { pair[1] } else { pair[0] })
    }

    /// The family of the unordered pair `{x, y}` if it is one of the
    /// designated pairs.
    pub fn pure_family(&self, x: usize, y: usize) -> Option<PairFamily> {
        if x == y {
            return None;
        }
        let role = self.role(x)?;
        (self.partner(x) == Some(y)).then_some(role.family)
    }

    /// Smallest gap between consecutive elements, if there are at least two.
    pub fn min_gap(&self) -> Option<BigUint> {
        self.elements.windows(2).map(|w| &w[1] - &w[0]).min()
    }

    /// Shift every element down so the minimum becomes 0. Sum differences
    /// `x1 + x2 - x3 - x4` are unchanged.
    pub fn normalized(&self) -> HeightSet {
        let shift = self.elements[0].clone();
        let mut out = self.clone();
        for e in &mut out.elements {
            *e -= &shift;
        }
        out
    }

    /// Structural invariants: counts, pair cover and `V + W = v + w - 1`.
    pub fn validate_structure(&self) -> Result<()> {
        if !self.has_pairs() {
            return Ok(());
        }
        let stage = self.stage;
        if self.upper_pairs.is_empty() || self.lower_pairs.is_empty() {
            return Err(Error::violation(
                stage,
                "both pair families must be nonempty",
            ));
        }
        let expected = 2 * self.big_gamma() + 2 * self.small_gamma();
        if self.elements.len() != expected {
            return Err(Error::violation(
                stage,
                format!(
                    "|H| = {} but 2*Gamma + 2*gamma = {expected}",
                    self.elements.len()
                ),
            ));
        }
        let report = verify_property_one(self);
        if !report {
            return Err(Error::violation(stage, "V + W != v + w - 1 for some cross pair"));
        }
        Ok(())
    }
}

/// Result of the exhaustive check of the two pair properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CombReport {
    pub property1_ok: bool,
    pub property2_ok: bool,
    pub quadruples_checked: u64,
    pub counterexample: Option<CombCounterexample>,
}

impl CombReport {
    pub fn passed(&self) -> bool {
        self.property1_ok && self.property2_ok
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CombCounterexample {
    /// Element indices `(x1, x2, x3, x4)`.
    pub indices: [usize; 4],
    /// `x1 + x2 - x3 - x4`.
    pub difference: String,
    /// How many of the four cases held (anything but 1 is a failure).
    pub cases_matched: u8,
}

fn verify_property_one(h: &HeightSet) -> bool {
    let sum = |p: &[usize; 2]| &h.elements[p[0]] + &h.elements[p[1]];
    h.upper_pairs.iter().all(|u| {
        let upper = sum(u) + 1u32;
        h.lower_pairs.iter().all(|l| upper == sum(l))
    })
}

/// Exhaustively checks both pair properties over all ordered quadruples.
pub fn verify_comb_properties(h: &HeightSet) -> CombReport {
    let property1_ok = verify_property_one(h);
    let n = h.elements.len();
    let values: Vec<BigInt> = h.elements.iter().map(|e| BigInt::from(e.clone())).collect();
    let mut sums = vec![BigInt::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            sums[a * n + b] = &values[a] + &values[b];
        }
    }
    let m = BigInt::from(h.m.clone());
    let one = BigInt::one();
    let minus_one = -BigInt::one();
    let mut checked = 0u64;
    let mut counterexample = None;

    'outer: for x1 in 0..n {
        for x2 in 0..n {
            let s12 = &sums[x1 * n + x2];
            let fam12 = h.pure_family(x1, x2);
            for x3 in 0..n {
                for x4 in 0..n {
                    checked += 1;
                    let diff = s12 - &sums[x3 * n + x4];
                    if diff.abs() >= m {
                        continue;
                    }
                    let fam34 = h.pure_family(x3, x4);
                    let same = (x1 == x3 && x2 == x4) || (x1 == x4 && x2 == x3);
                    let equal_pure =
                        !same && diff.is_zero() && fam12.is_some() && fam12 == fam34;
                    let up_down = diff == minus_one
                        && fam12 == Some(PairFamily::Upper)
                        && fam34 == Some(PairFamily::Lower);
                    let down_up = diff == one
                        && fam12 == Some(PairFamily::Lower)
                        && fam34 == Some(PairFamily::Upper);
                    let cases = [same, equal_pure, up_down, down_up]
                        .iter()
                        .filter(|&&c| c)
                        .count() as u8;
                    if cases != 1 {
                        counterexample = Some(CombCounterexample {
                            indices: [x1, x2, x3, x4],
                            difference: diff.to_string(),
                            cases_matched: cases,
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    CombReport {
        property1_ok,
        property2_ok: counterexample.is_none(),
        quadruples_checked: checked,
        counterexample,
    }
}

/// Default choice of the even parameter `n`: `2^(2(Γ+γ)+2)`.
pub fn default_n(big_gamma: usize, small_gamma: usize) -> BigUint {
    BigUint::one() << (2 * (big_gamma + small_gamma) + 2)
}

/// The un-normalized construction: base set scaled by `M`, with `1`
/// subtracted from every scaled `V_r`. The minimum element is `2M - 1`.
pub fn comb_base(
    m: &BigUint,
    big_gamma: usize,
    small_gamma: usize,
    n: &BigUint,
) -> Result<HeightSet> {
    let mut tagged: Vec<(BigUint, PairFamily, usize, bool)> =
        Vec::with_capacity(2 * (big_gamma + small_gamma));
    for r in 1..=big_gamma {
        let p = BigUint::one() << r;
        tagged.push((m * &p - 1u32, PairFamily::Upper, r - 1, true));
        tagged.push((m * (n - &p), PairFamily::Upper, r - 1, false));
    }
    for s in 1..=small_gamma {
        let p = BigUint::one() << (big_gamma + s);
        tagged.push((m * &p, PairFamily::Lower, s - 1, true));
        tagged.push((m * (n - &p), PairFamily::Lower, s - 1, false));
    }
    tagged.sort_by(|a, b| a.0.cmp(&b.0));

    let mut upper = vec![[usize::MAX; 2]; big_gamma];
    let mut lower = vec![[usize::MAX; 2]; small_gamma];
    for (idx, (_, family, pair, first)) in tagged.iter().enumerate() {
        let slot = if *first { 0 } else { 1 };
        match family {
            PairFamily::Upper => upper[*pair][slot] = idx,
            PairFamily::Lower => lower[*pair][slot] = idx,
        }
    }
    let elements = tagged.into_iter().map(|t| t.0).collect();
    HeightSet::from_parts(0, elements, upper, lower, m.clone())
}

/// Builds a normalized height set with `Γ` upper and `γ` lower pairs whose
/// small-difference quadruples are all explained by the pair structure.
pub fn comb_construct(
    m: &BigUint,
    big_gamma: usize,
    small_gamma: usize,
    n_choice: Option<&BigUint>,
) -> Result<HeightSet> {
    if *m < BigUint::from(2u32) {
        return Err(Error::InvalidParameter(format!("M must be at least 2, got {m}")));
    }
    if big_gamma == 0 || small_gamma == 0 {
        return Err(Error::InvalidParameter(
            "Gamma and gamma must be positive".into(),
        ));
    }
    let min_n = default_n(big_gamma, small_gamma);
    let n = match n_choice {
        Some(n) => {
            if n.bit(0) {
                return Err(Error::InvalidParameter(format!("n must be even, got {n}")));
            }
            if *n < min_n {
                return Err(Error::InvalidParameter(format!(
                    "n = {n} is below the minimum {min_n}"
                )));
            }
            n.clone()
        }
        None => min_n,
    };
    Ok(comb_base(m, big_gamma, small_gamma, &n)?.normalized())
}

/// A rank-one transformation described by its height sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOneSpec {
    height_sets: Vec<HeightSet>,
    cut_counts: Vec<usize>,
    spacer_counts: Vec<Vec<BigUint>>,
    column_heights: Vec<BigUint>,
}

impl Default for RankOneSpec {
    fn default() -> Self {
        RankOneSpec::empty()
    }
}

impl RankOneSpec {
    /// Only the column `C_0` (the unit interval).
    pub fn empty() -> Self {
        RankOneSpec {
            height_sets: Vec::new(),
            cut_counts: Vec::new(),
            spacer_counts: Vec::new(),
            column_heights: vec![BigUint::one()],
        }
    }

    pub fn from_height_sets(sets: Vec<HeightSet>) -> Result<Self> {
        let mut spec = RankOneSpec::empty();
        for h in sets {
            spec.push_stage(h)?;
        }
        Ok(spec)
    }

    /// Appends stage `k = self.stages()`, deriving its cut and spacer counts.
    pub fn push_stage(&mut self, h: HeightSet) -> Result<()> {
        let k = self.stages();
        if h.stage() != k {
            return Err(Error::violation(
                k,
                format!("height set is labelled stage {}", h.stage()),
            ));
        }
        if !h.elements()[0].is_zero() {
            return Err(Error::violation(k, "0 must belong to every height set"));
        }
        h.validate_structure()?;
        let hk = self.column_heights[k].clone();
        let mut spacers = Vec::with_capacity(h.len());
        for (m, w) in h.elements().windows(2).enumerate() {
            let gap = &w[1] - &w[0];
            if gap < hk {
                return Err(Error::violation(
                    k,
                    format!("gap {gap} between elements {m} and {} is below h_{k} = {hk}", m + 1),
                ));
            }
            spacers.push(gap - &hk);
        }
        spacers.push(BigUint::zero());
        let r = h.len();
        let next = &hk * BigUint::from(r) + spacers.iter().sum::<BigUint>();
        self.cut_counts.push(r);
        self.spacer_counts.push(spacers);
        self.column_heights.push(next);
        self.height_sets.push(h);
        Ok(())
    }

    pub fn stages(&self) -> usize {
        self.height_sets.len()
    }

    pub fn height_sets(&self) -> &[HeightSet] {
        &self.height_sets
    }

    pub fn height_set(&self, k: usize) -> &HeightSet {
        &self.height_sets[k]
    }

    pub fn cut_counts(&self) -> &[usize] {
        &self.cut_counts
    }

    /// Spacers `s_{k,m}` placed above subcolumn `m` at stage `k`; the last
    /// entry of each stage (above the last subcolumn) is 0.
    pub fn spacer_counts(&self) -> &[Vec<BigUint>] {
        &self.spacer_counts
    }

    /// Column heights `h_0 = 1, h_1, ..., h_K`.
    pub fn column_heights(&self) -> &[BigUint] {
        &self.column_heights
    }

    pub fn column_height(&self, n: usize) -> &BigUint {
        &self.column_heights[n]
    }

    /// `max (H_i ⊕ ... ⊕ H_{j-1})`.
    pub fn max_descendant(&self, i: usize, j: usize) -> BigUint {
        self.height_sets[i..j]
            .iter()
            .map(|h| h.max_element().clone())
            .sum()
    }

    pub fn check_range(&self, i: usize, j: usize) -> Result<()> {
        if i >= j || j > self.stages() {
            return Err(Error::StageRange {
                base: i,
                target: j,
                stages: self.stages(),
            });
        }
        Ok(())
    }

    /// Lower pair counts `γ_k` per stage.
    pub fn gamma_sequence(&self) -> Vec<usize> {
        self.height_sets.iter().map(HeightSet::small_gamma).collect()
    }

    /// `∏ (1 - 1/(4 γ_k))` over stages that carry pairs.
    pub fn obstruction_product(&self) -> BigRational {
        obstruction_product(&self.gamma_sequence())
    }

    pub fn to_json(&self) -> String {
        let doc = SpecDocument {
            stages: self
                .height_sets
                .iter()
                .map(|h| StageDocument {
                    k: h.stage(),
                    m: h.m().to_string(),
                    big_gamma: h.big_gamma(),
                    gamma: h.small_gamma(),
                    elements: h.elements().iter().map(ToString::to_string).collect(),
                    upper_pairs: h.upper_pairs().to_vec(),
                    lower_pairs: h.lower_pairs().to_vec(),
                })
                .collect(),
            column_heights: self.column_heights.iter().map(ToString::to_string).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("spec documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDocument =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let mut sets = Vec::with_capacity(doc.stages.len());
        for stage in doc.stages {
            let elements = stage
                .elements
                .iter()
                .map(|s| parse_biguint(s))
                .collect::<Result<Vec<_>>>()?;
            let h = HeightSet::from_parts(
                stage.k,
                elements,
                stage.upper_pairs,
                stage.lower_pairs,
                parse_biguint(&stage.m)?,
            )?;
            if h.big_gamma() != stage.big_gamma || h.small_gamma() != stage.gamma {
                return Err(Error::violation(
                    stage.k,
                    "Gamma/gamma disagree with the pair lists",
                ));
            }
            sets.push(h);
        }
        let spec = RankOneSpec::from_height_sets(sets)?;
        let heights = doc
            .column_heights
            .iter()
            .map(|s| parse_biguint(s))
            .collect::<Result<Vec<_>>>()?;
        if heights != spec.column_heights {
            return Err(Error::violation(
                spec.stages(),
                "column_heights disagree with the heights derived from the height sets",
            ));
        }
        Ok(spec)
    }
}

fn parse_biguint(s: &str) -> Result<BigUint> {
    s.parse::<BigUint>()
        .map_err(|_| Error::Format(format!("expected a decimal integer, got {s:?}")))
}

#[derive(Serialize, Deserialize)]
struct SpecDocument {
    stages: Vec<StageDocument>,
    column_heights: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StageDocument {
    k: usize,
    #[serde(rename = "M")]
    m: String,
    #[serde(rename = "Gamma")]
    big_gamma: usize,
    gamma: usize,
    elements: Vec<String>,
    upper_pairs: Vec<[usize; 2]>,
    lower_pairs: Vec<[usize; 2]>,
}

/// Rebuilds the height sets from cut counts and spacer counts (the inverse of
/// what [`RankOneSpec::push_stage`] derives).
pub fn height_sets_from_parameters(
    cut_counts: &[usize],
    spacer_counts: &[Vec<BigUint>],
) -> Result<Vec<Vec<BigUint>>> {
    if cut_counts.len() != spacer_counts.len() {
        return Err(Error::InvalidParameter(
            "cut and spacer counts cover different numbers of stages".into(),
        ));
    }
    let mut h = BigUint::one();
    let mut out = Vec::with_capacity(cut_counts.len());
    for (k, (&r, spacers)) in cut_counts.iter().zip(spacer_counts).enumerate() {
        if r < 2 || spacers.len() != r {
            return Err(Error::violation(k, "need r_k >= 2 and r_k spacer entries"));
        }
        let mut elements = Vec::with_capacity(r);
        let mut e = BigUint::zero();
        elements.push(e.clone());
        for s in &spacers[..r - 1] {
            e += &h + s;
            elements.push(e.clone());
        }
        h = &h * BigUint::from(r) + spacers.iter().sum::<BigUint>();
        out.push(elements);
    }
    Ok(out)
}

/// The next separation parameter: `2 max D([0,1], k) + h_k + 2`.
pub fn schedule_m(spec_so_far: &RankOneSpec) -> BigUint {
    let k = spec_so_far.stages();
    let max_d = spec_so_far.max_descendant(0, k);
    max_d * 2u32 + spec_so_far.column_height(k) + 2u32
}

#[derive(Debug, Clone, Default)]
pub struct FamilyOptions {
    /// Added to every scheduled `M_k`.
    pub m_margin: BigUint,
}

/// Builds the family with `Γ_k = γ_k = gamma_seq[k]`.
pub fn build_family(gamma_seq: &[usize]) -> Result<RankOneSpec> {
    build_family_with(gamma_seq, &FamilyOptions::default())
}

pub fn build_family_with(gamma_seq: &[usize], opts: &FamilyOptions) -> Result<RankOneSpec> {
    let mut spec = RankOneSpec::empty();
    for (k, &gamma) in gamma_seq.iter().enumerate() {
        if gamma == 0 {
            return Err(Error::InvalidParameter(format!(
                "stage {k}: gamma must be positive"
            )));
        }
        let m = schedule_m(&spec) + &opts.m_margin;
        let h = comb_construct(&m, gamma, gamma, None)
            .map_err(|e| Error::InvalidParameter(format!("stage {k}: {e}")))?
            .with_stage(k);
        spec.push_stage(h)?;
    }
    Ok(spec)
}

/// `∏ (1 - 1/(4 γ))` as an exact rational; stages with `γ = 0` are skipped.
pub fn obstruction_product(gammas: &[usize]) -> BigRational {
    gammas
        .iter()
        .filter(|&&g| g > 0)
        .fold(BigRational::one(), |acc, &g| {
            let g = BigInt::from(4 * g);
            acc * BigRational::new(&g - 1, g)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn construct_small_case_matches_hand_arithmetic() {
        let h = comb_construct(&big(3), 1, 1, Some(&big(64))).unwrap();
        assert_eq!(h.elements(), &[big(0), big(7), big(175), big(181)]);
        let [u0, u1] = h.upper_pairs()[0];
        let [l0, l1] = h.lower_pairs()[0];
        assert_eq!((&h.elements()[u0], &h.elements()[u1]), (&big(0), &big(181)));
        assert_eq!((&h.elements()[l0], &h.elements()[l1]), (&big(7), &big(175)));
        assert!(verify_comb_properties(&h).passed());
    }

    #[test]
    fn base_values_before_normalization() {
        let h = comb_base(&big(2), 1, 1, &big(64)).unwrap();
        let get = |p: [usize; 2]| (h.elements()[p[0]].clone(), h.elements()[p[1]].clone());
        let (v, w) = get(h.upper_pairs()[0]);
        let (lv, lw) = get(h.lower_pairs()[0]);
        assert_eq!((v.clone(), w.clone()), (big(3), big(124)));
        assert_eq!((lv.clone(), lw.clone()), (big(8), big(120)));
        assert_eq!(v + w, lv + lw - 1u32);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(comb_construct(&big(1), 1, 1, None).is_err());
        assert!(comb_construct(&big(3), 0, 1, None).is_err());
        assert!(comb_construct(&big(3), 1, 1, Some(&big(65))).is_err());
        assert!(comb_construct(&big(3), 1, 1, Some(&big(32))).is_err());
    }

    #[test]
    fn unstructured_quadruple_is_a_counterexample() {
        let h = HeightSet::from_parts(
            0,
            (0..4).map(big).collect(),
            Vec::new(),
            Vec::new(),
            big(10),
        )
        .unwrap();
        let report = verify_comb_properties(&h);
        assert!(report.property1_ok);
        assert!(!report.property2_ok);
        assert!(report.counterexample.is_some());
    }

    #[test]
    fn normalization_preserves_verdict() {
        for (m, g) in [(2u64, 1usize), (5, 2), (7, 3)] {
            let n = default_n(g, g);
            let raw = comb_base(&big(m), g, g, &n).unwrap();
            let norm = raw.normalized();
            assert_eq!(
                verify_comb_properties(&raw).passed(),
                verify_comb_properties(&norm).passed()
            );
            assert!(verify_comb_properties(&norm).passed());
            assert!(norm.min_gap().unwrap() >= big(m));
        }
    }

    #[test]
    fn schedule_starts_at_three_and_grows() {
        let mut spec = RankOneSpec::empty();
        assert_eq!(schedule_m(&spec), big(3));
        let mut last = big(0);
        for k in 0..3 {
            let m = schedule_m(&spec);
            assert!(m > last);
            last = m.clone();
            spec.push_stage(comb_construct(&m, 1, 1, None).unwrap().with_stage(k))
                .unwrap();
        }
        let spec1 = build_family(&[1]).unwrap();
        assert_eq!(schedule_m(&spec1), big(2 * 181 + 182 + 2));
    }

    #[test]
    fn single_stage_parameters() {
        let spec = build_family(&[1]).unwrap();
        assert_eq!(spec.cut_counts(), &[4]);
        assert_eq!(spec.spacer_counts()[0], vec![big(6), big(167), big(5), big(0)]);
        assert_eq!(spec.column_height(1), &big(4 + 6 + 167 + 5));
    }

    #[test]
    fn parameters_round_trip_to_elements() {
        let spec = build_family(&[1, 2, 1]).unwrap();
        let rebuilt = height_sets_from_parameters(spec.cut_counts(), spec.spacer_counts()).unwrap();
        for (h, e) in spec.height_sets().iter().zip(&rebuilt) {
            assert_eq!(h.elements(), e.as_slice());
        }
    }

    #[test]
    fn json_round_trip_and_broken_gap() {
        let spec = build_family(&[1, 2]).unwrap();
        let text = spec.to_json();
        assert_eq!(RankOneSpec::from_json(&text).unwrap(), spec);

        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["stages"][1]["elements"][1] = serde_json::Value::String("1".into());
        let err = RankOneSpec::from_json(&doc.to_string()).unwrap_err();
        assert!(matches!(err, Error::SpecViolation { stage: 1, .. }), "{err}");
    }

    #[test]
    fn obstruction_product_examples() {
        let p = obstruction_product(&[2, 5, 17]);
        let expected = BigRational::new(7.into(), 8.into())
            * BigRational::new(19.into(), 20.into())
            * BigRational::new(67.into(), 68.into());
        assert_eq!(p, expected);
        assert!(p > BigRational::new(4.into(), 5.into()));
    }
}
