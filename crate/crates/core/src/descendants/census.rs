//! Exhaustive (or seeded sampled) censuses over pairs and tuples of
//! descendants.
//!
//! Each census answers an existence question per pair `(a, a')` by an exact
//! search, and separately counts the pairs covered by the constructive
//! argument that goes with it. Counts are reduced with integer addition, so
//! results do not depend on the number of worker threads.

use std::ops::{Add, AddAssign, ControlFlow};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::classify::{ratio, Kind};
use super::report::{BoundKind, CertificateKind, CertificateReport, Check};
use super::search::{Combine, LayeredSearch};
use super::{descendant_count, witness_stage, Stages, Table};
use crate::error::{Error, Result};
use crate::heights::RankOneSpec;
use crate::value::{fits_i128, CensusValue};

pub const DEFAULT_PAIR_BUDGET: u64 = 100_000_000;
pub const DEFAULT_TUPLE_BUDGET: u64 = 10_000_000;

const SAMPLE_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensusMode {
    Exhaustive,
    /// Uniformly random component vectors from a seeded generator; results
    /// are labelled as estimates.
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// `i128` when every intermediate fits, `BigInt` otherwise.
    Auto,
    BigInt,
}

#[derive(Debug, Clone)]
pub struct CensusConfig {
    pub pair_budget: u64,
    pub tuple_budget: u64,
    pub mode: CensusMode,
    pub backend: Backend,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            pair_budget: DEFAULT_PAIR_BUDGET,
            tuple_budget: DEFAULT_TUPLE_BUDGET,
            mode: CensusMode::Exhaustive,
            backend: Backend::Auto,
        }
    }
}

impl CensusConfig {
    fn exhaustive(&self) -> bool {
        self.mode == CensusMode::Exhaustive
    }

    fn mode_label(&self) -> &'static str {
        if self.exhaustive() {
            "exhaustive"
        } else {
            "estimate"
        }
    }

    fn use_i128(&self, magnitude: &BigInt) -> bool {
        self.backend == Backend::Auto && fits_i128(magnitude)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    total: u64,
    satisfied: u64,
    constructive: u64,
    witness_failures: u64,
    constructive_unsatisfied: u64,
    split_failures: u64,
    unexplained: u64,
}

impl Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            total: self.total + o.total,
            satisfied: self.satisfied + o.satisfied,
            constructive: self.constructive + o.constructive,
            witness_failures: self.witness_failures + o.witness_failures,
            constructive_unsatisfied: self.constructive_unsatisfied + o.constructive_unsatisfied,
            split_failures: self.split_failures + o.split_failures,
            unexplained: self.unexplained + o.unexplained,
        }
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        *self = *self + o;
    }
}

fn one_pair() -> Tally {
    Tally {
        total: 1,
        ..Tally::default()
    }
}

fn draw_components(rng: &mut ChaCha8Rng, sizes: &[usize], out: &mut [u16]) {
    for (slot, &size) in out.iter_mut().zip(sizes) {
        *slot = rng.random_range(0..size) as u16;
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `eval` on every ordered pair of descendants (or on sampled pairs).
fn drive_pairs<V, F>(stages: &Stages<V>, cfg: &CensusConfig, what: &'static str, eval: F) -> Result<Tally>
where
    V: CensusValue,
    F: Fn(&V, &[u16], &V, &[u16]) -> Tally + Sync,
{
    match cfg.mode {
        CensusMode::Exhaustive => {
            let count = descendant_count_of(stages);
            let pairs = count.saturating_mul(count);
            if pairs > cfg.pair_budget as u128 {
                return Err(Error::BudgetExceeded {
                    what,
                    needed: pairs,
                    budget: cfg.pair_budget,
                });
            }
            let table = Table::build(stages)?;
            Ok((0..table.len())
                .into_par_iter()
                .map(|p| {
                    let (a, ca) = (&table.values[p], table.comps(p));
                    let mut t = Tally::default();
                    for q in 0..table.len() {
                        t += eval(a, ca, &table.values[q], table.comps(q));
                    }
                    t
                })
                .reduce(Tally::default, Add::add))
        }
        CensusMode::Sampled { samples, seed } => {
            let sizes = stages.sizes();
            let chunks = samples.div_ceil(SAMPLE_CHUNK);
            Ok((0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chunk_rng(seed, c);
                    let n = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
                    let mut ca = vec![0u16; sizes.len()];
                    let mut ca2 = vec![0u16; sizes.len()];
                    let mut t = Tally::default();
                    for _ in 0..n {
                        draw_components(&mut rng, &sizes, &mut ca);
                        draw_components(&mut rng, &sizes, &mut ca2);
                        t += eval(&stages.value_of(&ca), &ca, &stages.value_of(&ca2), &ca2);
                    }
                    t
                })
                .reduce(Tally::default, Add::add))
        }
    }
}

fn descendant_count_of<V>(stages: &Stages<V>) -> u128 {
    stages
        .elements
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
}

fn magnitude(spec: &RankOneSpec, i: usize, j: usize, extra: &BigInt, scale: i64) -> BigInt {
    (BigInt::from(spec.max_descendant(i, j)) + extra + 1) * BigInt::from(scale)
}

fn frac(t: &Tally, count: u64) -> BigRational {
    ratio(count, t.total)
}

#[allow(clippy::too_many_arguments)]
fn report(
    kind: CertificateKind,
    cfg: &CensusConfig,
    i: usize,
    j: usize,
    tally: &Tally,
    constructive: Option<u64>,
    bound: Option<BigRational>,
    bound_kind: BoundKind,
    checks: Vec<Check>,
) -> CertificateReport {
    CertificateReport {
        certificate: kind,
        mode: cfg.mode_label(),
        base_stage: i,
        target_stage: j,
        b: None,
        n: None,
        alphas: Vec::new(),
        bs: Vec::new(),
        total_count: tally.total,
        satisfied_count: tally.satisfied,
        fraction: frac(tally, tally.satisfied),
        constructive_count: constructive,
        constructive_fraction: constructive.map(|c| frac(tally, c)),
        analytic_bound: bound,
        bound_kind,
        checks,
        elapsed_ms: None,
    }
}

fn zero_check(name: &str, failures: u64, what: &str) -> Check {
    Check::new(name, failures == 0, format!("{failures} {what}"))
}

fn ratio_cmp_detail(lhs: &BigRational, op: &str, rhs: &BigRational) -> String {
    format!("{} {op} {}", super::report::ratio_string(lhs), super::report::ratio_string(rhs))
}

/// `P[X >= b]` for `X` a sum of independent Bernoulli(`p_k`).
fn bernoulli_tail(probs: &[BigRational], b: u64) -> BigRational {
    let mut dist = vec![BigRational::one()];
    for p in probs {
        let q = BigRational::one() - p;
        let mut next = vec![BigRational::zero(); dist.len() + 1];
        for (c, w) in dist.iter().enumerate() {
            next[c] += w * &q;
            next[c + 1] += w * p;
        }
        dist = next;
    }
    dist.iter()
        .enumerate()
        .filter(|(c, _)| *c as u64 >= b)
        .fold(BigRational::zero(), |acc, (_, w)| acc + w)
}

/// `1 - ∏ (1 - p_k)`.
fn any_of(probs: &[BigRational]) -> BigRational {
    BigRational::one()
        - probs
            .iter()
            .fold(BigRational::one(), |acc, p| acc * (BigRational::one() - p))
}

fn timed(start: Instant, mut r: CertificateReport) -> CertificateReport {
    r.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    r
}

/// Census for `T × T`: pairs `(a, a')` admitting `(d, d')` with
/// `a - d = a' - d' - b`, next to the pairs with at least `b` negative mixed
/// components (which the correspondence map turns into witnesses).
pub fn certify_txt(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    b: u64,
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    spec.check_range(i, j)?;
    let start = Instant::now();
    let mag = magnitude(spec, i, j, &BigInt::from(b), 4);
    let mut r = if cfg.use_i128(&mag) {
        txt_impl::<i128>(spec, i, j, b, cfg)?
    } else {
        txt_impl::<BigInt>(spec, i, j, b, cfg)?
    };
    r.b = Some(b);
    Ok(timed(start, r))
}

fn txt_impl<V: CensusValue>(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    b: u64,
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    let stages = Stages::<V>::new(spec, i, j);
    let search = LayeredSearch::new(&stages.elements, Combine::Difference);
    let shift = V::from_big(&BigInt::from(b)).expect("backend sized for b");

    let tally = drive_pairs(&stages, cfg, "T x T census", |a, ca, a2, ca2| {
        let mut t = one_pair();
        let satisfied = search.exists(&a2.sub(a).sub(&shift));
        t.satisfied = satisfied as u64;
        let negatives = (0..stages.width())
            .filter(|&p| stages.kinds[p].kind(ca[p], ca2[p]) == Kind::Negative)
            .count() as u64;
        if negatives >= b {
            t.constructive = 1;
            t.constructive_unsatisfied = (!satisfied) as u64;
            let (mut d, mut d2) = (a.clone(), a2.clone());
            let mut replaced = 0;
            for p in 0..stages.width() {
                if replaced == b {
                    break;
                }
                if stages.kinds[p].kind(ca[p], ca2[p]) == Kind::Negative {
                    let (x, y) = stages.kinds[p].correspondent(ca[p], ca2[p]);
                    d = d.sub(stages.element(p, ca[p])).add(stages.element(p, x));
                    d2 = d2.sub(stages.element(p, ca2[p])).add(stages.element(p, y));
                    replaced += 1;
                }
            }
            if a.sub(&d) != a2.sub(&d2).sub(&shift) {
                t.witness_failures = 1;
            }
        }
        t
    })?;

    let probs: Vec<BigRational> = stages
        .kinds
        .iter()
        .zip(&stages.elements)
        .map(|(kinds, set)| {
            let n = set.len() as u16;
            let neg = (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .filter(|&(x, y)| kinds.kind(x, y) == Kind::Negative)
                .count() as u64;
            ratio(neg, (n as u64) * (n as u64))
        })
        .collect();
    let bound = bernoulli_tail(&probs, b);

    let mut checks = vec![
        zero_check("witness-identity", tally.witness_failures, "constructed witnesses violate a - d = a' - d' - b"),
        zero_check("constructive-implies-satisfied", tally.constructive_unsatisfied, "constructive pairs without a search witness"),
    ];
    if cfg.exhaustive() {
        let f = frac(&tally, tally.satisfied);
        let c = frac(&tally, tally.constructive);
        checks.push(Check::new("brute-ge-constructive", f >= c, ratio_cmp_detail(&f, ">=", &c)));
        checks.push(Check::new("constructive-equals-bound", c == bound, ratio_cmp_detail(&c, "==", &bound)));
    }
    Ok(report(
        CertificateKind::Txt,
        cfg,
        i,
        j,
        &tally,
        Some(tally.constructive),
        Some(bound),
        BoundKind::Lower,
        checks,
    ))
}

/// Census for `T × T⁻¹`: pairs admitting `(d, d')` with `a + a' = d + d' + 1`.
/// Every witness found is run through the mixed-pair witness search, and the
/// satisfied fraction is compared against the pure-component fraction
/// `1 - ∏ (1 - 1/(4γ_ℓ))`.
pub fn certify_u_obstruction(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    spec.check_range(i, j)?;
    let start = Instant::now();
    let mag = magnitude(spec, i, j, &BigInt::zero(), 4);
    let r = if cfg.use_i128(&mag) {
        u_impl::<i128>(spec, i, j, cfg)?
    } else {
        u_impl::<BigInt>(spec, i, j, cfg)?
    };
    Ok(timed(start, r))
}

fn u_impl<V: CensusValue>(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    let stages = Stages::<V>::new(spec, i, j);
    let search = LayeredSearch::new(&stages.elements, Combine::Sum);
    let one = V::from_i64(1);
    let width = stages.width();

    let tally = drive_pairs(&stages, cfg, "T x T^-1 census", |a, ca, a2, ca2| {
        let mut t = one_pair();
        let pure = (0..width).any(|p| stages.kinds[p].kind(ca[p], ca2[p]).is_pure());
        t.constructive = pure as u64;
        let target = a.add(a2).sub(&one);
        if search.exists(&target) {
            t.satisfied = 1;
            t.unexplained = (!pure) as u64;
            let mut d = vec![0u16; width];
            let mut d2 = vec![0u16; width];
            let _ = search.for_each(&target, |rep| {
                for (p, &(x, y)) in rep.iter().enumerate() {
                    d[p] = x;
                    d2[p] = y;
                }
                if witness_stage(&stages, ca, ca2, &d, &d2).is_err() {
                    t.split_failures += 1;
                }
                ControlFlow::Continue(())
            });
        }
        t
    })?;

    let probs: Vec<BigRational> = stages
        .kinds
        .iter()
        .zip(&stages.elements)
        .map(|(kinds, set)| {
            let n = set.len() as u16;
            let pure = (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .filter(|&(x, y)| kinds.kind(x, y).is_pure())
                .count() as u64;
            ratio(pure, (n as u64) * (n as u64))
        })
        .collect();
    let bound = any_of(&probs);

    let mut checks = vec![
        zero_check("mixed-witness", tally.split_failures, "witness quadruples without a pure U/L split stage"),
        zero_check("satisfied-has-pure-component", tally.unexplained, "satisfied pairs with no pure component"),
    ];
    if cfg.exhaustive() {
        let f = frac(&tally, tally.satisfied);
        let c = frac(&tally, tally.constructive);
        checks.push(Check::new("brute-le-bound", f <= bound, ratio_cmp_detail(&f, "<=", &bound)));
        checks.push(Check::new("pure-fraction-equals-bound", c == bound, ratio_cmp_detail(&c, "==", &bound)));
    }
    Ok(report(
        CertificateKind::UObstruction,
        cfg,
        i,
        j,
        &tally,
        Some(tally.constructive),
        Some(bound),
        BoundKind::Upper,
        checks,
    ))
}

/// Census for `Tⁿ × T⁻ⁿ`: pairs admitting `(d, d')` with
/// `a - d = d' - a' ∈ nℤ \ {0}`, next to the pairs covered by swapping one
/// component pair `(a_k, a'_k)` with `n | a_k - a'_k`, `a_k ≠ a'_k`.
pub fn certify_conservative_inverse(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    n: i64,
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    spec.check_range(i, j)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be nonzero".into()));
    }
    let start = Instant::now();
    let mag = magnitude(spec, i, j, &BigInt::zero(), 4);
    let mut r = if cfg.use_i128(&mag) {
        inverse_impl::<i128>(spec, i, j, n, cfg)?
    } else {
        inverse_impl::<BigInt>(spec, i, j, n, cfg)?
    };
    r.n = Some(n);
    Ok(timed(start, r))
}

fn inverse_impl<V: CensusValue>(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    n: i64,
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    let modulus = n.unsigned_abs();
    let stages = Stages::<V>::new(spec, i, j);
    let search = LayeredSearch::new(&stages.elements, Combine::Sum);
    let width = stages.width();

    let tally = drive_pairs(&stages, cfg, "T^n x T^-n census", |a, ca, a2, ca2| {
        let mut t = one_pair();
        let satisfied = (a != a2 && a.sub(a2).residue(modulus) == 0)
            || search
                .for_each(&a.add(a2), |rep| {
                    let d = rep
                        .iter()
                        .enumerate()
                        .fold(V::from_i64(0), |acc, (p, &(x, _))| acc.add(stages.element(p, x)));
                    if &d != a && a.sub(&d).residue(modulus) == 0 {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                })
                .is_break();
        t.satisfied = satisfied as u64;
        let swap = (0..width).find(|&p| {
            ca[p] != ca2[p]
                && stages
                    .element(p, ca[p])
                    .sub(stages.element(p, ca2[p]))
                    .residue(modulus)
                    == 0
        });
        if let Some(p) = swap {
            t.constructive = 1;
            t.constructive_unsatisfied = (!satisfied) as u64;
            let (x, y) = (stages.element(p, ca[p]), stages.element(p, ca2[p]));
            let d = a.sub(x).add(y);
            let d2 = a2.sub(y).add(x);
            let gap = a.sub(&d);
            if gap != d2.sub(a2) || gap.is_zero() || gap.residue(modulus) != 0 {
                t.witness_failures = 1;
            }
        }
        t
    })?;

    let sq = (modulus as u128) * (modulus as u128);
    let mut pigeon_ok = true;
    let mut pigeon_detail = Vec::new();
    let mut swap_probs = Vec::with_capacity(width);
    for (p, set) in stages.elements.iter().enumerate() {
        let size = set.len() as u128;
        let mut classes = vec![0u128; modulus as usize];
        for e in set {
            classes[e.residue(modulus) as usize] += 1;
        }
        let same: u128 = classes.iter().map(|c| c * c).sum();
        let ok = sq * same >= size * size;
        pigeon_ok &= ok;
        pigeon_detail.push(format!("k={}: |R'|={same} vs |H|^2/n^2={}/{sq}", i + p, size * size));
        swap_probs.push(ratio((same - size) as u64, (size * size) as u64));
    }

    // Residue classes of D(I, k) for k = i+1..=j, by convolution.
    let mut desc_ok = true;
    let mut classes = vec![0u128; modulus as usize];
    classes[0] = 1;
    for set in &stages.elements {
        let mut next = vec![0u128; modulus as usize];
        for e in set {
            let r = e.residue(modulus) as usize;
            for (c, &w) in classes.iter().enumerate() {
                next[(c + r) % modulus as usize] += w;
            }
        }
        classes = next;
        let size: u128 = classes.iter().sum();
        let same: u128 = classes.iter().map(|c| c * c).sum();
        desc_ok &= sq * same >= size * size;
    }

    // First stage k >= i with |D(I, k)| > 2n^2.
    let mut k_prime = None;
    for k in i..=j {
        if descendant_count(spec, i, k) > 2 * sq {
            k_prime = Some(k);
            break;
        }
    }
    let analytic = match k_prime {
        Some(k) if k < j => {
            let q = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(2 * sq));
            BigRational::one() - num_traits::pow(q, j - k)
        }
        _ => BigRational::zero(),
    };
    let stage_bound = match k_prime {
        Some(k) if k < j => any_of(&swap_probs[k - i..]),
        _ => BigRational::zero(),
    };
    let all_stages = any_of(&swap_probs);

    let mut checks = vec![
        Check::new("pigeonhole-height-sets", pigeon_ok, pigeon_detail.join("; ")),
        Check::new("pigeonhole-descendants", desc_ok, format!("checked D(I,k) for k = {}..={j}", i + 1)),
        zero_check("swap-witness-identity", tally.witness_failures, "swap witnesses violate a - d = d' - a' in nZ\\{0}"),
        zero_check("constructive-implies-satisfied", tally.constructive_unsatisfied, "swap pairs without a search witness"),
    ];
    if cfg.exhaustive() {
        let f = frac(&tally, tally.satisfied);
        let c = frac(&tally, tally.constructive);
        checks.push(Check::new("brute-ge-constructive", f >= c, ratio_cmp_detail(&f, ">=", &c)));
        checks.push(Check::new("constructive-equals-swap-product", c == all_stages, ratio_cmp_detail(&c, "==", &all_stages)));
        checks.push(Check::new("constructive-ge-stage-bound", c >= stage_bound, ratio_cmp_detail(&c, ">=", &stage_bound)));
        checks.push(Check::new("brute-ge-bound", f >= analytic, ratio_cmp_detail(&f, ">=", &analytic)));
    }
    Ok(report(
        CertificateKind::InverseConservative,
        cfg,
        i,
        j,
        &tally,
        Some(tally.constructive),
        Some(analytic),
        BoundKind::Lower,
        checks,
    ))
}

/// Census for `T^{α_0} × ... × T^{α_{k-1}}`: tuples `(a_ℓ)` for which some
/// `m ≠ 0` makes every `a_ℓ - b_ℓ - α_ℓ m` a descendant. With all `b_ℓ = 0`
/// this is the conservativity condition; general `b` gives the
/// ergodicity-necessity condition. No analytic bound is attached.
pub fn certify_general_product(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    alphas: &[i64],
    bs: &[i64],
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    spec.check_range(i, j)?;
    if alphas.len() < 2 {
        return Err(Error::InvalidParameter("need at least two factors".into()));
    }
    if alphas.len() != bs.len() {
        return Err(Error::InvalidParameter(
            "alphas and bs must have the same length".into(),
        ));
    }
    if alphas.contains(&0) {
        return Err(Error::InvalidParameter("powers must be nonzero".into()));
    }
    let start = Instant::now();
    let max_alpha = alphas.iter().map(|a| a.unsigned_abs()).max().unwrap_or(1);
    let max_b = bs.iter().map(|b| b.unsigned_abs()).max().unwrap_or(0);
    let mag = magnitude(spec, i, j, &BigInt::from(max_b), 4) * BigInt::from(max_alpha + 2);
    let mut r = if cfg.use_i128(&mag) {
        general_impl::<i128>(spec, i, j, alphas, bs, cfg)?
    } else {
        general_impl::<BigInt>(spec, i, j, alphas, bs, cfg)?
    };
    r.alphas = alphas.to_vec();
    r.bs = bs.to_vec();
    Ok(timed(start, r))
}

fn general_impl<V: CensusValue>(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    alphas: &[i64],
    bs: &[i64],
    cfg: &CensusConfig,
) -> Result<CertificateReport> {
    let stages = Stages::<V>::new(spec, i, j);
    let count = descendant_count_of(&stages);
    let k = alphas.len();
    match cfg.mode {
        CensusMode::Exhaustive => {
            let tuples = (0..k).fold(1u128, |acc, _| acc.saturating_mul(count));
            if tuples > cfg.tuple_budget as u128 {
                return Err(Error::BudgetExceeded {
                    what: "product census",
                    needed: tuples,
                    budget: cfg.tuple_budget,
                });
            }
        }
        CensusMode::Sampled { .. } => {
            if count > cfg.pair_budget as u128 {
                return Err(Error::BudgetExceeded {
                    what: "descendant table",
                    needed: count,
                    budget: cfg.pair_budget,
                });
            }
        }
    }
    let table = Table::build(&stages)?;
    let bvals: Vec<V> = bs.iter().map(|&b| V::from_i64(b)).collect();

    let satisfied = |tuple: &[&V]| -> bool {
        let head = tuple[0].sub(&bvals[0]);
        table.values.iter().any(|d0| {
            let Some(m) = head.sub(d0).quotient_exact(alphas[0]) else {
                return false;
            };
            !m.is_zero()
                && (1..k).all(|l| {
                    let d = tuple[l].sub(&bvals[l]).sub(&m.mul_i64(alphas[l]));
                    table.values.binary_search(&d).is_ok()
                })
        })
    };

    let tally = match cfg.mode {
        CensusMode::Exhaustive => {
            let n = table.len();
            (0..n)
                .into_par_iter()
                .map(|first| {
                    let mut t = Tally::default();
                    let mut idx = vec![0usize; k];
                    idx[0] = first;
                    loop {
                        let tuple: Vec<&V> = idx.iter().map(|&x| &table.values[x]).collect();
                        t.total += 1;
                        t.satisfied += satisfied(&tuple) as u64;
                        let mut pos = 1;
                        while pos < k {
                            idx[pos] += 1;
                            if idx[pos] < n {
                                break;
                            }
                            idx[pos] = 0;
                            pos += 1;
                        }
                        if pos == k {
                            break;
                        }
                    }
                    t
                })
                .reduce(Tally::default, Add::add)
        }
        CensusMode::Sampled { samples, seed } => {
            let chunks = samples.div_ceil(SAMPLE_CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chunk_rng(seed, c);
                    let n = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
                    let mut t = Tally::default();
                    for _ in 0..n {
                        let tuple: Vec<&V> = (0..k)
                            .map(|_| &table.values[rng.random_range(0..table.len())])
                            .collect();
                        t.total += 1;
                        t.satisfied += satisfied(&tuple) as u64;
                    }
                    t
                })
                .reduce(Tally::default, Add::add)
        }
    };

    Ok(report(
        CertificateKind::General,
        cfg,
        i,
        j,
        &tally,
        None,
        None,
        BoundKind::None,
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::build_family;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bernoulli_tail_matches_binomial() {
        let probs = vec![r(1, 4); 3];
        assert_eq!(bernoulli_tail(&probs, 0), r(1, 1));
        assert_eq!(bernoulli_tail(&probs, 1), r(37, 64));
        assert_eq!(bernoulli_tail(&probs, 3), r(1, 64));
        assert_eq!(any_of(&probs), r(37, 64));
    }

    #[test]
    fn txt_with_zero_shift_is_always_satisfied() {
        let spec = build_family(&[1, 1, 1]).unwrap();
        let rep = certify_txt(&spec, 0, 3, 0, &CensusConfig::default()).unwrap();
        assert_eq!(rep.fraction, r(1, 1));
        assert!(rep.passed(), "{:?}", rep.checks);
    }

    #[test]
    fn backends_agree() {
        let spec = build_family(&[1, 2]).unwrap();
        let big = CensusConfig {
            backend: Backend::BigInt,
            ..CensusConfig::default()
        };
        let auto = CensusConfig::default();
        let a = certify_txt(&spec, 0, 2, 1, &auto).unwrap();
        let b = certify_txt(&spec, 0, 2, 1, &big).unwrap();
        assert_eq!((a.satisfied_count, a.constructive_count), (b.satisfied_count, b.constructive_count));
        let a = certify_conservative_inverse(&spec, 0, 2, 2, &auto).unwrap();
        let b = certify_conservative_inverse(&spec, 0, 2, 2, &big).unwrap();
        assert_eq!(a.satisfied_count, b.satisfied_count);
        let a = certify_general_product(&spec, 0, 2, &[1, 2], &[0, 0], &auto).unwrap();
        let b = certify_general_product(&spec, 0, 2, &[1, 2], &[0, 0], &big).unwrap();
        assert_eq!(a.satisfied_count, b.satisfied_count);
    }

    #[test]
    fn budget_guard_trips() {
        let spec = build_family(&[1, 1, 1]).unwrap();
        let cfg = CensusConfig {
            pair_budget: 100,
            ..CensusConfig::default()
        };
        let err = certify_txt(&spec, 0, 3, 1, &cfg).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { needed: 4096, .. }));
    }

    #[test]
    fn general_rejects_bad_arguments() {
        let spec = build_family(&[1, 1]).unwrap();
        let cfg = CensusConfig::default();
        assert!(certify_general_product(&spec, 0, 2, &[1], &[0], &cfg).is_err());
        assert!(certify_general_product(&spec, 0, 2, &[1, 0], &[0, 0], &cfg).is_err());
        assert!(certify_general_product(&spec, 0, 2, &[1, 1], &[0], &cfg).is_err());
        assert!(certify_conservative_inverse(&spec, 0, 2, 0, &cfg).is_err());
    }

    #[test]
    fn sampled_mode_is_labelled_and_reproducible() {
        let spec = build_family(&[1, 1, 1, 1]).unwrap();
        let cfg = CensusConfig {
            mode: CensusMode::Sampled {
                samples: 10_000,
                seed: 7,
            },
            ..CensusConfig::default()
        };
        let a = certify_txt(&spec, 0, 4, 1, &cfg).unwrap();
        let b = certify_txt(&spec, 0, 4, 1, &cfg).unwrap();
        assert!(a.is_estimate());
        assert_eq!(a.total_count, 10_000);
        assert_eq!(a.satisfied_count, b.satisfied_count);
        assert!(a.passed());
    }
}
