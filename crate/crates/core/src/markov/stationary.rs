use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::{BandedKernel, MarkovChainSpec};
use crate::error::{Error, Result};

/// `ln Γ(z + a) - ln Γ(z + b)` for `z + min(a, b) > 0`.
///
/// Shifts `z` up to at least 40 with exact recurrence terms, then applies
/// the asymptotic expansion of the ratio in Bernoulli polynomials.
pub fn ln_gamma_ratio(z: f64, a: f64, b: f64) -> f64 {
    const SHIFT_TO: f64 = 40.0;
    let mut w = z;
    let mut acc = 0.0;
    while w < SHIFT_TO {
        // ln Γ(w+a) = ln Γ(w+1+a) - ln(w+a)
        acc -= ((a - b) / (w + b)).ln_1p();
        w += 1.0;
    }
    let mut series = (a - b) * w.ln();
    let mut wp = 1.0;
    for n in 1..=7 {
        wp *= w;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let nf = n as f64;
        series += sign * (bernoulli_poly(n + 1, a) - bernoulli_poly(n + 1, b)) / (nf * (nf + 1.0) * wp);
    }
    acc + series
}

fn bernoulli_poly(n: usize, x: f64) -> f64 {
    let x2 = x * x;
    match n {
        2 => x2 - x + 1.0 / 6.0,
        3 => x * (x2 - 1.5 * x + 0.5),
        4 => x2 * (x2 - 2.0 * x + 1.0) - 1.0 / 30.0,
        5 => x * (x2 * (x2 - 2.5 * x + 5.0 / 3.0) - 1.0 / 6.0),
        6 => x2 * (x2 * (x2 - 3.0 * x + 2.5) - 0.5) + 1.0 / 42.0,
        7 => x * (x2 * (x2 * (x2 - 3.5 * x + 3.5) - 7.0 / 6.0) + 1.0 / 6.0),
        8 => x2 * (x2 * (x2 * (x2 - 4.0 * x + 14.0 / 3.0) - 7.0 / 3.0) + 2.0 / 3.0) - 1.0 / 30.0,
        _ => unreachable!("only B_2..B_8 are tabulated"),
    }
}

/// `λ_i` for `|i| <= R`, with `λ_0 = 1` and `λ_{-i} = λ_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryVector {
    pub epsilon: f64,
    pub radius: usize,
    /// Indexed by `i + R`.
    pub values: Vec<f64>,
}

impl StationaryVector {
    pub fn get(&self, i: i64) -> f64 {
        self.values[(i + self.radius as i64) as usize]
    }

    /// `Σ_{|i| <= r} λ_i` for `r <= R`.
    pub fn partial_sum(&self, r: usize) -> f64 {
        let r = r.min(self.radius) as i64;
        (-r..=r).map(|i| self.get(i)).sum()
    }

    pub fn to_csv(&self) -> String {
        let r = self.radius as i64;
        let mut out = String::from("i,lambda_i\n");
        for i in -r..=r {
            out.push_str(&format!("{i},{}\n", self.get(i)));
        }
        out
    }
}

/// `λ_i = i Γ(1+ε) Γ(i-ε) / (Γ(1-ε) Γ(i+1+ε))` for `i >= 1`.
pub fn lambda(epsilon: f64, i: u64) -> f64 {
    if i == 0 {
        return 1.0;
    }
    let i = i as f64;
    (i.ln() + ln_gamma_ratio(1.0, epsilon, -epsilon) + ln_gamma_ratio(i, -epsilon, 1.0 + epsilon)).exp()
}

pub fn stationary(spec: &MarkovChainSpec) -> StationaryVector {
    let r = spec.radius as i64;
    StationaryVector {
        epsilon: spec.epsilon,
        radius: spec.radius,
        values: (-r..=r).map(|i| lambda(spec.epsilon, i.unsigned_abs())).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    pub epsilon: f64,
    pub radius: usize,
    pub lambda_1: f64,
    pub lambda_1_expected: f64,
    pub lambda_1_rel_error: f64,
    /// `max |(λK - λ)_j|` over `|j| <= R - reach`.
    pub max_residual: f64,
    /// `max |λ_{i+1}/λ_i - (i+1)(i-ε)/(i(i+1+ε))|` relative, `1 <= i < R`.
    pub max_ratio_error: f64,
    pub max_row_sum_error: f64,
    pub passed: bool,
}

pub const RESIDUAL_TOL: f64 = 1e-10;
pub const RELATIVE_TOL: f64 = 1e-12;
pub const ROW_SUM_TOL: f64 = 1e-14;

pub fn stationary_report(spec: &MarkovChainSpec, lam: &StationaryVector) -> StationaryReport {
    let kernel = spec.kernel();
    let r = spec.radius as i64;
    let interior = r - spec.reach() as i64;
    let image = kernel.left_multiply(&lam.values);
    let max_residual = (-interior..=interior)
        .map(|j| (image[(j + r) as usize] - lam.get(j)).abs())
        .fold(0.0, f64::max);
    let eps = spec.epsilon;
    let max_ratio_error = (1..r)
        .map(|i| {
            let fi = i as f64;
            let expected = ((fi + 1.0) / fi) * ((fi - eps) / (fi + 1.0 + eps));
            (lam.get(i + 1) / lam.get(i) / expected - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let max_row_sum_error = (-r..=r)
        .map(|i| (kernel.row_sum(i) - 1.0).abs())
        .fold(0.0, f64::max);
    let lambda_1_expected = 1.0 / (1.0 + eps);
    let lambda_1_rel_error = (lam.get(1) / lambda_1_expected - 1.0).abs();
    StationaryReport {
        epsilon: eps,
        radius: spec.radius,
        lambda_1: lam.get(1),
        lambda_1_expected,
        lambda_1_rel_error,
        max_residual,
        max_ratio_error,
        max_row_sum_error,
        passed: max_residual < RESIDUAL_TOL
            && max_ratio_error < RELATIVE_TOL
            && lambda_1_rel_error < RELATIVE_TOL
            && max_row_sum_error <= ROW_SUM_TOL,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversibilityReport {
    pub max_abs: f64,
    pub max_rel: f64,
    /// Pair `(i, j)` attaining `max_rel`.
    pub worst: Option<(i64, i64)>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Detailed balance `λ_i k_{ij} = λ_j k_{ji}` over every band entry inside
/// the window.
pub fn check_reversible(kernel: &BandedKernel, lam: &StationaryVector) -> Result<ReversibilityReport> {
    if kernel.radius() != lam.radius {
        return Err(Error::InvalidParameter(format!(
            "kernel window {} and stationary window {} differ",
            kernel.radius(),
            lam.radius
        )));
    }
    let r = kernel.radius() as i64;
    let (mut max_abs, mut max_rel, mut worst) = (0.0f64, 0.0f64, None);
    for i in -r..=r {
        for &o in kernel.offsets() {
            let j = i + o;
            if o <= 0 || !kernel.contains(j) {
                continue;
            }
            let lhs = lam.get(i) * kernel.entry(i, j);
            let rhs = lam.get(j) * kernel.entry(j, i);
            let abs = (lhs - rhs).abs();
            let scale = lhs.abs().max(rhs.abs());
            let rel = if scale > 0.0 { abs / scale } else { 0.0 };
            max_abs = max_abs.max(abs);
            if rel > max_rel || worst.is_none() {
                max_rel = max_rel.max(rel);
                worst = Some((i, j));
            }
        }
    }
    Ok(ReversibilityReport {
        max_abs,
        max_rel,
        worst,
        tolerance: RELATIVE_TOL,
        passed: max_rel < RELATIVE_TOL,
    })
}

/// Cylinder `[s_0 … s_n]_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CylinderWord {
    pub offset: i64,
    pub states: Vec<i64>,
}

impl CylinderWord {
    pub fn reversed(&self) -> CylinderWord {
        let mut states = self.states.clone();
        states.reverse();
        CylinderWord {
            offset: -(self.offset + states.len() as i64 - 1),
            states,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderMeasure {
    pub value: f64,
    pub admissible: bool,
}

/// `λ_{s_0} k_{s_0 s_1} ⋯ k_{s_{n-1} s_n}`; inadmissible words measure 0.
pub fn cylinder_measure(
    kernel: &BandedKernel,
    lam: &StationaryVector,
    w: &CylinderWord,
) -> Result<CylinderMeasure> {
    let first = *w
        .states
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty cylinder word".into()))?;
    if let Some(&s) = w.states.iter().find(|&&s| !kernel.contains(s)) {
        return Err(Error::OutOfWindow {
            state: s,
            radius: kernel.radius(),
        });
    }
    let mut value = lam.get(first);
    for t in w.states.windows(2) {
        value *= kernel.entry(t[0], t[1]);
    }
    Ok(CylinderMeasure {
        value,
        admissible: value > 0.0,
    })
}

/// Seeded admissible words that stay inside the window.
pub fn random_words(kernel: &BandedKernel, count: usize, max_len: usize, seed: u64) -> Vec<CylinderWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = kernel.radius() as i64;
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=max_len.max(1));
            let mut s = rng.random_range(-r / 2..=r / 2);
            let mut states = vec![s];
            while states.len() < len {
                let next: Vec<i64> = kernel
                    .offsets()
                    .iter()
                    .map(|o| s + o)
                    .filter(|&j| kernel.entry(s, j) > 0.0)
                    .collect();
                s = next[rng.random_range(0..next.len())];
                states.push(s);
            }
            CylinderWord {
                offset: rng.random_range(-1000..=1000),
                states,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipReport {
    pub words: usize,
    pub max_rel: f64,
    pub passed: bool,
}

/// Checks `μ(w) = μ(reverse(w))` on seeded random words.
pub fn check_flip(kernel: &BandedKernel, lam: &StationaryVector, words: usize, seed: u64) -> Result<FlipReport> {
    let mut max_rel = 0.0f64;
    for w in random_words(kernel, words, 24, seed) {
        let a = cylinder_measure(kernel, lam, &w)?.value;
        let b = cylinder_measure(kernel, lam, &w.reversed())?.value;
        let scale = a.abs().max(b.abs());
        if scale > 0.0 {
            max_rel = max_rel.max((a - b).abs() / scale);
        }
    }
    Ok(FlipReport {
        words,
        max_rel,
        passed: max_rel < RELATIVE_TOL,
    })
}
