use serde::Serialize;

use super::kernel::MarkovChainSpec;
use crate::error::{Error, Result};

pub const WINDOW_MARGIN: usize = 10;

/// `k_{00}^{(n)}` for `n = 1..=steps`, with running partial sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub epsilon: f64,
    pub radius: usize,
    pub squared: bool,
    pub p00: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Total probability that left the window.
    pub leakage: f64,
}

impl ReturnSeries {
    /// `p00[n - 1]` is the return probability after `n` steps.
    pub fn at(&self, n: usize) -> f64 {
        self.p00[n - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p00_n,partial_sum\n");
        for (n, (p, s)) in self.p00.iter().zip(&self.partial_sums).enumerate() {
            out.push_str(&format!("{},{p},{s}\n", n + 1));
        }
        out
    }
}

pub fn required_radius(spec: &MarkovChainSpec, steps: usize) -> usize {
    steps * spec.reach() + WINDOW_MARGIN
}

/// Row 0 of the powers of the working kernel by vector iteration.
pub fn return_probabilities(spec: &MarkovChainSpec, steps: usize) -> Result<ReturnSeries> {
    let required = required_radius(spec, steps);
    if spec.radius < required {
        return Err(Error::WindowTooSmall {
            radius: spec.radius,
            steps,
            required,
        });
    }
    let kernel = spec.kernel();
    let r = spec.radius;
    let mut v = vec![0.0; 2 * r + 1];
    let mut next = v.clone();
    v[r] = 1.0;
    let (mut p00, mut partial_sums) = (Vec::with_capacity(steps), Vec::with_capacity(steps));
    let (mut sum, mut leakage) = (0.0, 0.0);
    for n in 1..=steps {
        leakage += kernel.step(&v, &mut next, (n - 1) * spec.reach());
        std::mem::swap(&mut v, &mut next);
        sum += v[r];
        p00.push(v[r]);
        partial_sums.push(sum);
    }
    Ok(ReturnSeries {
        epsilon: spec.epsilon,
        radius: r,
        squared: spec.squared,
        p00,
        partial_sums,
        leakage,
    })
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub max_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - intercept - slope * x).collect();
    LineFit {
        slope,
        intercept,
        rms_residual: (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt(),
        max_residual: res.iter().fold(0.0, |m, r| m.max(r.abs())),
    }
}

/// Fits `k_{00}^{(n)} ≈ C n^{-β}` on `n ∈ [lo, hi]`, skipping zero terms.
pub fn fit_decay(series: &ReturnSeries, lo: usize, hi: usize) -> LineFit {
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=hi)
        .filter(|&n| series.at(n) > 0.0)
        .map(|n| ((n as f64).ln(), series.at(n).ln()))
        .unzip();
    fit_line(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub epsilon: f64,
    pub fold: u32,
    pub steps: usize,
    pub radius: usize,
    pub fit_window: [usize; 2],
    /// `β̂` in `q_{00}^{(n)} ≈ C n^{-β̂}`.
    pub beta_hat: f64,
    pub fit: LineFit,
    /// `Σ_{n<=N} q_{00}^{(n)}`.
    pub partial_sum: f64,
    /// `Σ_{n<=N} (q_{00}^{(n)})^k`.
    pub partial_sum_pow_k: f64,
    pub verdict: &'static str,
    pub caveat: &'static str,
    pub leakage: f64,
    #[serde(skip)]
    pub series: ReturnSeries,
}

pub const MIN_DIAGNOSTIC_STEPS: usize = 100;
pub const CAVEAT: &str =
    "finite-N heuristic: the exponent is fitted on n in [N/2, N] and proves nothing about the limit";

impl DiagnosticReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,q00_n,partial_sum,q00_n_pow_k,partial_sum_pow_k\n");
        let mut acc = 0.0;
        for (n, (q, s)) in self.series.p00.iter().zip(&self.series.partial_sums).enumerate() {
            let qk = q.powi(self.fold as i32);
            acc += qk;
            out.push_str(&format!("{},{q},{s},{qk},{acc}\n", n + 1));
        }
        out
    }
}

/// Decay exponent of `q_{00}^{(n)}` for `Q = P·P` and the resulting verdict
/// for `Σ (q_{00}^{(n)})^k`: diverges iff `k β̂ <= 1`.
pub fn product_conservativity_diagnostic(
    spec: &MarkovChainSpec,
    fold: u32,
    steps: usize,
) -> Result<DiagnosticReport> {
    if !spec.squared {
        return Err(Error::Precondition(
            "the product diagnostic works with the squared kernel".into(),
        ));
    }
    if steps < MIN_DIAGNOSTIC_STEPS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_DIAGNOSTIC_STEPS} steps, got {steps}"
        )));
    }
    if fold == 0 {
        return Err(Error::InvalidParameter("fold count must be positive".into()));
    }
    let series = return_probabilities(spec, steps)?;
    let lo = steps / 2;
    let fit = fit_decay(&series, lo, steps);
    let beta_hat = -fit.slope;
    let partial_sum_pow_k = series.p00.iter().map(|q| q.powi(fold as i32)).sum();
    Ok(DiagnosticReport {
        epsilon: spec.epsilon,
        fold,
        steps,
        radius: spec.radius,
        fit_window: [lo, steps],
        beta_hat,
        fit,
        partial_sum: *series.partial_sums.last().expect("steps >= 100"),
        partial_sum_pow_k,
        verdict: if fold as f64 * beta_hat <= 1.0 {
            "diverges"
        } else {
            "converges"
        },
        caveat: CAVEAT,
        leakage: series.leakage,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_return() {
        for eps in [0.0, 0.3, 0.7] {
            let spec = MarkovChainSpec::new(eps, 30, false).unwrap();
            let s = return_probabilities(&spec, 20).unwrap();
            assert_eq!(s.at(1), 0.0);
            assert!((s.at(2) - (1.0 + eps) / 2.0).abs() < 1e-15);
            assert!((1..=20).step_by(2).all(|n| s.at(n) == 0.0));
            assert_eq!(s.leakage, 0.0);
        }
    }

    #[test]
    fn window_guard() {
        let spec = MarkovChainSpec::new(0.3, 50, false).unwrap();
        assert!(matches!(
            return_probabilities(&spec, 41),
            Err(Error::WindowTooSmall { required: 51, .. })
        ));
        let sq = MarkovChainSpec::new(0.3, 50, true).unwrap();
        assert!(return_probabilities(&sq, 20).is_ok());
        assert!(return_probabilities(&sq, 21).is_err());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys);
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-13);
    }

    #[test]
    fn diagnostic_preconditions() {
        let plain = MarkovChainSpec::new(0.3, 500, false).unwrap();
        assert!(product_conservativity_diagnostic(&plain, 1, 200).is_err());
        let sq = MarkovChainSpec::new(0.3, 500, true).unwrap();
        assert!(product_conservativity_diagnostic(&sq, 1, 99).is_err());
    }
}
