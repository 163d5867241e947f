use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use super::kernel::MarkovChainSpec;
use crate::error::{Error, Result};

/// Walkers per independent batch; each batch has its own generator stream.
pub const BATCH: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub n: usize,
    pub hits: u64,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub epsilon: f64,
    pub paths: u64,
    pub seed: u64,
    pub estimates: Vec<MonteCarloEstimate>,
    /// Walkers that left the window.
    pub escaped: u64,
}

/// Estimates `p_{00}^{(n)}` of `P` at each checkpoint from `paths`
/// independent walkers started at 0.
///
/// Walkers sharing a state are advanced together: the number moving
/// outward is one binomial draw, which has the same law as moving each
/// walker separately.
pub fn monte_carlo_returns(
    spec: &MarkovChainSpec,
    paths: u64,
    checkpoints: &[usize],
    seed: u64,
) -> Result<MonteCarloReport> {
    let steps = checkpoints.iter().copied().max().unwrap_or(0);
    if paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let batches = paths.div_ceil(BATCH);
    let per_batch: Vec<(Vec<u64>, u64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let walkers = BATCH.min(paths - b * BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            run_batch(spec, walkers, steps, checkpoints, &mut rng)
        })
        .collect();
    let mut hits = vec![0u64; checkpoints.len()];
    let mut escaped = 0;
    for (h, e) in per_batch {
        hits.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        escaped += e;
    }
    let estimates = checkpoints
        .iter()
        .zip(hits)
        .map(|(&n, h)| {
            let p = h as f64 / paths as f64;
            MonteCarloEstimate {
                n,
                hits: h,
                estimate: p,
                std_error: (p * (1.0 - p) / paths as f64).sqrt(),
            }
        })
        .collect();
    Ok(MonteCarloReport {
        epsilon: spec.epsilon,
        paths,
        seed,
        estimates,
        escaped,
    })
}

fn run_batch(
    spec: &MarkovChainSpec,
    walkers: u64,
    steps: usize,
    checkpoints: &[usize],
    rng: &mut ChaCha8Rng,
) -> (Vec<u64>, u64) {
    let r = spec.radius as i64;
    let mut count = vec![0u64; 2 * spec.radius + 1];
    let mut next = count.clone();
    count[r as usize] = walkers;
    let mut hits = vec![0u64; checkpoints.len()];
    let mut escaped = 0;
    for n in 1..=steps {
        next.iter_mut().for_each(|c| *c = 0);
        let reach = (n as i64 - 1).min(r);
        for i in -reach..=reach {
            let c = count[(i + r) as usize];
            if c == 0 {
                continue;
            }
            let up = spec.p(i, i + 1).clamp(0.0, 1.0);
            let k = Binomial::new(c, up).expect("valid probability").sample(rng);
            for (j, m) in [(i + 1, k), (i - 1, c - k)] {
                if j.abs() <= r {
                    next[(j + r) as usize] += m;
                } else {
                    escaped += m;
                }
            }
        }
        std::mem::swap(&mut count, &mut next);
        for (slot, &cp) in checkpoints.iter().enumerate() {
            if cp == n {
                hits[slot] = count[r as usize];
            }
        }
    }
    (hits, escaped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_conserving() {
        let spec = MarkovChainSpec::new(0.4, 40, false).unwrap();
        let a = monte_carlo_returns(&spec, 5000, &[2, 10], 3).unwrap();
        let b = monte_carlo_returns(&spec, 5000, &[2, 10], 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.escaped, 0);
        let two = &a.estimates[0];
        assert!((two.estimate - 0.7).abs() < 4.0 * two.std_error);
    }
}
