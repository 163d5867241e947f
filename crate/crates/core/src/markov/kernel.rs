use serde::Serialize;

use crate::error::{Error, Result};

/// Kakutani–Parry chain on `ℤ`, truncated to the window `|i| <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovChainSpec {
    pub epsilon: f64,
    pub radius: usize,
    /// Work with `Q = P·P` instead of `P`.
    pub squared: bool,
}

impl MarkovChainSpec {
    /// Accepts `ε ∈ [0, 1)`; `ε = 0` is the simple symmetric walk.
    pub fn new(epsilon: f64, radius: usize, squared: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        if radius < 2 {
            return Err(Error::InvalidParameter(format!(
                "radius must be at least 2, got {radius}"
            )));
        }
        Ok(MarkovChainSpec {
            epsilon,
            radius,
            squared,
        })
    }

    /// Largest jump of the working kernel.
    pub fn reach(&self) -> usize {
        if self.squared {
            2
        } else {
            1
        }
    }

    pub fn contains(&self, i: i64) -> bool {
        i.unsigned_abs() <= self.radius as u64
    }

    fn check(&self, i: i64) -> Result<()> {
        if self.contains(i) {
            Ok(())
        } else {
            Err(Error::OutOfWindow {
                state: i,
                radius: self.radius,
            })
        }
    }

    /// Entry `p_{ij}` of `P` on all of `ℤ`. Rows with `i < 0` mirror those
    /// with `-i`.
    pub fn p(&self, i: i64, j: i64) -> f64 {
        if (i - j).abs() != 1 {
            return 0.0;
        }
        if i == 0 {
            return 0.5;
        }
        let drift = self.epsilon / i.unsigned_abs() as f64;
        if j.abs() > i.abs() {
            (1.0 - drift) / 2.0
        } else {
            (1.0 + drift) / 2.0
        }
    }

    /// `(P·P)_{ij}` on all of `ℤ`.
    pub fn q(&self, i: i64, j: i64) -> f64 {
        match (j - i).abs() {
            0 => self.p(i, i - 1) * self.p(i - 1, i) + self.p(i, i + 1) * self.p(i + 1, i),
            2 => {
                let mid = (i + j) / 2;
                self.p(i, mid) * self.p(mid, j)
            }
            _ => 0.0,
        }
    }

    /// Entry of the working kernel; both states must lie in the window.
    pub fn kernel_entry(&self, i: i64, j: i64) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(if self.squared { self.q(i, j) } else { self.p(i, j) })
    }

    pub fn kernel(&self) -> BandedKernel {
        BandedKernel::new(self)
    }
}

/// Band storage of the working kernel on the window; jumps leaving the
/// window are kept so that their mass can be reported as leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedKernel {
    radius: usize,
    offsets: Vec<i64>,
    /// `rows[i + R][o]` is the entry for the jump `offsets[o]`.
    rows: Vec<Vec<f64>>,
}

impl BandedKernel {
    pub fn new(spec: &MarkovChainSpec) -> Self {
        let offsets: Vec<i64> = if spec.squared { vec![-2, 0, 2] } else { vec![-1, 1] };
        let r = spec.radius as i64;
        let rows = (-r..=r)
            .map(|i| {
                offsets
                    .iter()
                    .map(|&o| if spec.squared { spec.q(i, i + o) } else { spec.p(i, i + o) })
                    .collect()
            })
            .collect();
        BandedKernel {
            radius: spec.radius,
            offsets,
            rows,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn contains(&self, i: i64) -> bool {
        i.unsigned_abs() <= self.radius as u64
    }

    fn row(&self, i: i64) -> &[f64] {
        &self.rows[(i + self.radius as i64) as usize]
    }

    /// `k_{ij}`, zero off the band or outside the window.
    pub fn entry(&self, i: i64, j: i64) -> f64 {
        if !self.contains(i) || !self.contains(j) {
            return 0.0;
        }
        self.offsets
            .iter()
            .position(|&o| o == j - i)
            .map_or(0.0, |o| self.row(i)[o])
    }

    /// Overwrites one entry (used to build deliberately broken kernels).
    pub fn set_entry(&mut self, i: i64, j: i64, value: f64) -> Result<()> {
        let o = self
            .offsets
            .iter()
            .position(|&o| o == j - i)
            .ok_or_else(|| Error::InvalidParameter(format!("({i}, {j}) is off the band")))?;
        if !self.contains(i) {
            return Err(Error::OutOfWindow {
                state: i,
                radius: self.radius,
            });
        }
        let r = self.radius as i64;
        self.rows[(i + r) as usize][o] = value;
        Ok(())
    }

    /// Full row sum including jumps that leave the window.
    pub fn row_sum(&self, i: i64) -> f64 {
        self.row(i).iter().sum()
    }

    /// `v ↦ vK` on the window, with `v` indexed by `i + R`. Returns the mass
    /// that left the window. Only indices with `|i| <= support` are read.
    pub fn step(&self, v: &[f64], out: &mut [f64], support: usize) -> f64 {
        let r = self.radius as i64;
        let s = support.min(self.radius) as i64;
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut leaked = 0.0;
        for i in -s..=s {
            let mass = v[(i + r) as usize];
            if mass == 0.0 {
                continue;
            }
            for (&o, &k) in self.offsets.iter().zip(self.row(i)) {
                let j = i + o;
                if j.abs() <= r {
                    out[(j + r) as usize] += mass * k;
                } else {
                    leaked += mass * k;
                }
            }
        }
        leaked
    }

    /// `(λK)_j` for `|j| <= R`.
    pub fn left_multiply(&self, lam: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; lam.len()];
        self.step(lam, &mut out, self.radius);
        out
    }
}
