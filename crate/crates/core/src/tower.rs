//! Explicit cutting-and-stacking columns built from cut and spacer counts,
//! and exact orbits of symbolic points on their levels.
//!
//! Nothing here reads the height-set elements: offsets are recomputed from
//! `(r_k, s_{k,m})`, so comparing columns against descendant tables checks
//! the two descriptions against each other.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::descendants::descendant_table;
use crate::error::{Error, Result};
use crate::heights::RankOneSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub stage: usize,
    pub height: BigUint,
    /// Levels of `C_n` contained in `C_0 = [0, 1)`, sorted.
    pub descendant_heights: Vec<BigUint>,
    /// `∏_{k<n} r_k`; each level has width `1 / cut_product`.
    pub cut_product: BigUint,
}

/// Subcolumn offsets and heights of every column of a spec.
#[derive(Debug, Clone)]
pub struct Tower {
    /// `offsets[k][m]`: level of `C_{k+1}` where copy `m` of `C_k` starts.
    offsets: Vec<Vec<BigUint>>,
    heights: Vec<BigUint>,
}

impl Tower {
    /// Stacks the columns and checks the height recurrence against the spec.
    pub fn new(spec: &RankOneSpec) -> Result<Self> {
        let mut h = BigUint::one();
        let mut heights = vec![h.clone()];
        let mut offsets = Vec::with_capacity(spec.stages());
        for (k, (&r, spacers)) in spec.cut_counts().iter().zip(spec.spacer_counts()).enumerate() {
            let mut starts = Vec::with_capacity(r);
            let mut top = BigUint::zero();
            for s in spacers.iter().take(r) {
                starts.push(top.clone());
                top += &h + s;
            }
            if &top != spec.column_height(k + 1) {
                return Err(Error::violation(
                    k,
                    format!("stacking gives h_{} = {top}, spec records {}", k + 1, spec.column_height(k + 1)),
                ));
            }
            h = top;
            heights.push(h.clone());
            offsets.push(starts);
        }
        Ok(Tower { offsets, heights })
    }

    pub fn stages(&self) -> usize {
        self.offsets.len()
    }

    pub fn height(&self, n: usize) -> &BigUint {
        &self.heights[n]
    }

    pub fn offsets(&self, k: usize) -> &[BigUint] {
        &self.offsets[k]
    }

    pub fn cut_product(&self, n: usize) -> BigUint {
        self.offsets[..n]
            .iter()
            .fold(BigUint::one(), |acc, o| acc * BigUint::from(o.len()))
    }

    /// Explicit column `C_n` with every descendant level of `[0, 1)`.
    pub fn column(&self, n: usize) -> Result<Column> {
        if n > self.stages() {
            return Err(Error::StagesExhausted {
                needed: n,
                built: self.stages(),
            });
        }
        let mut levels = vec![BigUint::zero()];
        for starts in &self.offsets[..n] {
            let mut next = Vec::with_capacity(levels.len() * starts.len());
            for e in starts {
                next.extend(levels.iter().map(|t| e + t));
            }
            levels = next;
        }
        levels.sort();
        Ok(Column {
            stage: n,
            height: self.heights[n].clone(),
            cut_product: BigUint::from(levels.len()),
            descendant_heights: levels,
        })
    }

    /// `stage,height,descendant_count,spacer_count` rows; `spacer_count` is
    /// the number of levels of `C_n` outside `[0, 1)`.
    pub fn column_csv(&self) -> String {
        let mut out = String::from("stage,height,descendant_count,spacer_count\n");
        for n in 0..=self.stages() {
            let count = self.cut_product(n);
            let h = &self.heights[n];
            let _ = writeln!(out, "{n},{h},{count},{}", h - &count);
        }
        out
    }

    /// Whether `|descendants of [0,1) in C_n| / h_n` never increases.
    pub fn density_nonincreasing(&self) -> bool {
        (0..self.stages()).all(|n| {
            let (c0, c1) = (self.cut_product(n), self.cut_product(n + 1));
            c1 * &self.heights[n] <= c0 * &self.heights[n + 1]
        })
    }

    fn resolve_stage(&self, stage: usize) -> Result<()> {
        if stage >= self.stages() {
            return Err(Error::StagesExhausted {
                needed: stage + 1,
                built: self.stages(),
            });
        }
        Ok(())
    }

    /// Moves `p` to stage `p.stage + 1` without changing the point.
    pub fn refine(&self, p: &SymbolicPoint) -> Result<SymbolicPoint> {
        self.resolve_stage(p.stage)?;
        let m = p.choice(self.offsets[p.stage].len());
        Ok(SymbolicPoint {
            stage: p.stage + 1,
            level: &self.offsets[p.stage][m] + &p.level,
            seed: p.seed,
        })
    }

    pub fn refine_to(&self, p: &SymbolicPoint, stage: usize) -> Result<SymbolicPoint> {
        let mut q = p.clone();
        while q.stage < stage {
            q = self.refine(&q)?;
        }
        Ok(q)
    }

    /// Whether `p` and `q` are the same point of the limit space.
    pub fn same_point(&self, p: &SymbolicPoint, q: &SymbolicPoint) -> Result<bool> {
        if p.seed != q.seed {
            return Ok(false);
        }
        let stage = p.stage.max(q.stage);
        Ok(self.refine_to(p, stage)?.level == self.refine_to(q, stage)?.level)
    }

    /// `T^power p`, jumping within a column and refining only when the orbit
    /// leaves the top (or bottom) level.
    pub fn apply_t(&self, p: &SymbolicPoint, power: &BigInt) -> Result<SymbolicPoint> {
        let mut q = p.clone();
        let mut left = power.magnitude().clone();
        let forward = power.sign() != Sign::Minus;
        while !left.is_zero() {
            let room = if forward {
                &self.heights[q.stage] - 1u32 - &q.level
            } else {
                q.level.clone()
            };
            let step = if left <= room { left.clone() } else { room };
            if forward {
                q.level += &step;
            } else {
                q.level -= &step;
            }
            left -= step;
            if !left.is_zero() {
                q = self.refine(&q)?;
            }
        }
        Ok(q)
    }

    /// `(levels_ℓ + α_ℓ m)` when every coordinate stays inside `C_j`.
    pub fn product_translate(
        &self,
        j: usize,
        levels: &[BigUint],
        alphas: &[i64],
        m: &BigInt,
    ) -> Result<Translate> {
        if j > self.stages() {
            return Err(Error::StagesExhausted {
                needed: j,
                built: self.stages(),
            });
        }
        if levels.len() != alphas.len() {
            return Err(Error::InvalidParameter(
                "levels and alphas must have the same length".into(),
            ));
        }
        let h = BigInt::from(self.heights[j].clone());
        if let Some(l) = levels.iter().find(|l| BigInt::from((*l).clone()) >= h) {
            return Err(Error::Precondition(format!("level {l} is not below h_{j} = {h}")));
        }
        let mut out = Vec::with_capacity(levels.len());
        for (l, &a) in levels.iter().zip(alphas) {
            let t = BigInt::from(l.clone()) + m * a;
            if t.is_negative() || t >= h {
                return Ok(Translate::OutOfColumn);
            }
            out.push(t.to_biguint().expect("nonnegative"));
        }
        Ok(Translate::InColumn(out))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Translate {
    InColumn(Vec<BigUint>),
    OutOfColumn,
}

/// A point given by a level of `C_stage` and a seeded choice of subcolumn at
/// every later stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicPoint {
    pub stage: usize,
    pub level: BigUint,
    pub seed: u64,
}

impl SymbolicPoint {
    pub fn new(stage: usize, level: BigUint, seed: u64) -> Self {
        SymbolicPoint { stage, level, seed }
    }

    /// A level of `C_stage` drawn uniformly from `seed`.
    pub fn random(tower: &Tower, stage: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let h = tower.height(stage);
        let level = match h.to_u64() {
            Some(h) => BigUint::from(rng.random_range(0..h)),
            None => {
                let bytes = (h.bits() as usize).div_ceil(8) + 8;
                let raw: Vec<u8> = (0..bytes).map(|_| rng.random()).collect();
                BigUint::from_bytes_le(&raw) % h
            }
        };
        SymbolicPoint { stage, level, seed }
    }

    /// Subcolumn of `C_{stage+1}` holding the point.
    fn choice(&self, r: usize) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stage as u64);
        rng.random_range(0..r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub stage: usize,
    pub index: usize,
    pub column_height: String,
    pub descendant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrosscheckReport {
    pub stages_checked: Vec<usize>,
    /// Stages whose columns exceed the level budget.
    pub stages_skipped: Vec<usize>,
    pub height_recurrence: bool,
    pub last_spacer_zero: bool,
    pub density_nonincreasing: bool,
    pub mismatch: Option<Mismatch>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
            && self.height_recurrence
            && self.last_spacer_zero
            && self.density_nonincreasing
    }
}

pub const DEFAULT_LEVEL_BUDGET: u64 = 4_000_000;

/// Compares every column against the descendant tables of `[0, 1)`.
pub fn crosscheck(spec: &RankOneSpec, level_budget: u64) -> Result<CrosscheckReport> {
    let tower = Tower::new(spec)?;
    let mut report = CrosscheckReport {
        stages_checked: Vec::new(),
        stages_skipped: Vec::new(),
        height_recurrence: true,
        last_spacer_zero: true,
        density_nonincreasing: tower.density_nonincreasing(),
        mismatch: None,
    };
    for n in 1..=tower.stages() {
        let r = tower.offsets(n - 1).len();
        let spacers: BigUint = spec.spacer_counts()[n - 1].iter().sum();
        report.height_recurrence &= tower.height(n) == &(tower.height(n - 1) * BigUint::from(r) + spacers);
        if tower.cut_product(n) > BigUint::from(level_budget) {
            report.stages_skipped.push(n);
            continue;
        }
        let column = tower.column(n)?;
        let top = column.descendant_heights.last().expect("nonempty column") + 1u32;
        report.last_spacer_zero &= top == column.height;
        let table = descendant_table(spec, 0, n)?;
        report.stages_checked.push(n);
        if column.descendant_heights.len() != table.len() {
            report.mismatch = Some(Mismatch {
                stage: n,
                index: column.descendant_heights.len().min(table.len()),
                column_height: format!("{} levels", column.descendant_heights.len()),
                descendant: format!("{} descendants", table.len()),
            });
            break;
        }
        let diff = column
            .descendant_heights
            .iter()
            .zip(table.values())
            .position(|(a, b)| a != b);
        if let Some(idx) = diff {
            report.mismatch = Some(Mismatch {
                stage: n,
                index: idx,
                column_height: column.descendant_heights[idx].to_string(),
                descendant: table.values()[idx].to_string(),
            });
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::build_family;

    #[test]
    fn first_columns() {
        let spec = build_family(&[1, 1]).unwrap();
        let tower = Tower::new(&spec).unwrap();
        let c0 = tower.column(0).unwrap();
        assert_eq!(c0.height, BigUint::one());
        assert_eq!(c0.descendant_heights, vec![BigUint::zero()]);
        let c1 = tower.column(1).unwrap();
        assert_eq!(c1.height, BigUint::from(182u32));
        assert_eq!(c1.descendant_heights, spec.height_set(0).elements());
        assert!(tower.column(3).is_err());
    }

    #[test]
    fn increment_inside_column() {
        let spec = build_family(&[1, 1]).unwrap();
        let tower = Tower::new(&spec).unwrap();
        let p = SymbolicPoint::new(1, BigUint::from(5u32), 0);
        let q = tower.apply_t(&p, &BigInt::one()).unwrap();
        assert_eq!((q.stage, q.level), (1, BigUint::from(6u32)));
        // the top level needs the next stage unless its copy is the last one
        let resolved = (0..20u64)
            .filter_map(|seed| {
                let top = SymbolicPoint::new(1, BigUint::from(181u32), seed);
                tower.apply_t(&top, &BigInt::one()).ok().map(|up| (top, up))
            })
            .collect::<Vec<_>>();
        assert!(!resolved.is_empty());
        for (top, up) in resolved {
            assert_eq!(up.stage, 2);
            let back = tower.apply_t(&up, &-BigInt::one()).unwrap();
            assert!(tower.same_point(&back, &top).unwrap());
        }
    }

    #[test]
    fn exhausting_stages_is_an_error() {
        let spec = build_family(&[1]).unwrap();
        let tower = Tower::new(&spec).unwrap();
        let top = SymbolicPoint::new(1, BigUint::from(181u32), 3);
        let err = tower.apply_t(&top, &BigInt::one()).unwrap_err();
        assert!(matches!(err, Error::StagesExhausted { needed: 2, built: 1 }));
    }

    #[test]
    fn translate_boundaries() {
        let spec = build_family(&[1]).unwrap();
        let tower = Tower::new(&spec).unwrap();
        let levels = [BigUint::from(181u32), BigUint::from(3u32)];
        assert_eq!(
            tower.product_translate(1, &levels, &[1, 1], &BigInt::zero()).unwrap(),
            Translate::InColumn(levels.to_vec())
        );
        assert_eq!(
            tower.product_translate(1, &levels, &[1, -1], &BigInt::one()).unwrap(),
            Translate::OutOfColumn
        );
        assert!(tower
            .product_translate(1, &[BigUint::from(182u32)], &[1], &BigInt::one())
            .is_err());
    }

    #[test]
    fn csv_rows() {
        let spec = build_family(&[1]).unwrap();
        let tower = Tower::new(&spec).unwrap();
        assert_eq!(
            tower.column_csv(),
            "stage,height,descendant_count,spacer_count\n0,1,1,0\n1,182,4,178\n"
        );
    }
}
