//! Stage-by-stage search for representations `target = Σ_k c_k` where each
//! `c_k` is a combination (`x + y` or `x - y`) of two elements of `H_k`.
//!
//! The search walks from the top stage down. At stage `k` only combinations
//! leaving a remainder inside the exact range reachable by the lower stages
//! are tried, so the search is exhaustive for any input sets; on well
//! separated height sets only one or two candidates survive per stage.

use std::ops::ControlFlow;

use crate::value::CensusValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Combine {
    Sum,
    Difference,
}

#[derive(Debug, Clone)]
struct StageCombos<V> {
    values: Vec<V>,
    pairs: Vec<Vec<(u16, u16)>>,
}

#[derive(Debug, Clone)]
pub(crate) struct LayeredSearch<V> {
    stages: Vec<StageCombos<V>>,
    /// Minimum and maximum of the combined value over stages strictly below
    /// each position.
    below_lo: Vec<V>,
    below_hi: Vec<V>,
}

impl<V: CensusValue> LayeredSearch<V> {
    pub(crate) fn new(elements: &[Vec<V>], combine: Combine) -> Self {
        let mut stages = Vec::with_capacity(elements.len());
        for set in elements {
            let mut all: Vec<(V, (u16, u16))> = Vec::with_capacity(set.len() * set.len());
            for (x, vx) in set.iter().enumerate() {
                for (y, vy) in set.iter().enumerate() {
                    let c = match combine {
                        Combine::Sum => vx.add(vy),
                        Combine::Difference => vx.sub(vy),
                    };
                    all.push((c, (x as u16, y as u16)));
                }
            }
            all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut combos = StageCombos {
                values: Vec::new(),
                pairs: Vec::new(),
            };
            for (c, pair) in all {
                if combos.values.last() == Some(&c) {
                    combos.pairs.last_mut().expect("parallel vectors").push(pair);
                } else {
                    combos.values.push(c);
                    combos.pairs.push(vec![pair]);
                }
            }
            stages.push(combos);
        }
        let zero = V::from_i64(0);
        let mut below_lo = Vec::with_capacity(stages.len());
        let mut below_hi = Vec::with_capacity(stages.len());
        let (mut lo, mut hi) = (zero.clone(), zero);
        for s in &stages {
            below_lo.push(lo.clone());
            below_hi.push(hi.clone());
            lo = lo.add(s.values.first().expect("nonempty stage"));
            hi = hi.add(s.values.last().expect("nonempty stage"));
        }
        LayeredSearch {
            stages,
            below_lo,
            below_hi,
        }
    }

    pub(crate) fn width(&self) -> usize {
        self.stages.len()
    }

    /// Whether `target` has at least one representation.
    pub(crate) fn exists(&self, target: &V) -> bool {
        self.width() > 0 && self.exists_at(self.width() - 1, target)
    }

    fn candidates(&self, p: usize, target: &V) -> std::ops::Range<usize> {
        let combos = &self.stages[p].values;
        let lo = target.sub(&self.below_hi[p]);
        let hi = target.sub(&self.below_lo[p]);
        let start = combos.partition_point(|v| v < &lo);
        let end = start + combos[start..].partition_point(|v| v <= &hi);
        start..end
    }

    fn exists_at(&self, p: usize, target: &V) -> bool {
        let range = self.candidates(p, target);
        if p == 0 {
            return !range.is_empty();
        }
        let combos = &self.stages[p].values;
        range
            .into_iter()
            .any(|c| self.exists_at(p - 1, &target.sub(&combos[c])))
    }

    /// Calls `visit` with every representation, as one `(x, y)` index pair
    /// per stage (lowest stage first), until it returns `Break`.
    pub(crate) fn for_each<F>(&self, target: &V, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[(u16, u16)]) -> ControlFlow<()>,
    {
        if self.width() == 0 {
            return ControlFlow::Continue(());
        }
        let mut buf = vec![(0u16, 0u16); self.width()];
        self.visit_at(self.width() - 1, target, &mut buf, &mut visit)
    }

    fn visit_at<F>(
        &self,
        p: usize,
        target: &V,
        buf: &mut [(u16, u16)],
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[(u16, u16)]) -> ControlFlow<()>,
    {
        let stage = &self.stages[p];
        for c in self.candidates(p, target) {
            let rest = target.sub(&stage.values[c]);
            for &pair in &stage.pairs[c] {
                buf[p] = pair;
                if p == 0 {
                    visit(buf)?;
                } else {
                    self.visit_at(p - 1, &rest, buf, visit)?;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn naive(elements: &[Vec<i128>], combine: Combine) -> HashSet<i128> {
        let mut acc: HashSet<i128> = [0].into_iter().collect();
        for set in elements {
            let mut next = HashSet::new();
            for s in &acc {
                for x in set {
                    for y in set {
                        next.insert(match combine {
                            Combine::Sum => s + x + y,
                            Combine::Difference => s + x - y,
                        });
                    }
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn matches_naive_set_on_unstructured_input() {
        let elements = vec![vec![0i128, 1, 5], vec![0, 3, 4, 11], vec![0, 2, 30]];
        for combine in [Combine::Sum, Combine::Difference] {
            let search = LayeredSearch::new(&elements, combine);
            let reachable = naive(&elements, combine);
            for t in -60i128..=120 {
                assert_eq!(search.exists(&t), reachable.contains(&t), "{combine:?} {t}");
            }
        }
    }

    #[test]
    fn enumerates_every_representation() {
        let elements = vec![vec![0i128, 1, 2], vec![0, 2]];
        let search = LayeredSearch::new(&elements, Combine::Sum);
        let mut count = 0;
        let _ = search.for_each(&4, |rep| {
            let total: i128 = rep
                .iter()
                .zip(&elements)
                .map(|(&(x, y), set)| set[x as usize] + set[y as usize])
                .sum();
            assert_eq!(total, 4);
            count += 1;
            ControlFlow::Continue(())
        });
        // brute force: ordered quadruples summing to 4
        let mut brute = 0;
        for a in &elements[0] {
            for b in &elements[0] {
                for c in &elements[1] {
                    for d in &elements[1] {
                        if a + b + c + d == 4 {
                            brute += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, brute);
    }
}
