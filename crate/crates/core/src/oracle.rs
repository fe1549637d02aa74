//! Exhaustive optimizers for tiny instances.
//!
//! These enumerate every labeling (or selection) with branch-and-bound
//! pruning and serve as ground truth for the constructive algorithms.
//! They share no code with those algorithms beyond the norm evaluation.

use crate::error::{Error, Result};
use crate::norms::norm_unchecked;
use crate::r_partition::RPartition;
use crate::selection::{Selection, SetSequence};
use crate::two_partition::VectorSequence;

/// Maximum number of leaves an oracle may enumerate.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// An optimal value and a labeling or selection attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<W> {
    pub optimum: f64,
    pub witness: W,
}

fn guard(count: f64) -> Result<()> {
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Minimum over all `r^N` labelings of `max_j max_k ‖Σ_k X_j − (1/r) Σ_k V‖`.
pub fn brute_force_partition(seq: &VectorSequence, r: usize) -> Result<OracleResult<RPartition>> {
    if r == 0 {
        return Err(Error::input("r must be positive"));
    }
    guard((r as f64).powi(seq.len() as i32))?;
    let mut search = PartitionSearch {
        seq,
        r,
        share: 1.0 / r as f64,
        sums: vec![vec![0.0; seq.d()]; r],
        total: vec![0.0; seq.d()],
        labels: Vec::with_capacity(seq.len()),
        best: f64::INFINITY,
        best_labels: Vec::new(),
    };
    search.descend(0.0, 0);
    Ok(OracleResult {
        optimum: if seq.is_empty() { 0.0 } else { search.best },
        witness: RPartition::new(search.best_labels, r)?,
    })
}

struct PartitionSearch<'a> {
    seq: &'a VectorSequence,
    r: usize,
    share: f64,
    sums: Vec<Vec<f64>>,
    total: Vec<f64>,
    labels: Vec<usize>,
    best: f64,
    best_labels: Vec<usize>,
}

impl PartitionSearch<'_> {
    // Classes are interchangeable, so a new label may exceed the largest one
    // used so far by at most one.
    fn descend(&mut self, running: f64, used: usize) {
        let k = self.labels.len();
        if k == self.seq.len() {
            if running < self.best || self.best_labels.len() != k {
                self.best = running;
                self.best_labels = self.labels.clone();
            }
            return;
        }
        let v = &self.seq.vectors()[k];
        for (t, x) in self.total.iter_mut().zip(v) {
            *t += x;
        }
        for l in 0..self.r.min(used + 1) {
            for (s, x) in self.sums[l].iter_mut().zip(v) {
                *s += x;
            }
            let worst = self.prefix_worst().max(running);
            if worst < self.best {
                self.labels.push(l);
                self.descend(worst, used.max(l + 1));
                self.labels.pop();
            }
            for (s, x) in self.sums[l].iter_mut().zip(v) {
                *s -= x;
            }
        }
        for (t, x) in self.total.iter_mut().zip(v) {
            *t -= x;
        }
    }

    fn prefix_worst(&self) -> f64 {
        let mut dev = vec![0.0; self.total.len()];
        self.sums
            .iter()
            .map(|s| {
                for ((o, a), t) in dev.iter_mut().zip(s).zip(&self.total) {
                    *o = a - self.share * t;
                }
                norm_unchecked(&dev, self.seq.norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Minimum over all `r`-selections of the discrepancy, centered on the set
/// means (`centered = true`) or of the raw class prefix sums.
pub fn brute_force_selection(
    sets: &SetSequence,
    r: usize,
    centered: bool,
) -> Result<OracleResult<Selection>> {
    if r == 0 {
        return Err(Error::input("r must be positive"));
    }
    if let Some((i, s)) = sets.sets().iter().enumerate().find(|(_, s)| s.len() < r) {
        return Err(Error::input(format!(
            "set {i} has {} < {r} members",
            s.len()
        )));
    }
    let count: f64 = sets
        .sets()
        .iter()
        .map(|s| (0..r).map(|t| (s.len() - t) as f64).product::<f64>())
        .product();
    guard(count)?;

    let d = sets.d();
    let offsets: Vec<Vec<f64>> = sets
        .sets()
        .iter()
        .map(|s| {
            if !centered {
                return vec![0.0; d];
            }
            let mut m = vec![0.0; d];
            for v in s {
                for (a, x) in m.iter_mut().zip(v) {
                    *a += x / s.len() as f64;
                }
            }
            m
        })
        .collect();
    let mut search = SelectionSearch {
        sets,
        r,
        offsets,
        sums: vec![vec![0.0; d]; r],
        chi: Vec::with_capacity(sets.len()),
        best: f64::INFINITY,
        best_chi: Vec::new(),
    };
    search.descend(0.0);
    Ok(OracleResult {
        optimum: if sets.is_empty() { 0.0 } else { search.best },
        witness: Selection {
            chi: search.best_chi,
        },
    })
}

struct SelectionSearch<'a> {
    sets: &'a SetSequence,
    r: usize,
    offsets: Vec<Vec<f64>>,
    sums: Vec<Vec<f64>>,
    chi: Vec<Vec<usize>>,
    best: f64,
    best_chi: Vec<Vec<usize>>,
}

impl SelectionSearch<'_> {
    fn descend(&mut self, running: f64) {
        let i = self.chi.len();
        if i == self.sets.len() {
            if running < self.best || self.best_chi.len() != i {
                self.best = running;
                self.best_chi = self.chi.clone();
            }
            return;
        }
        let mut row = Vec::with_capacity(self.r);
        self.place(i, &mut row, running);
    }

    // Assigns members of set `i` to classes 0, 1, ... in turn.
    fn place(&mut self, i: usize, row: &mut Vec<usize>, running: f64) {
        let l = row.len();
        if l == self.r {
            self.chi.push(row.clone());
            self.descend(running);
            self.chi.pop();
            return;
        }
        let set = &self.sets.sets()[i];
        for j in 0..set.len() {
            if row.contains(&j) {
                continue;
            }
            for ((s, x), o) in self.sums[l].iter_mut().zip(&set[j]).zip(&self.offsets[i]) {
                *s += x - o;
            }
            let worst = norm_unchecked(&self.sums[l], self.sets.norm()).max(running);
            if worst < self.best {
                row.push(j);
                self.place(i, row, worst);
                row.pop();
            }
            for ((s, x), o) in self.sums[l].iter_mut().zip(&set[j]).zip(&self.offsets[i]) {
                *s -= x - o;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormKind;
    use crate::r_partition::verify_partition_with;
    use crate::selection::selection_report;

    fn line(vals: &[f64]) -> VectorSequence {
        VectorSequence::new(1, NormKind::L2, vals.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn four_ones() {
        let s = line(&[1.0; 4]);
        let o = brute_force_partition(&s, 2).unwrap();
        assert_eq!(o.optimum, 0.5);
        let rep = verify_partition_with(&s, &o.witness, 1.0, 0.0).unwrap();
        assert!((rep.achieved - o.optimum).abs() <= 1e-12);
    }

    #[test]
    fn zeros_and_singletons() {
        let z = VectorSequence::new(2, NormKind::L1, vec![vec![0.0, 0.0]; 6]).unwrap();
        assert_eq!(brute_force_partition(&z, 3).unwrap().optimum, 0.0);
        let v = VectorSequence::new(2, NormKind::L2, vec![vec![0.6, 0.8]]).unwrap();
        assert_eq!(brute_force_partition(&v, 2).unwrap().optimum, 0.5);
        let empty = line(&[]);
        assert_eq!(brute_force_partition(&empty, 2).unwrap().optimum, 0.0);
    }

    #[test]
    fn partition_size_guard() {
        let s = line(&[0.1; 24]);
        assert!(matches!(
            brute_force_partition(&s, 2),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn counterexample_grows() {
        for n in [4usize, 8] {
            let sets = vec![vec![vec![-0.5], vec![1.0]]; n];
            let s = SetSequence::new(1, NormKind::L2, sets).unwrap();
            let o = brute_force_selection(&s, 2, false).unwrap();
            assert!(
                o.optimum >= n as f64 / 4.0 - 1e-12,
                "n = {n}: {}",
                o.optimum
            );
            let rep = selection_report(&s, &o.witness, false, 1.0).unwrap();
            assert!((rep.achieved - o.optimum).abs() <= 1e-12);
        }
    }

    #[test]
    fn signed_pairs_centered() {
        let sets = vec![vec![vec![1.0, 0.0], vec![-1.0, 0.0]]; 4];
        let s = SetSequence::new(2, NormKind::L2, sets).unwrap();
        let o = brute_force_selection(&s, 2, true).unwrap();
        assert!(o.optimum <= 1.0);
        let o1 = brute_force_selection(&s, 1, true).unwrap();
        assert_eq!(o1.optimum, 1.0);
    }

    #[test]
    fn empty_selection() {
        let s = SetSequence::new(1, NormKind::L2, vec![]).unwrap();
        let o = brute_force_selection(&s, 2, true).unwrap();
        assert_eq!(o.optimum, 0.0);
        assert!(o.witness.chi.is_empty());
    }

    #[test]
    fn selection_guards() {
        let sets = vec![vec![vec![0.1]; 6]; 6];
        let s = SetSequence::new(1, NormKind::L2, sets).unwrap();
        assert!(matches!(
            brute_force_selection(&s, 3, true),
            Err(Error::TooLarge { .. })
        ));
        assert!(brute_force_selection(&s, 7, true).is_err());
    }
}
