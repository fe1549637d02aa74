//! Recursive `r`-way partitions and the recursion constants `C(r)`.
//!
//! An `r`-partition is built by splitting `r = r1 + r2`, running the weighted
//! two-partition on the current subsequence, and recursing on both sides.
//! If each two-way split errs by at most `K`, a class inside a side with `s`
//! classes errs by `C(s) K + K / s` against the parent share (and by `K` when
//! `s = 1`), which gives the recursion
//!
//! ```text
//! C(1) = 1,   C(r) = min_{r1 + r2 = r} max(f(r1), f(r2)),
//! f(1) = 1,   f(s) = C(s) + 1/s  (s >= 2).
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::norm_unchecked;
use crate::sum::CompensatedVec;
use crate::two_partition::{weighted_two_partition, VectorSequence, WeightedSplit};
use crate::BOUND_SLACK;

/// `C(r)` and the minimizing split for `r = 1..=r_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CTable {
    values: Vec<f64>,
    splits: Vec<(usize, usize)>,
}

impl CTable {
    pub fn r_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `C(r)`; panics if `r` is zero or beyond the table.
    pub fn c(&self, r: usize) -> f64 {
        assert!(r >= 1 && r <= self.r_max(), "r = {r} outside table");
        self.values[r]
    }

    /// Chosen `(r1, r2)` for `r >= 2`.
    pub fn split(&self, r: usize) -> (usize, usize) {
        assert!(r >= 2 && r <= self.r_max(), "no split for r = {r}");
        self.splits[r]
    }

    /// Per-class loss of a side with `s` classes relative to its parent.
    pub fn side_factor(&self, s: usize) -> f64 {
        if s == 1 {
            1.0
        } else {
            self.c(s) + 1.0 / s as f64
        }
    }

    pub(crate) fn ensure(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.r_max() {
            return Err(Error::input(format!(
                "class count {r} not covered by a C(r) table of size {}",
                self.r_max()
            )));
        }
        Ok(())
    }
}

/// Fills the `C(r)` table by the min-max recursion; ties go to the smaller `r1`.
pub fn c_table(r_max: usize) -> CTable {
    let r_max = r_max.max(1);
    let mut values = vec![0.0; r_max + 1];
    let mut splits = vec![(0, 0); r_max + 1];
    // f[s] is the side factor; rev[r_max - s] = f[s] so that both operands of
    // max(f[r1], f[r - r1]) are read front to back.
    let mut f = vec![0.0_f64; r_max + 1];
    let mut rev = vec![0.0_f64; r_max + 1];
    values[1] = 1.0;
    splits[1] = (1, 0);
    f[1] = 1.0;
    rev[r_max - 1] = 1.0;
    for r in 2..=r_max {
        let half = r / 2;
        let lhs = &f[1..=half];
        let rhs = &rev[r_max - r + 1..=r_max - r + half];
        let best = min_of_max(lhs, rhs);
        let r1 = 1 + first_attaining(lhs, rhs, best);
        values[r] = best;
        splits[r] = (r1, r - r1);
        f[r] = best + 1.0 / r as f64;
        rev[r_max - r] = f[r];
    }
    CTable { values, splits }
}

// First i with max(a[i], b[i]) == target; scans whole chunks branch-free.
fn first_attaining(a: &[f64], b: &[f64], target: f64) -> usize {
    const CHUNK: usize = 32;
    for (c, (xa, xb)) in a.chunks(CHUNK).zip(b.chunks(CHUNK)).enumerate() {
        let hit = xa.iter().zip(xb).fold(false, |h, (x, y)| {
            h | ((if x > y { *x } else { *y }) == target)
        });
        if hit {
            let offset = xa.iter().zip(xb).position(|(x, y)| x.max(*y) == target);
            return c * CHUNK + offset.expect("chunk contains a hit");
        }
    }
    unreachable!("target is the minimum of the same values")
}

// min_i max(a[i], b[i]) over independent lanes so the loop vectorizes.
fn min_of_max(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [f64::INFINITY; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for l in 0..LANES {
            let m = if xa[l] > xb[l] { xa[l] } else { xb[l] };
            acc[l] = if m < acc[l] { m } else { acc[l] };
        }
    }
    let tail = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x.max(*y))
        .fold(f64::INFINITY, f64::min);
    acc.into_iter().fold(tail, f64::min)
}

/// Class label (0-based) of every sequence index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RPartition {
    pub labels: Vec<usize>,
    pub r: usize,
}

impl RPartition {
    pub fn new(labels: Vec<usize>, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::input("class count must be positive"));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= r) {
            return Err(Error::input(format!(
                "label {l} at index {i} out of range for {r} classes"
            )));
        }
        Ok(RPartition { labels, r })
    }

    /// Members of each class, in sequence order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.r];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Worst prefix deviations of a partition or selection against a bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    /// Largest deviation seen by each class over all prefixes.
    pub per_class_max: Vec<f64>,
    pub achieved: f64,
    pub bound: f64,
    pub pass: bool,
    /// `(class, k)` attaining `achieved`: 0-based class, prefix length `k >= 1`.
    /// `None` when there are no prefixes.
    pub worst_prefix: Option<(usize, usize)>,
}

impl DiscrepancyReport {
    pub(crate) fn new(classes: usize, bound: f64) -> Self {
        DiscrepancyReport {
            per_class_max: vec![0.0; classes],
            achieved: 0.0,
            bound,
            pass: true,
            worst_prefix: None,
        }
    }

    pub(crate) fn observe(&mut self, class: usize, k: usize, dev: f64) {
        if dev > self.per_class_max[class] {
            self.per_class_max[class] = dev;
        }
        if dev > self.achieved || self.worst_prefix.is_none() {
            self.achieved = dev.max(self.achieved);
            self.worst_prefix = Some((class, k));
        }
    }

    pub(crate) fn finalize(mut self, slack: f64) -> Self {
        self.pass = self.achieved <= self.bound * (1.0 + slack);
        self
    }

    /// Re-evaluates `pass` against another bound or slack.
    pub fn with_bound(mut self, bound: f64, slack: f64) -> Self {
        self.bound = bound;
        self.finalize(slack)
    }
}

/// Partitions `seq` into `r` classes so that each class's prefix sums stay
/// within `C(r) * d` of `(1/r) ΣV`.
pub fn balanced_partition(seq: &VectorSequence, r: usize, table: &CTable) -> Result<RPartition> {
    table.ensure(r)?;
    let mut labels = vec![0; seq.len()];
    let all: Vec<usize> = (0..seq.len()).collect();
    split_recursive(seq, &all, r, 0, table, &mut labels)?;
    RPartition::new(labels, r)
}

fn split_recursive(
    seq: &VectorSequence,
    indices: &[usize],
    r: usize,
    offset: usize,
    table: &CTable,
    labels: &mut [usize],
) -> Result<()> {
    if r == 1 {
        for &i in indices {
            labels[i] = offset;
        }
        return Ok(());
    }
    let (r1, r2) = table.split(r);
    let sub = seq.subsequence(indices);
    let part = weighted_two_partition(&sub, WeightedSplit::new(r1, r2)?)?;
    let side1: Vec<usize> = part.y1.iter().map(|&j| indices[j]).collect();
    let side2: Vec<usize> = part.y2.iter().map(|&j| indices[j]).collect();
    split_recursive(seq, &side1, r1, offset, table, labels)?;
    split_recursive(seq, &side2, r2, offset + r1, table, labels)
}

/// Evaluates `max_k ‖Σ_k X_j − (1/r) Σ_k V‖` for every class `j` against the
/// bound `C(r) * d`.
pub fn verify_partition(
    seq: &VectorSequence,
    part: &RPartition,
    table: &CTable,
) -> Result<DiscrepancyReport> {
    table.ensure(part.r)?;
    verify_partition_with(seq, part, table.c(part.r) * seq.d() as f64, BOUND_SLACK)
}

/// [`verify_partition`] with an explicit bound and relative slack.
pub fn verify_partition_with(
    seq: &VectorSequence,
    part: &RPartition,
    bound: f64,
    slack: f64,
) -> Result<DiscrepancyReport> {
    if part.labels.len() != seq.len() {
        return Err(Error::input(format!(
            "{} labels for a sequence of length {}",
            part.labels.len(),
            seq.len()
        )));
    }
    let r = part.r;
    let d = seq.d();
    if let Some(&l) = part.labels.iter().find(|&&l| l >= r) {
        return Err(Error::input(format!(
            "label {l} out of range for {r} classes"
        )));
    }
    let share = 1.0 / r as f64;
    let mut class_sums = vec![CompensatedVec::zeros(d); r];
    let mut total = CompensatedVec::zeros(d);
    let mut report = DiscrepancyReport::new(r, bound);
    let mut dev = vec![0.0; d];
    for (k, (v, &l)) in seq.vectors().iter().zip(&part.labels).enumerate() {
        total.add(v);
        class_sums[l].add(v);
        let fair = total.values();
        for (j, sums) in class_sums.iter().enumerate() {
            for ((out, s), f) in dev.iter_mut().zip(sums.values()).zip(&fair) {
                *out = s - share * f;
            }
            report.observe(j, k + 1, norm_unchecked(&dev, seq.norm()));
        }
    }
    Ok(report.finalize(slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormKind;

    fn ones(n: usize) -> VectorSequence {
        VectorSequence::new(1, NormKind::L2, vec![vec![1.0]; n]).unwrap()
    }

    #[test]
    fn small_constants() {
        let t = c_table(10);
        assert_eq!(t.c(1), 1.0);
        assert_eq!(t.c(2), 1.0);
        assert_eq!(t.c(3), 1.5);
        assert_eq!(t.c(4), 1.5);
        assert_eq!(t.split(4), (2, 2));
        assert!((t.c(7) - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(t.split(7), (3, 4));
        // remark: C(7) <= max{1/3 + C(3), 1/4 + C(4)}
        assert!(t.c(7) <= (1.0 / 3.0 + t.c(3)).max(0.25 + t.c(4)) + 1e-15);
    }

    // Brute-force recursion over every split, kept independent of the
    // two-pass search in `c_table`.
    #[test]
    fn table_matches_naive_recursion() {
        let n = 200;
        let mut c = vec![0.0; n + 1];
        c[1] = 1.0;
        let f = |c: &[f64], s: usize| if s == 1 { 1.0 } else { c[s] + 1.0 / s as f64 };
        for r in 2..=n {
            c[r] = (1..r)
                .map(|a| f(&c, a).max(f(&c, r - a)))
                .fold(f64::INFINITY, f64::min);
        }
        let t = c_table(n);
        for r in 1..=n {
            assert_eq!(t.c(r), c[r], "r = {r}");
        }
    }

    #[test]
    fn r_one_is_trivial() {
        let t = c_table(4);
        let s = ones(5);
        let p = balanced_partition(&s, 1, &t).unwrap();
        assert_eq!(p.labels, vec![0; 5]);
        let rep = verify_partition(&s, &p, &t).unwrap();
        assert_eq!(rep.achieved, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn twelve_ones_three_classes() {
        let t = c_table(3);
        let s = ones(12);
        let p = balanced_partition(&s, 3, &t).unwrap();
        let rep = verify_partition(&s, &p, &t).unwrap();
        assert_eq!(rep.bound, 1.5);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn verify_examples() {
        let t = c_table(2);
        let zeros = VectorSequence::new(2, NormKind::L1, vec![vec![0.0, 0.0]; 4]).unwrap();
        let p = RPartition::new(vec![0, 1, 1, 0], 2).unwrap();
        let rep = verify_partition(&zeros, &p, &t).unwrap();
        assert_eq!(rep.achieved, 0.0);
        assert!(rep.pass);

        let rep = verify_partition(&ones(2), &RPartition::new(vec![0, 0], 2).unwrap(), &t).unwrap();
        assert_eq!(rep.achieved, 1.0);
        assert_eq!(rep.bound, 1.0);
        assert!(rep.pass);
        assert_eq!(rep.per_class_max, vec![1.0, 1.0]);
        assert_eq!(rep.worst_prefix, Some((0, 2)));

        let rep = verify_partition(&ones(4), &RPartition::new(vec![0; 4], 2).unwrap(), &t).unwrap();
        assert_eq!(rep.achieved, 2.0);
        assert!(!rep.pass);
    }

    #[test]
    fn verify_rejects_bad_labels() {
        let t = c_table(3);
        assert!(RPartition::new(vec![0, 3], 3).is_err());
        let bad = RPartition {
            labels: vec![0, 5],
            r: 2,
        };
        assert!(verify_partition(&ones(2), &bad, &t).is_err());
        let short = RPartition {
            labels: vec![0],
            r: 2,
        };
        assert!(verify_partition(&ones(2), &short, &t).is_err());
        assert!(balanced_partition(&ones(2), 4, &t).is_err());
    }
}
