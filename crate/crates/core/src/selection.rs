//! Balanced selections from sequences of vector sets.
//!
//! [`k_subset_rounding`] picks `k` members from each set so that prefix sums
//! track the fractional choice `x_iv = k / |V_i|` within `2d`. It keeps a
//! fractional point satisfying
//!
//! ```text
//! sum_i sum_v (x_iv − k/|V_i|) v = 0      (d rows)
//! sum_v x_iv = k                          (one row per set)
//! 0 <= x_iv <= 1
//! ```
//!
//! and repeatedly walks along kernel directions of the floating variables of
//! the first `n` sets, fixing at least one variable at 0 or 1 per walk. The
//! prefix `n` only grows when the floating columns are independent; at that
//! moment at most `2d` variables of sets `<= n` are fractional, which bounds
//! the final rounding error on that prefix.
//!
//! [`r_selection`] composes the rounding with the same recursive class
//! splitting as [`crate::r_partition`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{box_walk, kernel_direction, ColumnSystem};
use crate::norms::{norm_unchecked, NormKind};
use crate::r_partition::{CTable, DiscrepancyReport};
use crate::sum::CompensatedVec;
use crate::{Tolerances, BOUND_SLACK};

/// Sets must sum to zero within this norm to qualify as zero-sum.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-9;

/// An ordered sequence of finite vector sets in the unit ball.
///
/// Members are identified by position, so a set may hold equal vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SetSequence {
    d: usize,
    norm: NormKind,
    sets: Vec<Vec<Vec<f64>>>,
}

impl SetSequence {
    pub fn new(d: usize, norm: NormKind, sets: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let eps = Tolerances::default().ball;
        if d == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        norm.check_dim(d)?;
        let mut flat = 0;
        for (i, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::input(format!("set {i} is empty")));
            }
            for v in set {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: v.len(),
                    });
                }
                let n = norm_unchecked(v, &norm);
                if !(n <= 1.0 + eps) {
                    return Err(Error::OutsideUnitBall {
                        index: flat,
                        norm: n,
                    });
                }
                flat += 1;
            }
        }
        Ok(SetSequence { d, norm, sets })
    }

    /// Divides every vector by the largest norm when it exceeds 1.
    pub fn rescaled(d: usize, norm: NormKind, mut sets: Vec<Vec<Vec<f64>>>) -> Result<(Self, f64)> {
        norm.check_dim(d)?;
        let max = sets
            .iter()
            .flatten()
            .filter(|v| v.len() == d)
            .map(|v| norm_unchecked(v, &norm))
            .fold(0.0_f64, f64::max);
        let scale = if max > 1.0 { 1.0 / max } else { 1.0 };
        for v in sets.iter_mut().flatten() {
            v.iter_mut().for_each(|x| *x *= scale);
        }
        Ok((Self::new(d, norm, sets)?, scale))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn norm(&self) -> &NormKind {
        &self.norm
    }

    pub fn sets(&self) -> &[Vec<Vec<f64>>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn min_set_size(&self) -> Option<usize> {
        self.sets.iter().map(Vec::len).min()
    }

    fn mean(&self, i: usize) -> Vec<f64> {
        let set = &self.sets[i];
        let mut acc = CompensatedVec::zeros(self.d);
        for v in set {
            acc.add(v);
        }
        let m = set.len() as f64;
        acc.values().into_iter().map(|x| x / m).collect()
    }

    // Keeps, for each set, the members at the given positions.
    fn restrict(&self, picks: &[Vec<usize>]) -> SetSequence {
        SetSequence {
            d: self.d,
            norm: self.norm.clone(),
            sets: self
                .sets
                .iter()
                .zip(picks)
                .map(|(set, p)| p.iter().map(|&j| set[j].clone()).collect())
                .collect(),
        }
    }
}

/// For each set `i`, the member positions `chi[i][l]` chosen for class `l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub chi: Vec<Vec<usize>>,
}

impl Selection {
    /// Number of classes (0 for an empty selection).
    pub fn r(&self) -> usize {
        self.chi.first().map_or(0, Vec::len)
    }

    /// Checks that every row has `r` distinct valid positions.
    pub fn validate(&self, sets: &SetSequence) -> Result<()> {
        if self.chi.len() != sets.len() {
            return Err(Error::input(format!(
                "selection covers {} sets, sequence has {}",
                self.chi.len(),
                sets.len()
            )));
        }
        let r = self.r();
        for (i, (row, set)) in self.chi.iter().zip(sets.sets()).enumerate() {
            if row.len() != r {
                return Err(Error::input(format!(
                    "set {i}: {} picks, expected {r}",
                    row.len()
                )));
            }
            let mut seen = vec![false; set.len()];
            for &j in row {
                if j >= set.len() || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::input(format!(
                        "set {i}: position {j} is out of range or repeated"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Fractional-variable bookkeeping at one stall of the rounding loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stall {
    /// Number of active sets (prefix length).
    pub n: usize,
    /// Fractional variables among the active sets.
    pub floating: usize,
    /// Active sets holding at least one fractional variable.
    pub sets_with_floating: usize,
}

/// Output of [`k_subset_rounding_traced`].
#[derive(Clone, Debug, PartialEq)]
pub struct Rounding {
    /// Chosen member positions per set, ascending.
    pub subsets: Vec<Vec<usize>>,
    /// One record per stall, in order.
    pub stalls: Vec<Stall>,
    /// Kernel walks performed.
    pub walks: usize,
}

/// Picks `k` members from every set with prefix deviation at most `2d`
/// from the `k / |V_i|` share.
pub fn k_subset_rounding(sets: &SetSequence, k: usize) -> Result<Vec<Vec<usize>>> {
    Ok(k_subset_rounding_traced(sets, k, Tolerances::default())?.subsets)
}

/// [`k_subset_rounding`] with explicit tolerances, also returning the stall trace.
pub fn k_subset_rounding_traced(sets: &SetSequence, k: usize, tol: Tolerances) -> Result<Rounding> {
    if k == 0 {
        return Err(Error::input("k must be positive"));
    }
    if let Some((i, s)) = sets.sets().iter().enumerate().find(|(_, s)| s.len() < k) {
        return Err(Error::input(format!(
            "set {i} has {} members, fewer than k = {k}",
            s.len()
        )));
    }
    let d = sets.d();
    let n_sets = sets.len();
    let mut x: Vec<Vec<f64>> = sets
        .sets()
        .iter()
        .map(|s| vec![k as f64 / s.len() as f64; s.len()])
        .collect();
    let mut stalls = Vec::new();
    let mut walks = 0;
    let mut n = n_sets.min(1);

    while n > 0 {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..x[i].len()).map(move |j| (i, j)))
            .filter(|&(i, j)| is_floating(x[i][j]))
            .collect();
        // Row of each active set that still holds floating variables.
        let mut set_rows = BTreeMap::new();
        for &(i, _) in &pairs {
            let next = d + set_rows.len();
            set_rows.entry(i).or_insert(next);
        }
        let rows = d + set_rows.len();
        let columns: Vec<Vec<f64>> = pairs
            .iter()
            .map(|&(i, j)| {
                let mut col = sets.sets()[i][j].clone();
                col.resize(rows, 0.0);
                col[set_rows[&i]] = 1.0;
                col
            })
            .collect();
        let sys = ColumnSystem::new(rows, columns)?;

        match kernel_direction(&sys, tol.rank) {
            Some(dir) => {
                let mut vals: Vec<f64> = pairs.iter().map(|&(i, j)| x[i][j]).collect();
                box_walk(&mut vals, &dir.alpha, 0.0, 1.0, tol.boundary)?;
                for (&(i, j), v) in pairs.iter().zip(vals) {
                    x[i][j] = v;
                }
                for &i in set_rows.keys() {
                    restore_cardinality(&mut x[i], k);
                }
                walks += 1;
            }
            None => {
                if pairs.len() > rows {
                    return Err(Error::Internal(format!(
                        "independent system with {} columns but only {rows} rows",
                        pairs.len()
                    )));
                }
                stalls.push(Stall {
                    n,
                    floating: pairs.len(),
                    sets_with_floating: set_rows.len(),
                });
                if n == n_sets {
                    break;
                }
                n += 1;
            }
        }
    }

    let subsets = x.iter().map(|xi| round_set(xi, k)).collect();
    Ok(Rounding {
        subsets,
        stalls,
        walks,
    })
}

fn is_floating(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

// Shifts the floating entries so they sum to exactly `k` minus the number
// of entries fixed at 1. A lone floating entry must then be integral.
fn restore_cardinality(xi: &mut [f64], k: usize) {
    let ones = xi.iter().filter(|&&v| v == 1.0).count();
    let target = k as f64 - ones as f64;
    let floating: Vec<usize> = (0..xi.len()).filter(|&j| is_floating(xi[j])).collect();
    match floating.len() {
        0 => {}
        1 => xi[floating[0]] = target.round().clamp(0.0, 1.0),
        m => {
            let sum: f64 = floating.iter().map(|&j| xi[j]).sum();
            let shift = (target - sum) / m as f64;
            for &j in &floating {
                xi[j] = (xi[j] + shift).clamp(0.0, 1.0);
            }
        }
    }
}

// Largest floating entries go to 1 (smaller position wins ties), keeping `k` members.
fn round_set(xi: &[f64], k: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = (0..xi.len()).filter(|&j| xi[j] == 1.0).collect();
    let mut floating: Vec<usize> = (0..xi.len()).filter(|&j| is_floating(xi[j])).collect();
    floating.sort_by(|&a, &b| xi[b].total_cmp(&xi[a]).then(a.cmp(&b)));
    let missing = k.saturating_sub(chosen.len());
    chosen.extend(floating.into_iter().take(missing));
    chosen.sort_unstable();
    chosen
}

/// `max_n ‖Σ_{i<=n} (Σ_{v∈U_i} v − (k/|V_i|) Σ_{v∈V_i} v)‖` against the bound `2d`.
pub fn subset_deviation(sets: &SetSequence, subsets: &[Vec<usize>]) -> Result<DiscrepancyReport> {
    if subsets.len() != sets.len() {
        return Err(Error::input("one subset per set required"));
    }
    let mut acc = CompensatedVec::zeros(sets.d());
    let mut report = DiscrepancyReport::new(1, 2.0 * sets.d() as f64);
    for (i, (set, u)) in sets.sets().iter().zip(subsets).enumerate() {
        if let Some(&j) = u.iter().find(|&&j| j >= set.len()) {
            return Err(Error::input(format!("set {i}: position {j} out of range")));
        }
        let share = u.len() as f64 / set.len() as f64;
        for &j in u {
            acc.add(&set[j]);
        }
        for v in set {
            acc.add_scaled(v, -share);
        }
        report.observe(0, i + 1, norm_unchecked(&acc.values(), sets.norm()));
    }
    Ok(report.finalize(BOUND_SLACK))
}

/// Guaranteed discrepancy of [`r_selection`] for this instance:
/// `2 C(r) d`, plus `2d / r` when some set has more than `r` members
/// (and `2d` for `r = 1`).
pub fn r_selection_bound(sets: &SetSequence, r: usize, table: &CTable) -> f64 {
    let d = sets.d() as f64;
    if r <= 1 {
        return 2.0 * d;
    }
    let oversize = sets.sets().iter().any(|s| s.len() > r);
    2.0 * table.c(r) * d + if oversize { 2.0 * d / r as f64 } else { 0.0 }
}

/// Chooses `r` distinct members per set, one per class, with discrepancy at
/// most [`r_selection_bound`] (never above `5d`).
pub fn r_selection(sets: &SetSequence, r: usize, table: &CTable) -> Result<Selection> {
    if r == 0 {
        return Err(Error::input("r must be positive"));
    }
    table.ensure(r)?;
    if let Some((i, s)) = sets.sets().iter().enumerate().find(|(_, s)| s.len() < r) {
        return Err(Error::input(format!(
            "set {i} has {} members, fewer than r = {r}",
            s.len()
        )));
    }
    // Stage 1: cut every set down to exactly r members.
    let base: Vec<Vec<usize>> = if sets.sets().iter().any(|s| s.len() > r) {
        k_subset_rounding(sets, r)?
    } else {
        sets.sets().iter().map(|s| (0..s.len()).collect()).collect()
    };
    let mut chi = vec![vec![usize::MAX; r]; sets.len()];
    assign_classes(sets, &base, r, 0, table, &mut chi)?;
    Ok(Selection { chi })
}

// Splits each `picks[i]` (all of size `r`) into r1 + r2 members by subset
// rounding and recurses; a single class takes the one remaining member.
fn assign_classes(
    sets: &SetSequence,
    picks: &[Vec<usize>],
    r: usize,
    offset: usize,
    table: &CTable,
    chi: &mut [Vec<usize>],
) -> Result<()> {
    if r == 1 {
        for (row, p) in chi.iter_mut().zip(picks) {
            row[offset] = p[0];
        }
        return Ok(());
    }
    let (r1, r2) = table.split(r);
    let sub = sets.restrict(picks);
    let chosen = k_subset_rounding(&sub, r1)?;
    let mut left = Vec::with_capacity(picks.len());
    let mut right = Vec::with_capacity(picks.len());
    for (p, c) in picks.iter().zip(&chosen) {
        let mut inside = vec![false; p.len()];
        c.iter().for_each(|&j| inside[j] = true);
        left.push(c.iter().map(|&j| p[j]).collect::<Vec<_>>());
        right.push(
            (0..p.len())
                .filter(|&j| !inside[j])
                .map(|j| p[j])
                .collect::<Vec<_>>(),
        );
    }
    assign_classes(sets, &left, r1, offset, table, chi)?;
    assign_classes(sets, &right, r2, offset + r1, table, chi)
}

/// Discrepancy `max_n max_l ‖Σ_{i<=n} (χ(i,l) − mean(V_i))‖`, reported
/// against the bound `5d`.
pub fn disc(sets: &SetSequence, chi: &Selection) -> Result<DiscrepancyReport> {
    selection_report(sets, chi, true, 5.0 * sets.d() as f64)
}

/// Prefix deviations of a selection, optionally without the centering term,
/// against an explicit bound.
pub fn selection_report(
    sets: &SetSequence,
    chi: &Selection,
    centered: bool,
    bound: f64,
) -> Result<DiscrepancyReport> {
    chi.validate(sets)?;
    let r = chi.r();
    let mut acc = vec![CompensatedVec::zeros(sets.d()); r];
    let mut report = DiscrepancyReport::new(r, bound);
    for (i, row) in chi.chi.iter().enumerate() {
        let mean = centered.then(|| sets.mean(i));
        for (l, &j) in row.iter().enumerate() {
            acc[l].add(&sets.sets()[i][j]);
            if let Some(m) = &mean {
                acc[l].add_scaled(m, -1.0);
            }
            report.observe(l, i + 1, norm_unchecked(&acc[l].values(), sets.norm()));
        }
    }
    Ok(report.finalize(BOUND_SLACK))
}

/// A selection for zero-sum sets together with its uncentered report.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSumSelection {
    pub selection: Selection,
    /// `max_n max_l ‖Σ_{i<=n} χ(i,l)‖` against `5d`.
    pub report: DiscrepancyReport,
}

/// [`r_selection`] for sets whose members sum to zero, where the class
/// prefix sums themselves stay within `5d`.
pub fn zero_sum_selection(
    sets: &SetSequence,
    r: usize,
    table: &CTable,
) -> Result<ZeroSumSelection> {
    for (i, set) in sets.sets().iter().enumerate() {
        let mut acc = CompensatedVec::zeros(sets.d());
        set.iter().for_each(|v| acc.add(v));
        let total = norm_unchecked(&acc.values(), sets.norm());
        if total > ZERO_SUM_TOLERANCE {
            return Err(Error::input(format!(
                "set {i} is not zero-sum (its members sum to a vector of norm {total})"
            )));
        }
    }
    let selection = r_selection(sets, r, table)?;
    let report = selection_report(sets, &selection, false, 5.0 * sets.d() as f64)?;
    Ok(ZeroSumSelection { selection, report })
}
