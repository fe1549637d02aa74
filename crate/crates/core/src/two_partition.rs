//! Weighted two-way partitions by floating coefficients.
//!
//! Every vector `v_i` carries a coefficient `beta_i` in `[-r1, r2]`, and the
//! invariant `sum_i beta_i v_i = 0` is maintained. A coefficient that reaches
//! `r2` puts its vector into class 1 (`Y1`), one that reaches `-r1` into class 2
//! (`Y2`). Whenever `d + 1` coefficients float, their vectors are linearly
//! dependent and a walk along the dependence fixes at least one of them, so at
//! most `d` vectors are ever undecided. Consequently every prefix satisfies
//! `‖r2 ΣY1 − r1 ΣY2‖ <= r d`, i.e. `‖ΣY1 − (r1/r) ΣV‖ <= d`.

use crate::error::{Error, Result};
use crate::linalg::{box_walk, kernel_direction, ColumnSystem};
use crate::norms::{norm_unchecked, NormKind};
use crate::Tolerances;

/// An ordered sequence of `d`-dimensional vectors in the unit ball.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSequence {
    d: usize,
    norm: NormKind,
    vectors: Vec<Vec<f64>>,
}

impl VectorSequence {
    /// Validates dimensions and unit-ball membership (slack `1e-9`).
    pub fn new(d: usize, norm: NormKind, vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_ball_tolerance(d, norm, vectors, Tolerances::default().ball)
    }

    pub fn with_ball_tolerance(
        d: usize,
        norm: NormKind,
        vectors: Vec<Vec<f64>>,
        eps: f64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        norm.check_dim(d)?;
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            let n = norm_unchecked(v, &norm);
            if !(n <= 1.0 + eps) {
                return Err(Error::OutsideUnitBall { index, norm: n });
            }
        }
        Ok(VectorSequence { d, norm, vectors })
    }

    /// Divides every vector by the largest norm (when it exceeds 1) and
    /// returns the sequence together with the factor applied.
    pub fn rescaled(d: usize, norm: NormKind, mut vectors: Vec<Vec<f64>>) -> Result<(Self, f64)> {
        norm.check_dim(d)?;
        let max = vectors
            .iter()
            .filter(|v| v.len() == d)
            .map(|v| norm_unchecked(v, &norm))
            .fold(0.0_f64, f64::max);
        let scale = if max > 1.0 { 1.0 / max } else { 1.0 };
        for v in &mut vectors {
            v.iter_mut().for_each(|x| *x *= scale);
        }
        Ok((Self::new(d, norm, vectors)?, scale))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn norm(&self) -> &NormKind {
        &self.norm
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The subsequence at `indices`, keeping their order.
    pub(crate) fn subsequence(&self, indices: &[usize]) -> VectorSequence {
        VectorSequence {
            d: self.d,
            norm: self.norm.clone(),
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
        }
    }
}

/// Target shares `r1 : r2` for classes 1 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightedSplit {
    r1: usize,
    r2: usize,
}

impl WeightedSplit {
    pub fn new(r1: usize, r2: usize) -> Result<Self> {
        if r1 == 0 || r2 == 0 {
            return Err(Error::input(format!(
                "split parts must be positive, got ({r1}, {r2})"
            )));
        }
        Ok(WeightedSplit { r1, r2 })
    }

    pub fn r1(&self) -> usize {
        self.r1
    }

    pub fn r2(&self) -> usize {
        self.r2
    }

    pub fn r(&self) -> usize {
        self.r1 + self.r2
    }

    fn lo(&self) -> f64 {
        -(self.r1 as f64)
    }

    fn hi(&self) -> f64 {
        self.r2 as f64
    }
}

/// Class of a decided vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Coefficient reached `r2`; receives the `r1/r` share.
    One,
    /// Coefficient reached `-r1`; receives the `r2/r` share.
    Two,
}

#[derive(Clone, Debug)]
struct Floating {
    index: usize,
    vector: Vec<f64>,
    beta: f64,
}

/// Streaming state of the floating-coefficient construction.
///
/// Only the undecided window is stored; decided coefficients are dropped
/// after emission because they never change again. Memory is `O(d^2)`
/// regardless of how many vectors have been pushed.
#[derive(Clone, Debug)]
pub struct FloatingState {
    d: usize,
    split: WeightedSplit,
    tol: Tolerances,
    window: Vec<Floating>,
    next_unseen: usize,
    step: usize,
    // sum of beta * v over decided vectors, for residual monitoring only
    fixed_sum: Vec<f64>,
}

impl FloatingState {
    pub fn new(d: usize, split: WeightedSplit) -> Self {
        Self::with_tolerances(d, split, Tolerances::default())
    }

    pub fn with_tolerances(d: usize, split: WeightedSplit, tol: Tolerances) -> Self {
        FloatingState {
            d,
            split,
            tol,
            window: Vec::with_capacity(d + 1),
            next_unseen: 0,
            step: 0,
            fixed_sum: vec![0.0; d],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn split(&self) -> WeightedSplit {
        self.split
    }

    /// Number of decided vectors (the size of the fixed set).
    pub fn step(&self) -> usize {
        self.step
    }

    /// Index the next pushed vector will receive.
    pub fn next_unseen(&self) -> usize {
        self.next_unseen
    }

    /// Number of undecided vectors.
    pub fn floating(&self) -> usize {
        self.window.len()
    }

    /// `(index, beta)` of the undecided vectors, in index order.
    pub fn coefficients(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.window.iter().map(|f| (f.index, f.beta))
    }

    /// `‖sum_i beta_i v_i‖_inf` over every vector seen so far.
    pub fn residual(&self) -> f64 {
        let mut total = self.fixed_sum.clone();
        for f in &self.window {
            for (t, x) in total.iter_mut().zip(&f.vector) {
                *t += f.beta * x;
            }
        }
        total.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Adds the next vector and returns the vectors decided by this step,
    /// in ascending index order.
    ///
    /// The caller is responsible for `v` lying in the unit ball; only the
    /// dimension is checked here.
    pub fn push(&mut self, v: &[f64]) -> Result<Vec<(usize, Side)>> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: v.len(),
            });
        }
        self.window.push(Floating {
            index: self.next_unseen,
            vector: v.to_vec(),
            beta: 0.0,
        });
        self.next_unseen += 1;
        if self.window.len() <= self.d {
            return Ok(Vec::new());
        }

        let sys = ColumnSystem::new(
            self.d,
            self.window.iter().map(|f| f.vector.clone()).collect(),
        )?;
        let Some(dir) = kernel_direction(&sys, self.tol.rank) else {
            return Err(Error::Internal(format!(
                "no dependence found among {} vectors in dimension {}: {:?}",
                self.window.len(),
                self.d,
                sys.columns()
            )));
        };
        let mut beta: Vec<f64> = self.window.iter().map(|f| f.beta).collect();
        let walk = box_walk(
            &mut beta,
            &dir.alpha,
            self.split.lo(),
            self.split.hi(),
            self.tol.boundary,
        )?;
        for (f, b) in self.window.iter_mut().zip(beta) {
            f.beta = b;
        }
        Ok(self.retire(&walk.hits))
    }

    /// Decides every remaining vector by rounding its coefficient to the
    /// nearest endpoint (the midpoint goes to class 1).
    pub fn finish(&mut self) -> Vec<(usize, Side)> {
        let (lo, hi) = (self.split.lo(), self.split.hi());
        let mid = 0.5 * (lo + hi);
        for f in &mut self.window {
            f.beta = if f.beta >= mid { hi } else { lo };
        }
        let all: Vec<usize> = (0..self.window.len()).collect();
        self.retire(&all)
    }

    // Removes the window slots at `positions` (ascending), all of which sit on
    // an endpoint, and reports their classes.
    fn retire(&mut self, positions: &[usize]) -> Vec<(usize, Side)> {
        let hi = self.split.hi();
        let mut out = Vec::with_capacity(positions.len());
        for &p in positions.iter().rev() {
            let f = self.window.remove(p);
            for (s, x) in self.fixed_sum.iter_mut().zip(&f.vector) {
                *s += f.beta * x;
            }
            let side = if f.beta == hi { Side::One } else { Side::Two };
            out.push((f.index, side));
        }
        self.step += out.len();
        // Window is kept in index order, so reversing gives ascending indices.
        out.reverse();
        out
    }
}

/// Index lists of the two classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwoPartition {
    pub y1: Vec<usize>,
    pub y2: Vec<usize>,
}

impl TwoPartition {
    /// Side of each index, for a sequence of length `n`.
    pub fn sides(&self, n: usize) -> Vec<Side> {
        let mut sides = vec![Side::Two; n];
        for &i in &self.y1 {
            sides[i] = Side::One;
        }
        sides
    }
}

/// Splits `seq` so that every prefix of `Y1` stays within `d` of the
/// `(r1/r)` share (and `Y2` within `d` of the `(r2/r)` share).
pub fn weighted_two_partition(seq: &VectorSequence, split: WeightedSplit) -> Result<TwoPartition> {
    let mut state = FloatingState::new(seq.d(), split);
    let mut sides = vec![None; seq.len()];
    for v in seq.vectors() {
        for (i, side) in state.push(v)? {
            sides[i] = Some(side);
        }
    }
    for (i, side) in state.finish() {
        sides[i] = Some(side);
    }
    let mut out = TwoPartition::default();
    for (i, side) in sides.into_iter().enumerate() {
        match side {
            Some(Side::One) => out.y1.push(i),
            Some(Side::Two) => out.y2.push(i),
            None => unreachable!("finish decides every remaining vector"),
        }
    }
    Ok(out)
}

/// Largest prefix deviation `‖ΣY1 − (r1/r)ΣV‖` over all prefixes, in the
/// sequence's norm.
pub fn two_partition_deviation(
    seq: &VectorSequence,
    part: &TwoPartition,
    split: WeightedSplit,
) -> f64 {
    use crate::sum::CompensatedVec;
    let share = split.r1() as f64 / split.r() as f64;
    let sides = part.sides(seq.len());
    let mut y1 = CompensatedVec::zeros(seq.d());
    let mut all = CompensatedVec::zeros(seq.d());
    let mut worst = 0.0_f64;
    for (v, side) in seq.vectors().iter().zip(sides) {
        all.add(v);
        if side == Side::One {
            y1.add(v);
        }
        let dev: Vec<f64> = y1
            .values()
            .iter()
            .zip(all.values())
            .map(|(a, b)| a - share * b)
            .collect();
        worst = worst.max(norm_unchecked(&dev, seq.norm()));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(d: usize, vs: &[&[f64]]) -> VectorSequence {
        VectorSequence::new(d, NormKind::L2, vs.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    // Independent check: every prefix of the returned labeling.
    fn max_dev_1d(vals: &[f64], y1: &[usize], share: f64) -> f64 {
        let mut s1 = 0.0;
        let mut s = 0.0;
        let mut worst = 0.0_f64;
        for (i, v) in vals.iter().enumerate() {
            s += v;
            if y1.contains(&i) {
                s1 += v;
            }
            worst = worst.max((s1 - share * s).abs());
        }
        worst
    }

    #[test]
    fn empty_sequence() {
        let s = VectorSequence::new(3, NormKind::L1, vec![]).unwrap();
        let p = weighted_two_partition(&s, WeightedSplit::new(1, 1).unwrap()).unwrap();
        assert_eq!(p, TwoPartition::default());
    }

    #[test]
    fn four_ones() {
        let s = seq(1, &[&[1.0], &[1.0], &[1.0], &[1.0]]);
        let p = weighted_two_partition(&s, WeightedSplit::new(1, 1).unwrap()).unwrap();
        assert_eq!(p.y1.len() + p.y2.len(), 4);
        assert!(max_dev_1d(&[1.0; 4], &p.y1, 0.5) <= 1.0);
    }

    #[test]
    fn cancelling_pairs() {
        let w = [0.6, 0.8];
        let m = [-0.6, -0.8];
        let s = seq(2, &[&w, &m, &w, &m]);
        let split = WeightedSplit::new(1, 1).unwrap();
        let p = weighted_two_partition(&s, split).unwrap();
        assert!(two_partition_deviation(&s, &p, split) <= 2.0 * (1.0 + 1e-6));
    }

    #[test]
    fn push_first_vector_stays_floating() {
        let mut st = FloatingState::new(1, WeightedSplit::new(1, 1).unwrap());
        assert!(st.push(&[1.0]).unwrap().is_empty());
        assert_eq!(st.floating(), 1);
    }

    #[test]
    fn push_second_vector_fixes() {
        let mut st = FloatingState::new(1, WeightedSplit::new(1, 1).unwrap());
        st.push(&[1.0]).unwrap();
        let out = st.push(&[1.0]).unwrap();
        // kernel (−1, 1) walked by t = 1 puts both on endpoints at once
        assert_eq!(out, vec![(0, Side::Two), (1, Side::One)]);
        assert_eq!(st.floating(), 0);
        assert_eq!(st.step(), 2);
        assert!(max_dev_1d(&[1.0, 1.0], &[1], 0.5) <= 1.0);
    }

    #[test]
    fn zero_vector_keeps_residual() {
        let mut st = FloatingState::new(2, WeightedSplit::new(2, 3).unwrap());
        for v in [[0.3, 0.1], [0.0, 0.0], [-0.5, 0.2], [0.0, 0.0], [0.9, -0.1]] {
            st.push(&v).unwrap();
            assert!(st.residual() < 1e-12);
            assert!(st.floating() <= 2);
        }
    }

    #[test]
    fn finish_rounds_to_nearest() {
        let split = WeightedSplit::new(1, 1).unwrap();
        let mut st = FloatingState::new(2, split);
        assert!(st.finish().is_empty());

        st.window.push(Floating {
            index: 0,
            vector: vec![1.0, 0.0],
            beta: 0.9,
        });
        st.window.push(Floating {
            index: 1,
            vector: vec![0.0, 1.0],
            beta: 0.0,
        });
        st.window.push(Floating {
            index: 2,
            vector: vec![0.0, 1.0],
            beta: -0.2,
        });
        assert_eq!(
            st.finish(),
            vec![(0, Side::One), (1, Side::One), (2, Side::Two)]
        );
        assert_eq!(st.floating(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightedSplit::new(0, 1).is_err());
        assert!(matches!(
            VectorSequence::new(2, NormKind::L2, vec![vec![1.0, 1.0]]),
            Err(Error::OutsideUnitBall { index: 0, .. })
        ));
        assert!(VectorSequence::new(2, NormKind::L2, vec![vec![1.0]]).is_err());
        let mut st = FloatingState::new(2, WeightedSplit::new(1, 1).unwrap());
        assert!(st.push(&[1.0]).is_err());
    }

    #[test]
    fn rescale_records_factor() {
        let (s, scale) =
            VectorSequence::rescaled(1, NormKind::L1, vec![vec![4.0], vec![-2.0]]).unwrap();
        assert_eq!(scale, 0.25);
        assert_eq!(s.vectors(), &[vec![1.0], vec![-0.5]]);
    }

    fn instance() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, usize, usize)> {
        (1usize..=4, 1usize..=4, 1usize..=4).prop_flat_map(|(d, r1, r2)| {
            (
                Just(d),
                prop::collection::vec(prop::collection::vec(-1.0..1.0f64, d), 0..60),
                Just(r1),
                Just(r2),
            )
        })
    }

    proptest! {
        #[test]
        fn prefix_bound_and_monotone_fixing((d, raw, r1, r2) in instance()) {
            let (s, _) = VectorSequence::rescaled(d, NormKind::Linf, raw).unwrap();
            let split = WeightedSplit::new(r1, r2).unwrap();
            let mut st = FloatingState::new(d, split);
            let mut seen = std::collections::HashMap::new();
            for v in s.vectors() {
                for (i, side) in st.push(v).unwrap() {
                    prop_assert!(seen.insert(i, side).is_none());
                }
                prop_assert!(st.floating() <= d);
                prop_assert!(st.residual() <= 1e-7 * (1 + st.step()) as f64);
            }
            for (i, side) in st.finish() {
                prop_assert!(seen.insert(i, side).is_none());
            }
            prop_assert_eq!(seen.len(), s.len());

            let p = weighted_two_partition(&s, split).unwrap();
            prop_assert!(two_partition_deviation(&s, &p, split) <= d as f64 * (1.0 + 1e-6));
            let mirrored = TwoPartition { y1: p.y2.clone(), y2: p.y1.clone() };
            let flipped = WeightedSplit::new(r2, r1).unwrap();
            prop_assert!(two_partition_deviation(&s, &mirrored, flipped) <= d as f64 * (1.0 + 1e-6));
        }

        #[test]
        fn bound_scales_with_input_norm(
            raw in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..40),
            s in 0.05..1.0f64,
        ) {
            let vs: Vec<Vec<f64>> = raw.iter().map(|v| v.iter().map(|x| x * s / 2f64.sqrt()).collect()).collect();
            let seq = VectorSequence::new(2, NormKind::L2, vs).unwrap();
            let max = seq.vectors().iter().map(|v| norm_unchecked(v, &NormKind::L2)).fold(0.0, f64::max);
            let split = WeightedSplit::new(1, 2).unwrap();
            let p = weighted_two_partition(&seq, split).unwrap();
            prop_assert!(two_partition_deviation(&seq, &p, split) <= 2.0 * max * (1.0 + 1e-6));
        }
    }
}
