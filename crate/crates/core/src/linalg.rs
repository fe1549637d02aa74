//! Dense kernel directions and the bounded line walk.
//!
//! Both the streaming two-partition and the subset rounding keep a point
//! satisfying a homogeneous linear system and move it along a kernel
//! direction until some coordinate reaches the boundary of its box.

use crate::error::{Error, Result};

/// Columns of a small dense constraint matrix, one per floating variable.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSystem {
    rows: usize,
    columns: Vec<Vec<f64>>,
}

impl ColumnSystem {
    pub fn new(rows: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: bad.len(),
            });
        }
        Ok(ColumnSystem { rows, columns })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// `‖sum_j alpha_j * column_j‖_inf`.
    pub fn residual(&self, alpha: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| {
                self.columns
                    .iter()
                    .zip(alpha)
                    .map(|(c, a)| c[i] * a)
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    fn max_magnitude(&self) -> f64 {
        self.columns
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// A nonzero combination of the columns that (numerically) vanishes.
/// Normalized to `‖alpha‖_inf = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelDirection {
    pub alpha: Vec<f64>,
}

/// Finds a nonzero `alpha` with `sum_j alpha_j * column_j ≈ 0`, or `None` if
/// the columns are independent.
///
/// Gaussian elimination with partial pivoting processes the columns in order;
/// the first column whose eliminated remainder has `∞`-norm at most
/// `tol_rank * max_column_magnitude` is written as a combination of the
/// earlier pivot columns by back substitution.
pub fn kernel_direction(sys: &ColumnSystem, tol_rank: f64) -> Option<KernelDirection> {
    let rows = sys.rows;
    let m = sys.columns.len();
    if m == 0 {
        return None;
    }
    let threshold = tol_rank * sys.max_magnitude();

    // Row-major working copy: a[i][j].
    let mut a: Vec<Vec<f64>> = (0..rows)
        .map(|i| sys.columns.iter().map(|c| c[i]).collect())
        .collect();
    let mut pivot_rows = 0usize;

    for col in 0..m {
        let (best, best_abs) =
            (pivot_rows..rows)
                .map(|i| (i, a[i][col].abs()))
                .fold(
                    (usize::MAX, -1.0),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                );

        if best == usize::MAX || best_abs <= threshold {
            // Columns 0..col are pivots on rows 0..col: solve the upper
            // triangle for the combination that cancels column `col`.
            let mut alpha = vec![0.0; m];
            alpha[col] = 1.0;
            for t in (0..col).rev() {
                let mut rhs = -a[t][col];
                for s in t + 1..col {
                    rhs -= a[t][s] * alpha[s];
                }
                alpha[t] = rhs / a[t][t];
            }
            let scale = alpha.iter().fold(0.0_f64, |mx, x| mx.max(x.abs()));
            alpha.iter_mut().for_each(|x| *x /= scale);
            return Some(KernelDirection { alpha });
        }

        a.swap(pivot_rows, best);
        let p = pivot_rows;
        let pivot = a[p][col];
        for i in p + 1..rows {
            let factor = a[i][col] / pivot;
            if factor != 0.0 {
                let (upper, lower) = a.split_at_mut(i);
                let src = &upper[p];
                for (x, s) in lower[0][col..].iter_mut().zip(&src[col..]) {
                    *x -= factor * s;
                }
            }
        }
        pivot_rows += 1;
    }
    None
}

/// Result of [`box_walk`].
#[derive(Clone, Debug, PartialEq)]
pub struct Walk {
    /// Step taken along `alpha`.
    pub t_star: f64,
    /// Every coordinate sitting exactly on `lo` or `hi` after the walk (ascending).
    pub hits: Vec<usize>,
}

/// Moves `beta` to `beta + t * alpha` for the `t` of smallest magnitude that
/// puts some coordinate on `lo` or `hi`; positive `t` wins an exact tie.
///
/// Coordinates ending within `eps_boundary` of an endpoint are snapped onto
/// it, and the result is clamped into `[lo, hi]`.
pub fn box_walk(
    beta: &mut [f64],
    alpha: &[f64],
    lo: f64,
    hi: f64,
    eps_boundary: f64,
) -> Result<Walk> {
    if beta.len() != alpha.len() {
        return Err(Error::DimensionMismatch {
            expected: beta.len(),
            got: alpha.len(),
        });
    }
    // Largest admissible step in each direction.
    let mut t_up = f64::INFINITY;
    let mut t_down = f64::INFINITY;
    for (&b, &a) in beta.iter().zip(alpha) {
        if a > 0.0 {
            t_up = t_up.min((hi - b) / a);
            t_down = t_down.min((b - lo) / a);
        } else if a < 0.0 {
            t_up = t_up.min((lo - b) / a);
            t_down = t_down.min((b - hi) / a);
        }
    }
    if !t_up.is_finite() && !t_down.is_finite() {
        return Err(Error::Internal(
            "walk direction is zero on every coordinate".into(),
        ));
    }
    let t_star = if t_up <= t_down { t_up } else { -t_down };

    let mut hits = Vec::new();
    for (j, (b, &a)) in beta.iter_mut().zip(alpha).enumerate() {
        let moved = (*b + t_star * a).clamp(lo, hi);
        *b = if moved - lo <= eps_boundary {
            lo
        } else if hi - moved <= eps_boundary {
            hi
        } else {
            moved
        };
        if *b == lo || *b == hi {
            hits.push(j);
        }
    }
    Ok(Walk { t_star, hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sys(rows: usize, cols: &[&[f64]]) -> ColumnSystem {
        ColumnSystem::new(rows, cols.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn explicit_dependence() {
        let s = sys(2, &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let k = kernel_direction(&s, 1e-10).unwrap();
        let ratio = k.alpha[0] / k.alpha[2];
        assert!((ratio + 1.0).abs() < 1e-12);
        assert!((k.alpha[1] / k.alpha[2] + 1.0).abs() < 1e-12);
        assert!(s.residual(&k.alpha) < 1e-12);
    }

    #[test]
    fn zero_column() {
        let s = sys(2, &[&[0.0, 0.0]]);
        assert_eq!(kernel_direction(&s, 1e-10).unwrap().alpha, vec![1.0]);
    }

    #[test]
    fn independent() {
        let s = sys(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(kernel_direction(&s, 1e-10).is_none());
        assert!(kernel_direction(&sys(3, &[]), 1e-10).is_none());
    }

    #[test]
    fn ragged_columns_rejected() {
        assert!(ColumnSystem::new(2, vec![vec![1.0]]).is_err());
    }

    #[test]
    fn walk_simultaneous_hits() {
        let mut beta = [0.5, -0.5];
        let w = box_walk(&mut beta, &[1.0, -1.0], -1.0, 1.0, 1e-9).unwrap();
        assert_eq!(w.t_star, 0.5);
        assert_eq!(w.hits, vec![0, 1]);
        assert_eq!(beta, [1.0, -1.0]);
    }

    #[test]
    fn walk_prefers_smaller_step() {
        let mut beta = [0.25];
        let w = box_walk(&mut beta, &[1.0], -1.0, 2.0, 1e-9).unwrap();
        assert_eq!(w.t_star, -1.25);
        assert_eq!(w.hits, vec![0]);
        assert_eq!(beta, [-1.0]);
    }

    #[test]
    fn walk_tie_prefers_positive() {
        let mut beta = [0.0, 0.0];
        let w = box_walk(&mut beta, &[2.0, 1.0], -1.0, 1.0, 1e-9).unwrap();
        assert_eq!(w.t_star, 0.5);
        assert_eq!(w.hits, vec![0]);
        assert_eq!(beta, [1.0, 0.5]);
    }

    #[test]
    fn walk_zero_direction_is_an_error() {
        let mut beta = [0.0];
        assert!(matches!(
            box_walk(&mut beta, &[0.0], -1.0, 1.0, 1e-9),
            Err(Error::Internal(_))
        ));
    }

    // Random matrix with a planted dependence: the last column is a
    // combination of the others.
    fn rank_deficient() -> impl Strategy<Value = ColumnSystem> {
        (1usize..=64, 1usize..=8).prop_flat_map(|(rows, extra)| {
            let m = extra.min(rows);
            (
                prop::collection::vec(prop::collection::vec(-1.0..1.0f64, rows), m),
                prop::collection::vec(-1.0..1.0f64, m),
            )
                .prop_map(move |(mut cols, coef)| {
                    let mut last = vec![0.0; rows];
                    for (c, k) in cols.iter().zip(&coef) {
                        for (l, x) in last.iter_mut().zip(c) {
                            *l += k * x;
                        }
                    }
                    cols.push(last);
                    ColumnSystem::new(rows, cols).unwrap()
                })
        })
    }

    fn overfull() -> impl Strategy<Value = ColumnSystem> {
        (1usize..=32).prop_flat_map(|rows| {
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, rows), rows + 1)
                .prop_map(move |cols| ColumnSystem::new(rows, cols).unwrap())
        })
    }

    proptest! {
        #[test]
        fn kernel_residual_small(s in rank_deficient()) {
            let k = kernel_direction(&s, 1e-10).expect("planted dependence");
            let bound = 1e-8 * s.rows() as f64 * s.max_magnitude().max(1.0);
            prop_assert!(s.residual(&k.alpha) <= bound);
            let inf = k.alpha.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            prop_assert!((inf - 1.0).abs() < 1e-15);
        }

        #[test]
        fn overfull_always_dependent(s in overfull()) {
            prop_assert!(kernel_direction(&s, 1e-10).is_some());
        }

        #[test]
        fn walk_stays_in_box(
            pairs in prop::collection::vec((-0.99..0.99f64, -1.0..1.0f64), 1..12),
        ) {
            let mut beta: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let mut alpha: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            alpha[0] = if alpha[0] >= 0.0 { alpha[0] + 0.1 } else { alpha[0] - 0.1 };
            let w = box_walk(&mut beta, &alpha, -1.0, 1.0, 1e-9).unwrap();
            prop_assert!(!w.hits.is_empty());
            for b in &beta {
                prop_assert!((-1.0..=1.0).contains(b));
            }
        }
    }
}
