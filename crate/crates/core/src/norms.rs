//! Norms on `R^d` and unit-ball membership.

use std::fmt;

use crate::error::{Error, Result};

/// A norm on `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    L1,
    L2,
    Linf,
    /// `sqrt(sum_i w_i * x_i^2)` with strictly positive weights, one per coordinate.
    WeightedDiag(Vec<f64>),
}

impl NormKind {
    /// Builds a weighted diagonal norm, rejecting non-positive or non-finite weights.
    pub fn weighted_diag(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("weighted norm needs at least one weight"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::input(format!("weight {w} is not strictly positive")));
        }
        Ok(NormKind::WeightedDiag(weights))
    }

    /// Lowercase name used in file formats.
    pub fn name(&self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
            NormKind::WeightedDiag(_) => "wdiag",
        }
    }

    /// Parses a norm name; `weights` is required for (and only used by) `"wdiag"`.
    pub fn from_name(name: &str, weights: Option<Vec<f64>>) -> Result<Self> {
        match name {
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            "linf" => Ok(NormKind::Linf),
            "wdiag" => match weights {
                Some(w) => NormKind::weighted_diag(w),
                None => Err(Error::input("norm \"wdiag\" requires weights")),
            },
            other => Err(Error::input(format!("unknown norm {other:?}"))),
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            NormKind::WeightedDiag(w) => Some(w),
            _ => None,
        }
    }

    /// Checks that this norm can measure vectors of dimension `d`.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            NormKind::WeightedDiag(w) if w.len() != d => Err(Error::DimensionMismatch {
                expected: w.len(),
                got: d,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates `‖v‖` for the given norm.
pub fn norm(v: &[f64], kind: &NormKind) -> Result<f64> {
    kind.check_dim(v.len())?;
    Ok(norm_unchecked(v, kind))
}

/// Like [`norm`] but assumes the dimension was validated upstream.
pub(crate) fn norm_unchecked(v: &[f64], kind: &NormKind) -> f64 {
    match kind {
        NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
        NormKind::L2 => scaled_l2(v.iter().copied()),
        NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        NormKind::WeightedDiag(w) => scaled_l2(v.iter().zip(w).map(|(x, w)| x * w.sqrt())),
    }
}

// Scaling by the largest magnitude avoids overflow for huge components.
fn scaled_l2(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let scale = xs.clone().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = xs.map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

/// True iff `norm(v) <= 1 + eps`.
pub fn in_unit_ball(v: &[f64], kind: &NormKind, eps: f64) -> Result<bool> {
    if !(eps >= 0.0) {
        return Err(Error::input("unit-ball tolerance must be nonnegative"));
    }
    Ok(norm(v, kind)? <= 1.0 + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(norm(&[3.0, 4.0], &NormKind::L2).unwrap(), 5.0);
        assert_eq!(norm(&[1.0, -2.0, 3.0], &NormKind::L1).unwrap(), 6.0);
        assert_eq!(norm(&[0.2, -0.9], &NormKind::Linf).unwrap(), 0.9);
    }

    #[test]
    fn ball_examples() {
        assert!(in_unit_ball(&[1.0, 0.0], &NormKind::L2, 0.0).unwrap());
        assert!(!in_unit_ball(&[1.0, 1.0], &NormKind::L2, 0.0).unwrap());
        assert!(in_unit_ball(&[1.0, 1.0], &NormKind::Linf, 0.0).unwrap());
        assert!(in_unit_ball(&[1.0, 1.0], &NormKind::L2, -1.0).is_err());
    }

    #[test]
    fn weighted() {
        let w = NormKind::weighted_diag(vec![4.0, 1.0]).unwrap();
        assert_eq!(norm(&[1.0, 0.0], &w).unwrap(), 2.0);
        assert!(matches!(
            norm(&[1.0, 0.0, 0.0], &w),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(NormKind::weighted_diag(vec![1.0, 0.0]).is_err());
        assert!(NormKind::weighted_diag(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            assert_eq!(NormKind::from_name(kind.name(), None).unwrap(), kind);
        }
        let w = NormKind::from_name("wdiag", Some(vec![2.0])).unwrap();
        assert_eq!(w.weights(), Some(&[2.0][..]));
        assert!(NormKind::from_name("wdiag", None).is_err());
        assert!(NormKind::from_name("l3", None).is_err());
    }

    #[test]
    fn zero_iff_zero_vector() {
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            assert_eq!(norm(&[0.0, 0.0], &kind).unwrap(), 0.0);
            assert!(norm(&[0.0, 1e-300], &kind).unwrap() > 0.0);
        }
    }

    fn kinds() -> impl Strategy<Value = NormKind> {
        prop_oneof![
            Just(NormKind::L1),
            Just(NormKind::L2),
            Just(NormKind::Linf),
            Just(NormKind::WeightedDiag(vec![0.5, 2.0, 1.0, 3.0])),
        ]
    }

    fn vec4() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0f64, 4)
    }

    proptest! {
        #[test]
        fn triangle_inequality(kind in kinds(), v in vec4(), w in vec4()) {
            let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            let lhs = norm(&sum, &kind).unwrap();
            let rhs = norm(&v, &kind).unwrap() + norm(&w, &kind).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn homogeneity(kind in kinds(), v in vec4(), s in -5.0..5.0f64) {
            let scaled: Vec<f64> = v.iter().map(|x| s * x).collect();
            let lhs = norm(&scaled, &kind).unwrap();
            let rhs = s.abs() * norm(&v, &kind).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn norm_ordering(v in vec4()) {
            let l1 = norm(&v, &NormKind::L1).unwrap();
            let l2 = norm(&v, &NormKind::L2).unwrap();
            let linf = norm(&v, &NormKind::Linf).unwrap();
            prop_assert!(l2 <= l1 * (1.0 + 1e-15));
            prop_assert!(linf <= l2 * (1.0 + 1e-15));
        }
    }
}
