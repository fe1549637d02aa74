//! Browser bindings for the interactive page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no generated TypeScript types. The `*_json` functions hold the logic
//! and are what the native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use vecbal::generate::{gen_sequence, gen_sets, Distribution};
use vecbal::selection::r_selection_bound;
use vecbal::{
    balanced_partition, c_table, norm, r_selection, zero_sum_selection, NormKind, SetSequence,
    VectorSequence,
};

#[derive(Serialize)]
struct Curves {
    /// `curves[j][k-1]` = deviation of class `j` after the first `k` elements.
    curves: Vec<Vec<f64>>,
    bound: f64,
    achieved: f64,
    /// 0-based class of each sequence element (partition only).
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<usize>>,
    /// The generated points, for 2-d scatter plots.
    points: Vec<Vec<f64>>,
}

fn parse_norm(name: &str, d: usize) -> Result<NormKind, String> {
    if name == "wdiag" {
        // Fixed, visibly anisotropic weights for the demo.
        let weights = (0..d).map(|i| 1.0 + 3.0 * i as f64).collect();
        return NormKind::weighted_diag(weights).map_err(|e| e.to_string());
    }
    NormKind::from_name(name, None).map_err(|e| e.to_string())
}

/// Generates `n` vectors, partitions them into `r` classes, and returns each
/// class's prefix deviation curve against the bound `C(r) d`.
pub fn partition_json(
    n: usize,
    d: usize,
    r: usize,
    norm_name: &str,
    dist: &str,
    seed: u64,
) -> Result<String, String> {
    let err = |e: vecbal::Error| e.to_string();
    if r == 0 {
        return Err("r must be positive".into());
    }
    let kind = parse_norm(norm_name, d)?;
    let dist = Distribution::from_name(dist).map_err(err)?;
    let vs = gen_sequence(n, d, &kind, dist, seed).map_err(err)?;
    let seq = VectorSequence::new(d, kind, vs).map_err(err)?;
    let table = c_table(r);
    let part = balanced_partition(&seq, r, &table).map_err(err)?;

    let share = 1.0 / r as f64;
    let mut sums = vec![vec![0.0; d]; r];
    let mut total = vec![0.0; d];
    let mut curves = vec![Vec::with_capacity(n); r];
    for (v, &l) in seq.vectors().iter().zip(&part.labels) {
        add(&mut total, v, 1.0);
        add(&mut sums[l], v, 1.0);
        for (j, s) in sums.iter().enumerate() {
            let dev: Vec<f64> = s.iter().zip(&total).map(|(a, t)| a - share * t).collect();
            curves[j].push(norm(&dev, seq.norm()).map_err(err)?);
        }
    }
    finish(Curves {
        achieved: max_of(&curves),
        curves,
        bound: table.c(r) * d as f64,
        labels: Some(part.labels),
        points: seq.vectors().to_vec(),
    })
}

/// Generates `n` sets of `m` vectors and returns the class prefix curves of
/// an `r`-selection. With `zero_sum` the sets are centered and the curves
/// show raw class sums against `5d`; otherwise centered sums against the
/// instance's guaranteed bound.
pub fn selection_json(
    n: usize,
    m: usize,
    d: usize,
    r: usize,
    norm_name: &str,
    zero_sum: bool,
    seed: u64,
) -> Result<String, String> {
    let err = |e: vecbal::Error| e.to_string();
    if r == 0 || m < r {
        return Err(format!("need 1 <= r <= set size, got r = {r}, m = {m}"));
    }
    let kind = parse_norm(norm_name, d)?;
    let dist = if zero_sum {
        Distribution::ZeroSum
    } else {
        Distribution::Ball
    };
    let raw = gen_sets(n, m, d, &kind, dist, seed).map_err(err)?;
    let sets = SetSequence::new(d, kind, raw).map_err(err)?;
    let table = c_table(r);
    let (chi, bound) = if zero_sum {
        let z = zero_sum_selection(&sets, r, &table).map_err(err)?;
        (z.selection, 5.0 * d as f64)
    } else {
        let chi = r_selection(&sets, r, &table).map_err(err)?;
        (chi, r_selection_bound(&sets, r, &table))
    };

    let mut sums = vec![vec![0.0; d]; r];
    let mut curves = vec![Vec::with_capacity(n); r];
    for (set, row) in sets.sets().iter().zip(&chi.chi) {
        let mean_scale = if zero_sum {
            0.0
        } else {
            1.0 / set.len() as f64
        };
        for (l, &j) in row.iter().enumerate() {
            add(&mut sums[l], &set[j], 1.0);
            for v in set {
                add(&mut sums[l], v, -mean_scale);
            }
            curves[l].push(norm(&sums[l], sets.norm()).map_err(err)?);
        }
    }
    finish(Curves {
        achieved: max_of(&curves),
        curves,
        bound,
        labels: None,
        points: sets.sets().iter().flatten().cloned().collect(),
    })
}

#[derive(Serialize)]
struct TableRow {
    r: usize,
    c: f64,
    split: Option<(usize, usize)>,
    refined: f64,
}

/// `C(r)`, its split, and `C(r) + 1/r` for `r = 1..=r_max`.
pub fn c_table_json(r_max: usize) -> Result<String, String> {
    if r_max == 0 || r_max > 100_000 {
        return Err("r_max must lie in 1..=100000".into());
    }
    let table = c_table(r_max);
    let rows: Vec<TableRow> = (1..=r_max)
        .map(|r| TableRow {
            r,
            c: table.c(r),
            split: (r >= 2).then(|| table.split(r)),
            refined: table.c(r) + 1.0 / r as f64,
        })
        .collect();
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

fn add(acc: &mut [f64], v: &[f64], scale: f64) {
    acc.iter_mut().zip(v).for_each(|(a, x)| *a += scale * x);
}

fn max_of(curves: &[Vec<f64>]) -> f64 {
    curves.iter().flatten().fold(0.0, |m, &x| m.max(x))
}

fn finish(c: Curves) -> Result<String, String> {
    serde_json::to_string(&c).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn partition(
    n: usize,
    d: usize,
    r: usize,
    norm: &str,
    dist: &str,
    seed: u32,
) -> Result<String, JsValue> {
    partition_json(n, d, r, norm, dist, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn selection(
    n: usize,
    m: usize,
    d: usize,
    r: usize,
    norm: &str,
    zero_sum: bool,
    seed: u32,
) -> Result<String, JsValue> {
    selection_json(n, m, d, r, norm, zero_sum, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn constants(r_max: usize) -> Result<String, JsValue> {
    c_table_json(r_max).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn partition_curves_respect_bound() {
        for norm in ["l1", "l2", "linf", "wdiag"] {
            let v: Value =
                serde_json::from_str(&partition_json(300, 2, 5, norm, "ball", 3).unwrap()).unwrap();
            let curves = v["curves"].as_array().unwrap();
            assert_eq!(curves.len(), 5);
            assert!(curves.iter().all(|c| c.as_array().unwrap().len() == 300));
            let bound = v["bound"].as_f64().unwrap();
            assert!((bound - 1.75 * 2.0).abs() < 1e-15);
            assert!(v["achieved"].as_f64().unwrap() <= bound * (1.0 + 1e-6));
            assert_eq!(v["points"].as_array().unwrap().len(), 300);
        }
    }

    #[test]
    fn selection_curves_respect_bound() {
        for zero_sum in [false, true] {
            let v: Value =
                serde_json::from_str(&selection_json(120, 4, 2, 3, "l2", zero_sum, 8).unwrap())
                    .unwrap();
            assert_eq!(v["curves"].as_array().unwrap().len(), 3);
            assert!(v["achieved"].as_f64().unwrap() <= v["bound"].as_f64().unwrap() * (1.0 + 1e-6));
        }
        assert!(selection_json(10, 2, 2, 3, "l2", false, 0).is_err());
    }

    #[test]
    fn constants_table() {
        let rows: Value = serde_json::from_str(&c_table_json(7).unwrap()).unwrap();
        let last = &rows[6];
        assert_eq!(last["r"], 7);
        assert_eq!(last["split"], serde_json::json!([3, 4]));
        assert!(rows[0]["split"].is_null());
        assert!(c_table_json(0).is_err());
    }

    #[test]
    fn bad_parameters() {
        assert!(partition_json(10, 2, 0, "l2", "ball", 0).is_err());
        assert!(partition_json(10, 2, 2, "l7", "ball", 0).is_err());
        assert!(partition_json(10, 2, 2, "l2", "zerosum", 0).is_err());
    }
}
