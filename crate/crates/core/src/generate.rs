//! Seeded instance generators.
//!
//! Randomness comes from a counter-based generator so that other
//! implementations can reproduce instances bit for bit: draw number `c`
//! (starting at 0) under seed `s` is
//!
//! ```text
//! z = s + (c + 1) * 0x9E3779B97F4A7C15          (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
//! z =  z ^ (z >> 31)
//! ```
//!
//! (the SplitMix64 finalizer). Uniform `f64` values in `[0, 1)` are
//! `(z >> 11) * 2^-53`; normal deviates use Box–Muller on two consecutive
//! uniforms, with `1 - u` in the logarithm.

use crate::error::{Error, Result};
use crate::norms::{norm_unchecked, NormKind};

/// SplitMix64 as a counter-based stream.
#[derive(Clone, Debug)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed, counter: 0 }
    }

    /// Output at an arbitrary position of the stream.
    pub fn at(seed: u64, counter: u64) -> u64 {
        let mut z = seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_u64(&mut self) -> u64 {
        let z = Self::at(self.seed, self.counter);
        self.counter += 1;
        z
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// How generated vectors are distributed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    /// Uniform in the unit ball of the chosen norm.
    Ball,
    /// Sequences: unit-norm random directions with random signs.
    /// Sets: pairs `{v, -v}` with `v` uniform in the ball.
    Signs,
    /// Sets only: `m` uniform ball vectors minus their mean, rescaled into
    /// the ball if needed, so each set sums to zero.
    ZeroSum,
}

impl Distribution {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "ball" => Ok(Distribution::Ball),
            "signs" => Ok(Distribution::Signs),
            "zerosum" => Ok(Distribution::ZeroSum),
            other => Err(Error::input(format!("unknown distribution {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Ball => "ball",
            Distribution::Signs => "signs",
            Distribution::ZeroSum => "zerosum",
        }
    }
}

/// Uniform sample from the unit ball of `norm` in `R^d`.
pub fn sample_ball(rng: &mut CounterRng, d: usize, norm: &NormKind) -> Vec<f64> {
    match norm {
        NormKind::Linf => (0..d).map(|_| rng.range(-1.0, 1.0)).collect(),
        NormKind::L1 => {
            // Exponential spacings: the first d of d + 1 normalized
            // exponentials are uniform on the simplex interior.
            let e: Vec<f64> = (0..=d).map(|_| -(1.0 - rng.uniform()).ln()).collect();
            let total: f64 = e.iter().sum();
            e[..d].iter().map(|x| rng.sign() * x / total).collect()
        }
        NormKind::L2 => l2_ball(rng, d),
        NormKind::WeightedDiag(w) => l2_ball(rng, d)
            .into_iter()
            .zip(w)
            .map(|(x, w)| x / w.sqrt())
            .collect(),
    }
}

fn l2_ball(rng: &mut CounterRng, d: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    let len = norm_unchecked(&g, &NormKind::L2);
    let radius = rng.uniform().powf(1.0 / d as f64);
    if len == 0.0 {
        return vec![0.0; d];
    }
    g.into_iter().map(|x| x * radius / len).collect()
}

fn unit_direction(rng: &mut CounterRng, d: usize, norm: &NormKind) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let n = norm_unchecked(&g, norm);
        if n > 0.0 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `n` vectors of a sequence instance.
pub fn gen_sequence(
    n: usize,
    d: usize,
    norm: &NormKind,
    dist: Distribution,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    norm.check_dim(d)?;
    if d == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    let mut rng = CounterRng::new(seed);
    match dist {
        Distribution::Ball => Ok((0..n).map(|_| sample_ball(&mut rng, d, norm)).collect()),
        Distribution::Signs => Ok((0..n)
            .map(|_| {
                let s = rng.sign();
                unit_direction(&mut rng, d, norm)
                    .into_iter()
                    .map(|x| s * x)
                    .collect()
            })
            .collect()),
        Distribution::ZeroSum => Err(Error::input(
            "distribution \"zerosum\" applies to set instances only",
        )),
    }
}

/// `n` sets of `m` vectors each (`signs` always yields pairs).
pub fn gen_sets(
    n: usize,
    m: usize,
    d: usize,
    norm: &NormKind,
    dist: Distribution,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    norm.check_dim(d)?;
    if d == 0 || m == 0 {
        return Err(Error::input("dimension and set size must be at least 1"));
    }
    let mut rng = CounterRng::new(seed);
    let sets = (0..n)
        .map(|_| match dist {
            Distribution::Ball => (0..m).map(|_| sample_ball(&mut rng, d, norm)).collect(),
            Distribution::Signs => {
                let v = sample_ball(&mut rng, d, norm);
                let neg = v.iter().map(|x| -x).collect();
                vec![v, neg]
            }
            Distribution::ZeroSum => zero_sum_set(&mut rng, m, d, norm),
        })
        .collect();
    Ok(sets)
}

fn zero_sum_set(rng: &mut CounterRng, m: usize, d: usize, norm: &NormKind) -> Vec<Vec<f64>> {
    let mut vs: Vec<Vec<f64>> = (0..m).map(|_| sample_ball(rng, d, norm)).collect();
    let mean: Vec<f64> = (0..d)
        .map(|c| vs.iter().map(|v| v[c]).sum::<f64>() / m as f64)
        .collect();
    for v in &mut vs {
        v.iter_mut().zip(&mean).for_each(|(x, mu)| *x -= mu);
    }
    let max = vs
        .iter()
        .map(|v| norm_unchecked(v, norm))
        .fold(0.0_f64, f64::max);
    if max > 1.0 {
        vs.iter_mut().flatten().for_each(|x| *x /= max);
    }
    vs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_stream() {
        // Reference SplitMix64 outputs for seed 0.
        let mut rng = CounterRng::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(CounterRng::at(0, 1), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let norms = [
            NormKind::L1,
            NormKind::L2,
            NormKind::Linf,
            NormKind::WeightedDiag(vec![0.5, 3.0, 1.0]),
        ];
        for norm in &norms {
            let vs = gen_sequence(500, 3, norm, Distribution::Ball, 7).unwrap();
            assert!(vs.iter().all(|v| norm_unchecked(v, norm) <= 1.0 + 1e-12));
            let vs = gen_sequence(50, 3, norm, Distribution::Signs, 7).unwrap();
            assert!(vs
                .iter()
                .all(|v| (norm_unchecked(v, norm) - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn scalar_ball_range() {
        let vs = gen_sequence(4, 1, &NormKind::L2, Distribution::Ball, 1).unwrap();
        assert_eq!(vs.len(), 4);
        assert!(vs.iter().all(|v| (-1.0..=1.0).contains(&v[0])));
    }

    #[test]
    fn zero_sum_sets_sum_to_zero() {
        let sets = gen_sets(30, 4, 3, &NormKind::L1, Distribution::ZeroSum, 3).unwrap();
        for s in &sets {
            for c in 0..3 {
                assert!(s.iter().map(|v| v[c]).sum::<f64>().abs() < 1e-12);
            }
            assert!(s
                .iter()
                .all(|v| norm_unchecked(v, &NormKind::L1) <= 1.0 + 1e-12));
        }
        assert!(gen_sequence(3, 2, &NormKind::L2, Distribution::ZeroSum, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let a = gen_sets(10, 3, 2, &NormKind::L2, Distribution::Ball, 42).unwrap();
        let b = gen_sets(10, 3, 2, &NormKind::L2, Distribution::Ball, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_sets(10, 3, 2, &NormKind::L2, Distribution::Ball, 43).unwrap();
        assert_ne!(a, c);
    }
}
