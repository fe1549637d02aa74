//! Compensated (Neumaier) summation for prefix-sum verification.

/// Running sum of `f64` values with Neumaier compensation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// A `d`-dimensional vector of compensated sums.
#[derive(Clone, Debug)]
pub struct CompensatedVec(Vec<CompensatedSum>);

impl CompensatedVec {
    pub fn zeros(d: usize) -> Self {
        CompensatedVec(vec![CompensatedSum::new(); d])
    }

    /// Adds `scale * v`.
    pub fn add_scaled(&mut self, v: &[f64], scale: f64) {
        for (acc, &x) in self.0.iter_mut().zip(v) {
            acc.add(scale * x);
        }
    }

    pub fn add(&mut self, v: &[f64]) {
        self.add_scaled(v, 1.0);
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(CompensatedSum::value).collect()
    }
}
