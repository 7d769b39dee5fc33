//! Compensated (Neumaier) accumulation.

/// Neumaier's improved Kahan–Babuška accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Adds another accumulator, keeping both compensations.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.compensation += other.compensation;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Sums terms in descending magnitude with compensation. Reorders `terms`.
pub fn sum_descending(terms: &mut [f64]) -> f64 {
    accumulate_descending(terms).value()
}

/// Unrounded form of [`sum_descending`].
pub fn accumulate_descending(terms: &mut [f64]) -> CompensatedSum {
    terms.sort_unstable_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut acc = CompensatedSum::new();
    acc.extend(terms.iter().copied());
    acc
}
