//! Running mean and spread of game scores.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub n: u64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator; 0 when n < 2).
    pub sd: f64,
}

impl ScoreSummary {
    pub fn from_scores<I: IntoIterator<Item = f64>>(scores: I) -> ScoreSummary {
        let mut acc = Accumulator::default();
        for s in scores {
            acc.push(s);
        }
        acc.summary()
    }

    pub fn sem(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sd / (self.n as f64).sqrt()
        }
    }
}

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn summary(&self) -> ScoreSummary {
        let sd = if self.n > 1 { (self.m2 / (self.n - 1) as f64).sqrt() } else { 0.0 };
        ScoreSummary { n: self.n, mean: self.mean, sd }
    }
}
