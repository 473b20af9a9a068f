use serde::{Deserialize, Serialize};

use crate::engine::Category;
use crate::error::{Result, YsError};
use crate::sampling::SampleConfig;

use super::record::YsRecord;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p_hat = successes.min(n) as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p_hat + z2 / (2.0 * n_f)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes >= n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Rate {
    pub fn new(count: u64, n: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(count, n, Z_95);
        Rate {
            count,
            rate: if n == 0 { 0.0 } else { count as f64 / n as f64 },
            ci_low,
            ci_high,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryRates {
    pub n_trials: u64,
    pub rate_both: Rate,
    pub rate_qc_only: Rate,
    pub rate_qq_only: Rate,
    pub rate_neither: Rate,
}

impl CategoryRates {
    pub fn get(&self, c: Category) -> &Rate {
        match c {
            Category::Both => &self.rate_both,
            Category::QcOnly => &self.rate_qc_only,
            Category::QqOnly => &self.rate_qq_only,
            Category::Neither => &self.rate_neither,
        }
    }

    /// Rate of p < q regardless of the superposition outcome.
    pub fn qc_any(&self) -> Rate {
        Rate::new(
            self.rate_both.count + self.rate_qc_only.count,
            self.n_trials,
        )
    }

    /// Rate of P < Q regardless of the mixture outcome.
    pub fn qq_any(&self) -> Rate {
        Rate::new(
            self.rate_both.count + self.rate_qq_only.count,
            self.n_trials,
        )
    }
}

pub fn summarize(records: &[YsRecord]) -> Result<CategoryRates> {
    if records.is_empty() {
        return Err(YsError::EmptyRecords);
    }
    let n = records.len() as u64;
    let count = |c: Category| records.iter().filter(|r| r.category == c).count() as u64;
    Ok(CategoryRates {
        n_trials: n,
        rate_both: Rate::new(count(Category::Both), n),
        rate_qc_only: Rate::new(count(Category::QcOnly), n),
        rate_qq_only: Rate::new(count(Category::QqOnly), n),
        rate_neither: Rate::new(count(Category::Neither), n),
    })
}

/// Category rates plus the run's provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(flatten)]
    pub rates: CategoryRates,
    pub total_rejections: u64,
    pub degenerate_resamples: u64,
    pub seed: u64,
    pub config: SampleConfig,
    pub lambdas: Vec<f64>,
}

impl RunSummary {
    pub fn from_records(
        records: &[YsRecord],
        config: &SampleConfig,
        lambdas: &[f64],
    ) -> Result<Self> {
        Ok(RunSummary {
            rates: summarize(records)?,
            total_rejections: records.iter().map(|r| r.rejections).sum(),
            degenerate_resamples: records.iter().map(|r| r.degenerate_resamples).sum(),
            seed: config.seed,
            config: *config,
            lambdas: lambdas.to_vec(),
        })
    }
}
