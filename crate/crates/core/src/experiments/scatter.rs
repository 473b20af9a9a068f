use rayon::prelude::*;

use crate::engine::{evaluate, interpolate};
use crate::error::{Result, YsError};
use crate::sampling::{sample_lurking, sample_scenario, substream, SampleConfig, StreamDomain};

use super::record::YsRecord;
use super::summary::RunSummary;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRun {
    pub records: Vec<YsRecord>,
    pub summary: RunSummary,
}

/// One trial on its own substream. Lurking variables that make a
/// superposition degenerate are redrawn and counted.
pub fn run_trial(config: &SampleConfig, index: u64, lambdas: &[f64]) -> Result<YsRecord> {
    let mut rng = substream(config.seed, StreamDomain::Scatter, index);
    let (scenario, rejections) = sample_scenario(config, &mut rng)?;
    let mut degenerate = 0u64;
    loop {
        let lurking = sample_lurking(config, &mut rng);
        match evaluate(&scenario, &lurking) {
            Ok(eval) => {
                let lambda_results = lambdas
                    .iter()
                    .map(|&l| interpolate(&eval.qc, &eval.qq, l))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(YsRecord::new(
                    index,
                    scenario.scalars(),
                    lurking,
                    &eval,
                    rejections,
                    degenerate,
                    lambda_results,
                ));
            }
            Err(YsError::DegenerateSuperposition { .. }) => {
                degenerate += 1;
                if degenerate > config.max_rejections_per_trial {
                    return Err(YsError::SamplingStarvation {
                        rejections: degenerate,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Runs `n_trials` independent trials on the current rayon pool. Output is
/// identical for any worker count.
pub fn run_scatter(
    config: &SampleConfig,
    n_trials: u64,
    lambdas: Option<&[f64]>,
) -> Result<ScatterRun> {
    config.validate()?;
    if n_trials == 0 {
        return Err(YsError::InvalidConfig("n_trials must be at least 1".into()));
    }
    let lambdas = lambdas.unwrap_or(&[]);
    if let Some(&bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(YsError::LambdaOutOfRange(bad));
    }
    let outcomes: Vec<Result<YsRecord>> = (0..n_trials)
        .into_par_iter()
        .map(|i| run_trial(config, i, lambdas))
        .collect();
    let records = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = RunSummary::from_records(&records, config, lambdas)?;
    Ok(ScatterRun { records, summary })
}
