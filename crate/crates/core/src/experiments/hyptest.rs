//! Identifying which of two binary measurements a box performs from a finite
//! number of probe runs, with and without knowledge of which preparation was
//! sent in each run.
//!
//! The partitioned observer knows `(M₁, M₂)` and the per-preparation click
//! probabilities `p_j` (measurement A) and `q_j` (measurement B). The
//! aggregated observer only sees the total number of clicks and compares it
//! with reference aggregate rates `p = c_α p₁ + (1 − c_α) p₂` and
//! `q = c_β q₁ + (1 − c_β) q₂`. Both decide by maximum likelihood; ties go to A.
//! When the probe schedule differs from the schedule behind a reference rate,
//! the two observers can reach opposite conclusions.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial as BinomialPmf, Discrete};

use crate::error::{Result, YsError};
use crate::model::Scenario;
use crate::sampling::{substream, StreamDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measurement {
    A,
    B,
}

impl std::str::FromStr for Measurement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" | "a" => Ok(Measurement::A),
            "B" | "b" => Ok(Measurement::B),
            other => Err(format!("unknown measurement {other}, expected A or B")),
        }
    }
}

/// Per-preparation click probabilities of the two candidate measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickModel {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl From<&Scenario> for ClickModel {
    fn from(s: &Scenario) -> Self {
        let d = s.scalars();
        ClickModel {
            p1: d.p1,
            p2: d.p2,
            q1: d.q1,
            q2: d.q2,
        }
    }
}

impl ClickModel {
    fn rates(&self, m: Measurement) -> (f64, f64) {
        match m {
            Measurement::A => (self.p1, self.p2),
            Measurement::B => (self.q1, self.q2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypTestSetup {
    /// Total probe runs M.
    pub total_runs: u64,
    /// cos²α, the ψ₁ fraction behind the reference rate of A.
    pub frac_alpha: f64,
    /// cos²β, the ψ₁ fraction behind the reference rate of B.
    pub frac_beta: f64,
    /// ψ₁ fraction of the identification run itself; M₁ = round(M · probe_frac).
    pub probe_frac: f64,
    pub truth: Measurement,
}

impl HypTestSetup {
    /// Probe schedule following the α weights.
    pub fn new(total_runs: u64, frac_alpha: f64, frac_beta: f64, truth: Measurement) -> Self {
        HypTestSetup {
            total_runs,
            frac_alpha,
            frac_beta,
            probe_frac: frac_alpha,
            truth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_runs == 0 {
            return Err(YsError::InvalidConfig(
                "total runs M must be at least 1".into(),
            ));
        }
        for (name, f) in [
            ("frac_alpha", self.frac_alpha),
            ("frac_beta", self.frac_beta),
            ("probe_frac", self.probe_frac),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(YsError::InvalidConfig(format!(
                    "{name} = {f} not in [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// (M₁, M₂).
    pub fn split(&self) -> (u64, u64) {
        let m1 = ((self.total_runs as f64) * self.probe_frac).round() as u64;
        let m1 = m1.min(self.total_runs);
        (m1, self.total_runs - m1)
    }

    /// Reference aggregate click rates (p, q).
    pub fn aggregate_rates(&self, model: &ClickModel) -> (f64, f64) {
        (
            self.frac_alpha * model.p1 + (1.0 - self.frac_alpha) * model.p2,
            self.frac_beta * model.q1 + (1.0 - self.frac_beta) * model.q2,
        )
    }
}

/// k ln r, with 0 · ln 0 = 0.
fn xlogy(k: u64, r: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * r.ln()
    }
}

fn log_likelihood(k: u64, n: u64, r: f64) -> f64 {
    xlogy(k, r) + xlogy(n - k, 1.0 - r)
}

pub fn partitioned_decision(model: &ClickModel, m1: u64, m2: u64, k1: u64, k2: u64) -> Measurement {
    let ll_a = log_likelihood(k1, m1, model.p1) + log_likelihood(k2, m2, model.p2);
    let ll_b = log_likelihood(k1, m1, model.q1) + log_likelihood(k2, m2, model.q2);
    if ll_a >= ll_b {
        Measurement::A
    } else {
        Measurement::B
    }
}

pub fn aggregated_decision(p_agg: f64, q_agg: f64, m: u64, k: u64) -> Measurement {
    if log_likelihood(k, m, p_agg) >= log_likelihood(k, m, q_agg) {
        Measurement::A
    } else {
        Measurement::B
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypTestOutcome {
    pub repeat: u64,
    pub m1: u64,
    pub m2: u64,
    pub k1: u64,
    pub k2: u64,
    pub decision_partitioned: Measurement,
    pub decision_aggregated: Measurement,
    pub disagree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypTestReport {
    pub setup: HypTestSetup,
    pub model: ClickModel,
    pub m1: u64,
    pub m2: u64,
    pub p_aggregate: f64,
    pub q_aggregate: f64,
    /// One of M₁, M₂ is zero, so the partitioned decision rests on a single preparation.
    pub single_preparation: bool,
    pub outcomes: Vec<HypTestOutcome>,
    pub disagreement_rate: f64,
    pub exact_disagreement: f64,
    /// Binomial standard error of the simulated rate at the exact probability.
    pub standard_error: f64,
}

/// Probability that the two decisions differ, summed over all (k₁, k₂).
pub fn exact_disagreement(model: &ClickModel, setup: &HypTestSetup) -> Result<f64> {
    setup.validate()?;
    let (m1, m2) = setup.split();
    let (r1, r2) = model.rates(setup.truth);
    let (p_agg, q_agg) = setup.aggregate_rates(model);
    let pmf = |n: u64, r: f64| -> Result<Vec<f64>> {
        let d = BinomialPmf::new(r, n).map_err(|e| YsError::InvalidConfig(e.to_string()))?;
        Ok((0..=n).map(|k| d.pmf(k)).collect())
    };
    let w1 = pmf(m1, r1)?;
    let w2 = pmf(m2, r2)?;
    let mut total = 0.0;
    for (k1, a) in w1.iter().enumerate() {
        for (k2, b) in w2.iter().enumerate() {
            let (k1, k2) = (k1 as u64, k2 as u64);
            let part = partitioned_decision(model, m1, m2, k1, k2);
            let agg = aggregated_decision(p_agg, q_agg, setup.total_runs, k1 + k2);
            if part != agg {
                total += a * b;
            }
        }
    }
    Ok(total)
}

fn draw<R: Rng + ?Sized>(n: u64, r: f64, rng: &mut R) -> u64 {
    if n == 0 {
        0
    } else {
        Binomial::new(n, r)
            .expect("probability in [0, 1]")
            .sample(rng)
    }
}

/// Simulates `repeats` identification runs, each on its own substream of `seed`.
pub fn run_hyptest(
    scenario: &Scenario,
    setup: &HypTestSetup,
    repeats: u64,
    seed: u64,
) -> Result<HypTestReport> {
    run_hyptest_with_model(&ClickModel::from(scenario), setup, repeats, seed)
}

pub fn run_hyptest_with_model(
    model: &ClickModel,
    setup: &HypTestSetup,
    repeats: u64,
    seed: u64,
) -> Result<HypTestReport> {
    setup.validate()?;
    if repeats == 0 {
        return Err(YsError::InvalidConfig("repeats must be at least 1".into()));
    }
    let (m1, m2) = setup.split();
    let (r1, r2) = model.rates(setup.truth);
    let (p_agg, q_agg) = setup.aggregate_rates(model);
    let outcomes: Vec<HypTestOutcome> = (0..repeats)
        .map(|repeat| {
            let mut rng = substream(seed, StreamDomain::HypTest, repeat);
            let k1 = draw(m1, r1, &mut rng);
            let k2 = draw(m2, r2, &mut rng);
            let decision_partitioned = partitioned_decision(model, m1, m2, k1, k2);
            let decision_aggregated = aggregated_decision(p_agg, q_agg, setup.total_runs, k1 + k2);
            HypTestOutcome {
                repeat,
                m1,
                m2,
                k1,
                k2,
                decision_partitioned,
                decision_aggregated,
                disagree: decision_partitioned != decision_aggregated,
            }
        })
        .collect();
    let disagreements = outcomes.iter().filter(|o| o.disagree).count();
    let exact = exact_disagreement(model, setup)?;
    Ok(HypTestReport {
        setup: *setup,
        model: *model,
        m1,
        m2,
        p_aggregate: p_agg,
        q_aggregate: q_agg,
        single_preparation: m1 == 0 || m2 == 0,
        disagreement_rate: disagreements as f64 / repeats as f64,
        exact_disagreement: exact,
        standard_error: (exact * (1.0 - exact) / repeats as f64).sqrt(),
        outcomes,
    })
}

/// One row per repeat: `repeat,M1,M2,k1,k2,decision_partitioned,decision_aggregated,disagree`.
pub fn write_outcomes_csv<W: Write>(mut out: W, outcomes: &[HypTestOutcome]) -> io::Result<()> {
    writeln!(
        out,
        "repeat,M1,M2,k1,k2,decision_partitioned,decision_aggregated,disagree"
    )?;
    for o in outcomes {
        writeln!(
            out,
            "{},{},{},{},{},{:?},{:?},{}",
            o.repeat,
            o.m1,
            o.m2,
            o.k1,
            o.k2,
            o.decision_partitioned,
            o.decision_aggregated,
            o.disagree
        )?;
    }
    Ok(())
}
