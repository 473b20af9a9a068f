use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{Category, Evaluation, LambdaResult};
use crate::model::{LurkingVars, Premise, ScenarioScalars};

/// Outcome of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YsRecord {
    pub trial_index: u64,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub p: f64,
    pub q: f64,
    pub p_super: f64,
    pub q_super: f64,
    pub ratio_pq: Option<f64>,
    pub ratio_pq_super: Option<f64>,
    pub category: Category,
    pub premise: Premise,
    /// Scenario draws rejected for failing the premise.
    pub rejections: u64,
    /// Lurking-variable draws rejected for a degenerate superposition.
    pub degenerate_resamples: u64,
    pub lurking: LurkingVars,
    pub lambda_results: Vec<LambdaResult>,
}

impl YsRecord {
    pub fn new(
        trial_index: u64,
        scalars: &ScenarioScalars,
        lurking: LurkingVars,
        eval: &Evaluation,
        rejections: u64,
        degenerate_resamples: u64,
        lambda_results: Vec<LambdaResult>,
    ) -> Self {
        YsRecord {
            trial_index,
            p1: scalars.p1,
            p2: scalars.p2,
            q1: scalars.q1,
            q2: scalars.q2,
            p: eval.qc.p,
            q: eval.qc.q,
            p_super: eval.qq.p_super,
            q_super: eval.qq.q_super,
            ratio_pq: eval.classification.ratio_pq,
            ratio_pq_super: eval.classification.ratio_pq_super,
            category: eval.classification.category,
            premise: eval.classification.premise,
            rejections,
            degenerate_resamples,
            lurking,
            lambda_results,
        }
    }

    /// Category recomputed from the stored probabilities.
    pub fn recomputed_category(&self) -> Category {
        Category::from_flags(self.p < self.q, self.p_super < self.q_super)
    }
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// scientific notation when the decimal exponent is below −4 or at least 12.
pub fn format_sig12(x: f64) -> String {
    const SIG: i32 = 12;
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), format_sig12)
}

/// Writes one row per record. `lambda_columns` is the number of λ groups in
/// the header; records must carry that many λ results.
pub fn write_csv<W: Write>(
    mut out: W,
    records: &[YsRecord],
    lambda_columns: usize,
) -> io::Result<()> {
    let mut header = String::from("trial,p1,p2,q1,q2,p,q,P,Q,ratio_pq,ratio_PQ,category");
    for _ in 0..lambda_columns {
        header.push_str(",lambda,P_lambda,Q_lambda,occurs");
    }
    writeln!(out, "{header}")?;
    for r in records {
        if r.lambda_results.len() != lambda_columns {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!(
                    "record {} has {} lambda results, header has {lambda_columns}",
                    r.trial_index,
                    r.lambda_results.len()
                ),
            ));
        }
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial_index,
            format_sig12(r.p1),
            format_sig12(r.p2),
            format_sig12(r.q1),
            format_sig12(r.q2),
            format_sig12(r.p),
            format_sig12(r.q),
            format_sig12(r.p_super),
            format_sig12(r.q_super),
            opt(r.ratio_pq),
            opt(r.ratio_pq_super),
            r.category,
        );
        for l in &r.lambda_results {
            row.push_str(&format!(
                ",{},{},{},{}",
                format_sig12(l.lambda),
                format_sig12(l.p_lambda),
                format_sig12(l.q_lambda),
                l.occurs
            ));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}
