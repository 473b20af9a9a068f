//! Yule-Simpson formulas for mixtures and coherent superpositions.
//!
//! Mixture (quantum-classical) probabilities:
//! `p = cos²α p₁ + sin²α p₂`, `q = cos²β q₁ + sin²β q₂`.
//!
//! Superposition (quantum-quantum) probabilities, for
//! `|ψ_γ⟩ ∝ cos γ |ψ₁⟩ + e^{-iφ_γ} sin γ |ψ₂⟩`:
//!
//! ```text
//! N_γ = 1 + κ_ψ cos(φ_γ − φ_κ) sin 2γ
//! P   = [p + κ_A cos(φ_α + φ_A) sin 2α] / N_α
//! Q   = [q + κ_B cos(φ_β + φ_B) sin 2β] / N_β
//! ```
//!
//! The `+` in the interference terms follows from storing the cross elements as
//! `⟨ψ₁|Π_j|ψ₂⟩ = κ_j e^{-iφ_j}`; it is checked against the direct expectation
//! on the constructed state in the tests below.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, YsError};
use crate::linalg::HermMat;
use crate::model::{LurkingVars, Premise, PureState, Scenario};
use crate::tol::TOL;

/// Mixing weights (cos²γ, sin²γ).
fn weights(gamma: f64) -> (f64, f64) {
    let c = gamma.cos();
    let s = gamma.sin();
    (c * c, s * s)
}

/// Comparison direction for `cos²β` against the threshold `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Occurs iff `cos²β > T` (when `q₁ > q₂`).
    Greater,
    /// Occurs iff `cos²β < T` (when `q₁ < q₂`).
    Less,
}

impl Direction {
    pub fn holds(self, cos2_beta: f64, threshold: f64) -> bool {
        match self {
            Direction::Greater => cos2_beta > threshold,
            Direction::Less => cos2_beta < threshold,
        }
    }
}

/// `p < q` rewritten as a condition on `cos²β` for fixed α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcThreshold {
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub threshold: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcResult {
    pub p: f64,
    pub q: f64,
    /// `p < q`, exact comparison.
    pub occurs: bool,
    /// `None` when `q₁ = q₂`.
    pub threshold: Option<QcThreshold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqResult {
    pub p_super: f64,
    pub q_super: f64,
    /// `P < Q`, exact comparison.
    pub occurs: bool,
    pub norm_alpha: f64,
    pub norm_beta: f64,
}

/// A sub-interval of `[0, 1]`; endpoints may or may not belong to the set it describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains_interior(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }

    pub fn contains_closed(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    pub lambda: f64,
    pub p_lambda: f64,
    pub q_lambda: f64,
    pub occurs: bool,
    /// `(1 − (P−Q)/(p−q))⁻¹`, reported even outside `(0, 1)`.
    pub lambda_th: Option<f64>,
    /// Where `P_λ < Q_λ` within `[0, 1]`; `None` when empty.
    pub persistence: Option<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Both,
    QcOnly,
    QqOnly,
    Neither,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Both,
        Category::QcOnly,
        Category::QqOnly,
        Category::Neither,
    ];

    pub fn from_flags(qc: bool, qq: bool) -> Self {
        match (qc, qq) {
            (true, true) => Category::Both,
            (true, false) => Category::QcOnly,
            (false, true) => Category::QqOnly,
            (false, false) => Category::Neither,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Both => "BOTH",
            Category::QcOnly => "QC_ONLY",
            Category::QqOnly => "QQ_ONLY",
            Category::Neither => "NEITHER",
        }
    }

    pub fn qc(self) -> bool {
        matches!(self, Category::Both | Category::QcOnly)
    }

    pub fn qq(self) -> bool {
        matches!(self, Category::Both | Category::QqOnly)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category {s}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub category: Category,
    /// `p/q`; `None` when `q = 0`.
    pub ratio_pq: Option<f64>,
    /// `P/Q`; `None` when `Q = 0`.
    pub ratio_pq_super: Option<f64>,
    pub premise: Premise,
}

/// All engine outputs for one (scenario, lurking variables) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub qc: QcResult,
    pub qq: QqResult,
    pub classification: Classification,
}

pub fn qc_probabilities(s: &Scenario, v: &LurkingVars) -> QcResult {
    let d = s.scalars();
    let (ca, sa) = weights(v.alpha);
    let (cb, sb) = weights(v.beta);
    let p = ca * d.p1 + sa * d.p2;
    let q = cb * d.q1 + sb * d.q2;
    QcResult {
        p,
        q,
        occurs: p < q,
        threshold: qc_condition_threshold(s, v.alpha).ok(),
    }
}

/// Threshold form of `p < q`: `cos²β ≷ T = a cos²α + b` with
/// `a = (p₁−p₂)/(q₁−q₂)`, `b = (p₂−q₂)/(q₁−q₂)`; the direction is set by the
/// sign of `q₁ − q₂`.
pub fn qc_condition_threshold(s: &Scenario, alpha: f64) -> Result<QcThreshold> {
    let d = s.scalars();
    let dq = d.q1 - d.q2;
    if dq.abs() <= TOL.algebraic {
        return Err(YsError::DegenerateCondition { q: d.q1 });
    }
    let coeff_a = (d.p1 - d.p2) / dq;
    let coeff_b = (d.p2 - d.q2) / dq;
    let (ca, _) = weights(alpha);
    Ok(QcThreshold {
        coeff_a,
        coeff_b,
        threshold: coeff_a * ca + coeff_b,
        direction: if dq > 0.0 {
            Direction::Greater
        } else {
            Direction::Less
        },
    })
}

/// `N_γ = 1 + κ_ψ cos(φ_γ − φ_κ) sin 2γ`.
pub fn superposition_norm(s: &Scenario, gamma: f64, phi_gamma: f64) -> f64 {
    let d = s.scalars();
    1.0 + d.kappa_psi * (phi_gamma - d.phi_kappa).cos() * (2.0 * gamma).sin()
}

fn check_norm(norm: f64) -> Result<f64> {
    if norm > TOL.degenerate_norm {
        Ok(norm)
    } else {
        Err(YsError::DegenerateSuperposition { norm })
    }
}

/// Builds `(cos γ |ψ₁⟩ + e^{-iφ_γ} sin γ |ψ₂⟩)/√N_γ` and returns it with `N_γ`.
pub fn superposition_state(s: &Scenario, gamma: f64, phi_gamma: f64) -> Result<(PureState, f64)> {
    let norm = check_norm(superposition_norm(s, gamma, phi_gamma))?;
    let a = s.psi1().amplitudes().scale(C64::new(gamma.cos(), 0.0));
    let b = s
        .psi2()
        .amplitudes()
        .scale(C64::from_polar(gamma.sin(), -phi_gamma));
    let state = PureState::normalize(a.add(&b)?)?;
    Ok((state, norm))
}

pub fn qq_probabilities(s: &Scenario, v: &LurkingVars) -> Result<QqResult> {
    let d = s.scalars();
    let qc = qc_probabilities(s, v);
    let norm_alpha = check_norm(superposition_norm(s, v.alpha, v.phi_alpha))?;
    let norm_beta = check_norm(superposition_norm(s, v.beta, v.phi_beta))?;
    let interference_a = d.kappa_a * (v.phi_alpha + d.phi_a).cos() * (2.0 * v.alpha).sin();
    let interference_b = d.kappa_b * (v.phi_beta + d.phi_b).cos() * (2.0 * v.beta).sin();
    let p_super = (qc.p + interference_a) / norm_alpha;
    let q_super = (qc.q + interference_b) / norm_beta;
    Ok(QqResult {
        p_super,
        q_super,
        occurs: p_super < q_super,
        norm_alpha,
        norm_beta,
    })
}

/// Interpolates between the mixture `(p, q)` at λ = 0 and the superposition
/// `(P, Q)` at λ = 1.
pub fn interpolate(qc: &QcResult, qq: &QqResult, lambda: f64) -> Result<LambdaResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(YsError::LambdaOutOfRange(lambda));
    }
    let (p, q, big_p, big_q) = (qc.p, qc.q, qq.p_super, qq.q_super);
    let p_lambda = lambda * big_p + (1.0 - lambda) * p;
    let q_lambda = lambda * big_q + (1.0 - lambda) * q;
    let mix_gap = p - q;
    let super_gap = big_p - big_q;

    // P_λ − Q_λ = mix_gap + λ · slope; slopes within rounding of zero count as parallel
    let slope = super_gap - mix_gap;
    let parallel = slope.abs() <= TOL.algebraic;
    let lambda_th = if mix_gap != 0.0 && !parallel {
        let t = 1.0 / (1.0 - super_gap / mix_gap);
        t.is_finite().then_some(t)
    } else {
        None
    };

    let persistence = if parallel {
        (mix_gap < 0.0).then_some(Interval {
            lower: 0.0,
            upper: 1.0,
        })
    } else {
        let crossing = lambda_th.unwrap_or(-mix_gap / slope);
        if slope < 0.0 {
            // occurs above the crossing
            (crossing < 1.0).then(|| Interval {
                lower: crossing.max(0.0),
                upper: 1.0,
            })
        } else {
            (crossing > 0.0).then(|| Interval {
                lower: 0.0,
                upper: crossing.min(1.0),
            })
        }
    };

    Ok(LambdaResult {
        lambda,
        p_lambda,
        q_lambda,
        occurs: p_lambda < q_lambda,
        lambda_th,
        persistence,
    })
}

pub fn lambda_family(s: &Scenario, v: &LurkingVars, lambda: f64) -> Result<LambdaResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(YsError::LambdaOutOfRange(lambda));
    }
    let qc = qc_probabilities(s, v);
    let qq = qq_probabilities(s, v)?;
    interpolate(&qc, &qq, lambda)
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub fn classify_results(qc: &QcResult, qq: &QqResult, premise: Premise) -> Classification {
    Classification {
        category: Category::from_flags(qc.occurs, qq.occurs),
        ratio_pq: ratio(qc.p, qc.q),
        ratio_pq_super: ratio(qq.p_super, qq.q_super),
        premise,
    }
}

pub fn classify(s: &Scenario, v: &LurkingVars) -> Result<Classification> {
    Ok(evaluate(s, v)?.classification)
}

pub fn evaluate(s: &Scenario, v: &LurkingVars) -> Result<Evaluation> {
    let qc = qc_probabilities(s, v);
    let qq = qq_probabilities(s, v)?;
    Ok(Evaluation {
        qc,
        qq,
        classification: classify_results(&qc, &qq, s.premise()),
    })
}

/// `cos²γ |ψ₁⟩⟨ψ₁| + sin²γ |ψ₂⟩⟨ψ₂|`.
pub fn mixture_density(s: &Scenario, gamma: f64) -> HermMat {
    let (c, sn) = weights(gamma);
    s.psi1()
        .projector()
        .scale(c)
        .add(&s.psi2().projector().scale(sn))
        .expect("scenario dimensions agree")
}

/// `λ |ψ_γ⟩⟨ψ_γ| + (1 − λ) ρ_γ`.
pub fn partially_coherent_density(
    s: &Scenario,
    gamma: f64,
    phi_gamma: f64,
    lambda: f64,
) -> Result<HermMat> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(YsError::LambdaOutOfRange(lambda));
    }
    let (state, _) = superposition_state(s, gamma, phi_gamma)?;
    state
        .projector()
        .scale(lambda)
        .add(&mixture_density(s, gamma).scale(1.0 - lambda))
}
