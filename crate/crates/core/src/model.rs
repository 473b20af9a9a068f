//! Preparations, binary-POVM effects, and the scenario summary every
//! Yule-Simpson formula reads from.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, YsError};
use crate::linalg::{self, cross_matrix_element, expect, inner, polar, CVec, Dim, HermMat};
use crate::tol::TOL;

/// A normalized pure state |ψ⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amps: CVec,
}

impl PureState {
    /// Accepts amplitudes whose norm is within the validation tolerance of 1
    /// and renormalizes them exactly.
    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        let v = CVec::new(amps)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > TOL.validation {
            return Err(YsError::NotNormalized { norm });
        }
        Ok(PureState {
            amps: v.scale(C64::new(1.0 / norm, 0.0)),
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalize(v: CVec) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(YsError::NotNormalized { norm });
        }
        Ok(PureState {
            amps: v.scale(C64::new(1.0 / norm, 0.0)),
        })
    }

    /// `cos θ |0⟩ + e^{iφ} sin θ |1⟩`.
    pub fn qubit(theta: f64, phi: f64) -> Self {
        let e = [
            C64::new(theta.cos(), 0.0),
            C64::from_polar(theta.sin(), phi),
        ];
        PureState {
            amps: CVec::new(&e).expect("two amplitudes"),
        }
    }

    pub fn basis(dim: Dim, i: usize) -> Self {
        PureState {
            amps: CVec::basis(dim, i),
        }
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn dim(&self) -> Dim {
        self.amps.dim()
    }

    pub fn projector(&self) -> HermMat {
        HermMat::outer(&self.amps)
    }
}

/// One element Π of a binary POVM {Π, I − Π}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effect {
    matrix: HermMat,
}

impl Effect {
    /// Validates that the spectrum lies in `[0, 1]`.
    pub fn from_matrix(matrix: HermMat) -> Result<Self> {
        let ev = linalg::eigenvalues(&matrix);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < -TOL.algebraic {
            return Err(YsError::PositivityViolation(format!(
                "smallest eigenvalue {lo} < 0"
            )));
        }
        if hi > 1.0 + TOL.algebraic {
            return Err(YsError::PositivityViolation(format!(
                "largest eigenvalue {hi} > 1"
            )));
        }
        Ok(Effect { matrix })
    }

    /// Qubit effect `(a I + r·σ)/2`, valid iff `|r| <= a <= 2 − |r|`.
    pub fn qubit_bloch(a: f64, r: [f64; 3]) -> Result<Self> {
        let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > a + TOL.algebraic {
            return Err(YsError::PositivityViolation(format!(
                "|r| <= a violated: |r| = {len} > a = {a}"
            )));
        }
        if a > 2.0 - len + TOL.algebraic {
            return Err(YsError::PositivityViolation(format!(
                "a <= 2 - |r| violated: a = {a} > 2 - |r| = {}",
                2.0 - len
            )));
        }
        let [x, y, z] = r;
        let m = HermMat::from_row_major(&[
            C64::new(0.5 * (a + z), 0.0),
            C64::new(0.5 * x, -0.5 * y),
            C64::new(0.5 * x, 0.5 * y),
            C64::new(0.5 * (a - z), 0.0),
        ])?;
        Ok(Effect { matrix: m })
    }

    /// `Σ_k λ_k |u_k⟩⟨u_k|` for an orthonormal frame `u` and `λ_k ∈ [0, 1]`.
    pub fn from_spectrum(frame: &[PureState], eigenvalues: &[f64]) -> Result<Self> {
        let first = frame
            .first()
            .ok_or_else(|| YsError::InvalidConfig("empty spectral frame".into()))?;
        if frame.len() != eigenvalues.len() || frame.len() != first.dim().n() {
            return Err(YsError::DimensionMismatch {
                left: frame.len(),
                right: eigenvalues.len(),
            });
        }
        if let Some(l) = eigenvalues.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(YsError::PositivityViolation(format!(
                "eigenvalue {l} outside [0, 1]"
            )));
        }
        let mut m = HermMat::zeros(first.dim());
        for (u, &l) in frame.iter().zip(eigenvalues) {
            m = m.add(&u.projector().scale(l))?;
        }
        Ok(Effect { matrix: m })
    }

    /// Rank-1 projector `|ψ⟩⟨ψ|`.
    pub fn projector(state: &PureState) -> Self {
        Effect {
            matrix: state.projector(),
        }
    }

    /// `c · I` for `c ∈ [0, 1]`.
    pub fn scaled_identity(dim: Dim, c: f64) -> Result<Self> {
        Self::from_matrix(HermMat::identity(dim).scale(c))
    }

    pub fn complement(&self) -> Self {
        let m = HermMat::identity(self.dim())
            .add(&self.matrix.scale(-1.0))
            .expect("same dimension");
        Effect { matrix: m }
    }

    pub fn matrix(&self) -> &HermMat {
        &self.matrix
    }

    pub fn dim(&self) -> Dim {
        self.matrix.dim()
    }
}

/// Which form of the `p_j > q_j` premise a scenario satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Premise {
    /// `p_j > q_j` for both preparations.
    Strict,
    /// `p_j >= q_j` up to the algebraic tolerance, with at least one tie.
    Weak,
    Violated,
}

/// Scalars derived from the four scenario constituents.
///
/// Cross elements follow `⟨ψ₁|Π_j|ψ₂⟩ = κ_j e^{-iφ_j}` and the overlap
/// `⟨ψ₁|ψ₂⟩ = κ_ψ e^{iφ_κ}`. Moduli are nonnegative; phases lie in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScalars {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub kappa_psi: f64,
    pub phi_kappa: f64,
    pub kappa_a: f64,
    pub phi_a: f64,
    pub kappa_b: f64,
    pub phi_b: f64,
}

impl ScenarioScalars {
    fn compute(psi1: &PureState, psi2: &PureState, pi_a: &Effect, pi_b: &Effect) -> Result<Self> {
        let (x, y) = (psi1.amplitudes(), psi2.amplitudes());
        let (kappa_psi, phi_kappa) = polar(inner(x, y)?);
        // stored phase is the negated argument: z = κ e^{-iφ}
        let (kappa_a, phi_a) = polar(cross_matrix_element(pi_a.matrix(), x, y)?.conj());
        let (kappa_b, phi_b) = polar(cross_matrix_element(pi_b.matrix(), x, y)?.conj());
        Ok(ScenarioScalars {
            p1: expect(pi_a.matrix(), x)?,
            p2: expect(pi_a.matrix(), y)?,
            q1: expect(pi_b.matrix(), x)?,
            q2: expect(pi_b.matrix(), y)?,
            kappa_psi,
            phi_kappa,
            kappa_a,
            phi_a,
            kappa_b,
            phi_b,
        })
    }

    /// Both gaps exceed the algebraic tolerance, so rounding noise on an exact tie reads as weak.
    pub fn strict_premise(&self) -> bool {
        self.p1 - self.q1 > TOL.algebraic && self.p2 - self.q2 > TOL.algebraic
    }

    pub fn weak_premise(&self) -> bool {
        self.p1 >= self.q1 - TOL.algebraic && self.p2 >= self.q2 - TOL.algebraic
    }

    pub fn premise(&self) -> Premise {
        if self.strict_premise() {
            Premise::Strict
        } else if self.weak_premise() {
            Premise::Weak
        } else {
            Premise::Violated
        }
    }
}

/// Two preparations and two effects, plus their derived scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    psi1: PureState,
    psi2: PureState,
    pi_a: Effect,
    pi_b: Effect,
    scalars: ScenarioScalars,
}

impl Scenario {
    pub fn new(psi1: PureState, psi2: PureState, pi_a: Effect, pi_b: Effect) -> Result<Self> {
        let dim = psi1.dim();
        for other in [psi2.dim(), pi_a.dim(), pi_b.dim()] {
            if other != dim {
                return Err(YsError::DimensionMismatch {
                    left: dim.n(),
                    right: other.n(),
                });
            }
        }
        let scalars = ScenarioScalars::compute(&psi1, &psi2, &pi_a, &pi_b)?;
        Ok(Scenario {
            psi1,
            psi2,
            pi_a,
            pi_b,
            scalars,
        })
    }

    /// The mutually-exclusive-events qubit example: Π_A = |0⟩⟨0|, Π_B = |1⟩⟨1|,
    /// ψ₁ = |0⟩, ψ₂ = (|0⟩ + |1⟩)/√2.
    pub fn exclusive_events_example() -> Self {
        let psi1 = PureState::qubit(0.0, 0.0);
        let psi2 = PureState::qubit(std::f64::consts::FRAC_PI_4, 0.0);
        let pi_a = Effect::qubit_bloch(1.0, [0.0, 0.0, 1.0]).expect("projector");
        let pi_b = Effect::qubit_bloch(1.0, [0.0, 0.0, -1.0]).expect("projector");
        Scenario::new(psi1, psi2, pi_a, pi_b).expect("qubit scenario")
    }

    pub fn psi1(&self) -> &PureState {
        &self.psi1
    }

    pub fn psi2(&self) -> &PureState {
        &self.psi2
    }

    pub fn pi_a(&self) -> &Effect {
        &self.pi_a
    }

    pub fn pi_b(&self) -> &Effect {
        &self.pi_b
    }

    pub fn dim(&self) -> Dim {
        self.psi1.dim()
    }

    pub fn scalars(&self) -> &ScenarioScalars {
        &self.scalars
    }

    pub fn premise(&self) -> Premise {
        self.scalars.premise()
    }

    pub fn strict_premise(&self) -> bool {
        self.scalars.strict_premise()
    }

    pub fn weak_premise(&self) -> bool {
        self.scalars.weak_premise()
    }

    pub fn to_file(&self) -> ScenarioFile {
        let amps = |s: &PureState| {
            s.amplitudes()
                .as_slice()
                .iter()
                .map(|z| [z.re + 0.0, z.im + 0.0])
                .collect()
        };
        let mat = |e: &Effect| {
            e.matrix()
                .row_major()
                .iter()
                .map(|z| [z.re + 0.0, z.im + 0.0])
                .collect()
        };
        ScenarioFile {
            dim: self.dim().n(),
            psi1: amps(&self.psi1),
            psi2: amps(&self.psi2),
            pi_a: mat(&self.pi_a),
            pi_b: mat(&self.pi_b),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain numeric document")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| YsError::ScenarioFormat(e.to_string()))?;
        file.into_scenario()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| YsError::ScenarioFormat(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// On-disk scenario document. Only the constituents are stored; derived
/// scalars are always recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub dim: usize,
    pub psi1: Vec<[f64; 2]>,
    pub psi2: Vec<[f64; 2]>,
    #[serde(rename = "piA")]
    pub pi_a: Vec<[f64; 2]>,
    #[serde(rename = "piB")]
    pub pi_b: Vec<[f64; 2]>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let dim = Dim::try_from(self.dim)?;
        let n = dim.n();
        let cplx = |v: &[[f64; 2]]| {
            v.iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect::<Vec<_>>()
        };
        let check_len = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(YsError::ScenarioFormat(format!(
                    "{name} has {got} entries, expected {want} for dim {n}"
                )))
            }
        };
        check_len("psi1", self.psi1.len(), n)?;
        check_len("psi2", self.psi2.len(), n)?;
        check_len("piA", self.pi_a.len(), n * n)?;
        check_len("piB", self.pi_b.len(), n * n)?;
        let psi1 = PureState::from_amplitudes(&cplx(&self.psi1))?;
        let psi2 = PureState::from_amplitudes(&cplx(&self.psi2))?;
        let pi_a = Effect::from_matrix(HermMat::from_row_major(&cplx(&self.pi_a))?)?;
        let pi_b = Effect::from_matrix(HermMat::from_row_major(&cplx(&self.pi_b))?)?;
        Scenario::new(psi1, psi2, pi_a, pi_b)
    }
}

/// Mixing and superposition parameters (α, β, φ_α, φ_β).
///
/// Mixtures weight ψ₁, ψ₂ by (cos²γ, sin²γ); superpositions by
/// (cos γ, e^{-iφ_γ} sin γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LurkingVars {
    pub alpha: f64,
    pub beta: f64,
    pub phi_alpha: f64,
    pub phi_beta: f64,
}

impl LurkingVars {
    /// Checks `α, β ∈ [0, π/2]` and wraps the phases into `[0, 2π)`.
    pub fn new(alpha: f64, beta: f64, phi_alpha: f64, phi_beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(-TOL.algebraic..=FRAC_PI_2 + TOL.algebraic).contains(&v) {
                return Err(YsError::LurkingOutOfRange(format!(
                    "{name} = {v} not in [0, pi/2]"
                )));
            }
        }
        for (name, v) in [("phi_alpha", phi_alpha), ("phi_beta", phi_beta)] {
            if !v.is_finite() {
                return Err(YsError::LurkingOutOfRange(format!("{name} = {v}")));
            }
        }
        Ok(LurkingVars {
            alpha: alpha.clamp(0.0, FRAC_PI_2),
            beta: beta.clamp(0.0, FRAC_PI_2),
            phi_alpha: linalg::wrap_phase(phi_alpha),
            phi_beta: linalg::wrap_phase(phi_beta),
        })
    }

    /// Lurking variables with the given mixing weights `cos²α`, `cos²β` and zero phases.
    pub fn from_weights(cos2_alpha: f64, cos2_beta: f64) -> Result<Self> {
        for (name, w) in [("cos^2 alpha", cos2_alpha), ("cos^2 beta", cos2_beta)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(YsError::LurkingOutOfRange(format!(
                    "{name} = {w} not in [0, 1]"
                )));
            }
        }
        Self::new(cos2_alpha.sqrt().acos(), cos2_beta.sqrt().acos(), 0.0, 0.0)
    }
}
