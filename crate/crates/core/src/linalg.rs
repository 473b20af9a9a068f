//! Complex linear algebra for Hilbert spaces of dimension 2 and 3.
//!
//! Everything is stack allocated in `[C64; 3]` buffers; the unused tail of a
//! qubit vector or matrix is kept at zero.

use std::f64::consts::PI;
use std::fmt;

pub use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, YsError};
use crate::tol::TOL;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Hilbert space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    Qubit,
    Qutrit,
}

impl Dim {
    pub const fn n(self) -> usize {
        match self {
            Dim::Qubit => 2,
            Dim::Qutrit => 3,
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = YsError;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Qubit),
            3 => Ok(Dim::Qutrit),
            other => Err(YsError::UnsupportedDimension(other)),
        }
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.n()
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n())
    }
}

fn check_same(a: Dim, b: Dim) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(YsError::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        })
    }
}

/// Complex column vector of length 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec {
    dim: Dim,
    e: [C64; 3],
}

impl CVec {
    pub fn new(entries: &[C64]) -> Result<Self> {
        let dim = Dim::try_from(entries.len())?;
        let mut e = [ZERO; 3];
        e[..entries.len()].copy_from_slice(entries);
        Ok(CVec { dim, e })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(&c)
    }

    /// Computational basis vector `|i⟩`.
    pub fn basis(dim: Dim, i: usize) -> Self {
        assert!(
            i < dim.n(),
            "basis index {i} out of range for dimension {dim}"
        );
        let mut e = [ZERO; 3];
        e[i] = ONE;
        CVec { dim, e }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.e[..self.dim.n()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = *self;
        out.e.iter_mut().for_each(|z| *z *= c);
        out
    }

    pub fn add(&self, other: &CVec) -> Result<Self> {
        check_same(self.dim, other.dim)?;
        let mut out = *self;
        for (z, w) in out.e.iter_mut().zip(other.e.iter()) {
            *z += w;
        }
        Ok(out)
    }
}

impl std::ops::Index<usize> for CVec {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.as_slice()[i]
    }
}

/// ⟨x|y⟩, conjugate-linear in `x`.
pub fn inner(x: &CVec, y: &CVec) -> Result<C64> {
    check_same(x.dim, y.dim)?;
    Ok(x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Hermitian d×d matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermMat {
    dim: Dim,
    m: [[C64; 3]; 3],
}

impl HermMat {
    /// Builds from row-major entries. The input is symmetrized as `(m + m†)/2`;
    /// inputs whose anti-Hermitian part exceeds the validation tolerance are rejected.
    pub fn from_row_major(entries: &[C64]) -> Result<Self> {
        let dim = match entries.len() {
            4 => Dim::Qubit,
            9 => Dim::Qutrit,
            other => {
                return Err(YsError::ScenarioFormat(format!(
                    "{other} matrix entries, expected 4 or 9"
                )))
            }
        };
        let n = dim.n();
        let mut raw = [[ZERO; 3]; 3];
        for i in 0..n {
            for j in 0..n {
                raw[i][j] = entries[i * n + j];
            }
        }
        Self::from_rows(dim, raw)
    }

    fn from_rows(dim: Dim, raw: [[C64; 3]; 3]) -> Result<Self> {
        let n = dim.n();
        let mut deviation: f64 = 0.0;
        let mut m = [[ZERO; 3]; 3];
        for i in 0..n {
            for j in 0..n {
                deviation = deviation.max((raw[i][j] - raw[j][i].conj()).norm());
                m[i][j] = (raw[i][j] + raw[j][i].conj()) * 0.5;
            }
        }
        if deviation > TOL.validation {
            return Err(YsError::NotHermitian { deviation });
        }
        Ok(HermMat { dim, m })
    }

    pub fn zeros(dim: Dim) -> Self {
        HermMat {
            dim,
            m: [[ZERO; 3]; 3],
        }
    }

    pub fn identity(dim: Dim) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim.n() {
            out.m[i][i] = ONE;
        }
        out
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let dim = Dim::try_from(values.len())?;
        let mut out = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            out.m[i][i] = C64::new(v, 0.0);
        }
        Ok(out)
    }

    /// `|x⟩⟨x|`.
    pub fn outer(x: &CVec) -> Self {
        let n = x.dim.n();
        let mut out = Self::zeros(x.dim);
        for i in 0..n {
            for j in 0..n {
                out.m[i][j] = x.e[i] * x.e[j].conj();
            }
        }
        out
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let n = self.dim.n();
        assert!(i < n && j < n);
        self.m[i][j]
    }

    pub fn row_major(&self) -> Vec<C64> {
        let n = self.dim.n();
        (0..n * n).map(|k| self.m[k / n][k % n]).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|z| *z *= c);
        out
    }

    pub fn add(&self, other: &HermMat) -> Result<Self> {
        check_same(self.dim, other.dim)?;
        let mut out = *self;
        for (row, orow) in out.m.iter_mut().zip(other.m.iter()) {
            for (z, w) in row.iter_mut().zip(orow.iter()) {
                *z += w;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        check_same(self.dim, x.dim)?;
        let n = self.dim.n();
        let mut e = [ZERO; 3];
        for (i, slot) in e.iter_mut().enumerate().take(n) {
            *slot = (0..n).map(|j| self.m[i][j] * x.e[j]).sum();
        }
        Ok(CVec { dim: self.dim, e })
    }

    /// Tr\[self · other\], real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermMat) -> Result<f64> {
        check_same(self.dim, other.dim)?;
        let n = self.dim.n();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.m[i][j] * other.m[j][i];
            }
        }
        Ok(acc.re)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim.n()).map(|i| self.m[i][i].re).sum()
    }

    /// Largest entrywise distance to another matrix.
    pub fn max_abs_diff(&self, other: &HermMat) -> Result<f64> {
        check_same(self.dim, other.dim)?;
        Ok(self
            .m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// ⟨x|m|x⟩. The input need not be normalized.
pub fn expect(m: &HermMat, x: &CVec) -> Result<f64> {
    let z = cross_matrix_element(m, x, x)?;
    debug_assert!(
        z.im.abs() <= TOL.algebraic * (1.0 + x.norm_sqr()),
        "expectation has imaginary part {}",
        z.im
    );
    Ok(z.re)
}

/// ⟨x|m|y⟩.
pub fn cross_matrix_element(m: &HermMat, x: &CVec, y: &CVec) -> Result<C64> {
    check_same(x.dim, y.dim)?;
    let my = m.apply(y)?;
    inner(x, &my)
}

/// Eigenvalues in ascending order.
///
/// Closed form for d = 2; Jacobi rotations for d = 3, which stay accurate on
/// repeated eigenvalues where the trigonometric cubic loses half the digits.
pub fn eigenvalues(m: &HermMat) -> Vec<f64> {
    match m.dim {
        Dim::Qubit => {
            let a = m.m[0][0].re;
            let d = m.m[1][1].re;
            let half_gap = 0.5 * (a - d);
            let radius = half_gap.hypot(m.m[0][1].norm());
            let mean = 0.5 * (a + d);
            vec![mean - radius, mean + radius]
        }
        Dim::Qutrit => eigenvalues_3(m),
    }
}

fn eigenvalues_3(m: &HermMat) -> Vec<f64> {
    // Real symmetric embedding [[Re, −Im], [Im, Re]] doubles every eigenvalue.
    let mut s = [[0.0f64; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            let z = m.m[i][j];
            s[i][j] = z.re;
            s[i + 3][j + 3] = z.re;
            s[i][j + 3] = -z.im;
            s[i + 3][j] = z.im;
        }
    }
    jacobi_sweeps(&mut s);
    let mut d: Vec<f64> = (0..6).map(|i| s[i][i]).collect();
    d.sort_by(f64::total_cmp);
    vec![
        0.5 * (d[0] + d[1]),
        0.5 * (d[2] + d[3]),
        0.5 * (d[4] + d[5]),
    ]
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
fn jacobi_sweeps<const N: usize>(a: &mut [[f64; N]; N]) {
    for _ in 0..64 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..N).map(|i| a[i][i] * a[i][i]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
            return;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (row_p, row_q) = (a[p], a[q]);
                for k in 0..N {
                    a[p][k] = c * row_p[k] - s * row_q[k];
                    a[q][k] = s * row_p[k] + c * row_q[k];
                }
            }
        }
    }
}

/// Splits `z` into modulus and phase in `[0, 2π)`; the phase is 0 when the
/// modulus is below [`TOL.zero_modulus`](crate::tol::Tolerances::zero_modulus).
pub fn polar(z: C64) -> (f64, f64) {
    let r = z.norm();
    if r < TOL.zero_modulus {
        (r, 0.0)
    } else {
        (r, wrap_phase(z.arg()))
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= 2.0 * PI {
        0.0
    } else {
        // −0.0 + 0.0 is +0.0
        w + 0.0
    }
}
