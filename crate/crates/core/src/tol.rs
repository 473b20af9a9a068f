//! Numerical tolerances shared by the library and its tests.

/// Tolerance record. Every comparison with a slack goes through one of these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities (Hermiticity of results, probability bounds, phase reconstruction).
    pub algebraic: f64,
    /// Validation of user-supplied inputs (state norms, Hermitian drift).
    pub validation: f64,
    /// Superposition normalizations at or below this are rejected.
    pub degenerate_norm: f64,
    /// Moduli below this get phase 0.
    pub zero_modulus: f64,
}

pub const TOL: Tolerances = Tolerances {
    algebraic: 1e-12,
    validation: 1e-9,
    degenerate_norm: 1e-10,
    zero_modulus: 1e-14,
};
