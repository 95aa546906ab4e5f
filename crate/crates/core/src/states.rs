//! Bipartite pure states in matrix form.
//!
//! A state of parties A (dimension `n`) and B (dimension `m`) with amplitudes
//! `a_ij` is stored as the `n x m` matrix `ψ` with `ψ[(i, j)] = a_ij`; the
//! equivalent state vector is the row-major reading `[a_00, a_01, …]`. Local
//! unitaries act as `ψ → U ψ Vᵀ` and the reduced state of party A is `ψ ψ†`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError, DEFAULT_HERMITIAN_TOL};

/// Allowed deviation of `‖ψ‖_F` from one.
pub const NORM_TOL: f64 = 1e-12;
/// Agreement required between the three concurrence formulas.
pub const FORMULA_AGREEMENT_TOL: f64 = 1e-10;
/// Default absolute tolerance of [`classify_relation`].
pub const DEFAULT_RELATION_TOL: f64 = 1e-10;
/// Superpositions with `‖Γ‖_F²` below this are rejected.
/// Rounding allowance on `C²` when the forms are compared near `C = 0`.
pub const SQUARED_ROUNDING_TOL: f64 = 64.0 * f64::EPSILON;
/// Superpositions with `‖αΨ + βΦ‖² ` below this are treated as degenerate.
pub const DEGENERATE_NORM_SQ: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("expected {expected} amplitudes for a {n}x{m} state, got {got}")]
    LengthMismatch {
        n: usize,
        m: usize,
        expected: usize,
        got: usize,
    },
    #[error("state vector has zero norm")]
    ZeroVector,
    #[error("cannot pad a {from:?} state down to {to:?}")]
    ShrinkNotAllowed {
        from: (usize, usize),
        to: (usize, usize),
    },
    #[error("states have different shapes: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("amplitudes are not normalized: |alpha|^2 + |beta|^2 = {sum}")]
    AmplitudeNorm { sum: f64 },
    #[error("superposition is degenerate: ||Gamma||^2 = {norm_sq:.3e}")]
    DegenerateSuperposition { norm_sq: f64 },
    #[error("concurrence formulas disagree: trace {trace}, purity {purity}, pairwise {pairwise}")]
    FormulaMismatch {
        trace: f64,
        purity: f64,
        pairwise: f64,
    },
    #[error("invalid state file: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, StateError>;

/// Normalized bipartite pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    psi: ComplexMatrix,
}

impl PureState {
    /// Reads a row-major amplitude vector as an `n x m` state and normalizes it.
    pub fn from_vector(v: &[Complex64], n: usize, m: usize) -> Result<Self> {
        Self::from_vector_with_norm(v, n, m).map(|(s, _)| s)
    }

    /// Like [`PureState::from_vector`], also returning the norm that was divided out.
    pub fn from_vector_with_norm(v: &[Complex64], n: usize, m: usize) -> Result<(Self, f64)> {
        if n == 0 || m == 0 || v.len() != n * m {
            return Err(StateError::LengthMismatch {
                n,
                m,
                expected: n * m,
                got: v.len(),
            });
        }
        Self::from_matrix_with_norm(ComplexMatrix::from_vec(n, m, v.to_vec())?)
    }

    pub fn from_matrix(psi: ComplexMatrix) -> Result<Self> {
        Self::from_matrix_with_norm(psi).map(|(s, _)| s)
    }

    pub fn from_matrix_with_norm(psi: ComplexMatrix) -> Result<(Self, f64)> {
        let norm = psi.frobenius_norm();
        if norm == 0.0 {
            return Err(StateError::ZeroVector);
        }
        let psi = if (norm - 1.0).abs() <= f64::EPSILON {
            psi
        } else {
            psi.scale_real(1.0 / norm)
        };
        Ok((Self { psi }, norm))
    }

    /// Computational basis product state `|i⟩|j⟩`.
    pub fn basis(n: usize, m: usize, i: usize, j: usize) -> Self {
        assert!(i < n && j < m);
        let mut psi = ComplexMatrix::zeros(n, m);
        psi[(i, j)] = Complex64::new(1.0, 0.0);
        Self { psi }
    }

    /// `(1/√d) Σ_k |k⟩|k⟩`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self {
            psi: ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt()),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.psi
    }

    /// `(n, m)`: party A and party B dimensions.
    pub fn dims(&self) -> (usize, usize) {
        self.psi.shape()
    }

    /// Row-major amplitude vector.
    pub fn to_vector(&self) -> Vec<Complex64> {
        self.psi.as_slice().to_vec()
    }

    /// `ρ = ψψ†`, the `n x n` reduced state of party A.
    pub fn reduced_density(&self) -> ComplexMatrix {
        self.psi.gram()
    }

    /// Squared Schmidt coefficients `σ_i²`, descending.
    pub fn schmidt_weights(&self) -> Result<Vec<f64>> {
        let eig = linalg::psd_eig(&self.reduced_density(), DEFAULT_HERMITIAN_TOL)?;
        Ok(eig.eigenvalues.into_iter().rev().collect())
    }

    /// Largest eigenvalue of `ψψ†`.
    pub fn lambda_max(&self) -> Result<f64> {
        Ok(self.schmidt_weights()?[0])
    }

    /// Concurrence `√(1 − Tr ρ²)`.
    ///
    /// The three textbook forms ([`ConcurrenceForms`]) are evaluated and must
    /// agree within [`FORMULA_AGREEMENT_TOL`]. The value returned is
    /// [`PureState::concurrence_minors`], which equals them exactly in exact
    /// arithmetic but does not lose precision near separable states.
    pub fn concurrence(&self) -> Result<f64> {
        let forms = self.concurrence_forms()?;
        if !forms.agree(FORMULA_AGREEMENT_TOL) {
            return Err(StateError::FormulaMismatch {
                trace: forms.trace,
                purity: forms.purity,
                pairwise: forms.pairwise,
            });
        }
        Ok(self.concurrence_minors())
    }

    /// `C² = 2 Σ_{i<j, k<l} |ψ_ik ψ_jl − ψ_il ψ_jk|² / ‖ψ‖⁴`.
    ///
    /// By Cauchy–Binet the sum of squared 2×2 minors is `Σ_{i<j} σ_i²σ_j²`. Every
    /// minor of a product state vanishes to rounding, so the result is accurate
    /// to `~ε` there, where `1 − Tr ρ²` only manages `~√ε`.
    pub fn concurrence_minors(&self) -> f64 {
        let (n, m) = self.dims();
        let a = &self.psi;
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..m {
                    for l in k + 1..m {
                        sum += (a[(i, k)] * a[(j, l)] - a[(i, l)] * a[(j, k)]).norm_sqr();
                    }
                }
            }
        }
        let norm_sq = a.frobenius_norm_sq();
        (2.0 * sum).sqrt() / norm_sq
    }

    pub fn concurrence_forms(&self) -> Result<ConcurrenceForms> {
        let rho = self.reduced_density();
        // Tr ρ² = ‖ρ‖_F² for Hermitian ρ.
        let trace = (1.0 - rho.frobenius_norm_sq()).max(0.0).sqrt();

        let weights = self.schmidt_weights()?;
        let purity = (1.0 - weights.iter().map(|w| w * w).sum::<f64>())
            .max(0.0)
            .sqrt();

        let mut pairs = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            for (j, wj) in weights.iter().enumerate() {
                if i != j {
                    pairs += wi * wj;
                }
            }
        }
        let pairwise = pairs.max(0.0).sqrt();
        Ok(ConcurrenceForms {
            trace,
            purity,
            pairwise,
        })
    }

    /// Concurrence computed from the other reduction, `ψ†ψ`.
    pub fn concurrence_from_b(&self) -> f64 {
        (1.0 - self.psi.co_gram().frobenius_norm_sq())
            .max(0.0)
            .sqrt()
    }

    /// Embeds the state in a larger `n_new x m_new` space by appending zero amplitudes.
    pub fn pad_to(&self, n_new: usize, m_new: usize) -> Result<Self> {
        let (n, m) = self.dims();
        if n_new < n || m_new < m {
            return Err(StateError::ShrinkNotAllowed {
                from: (n, m),
                to: (n_new, m_new),
            });
        }
        Ok(Self {
            psi: self.psi.padded(n_new, m_new),
        })
    }

    /// Applies local unitaries: `ψ → U ψ Vᵀ`.
    pub fn apply_local(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Self> {
        let out = u.matmul(&self.psi)?.matmul(&v.transpose())?;
        Self::from_matrix(out)
    }
}

/// The three equivalent concurrence expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceForms {
    /// `√(1 − Tr ρ²)`.
    pub trace: f64,
    /// `√(1 − Σ σ_i⁴)`.
    pub purity: f64,
    /// `√(Σ_{i≠j} σ_i² σ_j²)`.
    pub pairwise: f64,
}

impl ConcurrenceForms {
    pub fn max_disagreement(&self) -> f64 {
        (self.trace - self.purity)
            .abs()
            .max((self.trace - self.pairwise).abs())
            .max((self.purity - self.pairwise).abs())
    }

    /// Agreement within `tol`, or agreement of the squared forms to rounding level.
    ///
    /// Each form takes a square root of a quantity known to about `1e-16`
    /// absolute, so for nearly separable states (`C ≲ 1e-7`) the forms can
    /// legitimately differ by `~√ε ≈ 1.5e-8` while their squares agree.
    pub fn agree(&self, tol: f64) -> bool {
        if self.max_disagreement() <= tol {
            return true;
        }
        let sq = [self.trace, self.purity, self.pairwise].map(|c| c * c);
        let spread = sq.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - sq.iter().cloned().fold(f64::INFINITY, f64::min);
        spread <= SQUARED_ROUNDING_TOL
    }
}

/// Two states superposed as `α Ψ + β Φ`.
#[derive(Debug, Clone)]
pub struct SuperpositionInput {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub psi: PureState,
    pub phi: PureState,
}

impl SuperpositionInput {
    /// Validates `|α|² + |β|² = 1` and matching shapes.
    pub fn new(alpha: Complex64, beta: Complex64, psi: PureState, phi: PureState) -> Result<Self> {
        let sum = alpha.norm_sqr() + beta.norm_sqr();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(StateError::AmplitudeNorm { sum });
        }
        if psi.dims() != phi.dims() {
            return Err(StateError::ShapeMismatch {
                left: psi.dims(),
                right: phi.dims(),
            });
        }
        Ok(Self {
            alpha,
            beta,
            psi,
            phi,
        })
    }

    /// Like [`SuperpositionInput::new`], zero-padding both states to a common shape first.
    pub fn new_padded(
        alpha: Complex64,
        beta: Complex64,
        psi: PureState,
        phi: PureState,
    ) -> Result<Self> {
        let (n, m) = common_dims(&psi, &phi);
        Self::new(alpha, beta, psi.pad_to(n, m)?, phi.pad_to(n, m)?)
    }

    /// Real amplitudes `α = √alpha_sq`, `β = e^{i·phase} √(1 − alpha_sq)`.
    pub fn from_alpha_sq(
        alpha_sq: f64,
        phase: f64,
        psi: PureState,
        phi: PureState,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha_sq) {
            return Err(StateError::AmplitudeNorm { sum: alpha_sq });
        }
        let alpha = Complex64::new(alpha_sq.sqrt(), 0.0);
        let beta = Complex64::from_polar((1.0 - alpha_sq).sqrt(), phase);
        Self::new_padded(alpha, beta, psi, phi)
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn beta_sq(&self) -> f64 {
        self.beta.norm_sqr()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.psi.dims()
    }

    /// The same superposition with the roles of `(α, Ψ)` and `(β, Φ)` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
            psi: self.phi.clone(),
            phi: self.psi.clone(),
        }
    }
}

/// Smallest shape containing both states.
pub fn common_dims(a: &PureState, b: &PureState) -> (usize, usize) {
    let (n1, m1) = a.dims();
    let (n2, m2) = b.dims();
    (n1.max(n2), m1.max(m2))
}

/// Unnormalized superposition and its squared Frobenius norm.
#[derive(Debug, Clone)]
pub struct Superposition {
    pub gamma: ComplexMatrix,
    pub norm_sq: f64,
}

impl Superposition {
    pub fn normalized(&self) -> Result<PureState> {
        PureState::from_matrix(self.gamma.clone())
    }
}

/// `Γ⁺ = α Ψ + β Φ`, left unnormalized.
pub fn superpose(inp: &SuperpositionInput) -> Result<Superposition> {
    combine(inp, inp.beta)
}

/// `Γ⁻ = α Ψ − β Φ`.
pub fn superpose_minus(inp: &SuperpositionInput) -> Result<Superposition> {
    combine(inp, -inp.beta)
}

fn combine(inp: &SuperpositionInput, beta: Complex64) -> Result<Superposition> {
    let gamma = inp
        .psi
        .matrix()
        .scale(inp.alpha)
        .add(&inp.phi.matrix().scale(beta))?;
    let norm_sq = gamma.frobenius_norm_sq();
    if norm_sq < DEGENERATE_NORM_SQ {
        return Err(StateError::DegenerateSuperposition { norm_sq });
    }
    Ok(Superposition { gamma, norm_sq })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// `ΨΦ† = 0`: the B-side supports are orthogonal.
    Biorthogonal,
    /// `Tr ΨΦ† = 0`: orthogonal as vectors.
    TraceOrthogonal,
    General,
}

/// Outcome of [`classify_relation`], with the residuals that decided it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationClass {
    pub relation: Relation,
    pub tol: f64,
    /// `‖ΨΦ†‖_F`.
    pub biorthogonal_residual: f64,
    /// `|Tr ΨΦ†|`.
    pub trace_residual: f64,
}

/// `‖ΨΦ†‖_F` and `|Tr ΨΦ†|` for two same-shape states.
pub fn relation_residuals(a: &PureState, b: &PureState) -> Result<(f64, f64)> {
    if a.dims() != b.dims() {
        return Err(StateError::ShapeMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    let cross = a.matrix().matmul(&b.matrix().adjoint())?;
    let inner = linalg::frobenius_inner(a.matrix(), b.matrix())?;
    Ok((cross.frobenius_norm(), inner.norm()))
}

pub fn classify_relation(a: &PureState, b: &PureState, tol: f64) -> Result<RelationClass> {
    let (bi, tr) = relation_residuals(a, b)?;
    let relation = if bi <= tol {
        Relation::Biorthogonal
    } else if tr <= tol {
        Relation::TraceOrthogonal
    } else {
        Relation::General
    };
    Ok(RelationClass {
        relation,
        tol,
        biorthogonal_residual: bi,
        trace_residual: tr,
    })
}

/// On-disk JSON form of a state: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub m: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateFile {
    pub fn from_state(s: &PureState) -> Self {
        let (n, m) = s.dims();
        let v = s.matrix().as_slice();
        Self {
            n,
            m,
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    /// Validates lengths and finiteness and returns the normalized state along
    /// with the norm of the stored amplitudes.
    pub fn to_state(&self) -> Result<(PureState, f64)> {
        let expected = self.n * self.m;
        if self.n == 0 || self.m == 0 {
            return Err(StateError::Parse("n and m must be positive".into()));
        }
        for (name, field) in [("re", &self.re), ("im", &self.im)] {
            if field.len() != expected {
                return Err(StateError::Parse(format!(
                    "field `{name}` has {} entries, expected n*m = {expected}",
                    field.len()
                )));
            }
            if let Some(k) = field.iter().position(|x| !x.is_finite()) {
                return Err(StateError::Parse(format!(
                    "field `{name}` entry {k} is not finite"
                )));
            }
        }
        let v: Vec<Complex64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        PureState::from_vector_with_norm(&v, self.n, self.m)
    }

    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| StateError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state file serializes")
    }
}
