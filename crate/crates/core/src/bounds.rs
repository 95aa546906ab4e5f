//! Lower and upper bounds on the concurrence of a superposition `Γ⁺ = αΨ + βΦ`
//! in terms of the concurrences and largest Schmidt weights of `Ψ` and `Φ`.
//!
//! Three premise classes are covered:
//!
//! | theorem | premise         | bounded quantity        |
//! |---------|-----------------|-------------------------|
//! | T1      | `ΨΦ† = 0`       | `C(Γ⁺)`                 |
//! | T2      | `Tr ΨΦ† = 0`    | `C(Γ⁺)`                 |
//! | T3      | none            | `(‖Γ⁺‖²/2) C(Γ⁺/‖Γ⁺‖)` |
//!
//! Every `|α|²`-scaled auxiliary function is evaluated in a division-free form,
//! so `α = 0` and `β = 0` are ordinary inputs rather than singularities.
//! Reports are always on the concurrence scale: T3 values are multiplied by
//! `2 / ‖Γ⁺‖²` before being stored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::states::{
    self, classify_relation, relation_residuals, PureState, Relation, StateError,
    SuperpositionInput, DEFAULT_RELATION_TOL, SQUARED_ROUNDING_TOL,
};

/// Premise residual beyond which T1/T2 refuse to evaluate (unless forced).
pub const PREMISE_TOL: f64 = 1e-8;
const AMPLITUDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("argument `{name}` = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("|alpha|^2 = 0: the unscaled function is singular, use the scaled form")]
    AlphaZero,
    #[error("{theorem} premise fails: residual {residual:.3e} exceeds {tol:.1e}")]
    RelationViolation {
        theorem: Theorem,
        residual: f64,
        tol: f64,
    },
    #[error("superposition is degenerate: ||Gamma||^2 = {norm_sq:.3e}")]
    DegenerateSuperposition { norm_sq: f64 },
    #[error(transparent)]
    State(StateError),
}

impl From<StateError> for BoundsError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::DegenerateSuperposition { norm_sq } => {
                Self::DegenerateSuperposition { norm_sq }
            }
            other => Self::State(other),
        }
    }
}

impl From<linalg::LinalgError> for BoundsError {
    fn from(e: linalg::LinalgError) -> Self {
        Self::State(e.into())
    }
}

pub type Result<T> = std::result::Result<T, BoundsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    T1,
    T2,
    T3,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::T1 => "T1",
            Theorem::T2 => "T2",
            Theorem::T3 => "T3",
        })
    }
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(Theorem::T1),
            "T2" => Ok(Theorem::T2),
            "T3" => Ok(Theorem::T3),
            _ => Err(format!("unknown theorem `{s}` (expected T1, T2 or T3)")),
        }
    }
}

/// Which theorem to apply; `Auto` picks the strongest one whose premise holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TheoremSelector {
    #[default]
    Auto,
    Fixed(Theorem),
}

impl FromStr for TheoremSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(TheoremSelector::Auto)
        } else {
            s.parse().map(TheoremSelector::Fixed)
        }
    }
}

/// Closed form used for the T2/T3 lower bounds.
///
/// `Printed` is the published `l` / `l̃`, whose cross term is `+2α²β²λ_n`.
/// `Rederived` carries the eigenvalue estimate `Σ_i [α²λ_i(ΨΨ†) + β²λ_n(ΦΦ†)]²`
/// through without the final rewrite, giving the bracket
/// `‖Γ‖⁴/4 − α⁴(1 − C²) − 2α²β²λ_n − rβ⁴λ_n²`. The two agree at `λ_n = 1/2`; for
/// `λ_n > 1/2` the printed form is larger and can exceed the true concurrence
/// (for instance `Φ = Ψ` a product state, `α = β`, under T3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LowerBoundForm {
    #[default]
    Printed,
    Rederived,
}

impl FromStr for LowerBoundForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "printed" => Ok(Self::Printed),
            "rederived" => Ok(Self::Rederived),
            _ => Err(format!(
                "unknown lower-bound form `{s}` (expected printed or rederived)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Evaluate T1/T2 even when the premise residual exceeds `premise_tol`.
    pub force: bool,
    pub premise_tol: f64,
    pub rank_tol: f64,
    pub relation_tol: f64,
    pub lower_form: LowerBoundForm,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            force: false,
            premise_tol: PREMISE_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            relation_tol: DEFAULT_RELATION_TOL,
            lower_form: LowerBoundForm::Printed,
        }
    }
}

/// All bounds one theorem gives for one superposition.
///
/// Pairs are ordered `[Ψ-anchored, Φ-anchored]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub actual_concurrence: f64,
    pub lower_individual: [f64; 2],
    pub lower_combined: f64,
    pub lower_symmetric: f64,
    pub upper_individual: [f64; 2],
    pub upper_combined: f64,
    pub upper_symmetric: f64,
    pub rank_r: usize,
    pub norm_sq: f64,
    /// Nonzero-lower-bound condition of the better-anchored state (T2/T3 only).
    pub condition_flag: Option<bool>,
    pub condition_individual: Option<[bool; 2]>,
    pub lambda_max_psi: f64,
    pub lambda_max_phi: f64,
    pub alpha_sq: f64,
    /// `‖ΨΦ†‖_F` for T1, `|Tr ΨΦ†|` for T2, `0` for T3.
    pub premise_residual: f64,
    /// Set when the premise failed and evaluation was forced.
    pub premise_warning: Option<String>,
    pub lower_form: LowerBoundForm,
}

impl BoundReport {
    /// Chain `lower_symmetric ≤ lower_combined ≤ actual ≤ upper_combined ≤ upper_symmetric`
    /// as four consecutive pairs.
    pub fn chain(&self) -> [(BoundLink, f64, f64); 4] {
        [
            (
                BoundLink::LowerSymmetric,
                self.lower_symmetric,
                self.lower_combined,
            ),
            (
                BoundLink::LowerCombined,
                self.lower_combined,
                self.actual_concurrence,
            ),
            (
                BoundLink::UpperCombined,
                self.actual_concurrence,
                self.upper_combined,
            ),
            (
                BoundLink::UpperSymmetric,
                self.upper_combined,
                self.upper_symmetric,
            ),
        ]
    }

    /// Worst violated link of the sandwich chain, as `(link, excess)` with
    /// `excess = left − right`, if any link fails by more than `tol`.
    ///
    /// Every quantity in the chain is a square root, so near zero an absolute
    /// error of `ε` in the radicand shows up as `√ε`. A link whose squares agree
    /// to [`SQUARED_ROUNDING_TOL`] is not reported. A nonpositive `tol` turns
    /// this allowance off.
    pub fn sandwich_violation(&self, tol: f64) -> Option<(BoundLink, f64)> {
        let sq_allowance = if tol > 0.0 {
            SQUARED_ROUNDING_TOL
        } else {
            f64::NEG_INFINITY
        };
        let mut worst: Option<(BoundLink, f64)> = None;
        for (link, left, right) in self.chain() {
            let excess = left - right;
            let sq_excess = left * left - right * right;
            if excess > tol && sq_excess > sq_allowance && worst.is_none_or(|(_, w)| excess > w) {
                worst = Some((link, excess));
            }
        }
        worst
    }

    pub fn lower_gap(&self) -> f64 {
        self.actual_concurrence - self.lower_combined
    }

    pub fn upper_gap(&self) -> f64 {
        self.upper_combined - self.actual_concurrence
    }
}

/// A link of the sandwich chain, named after the bound on its non-actual side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundLink {
    /// `lower_symmetric ≤ lower_combined`
    LowerSymmetric,
    /// `lower_combined ≤ actual`
    LowerCombined,
    /// `actual ≤ upper_combined`
    UpperCombined,
    /// `upper_combined ≤ upper_symmetric`
    UpperSymmetric,
    /// Weyl chain `λ_i(H) + λ_1(K) ≤ λ_i(H + K) ≤ λ_i(H) + λ_n(K)`
    Weyl,
}

impl fmt::Display for BoundLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundLink::LowerSymmetric => "lower_symmetric",
            BoundLink::LowerCombined => "lower_combined",
            BoundLink::UpperCombined => "upper_combined",
            BoundLink::UpperSymmetric => "upper_symmetric",
            BoundLink::Weyl => "weyl",
        })
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(BoundsError::Domain { name, value });
    }
    Ok(())
}

fn check_amplitudes(alpha_sq: f64, beta_sq: f64) -> Result<()> {
    check_unit("alpha_sq", alpha_sq)?;
    check_unit("beta_sq", beta_sq)?;
    if (alpha_sq + beta_sq - 1.0).abs() > AMPLITUDE_TOL {
        return Err(BoundsError::Domain {
            name: "alpha_sq + beta_sq",
            value: alpha_sq + beta_sq,
        });
    }
    Ok(())
}

fn check_rank(r: usize) -> Result<()> {
    if r == 0 {
        return Err(BoundsError::Domain {
            name: "r",
            value: 0.0,
        });
    }
    Ok(())
}

/// `|α|² C̃(Ψ, α) = √(α⁴C²(Ψ) + β⁴ + 2α²β²)`.
pub fn c_tilde_scaled(c_psi: f64, alpha_sq: f64, beta_sq: f64) -> Result<f64> {
    check_unit("c_psi", c_psi)?;
    check_amplitudes(alpha_sq, beta_sq)?;
    let a2 = alpha_sq * alpha_sq;
    Ok((a2 * c_psi * c_psi + beta_sq * beta_sq + 2.0 * alpha_sq * beta_sq).sqrt())
}

/// `f = √(C² + (r−1)·ρ·λ·(2 + r·ρ·λ))` with `ρ = |β|²/|α|²`.
pub fn f_func(c_sq: f64, ratio: f64, lambda_max: f64, r: usize) -> Result<f64> {
    check_unit("c_sq", c_sq)?;
    check_unit("lambda_max", lambda_max)?;
    check_rank(r)?;
    if !(ratio >= 0.0 && ratio.is_finite()) {
        return Err(BoundsError::Domain {
            name: "ratio",
            value: ratio,
        });
    }
    let rm1 = (r - 1) as f64;
    let x = ratio * lambda_max;
    Ok((c_sq + rm1 * x * (2.0 + r as f64 * x)).sqrt())
}

/// `|α|² f`, division-free: `√(α⁴C² + (r−1)·β²λ·(2α² + rβ²λ))`.
pub fn f_scaled(c_sq: f64, alpha_sq: f64, beta_sq: f64, lambda_max: f64, r: usize) -> Result<f64> {
    check_unit("c_sq", c_sq)?;
    check_unit("lambda_max", lambda_max)?;
    check_amplitudes(alpha_sq, beta_sq)?;
    check_rank(r)?;
    let rm1 = (r - 1) as f64;
    let y = beta_sq * lambda_max;
    Ok((alpha_sq * alpha_sq * c_sq + rm1 * y * (2.0 * alpha_sq + r as f64 * y)).sqrt())
}

/// Unscaled `l`:
/// `√(max{0, C² + (β⁴/α⁴)(1 − rλ²) + 2(β²/α²)λ − 3/(4α⁴)})`.
pub fn l_func(c_sq: f64, alpha_sq: f64, beta_sq: f64, lambda_max: f64, r: usize) -> Result<f64> {
    if alpha_sq == 0.0 {
        return Err(BoundsError::AlphaZero);
    }
    check_unit("c_sq", c_sq)?;
    check_unit("lambda_max", lambda_max)?;
    check_amplitudes(alpha_sq, beta_sq)?;
    check_rank(r)?;
    let ratio = beta_sq / alpha_sq;
    let bracket = c_sq
        + ratio * ratio * (1.0 - r as f64 * lambda_max * lambda_max)
        + 2.0 * ratio * lambda_max
        - 0.75 / (alpha_sq * alpha_sq);
    Ok(bracket.max(0.0).sqrt())
}

/// `|α|² l`, division-free; the `norm_sq = 1` case of [`l_tilde_func`].
pub fn l_scaled(c_sq: f64, alpha_sq: f64, beta_sq: f64, lambda_max: f64, r: usize) -> Result<f64> {
    l_tilde_func(c_sq, alpha_sq, beta_sq, lambda_max, r, 1.0)
}

/// `|α|² l̃`, division-free:
/// `√(max{0, α⁴C² + β⁴(1 − rλ²) + 2α²β²λ − (1 − ‖Γ‖⁴/4)})`.
pub fn l_tilde_func(
    c_sq: f64,
    alpha_sq: f64,
    beta_sq: f64,
    lambda_max: f64,
    r: usize,
    norm_sq: f64,
) -> Result<f64> {
    lower_scaled(
        LowerBoundForm::Printed,
        c_sq,
        alpha_sq,
        beta_sq,
        lambda_max,
        r,
        norm_sq,
    )
}

/// `|α|²`-scaled lower-bound function in the requested form.
pub fn lower_scaled(
    form: LowerBoundForm,
    c_sq: f64,
    alpha_sq: f64,
    beta_sq: f64,
    lambda_max: f64,
    r: usize,
    norm_sq: f64,
) -> Result<f64> {
    check_unit("c_sq", c_sq)?;
    check_unit("lambda_max", lambda_max)?;
    check_amplitudes(alpha_sq, beta_sq)?;
    check_rank(r)?;
    if !(norm_sq > 0.0 && norm_sq <= 2.0 + 1e-12) {
        return Err(BoundsError::Domain {
            name: "norm_sq",
            value: norm_sq,
        });
    }
    let (a2, b2) = (alpha_sq * alpha_sq, beta_sq * beta_sq);
    let rl2 = r as f64 * lambda_max * lambda_max;
    let quarter_n4 = 0.25 * norm_sq * norm_sq;
    let bracket = match form {
        LowerBoundForm::Printed => {
            a2 * c_sq + b2 * (1.0 - rl2) + 2.0 * alpha_sq * beta_sq * lambda_max
                - (1.0 - quarter_n4)
        }
        LowerBoundForm::Rederived => {
            quarter_n4 - a2 * (1.0 - c_sq) - 2.0 * alpha_sq * beta_sq * lambda_max - b2 * rl2
        }
    };
    Ok(bracket.max(0.0).sqrt())
}

/// `β⁴ + α⁴(C² + 1/r) > 3/4`, evaluated strictly.
pub fn condition29(c_sq: f64, alpha_sq: f64, beta_sq: f64, r: usize) -> bool {
    condition38(c_sq, alpha_sq, beta_sq, r, 1.0)
}

/// `β⁴ + α⁴(C² + 1/r) > 1 − ‖Γ‖⁴/4`, evaluated strictly.
pub fn condition38(c_sq: f64, alpha_sq: f64, beta_sq: f64, r: usize, norm_sq: f64) -> bool {
    let lhs = beta_sq * beta_sq + alpha_sq * alpha_sq * (c_sq + 1.0 / r as f64);
    lhs > 1.0 - 0.25 * norm_sq * norm_sq
}

/// Quantities shared by all three theorems.
struct Ingredients {
    alpha_sq: f64,
    beta_sq: f64,
    c_psi: f64,
    c_phi: f64,
    lambda_psi: f64,
    lambda_phi: f64,
    actual: f64,
    rank_r: usize,
    norm_sq: f64,
}

impl Ingredients {
    fn gather(inp: &SuperpositionInput, opts: &BoundOptions) -> Result<Self> {
        let sup = states::superpose(inp)?;
        let gamma = sup.normalized()?;
        let (alpha_sq, beta_sq) = clean_amplitudes(inp);
        Ok(Self {
            alpha_sq,
            beta_sq,
            c_psi: inp.psi.concurrence()?,
            c_phi: inp.phi.concurrence()?,
            lambda_psi: inp.psi.lambda_max()?.min(1.0),
            lambda_phi: inp.phi.lambda_max()?.min(1.0),
            actual: gamma.concurrence()?,
            rank_r: linalg::numerical_rank(&sup.gamma, opts.rank_tol)?,
            norm_sq: sup.norm_sq,
        })
    }
}

/// `|α|²`, `|β|²` nudged so they sum to one exactly (they already do to 1e-12).
fn clean_amplitudes(inp: &SuperpositionInput) -> (f64, f64) {
    let a = inp.alpha_sq().clamp(0.0, 1.0);
    let b = inp.beta_sq().clamp(0.0, 1.0);
    if a <= b {
        (a, 1.0 - a)
    } else {
        (1.0 - b, b)
    }
}

fn premise(theorem: Theorem, residual: f64, opts: &BoundOptions) -> Result<Option<String>> {
    if residual <= opts.premise_tol {
        return Ok(None);
    }
    if opts.force {
        Ok(Some(format!(
            "{theorem} premise fails (residual {residual:.3e} > {:.1e}); bounds evaluated off-premise",
            opts.premise_tol
        )))
    } else {
        Err(BoundsError::RelationViolation {
            theorem,
            residual,
            tol: opts.premise_tol,
        })
    }
}

fn mean(pair: [f64; 2]) -> f64 {
    0.5 * (pair[0] + pair[1])
}

/// Bounds for biorthogonal states (`ΨΦ† = 0`).
pub fn theorem1_bounds(inp: &SuperpositionInput, opts: &BoundOptions) -> Result<BoundReport> {
    let (bi, _) = relation_residuals(&inp.psi, &inp.phi)?;
    let premise_warning = premise(Theorem::T1, bi, opts)?;
    let g = Ingredients::gather(inp, opts)?;

    let lower = [g.alpha_sq * g.c_psi, g.beta_sq * g.c_phi];
    let upper = [
        c_tilde_scaled(g.c_psi, g.alpha_sq, g.beta_sq)?,
        c_tilde_scaled(g.c_phi, g.beta_sq, g.alpha_sq)?,
    ];
    Ok(BoundReport {
        theorem: Theorem::T1,
        actual_concurrence: g.actual,
        lower_individual: lower,
        lower_combined: lower[0].max(lower[1]),
        lower_symmetric: mean(lower),
        upper_individual: upper,
        upper_combined: upper[0].min(upper[1]),
        upper_symmetric: mean(upper),
        rank_r: g.rank_r,
        norm_sq: g.norm_sq,
        condition_flag: None,
        condition_individual: None,
        lambda_max_psi: g.lambda_psi,
        lambda_max_phi: g.lambda_phi,
        alpha_sq: g.alpha_sq,
        premise_residual: bi,
        premise_warning,
        lower_form: opts.lower_form,
    })
}

/// Bounds for trace-orthogonal states (`Tr ΨΦ† = 0`).
pub fn theorem2_bounds(inp: &SuperpositionInput, opts: &BoundOptions) -> Result<BoundReport> {
    let (_, tr) = relation_residuals(&inp.psi, &inp.phi)?;
    let premise_warning = premise(Theorem::T2, tr, opts)?;
    let g = Ingredients::gather(inp, opts)?;
    let mut report = scaled_report(Theorem::T2, &g, 1.0, opts.lower_form)?;
    report.premise_residual = tr;
    report.premise_warning = premise_warning;
    Ok(report)
}

/// Bounds for arbitrary states, rescaled by `2 / ‖Γ⁺‖²` to the concurrence scale.
pub fn theorem3_bounds(inp: &SuperpositionInput, opts: &BoundOptions) -> Result<BoundReport> {
    let g = Ingredients::gather(inp, opts)?;
    scaled_report(Theorem::T3, &g, g.norm_sq, opts.lower_form)
}

/// Shared T2/T3 evaluation. `norm_sq` is `1` for T2 and `‖Γ⁺‖²` for T3.
fn scaled_report(
    theorem: Theorem,
    g: &Ingredients,
    norm_sq: f64,
    form: LowerBoundForm,
) -> Result<BoundReport> {
    let r = g.rank_r;
    let (a, b) = (g.alpha_sq, g.beta_sq);
    let (cp2, cf2) = (g.c_psi * g.c_psi, g.c_phi * g.c_phi);
    // Bound on (‖Γ‖²/2)·C maps to a bound on C.
    let to_concurrence = 2.0 / norm_sq;

    let upper = [
        to_concurrence * f_scaled(cp2, a, b, g.lambda_phi, r)?,
        to_concurrence * f_scaled(cf2, b, a, g.lambda_psi, r)?,
    ];
    let lower = [
        to_concurrence * lower_scaled(form, cp2, a, b, g.lambda_phi, r, norm_sq)?,
        to_concurrence * lower_scaled(form, cf2, b, a, g.lambda_psi, r, norm_sq)?,
    ];
    let conditions = [
        condition38(cp2, a, b, r, norm_sq),
        condition38(cf2, b, a, r, norm_sq),
    ];
    let condition_flag = if lower[0] > lower[1] {
        conditions[0]
    } else if lower[1] > lower[0] {
        conditions[1]
    } else {
        conditions[0] || conditions[1]
    };

    Ok(BoundReport {
        theorem,
        actual_concurrence: g.actual,
        lower_individual: lower,
        lower_combined: lower[0].max(lower[1]),
        lower_symmetric: mean(lower),
        upper_individual: upper,
        upper_combined: upper[0].min(upper[1]),
        upper_symmetric: mean(upper),
        rank_r: r,
        norm_sq: g.norm_sq,
        condition_flag: Some(condition_flag),
        condition_individual: Some(conditions),
        lambda_max_psi: g.lambda_psi,
        lambda_max_phi: g.lambda_phi,
        alpha_sq: a,
        premise_residual: 0.0,
        premise_warning: None,
        lower_form: form,
    })
}

/// Theorem picked by `Auto`: the strongest one whose premise holds at `tol`.
pub fn select_theorem(psi: &PureState, phi: &PureState, tol: f64) -> Result<Theorem> {
    Ok(match classify_relation(psi, phi, tol)?.relation {
        Relation::Biorthogonal => Theorem::T1,
        Relation::TraceOrthogonal => Theorem::T2,
        Relation::General => Theorem::T3,
    })
}

pub fn evaluate(
    inp: &SuperpositionInput,
    selector: TheoremSelector,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let theorem = match selector {
        TheoremSelector::Fixed(t) => t,
        TheoremSelector::Auto => select_theorem(&inp.psi, &inp.phi, opts.relation_tol)?,
    };
    evaluate_theorem(inp, theorem, opts)
}

pub fn evaluate_theorem(
    inp: &SuperpositionInput,
    theorem: Theorem,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    match theorem {
        Theorem::T1 => theorem1_bounds(inp, opts),
        Theorem::T2 => theorem2_bounds(inp, opts),
        Theorem::T3 => theorem3_bounds(inp, opts),
    }
}
