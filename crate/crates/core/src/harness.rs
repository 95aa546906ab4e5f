//! Monte Carlo verification campaigns, `|α|²` sweeps and replays of the matrix
//! identities behind the bounds.
//!
//! Trial `i` of a campaign draws its inputs from stream `i` of the campaign seed
//! and touches nothing else, so trials run in any order and on any number of
//! threads. Per-trial results are folded into a [`SummaryAccumulator`] whose
//! merge is exact (counts, extrema, fixed-point sums), which makes the final
//! [`CampaignSummary`] independent of how the trials were partitioned.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{
    self, BoundLink, BoundOptions, BoundReport, BoundsError, LowerBoundForm, Theorem,
    TheoremSelector,
};
use crate::generators::{self, GeneratorConfig, GeneratorError};
use crate::linalg::{self, ComplexMatrix, DEFAULT_HERMITIAN_TOL};
use crate::states::{
    self, relation_residuals, PureState, StateError, SuperpositionInput, DEGENERATE_NORM_SQ,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid campaign configuration: {0}")]
    ConfigInvalid(String),
    #[error("no trial records to summarize")]
    EmptyStream,
    #[error("sweep needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

impl From<StateError> for HarnessError {
    fn from(e: StateError) -> Self {
        Self::Bounds(e.into())
    }
}

impl From<linalg::LinalgError> for HarnessError {
    fn from(e: linalg::LinalgError) -> Self {
        Self::Bounds(e.into())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CampaignKind {
    T1,
    T2,
    T3,
    Weyl,
}

impl CampaignKind {
    pub fn theorem(self) -> Option<Theorem> {
        match self {
            CampaignKind::T1 => Some(Theorem::T1),
            CampaignKind::T2 => Some(Theorem::T2),
            CampaignKind::T3 => Some(Theorem::T3),
            CampaignKind::Weyl => None,
        }
    }
}

impl fmt::Display for CampaignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.theorem() {
            Some(t) => t.fmt(f),
            None => f.write_str("Weyl"),
        }
    }
}

impl FromStr for CampaignKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("weyl") {
            return Ok(CampaignKind::Weyl);
        }
        match s.parse::<Theorem>() {
            Ok(Theorem::T1) => Ok(CampaignKind::T1),
            Ok(Theorem::T2) => Ok(CampaignKind::T2),
            Ok(Theorem::T3) => Ok(CampaignKind::T3),
            Err(_) => Err(format!(
                "unknown campaign `{s}` (expected T1, T2, T3 or Weyl)"
            )),
        }
    }
}

/// Deliberate corruption of a campaign, used to check that failures surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultInjection {
    /// Compare against `−tolerance`, so exactly tight links count as failures.
    NegateTolerance,
}

impl FromStr for FaultInjection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "negate-tolerance" => Ok(Self::NegateTolerance),
            _ => Err(format!("unknown fault `{s}` (expected negate-tolerance)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub kind: CampaignKind,
    pub trials: u64,
    /// Trial `i` uses `dims[i % dims.len()]`. Weyl campaigns use `n` as the matrix size.
    pub dims: Vec<(usize, usize)>,
    pub seed: u64,
    pub tolerance: f64,
    pub alpha_sq_range: (f64, f64),
    pub lower_form: LowerBoundForm,
    pub fault: Option<FaultInjection>,
}

impl CampaignConfig {
    pub fn new(kind: CampaignKind, trials: u64, dims: Vec<(usize, usize)>, seed: u64) -> Self {
        Self {
            kind,
            trials,
            dims,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            alpha_sq_range: (0.0, 1.0),
            lower_form: LowerBoundForm::Printed,
            fault: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::ConfigInvalid(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if self.dims.is_empty() {
            return bad("dims must be nonempty".into());
        }
        for &(n, m) in &self.dims {
            if n == 0 || m == 0 {
                return bad(format!("dimension {n}x{m} has a zero side"));
            }
            if self.kind == CampaignKind::T1 && m < 2 {
                return bad(format!("T1 needs m >= 2, got {n}x{m}"));
            }
            if self.kind == CampaignKind::T2 && n * m < 2 {
                return bad(format!("T2 needs n*m >= 2, got {n}x{m}"));
            }
        }
        let (lo, hi) = self.alpha_sq_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return bad(format!("alpha_sq range [{lo}, {hi}] is not inside [0, 1]"));
        }
        Ok(())
    }

    fn check_tolerance(&self) -> f64 {
        match self.fault {
            Some(FaultInjection::NegateTolerance) => -self.tolerance,
            None => self.tolerance,
        }
    }

    fn bound_options(&self) -> BoundOptions {
        BoundOptions {
            lower_form: self.lower_form,
            ..BoundOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub which: BoundLink,
    /// Amount by which the link failed beyond the tolerance (always `> 0`).
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub kind: CampaignKind,
    pub dims: (usize, usize),
    pub alpha_sq: Option<f64>,
    pub report: Option<BoundReport>,
    /// Worst Weyl-chain excess (Weyl campaigns only).
    pub weyl_margin: Option<f64>,
    /// The superposition was degenerate and no bounds were evaluated.
    pub skipped: bool,
    pub violation: Option<Violation>,
}

impl TrialRecord {
    /// Record for an evaluated report; the violation is derived from the sandwich chain.
    pub fn from_report(
        trial_index: u64,
        kind: CampaignKind,
        dims: (usize, usize),
        report: BoundReport,
        tol: f64,
    ) -> Self {
        let violation = report
            .sandwich_violation(tol)
            .map(|(which, excess)| Violation {
                which,
                margin: excess - tol,
            });
        Self {
            trial_index,
            kind,
            dims,
            alpha_sq: Some(report.alpha_sq),
            report: Some(report),
            weyl_margin: None,
            skipped: false,
            violation,
        }
    }

    pub fn weyl(trial_index: u64, dims: (usize, usize), margin: f64, tol: f64) -> Self {
        let violation = (margin > tol).then_some(Violation {
            which: BoundLink::Weyl,
            margin: margin - tol,
        });
        Self {
            trial_index,
            kind: CampaignKind::Weyl,
            dims,
            alpha_sq: None,
            report: None,
            weyl_margin: Some(margin),
            skipped: false,
            violation,
        }
    }

    pub fn degenerate(
        trial_index: u64,
        kind: CampaignKind,
        dims: (usize, usize),
        alpha_sq: f64,
    ) -> Self {
        Self {
            trial_index,
            kind,
            dims,
            alpha_sq: Some(alpha_sq),
            report: None,
            weyl_margin: None,
            skipped: true,
            violation: None,
        }
    }

    /// Flat row in the CSV/JSONL record schema.
    pub fn row(&self) -> RecordRow {
        let rep = self.report.as_ref();
        RecordRow {
            trial_index: self.trial_index,
            n: self.dims.0,
            m: self.dims.1,
            alpha_sq: self.alpha_sq,
            theorem: self.kind.to_string(),
            actual: rep.map(|r| r.actual_concurrence),
            lower_sym: rep.map(|r| r.lower_symmetric),
            lower_comb: rep.map(|r| r.lower_combined),
            upper_comb: rep.map(|r| r.upper_combined),
            upper_sym: rep.map(|r| r.upper_symmetric),
            rank_r: rep.map(|r| r.rank_r),
            norm_sq: rep.map(|r| r.norm_sq),
            condition: rep.and_then(|r| r.condition_flag),
            violation_margin: self.violation.map(|v| v.margin),
        }
    }
}

/// One trial in the external record schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub trial_index: u64,
    pub n: usize,
    pub m: usize,
    pub alpha_sq: Option<f64>,
    pub theorem: String,
    pub actual: Option<f64>,
    pub lower_sym: Option<f64>,
    pub lower_comb: Option<f64>,
    pub upper_comb: Option<f64>,
    pub upper_sym: Option<f64>,
    pub rank_r: Option<usize>,
    pub norm_sq: Option<f64>,
    pub condition: Option<bool>,
    pub violation_margin: Option<f64>,
}

impl RecordRow {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record row serializes")
    }
}

/// Sum of `f64`s in 2⁻⁶⁴ fixed point, exact and therefore order-independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct FixedSum(i128);

impl FixedSum {
    const SCALE: f64 = 18446744073709551616.0; // 2^64

    fn add(&mut self, x: f64) {
        self.0 += (x * Self::SCALE).round() as i128;
    }

    fn merge(&mut self, other: Self) {
        self.0 += other.0;
    }

    fn mean(self, count: u64) -> Option<f64> {
        (count > 0).then(|| self.0 as f64 / Self::SCALE / count as f64)
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn min_u64(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Mergeable partial summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryAccumulator {
    total: u64,
    evaluated: u64,
    skipped: u64,
    violations: u64,
    first_violation: Option<u64>,
    max_violation_margin: Option<f64>,
    max_lower_gap: Option<f64>,
    min_upper_gap: Option<f64>,
    lower_gap_sum: FixedSum,
    upper_gap_sum: FixedSum,
    nonzero_lower: u64,
    condition_true: u64,
    consistency_failures: u64,
    max_weyl_margin: Option<f64>,
}

impl SummaryAccumulator {
    /// Folds one record. `tol` is the threshold above which a lower bound counts as nonzero.
    pub fn push(&mut self, rec: &TrialRecord, tol: f64) {
        self.total += 1;
        if rec.skipped {
            self.skipped += 1;
            return;
        }
        self.evaluated += 1;
        if let Some(v) = rec.violation {
            self.violations += 1;
            self.first_violation = min_u64(self.first_violation, Some(rec.trial_index));
            self.max_violation_margin = max_opt(self.max_violation_margin, Some(v.margin));
        }
        self.max_weyl_margin = max_opt(self.max_weyl_margin, rec.weyl_margin);
        if let Some(rep) = &rec.report {
            let (lg, ug) = (rep.lower_gap(), rep.upper_gap());
            self.max_lower_gap = max_opt(self.max_lower_gap, Some(lg));
            self.min_upper_gap = min_opt(self.min_upper_gap, Some(ug));
            self.lower_gap_sum.add(lg);
            self.upper_gap_sum.add(ug);
            let nonzero = rep.lower_combined > tol;
            if nonzero {
                self.nonzero_lower += 1;
            }
            if let Some(flag) = rep.condition_flag {
                if flag {
                    self.condition_true += 1;
                } else if nonzero {
                    self.consistency_failures += 1;
                }
            }
        }
    }

    pub fn merge(mut self, o: Self) -> Self {
        self.total += o.total;
        self.evaluated += o.evaluated;
        self.skipped += o.skipped;
        self.violations += o.violations;
        self.first_violation = min_u64(self.first_violation, o.first_violation);
        self.max_violation_margin = max_opt(self.max_violation_margin, o.max_violation_margin);
        self.max_lower_gap = max_opt(self.max_lower_gap, o.max_lower_gap);
        self.min_upper_gap = min_opt(self.min_upper_gap, o.min_upper_gap);
        self.lower_gap_sum.merge(o.lower_gap_sum);
        self.upper_gap_sum.merge(o.upper_gap_sum);
        self.nonzero_lower += o.nonzero_lower;
        self.condition_true += o.condition_true;
        self.consistency_failures += o.consistency_failures;
        self.max_weyl_margin = max_opt(self.max_weyl_margin, o.max_weyl_margin);
        self
    }

    pub fn finish(
        self,
        kind: CampaignKind,
        seed: Option<u64>,
        tolerance: f64,
        runtime: Duration,
    ) -> CampaignSummary {
        let with_report = self.evaluated
            - if kind == CampaignKind::Weyl {
                self.evaluated
            } else {
                0
            };
        CampaignSummary {
            kind,
            seed,
            tolerance,
            total: self.total,
            evaluated: self.evaluated,
            skipped_degenerate: self.skipped,
            violations: self.violations,
            first_violation_trial: self.first_violation,
            max_violation_margin: self.max_violation_margin,
            max_lower_gap: self.max_lower_gap,
            min_upper_gap: self.min_upper_gap,
            mean_lower_gap: self.lower_gap_sum.mean(with_report),
            mean_upper_gap: self.upper_gap_sum.mean(with_report),
            nonzero_lower_count: self.nonzero_lower,
            condition_true_count: self.condition_true,
            condition_consistency_failures: self.consistency_failures,
            max_weyl_margin: self.max_weyl_margin,
            runtime,
        }
    }
}

/// Aggregate outcome of a campaign.
///
/// Gap fields are `actual − lower_combined` and `upper_combined − actual`; they
/// are absent for Weyl campaigns. `runtime` is not serialized so that the JSON
/// form is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub kind: CampaignKind,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub total: u64,
    pub evaluated: u64,
    pub skipped_degenerate: u64,
    pub violations: u64,
    pub first_violation_trial: Option<u64>,
    pub max_violation_margin: Option<f64>,
    pub max_lower_gap: Option<f64>,
    pub min_upper_gap: Option<f64>,
    pub mean_lower_gap: Option<f64>,
    pub mean_upper_gap: Option<f64>,
    pub nonzero_lower_count: u64,
    pub condition_true_count: u64,
    pub condition_consistency_failures: u64,
    pub max_weyl_margin: Option<f64>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl CampaignSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Runs trial `index` of the campaign.
pub fn run_trial(cfg: &CampaignConfig, index: u64) -> Result<TrialRecord> {
    let dims = cfg.dims[(index % cfg.dims.len() as u64) as usize];
    let gen = GeneratorConfig::new(cfg.seed, dims.0, dims.1)
        .with_alpha_sq_range(cfg.alpha_sq_range.0, cfg.alpha_sq_range.1);
    let mut rng = gen.rng(index);
    let tol = cfg.check_tolerance();

    let Some(theorem) = cfg.kind.theorem() else {
        let d = dims.0;
        let h = generators::gue(&mut rng, d);
        let k = generators::gue(&mut rng, d);
        let margin = linalg::weyl_margin(&h, &k)?;
        return Ok(TrialRecord::weyl(index, dims, margin, tol));
    };

    let (psi, phi) = match theorem {
        Theorem::T1 => generators::biorthogonal_pair(&gen, &mut rng)?,
        Theorem::T2 => generators::orthogonal_pair(&gen, &mut rng)?,
        Theorem::T3 => (
            generators::haar_state(&gen, &mut rng),
            generators::haar_state(&gen, &mut rng),
        ),
    };
    let (alpha, beta) = generators::random_amplitudes(&gen, &mut rng)?;
    let inp = SuperpositionInput::new(alpha, beta, psi, phi)?;
    match bounds::evaluate_theorem(&inp, theorem, &cfg.bound_options()) {
        Ok(report) => Ok(TrialRecord::from_report(index, cfg.kind, dims, report, tol)),
        Err(BoundsError::DegenerateSuperposition { .. }) => Ok(TrialRecord::degenerate(
            index,
            cfg.kind,
            dims,
            inp.alpha_sq(),
        )),
        Err(e) => Err(e.into()),
    }
}

fn run_range(cfg: &CampaignConfig, range: std::ops::Range<u64>) -> Result<SummaryAccumulator> {
    let tol = cfg.tolerance;
    range
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .try_fold(SummaryAccumulator::default, |mut acc, rec| {
            acc.push(&rec?, tol);
            Ok(acc)
        })
        .try_reduce(SummaryAccumulator::default, |a, b| Ok(a.merge(b)))
}

/// Runs every trial (in parallel) and returns the summary.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignSummary> {
    run_campaign_partitioned(cfg, 1)
}

/// Splits the trial range into `partitions` contiguous blocks, runs each
/// independently and merges the partial summaries.
pub fn run_campaign_partitioned(cfg: &CampaignConfig, partitions: u64) -> Result<CampaignSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let parts = partitions.clamp(1, cfg.trials);
    let chunk = cfg.trials.div_ceil(parts);
    let mut acc = SummaryAccumulator::default();
    for p in 0..parts {
        let lo = p * chunk;
        let hi = ((p + 1) * chunk).min(cfg.trials);
        if lo < hi {
            acc = acc.merge(run_range(cfg, lo..hi)?);
        }
    }
    Ok(acc.finish(cfg.kind, Some(cfg.seed), cfg.tolerance, start.elapsed()))
}

/// Runs trials serially in index order, handing each record to `sink`.
pub fn run_campaign_streaming<E>(
    cfg: &CampaignConfig,
    mut sink: impl FnMut(&TrialRecord) -> std::result::Result<(), E>,
) -> Result<std::result::Result<CampaignSummary, E>> {
    cfg.validate()?;
    let start = Instant::now();
    let mut acc = SummaryAccumulator::default();
    for i in 0..cfg.trials {
        let rec = run_trial(cfg, i)?;
        acc.push(&rec, cfg.tolerance);
        if let Err(e) = sink(&rec) {
            return Ok(Err(e));
        }
    }
    Ok(Ok(acc.finish(
        cfg.kind,
        Some(cfg.seed),
        cfg.tolerance,
        start.elapsed(),
    )))
}

/// Summarizes an existing record stream. `tolerance` sets the nonzero-lower-bound threshold.
pub fn tightness_report<'a>(
    records: impl IntoIterator<Item = &'a TrialRecord>,
    tolerance: f64,
) -> Result<CampaignSummary> {
    let mut acc = SummaryAccumulator::default();
    let mut kind = None;
    for rec in records {
        kind.get_or_insert(rec.kind);
        acc.push(rec, tolerance);
    }
    let kind = kind.ok_or(HarnessError::EmptyStream)?;
    Ok(acc.finish(kind, None, tolerance, Duration::ZERO))
}

/// One row of an `|α|²` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha_sq: f64,
    pub lower_symmetric: f64,
    pub lower_combined: f64,
    pub actual: f64,
    pub upper_combined: f64,
    pub upper_symmetric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub theorem: Theorem,
    pub rows: Vec<SweepRow>,
}

/// Bounds at `|α|² = k/(steps−1)`, `k = 0..steps`, with real `α, β ≥ 0`.
pub fn sweep_alpha(
    psi: &PureState,
    phi: &PureState,
    steps: usize,
    selector: TheoremSelector,
    opts: &BoundOptions,
) -> Result<SweepTable> {
    if steps < 2 {
        return Err(HarnessError::TooFewSteps(steps));
    }
    let (n, m) = states::common_dims(psi, phi);
    let (psi, phi) = (psi.pad_to(n, m)?, phi.pad_to(n, m)?);
    let theorem = match selector {
        TheoremSelector::Fixed(t) => t,
        TheoremSelector::Auto => bounds::select_theorem(&psi, &phi, opts.relation_tol)?,
    };
    let last = (steps - 1) as f64;
    let rows = (0..steps)
        .map(|k| {
            let alpha_sq = if k == steps - 1 { 1.0 } else { k as f64 / last };
            let inp = SuperpositionInput::new(
                Complex64::new(alpha_sq.sqrt(), 0.0),
                Complex64::new((1.0 - alpha_sq).sqrt(), 0.0),
                psi.clone(),
                phi.clone(),
            )?;
            let rep = bounds::evaluate_theorem(&inp, theorem, opts)?;
            Ok(SweepRow {
                alpha_sq,
                lower_symmetric: rep.lower_symmetric,
                lower_combined: rep.lower_combined,
                actual: rep.actual_concurrence,
                upper_combined: rep.upper_combined,
                upper_symmetric: rep.upper_symmetric,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { theorem, rows })
}

/// Result of replaying a proof's matrix identity and eigenvalue estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub passed: bool,
    /// `‖D − ½Γ⁺Γ⁺† − ½Γ⁻Γ⁻†‖_F` with `D = |α|²ΨΨ† + |β|²ΦΦ†`.
    pub identity_residual: f64,
    /// Same residual for the unweighted `ΨΨ† + ΦΦ†` (T2 only). Kept for diagnosis: it
    /// never vanishes, and at `|α|² = |β|² = ½` the two sides differ by a factor of 2.
    pub unweighted_identity_residual: Option<f64>,
    /// Largest `left − right` over all checked eigenvalue inequalities.
    pub max_eigen_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReplayOutcome {
    Checked(ReplayReport),
    /// `‖Γ⁺‖` or `‖Γ⁻‖` vanished, so the normalized decomposition does not exist.
    DegenerateSkip,
}

impl ReplayOutcome {
    /// `true` for a passing check or a degenerate skip.
    pub fn ok(&self) -> bool {
        match self {
            ReplayOutcome::Checked(r) => r.passed,
            ReplayOutcome::DegenerateSkip => true,
        }
    }
}

fn weighted_sum(
    alpha_sq: f64,
    a: &ComplexMatrix,
    beta_sq: f64,
    b: &ComplexMatrix,
) -> ComplexMatrix {
    a.scale_real(alpha_sq)
        .add(&b.scale_real(beta_sq))
        .expect("same shape")
}

fn ascending(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(linalg::psd_eig(m, DEFAULT_HERMITIAN_TOL)?.eigenvalues)
}

struct ReplayParts {
    alpha_sq: f64,
    beta_sq: f64,
    rho_psi: ComplexMatrix,
    rho_phi: ComplexMatrix,
    plus: ComplexMatrix,
    minus: ComplexMatrix,
}

impl ReplayParts {
    fn new(psi: &PureState, phi: &PureState, alpha: Complex64, beta: Complex64) -> Self {
        let combine = |b: Complex64| {
            psi.matrix()
                .scale(alpha)
                .add(&phi.matrix().scale(b))
                .expect("same shape")
        };
        Self {
            alpha_sq: alpha.norm_sqr(),
            beta_sq: beta.norm_sqr(),
            rho_psi: psi.reduced_density(),
            rho_phi: phi.reduced_density(),
            plus: combine(beta),
            minus: combine(-beta),
        }
    }

    fn weighted(&self) -> ComplexMatrix {
        weighted_sum(self.alpha_sq, &self.rho_psi, self.beta_sq, &self.rho_phi)
    }

    /// `max_i` of `½λ_i(Γ⁺Γ⁺†) − (|α|²λ_i(ΨΨ†) + |β|²λ_n(ΦΦ†))`, and with `Ψ`, `Φ`
    /// swapped when `both` is set.
    fn eigen_excess(&self, both: bool) -> Result<f64> {
        let half_plus = ascending(&self.plus.gram().scale_real(0.5))?;
        let lp = ascending(&self.rho_psi)?;
        let lf = ascending(&self.rho_phi)?;
        let (lp_max, lf_max) = (lp[lp.len() - 1], lf[lf.len() - 1]);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..half_plus.len() {
            worst = worst.max(half_plus[i] - (self.alpha_sq * lp[i] + self.beta_sq * lf_max));
            if both {
                worst = worst.max(half_plus[i] - (self.alpha_sq * lp_max + self.beta_sq * lf[i]));
            }
        }
        Ok(worst)
    }
}

/// Replays the trace-orthogonal proof: the weighted identity
/// `|α|²ΨΨ† + |β|²ΦΦ† = ½Γ⁺Γ⁺† + ½Γ⁻Γ⁻†` and, for every `i`,
/// `½λ_i(Γ⁺Γ⁺†) ≤ |α|²λ_i(ΨΨ†) + |β|²λ_n(ΦΦ†)` together with its `Ψ ↔ Φ` mirror.
pub fn derivation_replay_t2(
    psi: &PureState,
    phi: &PureState,
    alpha: Complex64,
    beta: Complex64,
    tol: f64,
) -> Result<ReplayOutcome> {
    let (_, tr) = relation_residuals(psi, phi)?;
    if tr > bounds::PREMISE_TOL {
        return Err(BoundsError::RelationViolation {
            theorem: Theorem::T2,
            residual: tr,
            tol: bounds::PREMISE_TOL,
        }
        .into());
    }
    let parts = ReplayParts::new(psi, phi, alpha, beta);
    let halves = parts.plus.gram().add(&parts.minus.gram())?.scale_real(0.5);
    let identity_residual = parts.weighted().sub(&halves)?.frobenius_norm();
    let unweighted = parts
        .rho_psi
        .add(&parts.rho_phi)?
        .sub(&halves)?
        .frobenius_norm();
    let max_eigen_excess = parts.eigen_excess(true)?;
    Ok(ReplayOutcome::Checked(ReplayReport {
        passed: identity_residual <= tol && max_eigen_excess <= tol,
        identity_residual,
        unweighted_identity_residual: Some(unweighted),
        max_eigen_excess,
    }))
}

/// Replays the general-case proof: the identity
/// `|α|²ΨΨ† + |β|²ΦΦ† = (‖Γ⁺‖²/2)Γ̃⁺Γ̃⁺† + (‖Γ⁻‖²/2)Γ̃⁻Γ̃⁻†` with normalized `Γ̃±`,
/// and `(‖Γ⁺‖²/2)λ_i(Γ̃⁺Γ̃⁺†) ≤ |α|²λ_i(ΨΨ†) + |β|²λ_n(ΦΦ†)` for every `i`.
pub fn derivation_replay_t3(
    psi: &PureState,
    phi: &PureState,
    alpha: Complex64,
    beta: Complex64,
    tol: f64,
) -> Result<ReplayOutcome> {
    if psi.dims() != phi.dims() {
        return Err(StateError::ShapeMismatch {
            left: psi.dims(),
            right: phi.dims(),
        }
        .into());
    }
    let parts = ReplayParts::new(psi, phi, alpha, beta);
    let (np, nm) = (
        parts.plus.frobenius_norm_sq(),
        parts.minus.frobenius_norm_sq(),
    );
    if np < DEGENERATE_NORM_SQ || nm < DEGENERATE_NORM_SQ {
        return Ok(ReplayOutcome::DegenerateSkip);
    }
    let plus_t = parts.plus.scale_real(1.0 / np.sqrt());
    let minus_t = parts.minus.scale_real(1.0 / nm.sqrt());
    let rhs = plus_t
        .gram()
        .scale_real(0.5 * np)
        .add(&minus_t.gram().scale_real(0.5 * nm))?;
    let identity_residual = parts.weighted().sub(&rhs)?.frobenius_norm();
    let max_eigen_excess = parts.eigen_excess(false)?;
    Ok(ReplayOutcome::Checked(ReplayReport {
        passed: identity_residual <= tol && max_eigen_excess <= tol,
        identity_residual,
        unweighted_identity_residual: None,
        max_eigen_excess,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn config_validation() {
        let ok = CampaignConfig::new(CampaignKind::T1, 10, vec![(2, 4)], 1);
        assert!(ok.validate().is_ok());
        let cases = [
            CampaignConfig {
                trials: 0,
                ..ok.clone()
            },
            CampaignConfig {
                tolerance: -1e-8,
                ..ok.clone()
            },
            CampaignConfig {
                dims: vec![],
                ..ok.clone()
            },
            CampaignConfig {
                dims: vec![(3, 1)],
                ..ok.clone()
            },
            CampaignConfig {
                alpha_sq_range: (0.5, 0.2),
                ..ok.clone()
            },
        ];
        for cfg in cases {
            assert!(
                matches!(cfg.validate(), Err(HarnessError::ConfigInvalid(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn sweep_product_pair() {
        let e00 = PureState::basis(2, 2, 0, 0);
        let e11 = PureState::basis(2, 2, 1, 1);
        let table = sweep_alpha(
            &e00,
            &e11,
            3,
            TheoremSelector::Auto,
            &BoundOptions::default(),
        )
        .unwrap();
        assert_eq!(table.theorem, Theorem::T1);
        let alphas: Vec<f64> = table.rows.iter().map(|r| r.alpha_sq).collect();
        assert_eq!(alphas, vec![0.0, 0.5, 1.0]);
        assert_eq!(table.rows[0].actual, 0.0);
        assert_abs_diff_eq!(table.rows[1].actual, H, epsilon = 1e-12);
        assert_eq!(table.rows[2].actual, 0.0);
        assert_abs_diff_eq!(
            table.rows[1].upper_symmetric,
            3f64.sqrt() / 2.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            sweep_alpha(
                &e00,
                &e11,
                1,
                TheoremSelector::Auto,
                &BoundOptions::default()
            ),
            Err(HarnessError::TooFewSteps(1))
        ));
    }

    #[test]
    fn replay_t2_bell_flip() {
        let bell = PureState::maximally_entangled(2);
        let e01 = PureState::basis(2, 2, 0, 1);
        let out = derivation_replay_t2(&bell, &e01, r(H), r(H), 1e-12).unwrap();
        let ReplayOutcome::Checked(rep) = out else {
            panic!("not degenerate")
        };
        assert!(rep.passed);
        assert!(rep.identity_residual <= 1e-12);
        // The unweighted sum is twice the weighted one here.
        assert!(rep.unweighted_identity_residual.unwrap() > 0.5);
    }

    #[test]
    fn replay_t2_single_term() {
        let bell = PureState::maximally_entangled(2);
        let e01 = PureState::basis(2, 2, 0, 1);
        let out = derivation_replay_t2(&bell, &e01, r(1.0), r(0.0), 1e-12).unwrap();
        assert!(out.ok());
    }

    #[test]
    fn replay_t2_rejects_overlap() {
        let bell = PureState::maximally_entangled(2);
        let e00 = PureState::basis(2, 2, 0, 0);
        assert!(matches!(
            derivation_replay_t2(&bell, &e00, r(H), r(H), 1e-10),
            Err(HarnessError::Bounds(BoundsError::RelationViolation { .. }))
        ));
    }

    #[test]
    fn replay_t3_same_state_is_degenerate() {
        let bell = PureState::maximally_entangled(2);
        assert_eq!(
            derivation_replay_t3(&bell, &bell, r(H), r(H), 1e-10).unwrap(),
            ReplayOutcome::DegenerateSkip
        );
    }

    #[test]
    fn replay_t3_matches_t2_identity_on_orthogonal_inputs() {
        let bell = PureState::maximally_entangled(2);
        let e01 = PureState::basis(2, 2, 0, 1);
        let (a, b) = (r(0.6), Complex64::new(0.0, 0.8));
        let ReplayOutcome::Checked(t2) = derivation_replay_t2(&bell, &e01, a, b, 1e-10).unwrap()
        else {
            panic!()
        };
        let ReplayOutcome::Checked(t3) = derivation_replay_t3(&bell, &e01, a, b, 1e-10).unwrap()
        else {
            panic!()
        };
        assert!(t2.passed && t3.passed);
        assert_abs_diff_eq!(t2.identity_residual, t3.identity_residual, epsilon = 1e-14);
    }

    #[test]
    fn fixed_sum_is_order_independent() {
        let xs = [0.1, 1e-9, 0.7, 3.3e-5, 0.25, 1.0 / 3.0];
        let mut fwd = FixedSum::default();
        let mut rev = FixedSum::default();
        for &x in &xs {
            fwd.add(x);
        }
        for &x in xs.iter().rev() {
            rev.add(x);
        }
        assert_eq!(fwd, rev);
        assert_abs_diff_eq!(
            fwd.mean(xs.len() as u64).unwrap(),
            xs.iter().sum::<f64>() / 6.0,
            epsilon = 1e-15
        );
    }
}
