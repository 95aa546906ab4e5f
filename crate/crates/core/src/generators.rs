//! Seeded random states and state pairs.
//!
//! Randomness comes from ChaCha20 ([`rand_chacha::ChaCha20Rng`]): a campaign
//! seed selects the key and the trial index selects the 64-bit stream, so trial
//! `i` of seed `s` draws the same numbers no matter which thread evaluates it or
//! how many trials run before it.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::bounds::{self, BoundOptions};
use crate::linalg::{self, ComplexMatrix};
use crate::states::{PureState, SuperpositionInput};

/// Gram–Schmidt residuals below this norm are redrawn.
pub const ORTHOGONAL_RETRY_NORM: f64 = 1e-6;
const MAX_RETRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("empty or invalid |alpha|^2 range [{0}, {1}]")]
    EmptyRange(f64, f64),
    #[error(
        "Gram-Schmidt residual stayed below {ORTHOGONAL_RETRY_NORM:e} after {MAX_RETRIES} draws"
    )]
    RetriesExhausted,
}

pub type Result<T> = std::result::Result<T, GeneratorError>;

/// Shape and amplitude range for generated instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    /// Closed interval `[lo, hi] ⊆ [0, 1]` for `|α|²`.
    pub alpha_sq_range: (f64, f64),
    /// Number of B-side directions given to `Ψ` in [`biorthogonal_pair`];
    /// `None` means `⌈m/2⌉`.
    pub split: Option<usize>,
}

impl GeneratorConfig {
    pub fn new(seed: u64, n: usize, m: usize) -> Self {
        Self {
            seed,
            n,
            m,
            alpha_sq_range: (0.0, 1.0),
            split: None,
        }
    }

    pub fn with_alpha_sq_range(mut self, lo: f64, hi: f64) -> Self {
        self.alpha_sq_range = (lo, hi);
        self
    }

    pub fn with_dims(mut self, n: usize, m: usize) -> Self {
        self.n = n;
        self.m = m;
        self
    }

    /// Independent random stream number `index` of this seed.
    pub fn rng(&self, index: u64) -> ChaCha20Rng {
        stream_rng(self.seed, index)
    }
}

pub fn stream_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `rows x cols` matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite gaussian entries")
}

/// Haar-random `d x d` unitary: Gram–Schmidt on the columns of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    loop {
        let mut q = ginibre(rng, d, d);
        if orthonormalize_columns(&mut q) {
            return q;
        }
    }
}

/// Modified Gram–Schmidt in place. Returns `false` if a column collapses.
fn orthonormalize_columns(q: &mut ComplexMatrix) -> bool {
    let (rows, cols) = q.shape();
    for j in 0..cols {
        for k in 0..j {
            let mut proj = Complex64::new(0.0, 0.0);
            for i in 0..rows {
                proj += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..rows {
                let qik = q[(i, k)];
                q[(i, j)] -= proj * qik;
            }
        }
        let norm = (0..rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return false;
        }
        for i in 0..rows {
            q[(i, j)] /= norm;
        }
    }
    true
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn gue<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    g.add(&g.adjoint()).expect("square").scale_real(0.5)
}

fn sample_haar_state<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> PureState {
    loop {
        if let Ok(s) = PureState::from_matrix(ginibre(rng, n, m)) {
            return s;
        }
    }
}

/// Haar-uniform state on the unit sphere of the `n·m`-dimensional space.
pub fn haar_state<R: Rng + ?Sized>(cfg: &GeneratorConfig, rng: &mut R) -> PureState {
    sample_haar_state(rng, cfg.n, cfg.m)
}

/// Pair with `ΨΦ† = 0`: the rows of `Ψ` and `Φ` live in complementary subspaces
/// of party B spanned by the columns of a Haar unitary.
pub fn biorthogonal_pair<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<(PureState, PureState)> {
    let (n, m) = (cfg.n, cfg.m);
    if m < 2 || n < 1 {
        return Err(GeneratorError::DimensionTooSmall(format!(
            "biorthogonal pairs need m >= 2, got {n}x{m}"
        )));
    }
    let k = cfg.split.unwrap_or(m.div_ceil(2));
    if k == 0 || k >= m {
        return Err(GeneratorError::DimensionTooSmall(format!(
            "split {k} leaves an empty side of B (m = {m})"
        )));
    }
    let w = haar_unitary(rng, m);
    let wt = w.transpose();
    let block = |lo: usize, hi: usize| {
        let mut out = ComplexMatrix::zeros(hi - lo, m);
        for (r, src) in (lo..hi).enumerate() {
            for j in 0..m {
                out[(r, j)] = wt[(src, j)];
            }
        }
        out
    };
    let psi = ginibre(rng, n, k).matmul(&block(0, k)).expect("shapes");
    let phi = ginibre(rng, n, m - k).matmul(&block(k, m)).expect("shapes");
    Ok((
        PureState::from_matrix(psi).expect("nonzero"),
        PureState::from_matrix(phi).expect("nonzero"),
    ))
}

/// Pair with `Tr ΨΦ† = 0`: `Φ` is a second Haar draw with its `Ψ` component removed.
pub fn orthogonal_pair<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<(PureState, PureState)> {
    if cfg.n * cfg.m < 2 {
        return Err(GeneratorError::DimensionTooSmall(format!(
            "orthogonal pairs need n*m >= 2, got {}x{}",
            cfg.n, cfg.m
        )));
    }
    let psi = haar_state(cfg, rng);
    for _ in 0..MAX_RETRIES {
        let x = haar_state(cfg, rng);
        if let Some(phi) = orthogonal_complement(&psi, x.matrix()) {
            return Ok((psi, phi));
        }
    }
    Err(GeneratorError::RetriesExhausted)
}

/// Normalized `X − ⟨Ψ, X⟩Ψ`, or `None` if the residual is too small to normalize.
fn orthogonal_complement(psi: &PureState, x: &ComplexMatrix) -> Option<PureState> {
    let overlap = linalg::frobenius_inner(x, psi.matrix()).expect("same shape");
    let mut residual = x.sub(&psi.matrix().scale(overlap)).expect("same shape");
    // A second pass removes what roundoff left behind.
    let again = linalg::frobenius_inner(&residual, psi.matrix()).expect("same shape");
    residual = residual
        .sub(&psi.matrix().scale(again))
        .expect("same shape");
    if residual.frobenius_norm() < ORTHOGONAL_RETRY_NORM {
        return None;
    }
    PureState::from_matrix(residual).ok()
}

/// Amplitudes with `|α|²` uniform on the configured range and independent uniform phases.
pub fn random_amplitudes<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<(Complex64, Complex64)> {
    let (lo, hi) = cfg.alpha_sq_range;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(GeneratorError::EmptyRange(lo, hi));
    }
    let alpha_sq = if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    };
    let phase_a: f64 = rng.random_range(0.0..TAU);
    let phase_b: f64 = rng.random_range(0.0..TAU);
    Ok((
        Complex64::from_polar(alpha_sq.sqrt(), phase_a),
        Complex64::from_polar((1.0 - alpha_sq).sqrt(), phase_b),
    ))
}

/// Best trace-orthogonal partner found by [`lower_bound_search`].
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// `(Φ, α, β, lower_combined)` of the best trial, or `None` for a null result.
    pub best: Option<(PureState, Complex64, Complex64, f64)>,
    pub trials: usize,
}

impl SearchResult {
    pub fn is_null(&self) -> bool {
        self.best.is_none()
    }

    pub fn bound(&self) -> f64 {
        self.best.as_ref().map_or(0.0, |b| b.3)
    }
}

/// Random search for a trace-orthogonal partner `Φ` of `psi` maximizing the
/// theorem-2 `lower_combined`.
///
/// Odd-numbered trials draw `Φ` Haar-uniformly; even-numbered trials bias it
/// toward a single dominant Schmidt coefficient (large `λ_n(ΦΦ†)`). Amplitudes
/// are drawn from the config range on every trial.
pub fn lower_bound_search<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    rng: &mut R,
    psi: &PureState,
    trials: usize,
) -> Result<SearchResult> {
    let (n, m) = psi.dims();
    if n * m < 2 {
        return Err(GeneratorError::DimensionTooSmall(format!(
            "no orthogonal partner exists in {n}x{m}"
        )));
    }
    let opts = BoundOptions::default();
    let mut best: Option<(PureState, Complex64, Complex64, f64)> = None;
    for t in 0..trials {
        let x = if t % 2 == 0 {
            let product = ginibre(rng, n, 1)
                .matmul(&ginibre(rng, 1, m))
                .expect("shapes");
            let product = product.scale_real(1.0 / product.frobenius_norm());
            let noise = sample_haar_state(rng, n, m).into_matrix();
            let weight: f64 = rng.random_range(0.0..0.5);
            product.add(&noise.scale_real(weight)).expect("same shape")
        } else {
            sample_haar_state(rng, n, m).into_matrix()
        };
        let Some(phi) = orthogonal_complement(psi, &x) else {
            continue;
        };
        let (alpha, beta) = random_amplitudes(cfg, rng)?;
        let Ok(inp) = SuperpositionInput::new(alpha, beta, psi.clone(), phi.clone()) else {
            continue;
        };
        let Ok(report) = bounds::theorem2_bounds(&inp, &opts) else {
            continue;
        };
        let value = report.lower_combined;
        if value > 0.0 && best.as_ref().is_none_or(|b| value > b.3) {
            best = Some((phi, alpha, beta, value));
        }
    }
    Ok(SearchResult { best, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{classify_relation, relation_residuals, Relation};
    use approx::assert_abs_diff_eq;

    #[test]
    fn haar_state_is_deterministic_per_seed() {
        let cfg = GeneratorConfig::new(1234, 3, 4);
        let a = haar_state(&cfg, &mut cfg.rng(0));
        let b = haar_state(&cfg, &mut cfg.rng(0));
        assert_eq!(a, b);
        let c = haar_state(&cfg, &mut cfg.rng(1));
        assert_ne!(a, c);
        assert_abs_diff_eq!(a.matrix().frobenius_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn one_by_one_state_is_a_phase() {
        let cfg = GeneratorConfig::new(9, 1, 1);
        let s = haar_state(&cfg, &mut cfg.rng(0));
        assert_abs_diff_eq!(s.matrix()[(0, 0)].norm(), 1.0, epsilon = 1e-15);
        assert_eq!(s.concurrence().unwrap(), 0.0);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = stream_rng(5, 0);
        for d in 1..6 {
            let u = haar_unitary(&mut rng, d);
            let err = u
                .adjoint()
                .matmul(&u)
                .unwrap()
                .sub(&ComplexMatrix::identity(d))
                .unwrap();
            assert!(err.frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn biorthogonal_pairs_satisfy_premise() {
        for (n, m) in [(2, 4), (3, 4), (1, 2), (4, 5)] {
            let cfg = GeneratorConfig::new(77, n, m);
            for i in 0..50 {
                let (psi, phi) = biorthogonal_pair(&cfg, &mut cfg.rng(i)).unwrap();
                let cls = classify_relation(&psi, &phi, 1e-10).unwrap();
                assert_eq!(cls.relation, Relation::Biorthogonal);
                assert!(cls.biorthogonal_residual <= 1e-12);
                assert!(cls.trace_residual <= 1e-12);
            }
        }
    }

    #[test]
    fn biorthogonal_two_by_two_gives_product_states() {
        let cfg = GeneratorConfig::new(3, 2, 2);
        for i in 0..20 {
            let (psi, phi) = biorthogonal_pair(&cfg, &mut cfg.rng(i)).unwrap();
            assert!(psi.concurrence().unwrap() < 1e-7);
            assert!(phi.concurrence().unwrap() < 1e-7);
        }
    }

    #[test]
    fn biorthogonal_rejects_small_b() {
        let cfg = GeneratorConfig::new(3, 3, 1);
        assert!(matches!(
            biorthogonal_pair(&cfg, &mut cfg.rng(0)),
            Err(GeneratorError::DimensionTooSmall(_))
        ));
        let cfg = GeneratorConfig {
            split: Some(3),
            ..GeneratorConfig::new(3, 2, 3)
        };
        assert!(biorthogonal_pair(&cfg, &mut cfg.rng(0)).is_err());
    }

    #[test]
    fn orthogonal_pairs_satisfy_premise() {
        let cfg = GeneratorConfig::new(11, 2, 2);
        for i in 0..200 {
            let (psi, phi) = orthogonal_pair(&cfg, &mut cfg.rng(i)).unwrap();
            let (_, tr) = relation_residuals(&psi, &phi).unwrap();
            assert!(tr <= 1e-12, "trial {i}: {tr}");
        }
        let tiny = GeneratorConfig::new(11, 1, 1);
        assert!(orthogonal_pair(&tiny, &mut tiny.rng(0)).is_err());
    }

    #[test]
    fn amplitude_examples() {
        let cfg = GeneratorConfig::new(1, 2, 2).with_alpha_sq_range(0.5, 0.5);
        let (a, b) = random_amplitudes(&cfg, &mut cfg.rng(0)).unwrap();
        assert_abs_diff_eq!(a.norm(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.norm(), 0.5f64.sqrt(), epsilon = 1e-15);

        let cfg = cfg.with_alpha_sq_range(1.0, 1.0);
        let (a, b) = random_amplitudes(&cfg, &mut cfg.rng(0)).unwrap();
        assert_eq!(b, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(a.norm(), 1.0, epsilon = 1e-15);

        for (lo, hi) in [(0.6, 0.4), (-0.1, 0.5), (0.2, 1.5)] {
            let cfg = cfg.with_alpha_sq_range(lo, hi);
            assert!(matches!(
                random_amplitudes(&cfg, &mut cfg.rng(0)),
                Err(GeneratorError::EmptyRange(..))
            ));
        }
    }

    #[test]
    fn search_with_no_trials_is_null() {
        let cfg = GeneratorConfig::new(1, 2, 2);
        let res = lower_bound_search(&cfg, &mut cfg.rng(0), &PureState::maximally_entangled(2), 0)
            .unwrap();
        assert!(res.is_null());
        assert_eq!(res.bound(), 0.0);
    }
}
