//! Sparse recovery: the ℓ1/ℓ1 guarantee, exact top-k, and nearest-codeword
//! decoding from Gaussian sketches under uniform ℓ1-ball noise.

use rand::Rng;
use rayon::prelude::*;

use crate::codes::SparseCodebook;
use crate::error::{check_len, domain, Result};
use crate::geometry::{l1_distance, l1_norm, l2_norm, L1Ball};
use crate::harness::seed::{derive_rng, stream};
use crate::measurement::MeasurementMatrix;

/// Safety constant applied to the noise-radius formula unless overridden.
pub const DEFAULT_SAFETY: f64 = 1.0 / 6.0;

fn ranked_indices(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    // larger magnitude first, lower index on ties
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    idx
}

/// Keeps the `k` largest-magnitude entries (lower index wins ties).
pub fn top_k(x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k > x.len() {
        return domain(format!("k = {k} exceeds dimension {}", x.len()));
    }
    let mut out = vec![0.0; x.len()];
    for &i in ranked_indices(x).iter().take(k) {
        out[i] = x[i];
    }
    Ok(out)
}

/// `min_{k-sparse x'} ||x - x'||₁`: the ℓ1 mass outside the top `k`.
pub fn best_k_term_error(x: &[f64], k: usize) -> Result<f64> {
    if k > x.len() {
        return domain(format!("k = {k} exceeds dimension {}", x.len()));
    }
    Ok(ranked_indices(x).iter().skip(k).map(|&i| x[i].abs()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeCheck {
    pub holds: bool,
    /// `||x - x̂||₁ / Err`; zero when `x̂ = x`, infinite when `Err = 0 ≠ ||x - x̂||₁`.
    pub ratio: f64,
    pub error: f64,
    pub best_k_term: f64,
}

/// Checks `||x - x̂||₁ ≤ C · min_{k-sparse x'} ||x - x'||₁`.
pub fn check_l1l1(x: &[f64], xhat: &[f64], k: usize, c: f64) -> Result<GuaranteeCheck> {
    check_l1l1_within(x, xhat, k, c, 0.0)
}

/// As [`check_l1l1`], accepting an additive slack `tol` for floating-point
/// pipelines.
pub fn check_l1l1_within(x: &[f64], xhat: &[f64], k: usize, c: f64, tol: f64) -> Result<GuaranteeCheck> {
    check_len(x.len(), xhat.len())?;
    if !(c >= 1.0) {
        return domain(format!("approximation factor C = {c} must be at least 1"));
    }
    let error = l1_distance(x, xhat);
    let best = best_k_term_error(x, k)?;
    let ratio = if best > 0.0 {
        error / best
    } else if error == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(GuaranteeCheck { holds: error <= c * best + tol, ratio, error, best_k_term: best })
}

/// A recovery procedure `(A, Ax) ↦ x̂`.
pub trait RecoveryOracle: Send + Sync {
    fn recover(&self, a: &MeasurementMatrix, sketch: &[f64]) -> Result<Vec<f64>>;

    fn sparsity(&self) -> usize;

    /// Declared approximation factor `C ≥ 1`.
    fn approximation_factor(&self) -> f64;

    fn failure_probability(&self) -> f64;

    fn outputs_k_sparse(&self) -> bool;

    fn name(&self) -> &'static str;
}

/// `top_k(Aᵀ·sketch)`. With a square orthonormal `A` this sees `x` exactly and
/// meets the guarantee with `C = 1` deterministically.
#[derive(Debug, Clone, Copy)]
pub struct TopKOracle {
    pub k: usize,
}

impl RecoveryOracle for TopKOracle {
    fn recover(&self, a: &MeasurementMatrix, sketch: &[f64]) -> Result<Vec<f64>> {
        top_k(&a.apply_transpose(sketch)?, self.k)
    }

    fn sparsity(&self) -> usize {
        self.k
    }

    fn approximation_factor(&self) -> f64 {
        1.0
    }

    fn failure_probability(&self) -> f64 {
        0.0
    }

    fn outputs_k_sparse(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "topk"
    }
}

/// Always answers the zero vector. Used as a control.
#[derive(Debug, Clone, Copy)]
pub struct ZeroOracle {
    pub k: usize,
}

impl RecoveryOracle for ZeroOracle {
    fn recover(&self, a: &MeasurementMatrix, sketch: &[f64]) -> Result<Vec<f64>> {
        check_len(a.rows(), sketch.len())?;
        Ok(vec![0.0; a.cols()])
    }

    fn sparsity(&self) -> usize {
        self.k
    }

    fn approximation_factor(&self) -> f64 {
        1.0
    }

    fn failure_probability(&self) -> f64 {
        1.0
    }

    fn outputs_k_sparse(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "zero"
    }
}

/// Returns `scale·y` for the `(scale, y) ∈ scales × Y` whose image is closest
/// to the sketch in ℓ2. Only meaningful for signals dominated by one scaled
/// codeword.
#[derive(Debug, Clone)]
pub struct NearestCodewordOracle {
    pub codebook: SparseCodebook,
    pub scales: Vec<f64>,
    pub approximation_factor: f64,
}

impl RecoveryOracle for NearestCodewordOracle {
    fn recover(&self, a: &MeasurementMatrix, sketch: &[f64]) -> Result<Vec<f64>> {
        check_len(a.cols(), self.codebook.n())?;
        check_len(a.rows(), sketch.len())?;
        if self.codebook.is_empty() || self.scales.is_empty() {
            return domain("nearest-codeword oracle needs a codebook and at least one scale");
        }
        let columns = a.columns();
        let mut best = (f64::INFINITY, 0.0, 0usize);
        for &scale in &self.scales {
            let (dist, idx) = nearest_scaled(&columns, a.rows(), sketch, &self.codebook, scale);
            if dist < best.0 {
                best = (dist, scale, idx);
            }
        }
        let mut out = vec![0.0; a.cols()];
        for &p in self.codebook.support(best.2) {
            out[p as usize] = best.1;
        }
        Ok(out)
    }

    fn sparsity(&self) -> usize {
        self.codebook.k()
    }

    fn approximation_factor(&self) -> f64 {
        self.approximation_factor
    }

    fn failure_probability(&self) -> f64 {
        0.25
    }

    fn outputs_k_sparse(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "nn"
    }
}

/// `(min squared distance, argmin)` of `||sketch - scale·A·y||₂` over `Y`.
/// `columns` is `A` in column-major order with `rows` rows.
fn nearest_scaled(columns: &[f64], rows: usize, sketch: &[f64], codebook: &SparseCodebook, scale: f64) -> (f64, usize) {
    let mut residual = vec![0.0; rows];
    let mut best = (f64::INFINITY, 0usize);
    for (idx, support) in codebook.supports().enumerate() {
        residual.copy_from_slice(sketch);
        for &p in support {
            let col = &columns[p as usize * rows..(p as usize + 1) * rows];
            for (r, c) in residual.iter_mut().zip(col) {
                *r -= scale * c;
            }
        }
        let dist: f64 = residual.iter().map(|r| r * r).sum();
        if dist < best.0 {
            best = (dist, idx);
        }
    }
    best
}

/// Index of the codeword whose image `A·y` is nearest to `sketch` in ℓ2,
/// lowest index on ties.
pub fn nn_recover(a: &MeasurementMatrix, sketch: &[f64], codebook: &SparseCodebook) -> Result<usize> {
    if codebook.is_empty() {
        return domain("codebook is empty");
    }
    check_len(a.cols(), codebook.n())?;
    check_len(a.rows(), sketch.len())?;
    Ok(nearest_scaled(&a.columns(), a.rows(), sketch, codebook, 1.0).1)
}

/// `r` for a binary codebook: distinct words at Hamming distance `h` sit at
/// ℓ2 distance exactly `√h`.
pub fn codebook_l2_separation(codebook: &SparseCodebook) -> f64 {
    (codebook.min_dist() as f64).sqrt()
}

/// `safety · r·√m·n^{1/2-1/m} / (|Y|^{1/m}·ln^{3/2} n)`.
pub fn corollary_noise_radius(n: usize, m: usize, codebook_size: usize, r: f64, safety: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    safety * r * mf.sqrt() * nf.powf(0.5 - 1.0 / mf) / ((codebook_size as f64).powf(1.0 / mf) * nf.ln().powf(1.5))
}

#[derive(Debug, Clone)]
pub struct RecoveryExperimentParams<'a> {
    pub codebook: &'a SparseCodebook,
    pub m: usize,
    /// Minimum ℓ2 separation between codewords.
    pub r: f64,
    /// Noise radius.
    pub s: f64,
    pub trials: u64,
    pub seed: u64,
}

impl RecoveryExperimentParams<'_> {
    pub fn n(&self) -> usize {
        self.codebook.n()
    }

    pub fn k(&self) -> usize {
        self.codebook.k()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryTrial {
    pub trial: u64,
    pub truth: usize,
    pub decoded: usize,
    pub noise_l1: f64,
    pub noise_l2: f64,
}

impl RecoveryTrial {
    pub fn success(&self) -> bool {
        self.truth == self.decoded
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryExperiment {
    pub trials: Vec<RecoveryTrial>,
    pub success_rate: f64,
}

/// Per trial: a uniform codeword `y`, noise `z` uniform on `B₁(s)`, a fresh
/// `m × n` Gaussian `A`; success iff nearest-codeword decoding of `A(y+z)`
/// returns `y`.
pub fn uniform_noise_experiment(params: &RecoveryExperimentParams<'_>) -> Result<RecoveryExperiment> {
    if params.codebook.is_empty() {
        return domain("codebook is empty");
    }
    if params.m == 0 || params.trials == 0 {
        return domain("m and trials must be positive");
    }
    if !(params.r > 0.0) || !(params.s >= 0.0) {
        return domain(format!("need r > 0 and s ≥ 0 (r = {}, s = {})", params.r, params.s));
    }
    let n = params.n();
    let ball = (params.s > 0.0).then(|| L1Ball::new(n, params.s)).transpose()?;
    let trials = (0..params.trials)
        .into_par_iter()
        .map(|trial| -> Result<RecoveryTrial> {
            let truth = derive_rng(params.seed, trial, stream::INSTANCE).random_range(0..params.codebook.len());
            let noise = match &ball {
                Some(b) => b.sample(&mut derive_rng(params.seed, trial, stream::NOISE)),
                None => vec![0.0; n],
            };
            let a = MeasurementMatrix::gaussian(params.m, n, &mut derive_rng(params.seed, trial, stream::MATRIX));
            let mut signal = noise.clone();
            for &p in params.codebook.support(truth) {
                signal[p as usize] += 1.0;
            }
            let decoded = nn_recover(&a, &a.apply(&signal)?, params.codebook)?;
            Ok(RecoveryTrial { trial, truth, decoded, noise_l1: l1_norm(&noise), noise_l2: l2_norm(&noise) })
        })
        .collect::<Result<Vec<_>>>()?;
    let hits = trials.iter().filter(|t| t.success()).count();
    Ok(RecoveryExperiment { success_rate: hits as f64 / trials.len() as f64, trials })
}
