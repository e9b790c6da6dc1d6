//! Simulation of the Augmented Indexing reduction.
//!
//! Alice holds `y ∈ {0,1}^d`, cut into `log n` chunks of `⌊log|X|⌋` bits.
//! Chunk `j` (1-based, lowest bit indices first) names a codeword `x_j ∈ X`
//! and she sends `A'x` for `x = Σ_j D^j x_j`, where `A'` is a shared
//! orthonormal-rows matrix rounded to `b` bits. Bob knows an index `i` and the
//! bits after it, strips the fully known chunks from the message, adds fresh
//! ℓ1-ball noise and asks a recovery oracle for the remaining signal. The
//! heaviest surviving chunk is read off by ℓ1-nearest codeword.
//!
//! Bit indices are 0-based throughout.

use rand::Rng;
use rayon::prelude::*;

use crate::codes::{expand_to_binary, GreedyOptions, QaryCode, SparseCodebook};
use crate::error::{check_len, domain, Error, Result};
use crate::geometry::{l1_distance, l1_norm, L1Ball};
use crate::harness::seed::{derive_rng, stream};
use crate::measurement::{discretize, orthonormalize_rows, shadow_vector, MatrixKind, MeasurementMatrix};
use crate::recovery::{check_l1l1_within, RecoveryOracle};

/// Relative slack used when checking the guarantee on floating-point output.
pub const GUARANTEE_REL_TOL: f64 = 1e-9;

/// `b = ⌈(4 + 2 log D) log n⌉`.
pub fn protocol_bits(n: usize, base: u64) -> u32 {
    ((4.0 + 2.0 * (base as f64).log2()) * (n as f64).log2()).ceil() as u32
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    n: usize,
    k: usize,
    c: f64,
    base: u64,
    bits: u32,
    codebook: SparseCodebook,
    chunk_bits: usize,
    num_chunks: usize,
}

impl ProtocolConfig {
    /// `n` and `k` must be powers of two with `k | n`; `2C + 3` must be an
    /// integer; `X` must be `k`-sparse in dimension `n` with minimum distance
    /// at least `k` and at least two words.
    pub fn new(n: usize, k: usize, c: f64, codebook: SparseCodebook) -> Result<Self> {
        if !n.is_power_of_two() || !k.is_power_of_two() || k > n || n < 2 {
            return domain(format!("n = {n} and k = {k} must be powers of two with k | n, n ≥ 2"));
        }
        let base = 2.0 * c + 3.0;
        if !(c >= 1.0) || (base - base.round()).abs() > 1e-9 {
            return domain(format!("C = {c} must be ≥ 1 with 2C + 3 integral"));
        }
        if codebook.n() != n || codebook.k() != k {
            return domain("codebook dimension or weight does not match (n, k)");
        }
        if codebook.min_dist() < k {
            return domain(format!("codebook distance {} is below k = {k}", codebook.min_dist()));
        }
        if codebook.len() < 2 {
            return domain("codebook needs at least two words");
        }
        let base = base.round() as u64;
        let chunk_bits = codebook.len().ilog2() as usize;
        let num_chunks = n.ilog2() as usize;
        Ok(Self { n, k, c, base, bits: protocol_bits(n, base), codebook, chunk_bits, num_chunks })
    }

    /// Uses the greedy code over alphabet `n/k` at q-ary distance `⌈k/2⌉`,
    /// which expands to binary distance at least `k`.
    pub fn with_gv_codebook(n: usize, k: usize, c: f64) -> Result<Self> {
        if k == 0 || !n.is_multiple_of(k) {
            return domain(format!("k = {k} must divide n = {n}"));
        }
        let code = QaryCode::greedy((n / k) as u32, k, k.div_ceil(2), &GreedyOptions::default())?;
        Self::new(n, k, c, expand_to_binary(&code))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn approximation_factor(&self) -> f64 {
        self.c
    }

    /// `D = 2C + 3`.
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Overrides `b`; the analytic certificate assumes the default.
    pub fn with_bits(mut self, bits: u32) -> Self {
        self.bits = bits;
        self
    }

    pub fn codebook(&self) -> &SparseCodebook {
        &self.codebook
    }

    pub fn chunk_bits(&self) -> usize {
        self.chunk_bits
    }

    pub fn num_chunks(&self) -> usize {
        self.num_chunks
    }

    /// Total string length `d = ⌊log|X|⌋ · log n`.
    pub fn d(&self) -> usize {
        self.chunk_bits * self.num_chunks
    }

    /// 1-based chunk holding bit `index`.
    pub fn chunk_of(&self, index: usize) -> usize {
        index / self.chunk_bits + 1
    }

    /// `D^j` as an integer.
    fn scale(&self, j: usize) -> Result<i64> {
        i64::try_from(self.base).ok().and_then(|b| b.checked_pow(j as u32)).ok_or(Error::Overflow("computing D^j"))
    }

    /// Big-endian value of chunk `j` (1-based) of a full bit string.
    fn chunk_value(&self, bits: &[bool], j: usize) -> usize {
        bits[(j - 1) * self.chunk_bits..j * self.chunk_bits].iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }

    /// `Σ_j D^j x_j` over the given `(chunk, codeword)` pairs, as integers.
    fn combine(&self, chunks: impl IntoIterator<Item = (usize, usize)>) -> Result<Vec<i64>> {
        let mut x = vec![0i64; self.n];
        for (j, word) in chunks {
            let scale = self.scale(j)?;
            for &p in self.codebook.support(word) {
                let e = &mut x[p as usize];
                *e = e.checked_add(scale).ok_or(Error::Overflow("accumulating the signal"))?;
            }
        }
        Ok(x)
    }

    /// Codeword indices chosen by every chunk of `y`.
    pub fn codewords_of(&self, y: &[bool]) -> Result<Vec<usize>> {
        check_len(self.d(), y.len())?;
        (1..=self.num_chunks)
            .map(|j| {
                let v = self.chunk_value(y, j);
                if v >= self.codebook.len() {
                    domain(format!("chunk {j} value {v} exceeds codebook size"))
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// Alice's signal `x = Σ_j D^j x_j`.
    pub fn signal(&self, y: &[bool]) -> Result<Vec<i64>> {
        let words = self.codewords_of(y)?;
        self.combine(words.into_iter().enumerate().map(|(i, w)| (i + 1, w)))
    }
}

/// An Augmented Indexing input: Alice's string and Bob's index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedIndexingInstance {
    pub y: Vec<bool>,
    pub index: usize,
}

impl AugmentedIndexingInstance {
    pub fn new(y: Vec<bool>, index: usize) -> Result<Self> {
        if index >= y.len() {
            return domain(format!("index {index} outside string of length {}", y.len()));
        }
        Ok(Self { y, index })
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let y = (0..d).map(|_| rng.random::<bool>()).collect();
        Self { y, index: rng.random_range(0..d) }
    }

    pub fn d(&self) -> usize {
        self.y.len()
    }

    /// Bits strictly after the index: Bob's side information.
    pub fn suffix(&self) -> &[bool] {
        &self.y[self.index + 1..]
    }

    pub fn target(&self) -> bool {
        self.y[self.index]
    }
}

/// `A'x` transmitted as integers scaled by `2^b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub entries: Vec<i128>,
    pub bits: u32,
}

impl Message {
    /// Signed width of the widest entry (sign bit included).
    pub fn entry_width(&self) -> u32 {
        self.entries.iter().map(|v| 1 + (128 - v.unsigned_abs().leading_zeros())).max().unwrap_or(1)
    }

    /// `m ·` [`Message::entry_width`].
    pub fn size_bits(&self) -> u64 {
        self.entries.len() as u64 * u64::from(self.entry_width())
    }

    /// Entries as reals: `A'x`.
    pub fn to_reals(&self) -> Vec<f64> {
        let scale = 2f64.powi(-(self.bits as i32));
        self.entries.iter().map(|&v| v as f64 * scale).collect()
    }

    /// `;`-separated decimal integers.
    pub fn encode(&self) -> String {
        self.entries.iter().map(i128::to_string).collect::<Vec<_>>().join(";")
    }

    pub fn decode(text: &str, bits: u32) -> Result<Self> {
        let entries = text
            .split(';')
            .map(|t| t.parse::<i128>().map_err(|e| Error::Parse { line: 1, msg: format!("bad entry {t:?}: {e}") }))
            .collect::<Result<_>>()?;
        Ok(Self { entries, bits })
    }
}

fn scaled_product(ints: &[i128], cols: usize, x: &[i64]) -> Result<Vec<i128>> {
    ints.chunks_exact(cols)
        .map(|row| {
            row.iter().zip(x).try_fold(0i128, |acc, (&a, &xi)| {
                a.checked_mul(i128::from(xi)).and_then(|p| acc.checked_add(p)).ok_or(Error::Overflow("computing A'x"))
            })
        })
        .collect()
}

/// Alice's message `A'x`.
pub fn alice_encode(config: &ProtocolConfig, y: &[bool], a_discrete: &MeasurementMatrix) -> Result<Message> {
    let MatrixKind::Discretized { bits } = a_discrete.kind() else {
        return domain("Alice needs the discretized matrix");
    };
    check_len(config.n, a_discrete.cols())?;
    let x = config.signal(y)?;
    Ok(Message { entries: scaled_product(&a_discrete.to_scaled_integers()?, config.n, &x)?, bits })
}

/// Everything Bob computes on the way to his answer.
#[derive(Debug, Clone, PartialEq)]
pub struct BobDecode {
    pub bit: bool,
    /// 1-based chunk holding the queried bit.
    pub chunk: usize,
    pub codeword: usize,
    /// `A'w = A'x - A'z`, scaled by `2^b`.
    pub residual_message: Vec<i128>,
    /// Bob's private noise `u ~ B₁(k)`.
    pub noise: Vec<f64>,
    pub w_hat: Vec<f64>,
}

/// Bob's side: rebuild `z` from the suffix, peel it off the message, add
/// `A·u` noise, recover `ŵ` and read chunk `j` from the ℓ1-nearest scaled
/// codeword.
#[allow(clippy::too_many_arguments)]
pub fn bob_decode<R: Rng + ?Sized>(
    config: &ProtocolConfig,
    message: &Message,
    index: usize,
    suffix: &[bool],
    oracle: &dyn RecoveryOracle,
    a: &MeasurementMatrix,
    a_discrete: &MeasurementMatrix,
    rng: &mut R,
) -> Result<BobDecode> {
    let d = config.d();
    if index >= d {
        return domain(format!("index {index} outside [0, {d})"));
    }
    check_len(d - index - 1, suffix.len())?;
    check_len(a.rows(), message.entries.len())?;
    let j = config.chunk_of(index);

    // Chunks after j lie entirely inside the suffix.
    let known = (j + 1..=config.num_chunks).map(|t| {
        let start = (t - 1) * config.chunk_bits - (index + 1);
        let value = suffix[start..start + config.chunk_bits].iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        (t, value)
    });
    let z = config.combine(known)?;
    let az = scaled_product(&a_discrete.to_scaled_integers()?, config.n, &z)?;
    let residual_message = message
        .entries
        .iter()
        .zip(&az)
        .map(|(m, z)| m.checked_sub(*z).ok_or(Error::Overflow("subtracting A'z")))
        .collect::<Result<Vec<_>>>()?;

    let noise = L1Ball::new(config.n, config.k as f64)?.sample(rng);
    let au = a.apply(&noise)?;
    let scale = 2f64.powi(-(message.bits as i32));
    let sketch: Vec<f64> = residual_message.iter().zip(&au).map(|(&v, u)| v as f64 * scale - u).collect();
    let w_hat = oracle.recover(a, &sketch)?;
    check_len(config.n, w_hat.len())?;

    let codeword = nearest_scaled_codeword(&config.codebook, config.scale(j)? as f64, &w_hat);
    let offset = index - (j - 1) * config.chunk_bits;
    let bit = (codeword >> (config.chunk_bits - 1 - offset)) & 1 == 1;
    Ok(BobDecode { bit, chunk: j, codeword, residual_message, noise, w_hat })
}

/// `argmin_{x' ∈ X} ||scale·x' - v||₁`, lowest index on ties.
pub fn nearest_scaled_codeword(codebook: &SparseCodebook, scale: f64, v: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for (idx, support) in codebook.supports().enumerate() {
        // ||scale·x' - v||₁ - ||v||₁, touching only the support
        let delta: f64 = support.iter().map(|&p| (scale - v[p as usize]).abs() - v[p as usize].abs()).sum();
        if delta < best.0 {
            best = (delta, idx);
        }
    }
    best.1
}

/// Matrices agreed from the shared random string for one trial.
#[derive(Debug, Clone)]
pub struct SharedMatrices {
    pub orthonormal: MeasurementMatrix,
    pub discrete: MeasurementMatrix,
    pub roundoff: MeasurementMatrix,
}

impl SharedMatrices {
    pub fn draw(config: &ProtocolConfig, rows: usize, seed: u64, trial: u64) -> Result<Self> {
        if rows == 0 || rows > config.n {
            return domain(format!("rows = {rows} must be in [1, n = {}]", config.n));
        }
        let g = MeasurementMatrix::gaussian(rows, config.n, &mut derive_rng(seed, trial, stream::MATRIX));
        let orthonormal = orthonormalize_rows(&g)?;
        let disc = discretize(&orthonormal, config.bits)?;
        Ok(Self { orthonormal, discrete: disc.rounded, roundoff: disc.roundoff })
    }
}

/// One protocol run with the ground truth needed to audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub trial: u64,
    pub index: usize,
    pub chunk: usize,
    pub codeword: usize,
    pub decoded_codeword: usize,
    pub target_bit: bool,
    pub recovered_bit: bool,
    pub message: Message,
    pub message_bits: u64,
    /// `A'x - A'z` equals `A'w` computed directly, in exact integers.
    pub linear_exact: bool,
    /// `||u||₁ ≤ k - ||s||₁`: the shifted-ball overlap event.
    pub overlap_event: bool,
    /// `ŵ` meets the C-guarantee for the signal actually sketched, `w - s - u`.
    pub guarantee_held: bool,
    /// `||D^j x_j - ŵ||₁ / (k·D^j/2)`; below 1 means the decode margin holds.
    pub margin_ratio: f64,
}

impl Transcript {
    pub fn success(&self) -> bool {
        self.target_bit == self.recovered_bit
    }

    pub fn margin_holds(&self) -> bool {
        self.margin_ratio < 1.0
    }
}

/// Runs one trial: random instance, shared matrices, Alice, Bob, audit.
pub fn run_trial(
    config: &ProtocolConfig,
    oracle: &dyn RecoveryOracle,
    rows: usize,
    seed: u64,
    trial: u64,
) -> Result<Transcript> {
    let shared = SharedMatrices::draw(config, rows, seed, trial)?;
    let instance = AugmentedIndexingInstance::random(config.d(), &mut derive_rng(seed, trial, stream::INSTANCE));
    let message = alice_encode(config, &instance.y, &shared.discrete)?;
    let bob = bob_decode(
        config,
        &message,
        instance.index,
        instance.suffix(),
        oracle,
        &shared.orthonormal,
        &shared.discrete,
        &mut derive_rng(seed, trial, stream::BOB),
    )?;

    let words = config.codewords_of(&instance.y)?;
    let j = bob.chunk;
    let w_int = config.combine(words.iter().enumerate().take(j).map(|(i, &w)| (i + 1, w)))?;
    let direct = scaled_product(&shared.discrete.to_scaled_integers()?, config.n, &w_int)?;
    let w: Vec<f64> = w_int.iter().map(|&v| v as f64).collect();
    let s = shadow_vector(&shared.orthonormal, &shared.roundoff, &w)?;
    let sketched: Vec<f64> = w.iter().zip(&s).zip(&bob.noise).map(|((w, s), u)| w - s - u).collect();
    let tol = GUARANTEE_REL_TOL * l1_norm(&w).max(1.0);
    let guarantee = check_l1l1_within(&sketched, &bob.w_hat, config.k, config.c, tol)?;

    let scale = config.scale(j)? as f64;
    let mut head = vec![0.0; config.n];
    for &p in config.codebook.support(words[j - 1]) {
        head[p as usize] = scale;
    }
    let margin_ratio = l1_distance(&head, &bob.w_hat) / (config.k as f64 * scale / 2.0);

    let message_bits = message.size_bits();
    Ok(Transcript {
        trial,
        index: instance.index,
        chunk: j,
        codeword: words[j - 1],
        decoded_codeword: bob.codeword,
        target_bit: instance.target(),
        recovered_bit: bob.bit,
        linear_exact: direct == bob.residual_message,
        overlap_event: l1_norm(&bob.noise) <= config.k as f64 - l1_norm(&s),
        guarantee_held: guarantee.holds,
        margin_ratio,
        message,
        message_bits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub transcripts: Vec<Transcript>,
    pub success_rate: f64,
    pub mean_message_bits: f64,
    pub d: usize,
}

impl ProtocolRun {
    /// `d / mean message bits`: how many instance bits each sent bit carries.
    pub fn bits_ratio(&self) -> f64 {
        self.d as f64 / self.mean_message_bits
    }

    /// Every trial whose oracle met the guarantee also met the decode margin.
    pub fn margin_invariant_holds(&self) -> bool {
        self.transcripts.iter().all(|t| !t.guarantee_held || t.margin_holds())
    }
}

pub fn run_protocol_trials(
    config: &ProtocolConfig,
    oracle: &dyn RecoveryOracle,
    rows: usize,
    trials: u64,
    seed: u64,
) -> Result<ProtocolRun> {
    if trials == 0 {
        return domain("trials must be positive");
    }
    let transcripts =
        (0..trials).into_par_iter().map(|t| run_trial(config, oracle, rows, seed, t)).collect::<Result<Vec<_>>>()?;
    let count = transcripts.len() as f64;
    let hits = transcripts.iter().filter(|t| t.success()).count() as f64;
    let bits = transcripts.iter().map(|t| t.message_bits as f64).sum::<f64>();
    Ok(ProtocolRun { success_rate: hits / count, mean_message_bits: bits / count, d: config.d(), transcripts })
}

/// The analytic chain bounding the discretization shadow and the noise-ball
/// overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticalDistanceCertificate {
    /// `log₂(k·D^{2 log n})`, a strict upper bound on `log₂||w||₁`.
    pub w_l1_bound_log2: f64,
    /// `n²·2^{-b}·k·D^{2 log n}`.
    pub s_l1_bound: f64,
    /// `k/n²`.
    pub s_l1_target: f64,
    /// `(1 - 1/n²)^n`.
    pub overlap: f64,
    /// `1 - 1/n`.
    pub overlap_target: f64,
    /// `k·D^{1+j}/(D-1) ≤ k·D^{2 log n}` for every `j ≤ log n`.
    pub geometric_step_holds: bool,
}

impl StatisticalDistanceCertificate {
    pub fn s_bound_holds(&self) -> bool {
        self.s_l1_bound < self.s_l1_target
    }

    pub fn overlap_holds(&self) -> bool {
        self.overlap > self.overlap_target
    }

    pub fn holds(&self) -> bool {
        self.s_bound_holds() && self.overlap_holds() && self.geometric_step_holds
    }
}

/// `(1 - 1/n²)^n > 1 - 1/n`, compared in the log domain.
pub fn overlap_exceeds(n: usize) -> bool {
    let nf = n as f64;
    nf * (-1.0 / (nf * nf)).ln_1p() > (-1.0 / nf).ln_1p()
}

pub fn statistical_distance_certificate(
    n: usize,
    k: usize,
    bits: u32,
    base: u64,
    num_chunks: usize,
) -> Result<StatisticalDistanceCertificate> {
    if n < 2 || k == 0 || base < 2 || num_chunks == 0 {
        return domain("need n ≥ 2, k ≥ 1, D ≥ 2 and at least one chunk");
    }
    let (nf, kf, df, lf) = (n as f64, k as f64, base as f64, num_chunks as f64);
    let w_log2 = kf.log2() + 2.0 * lf * df.log2();
    let s_log2 = 2.0 * nf.log2() - f64::from(bits) + w_log2;
    let geometric_step_holds =
        (0..=num_chunks).all(|j| kf.log2() + (1.0 + j as f64) * df.log2() - (df - 1.0).log2() <= w_log2);
    Ok(StatisticalDistanceCertificate {
        w_l1_bound_log2: w_log2,
        s_l1_bound: s_log2.exp2(),
        s_l1_target: kf / (nf * nf),
        overlap: (nf * (-1.0 / (nf * nf)).ln_1p()).exp(),
        overlap_target: 1.0 - 1.0 / nf,
        geometric_step_holds: geometric_step_holds && overlap_exceeds(n),
    })
}
