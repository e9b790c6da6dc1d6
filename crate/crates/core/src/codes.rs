//! Constant-weight binary codebooks from greedy q-ary codes.
//!
//! A q-ary code of block length `k` and minimum distance `d` is built greedily
//! and then expanded symbol by symbol into indicator blocks of length `q`,
//! giving binary words of length `n = q·k` with exactly `k` ones and minimum
//! Hamming distance `2d`.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{check_len, domain, Error, Result};
use crate::harness::seed::{derive_rng, stream};

/// Largest candidate space enumerated lexicographically.
pub const LEXICOGRAPHIC_LIMIT: u64 = 1 << 24;
pub const DEFAULT_REJECTION_BUDGET: u64 = 1_000_000;
/// Cap on accepted words for the random fallback.
pub const DEFAULT_MAX_RANDOM_WORDS: usize = 1 << 20;

const INTEGRALITY_TOL: f64 = 1e-9;

/// `H_q(x) = -x log_q(x/(q-1)) - (1-x) log_q(1-x)` on `0 < x ≤ 1 - 1/q`.
pub fn q_ary_entropy(q: u32, x: f64) -> Result<f64> {
    if q < 2 {
        return domain(format!("alphabet size q = {q} must be at least 2"));
    }
    let qf = f64::from(q);
    if !(x > 0.0 && x <= 1.0 - 1.0 / qf) {
        return domain(format!("entropy argument {x} outside (0, {}]", 1.0 - 1.0 / qf));
    }
    let ln_q = qf.ln();
    Ok((-x * (x / (qf - 1.0)).ln() - (1.0 - x) * (1.0 - x).ln()) / ln_q)
}

/// `Σ_{i=0}^{radius} C(k,i) (q-1)^i`, the size of a q-ary Hamming ball, exactly.
pub fn hamming_ball_volume(q: u32, k: usize, radius: usize) -> Result<u128> {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut power: u128 = 1;
    for i in 0..=radius.min(k) {
        if i > 0 {
            binom =
                binom.checked_mul((k - i + 1) as u128).ok_or(Error::Overflow("computing a binomial coefficient"))?
                    / i as u128;
            power = power.checked_mul(u128::from(q - 1)).ok_or(Error::Overflow("computing (q-1)^i"))?;
        }
        let term = binom.checked_mul(power).ok_or(Error::Overflow("computing a ball term"))?;
        total = total.checked_add(term).ok_or(Error::Overflow("summing ball volume"))?;
    }
    Ok(total)
}

/// The greedy guarantee `q^k / V_q(k, d-1)`, as a real.
pub fn gv_size_bound(q: u32, k: usize, min_dist: usize) -> Result<f64> {
    if min_dist == 0 {
        return domain("minimum distance must be positive");
    }
    let ball = hamming_ball_volume(q, k, min_dist - 1)? as f64;
    Ok((k as f64 * f64::from(q).log2() - ball.log2()).exp2())
}

/// Checks `Σ_{i=0}^{εk} C(k,i)(q-1)^i < q^{H_q(ε)k}`.
///
/// The left side is summed exactly in integers; the comparison is made in the
/// log domain.
pub fn entropy_claim_check(q: u32, k: usize, eps: f64) -> Result<bool> {
    let radius = integral_radius(q, k, eps)?;
    let lhs = hamming_ball_volume(q, k, radius)?;
    let h = q_ary_entropy(q, eps)?;
    Ok((lhs as f64).ln() < h * k as f64 * f64::from(q).ln())
}

fn integral_radius(q: u32, k: usize, eps: f64) -> Result<usize> {
    if q < 2 {
        return domain(format!("alphabet size q = {q} must be at least 2"));
    }
    if k == 0 {
        return domain("block length k must be at least 1");
    }
    let limit = 1.0 - 1.0 / f64::from(q);
    if !(eps > 0.0 && eps < limit) {
        return domain(format!("eps = {eps} outside (0, {limit})"));
    }
    let t = eps * k as f64;
    if (t - t.round()).abs() > INTEGRALITY_TOL {
        return domain(format!("eps·k = {t} is not an integer"));
    }
    Ok(t.round() as usize)
}

pub fn hamming_distance<T: PartialEq>(a: &[T], b: &[T]) -> Result<usize> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

fn symbol_distance(a: &[u16], b: &[u16]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// How the greedy construction walks the candidate space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOrder {
    /// Lexicographic when `q^k ≤ 2^24`, random otherwise.
    Auto,
    Lexicographic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyOptions {
    pub order: CandidateOrder,
    pub seed: u64,
    /// Random mode stops after this many rejected candidates.
    pub rejection_budget: u64,
    pub max_random_words: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            order: CandidateOrder::Auto,
            seed: 0,
            rejection_budget: DEFAULT_REJECTION_BUDGET,
            max_random_words: DEFAULT_MAX_RANDOM_WORDS,
        }
    }
}

/// A code over `{0..q-1}` with block length `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaryCode {
    q: u32,
    k: usize,
    min_dist: usize,
    symbols: Vec<u16>,
}

impl QaryCode {
    /// Greedy construction at minimum distance `min_dist`: walk candidates and
    /// keep each one at distance `≥ min_dist` from everything kept so far.
    pub fn greedy(q: u32, k: usize, min_dist: usize, options: &GreedyOptions) -> Result<Self> {
        if !(2..=u32::from(u16::MAX) + 1).contains(&q) {
            return domain(format!("alphabet size q = {q} must be in [2, 65536]"));
        }
        if k == 0 {
            return domain("block length k must be at least 1");
        }
        if min_dist == 0 || min_dist > k {
            return domain(format!("minimum distance {min_dist} must be in [1, {k}]"));
        }
        let space = space_size(q, k);
        let lexicographic = match options.order {
            CandidateOrder::Lexicographic => {
                if space.is_none_or(|s| s > LEXICOGRAPHIC_LIMIT) {
                    return domain(format!("q^k exceeds the lexicographic limit 2^24 (q = {q}, k = {k})"));
                }
                true
            }
            CandidateOrder::Random => false,
            CandidateOrder::Auto => space.is_some_and(|s| s <= LEXICOGRAPHIC_LIMIT),
        };
        let symbols = if lexicographic {
            greedy_lexicographic(q, k, min_dist, space.unwrap())
        } else {
            greedy_random(q, k, min_dist, options)?
        };
        Ok(Self { q, k, min_dist, symbols })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn min_dist(&self) -> usize {
        self.min_dist
    }

    pub fn len(&self) -> usize {
        self.symbols.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn word(&self, index: usize) -> &[u16] {
        &self.symbols[index * self.k..(index + 1) * self.k]
    }

    pub fn words(&self) -> impl ExactSizeIterator<Item = &[u16]> + '_ {
        self.symbols.chunks_exact(self.k)
    }

    /// Exhaustive all-pairs minimum distance; `None` for fewer than two words.
    pub fn min_pairwise_distance(&self) -> Option<usize> {
        let words: Vec<&[u16]> = self.words().collect();
        let mut best: Option<usize> = None;
        for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                let d = symbol_distance(a, b);
                best = Some(best.map_or(d, |cur| cur.min(d)));
            }
        }
        best
    }

    pub fn log2_size(&self) -> f64 {
        (self.len() as f64).log2()
    }

    /// Whether the size reaches `q^k / V_q(k, d-1)`.
    pub fn meets_gv_bound(&self) -> bool {
        gv_size_bound(self.q, self.k, self.min_dist).is_ok_and(|b| self.len() as f64 >= b)
    }
}

/// Greedy code at distance `eps·k`, which must be integral.
pub fn gv_construct(q: u32, k: usize, eps: f64) -> Result<QaryCode> {
    gv_construct_with(q, k, eps, &GreedyOptions::default())
}

pub fn gv_construct_with(q: u32, k: usize, eps: f64, options: &GreedyOptions) -> Result<QaryCode> {
    let radius = integral_radius(q, k, eps)?;
    QaryCode::greedy(q, k, radius, options)
}

fn space_size(q: u32, k: usize) -> Option<u64> {
    u64::from(q).checked_pow(u32::try_from(k).ok()?)
}

/// Calls `f` on the lexicographic index of every word within `radius` of
/// `word` (including `word` itself).
fn for_each_in_ball(word: &[u16], q: u32, radius: usize, f: &mut impl FnMut(u64)) {
    let k = word.len();
    let q64 = u64::from(q);
    // place values, most significant first
    let mut place = vec![1u64; k];
    for b in (0..k.saturating_sub(1)).rev() {
        place[b] = place[b + 1] * q64;
    }
    let base: u64 = word.iter().zip(&place).map(|(&c, &p)| u64::from(c) * p).sum();

    fn recurse(
        word: &[u16],
        place: &[u64],
        q: u32,
        start: usize,
        remaining: usize,
        index: u64,
        f: &mut impl FnMut(u64),
    ) {
        f(index);
        if remaining == 0 {
            return;
        }
        for pos in start..word.len() {
            let orig = u64::from(word[pos]);
            for c in 0..u64::from(q) {
                if c == orig {
                    continue;
                }
                let shifted = index - orig * place[pos] + c * place[pos];
                recurse(word, place, q, pos + 1, remaining - 1, shifted, f);
            }
        }
    }
    recurse(word, &place, q, 0, radius, base, f);
}

fn decode_index(mut index: u64, q: u32, k: usize, out: &mut [u16]) {
    for b in (0..k).rev() {
        out[b] = (index % u64::from(q)) as u16;
        index /= u64::from(q);
    }
}

fn greedy_lexicographic(q: u32, k: usize, min_dist: usize, space: u64) -> Vec<u16> {
    let mut covered = vec![false; space as usize];
    let mut symbols = Vec::new();
    let mut word = vec![0u16; k];
    for index in 0..space {
        if covered[index as usize] {
            continue;
        }
        decode_index(index, q, k, &mut word);
        symbols.extend_from_slice(&word);
        for_each_in_ball(&word, q, min_dist - 1, &mut |i| covered[i as usize] = true);
    }
    symbols
}

fn greedy_random(q: u32, k: usize, min_dist: usize, options: &GreedyOptions) -> Result<Vec<u16>> {
    let ball = hamming_ball_volume(q, k, min_dist - 1).unwrap_or(u128::MAX);
    // ball enumeration needs word indices to fit in u64
    let indexable = space_size(q, k).is_some();
    let mut rng = derive_rng(options.seed, 0, stream::CODEBOOK);
    let mut symbols: Vec<u16> = Vec::new();
    let mut accepted: HashSet<u64> = HashSet::new();
    let mut candidate = vec![0u16; k];
    let mut rejections = 0u64;
    while rejections < options.rejection_budget && symbols.len() / k < options.max_random_words {
        for c in candidate.iter_mut() {
            *c = rng.random_range(0..q) as u16;
        }
        let count = symbols.len() / k;
        let far = if indexable && ball <= count as u128 {
            let mut hit = false;
            for_each_in_ball(&candidate, q, min_dist - 1, &mut |i| hit |= accepted.contains(&i));
            !hit
        } else {
            symbols.chunks_exact(k).all(|w| symbol_distance(w, &candidate) >= min_dist)
        };
        if far {
            symbols.extend_from_slice(&candidate);
            if indexable {
                accepted.insert(lex_index(&candidate, q));
            }
        } else {
            rejections += 1;
        }
    }
    Ok(symbols)
}

fn lex_index(word: &[u16], q: u32) -> u64 {
    word.iter().fold(0u64, |acc, &c| acc * u64::from(q) + u64::from(c))
}

/// Binary codebook whose words each carry exactly `k` ones.
///
/// Words are stored as sorted support lists; dense 0/1 views are produced on
/// demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseCodebook {
    n: usize,
    k: usize,
    min_dist: usize,
    supports: Vec<u32>,
}

/// Replaces every symbol `c` of block `b` by the indicator of position
/// `b·q + c`. Distances double; size is preserved.
pub fn expand_to_binary(code: &QaryCode) -> SparseCodebook {
    let q = code.q as usize;
    let supports =
        code.words().flat_map(|w| w.iter().enumerate().map(move |(b, &c)| (b * q + usize::from(c)) as u32)).collect();
    SparseCodebook { n: q * code.k, k: code.k, min_dist: 2 * code.min_dist, supports }
}

impl SparseCodebook {
    /// Wraps explicit support lists. Each must hold `k` strictly increasing
    /// positions below `n`. The declared `min_dist` is not checked here; see
    /// [`SparseCodebook::verify_min_distance`].
    pub fn from_supports(n: usize, k: usize, min_dist: usize, supports: Vec<Vec<u32>>) -> Result<Self> {
        if k == 0 || k > n {
            return domain(format!("sparsity k = {k} must be in [1, n = {n}]"));
        }
        let mut flat = Vec::with_capacity(supports.len() * k);
        for (i, s) in supports.iter().enumerate() {
            if s.len() != k {
                return domain(format!("word {i} has weight {} instead of {k}", s.len()));
            }
            if s.windows(2).any(|w| w[0] >= w[1]) || s.iter().any(|&p| p as usize >= n) {
                return domain(format!("word {i} support is not sorted within [0, {n})"));
            }
            flat.extend_from_slice(s);
        }
        Ok(Self { n, k, min_dist, supports: flat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn min_dist(&self) -> usize {
        self.min_dist
    }

    pub fn len(&self) -> usize {
        self.supports.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn support(&self, index: usize) -> &[u32] {
        &self.supports[index * self.k..(index + 1) * self.k]
    }

    pub fn supports(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.supports.chunks_exact(self.k)
    }

    pub fn dense(&self, index: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.n];
        for &p in self.support(index) {
            v[p as usize] = 1;
        }
        v
    }

    pub fn dense_f64(&self, index: usize) -> Vec<f64> {
        self.dense(index).into_iter().map(f64::from).collect()
    }

    /// Hamming distance between words `a` and `b`: `2(k - |overlap|)`.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (sa, sb) = (self.support(a), self.support(b));
        let (mut i, mut j, mut common) = (0, 0, 0);
        while i < sa.len() && j < sb.len() {
            match sa[i].cmp(&sb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        2 * (self.k - common)
    }

    pub fn min_pairwise_distance(&self) -> Option<usize> {
        let len = self.len();
        let mut best: Option<usize> = None;
        for a in 0..len {
            for b in a + 1..len {
                let d = self.distance(a, b);
                best = Some(best.map_or(d, |cur| cur.min(d)));
            }
        }
        best
    }

    pub fn verify_min_distance(&self) -> bool {
        self.min_pairwise_distance().is_none_or(|d| d >= self.min_dist)
    }

    /// Text form: a `n k min_dist count` header, then one 0/1 string per word.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.n + 1) + 32);
        let _ = writeln!(out, "{} {} {} {}", self.n, self.k, self.min_dist, self.len());
        for i in 0..self.len() {
            out.extend(self.dense(i).iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: 1, msg: format!("bad header: {e}") })?;
        let [n, k, min_dist, count] = fields[..] else {
            return Err(Error::Parse { line: 1, msg: "header needs `n k min_dist count`".into() });
        };
        let mut supports = Vec::with_capacity(count);
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            if line.len() != n {
                return Err(Error::Parse { line: lineno, msg: format!("word length {} != {n}", line.len()) });
            }
            let mut support = Vec::with_capacity(k);
            for (pos, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => support.push(pos as u32),
                    other => return Err(Error::Parse { line: lineno, msg: format!("unexpected character {other:?}") }),
                }
            }
            supports.push(support);
        }
        if supports.len() != count {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {count} words, found {}", supports.len()),
            });
        }
        Self::from_supports(n, k, min_dist, supports)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binary_entropy_at_half_is_one() {
        assert_abs_diff_eq!(q_ary_entropy(2, 0.5).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_q16_half_matches_reference() {
        // high-precision reference: 0.73836132445106481616...
        assert_abs_diff_eq!(q_ary_entropy(16, 0.5).unwrap(), 0.738_361_324_451_064_8, epsilon = 1e-14);
    }

    #[test]
    fn entropy_vanishes_at_zero() {
        assert!(q_ary_entropy(4, 1e-12).unwrap() < 1e-9);
    }

    #[test]
    fn entropy_domain_errors() {
        assert!(q_ary_entropy(1, 0.2).is_err());
        assert!(q_ary_entropy(2, 0.0).is_err());
        assert!(q_ary_entropy(2, 0.5).is_ok());
        assert!(q_ary_entropy(2, 0.51).is_err());
        assert_abs_diff_eq!(q_ary_entropy(4, 0.75).unwrap(), 1.0, epsilon = 1e-15);
        assert!(q_ary_entropy(4, 0.76).is_err());
    }

    #[test]
    fn distance_one_singletons() {
        let code = QaryCode::greedy(2, 1, 1, &GreedyOptions::default()).unwrap();
        assert_eq!(code.words().collect::<Vec<_>>(), vec![&[0u16][..], &[1u16][..]]);
    }

    #[test]
    fn gv_q4_k2_keeps_every_word() {
        let code = gv_construct(4, 2, 0.5).unwrap();
        assert_eq!(code.min_dist(), 1);
        assert_eq!(code.len(), 16);
        assert_eq!(code.min_pairwise_distance(), Some(1));
    }

    #[test]
    fn gv_q16_k4_meets_denominator_bound() {
        let code = gv_construct(16, 4, 0.5).unwrap();
        // 65536 / (1 + 4·15) = 1074.36..
        assert!(code.len() >= 1075);
        assert!(code.meets_gv_bound());
        assert_eq!(code.min_pairwise_distance(), Some(2));
    }

    #[test]
    fn non_integral_eps_k_is_rejected() {
        assert!(gv_construct(16, 3, 0.5).is_err());
        assert!(gv_construct(2, 4, 0.5).is_err(), "eps must be below 1 - 1/q");
        assert!(gv_construct(16, 4, 0.0).is_err());
    }

    #[test]
    fn lexicographic_refuses_huge_space() {
        let opts = GreedyOptions { order: CandidateOrder::Lexicographic, ..Default::default() };
        assert!(QaryCode::greedy(64, 5, 2, &opts).is_err());
    }

    #[test]
    fn random_fallback_respects_distance() {
        let opts =
            GreedyOptions { order: CandidateOrder::Random, seed: 9, rejection_budget: 2_000, ..Default::default() };
        let code = QaryCode::greedy(8, 4, 3, &opts).unwrap();
        assert!(code.len() > 10);
        assert!(code.min_pairwise_distance().unwrap() >= 3);
        let again = QaryCode::greedy(8, 4, 3, &opts).unwrap();
        assert_eq!(code, again);
    }

    #[test]
    fn random_fallback_ball_path_matches_scan_semantics() {
        // radius 0 ball: every distinct word is acceptable, exercises the hash path
        let opts =
            GreedyOptions { order: CandidateOrder::Random, seed: 3, rejection_budget: 500, max_random_words: 5_000 };
        let code = QaryCode::greedy(4, 3, 1, &opts).unwrap();
        assert_eq!(code.len(), 64);
    }

    #[test]
    fn expansion_of_01() {
        let code = QaryCode { q: 2, k: 2, min_dist: 1, symbols: vec![0, 1] };
        let bin = expand_to_binary(&code);
        assert_eq!(bin.dense(0), vec![1, 0, 0, 1]);
        assert_eq!(bin.n(), 4);
        assert_eq!(bin.min_dist(), 2);
    }

    #[test]
    fn expansion_doubles_distances() {
        let code = gv_construct(5, 3, 1.0 / 3.0).unwrap();
        let bin = expand_to_binary(&code);
        assert_eq!(bin.len(), code.len());
        for a in 0..code.len().min(40) {
            for b in 0..code.len().min(40) {
                let h = symbol_distance(code.word(a), code.word(b));
                assert_eq!(bin.distance(a, b), 2 * h);
                assert_eq!(hamming_distance(&bin.dense(a), &bin.dense(b)).unwrap(), 2 * h);
            }
        }
    }

    #[test]
    fn expansion_q16_k4_has_weight_four() {
        let bin = expand_to_binary(&gv_construct(16, 4, 0.5).unwrap());
        assert_eq!(bin.n(), 64);
        assert!((0..bin.len()).all(|i| bin.dense(i).iter().filter(|&&b| b == 1).count() == 4));
    }

    #[test]
    fn hamming_distance_cases() {
        assert_eq!(hamming_distance::<u8>(&[0, 0], &[0, 0]).unwrap(), 0);
        assert_eq!(hamming_distance(&[1, 0, 1], &[0, 0, 1]).unwrap(), 1);
        assert_eq!(hamming_distance(&[1, 0, 0], &[0, 1, 0]).unwrap(), 2);
        assert!(hamming_distance::<u8>(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn entropy_claim_examples() {
        // LHS 176 vs 449.7
        assert!(entropy_claim_check(2, 10, 0.3).unwrap());
        // LHS 3739171 vs 12960000
        assert!(entropy_claim_check(16, 8, 0.5).unwrap());
        // LHS 5 vs 9.48
        assert!(entropy_claim_check(2, 4, 0.25).unwrap());
    }

    #[test]
    fn ball_volume_exact() {
        assert_eq!(hamming_ball_volume(16, 4, 1).unwrap(), 61);
        assert_eq!(hamming_ball_volume(8, 8, 3).unwrap(), 20_637);
        assert_eq!(hamming_ball_volume(2, 10, 3).unwrap(), 176);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let bin = expand_to_binary(&gv_construct(4, 2, 0.5).unwrap());
        let text = bin.to_text();
        assert!(text.starts_with("8 2 2 16\n"));
        assert_eq!(SparseCodebook::from_text(&text).unwrap(), bin);

        assert!(SparseCodebook::from_text("").is_err());
        assert!(SparseCodebook::from_text("4 2 2 1\n1100\n1010\n").is_err());
        assert!(SparseCodebook::from_text("4 2 2 1\n1110\n").is_err());
        assert!(SparseCodebook::from_text("4 2 2 1\n11x0\n").is_err());
    }
}
