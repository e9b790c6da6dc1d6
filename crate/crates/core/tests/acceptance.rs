//! End-to-end acceptance checks, one printed line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! output; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use l1sketch::codes::{entropy_claim_check, expand_to_binary, gv_construct, q_ary_entropy};
use l1sketch::geometry::{coord_tail_check, l2_tail_bound_check, three_sigma, L1Ball};
use l1sketch::harness::{
    det_bound_monotonicity_sweep, discretization_cases, entropy_claim_sweep, run, ExperimentConfig, Subcommand,
};
use l1sketch::measurement::concentration_check;
use l1sketch::protocol::{
    overlap_exceeds, protocol_bits, run_protocol_trials, statistical_distance_certificate, ProtocolConfig,
};
use l1sketch::recovery::{
    codebook_l2_separation, corollary_noise_radius, uniform_noise_experiment, RecoveryExperimentParams, TopKOracle,
    ZeroOracle, DEFAULT_SAFETY,
};
use l1sketch::{det_lower_bound, DetBoundParams, Result};

const SEED: u64 = 20_240_601;

type Criterion = fn() -> Result<Verdict>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { pass, detail: detail.into() })
}

fn gv_construction() -> Result<Verdict> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for (q, k) in [(16u32, 4usize), (8, 8)] {
        let code = gv_construct(q, k, 0.5)?;
        let binary = expand_to_binary(&code);
        let pairs = code.min_pairwise_distance().is_none_or(|d| d >= code.min_dist()) && binary.verify_min_distance();
        let rhs = (1.0 - q_ary_entropy(q, 0.5)?) * k as f64 * f64::from(q).log2();
        ok &= pairs && code.log2_size() > rhs;
        notes.push(format!("({q},{k}): |Y|={} log2|Y|={:.3} > {rhs:.3}", code.len(), code.log2_size()));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    verdict(ok, format!("{} in {elapsed:.2?}", notes.join("; ")))
}

fn entropy_claim() -> Result<Verdict> {
    let start = Instant::now();
    let (ok, total) = entropy_claim_sweep()?;
    // spot-check one case by hand: (q, k, eps) = (2, 10, 0.3) has LHS 176
    let spot = entropy_claim_check(2, 10, 0.3)?;
    let elapsed = start.elapsed();
    verdict(
        ok == total && total > 0 && spot && elapsed < Duration::from_secs(10),
        format!("{ok}/{total} cases in {elapsed:.2?}"),
    )
}

fn l1_sampler() -> Result<Verdict> {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, s, d, expected) in [(2usize, 1.0, 0.5, 0.25), (64, 1.0, 0.01, 0.99f64.powi(64))] {
        let c = coord_tail_check(&L1Ball::new(n, s)?, d, 0, 100_000, SEED)?;
        ok &= c.holds() && (c.expected - expected).abs() < 1e-15;
        notes.push(format!("n={n}: {:.5} vs {:.5} ± {:.5}", c.observed, c.expected, c.tolerance()));
    }
    verdict(ok, notes.join("; "))
}

fn l2_tail() -> Result<Verdict> {
    let c = l2_tail_bound_check(64, 1.0, 3.0, 100_000, SEED)?;
    let ok = c.holds() && (c.bound - 1.0 / 4096.0).abs() < 1e-18;
    verdict(ok, format!("{} exceedances, rate {:.2e} ≤ {:.2e} + 3σ", c.exceedances, c.empirical, c.bound))
}

fn gaussian_concentration() -> Result<Verdict> {
    let m = 10;
    let shrink = concentration_check(m, 2 * m, 6.0, 10_000, SEED)?.shrink;
    let blowup = concentration_check(m, 2 * m, 3.0, 10_000, SEED)?.blowup;
    let ok = shrink.holds()
        && blowup.holds()
        && (shrink.bound - 0.5f64.powi(10)).abs() < 1e-18
        && (blowup.bound - (-5.0f64).exp()).abs() < 1e-15;
    verdict(
        ok,
        format!(
            "shrink {:.2e} ≤ {:.2e}, blowup {:.2e} ≤ {:.2e}",
            shrink.empirical, shrink.bound, blowup.empirical, blowup.bound
        ),
    )
}

fn uniform_noise_recovery() -> Result<Verdict> {
    let start = Instant::now();
    let codebook = expand_to_binary(&gv_construct(64, 4, 0.5)?);
    let (n, m) = (codebook.n(), 10);
    let r = codebook_l2_separation(&codebook);
    let s = corollary_noise_radius(n, m, codebook.len(), r, DEFAULT_SAFETY);
    let base = RecoveryExperimentParams { codebook: &codebook, m, r, s, trials: 500, seed: SEED };
    let main = uniform_noise_experiment(&base)?;
    let control = uniform_noise_experiment(&RecoveryExperimentParams { s: 100.0 * s, ..base })?;
    let elapsed = start.elapsed();
    let ok = n == 256
        && main.success_rate >= 0.95
        && control.success_rate < main.success_rate
        && elapsed < Duration::from_secs(300);
    verdict(
        ok,
        format!("s={s:.4}: success {:.3}; at 100·s: {:.3}; {elapsed:.2?}", main.success_rate, control.success_rate),
    )
}

fn discretization() -> Result<Verdict> {
    let (m, n, b) = (20, 100, 16);
    let cases = discretization_cases(100, m, n, b, SEED)?;
    let ok = cases.len() == 100 && cases.iter().all(|c| c.residual < 1e-9 && c.shadow_l1 <= c.final_bound);
    let worst = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    let ratio = cases.iter().map(|c| c.shadow_l1 / c.final_bound).fold(0.0, f64::max);
    verdict(ok, format!("max residual {worst:.2e}, max ||s||₁ / bound {ratio:.2e}"))
}

fn protocol() -> Result<Verdict> {
    let config = ProtocolConfig::with_gv_codebook(64, 4, 1.0)?;
    let mut ok = config.base() == 5 && config.bits() == 52 && config.num_chunks() == 6;
    let mut notes = Vec::new();
    // the formula gives b = 52; also run at the rounder b = 60 used in some write-ups
    for bits in [config.bits(), 60] {
        let cfg = config.clone().with_bits(bits);
        let run = run_protocol_trials(&cfg, &TopKOracle { k: 4 }, 64, 200, SEED)?;
        let guaranteed = run.transcripts.iter().filter(|t| t.guarantee_held).count();
        let linear = run.transcripts.iter().all(|t| t.linear_exact);
        ok &= run.success_rate >= 2.0 / 3.0 && run.margin_invariant_holds() && linear && guaranteed > 0;
        let zero = run_protocol_trials(&cfg, &ZeroOracle { k: 4 }, 64, 200, SEED)?;
        ok &= (zero.success_rate - 0.5).abs() <= three_sigma(0.5, 200);
        notes.push(format!(
            "b={bits}: top-k {:.3} (margin ok on {guaranteed} guarantee trials), zero {:.3}",
            run.success_rate, zero.success_rate
        ));
    }
    verdict(ok, notes.join("; "))
}

fn deterministic_bound() -> Result<Verdict> {
    // 40-digit evaluation: 1.547683877043173307893...
    const REFERENCE: f64 = 1.547_683_877_043_173_3;
    let v = det_lower_bound(&DetBoundParams::new(1024, 1, 1.0)?)?;
    let mono = det_bound_monotonicity_sweep()?;
    verdict((v - REFERENCE).abs() < 1e-9 && mono, format!("{v:.12} vs {REFERENCE:.12}; monotone {mono}"))
}

/// `(n² - 1)^n · n > (n - 1) · n^{2n}` in exact integers.
fn overlap_exact(n: u32) -> bool {
    let nb = BigUint::from(n);
    let lhs = (&nb * &nb - 1u32).pow(n) * &nb;
    let rhs = (&nb - 1u32) * nb.pow(2 * n);
    lhs > rhs
}

fn certificate() -> Result<Verdict> {
    let overlap_float = (1..=20).all(|t| overlap_exceeds(1usize << t));
    let overlap_int = (1..=10).all(|t| overlap_exact(1u32 << t));
    let (n, k, d, chunks) = (64usize, 4usize, 5u64, 6usize);
    let bits = protocol_bits(n, d);
    let cert = statistical_distance_certificate(n, k, bits, d, chunks)?;
    // n²·2^{-b}·k·D^{2L} < k/n²  ⇔  n⁴·D^{2L} < 2^b
    let exact = (n as u128).pow(4) * u128::from(d).pow(2 * chunks as u32) < 1u128 << bits;
    verdict(
        overlap_float && overlap_int && cert.holds() && exact,
        format!("overlap t=1..20 ok, b={bits}: ||s||₁ ≤ {:.3e} < {:.3e}", cert.s_l1_bound, cert.s_l1_target),
    )
}

fn reproducibility() -> Result<Verdict> {
    let mut config = ExperimentConfig::new();
    config.set("seed", SEED);
    let mut names = Vec::new();
    for sub in Subcommand::ALL {
        let a = run(sub, &config)?;
        let b = run(sub, &config)?;
        if a.artifact != b.artifact || a.artifact.is_empty() {
            return verdict(false, format!("{} differs between runs", sub.name()));
        }
        names.push(sub.name());
    }
    verdict(true, format!("identical: {}", names.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("greedy code meets the size bound", gv_construction),
        ("entropy claim on the full grid", entropy_claim),
        ("l1-ball coordinate tails", l1_sampler),
        ("l1-ball l2 tail", l2_tail),
        ("Gaussian shrink/blowup rates", gaussian_concentration),
        ("uniform-noise nearest-codeword recovery", uniform_noise_recovery),
        ("discretization shadow bounds", discretization),
        ("Augmented Indexing protocol", protocol),
        ("deterministic bound value and monotonicity", deterministic_bound),
        ("statistical-distance certificate", certificate),
        ("byte-identical reruns", reproducibility),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!("[{}] {:>2}. {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
