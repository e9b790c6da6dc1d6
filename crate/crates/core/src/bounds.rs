//! Closed-form row-count lower bounds for deterministic ℓ1/ℓ1 recovery.
//!
//! All logarithms here are base 2 and results are left as reals.

use crate::codes::q_ary_entropy;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetBoundParams {
    pub n: usize,
    pub k: usize,
    /// Approximation factor `C ≥ 1`.
    pub c: f64,
}

impl DetBoundParams {
    pub fn new(n: usize, k: usize, c: f64) -> Result<Self> {
        if k == 0 || k > n {
            return domain(format!("need 1 ≤ k ≤ n (k = {k}, n = {n})"));
        }
        if !(c >= 1.0 && c.is_finite()) {
            return domain(format!("approximation factor C = {c} must be finite and at least 1"));
        }
        Ok(Self { n, k, c })
    }

    /// Alphabet size `⌊n/k⌋` of the underlying code.
    pub fn q(&self) -> usize {
        self.n / self.k
    }

    /// Noise-ball scale `γ = 1/(3+2C)`.
    pub fn gamma(&self) -> f64 {
        1.0 / (3.0 + 2.0 * self.c)
    }
}

/// `(1 - H_q(1/2)) / log(4+2C) · k·log q` with `q = ⌊n/k⌋ ≥ 3`.
pub fn det_lower_bound(params: &DetBoundParams) -> Result<f64> {
    let q = params.q();
    if q < 3 {
        return domain(format!("⌊n/k⌋ = {q} must be at least 3 for H_q(1/2) to be defined"));
    }
    let h = q_ary_entropy(q as u32, 0.5)?;
    Ok((1.0 - h) / (4.0 + 2.0 * params.c).log2() * params.k as f64 * (q as f64).log2())
}

/// Whether `|Y| > (1 + 1/ε)^m`, i.e. whether the volume argument forces two
/// perturbed codewords to share a sketch.
pub fn pigeonhole_count(codebook_size: f64, eps: f64, m: u32) -> Result<bool> {
    if !(eps > 0.0) {
        return domain(format!("eps = {eps} must be positive"));
    }
    let base = 1.0 + 1.0 / eps;
    let capacity = match i32::try_from(m) {
        Ok(m) => base.powi(m),
        Err(_) => f64::INFINITY,
    };
    Ok(codebook_size > capacity)
}

/// `log|Y| / log(1 + 1/ε)`: the count premise fails for every `m` at or
/// above this value.
pub fn pigeonhole_threshold(codebook_size: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return domain(format!("eps = {eps} must be positive"));
    }
    Ok(codebook_size.log2() / (1.0 + 1.0 / eps).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn n1024_k1_c1() {
        let p = DetBoundParams::new(1024, 1, 1.0).unwrap();
        // 40-digit reference: 1.547683877043173307893...
        assert_relative_eq!(det_lower_bound(&p).unwrap(), 1.547_683_877_043_173_3, epsilon = 1e-12);
        assert_relative_eq!(p.gamma(), 0.2);
    }

    #[test]
    fn linear_in_k_at_fixed_ratio() {
        let base = det_lower_bound(&DetBoundParams::new(64, 4, 2.0).unwrap()).unwrap();
        for mult in [2usize, 3, 8] {
            let scaled = det_lower_bound(&DetBoundParams::new(64 * mult, 4 * mult, 2.0).unwrap()).unwrap();
            assert_relative_eq!(scaled, mult as f64 * base, max_relative = 1e-12);
        }
    }

    #[test]
    fn vanishes_as_c_grows() {
        let p = DetBoundParams::new(1024, 1, 1e300).unwrap();
        assert!(det_lower_bound(&p).unwrap() < 0.01);
    }

    #[test]
    fn domain_errors() {
        assert!(DetBoundParams::new(4, 0, 1.0).is_err());
        assert!(DetBoundParams::new(4, 5, 1.0).is_err());
        assert!(DetBoundParams::new(4, 1, 0.5).is_err());
        assert!(det_lower_bound(&DetBoundParams::new(8, 4, 1.0).unwrap()).is_err());
    }

    #[test]
    fn pigeonhole_examples() {
        for m in 0..20 {
            assert!(!pigeonhole_count(1.0, 0.3, m).unwrap());
        }
        assert!(pigeonhole_count(9.0, 1.0, 3).unwrap());
        assert!(!pigeonhole_count(8.0, 1.0, 3).unwrap());
        assert!(pigeonhole_count(1.0, 0.0, 3).is_err());
        assert!(!pigeonhole_count(1e300, 0.5, u32::MAX).unwrap());
    }

    #[test]
    fn threshold_for_gv_16_4_codebook() {
        // γ = 1/5 for C = 1, so 1 + 1/γ = 6
        let gamma = DetBoundParams::new(64, 4, 1.0).unwrap().gamma();
        let t = pigeonhole_threshold(4096.0, gamma).unwrap();
        assert_relative_eq!(t, 12.0 / 6f64.log2(), max_relative = 1e-14);
        let m_star = t.ceil() as u32;
        assert_eq!(m_star, 5);
        assert!(pigeonhole_count(4096.0, gamma, m_star - 1).unwrap());
        assert!(!pigeonhole_count(4096.0, gamma, m_star).unwrap());
    }
}
