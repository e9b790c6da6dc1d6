//! Uniform sampling from the ℓ1 ball and its coordinate tail laws.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{domain, Result};
use crate::harness::seed::{derive_rng, stream};

/// The solid ℓ1 ball `{v ∈ R^n : ||v||₁ ≤ s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Ball {
    n: usize,
    radius: f64,
}

impl L1Ball {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return domain("ball dimension must be at least 1");
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("ball radius {radius} must be positive and finite"));
        }
        Ok(Self { n, radius })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Draws a point uniformly from the ball.
    ///
    /// With `e_1..e_{n+1}` i.i.d. Exp(1) and independent signs `σ_i`, the
    /// vector `s·σ_i·e_i / Σ_{j≤n+1} e_j` is uniform on the solid ball: the
    /// normalized exponentials are uniform on the `n`-simplex and the extra
    /// coordinate absorbs the slack `s - ||z||₁`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut z: Vec<f64> = (0..self.n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let slack: f64 = rng.sample(Exp1);
        let total = z.iter().sum::<f64>() + slack;
        let scale = self.radius / total;
        for zi in z.iter_mut() {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            *zi *= sign * scale;
        }
        z
    }

    /// `Pr[|z_i| > t] = (1 - t/s)^n` for any single coordinate.
    pub fn coord_tail_probability(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.radius).contains(&t) {
            return domain(format!("threshold {t} outside [0, {}]", self.radius));
        }
        Ok((1.0 - t / self.radius).powi(self.n as i32))
    }

    /// CDF of `|z_i|`: `1 - (1 - t/s)^n`.
    pub fn coord_abs_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= self.radius {
            1.0
        } else {
            1.0 - (1.0 - t / self.radius).powi(self.n as i32)
        }
    }
}

pub fn sample_l1_ball<R: Rng + ?Sized>(ball: &L1Ball, rng: &mut R) -> Vec<f64> {
    ball.sample(rng)
}

pub fn coord_tail_probability(ball: &L1Ball, t: f64) -> Result<f64> {
    ball.coord_tail_probability(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l0: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn norms(v: &[f64]) -> Norms {
    Norms {
        l0: v.iter().filter(|x| **x != 0.0).count(),
        l1: l1_norm(v),
        l2: l2_norm(v),
        linf: v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Outcome of an empirical-rate-versus-bound comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub exceedances: u64,
    pub trials: u64,
    pub empirical: f64,
    pub bound: f64,
}

impl TailCheck {
    pub fn new(exceedances: u64, trials: u64, bound: f64) -> Self {
        Self { exceedances, trials, empirical: exceedances as f64 / trials as f64, bound }
    }

    /// `empirical ≤ bound + 3σ`, with σ the binomial deviation at the bound.
    pub fn holds(&self) -> bool {
        self.empirical <= self.bound + three_sigma(self.bound, self.trials)
    }
}

/// Three binomial standard deviations of a rate estimate at probability `p`.
pub fn three_sigma(p: f64, trials: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Empirical `Pr[|z_coord| > t]` under the sampler, against the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordTailCheck {
    pub observed: f64,
    pub expected: f64,
    pub samples: u64,
}

impl CoordTailCheck {
    pub fn tolerance(&self) -> f64 {
        three_sigma(self.expected, self.samples)
    }

    pub fn holds(&self) -> bool {
        (self.observed - self.expected).abs() <= self.tolerance()
    }
}

pub fn coord_tail_check(ball: &L1Ball, t: f64, coord: usize, samples: u64, seed: u64) -> Result<CoordTailCheck> {
    if coord >= ball.dim() || samples == 0 {
        return domain(format!("need coord < {} and samples > 0", ball.dim()));
    }
    let expected = ball.coord_tail_probability(t)?;
    let mut rng = derive_rng(seed, 0, stream::NOISE);
    let hits = (0..samples).filter(|_| ball.sample(&mut rng)[coord].abs() > t).count();
    Ok(CoordTailCheck { observed: hits as f64 / samples as f64, expected, samples })
}

/// Empirical frequency of `||z||₂ > α·s·ln(n)/√n` for `z` uniform on `B₁(s)`,
/// against the bound `1/n^{α-1}`.
pub fn l2_tail_bound_check(n: usize, s: f64, alpha: f64, trials: u64, seed: u64) -> Result<TailCheck> {
    if trials == 0 {
        return domain("trials must be positive");
    }
    if n < 2 {
        return domain("dimension must be at least 2");
    }
    if !(alpha > 1.0) {
        return domain(format!("alpha = {alpha} must exceed 1"));
    }
    let ball = L1Ball::new(n, s)?;
    let nf = n as f64;
    let threshold = alpha * s * nf.ln() / nf.sqrt();
    let mut rng = derive_rng(seed, 0, stream::NOISE);
    let exceed = (0..trials).filter(|_| l2_norm(&ball.sample(&mut rng)) > threshold).count() as u64;
    Ok(TailCheck::new(exceed, trials, nf.powf(1.0 - alpha)))
}
