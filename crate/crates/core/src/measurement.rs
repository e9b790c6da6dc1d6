//! Gaussian measurement matrices, row orthonormalization, sketching and
//! fixed-point discretization.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, domain, Error, Result};
use crate::geometry::{l1_norm, TailCheck};
use crate::harness::seed::{derive_rng, stream};

/// Tolerance on `|AAᵀ - I|` entries for a matrix to count as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
const MAX_BITS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// i.i.d. `N(0,1)` entries scaled by `1/√m`.
    GaussianScaled,
    OrthonormalRows,
    /// Every entry is an integer multiple of `2^-bits`.
    Discretized {
        bits: u32,
    },
    General,
}

/// Dense row-major `m × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    kind: MatrixKind,
}

impl MeasurementMatrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>, kind: MatrixKind) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return domain("matrix dimensions must be positive");
        }
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data, kind })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data, kind: MatrixKind::OrthonormalRows }
    }

    /// `(1/√m)·G` with `G` i.i.d. standard Gaussian.
    pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (rows as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
        Self { rows, cols, data, kind: MatrixKind::GaussianScaled }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// `A·x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ·y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Ok(out)
    }

    /// Column-major copy, convenient for summing a few columns at a time.
    pub fn columns(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `max_{ij} |(AAᵀ - I)_{ij}|`.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.rows {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(self.row(i), self.row(j)) - target).abs());
            }
        }
        worst
    }

    pub fn has_orthonormal_rows(&self) -> bool {
        self.gram_deviation() <= ORTHONORMAL_TOL
    }

    /// Entries scaled by `2^bits`, as exact integers.
    pub fn to_scaled_integers(&self) -> Result<Vec<i128>> {
        let MatrixKind::Discretized { bits } = self.kind else {
            return domain("only discretized matrices have an integer form");
        };
        let scale = 2f64.powi(bits as i32);
        self.data
            .iter()
            .map(|&a| {
                let v = a * scale;
                if v.fract() != 0.0 || v.abs() >= 2f64.powi(126) {
                    Err(Error::Overflow("scaling a discretized entry to an integer"))
                } else {
                    Ok(v as i128)
                }
            })
            .collect()
    }

    pub fn from_scaled_integers(rows: usize, cols: usize, bits: u32, ints: &[i128]) -> Result<Self> {
        check_len(rows * cols, ints.len())?;
        let scale = 2f64.powi(-(bits as i32));
        let data = ints
            .iter()
            .map(|&v| {
                let f = v as f64;
                if f as i128 != v {
                    return Err(Error::Overflow("integer entry not representable as f64"));
                }
                Ok(f * scale)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows, cols, data, MatrixKind::Discretized { bits })
    }

    /// Text form of a discretized matrix: `m n b` header, then one row of
    /// scaled integers per line.
    pub fn to_text(&self) -> Result<String> {
        let MatrixKind::Discretized { bits } = self.kind else {
            return domain("only discretized matrices serialize");
        };
        let ints = self.to_scaled_integers()?;
        let mut out = format!("{} {} {}\n", self.rows, self.cols, bits);
        for row in ints.chunks_exact(self.cols) {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<u64> = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "empty input".into() })?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: 1, msg: format!("bad header: {e}") })?;
        let [rows, cols, bits] = header[..] else {
            return Err(Error::Parse { line: 1, msg: "header needs `m n b`".into() });
        };
        let (rows, cols) = (rows as usize, cols as usize);
        let mut ints = Vec::with_capacity(rows * cols);
        for (idx, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let before = ints.len();
            for tok in line.split_whitespace() {
                ints.push(
                    tok.parse::<i128>()
                        .map_err(|e| Error::Parse { line: idx + 2, msg: format!("bad entry {tok:?}: {e}") })?,
                );
            }
            if ints.len() - before != cols {
                return Err(Error::Parse { line: idx + 2, msg: format!("expected {cols} entries") });
            }
        }
        Self::from_scaled_integers(rows, cols, bits as u32, &ints)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sample_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Result<MeasurementMatrix> {
    if rows == 0 || cols == 0 {
        return domain("matrix dimensions must be positive");
    }
    Ok(MeasurementMatrix::gaussian(rows, cols, &mut derive_rng(seed, 0, stream::MATRIX)))
}

/// Gram-Schmidt on the rows, run twice per row so the result is orthonormal to
/// working precision. The output is `L⁻¹A` for a lower-triangular `L`, so the
/// row span is unchanged.
pub fn orthonormalize_rows(a: &MeasurementMatrix) -> Result<MeasurementMatrix> {
    if a.rows > a.cols {
        return Err(Error::RankDeficient { row: a.cols });
    }
    let n = a.cols;
    let mut out: Vec<f64> = Vec::with_capacity(a.data.len());
    for i in 0..a.rows {
        let mut v = a.row(i).to_vec();
        let original = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for q in out.chunks_exact(n) {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if !(norm > 1e-10 * original.max(f64::MIN_POSITIVE)) || original == 0.0 {
            return Err(Error::RankDeficient { row: i });
        }
        out.extend(v.iter().map(|x| x / norm));
    }
    Ok(MeasurementMatrix { rows: a.rows, cols: n, data: out, kind: MatrixKind::OrthonormalRows })
}

pub fn sketch(a: &MeasurementMatrix, x: &[f64]) -> Result<Vec<f64>> {
    a.apply(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationResult {
    pub rounded: MeasurementMatrix,
    pub bits: u32,
    /// `A'' = A - A'`.
    pub roundoff: MeasurementMatrix,
}

/// Rounds an orthonormal-rows matrix to `bits` fractional bits per entry,
/// half away from zero, so every roundoff entry is at most `2^{-bits-1}`.
pub fn discretize(a: &MeasurementMatrix, bits: u32) -> Result<DiscretizationResult> {
    if bits == 0 || bits > MAX_BITS {
        return domain(format!("bits = {bits} must be in [1, {MAX_BITS}]"));
    }
    let deviation = a.gram_deviation();
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let scale = 2f64.powi(bits as i32);
    let rounded: Vec<f64> = a.data.iter().map(|&x| (x * scale).round() / scale).collect();
    let roundoff: Vec<f64> = a.data.iter().zip(&rounded).map(|(x, r)| x - r).collect();
    Ok(DiscretizationResult {
        rounded: MeasurementMatrix {
            rows: a.rows,
            cols: a.cols,
            data: rounded,
            kind: MatrixKind::Discretized { bits },
        },
        bits,
        roundoff: MeasurementMatrix { rows: a.rows, cols: a.cols, data: roundoff, kind: MatrixKind::General },
    })
}

/// `s = Aᵀ·(A''·v)`, which satisfies `A·s = A''·v` when `AAᵀ = I` and hence
/// `A'v = A(v - s)`.
pub fn shadow_vector(a: &MeasurementMatrix, roundoff: &MeasurementMatrix, v: &[f64]) -> Result<Vec<f64>> {
    check_len(a.rows, roundoff.rows)?;
    check_len(a.cols, roundoff.cols)?;
    a.apply_transpose(&roundoff.apply(v)?)
}

/// Both analytic ℓ1 bounds on the shadow vector: the final `n²2^{-b}||v||₁`
/// and the intermediate `m√n·2^{-b}||v||₁`.
pub fn shadow_l1_bounds(rows: usize, cols: usize, bits: u32, v: &[f64]) -> (f64, f64) {
    let unit = 2f64.powi(-(bits as i32)) * l1_norm(v);
    let n = cols as f64;
    (n * n * unit, rows as f64 * n.sqrt() * unit)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationCheck {
    /// `||Av||₂ ≤ 1/D` against `(3/D)^m`.
    pub shrink: TailCheck,
    /// `||Av||₂ ≥ D` against `e^{-m(D-1)²/8}`.
    pub blowup: TailCheck,
}

impl ConcentrationCheck {
    pub fn holds(&self) -> bool {
        self.shrink.holds() && self.blowup.holds()
    }
}

/// Samples `trials` fresh `m × n` Gaussian matrices and applies each to a
/// fixed unit vector, counting the shrink and blow-up events.
pub fn concentration_check(m: usize, n: usize, factor: f64, trials: u64, seed: u64) -> Result<ConcentrationCheck> {
    if m == 0 || n == 0 || trials == 0 {
        return domain("m, n and trials must be positive");
    }
    if !(factor > 0.0) {
        return domain(format!("factor D = {factor} must be positive"));
    }
    let unit = vec![1.0 / (n as f64).sqrt(); n];
    let (mut shrink, mut blowup) = (0u64, 0u64);
    for trial in 0..trials {
        let a = MeasurementMatrix::gaussian(m, n, &mut derive_rng(seed, trial, stream::MATRIX));
        let norm = a.apply(&unit)?.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1.0 / factor {
            shrink += 1;
        }
        if norm >= factor {
            blowup += 1;
        }
    }
    let mf = m as f64;
    Ok(ConcentrationCheck {
        shrink: TailCheck::new(shrink, trials, (3.0 / factor).powf(mf).min(1.0)),
        blowup: TailCheck::new(blowup, trials, (-mf * (factor - 1.0).powi(2) / 8.0).exp()),
    })
}
