//! Proportion of true nulls (π0) and q-values over a batch of p-values.

use crate::error::{Error, Result};

/// Default tuning parameter for the fixed-λ π0 estimator.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Batches smaller than this use π0 = 1 in [`fdr`].
pub const MIN_PVALUES_FOR_PI0: usize = 10;

/// How π0 is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pi0Method {
    /// `#{p > λ} / ((1 - λ) n)` at a single λ.
    Fixed(f64),
    /// Cubic smoothing spline (3 degrees of freedom) through the fixed-λ
    /// estimates on λ = 0.05, 0.10, ..., 0.95, read off at λ = 0.95.
    Smoother,
    /// No adjustment (Benjamini-Hochberg).
    One,
}

impl Default for Pi0Method {
    fn default() -> Self {
        Pi0Method::Fixed(DEFAULT_LAMBDA)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrResult {
    pub pi0: f64,
    /// Aligned with the input order.
    pub q_values: Vec<f64>,
    pub method: Pi0Method,
}

fn validate(pvalues: &[f64]) -> Result<()> {
    if pvalues.is_empty() {
        return Err(Error::EmptyInput("no p-values"));
    }
    match pvalues.iter().position(|p| !(0.0..=1.0).contains(p)) {
        Some(i) => Err(Error::InvalidConfig(format!(
            "p-value {} at position {i} is outside [0, 1]",
            pvalues[i]
        ))),
        None => Ok(()),
    }
}

fn pi0_at(pvalues: &[f64], lambda: f64) -> f64 {
    let above = pvalues.iter().filter(|&&p| p > lambda).count();
    above as f64 / ((1.0 - lambda) * pvalues.len() as f64)
}

/// Fixed-λ π0 estimate, clamped to `[1/n, 1]`.
pub fn estimate_pi0(pvalues: &[f64], lambda: f64) -> Result<f64> {
    validate(pvalues)?;
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    Ok(clamp_pi0(pi0_at(pvalues, lambda), pvalues.len()))
}

fn clamp_pi0(pi0: f64, n: usize) -> f64 {
    pi0.clamp(1.0 / n as f64, 1.0)
}

/// Smoothed π0 estimate (see [`Pi0Method::Smoother`]).
pub fn estimate_pi0_smoothed(pvalues: &[f64]) -> Result<f64> {
    validate(pvalues)?;
    let lambdas: Vec<f64> = (1..=19).map(|k| k as f64 * 0.05).collect();
    let raw: Vec<f64> = lambdas.iter().map(|&l| pi0_at(pvalues, l)).collect();
    let fitted = smoothing_spline(&lambdas, &raw, 3.0);
    Ok(clamp_pi0(*fitted.last().unwrap(), pvalues.len()))
}

/// Step-up q-values: `q_(i) = min_{j >= i} pi0 n p_(j) / j`, capped at 1.
pub fn q_values(pvalues: &[f64], pi0: f64) -> Result<Vec<f64>> {
    validate(pvalues)?;
    if !(pi0 > 0.0 && pi0 <= 1.0) {
        return Err(Error::InvalidConfig(format!("pi0 must lie in (0, 1], got {pi0}")));
    }
    let n = pvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));

    let mut q = vec![0.0; n];
    let mut running = f64::INFINITY;
    for (rank, &idx) in order.iter().enumerate().rev() {
        let candidate = pi0 * n as f64 * pvalues[idx] / (rank + 1) as f64;
        running = running.min(candidate);
        q[idx] = running.min(1.0);
    }
    Ok(q)
}

/// π0 and q-values in one call. Batches with fewer than
/// [`MIN_PVALUES_FOR_PI0`] p-values fall back to π0 = 1.
pub fn fdr(pvalues: &[f64], method: Pi0Method) -> Result<FdrResult> {
    validate(pvalues)?;
    let pi0 = if pvalues.len() < MIN_PVALUES_FOR_PI0 {
        1.0
    } else {
        match method {
            Pi0Method::Fixed(lambda) => estimate_pi0(pvalues, lambda)?,
            Pi0Method::Smoother => estimate_pi0_smoothed(pvalues)?,
            Pi0Method::One => 1.0,
        }
    };
    Ok(FdrResult {
        pi0,
        q_values: q_values(pvalues, pi0)?,
        method,
    })
}

/// Observed false discovery proportion among tests with `q <= threshold`.
/// `is_alternative[k]` marks true alternatives. Zero when nothing is called.
pub fn false_discovery_proportion(q_values: &[f64], is_alternative: &[bool], threshold: f64) -> f64 {
    let (mut called, mut false_calls) = (0usize, 0usize);
    for (&q, &alt) in q_values.iter().zip(is_alternative) {
        if q <= threshold {
            called += 1;
            if !alt {
                false_calls += 1;
            }
        }
    }
    if called == 0 {
        0.0
    } else {
        false_calls as f64 / called as f64
    }
}

/// Natural cubic smoothing spline through `(x, y)` with the smoothing
/// parameter chosen so the hat matrix has trace `df`. Returns fitted values
/// at `x`. `x` must be strictly increasing with at least three points.
fn smoothing_spline(x: &[f64], y: &[f64], df: f64) -> Vec<f64> {
    let n = x.len();
    debug_assert!(n >= 3 && df > 2.0 && df < n as f64);
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();

    // Reinsch matrices: Q is n x (n-2), R is (n-2) x (n-2) tridiagonal.
    let k = n - 2;
    let mut q = vec![vec![0.0; k]; n];
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        q[j][j] = 1.0 / h[j];
        q[j + 1][j] = -1.0 / h[j] - 1.0 / h[j + 1];
        q[j + 2][j] = 1.0 / h[j + 1];
        r[j][j] = (h[j] + h[j + 1]) / 3.0;
        if j + 1 < k {
            r[j][j + 1] = h[j + 1] / 6.0;
            r[j + 1][j] = h[j + 1] / 6.0;
        }
    }
    // K = Q R^-1 Q^T
    let qt: Vec<Vec<f64>> = (0..k).map(|j| (0..n).map(|i| q[i][j]).collect()).collect();
    let rinv_qt = solve(r, qt);
    let penalty: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|l| (0..k).map(|j| q[i][j] * rinv_qt[j][l]).sum()).collect())
        .collect();

    let hat = |alpha: f64| -> Vec<Vec<f64>> {
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|l| alpha * penalty[i][l] + if i == l { 1.0 } else { 0.0 }).collect())
            .collect();
        let identity = (0..n).map(|i| (0..n).map(|l| if i == l { 1.0 } else { 0.0 }).collect()).collect();
        solve(a, identity)
    };
    let trace = |s: &[Vec<f64>]| (0..n).map(|i| s[i][i]).sum::<f64>();

    // df decreases monotonically in log(alpha).
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if trace(&hat(mid.exp())) > df {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = hat((0.5 * (lo + hi)).exp());
    (0..n).map(|i| (0..n).map(|l| s[i][l] * y[l]).sum()).collect()
}

/// Solves `a X = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            for c in 0..b[row].len() {
                b[row][c] -= f * b[col][c];
            }
        }
    }
    for col in (0..n).rev() {
        for c in 0..b[col].len() {
            let s: f64 = (col + 1..n).map(|j| a[col][j] * b[j][c]).sum();
            b[col][c] = (b[col][c] - s) / a[col][col];
        }
    }
    b
}
