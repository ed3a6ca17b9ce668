//! Gaussian approximation: `sqrt(m) * T^c` is asymptotically normal.
//!
//! Two variances are offered. The closed form
//! `q1 q2 (1 - q2) / (q1 + q2)^3` is the default. It does not account for the
//! plug-in expectation moving with the data, and is too small near
//! `p = 0.3..0.5` (anti-conservative) and too large near `p = 0.9`. The
//! plug-in form is the delta-method variance of `T - E(p^_i, p^_j)` itself
//! and matches the exact engine as `m` grows.

use crate::error::{Error, Result};
use crate::model::{
    contingency, expectation, BinaryVector, Centered, Diagnostics, Engine, OccurrenceProbs,
    TestResult,
};
use crate::numeric::two_sided_normal_p;

/// Which limiting variance scales `sqrt(m) * T^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceForm {
    /// `q1 q2 (1 - q2) / (q1 + q2)^3`.
    #[default]
    ClosedForm,
    /// Delta-method variance including the plug-in expectation.
    PlugIn,
}

impl VarianceForm {
    pub fn variance(self, probs: &OccurrenceProbs) -> Result<f64> {
        match self {
            VarianceForm::ClosedForm => asymptotic_variance(probs),
            VarianceForm::PlugIn => plug_in_variance(probs),
        }
    }
}

/// Closed-form limiting variance of `sqrt(m) * T^c` for independent vectors.
pub fn asymptotic_variance(probs: &OccurrenceProbs) -> Result<f64> {
    let (q1, q2) = (probs.q1(), probs.q2());
    let s = q1 + q2;
    if s <= 0.0 {
        return Err(Error::Degenerate("q1 + q2 = 0: both occurrence probabilities are zero"));
    }
    Ok((q1 * q2 * (1.0 - q2) / (s * s * s)).max(0.0))
}

/// Limiting variance of `sqrt(m) * (T - E(p^_i, p^_j))` by the delta method
/// over the four cell proportions.
///
/// With `u = 1 - (1-p_i)(1-p_j)` and cells `(a, b, c, d)`, the gradient of
/// the statistic is `(u - a - p_i^2 - p_j^2, -a - p_j^2, -a - p_i^2, 0) / u^2`.
pub fn plug_in_variance(probs: &OccurrenceProbs) -> Result<f64> {
    let (pi, pj) = (probs.p_i, probs.p_j);
    let cells = probs.cell_probs();
    let u = cells[0] + cells[1] + cells[2];
    if u <= 0.0 {
        return Err(Error::Degenerate("q1 + q2 = 0: both occurrence probabilities are zero"));
    }
    let a = cells[0];
    let grad = [u - a - pi * pi - pj * pj, -a - pj * pj, -a - pi * pi, 0.0].map(|g| g / (u * u));
    let mean: f64 = grad.iter().zip(cells).map(|(g, q)| g * q).sum();
    let second: f64 = grad.iter().zip(cells).map(|(g, q)| g * g * q).sum();
    Ok((second - mean * mean).max(0.0))
}

/// Two-sided asymptotic p-value from a precomputed coefficient.
///
/// Returns the p-value and the z-score (`None` when the variance vanishes).
pub fn asymptotic_from_stats(m: usize, coefficient: f64, probs: &OccurrenceProbs, form: VarianceForm) -> (f64, Option<f64>) {
    // q1 / (q1 + q2), evaluated in the form that is exact at saturated margins
    let expected = expectation(probs);
    let deviation = coefficient - expected;
    let variance = form.variance(probs).unwrap_or(0.0);
    if variance == 0.0 {
        let p = if deviation.abs() <= 1e-12 { 1.0 } else { 0.0 };
        return (p, None);
    }
    let z = (m as f64).sqrt() * deviation / variance.sqrt();
    (two_sided_normal_p(z), Some(z))
}

/// Asymptotic p-value with the closed-form variance.
pub fn asymptotic_pvalue(a: &BinaryVector, b: &BinaryVector) -> Result<TestResult> {
    asymptotic_pvalue_with(a, b, VarianceForm::ClosedForm)
}

pub fn asymptotic_pvalue_with(a: &BinaryVector, b: &BinaryVector, form: VarianceForm) -> Result<TestResult> {
    let table = contingency(a, b)?;
    let stat = Centered::from_table(&table);
    let (p, z) = asymptotic_from_stats(table.m() as usize, stat.coefficient, &table.plug_in(), form);
    let diagnostics = Diagnostics {
        z,
        ..Diagnostics::default()
    };
    Ok(TestResult::new(stat, p, Engine::Asymptotic, diagnostics))
}
