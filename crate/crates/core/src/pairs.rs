//! All-pairs testing of a presence-absence matrix.

use std::io::Write;

use crate::engine::{run_test, EngineConfig};
use crate::error::{Error, Result};
use crate::fdr::{fdr, Pi0Method};
use crate::matrix::PresenceAbsenceMatrix;
use crate::model::{Engine, TestResult};
use crate::par;

/// One row of the all-pairs table.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub label_i: String,
    pub label_j: String,
    pub coefficient: f64,
    pub expectation: f64,
    pub centered: f64,
    pub p_value: f64,
    pub q_value: f64,
    pub engine: Engine,
}

pub const REPORT_COLUMNS: [&str; 8] = [
    "label_i",
    "label_j",
    "coefficient",
    "expectation",
    "centered",
    "p_value",
    "q_value",
    "engine",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AllPairs {
    /// Ordered by `(i, j)` with `i < j`.
    pub reports: Vec<PairReport>,
    pub pi0: f64,
    /// Rows that are all ones or all zeros; their pairs carry `p = 1`.
    pub warnings: Vec<String>,
}

/// `(i, j)` index pairs with `i < j` in lexicographic order.
pub fn pair_indices(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Tests every unordered pair of rows, then attaches q-values. Pair `k`
/// (in `(i, j)` order) uses random stream `k`, so output is independent of
/// the number of workers.
pub fn all_pairs_test(matrix: &PresenceAbsenceMatrix, cfg: &EngineConfig, pi0: Pi0Method) -> Result<AllPairs> {
    cfg.validate()?;
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::EmptyInput("all-pairs testing needs at least two rows"));
    }
    let rows = matrix.rows();
    let labels = matrix.row_labels();

    let warnings = rows
        .iter()
        .zip(labels)
        .filter(|(r, _)| r.is_constant())
        .map(|(r, l)| {
            let kind = if r.ones() == 0 { "absent everywhere" } else { "present everywhere (generalist)" };
            format!("row '{l}' is {kind}; its pairs are reported with p = 1")
        })
        .collect();

    let pairs = pair_indices(n);
    let results: Vec<Result<TestResult>> = par::map_indices(pairs.len(), |k| {
        let (i, j) = pairs[k];
        run_test(&rows[i], &rows[j], cfg, k as u64)
    });

    let mut tests = Vec::with_capacity(pairs.len());
    for (r, &(i, j)) in results.into_iter().zip(&pairs) {
        tests.push(r.map_err(|e| Error::Pair {
            label_i: labels[i].clone(),
            label_j: labels[j].clone(),
            source: Box::new(e),
        })?);
    }

    let pvalues: Vec<f64> = tests.iter().map(|t| t.p_value).collect();
    let adjusted = fdr(&pvalues, pi0)?;
    let reports = tests
        .iter()
        .zip(&pairs)
        .zip(adjusted.q_values)
        .map(|((t, &(i, j)), q)| PairReport {
            label_i: labels[i].clone(),
            label_j: labels[j].clone(),
            coefficient: t.coefficient,
            expectation: t.expectation,
            centered: t.centered,
            p_value: t.p_value,
            q_value: q,
            engine: t.engine,
        })
        .collect();
    Ok(AllPairs {
        reports,
        pi0: adjusted.pi0,
        warnings,
    })
}

/// Reals with 17 significant digits, enough to round-trip an `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_reports<W: Write>(reports: &[PairReport], out: W, delimiter: u8) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.label_i.clone(),
            r.label_j.clone(),
            format_real(r.coefficient),
            format_real(r.expectation),
            format_real(r.centered),
            format_real(r.p_value),
            format_real(r.q_value),
            r.engine.to_string(),
        ])?;
    }
    w.flush()
}
