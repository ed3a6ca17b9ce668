//! The four-cell multinomial measure `Multi(m, q_both, q_i, q_j, q_neither)`
//! under which the pair's contingency table is distributed.

use crate::model::{ContingencyTable, OccurrenceProbs};
use crate::numeric::LogFactorials;

/// A state of the multinomial: four counts summing to `m`.
pub type MultinomialState = ContingencyTable;

/// Log-pmf evaluator for a fixed `m` and cell probabilities.
///
/// For each cell `k` the table `terms[k][n] = n ln q_k - ln n!` is
/// precomputed, so a state costs four lookups.
#[derive(Debug, Clone)]
pub struct MultinomialMeasure {
    m: u32,
    cells: [f64; 4],
    log_m_factorial: f64,
    terms: [Vec<f64>; 4],
}

impl MultinomialMeasure {
    pub fn new(m: u32, cells: [f64; 4]) -> Self {
        debug_assert!(cells.iter().all(|&q| q >= 0.0));
        let lf = LogFactorials::new(m as usize);
        let terms = cells.map(|q| {
            let log_q = q.ln();
            (0..=m)
                .map(|n| match (n, q) {
                    (0, _) => 0.0,
                    (_, q) if q == 0.0 => f64::NEG_INFINITY,
                    (n, _) => n as f64 * log_q - lf.get(n),
                })
                .collect()
        });
        Self {
            m,
            cells,
            log_m_factorial: lf.get(m),
            terms,
        }
    }

    /// Measure induced by independent Bernoulli margins.
    pub fn from_probs(m: u32, probs: &OccurrenceProbs) -> Self {
        Self::new(m, probs.cell_probs())
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn cells(&self) -> [f64; 4] {
        self.cells
    }

    /// Log probability of a state; `-inf` when a positive count sits in a
    /// zero-probability cell.
    #[inline(always)]
    pub fn log_pmf(&self, s: &MultinomialState) -> f64 {
        debug_assert_eq!(s.m(), self.m);
        self.log_m_factorial
            + self.terms[0][s.n1 as usize]
            + self.terms[1][s.n2 as usize]
            + self.terms[2][s.n3 as usize]
            + self.terms[3][s.n4 as usize]
    }

    #[inline(always)]
    pub(crate) fn log_pmf_counts(&self, n1: u32, n2: u32, n3: u32, n4: u32) -> f64 {
        self.log_m_factorial
            + self.terms[0][n1 as usize]
            + self.terms[1][n2 as usize]
            + self.terms[2][n3 as usize]
            + self.terms[3][n4 as usize]
    }
}

/// Log multinomial probability of `state` under the cell probabilities
/// implied by `probs`.
pub fn log_multinomial_pmf(state: &MultinomialState, probs: &OccurrenceProbs) -> f64 {
    MultinomialMeasure::from_probs(state.m(), probs).log_pmf(state)
}
