//! Exact p-value by enumerating every multinomial state of a pair.
//!
//! The critical region re-estimates the occurrence probabilities inside each
//! state, so a state belongs to the region when
//! `|n1/(n1+n2+n3) - E(p~_i, p~_j)| >= |observed centered| - tol`, with
//! `p~_i = (n1+n2)/m` and `p~_j = (n1+n3)/m`. States are weighted by the
//! multinomial measure built from the data's plug-in probabilities.

use crate::error::{Error, Result};
use crate::model::{contingency, BinaryVector, Centered, Diagnostics, Engine, TestResult};
use crate::multinomial::MultinomialMeasure;
use crate::numeric::lse_combine;
use crate::par;

pub use crate::multinomial::{log_multinomial_pmf, MultinomialState};

/// Largest `m` accepted by default; enumeration is `O(m^3)`.
pub const DEFAULT_EXACT_CAP: usize = 2000;

/// Slack on the region boundary so the observed state is never excluded by
/// rounding.
pub const REGION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactConfig {
    pub max_m: usize,
    pub tolerance: f64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            max_m: DEFAULT_EXACT_CAP,
            tolerance: REGION_TOLERANCE,
        }
    }
}

/// Whether `state` deviates from its own re-estimated expectation by at least
/// `observed_abs_centered - tol`.
#[inline]
pub fn in_critical_region(state: &MultinomialState, observed_abs_centered: f64, tol: f64) -> bool {
    state.deviation() >= observed_abs_centered - tol
}

/// Result of a full enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMass {
    /// Probability of the critical region.
    pub region: f64,
    /// Probability of all enumerated states; 1 up to rounding.
    pub total: f64,
    pub states: u64,
}

/// Enumerates every state of `measure` and returns the region and total mass
/// for the threshold `observed_abs_centered`.
///
/// States are visited `n1` outer, `n2` middle, `n3` inner. Each `n1` slice is
/// reduced with its own log-sum-exp and slices are combined in ascending
/// order, so the result is identical for any number of workers.
pub fn region_mass(measure: &MultinomialMeasure, observed_abs_centered: f64, tol: f64) -> RegionMass {
    let m = measure.m();
    let threshold = observed_abs_centered - tol;
    let slices = par::map_indices(m as usize + 1, |n1| slice_mass(measure, n1 as u32, threshold));

    let (mut region, mut total, mut states) = ((f64::NEG_INFINITY, 0.0), (f64::NEG_INFINITY, 0.0), 0u64);
    for s in slices {
        region = lse_combine(region, s.region);
        total = lse_combine(total, s.total);
        states += s.states;
    }
    let value = |(max, sum): (f64, f64)| if sum == 0.0 { 0.0 } else { max.exp() * sum };
    RegionMass {
        region: value(region),
        total: value(total),
        states,
    }
}

struct SliceMass {
    region: (f64, f64),
    total: (f64, f64),
    states: u64,
}

fn slice_mass(measure: &MultinomialMeasure, n1: u32, threshold: f64) -> SliceMass {
    let m = measure.m();
    let rest = m - n1;

    let mut max = f64::NEG_INFINITY;
    for n2 in 0..=rest {
        for n3 in 0..=rest - n2 {
            max = max.max(measure.log_pmf_counts(n1, n2, n3, rest - n2 - n3));
        }
    }
    let states = (rest as u64 + 1) * (rest as u64 + 2) / 2;
    if max == f64::NEG_INFINITY {
        return SliceMass {
            region: (max, 0.0),
            total: (max, 0.0),
            states,
        };
    }

    let (mut region, mut total) = (0.0, 0.0);
    for n2 in 0..=rest {
        for n3 in 0..=rest - n2 {
            let state = MultinomialState::new(n1, n2, n3, rest - n2 - n3);
            let w = (measure.log_pmf(&state) - max).exp();
            total += w;
            if state.deviation() >= threshold {
                region += w;
            }
        }
    }
    SliceMass {
        region: (max, region),
        total: (max, total),
        states,
    }
}

/// Exact two-sided p-value with the default configuration.
pub fn exact_pvalue(a: &BinaryVector, b: &BinaryVector) -> Result<TestResult> {
    exact_pvalue_with(a, b, &ExactConfig::default())
}

pub fn exact_pvalue_with(a: &BinaryVector, b: &BinaryVector, cfg: &ExactConfig) -> Result<TestResult> {
    let table = contingency(a, b)?;
    let m = table.m() as usize;
    if m > cfg.max_m {
        return Err(Error::ResourceGuard { m, cap: cfg.max_m });
    }
    let stat = Centered::from_table(&table);
    let observed = stat.centered.abs();

    // Every state deviates by at least 0.
    if observed <= cfg.tolerance {
        return Ok(TestResult::new(stat, 1.0, Engine::Exact, Diagnostics::default()));
    }

    let measure = MultinomialMeasure::from_probs(table.m(), &table.plug_in());
    let mass = region_mass(&measure, observed, cfg.tolerance);
    let diagnostics = Diagnostics {
        states: Some(mass.states),
        ..Diagnostics::default()
    };
    Ok(TestResult::new(stat, mass.region, Engine::Exact, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContingencyTable, OccurrenceProbs};

    fn v(bits: &[u8]) -> BinaryVector {
        BinaryVector::from_u8s(bits).unwrap()
    }

    #[test]
    fn region_membership_examples() {
        let obs = 2.0 / 3.0;
        assert!(in_critical_region(&ContingencyTable::new(1, 0, 0, 1), obs, REGION_TOLERANCE));
        assert!(!in_critical_region(&ContingencyTable::new(2, 0, 0, 0), obs, REGION_TOLERANCE));
        assert!(!in_critical_region(&ContingencyTable::new(0, 0, 0, 5), 1e-3, REGION_TOLERANCE));
    }

    #[test]
    fn identical_m2_pair() {
        // Of the ten states at m = 2 only (1,0,0,1) deviates by 2/3; its mass
        // under uniform cells is 2 * 1/4 * 1/4.
        let r = exact_pvalue(&v(&[1, 0]), &v(&[1, 0])).unwrap();
        assert!((r.p_value - 0.125).abs() < 1e-12);
        assert_eq!(r.diagnostics.states, Some(10));
    }

    #[test]
    fn null_statistic_gives_one() {
        let r = exact_pvalue(&v(&[1, 1, 1]), &v(&[1, 1, 1])).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.centered, 0.0);
    }

    #[test]
    fn resource_guard() {
        let a = v(&[1, 0, 1, 0]);
        let cfg = ExactConfig {
            max_m: 3,
            ..ExactConfig::default()
        };
        assert_eq!(
            exact_pvalue_with(&a, &a, &cfg),
            Err(Error::ResourceGuard { m: 4, cap: 3 })
        );
        assert!(matches!(
            exact_pvalue(&a, &v(&[1, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn enumeration_is_complete() {
        for (pi, pj, m) in [(0.5, 0.5, 40), (0.1, 0.9, 60), (0.37, 0.02, 200), (0.99, 0.5, 150)] {
            let measure = MultinomialMeasure::from_probs(m, &OccurrenceProbs::new(pi, pj).unwrap());
            let mass = region_mass(&measure, 0.0, REGION_TOLERANCE);
            assert!((mass.total - 1.0).abs() < 1e-10, "{pi} {pj} {m}: {}", mass.total);
            assert!((mass.region - mass.total).abs() < 1e-15);
        }
    }

    #[test]
    fn pvalue_non_increasing_in_threshold() {
        let measure = MultinomialMeasure::from_probs(30, &OccurrenceProbs::new(0.4, 0.6).unwrap());
        let mut last = f64::INFINITY;
        for k in 0..=50 {
            let threshold = k as f64 / 50.0;
            let p = region_mass(&measure, threshold, REGION_TOLERANCE).region;
            assert!(p <= last + 1e-15, "threshold {threshold}: {p} > {last}");
            last = p;
        }
    }

    #[test]
    fn observed_state_mass_is_a_lower_bound() {
        let a = v(&[1, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 0]);
        let b = v(&[1, 1, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1]);
        let t = contingency(&a, &b).unwrap();
        let own = crate::multinomial::log_multinomial_pmf(&t, &t.plug_in()).exp();
        let r = exact_pvalue(&a, &b).unwrap();
        assert!(r.p_value >= own);
        assert!(r.p_value < 1.0);
    }
}
