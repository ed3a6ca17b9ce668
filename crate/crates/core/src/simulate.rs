//! Synthetic presence-absence data for calibration and FDR studies.
//!
//! Null pairs are independent Bernoulli vectors. Alternatives in a mixture
//! are built by coordinate copying: each coordinate of a dependent vector
//! repeats the query with probability `dependence_strength` and is otherwise
//! a fresh Bernoulli(p) draw, which keeps the Bernoulli(p) margin.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::BinaryVector;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    /// Number of panel vectors tested against the query.
    pub n: usize,
    /// Vector length.
    pub m: usize,
    /// Occurrence probability of every vector.
    pub p: f64,
    /// Fraction of panel vectors independent of the query.
    pub pi0: f64,
    pub dependence_strength: f64,
    pub seed: u64,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 || self.m == 0 {
            return bad(format!("n and m must be positive (n={}, m={})", self.n, self.m));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return bad(format!("p must lie in (0, 1), got {}", self.p));
        }
        if !(0.0..=1.0).contains(&self.pi0) {
            return bad(format!("pi0 must lie in [0, 1], got {}", self.pi0));
        }
        if !(self.dependence_strength > 0.0 && self.dependence_strength <= 1.0) {
            return bad(format!(
                "dependence strength must lie in (0, 1], got {}",
                self.dependence_strength
            ));
        }
        Ok(())
    }

    /// Number of panel vectors that depend on the query.
    pub fn alternatives(&self) -> usize {
        // the small offset keeps e.g. (1 - 0.7) * 10 from rounding up to 4
        (((1.0 - self.pi0) * self.n as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

fn bernoulli_vector<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> BinaryVector {
    BinaryVector::from_raw((0..m).map(|_| rng.random_bool(p) as u8).collect())
}

/// Two independent i.i.d. Bernoulli vectors of length `m`.
pub fn simulate_null_pair<R: Rng + ?Sized>(
    m: usize,
    p_i: f64,
    p_j: f64,
    rng: &mut R,
) -> Result<(BinaryVector, BinaryVector)> {
    if m == 0 {
        return Err(Error::EmptyVector);
    }
    for p in [p_i, p_j] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidConfig(format!("probability must lie in (0, 1), got {p}")));
        }
    }
    let a = bernoulli_vector(m, p_i, rng);
    let b = bernoulli_vector(m, p_j, rng);
    Ok((a, b))
}

/// A query vector, a panel to test against it, and which panel vectors are
/// truly dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub query: BinaryVector,
    pub panel: Vec<BinaryVector>,
    pub is_alternative: Vec<bool>,
}

/// Panel vectors `0..alternatives()` depend on the query; the rest are
/// independent. The query uses stream 0 of `spec.seed`, panel vector `k`
/// stream `k + 1`.
pub fn simulate_mixture(spec: &SimSpec) -> Result<Mixture> {
    spec.validate()?;
    let query = bernoulli_vector(spec.m, spec.p, &mut stream_rng(spec.seed, 0));
    let n_alt = spec.alternatives();

    let mut panel = Vec::with_capacity(spec.n);
    for k in 0..spec.n {
        let mut rng = stream_rng(spec.seed, k as u64 + 1);
        let v = if k < n_alt {
            let bits = query
                .as_slice()
                .iter()
                .map(|&q| {
                    if rng.random_bool(spec.dependence_strength) {
                        q
                    } else {
                        rng.random_bool(spec.p) as u8
                    }
                })
                .collect();
            BinaryVector::from_raw(bits)
        } else {
            bernoulli_vector(spec.m, spec.p, &mut rng)
        };
        panel.push(v);
    }
    Ok(Mixture {
        query,
        panel,
        is_alternative: (0..spec.n).map(|k| k < n_alt).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, pi0: f64, strength: f64) -> SimSpec {
        SimSpec {
            n,
            m: 50,
            p: 0.5,
            pi0,
            dependence_strength: strength,
            seed: 17,
        }
    }

    #[test]
    fn null_pair_means() {
        let mut rng = stream_rng(1, 0);
        let (a, b) = simulate_null_pair(100_000, 0.5, 0.1, &mut rng).unwrap();
        assert!((a.occurrence() - 0.5).abs() < 0.01);
        assert!((b.occurrence() - 0.1).abs() < 0.01);
    }

    #[test]
    fn null_pair_is_reproducible() {
        let one = simulate_null_pair(64, 0.3, 0.6, &mut stream_rng(4, 2)).unwrap();
        let two = simulate_null_pair(64, 0.3, 0.6, &mut stream_rng(4, 2)).unwrap();
        assert_eq!(one, two);
        assert!(simulate_null_pair(10, 0.0, 0.5, &mut stream_rng(4, 2)).is_err());
    }

    #[test]
    fn mixture_examples() {
        let all_null = simulate_mixture(&spec(40, 1.0, 0.5)).unwrap();
        assert!(all_null.is_alternative.iter().all(|&a| !a));

        let copies = simulate_mixture(&spec(40, 0.0, 1.0)).unwrap();
        assert!(copies.panel.iter().all(|v| *v == copies.query));

        let half = SimSpec {
            n: 2000,
            ..spec(2000, 0.5, 0.5)
        };
        assert_eq!(half.alternatives(), 1000);
        let mix = simulate_mixture(&half).unwrap();
        assert_eq!(mix.is_alternative.iter().filter(|&&a| a).count(), 1000);
        assert_eq!(mix.panel.len(), 2000);
    }

    #[test]
    fn alternative_counts_round_up() {
        assert_eq!(spec(2000, 0.75, 0.5).alternatives(), 500);
        assert_eq!(spec(10, 0.7, 0.5).alternatives(), 3);
        assert_eq!(spec(7, 0.5, 0.5).alternatives(), 4);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(simulate_mixture(&spec(10, 1.5, 0.5)).is_err());
        assert!(simulate_mixture(&spec(10, 0.5, 0.0)).is_err());
        assert!(simulate_mixture(&SimSpec { p: 1.0, ..spec(10, 0.5, 0.5) }).is_err());
    }
}
