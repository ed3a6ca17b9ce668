//! Bootstrap null distribution: resample each vector independently with
//! replacement, which breaks any dependence between them, and recompute the
//! centered coefficient with plug-ins taken from the resamples.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    contingency, BinaryVector, Centered, ContingencyTable, Diagnostics, Engine, TestResult,
};
use crate::par;
use crate::rng::{derive_seed, stream_rng};

/// Slack in `|t*| >= |t|` so resamples reproducing the observed
/// configuration always count.
pub const EXCEEDANCE_TOLERANCE: f64 = 1e-12;

/// Iterations per unit of vector length used when `iterations` is unset.
pub const DEFAULT_ITERATIONS_PER_UNIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BootstrapConfig {
    /// Number of bootstrap iterations `B`; `None` means `5 * m`.
    pub iterations: Option<usize>,
    pub seed: u64,
    /// Report `(1 + count) / (1 + B)` instead of `count / B`.
    pub add_one_smoothing: bool,
}

impl BootstrapConfig {
    pub fn with_iterations(iterations: usize, seed: u64) -> Self {
        Self {
            iterations: Some(iterations),
            seed,
            add_one_smoothing: false,
        }
    }

    /// Resolved `B` for vectors of length `m`.
    pub fn iterations_for(&self, m: usize) -> Result<usize> {
        match self.iterations {
            Some(0) => Err(Error::InvalidConfig("bootstrap iterations must be >= 1".into())),
            Some(b) => Ok(b),
            None => Ok((DEFAULT_ITERATIONS_PER_UNIT * m).max(1)),
        }
    }
}

/// Draws `v.len()` positions of `v` uniformly with replacement.
pub fn resample<R: Rng + ?Sized>(v: &BinaryVector, rng: &mut R) -> BinaryVector {
    let src = v.as_slice();
    let m = src.len();
    BinaryVector::from_raw((0..m).map(|_| src[rng.random_range(0..m)]).collect())
}

/// Contingency table of `(resample(a), resample(b))` without materializing
/// the resampled vectors. Consumes the stream exactly like two consecutive
/// [`resample`] calls.
fn resampled_table<R: Rng + ?Sized>(a: &[u8], b: &[u8], rng: &mut R, buf: &mut Vec<u8>) -> ContingencyTable {
    let m = a.len();
    buf.clear();
    buf.extend((0..m).map(|_| a[rng.random_range(0..m)]));
    let mut n = [0u32; 4];
    for &x in buf.iter() {
        let y = b[rng.random_range(0..m)];
        n[((1 - x) << 1 | (1 - y)) as usize] += 1;
    }
    ContingencyTable::from_counts(n)
}

/// Centered coefficients `t*_1..t*_B` of the bootstrap null distribution.
/// Iteration `k` draws from stream `k` of `cfg.seed`.
pub fn null_statistics(a: &BinaryVector, b: &BinaryVector, cfg: &BootstrapConfig) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let iterations = cfg.iterations_for(a.len())?;
    let (sa, sb) = (a.as_slice(), b.as_slice());
    Ok(par::map_indices(iterations, |k| {
        let mut rng = stream_rng(cfg.seed, k as u64);
        let mut buf = Vec::with_capacity(sa.len());
        Centered::from_table(&resampled_table(sa, sb, &mut rng, &mut buf)).centered
    }))
}

fn pvalue_from_count(count: usize, total: usize, smoothing: bool) -> f64 {
    if smoothing {
        (1 + count) as f64 / (1 + total) as f64
    } else {
        count as f64 / total as f64
    }
}

pub fn bootstrap_pvalue(a: &BinaryVector, b: &BinaryVector, cfg: &BootstrapConfig) -> Result<TestResult> {
    let stat = Centered::from_table(&contingency(a, b)?);
    let iterations = cfg.iterations_for(a.len())?;
    let threshold = stat.centered.abs() - EXCEEDANCE_TOLERANCE;

    let count = if threshold <= 0.0 {
        iterations
    } else {
        let (sa, sb) = (a.as_slice(), b.as_slice());
        par::count_indices(iterations, |k| {
            let mut rng = stream_rng(cfg.seed, k as u64);
            let mut buf = Vec::with_capacity(sa.len());
            Centered::from_table(&resampled_table(sa, sb, &mut rng, &mut buf))
                .centered
                .abs()
                >= threshold
        })
    };
    let diagnostics = Diagnostics {
        iterations: Some(iterations),
        exceedances: Some(count),
        ..Diagnostics::default()
    };
    let p = pvalue_from_count(count, iterations, cfg.add_one_smoothing);
    Ok(TestResult::new(stat, p, Engine::Bootstrap, diagnostics))
}

/// Opt-in pooled mode: null statistics from every pair are concatenated and
/// each pair's p-value is its exceedance frequency within the pool. Pair `k`
/// resamples under `derive_seed(cfg.seed, k)`.
///
/// Pooling assumes the pairs share a common null distribution (same `m`,
/// similar occurrence rates); it trades that assumption for resolution.
pub fn bootstrap_pvalues_pooled(
    pairs: &[(BinaryVector, BinaryVector)],
    cfg: &BootstrapConfig,
) -> Result<Vec<TestResult>> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no pairs to pool"));
    }
    let stats = pairs
        .iter()
        .map(|(a, b)| Ok(Centered::from_table(&contingency(a, b)?)))
        .collect::<Result<Vec<_>>>()?;

    let per_pair = par::map_indices(pairs.len(), |k| {
        let (a, b) = &pairs[k];
        let pair_cfg = BootstrapConfig {
            seed: derive_seed(cfg.seed, k as u64),
            ..*cfg
        };
        null_statistics(a, b, &pair_cfg)
    });
    let mut pool = Vec::new();
    for stats in per_pair {
        pool.extend(stats?.into_iter().map(f64::abs));
    }
    pool.sort_by(f64::total_cmp);
    let total = pool.len();

    Ok(stats
        .into_iter()
        .map(|stat| {
            let threshold = stat.centered.abs() - EXCEEDANCE_TOLERANCE;
            let count = total - pool.partition_point(|&x| x < threshold);
            let diagnostics = Diagnostics {
                iterations: Some(total),
                exceedances: Some(count),
                ..Diagnostics::default()
            };
            TestResult::new(
                stat,
                pvalue_from_count(count, total, cfg.add_one_smoothing),
                Engine::Bootstrap,
                diagnostics,
            )
        })
        .collect())
}
