//! Calibration runs on simulated mixtures and engine runtime benchmarks.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::engine::{run_test, EngineConfig};
use crate::error::Result;
use crate::fdr::{false_discovery_proportion, fdr, Pi0Method};
use crate::model::{centered_statistic, BinaryVector, Engine};
use crate::pairs::format_real;
use crate::par;
use crate::rng::stream_rng;
use crate::simulate::{simulate_mixture, simulate_null_pair, SimSpec};

/// Kolmogorov-Smirnov distance between the empirical CDF of `values` and
/// Uniform(0, 1).
pub fn ks_distance_uniform(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub index: usize,
    pub is_alternative: bool,
    pub coefficient: f64,
    pub centered: f64,
    pub p_value: f64,
    pub q_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub engine: Engine,
    pub pi0_estimate: f64,
    pub rows: Vec<CalibrationRow>,
}

impl Calibration {
    pub fn p_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p_value).collect()
    }

    /// Observed false discovery proportion at q-value threshold `t`.
    pub fn fdp(&self, t: f64) -> f64 {
        let q: Vec<f64> = self.rows.iter().map(|r| r.q_value).collect();
        let alt: Vec<bool> = self.rows.iter().map(|r| r.is_alternative).collect();
        false_discovery_proportion(&q, &alt, t)
    }

    /// KS distance to Uniform(0, 1) of the p-values of true nulls.
    pub fn null_ks_distance(&self) -> f64 {
        let nulls: Vec<f64> = self.rows.iter().filter(|r| !r.is_alternative).map(|r| r.p_value).collect();
        ks_distance_uniform(&nulls)
    }

    pub fn write<W: Write>(&self, out: W, delimiter: u8) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        w.write_record(["index", "is_alternative", "coefficient", "centered", "p_value", "q_value", "engine"])?;
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.is_alternative.to_string(),
                format_real(r.coefficient),
                format_real(r.centered),
                format_real(r.p_value),
                format_real(r.q_value),
                self.engine.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Simulates a query/panel mixture, tests the query against every panel
/// vector, and attaches q-values. Test `k` uses random stream `k` of the
/// engine seed.
pub fn simulate_and_test(spec: &SimSpec, cfg: &EngineConfig, pi0: Pi0Method) -> Result<Calibration> {
    cfg.validate()?;
    let mix = simulate_mixture(spec)?;
    let results = par::map_indices(mix.panel.len(), |k| run_test(&mix.query, &mix.panel[k], cfg, k as u64));
    let tests = results.into_iter().collect::<Result<Vec<_>>>()?;
    let pvalues: Vec<f64> = tests.iter().map(|t| t.p_value).collect();
    let adjusted = fdr(&pvalues, pi0)?;
    let rows = tests
        .iter()
        .zip(adjusted.q_values)
        .enumerate()
        .map(|(k, (t, q))| CalibrationRow {
            index: k,
            is_alternative: mix.is_alternative[k],
            coefficient: t.coefficient,
            centered: t.centered,
            p_value: t.p_value,
            q_value: q,
        })
        .collect();
    Ok(Calibration {
        engine: cfg.engine,
        pi0_estimate: adjusted.pi0,
        rows,
    })
}

/// Null p-values of `pairs` independent Bernoulli(`p`) pairs of length `m`.
/// Pair `k` is drawn from stream `k` of `seed`.
pub fn null_pvalues(m: usize, p: f64, pairs: usize, seed: u64, cfg: &EngineConfig) -> Result<Vec<f64>> {
    par::map_indices(pairs, |k| {
        let (a, b) = simulate_null_pair(m, p, p, &mut stream_rng(seed, k as u64))?;
        run_test(&a, &b, cfg, k as u64).map(|r| r.p_value)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub engine: Engine,
    pub m: usize,
    /// Completed repetitions.
    pub reps: usize,
    pub mean_seconds: Option<f64>,
    pub speedup_vs_exact: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct BenchmarkOptions {
    pub m_grid: Vec<usize>,
    pub reps: usize,
    pub engines: Vec<Engine>,
    /// Engines whose single call exceeds this are skipped for larger `m`.
    pub timeout: Duration,
    pub base: EngineConfig,
    pub seed: u64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            m_grid: vec![50, 100, 200, 300, 400, 500],
            reps: 10,
            engines: Engine::ALL.to_vec(),
            timeout: Duration::from_secs(120),
            base: EngineConfig::default(),
            seed: 0,
        }
    }
}

/// `reps` null pairs, skipping draws whose centered statistic is exactly 0:
/// every engine short-circuits those, which would make the timing meaningless.
fn benchmark_inputs(m: usize, reps: usize, seed: u64) -> Vec<(BinaryVector, BinaryVector)> {
    let draw = |r: u64| simulate_null_pair(m, 0.5, 0.5, &mut stream_rng(seed, r)).expect("valid benchmark inputs");
    let informative = (0..(reps as u64) * 20)
        .map(draw)
        .filter(|(a, b)| centered_statistic(a, b).is_ok_and(|c| c.centered.abs() > 1e-12))
        .take(reps);
    let mut inputs: Vec<_> = informative.collect();
    // tiny m may have no informative pair at all
    let mut r = 0;
    while inputs.len() < reps {
        inputs.push(draw(r));
        r += 1;
    }
    inputs
}

/// Mean wall-clock time per call for each engine and `m`, on Bernoulli(0.5)
/// null pairs. Calls run one after another on the calling thread.
pub fn benchmark(opts: &BenchmarkOptions) -> Vec<BenchmarkRow> {
    let mut rows = Vec::new();
    let mut timed_out: Vec<Engine> = Vec::new();
    for &m in &opts.m_grid {
        let inputs = benchmark_inputs(m.max(1), opts.reps.max(1), opts.seed ^ m as u64);

        let mut block: Vec<BenchmarkRow> = Vec::new();
        for &engine in &opts.engines {
            let cfg = EngineConfig { engine, ..opts.base };
            let mut row = BenchmarkRow {
                engine,
                m,
                reps: 0,
                mean_seconds: None,
                speedup_vs_exact: None,
                note: String::new(),
            };
            if timed_out.contains(&engine) {
                row.note = "skipped: timed out at a smaller m".into();
                block.push(row);
                continue;
            }
            if engine == Engine::Exact && m > cfg.exact_cap {
                row.note = format!("skipped: m exceeds exact cap {}", cfg.exact_cap);
                block.push(row);
                continue;
            }
            let mut total = Duration::ZERO;
            for (k, (a, b)) in inputs.iter().enumerate() {
                let start = Instant::now();
                let outcome = run_test(a, b, &cfg, k as u64);
                let elapsed = start.elapsed();
                if let Err(e) = outcome {
                    row.note = format!("error: {e}");
                    break;
                }
                total += elapsed;
                row.reps += 1;
                if elapsed > opts.timeout {
                    row.note = format!("timeout: call took {:.1}s", elapsed.as_secs_f64());
                    timed_out.push(engine);
                    break;
                }
            }
            if row.reps > 0 {
                row.mean_seconds = Some(total.as_secs_f64() / row.reps as f64);
            }
            block.push(row);
        }
        let exact_mean = block
            .iter()
            .find(|r| r.engine == Engine::Exact)
            .and_then(|r| r.mean_seconds);
        for row in &mut block {
            if let (Some(e), Some(t)) = (exact_mean, row.mean_seconds) {
                if t > 0.0 {
                    row.speedup_vs_exact = Some(e / t);
                }
            }
        }
        rows.extend(block);
    }
    rows
}

pub fn write_benchmark<W: Write>(rows: &[BenchmarkRow], out: W, delimiter: u8) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(["engine", "m", "reps", "mean_seconds", "speedup_vs_exact", "note"])?;
    let opt = |x: Option<f64>| x.map(format_real).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.engine.to_string(),
            r.m.to_string(),
            r.reps.to_string(),
            opt(r.mean_seconds),
            opt(r.speedup_vs_exact),
            r.note.clone(),
        ])?;
    }
    w.flush()
}
