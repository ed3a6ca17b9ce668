//! Acceptance suite. Prints one PASS/FAIL line per criterion A1-A9 and runs
//! the criteria one after another so the timing criterion is not disturbed.
//!
//! `JACCARD_ACCEPTANCE_FULL=1` runs the full-size FDR study (A5) instead of
//! the reduced smoke variant.
//!
//! The process fails when a criterion fails, except for those listed in
//! `KNOWN_RED`, which are unattainable as stated and reported as FAIL anyway.

use std::time::{Duration, Instant};

use rand::Rng;

use jaccard_core::asymptotic::VarianceForm;
use jaccard_core::calibrate::{ks_distance_uniform, null_pvalues, simulate_and_test};
use jaccard_core::fdr::Pi0Method;
use jaccard_core::matrix::PresenceAbsenceMatrix;
use jaccard_core::model::{coefficient, contingency, expectation, OccurrenceProbs};
use jaccard_core::pairs::all_pairs_test;
use jaccard_core::rng::stream_rng;
use jaccard_core::simulate::{simulate_mixture, simulate_null_pair, SimSpec};
use jaccard_core::{run_test, BinaryVector, Engine, EngineConfig};

// A1
const A1_PROBS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const A1_PAIRS: usize = 2000;
const A1_M: usize = 100;
const A1_B: usize = 500;
const A1_KS: f64 = 0.05;
// A2
const A2_PAIRS: usize = 500;
const A2_EPSILON: f64 = 1e-5;
const A2_SLACK: f64 = 1e-12;
// A3
const A3_PAIRS: usize = 200;
const A3_MAX_M: usize = 8;
const A3_TOL: f64 = 1e-9;
// A4
const A4_VECTORS: usize = 53;
const A4_M: usize = 28;
const A4_B: usize = 5000;
const A4_MSD: f64 = 1e-3;
// A5
const A5_PI0: [f64; 3] = [0.25, 0.5, 0.75];
const A5_M: usize = 200;
const A5_THRESHOLDS: [f64; 3] = [0.05, 0.10, 0.20];
const A5_SLACK: f64 = 0.05;
const A5_DEPENDENCE: f64 = 0.5;
// A6
const A6_M: usize = 500;
const A6_B: usize = 2500;
const A6_PAIRS: u64 = 5;
const A6_SPEEDUP: f64 = 10.0;
// A7
const A7_GRID: [f64; 3] = [0.1, 0.5, 0.9];
const A7_M: [usize; 2] = [5, 50];
const A7_REPLICATES: usize = 100_000;
const A7_SE: f64 = 4.0;

/// Criteria that cannot pass as stated; see the README.
const KNOWN_RED: [&str; 1] = ["A1"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    /// `None` for report-only criteria.
    pass: Option<bool>,
    detail: String,
}

fn null_cfg(engine: Engine) -> EngineConfig {
    EngineConfig::new(engine)
}

fn a1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for engine in [Engine::Exact, Engine::Bootstrap, Engine::Mca] {
        let mut cfg = null_cfg(engine);
        cfg.iterations = Some(A1_B);
        let ks: Vec<String> = A1_PROBS
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let pv = null_pvalues(A1_M, p, A1_PAIRS, 100 + k as u64, &cfg).unwrap();
                let d = ks_distance_uniform(&pv);
                pass &= d < A1_KS;
                format!("{p}:{d:.3}")
            })
            .collect();
        parts.push(format!("{engine}[{}]", ks.join(" ")));
    }
    Outcome {
        id: "A1",
        title: "null p-values ~ Uniform(0,1), KS < 0.05",
        pass: Some(pass),
        detail: parts.join(" "),
    }
}

/// A pair of length `m` with random margins; half of the pairs are made
/// dependent by copying coordinates.
fn random_pair(stream: u64, m: usize) -> (BinaryVector, BinaryVector) {
    let mut rng = stream_rng(0xA2, stream);
    let (pi, pj) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
    let (a, mut b) = simulate_null_pair(m, pi, pj, &mut rng).unwrap();
    if stream % 2 == 1 {
        let copy = rng.random_range(0.2..0.9);
        let bits: Vec<u8> = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| if rng.random_bool(copy) { x } else { y })
            .collect();
        b = BinaryVector::from_u8s(&bits).unwrap();
    }
    (a, b)
}

fn a2() -> Outcome {
    let exact = null_cfg(Engine::Exact);
    let mut mca = null_cfg(Engine::Mca);
    mca.epsilon = A2_EPSILON;
    let mut violations = 0;
    let mut worst_gap = 0.0f64;
    for k in 0..A2_PAIRS as u64 {
        let m = 10 + (k as usize * 7919) % 91;
        let (a, b) = random_pair(k, m);
        let p = run_test(&a, &b, &exact, k).unwrap().p_value;
        let r = run_test(&a, &b, &mca, k).unwrap();
        let (lo, hi) = (r.p_value, r.diagnostics.p_upper.unwrap());
        if !(lo - A2_SLACK <= p && p <= hi + A2_SLACK) || (hi - (lo + A2_EPSILON).min(1.0)).abs() > 1e-15 {
            violations += 1;
        }
        worst_gap = worst_gap.max(p - lo);
    }
    Outcome {
        id: "A2",
        title: "exact p in [p_L, p_L + eps] (eps = 1e-5)",
        pass: Some(violations == 0),
        detail: format!("{A2_PAIRS} pairs, m in 10..=100, {violations} violations, max p - p_L = {worst_gap:.2e}"),
    }
}

/// p-value by enumerating all 4^m sequences of per-unit categories.
fn brute_force_pvalue(a: &[u8], b: &[u8]) -> f64 {
    let m = a.len();
    let pi = a.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
    let pj = b.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
    // category 0: both, 1: i only, 2: j only, 3: neither
    let cell = [pi * pj, pi * (1.0 - pj), (1.0 - pi) * pj, (1.0 - pi) * (1.0 - pj)];

    let deviation = |n: [usize; 4]| -> f64 {
        let union = n[0] + n[1] + n[2];
        if union == 0 {
            return 0.0;
        }
        let (xi, xj) = ((n[0] + n[1]) as f64 / m as f64, (n[0] + n[2]) as f64 / m as f64);
        let denom = xi + xj - xi * xj;
        let e = if denom == 0.0 { 0.0 } else { xi * xj / denom };
        (n[0] as f64 / union as f64 - e).abs()
    };
    let mut observed = [0usize; 4];
    for (&x, &y) in a.iter().zip(b) {
        observed[match (x, y) {
            (1, 1) => 0,
            (1, 0) => 1,
            (0, 1) => 2,
            _ => 3,
        }] += 1;
    }
    let threshold = deviation(observed) - 1e-12;

    let mut total = 0.0;
    for code in 0..4usize.pow(m as u32) {
        let (mut n, mut prob, mut c) = ([0usize; 4], 1.0, code);
        for _ in 0..m {
            n[c % 4] += 1;
            prob *= cell[c % 4];
            c /= 4;
        }
        if deviation(n) >= threshold {
            total += prob;
        }
    }
    total
}

fn a3() -> Outcome {
    let cfg = null_cfg(Engine::Exact);
    let mut worst = 0.0f64;
    for k in 0..A3_PAIRS as u64 {
        let mut rng = stream_rng(0xA3, k);
        let m = rng.random_range(1..=A3_MAX_M);
        let (pi, pj) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let a: Vec<u8> = (0..m).map(|_| rng.random_bool(pi) as u8).collect();
        let b: Vec<u8> = (0..m).map(|_| rng.random_bool(pj) as u8).collect();
        let got = run_test(
            &BinaryVector::from_u8s(&a).unwrap(),
            &BinaryVector::from_u8s(&b).unwrap(),
            &cfg,
            k,
        )
        .unwrap()
        .p_value;
        worst = worst.max((got - brute_force_pvalue(&a, &b)).abs());
    }
    Outcome {
        id: "A3",
        title: "exact p = 4^m per-unit enumeration (m <= 8), tol 1e-9",
        pass: Some(worst < A3_TOL),
        detail: format!("{A3_PAIRS} pairs, max |diff| = {worst:.2e}"),
    }
}

fn a4() -> Outcome {
    let spec = SimSpec {
        n: A4_VECTORS - 1,
        m: A4_M,
        p: 0.5,
        pi0: 0.5,
        dependence_strength: 0.5,
        seed: 0xA4,
    };
    let mix = simulate_mixture(&spec).unwrap();
    let mut rows = vec![mix.query];
    rows.extend(mix.panel);
    let matrix = PresenceAbsenceMatrix::from_rows(rows).unwrap();

    let mut boot = null_cfg(Engine::Bootstrap);
    boot.iterations = Some(A4_B);
    boot.seed = 0xA4;
    let b = all_pairs_test(&matrix, &boot, Pi0Method::default()).unwrap();
    let m = all_pairs_test(&matrix, &null_cfg(Engine::Mca), Pi0Method::default()).unwrap();
    let msd = b
        .reports
        .iter()
        .zip(&m.reports)
        .map(|(x, y)| (x.p_value - y.p_value).powi(2))
        .sum::<f64>()
        / b.reports.len() as f64;
    Outcome {
        id: "A4",
        title: "bootstrap (B = 5000) vs MCA p-values, MSD < 1e-3",
        pass: Some(b.reports.len() == 1378 && msd < A4_MSD),
        detail: format!("{} pairs, MSD = {msd:.3e}", b.reports.len()),
    }
}

fn a5() -> Outcome {
    let full = std::env::var("JACCARD_ACCEPTANCE_FULL").is_ok_and(|v| v == "1");
    let (n, reps) = if full { (2000, 20) } else { (500, 5) };
    let mut pass = true;
    let mut worst = (0.0f64, String::new());
    for engine in [Engine::Bootstrap, Engine::Mca] {
        for (k, &pi0) in A5_PI0.iter().enumerate() {
            let mut mean = [0.0; 3];
            for r in 0..reps {
                let spec = SimSpec {
                    n,
                    m: A5_M,
                    p: 0.5,
                    pi0,
                    dependence_strength: A5_DEPENDENCE,
                    seed: 0xA5_0000 + (k * 100 + r) as u64,
                };
                let mut cfg = null_cfg(engine);
                cfg.seed = spec.seed;
                let cal = simulate_and_test(&spec, &cfg, Pi0Method::default()).unwrap();
                for (t, acc) in A5_THRESHOLDS.iter().zip(&mut mean) {
                    *acc += cal.fdp(*t) / reps as f64;
                }
            }
            for (t, fdp) in A5_THRESHOLDS.iter().zip(mean) {
                pass &= fdp <= t + A5_SLACK;
                if fdp - t > worst.0 || worst.1.is_empty() {
                    worst = (fdp - t, format!("{engine} pi0={pi0} q<={t}: FDP {fdp:.3}"));
                }
            }
        }
    }
    Outcome {
        id: "A5",
        title: "mean FDP <= q-threshold + 0.05 (bootstrap, MCA)",
        pass: Some(pass),
        detail: format!(
            "{} variant n={n} reps={reps} m={A5_M}; tightest: {}",
            if full { "full" } else { "smoke" },
            worst.1
        ),
    }
}

fn a6() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pairs: Vec<_> = (0..A6_PAIRS)
        .map(|k| simulate_null_pair(A6_M, 0.5, 0.5, &mut stream_rng(0xA6, k)).unwrap())
        .collect();
    let time = |cfg: EngineConfig| -> Duration {
        pool.install(|| {
            let start = Instant::now();
            for (k, (a, b)) in pairs.iter().enumerate() {
                std::hint::black_box(run_test(a, b, &cfg, k as u64).unwrap());
            }
            start.elapsed()
        })
    };
    let exact = time(null_cfg(Engine::Exact));
    let mut boot = null_cfg(Engine::Bootstrap);
    boot.iterations = Some(A6_B);
    let boot = time(boot);
    let mca = time(null_cfg(Engine::Mca));
    let per = |d: Duration| d.as_secs_f64() / A6_PAIRS as f64;
    let (sb, sm) = (exact.as_secs_f64() / boot.as_secs_f64(), exact.as_secs_f64() / mca.as_secs_f64());
    Outcome {
        id: "A6",
        title: "m = 500: bootstrap (B = 2500) and MCA >= 10x faster than exact",
        pass: Some(sb >= A6_SPEEDUP && sm >= A6_SPEEDUP),
        detail: format!(
            "per call, one thread: exact {:.3}s, bootstrap {:.4}s ({sb:.1}x), mca {:.4}s ({sm:.1}x)",
            per(exact),
            per(boot),
            per(mca)
        ),
    }
}

fn a7() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut points = 0;
    for (g, &pi) in A7_GRID.iter().enumerate() {
        for (h, &pj) in A7_GRID.iter().enumerate() {
            let truth = OccurrenceProbs::new(pi, pj).unwrap();
            // closed form, written out independently of the library
            let target = pi * pj / (pi + pj - pi * pj);
            let mut ok = true;
            for &m in &A7_M {
                let mut rng = stream_rng(0xA7, (g * 3 + h) as u64 * 10 + m as u64);
                let (mut sum, mut sq) = (0.0, 0.0);
                for _ in 0..A7_REPLICATES {
                    let (a, b) = simulate_null_pair(m, pi, pj, &mut rng).unwrap();
                    let t = coefficient(&contingency(&a, &b).unwrap(), &truth);
                    sum += t;
                    sq += t * t;
                }
                let n = A7_REPLICATES as f64;
                let mean = sum / n;
                let se = ((sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt();
                let z = (mean - target).abs() / se;
                worst = worst.max(z);
                ok &= z < A7_SE;
            }
            debug_assert!((expectation(&truth) - target).abs() < 1e-15);
            points += ok as usize;
            pass &= ok;
        }
    }
    Outcome {
        id: "A7",
        title: "E[T] = p_i p_j / (p_i + p_j - p_i p_j) within 4 SE",
        pass: Some(pass),
        detail: format!("{points}/9 grid points pass at m in {{5, 50}}, {A7_REPLICATES} replicates; max |z| = {worst:.2}"),
    }
}

fn a8() -> Outcome {
    let mut parts = Vec::new();
    for form in [VarianceForm::ClosedForm, VarianceForm::PlugIn] {
        let mut cfg = null_cfg(Engine::Asymptotic);
        cfg.asymptotic_variance = form;
        let ks: Vec<String> = A1_PROBS
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let pv = null_pvalues(A1_M, p, A1_PAIRS, 100 + k as u64, &cfg).unwrap();
                let below = pv.iter().filter(|&&x| x <= 0.05).count() as f64 / pv.len() as f64;
                format!("{p}:KS {:.3}/P(p<=.05) {below:.3}", ks_distance_uniform(&pv))
            })
            .collect();
        let name = match form {
            VarianceForm::ClosedForm => "closed-form",
            VarianceForm::PlugIn => "plug-in",
        };
        parts.push(format!("{name}[{}]", ks.join(" ")));
    }
    Outcome {
        id: "A8",
        title: "asymptotic engine at m = 100 (report only)",
        pass: None,
        detail: parts.join(" "),
    }
}

fn a9() -> Outcome {
    let v = |bits: &[u8]| BinaryVector::from_u8s(bits).unwrap();
    let (zeros, ones, mixed) = (v(&[0; 7]), v(&[1; 7]), v(&[1, 0, 1, 1, 0, 0, 1]));
    let (one, zero) = (v(&[1]), v(&[0]));
    let cases = [
        (&zeros, &zeros),
        (&ones, &ones),
        (&zeros, &ones),
        (&zeros, &mixed),
        (&ones, &mixed),
        (&one, &one),
        (&one, &zero),
        (&zero, &one),
        (&zero, &zero),
    ];
    let mut failures = Vec::new();
    for engine in Engine::ALL {
        for (k, (a, b)) in cases.iter().enumerate() {
            let outcome = std::panic::catch_unwind(|| run_test(a, b, &null_cfg(engine), k as u64));
            match outcome {
                Ok(Ok(r)) if r.p_value == 1.0 && r.centered == 0.0 => {}
                other => failures.push(format!("{engine} case {k}: {:?}", other.map(|r| r.map(|r| r.p_value)))),
            }
        }
    }
    Outcome {
        id: "A9",
        title: "all-zero, all-one and length-1 inputs give p = 1, T^c = 0",
        pass: Some(failures.is_empty()),
        detail: if failures.is_empty() {
            format!("{} cases x 4 engines", cases.len())
        } else {
            failures.join("; ")
        },
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 9] = [a1, a2, a3, a4, a5, a6, a7, a8, a9];
    let mut unexpected = Vec::new();
    for run in criteria {
        let start = Instant::now();
        let o = run();
        let status = match o.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        println!(
            "{} {status} {} -- {} ({:.1}s)",
            o.id,
            o.title,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if o.pass == Some(false) && !KNOWN_RED.contains(&o.id) {
            unexpected.push(o.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("acceptance: unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
