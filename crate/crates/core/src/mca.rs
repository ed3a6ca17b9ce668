//! Measure concentration: p-value bounds from a high-probability subset of
//! the multinomial states.
//!
//! Starting at the mode, states are taken in decreasing probability until the
//! visited set `I_eps` holds mass `>= 1 - eps`. The region mass inside
//! `I_eps` is a lower bound `p_L` on the exact p-value, and `p_L + eps` an
//! upper bound.
//!
//! The multinomial is unimodal in the strong (M-concave) sense, so
//! best-first growth over unit moves and a sweep of superlevel sets pick the
//! same states; the sweep is used because it costs about as much per state as
//! plain enumeration.

use crate::error::{Error, Result};
use crate::exact::REGION_TOLERANCE;
use crate::model::{contingency, BinaryVector, Centered, Diagnostics, Engine, TestResult};
use crate::multinomial::{MultinomialMeasure, MultinomialState};
use crate::numeric::KahanSum;

pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McaConfig {
    pub epsilon: f64,
    /// Report the upper bound `p_L + eps` as the p-value instead of `p_L`.
    pub report_upper: bool,
}

impl Default for McaConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            report_upper: false,
        }
    }
}

impl McaConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon > 0.0 && self.epsilon < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )))
        }
    }
}

/// States one unit move away: decrement a positive cell, increment another.
pub fn neighbors(s: &MultinomialState) -> Vec<MultinomialState> {
    let counts = s.counts();
    let mut out = Vec::with_capacity(12);
    for from in 0..4 {
        if counts[from] == 0 {
            continue;
        }
        for to in 0..4 {
            if to != from {
                let mut c = counts;
                c[from] -= 1;
                c[to] += 1;
                out.push(MultinomialState::from_counts(c));
            }
        }
    }
    out
}

/// Rounds `m * cells` to integers summing to `m` (largest remainder).
fn start_state(m: u32, cells: [f64; 4]) -> [u32; 4] {
    let scaled = cells.map(|q| q * m as f64);
    let mut counts = scaled.map(|x| x.floor() as u32);
    let assigned: u32 = counts.iter().sum();
    if assigned > m {
        // only reachable with cell probabilities summing above 1 by rounding
        let k = (0..4).max_by(|&a, &b| counts[a].cmp(&counts[b])).unwrap();
        counts[k] -= assigned - m;
        return counts;
    }
    let mut order: Vec<usize> = (0..4).filter(|&k| cells[k] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for k in order.iter().cycle().take((m - assigned) as usize) {
        counts[*k] += 1;
    }
    counts
}

/// Mode of `Multi(m, cells)` by steepest-ascent hill climbing from the
/// rounded mean. Each step evaluates every neighbour that keeps
/// zero-probability cells empty and moves to the best one, ties going to the
/// lexicographically smallest `(n1, n2, n3)`.
pub fn find_mode(m: u32, cells: [f64; 4]) -> MultinomialState {
    let measure = MultinomialMeasure::new(m, cells);
    mode_of(&measure)
}

fn mode_of(measure: &MultinomialMeasure) -> MultinomialState {
    let cells = measure.cells();
    let mut current = MultinomialState::from_counts(start_state(measure.m(), cells));
    let mut current_lp = measure.log_pmf(&current);
    loop {
        let best = neighbors(&current)
            .into_iter()
            .filter(|s| admissible(s, cells))
            .map(|s| (measure.log_pmf(&s), s))
            .max_by(|(la, sa), (lb, sb)| la.total_cmp(lb).then_with(|| sb.cmp(sa)));
        match best {
            Some((lp, s)) if lp > current_lp => {
                current = s;
                current_lp = lp;
            }
            _ => return current,
        }
    }
}

#[inline]
fn admissible(s: &MultinomialState, cells: [f64; 4]) -> bool {
    s.counts().iter().zip(cells).all(|(&n, q)| n == 0 || q > 0.0)
}

#[inline(always)]
fn pack_counts(n: [u32; 4]) -> u64 {
    (n[0] as u64) << 42 | (n[1] as u64) << 21 | n[2] as u64
}

/// Sort key: decreasing log-probability, then increasing state. The packed
/// key orders like the state itself.
#[inline(always)]
fn visit_order(lp: f64, n: [u32; 4]) -> u128 {
    let bits = lp.to_bits();
    let ascending = if bits >> 63 == 1 { !bits } else { bits | 1 << 63 };
    ((!ascending) as u128) << 64 | pack_counts(n) as u128
}

/// Width, in log-probability, of the bands mass is binned into.
const BAND: f64 = 1.0 / 32.0;

/// Log-probability depth scanned beyond `ln(1/eps)` below the mode. Under a
/// Gaussian approximation the mass deeper than that is a small fraction of
/// `eps`; a deeper scan is retried when it is not.
const DEPTH_MARGIN: f64 = 5.0;

/// Number of states with zero counts in zero-probability cells.
fn admissible_states(m: u32, cells: [f64; 4]) -> u128 {
    let k = cells.iter().filter(|&&q| q > 0.0).count() as u128;
    let m = m as u128;
    // C(m + k - 1, k - 1)
    (1..k).fold(1, |acc, i| acc * (m + i) / i)
}

/// Lines of states with fixed `(n1, n2)`, indexed by `n3`.
struct Lines<'a> {
    measure: &'a MultinomialMeasure,
    m: u32,
    /// Conditional share of cell 3 within cells 3 and 4.
    share: f64,
}

impl<'a> Lines<'a> {
    fn new(measure: &'a MultinomialMeasure) -> Self {
        let cells = measure.cells();
        let pair = cells[2] + cells[3];
        Self {
            measure,
            m: measure.m(),
            share: if pair > 0.0 { cells[2] / pair } else { 0.0 },
        }
    }

    #[inline(always)]
    fn state(&self, n1: u32, n2: u32, n3: u32) -> [u32; 4] {
        [n1, n2, n3, self.m - n1 - n2 - n3]
    }

    #[inline(always)]
    fn log_pmf(&self, n: [u32; 4]) -> f64 {
        self.measure.log_pmf_counts(n[0], n[1], n[2], n[3])
    }

    /// Argmax and maximum of the line: the binomial mode, polished by a
    /// local climb against rounding.
    fn line_max(&self, n1: u32, n2: u32) -> (u32, f64) {
        let rest = self.m - n1 - n2;
        let mut k = (((rest + 1) as f64 * self.share).floor() as u32).min(rest);
        let mut best = self.log_pmf(self.state(n1, n2, k));
        while k < rest {
            let lp = self.log_pmf(self.state(n1, n2, k + 1));
            if lp <= best {
                break;
            }
            (k, best) = (k + 1, lp);
        }
        while k > 0 {
            let lp = self.log_pmf(self.state(n1, n2, k - 1));
            if lp <= best {
                break;
            }
            (k, best) = (k - 1, lp);
        }
        (k, best)
    }

    /// Argmax over `n2` of the line maxima in row `n1`, climbing from `hint`.
    fn row_max(&self, n1: u32, hint: u32) -> (u32, f64) {
        let top = self.m - n1;
        let mut j = hint.min(top);
        let mut best = self.line_max(n1, j).1;
        if best == f64::NEG_INFINITY {
            // off the admissible face; search the row directly
            return (0..=top)
                .map(|j| (j, self.line_max(n1, j).1))
                .fold((j, best), |acc, x| if x.1 > acc.1 { x } else { acc });
        }
        while j < top {
            let lp = self.line_max(n1, j + 1).1;
            if lp <= best {
                break;
            }
            (j, best) = (j + 1, lp);
        }
        while j > 0 {
            let lp = self.line_max(n1, j - 1).1;
            if lp <= best {
                break;
            }
            (j, best) = (j - 1, lp);
        }
        (j, best)
    }

    /// Calls `f` on every state of line `(n1, n2)` with log-pmf `>= floor`.
    #[inline]
    fn scan_line<F: FnMut([u32; 4], f64)>(&self, n1: u32, n2: u32, floor: f64, f: &mut F) {
        let (k, best) = self.line_max(n1, n2);
        if best < floor {
            return;
        }
        f(self.state(n1, n2, k), best);
        for n3 in (0..k).rev() {
            let n = self.state(n1, n2, n3);
            let lp = self.log_pmf(n);
            if lp < floor {
                break;
            }
            f(n, lp);
        }
        for n3 in k + 1..=self.m - n1 - n2 {
            let n = self.state(n1, n2, n3);
            let lp = self.log_pmf(n);
            if lp < floor {
                break;
            }
            f(n, lp);
        }
    }

    /// Calls `f` on every state of row `n1` with log-pmf `>= floor`; returns
    /// the row's argmax `n2`, or `None` when the row has no such state.
    fn scan_row<F: FnMut([u32; 4], f64)>(&self, n1: u32, hint: u32, floor: f64, f: &mut F) -> Option<u32> {
        let (j, best) = self.row_max(n1, hint);
        if best < floor {
            return None;
        }
        self.scan_line(n1, j, floor, f);
        for n2 in (0..j).rev() {
            if self.line_max(n1, n2).1 < floor {
                break;
            }
            self.scan_line(n1, n2, floor, f);
        }
        for n2 in j + 1..=self.m - n1 {
            if self.line_max(n1, n2).1 < floor {
                break;
            }
            self.scan_line(n1, n2, floor, f);
        }
        Some(j)
    }
}

/// Calls `f(counts, log_pmf)` on every state with `log_pmf >= floor`, in a
/// fixed order.
///
/// The log-pmf of a multinomial is M-concave. Along each `n3` line its
/// superlevel set is an interval, the line maxima are concave in `n2`, and
/// the row maxima concave in `n1`, so every level is walked outwards from its
/// optimum and stops at the first miss.
fn scan_superlevel<F: FnMut([u32; 4], f64)>(measure: &MultinomialMeasure, mode: &MultinomialState, floor: f64, mut f: F) {
    let lines = Lines::new(measure);
    let Some(centre) = lines.scan_row(mode.n1, mode.n2, floor, &mut f) else {
        return;
    };
    let mut hint = centre;
    for n1 in (0..mode.n1).rev() {
        match lines.scan_row(n1, hint, floor, &mut f) {
            Some(j) => hint = j,
            None => break,
        }
    }
    hint = centre;
    for n1 in mode.n1 + 1..=measure.m() {
        match lines.scan_row(n1, hint, floor, &mut f) {
            Some(j) => hint = j,
            None => break,
        }
    }
}

/// Where best-first expansion stops, with the mass it has gathered.
struct Cutoff {
    /// Bands below `band` are wholly inside `I_eps`.
    band: usize,
    /// Last state of `band` inside `I_eps`, as a [`visit_order`] key.
    last: u128,
    depth: f64,
    top: f64,
    mode: MultinomialState,
    mass: f64,
    region: f64,
    visited: u64,
}

impl Cutoff {
    #[inline(always)]
    fn band_of(&self, lp: f64) -> usize {
        band_index(self.top, lp, self.depth)
    }

    #[inline(always)]
    fn contains(&self, n: [u32; 4], lp: f64) -> bool {
        let b = self.band_of(lp);
        b < self.band || (b == self.band && visit_order(lp, n) <= self.last)
    }
}

#[inline(always)]
fn band_index(top: f64, lp: f64, depth: f64) -> usize {
    (((top - lp).max(0.0)).min(depth) / BAND) as usize
}

/// Finds `I_eps`, the smallest prefix of the states ordered by decreasing
/// probability (ties to the smaller state) with mass `>= 1 - eps`, and the
/// mass of the states in it for which `in_region` holds.
///
/// A first scan bins mass by log-probability band; the band where the
/// cumulative mass crosses `1 - eps` is then rescanned and sorted.
fn cutoff<P: Fn([u32; 4]) -> bool>(measure: &MultinomialMeasure, epsilon: f64, in_region: P) -> Cutoff {
    let target = 1.0 - epsilon;
    let mode = mode_of(measure);
    let top = measure.log_pmf(&mode);
    let admissible = admissible_states(measure.m(), measure.cells());
    let mut depth = (1.0 / epsilon).ln() + DEPTH_MARGIN;
    loop {
        let floor = top - depth;
        let bands = band_index(top, floor, depth) + 1;
        let mut mass = vec![KahanSum::new(); bands];
        let mut region = vec![KahanSum::new(); bands];
        let mut counts = vec![0u64; bands];
        scan_superlevel(measure, &mode, floor, |n, lp| {
            let b = band_index(top, lp, depth);
            let p = lp.exp();
            mass[b].add(p);
            counts[b] += 1;
            if in_region(n) {
                region[b].add(p);
            }
        });
        let scanned: u64 = counts.iter().sum();

        let mut cum = KahanSum::new();
        let mut cum_region = KahanSum::new();
        let mut visited = 0u64;
        for b in 0..bands {
            let mut with = cum;
            with.add(mass[b].value());
            if with.value() < target {
                cum = with;
                cum_region.add(region[b].value());
                visited += counts[b];
                continue;
            }
            // crossing band: walk it in visiting order
            let mut members = Vec::with_capacity(counts[b] as usize);
            scan_superlevel(measure, &mode, floor, |n, lp| {
                if band_index(top, lp, depth) == b {
                    members.push((visit_order(lp, n), lp, in_region(n)));
                }
            });
            members.sort_unstable_by_key(|x| x.0);
            let mut last = 0;
            for &(key, lp, inside) in &members {
                let p = lp.exp();
                cum.add(p);
                if inside {
                    cum_region.add(p);
                }
                visited += 1;
                last = key;
                if cum.value() >= target {
                    break;
                }
            }
            if cum.value() >= target || b + 1 == bands {
                return Cutoff {
                    band: b,
                    last,
                    depth,
                    top,
                    mode,
                    mass: cum.value(),
                    region: cum_region.value(),
                    visited,
                };
            }
        }
        if scanned as u128 >= admissible {
            // every state is in; `1 - eps` is out of reach by rounding
            return Cutoff {
                band: bands,
                last: 0,
                depth,
                top,
                mode,
                mass: cum.value(),
                region: cum_region.value(),
                visited,
            };
        }
        depth *= 2.0;
    }
}

/// Summary of one expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    /// Probability of the visited set.
    pub mass: f64,
    pub visited: u64,
}

/// Collects `I_eps`: the states in decreasing order of probability (ties to
/// the smaller state) up to the first prefix with mass `>= 1 - eps`. Calls
/// `visit(state, probability)` once per member, in scan order rather than
/// probability order.
pub fn expand<F>(measure: &MultinomialMeasure, epsilon: f64, mut visit: F) -> Expansion
where
    F: FnMut(&MultinomialState, f64),
{
    let cut = cutoff(measure, epsilon, |_| false);
    scan_superlevel(measure, &cut.mode, cut.top - cut.depth, |n, lp| {
        if cut.contains(n, lp) {
            visit(&MultinomialState::from_counts(n), lp.exp());
        }
    });
    Expansion {
        mass: cut.mass,
        visited: cut.visited,
    }
}

/// Lower/upper p-value bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McaBounds {
    pub lower: f64,
    pub upper: f64,
    pub mass: f64,
    pub visited: u64,
}

/// Region mass within `I_eps` for threshold `observed_abs_centered`.
pub fn mca_bounds(measure: &MultinomialMeasure, observed_abs_centered: f64, epsilon: f64) -> McaBounds {
    let threshold = observed_abs_centered - REGION_TOLERANCE;
    let cut = cutoff(measure, epsilon, |n| {
        MultinomialState::from_counts(n).deviation() >= threshold
    });
    let lower = cut.region.clamp(0.0, 1.0);
    McaBounds {
        lower,
        upper: (lower + epsilon).min(1.0),
        mass: cut.mass,
        visited: cut.visited,
    }
}

pub fn mca_pvalue(a: &BinaryVector, b: &BinaryVector, cfg: &McaConfig) -> Result<TestResult> {
    cfg.validate()?;
    let table = contingency(a, b)?;
    let stat = Centered::from_table(&table);
    let observed = stat.centered.abs();

    if observed <= REGION_TOLERANCE {
        let diagnostics = Diagnostics {
            epsilon: Some(cfg.epsilon),
            p_upper: Some(1.0),
            states: Some(0),
            ..Diagnostics::default()
        };
        return Ok(TestResult::new(stat, 1.0, Engine::Mca, diagnostics));
    }

    let measure = MultinomialMeasure::from_probs(table.m(), &table.plug_in());
    let bounds = mca_bounds(&measure, observed, cfg.epsilon);
    let diagnostics = Diagnostics {
        epsilon: Some(cfg.epsilon),
        p_upper: Some(bounds.upper),
        states: Some(bounds.visited),
        ..Diagnostics::default()
    };
    let p = if cfg.report_upper { bounds.upper } else { bounds.lower };
    Ok(TestResult::new(stat, p, Engine::Mca, diagnostics))
}
