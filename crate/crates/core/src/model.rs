//! Presence-absence vectors, their 2x2 contingency counts, and the refined
//! (centered) Jaccard/Tanimoto coefficient shared by every engine.

use std::fmt;

use crate::error::{Error, Result};

/// Presence (1) / absence (0) profile of one species over `m` units.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    bits: Vec<u8>,
}

impl BinaryVector {
    /// Builds a vector from 0/1 values, rejecting anything else.
    pub fn from_u8s(values: &[u8]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &v)) = values.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(Error::NonBinary {
                index,
                value: v.to_string(),
            });
        }
        Ok(Self {
            bits: values.to_vec(),
        })
    }

    pub fn from_bools(values: &[bool]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            bits: values.iter().map(|&b| b as u8).collect(),
        })
    }

    /// Parses strings such as `"1,0,1"`, `"1 0 1"` or `"101"`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let tokens: Vec<&str> = if trimmed.contains([',', ' ', '\t', ';']) {
            trimmed
                .split([',', ' ', '\t', ';'])
                .filter(|t| !t.is_empty())
                .collect()
        } else {
            trimmed
                .char_indices()
                .map(|(i, c)| &trimmed[i..i + c.len_utf8()])
                .collect()
        };
        let mut bits = Vec::with_capacity(tokens.len());
        for (index, tok) in tokens.iter().enumerate() {
            match *tok {
                "0" => bits.push(0),
                "1" => bits.push(1),
                other => {
                    return Err(Error::NonBinary {
                        index,
                        value: other.to_string(),
                    })
                }
            }
        }
        Self::from_u8s(&bits)
    }

    /// Wraps bits already known to be 0/1. Used by resampling and simulation.
    pub(crate) fn from_raw(bits: Vec<u8>) -> Self {
        debug_assert!(!bits.is_empty() && bits.iter().all(|&b| b <= 1));
        Self { bits }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false: construction rejects empty input.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Empirical occurrence frequency.
    pub fn occurrence(&self) -> f64 {
        self.ones() as f64 / self.len() as f64
    }

    /// All ones or all zeros.
    pub fn is_constant(&self) -> bool {
        let ones = self.ones();
        ones == 0 || ones == self.len()
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Counts of the four joint categories of a vector pair: both present (`n1`),
/// only the first (`n2`), only the second (`n3`), neither (`n4`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContingencyTable {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub n4: u32,
}

impl ContingencyTable {
    pub const fn new(n1: u32, n2: u32, n3: u32, n4: u32) -> Self {
        Self { n1, n2, n3, n4 }
    }

    pub fn from_counts(counts: [u32; 4]) -> Self {
        Self::new(counts[0], counts[1], counts[2], counts[3])
    }

    #[inline]
    pub fn counts(&self) -> [u32; 4] {
        [self.n1, self.n2, self.n3, self.n4]
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.n1 + self.n2 + self.n3 + self.n4
    }

    #[inline]
    pub fn union(&self) -> u32 {
        self.n1 + self.n2 + self.n3
    }

    /// Plug-in occurrence probabilities `((n1+n2)/m, (n1+n3)/m)`.
    #[inline]
    pub fn plug_in(&self) -> OccurrenceProbs {
        let m = self.m() as f64;
        OccurrenceProbs {
            p_i: (self.n1 + self.n2) as f64 / m,
            p_j: (self.n1 + self.n3) as f64 / m,
        }
    }

    /// Absolute deviation of the coefficient from the expectation evaluated at
    /// this table's own plug-ins. States with an empty union deviate by 0.
    #[inline]
    pub fn deviation(&self) -> f64 {
        let union = self.union();
        if union == 0 {
            return 0.0;
        }
        let t = self.n1 as f64 / union as f64;
        (t - expectation(&self.plug_in())).abs()
    }
}

/// Tabulates the joint categories of two equal-length vectors.
pub fn contingency(a: &BinaryVector, b: &BinaryVector) -> Result<ContingencyTable> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut n = [0u32; 4];
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        // 0: both, 1: a only, 2: b only, 3: neither
        n[((1 - x) << 1 | (1 - y)) as usize] += 1;
    }
    Ok(ContingencyTable::from_counts(n))
}

/// Bernoulli occurrence probabilities of a vector pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccurrenceProbs {
    pub p_i: f64,
    pub p_j: f64,
}

impl OccurrenceProbs {
    pub fn new(p_i: f64, p_j: f64) -> Result<Self> {
        let valid = |p: f64| (0.0..=1.0).contains(&p);
        if !valid(p_i) || !valid(p_j) {
            return Err(Error::InvalidConfig(format!(
                "occurrence probabilities must lie in [0, 1], got ({p_i}, {p_j})"
            )));
        }
        Ok(Self { p_i, p_j })
    }

    /// Probability that both vectors are present at a unit.
    #[inline]
    pub fn q1(&self) -> f64 {
        self.p_i * self.p_j
    }

    /// Probability that exactly one vector is present at a unit.
    #[inline]
    pub fn q2(&self) -> f64 {
        self.p_i + self.p_j - 2.0 * self.p_i * self.p_j
    }

    /// Multinomial cell probabilities in (both, i only, j only, neither) order.
    pub fn cell_probs(&self) -> [f64; 4] {
        let (pi, pj) = (self.p_i, self.p_j);
        [pi * pj, pi * (1.0 - pj), (1.0 - pi) * pj, (1.0 - pi) * (1.0 - pj)]
    }
}

/// Expected coefficient of independent vectors, `p_i p_j / (p_i + p_j - p_i p_j)`.
///
/// The denominator is evaluated as `1 - (1-p_i)(1-p_j)` so that a saturated
/// margin (`p = 1`) returns the other probability exactly. Both probabilities
/// zero gives 0, the continuous extension.
#[inline]
pub fn expectation(probs: &OccurrenceProbs) -> f64 {
    let num = probs.p_i * probs.p_j;
    if num == 0.0 {
        return 0.0;
    }
    num / (1.0 - (1.0 - probs.p_i) * (1.0 - probs.p_j))
}

/// Refined Jaccard/Tanimoto coefficient: `n1 / (n1+n2+n3)`, falling back to
/// the expectation under `probs` when the union is empty.
pub fn coefficient(table: &ContingencyTable, probs: &OccurrenceProbs) -> f64 {
    match table.union() {
        0 => expectation(probs),
        union => table.n1 as f64 / union as f64,
    }
}

/// Coefficient, its plug-in expectation, and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centered {
    pub coefficient: f64,
    pub expectation: f64,
    pub centered: f64,
}

impl Centered {
    pub fn from_table(table: &ContingencyTable) -> Self {
        let probs = table.plug_in();
        let coefficient = coefficient(table, &probs);
        let expectation = expectation(&probs);
        Self {
            coefficient,
            expectation,
            centered: coefficient - expectation,
        }
    }
}

/// Centered coefficient of a pair with plug-in occurrence probabilities.
pub fn centered_statistic(a: &BinaryVector, b: &BinaryVector) -> Result<Centered> {
    Ok(Centered::from_table(&contingency(a, b)?))
}

/// Which engine produced a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Exact,
    Asymptotic,
    Bootstrap,
    Mca,
}

impl Engine {
    pub const ALL: [Engine; 4] = [
        Engine::Exact,
        Engine::Asymptotic,
        Engine::Bootstrap,
        Engine::Mca,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Asymptotic => "asymptotic",
            Engine::Bootstrap => "bootstrap",
            Engine::Mca => "mca",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Engine::Exact),
            "asymptotic" => Ok(Engine::Asymptotic),
            "bootstrap" => Ok(Engine::Bootstrap),
            "mca" => Ok(Engine::Mca),
            other => Err(Error::InvalidConfig(format!("unknown engine '{other}'"))),
        }
    }
}

/// Engine-specific side information attached to a [`TestResult`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// Asymptotic z-score.
    pub z: Option<f64>,
    /// MCA accuracy bound.
    pub epsilon: Option<f64>,
    /// MCA upper bound `p_lower + epsilon`.
    pub p_upper: Option<f64>,
    /// Number of multinomial states evaluated (exact) or visited (MCA).
    pub states: Option<u64>,
    /// Bootstrap iterations.
    pub iterations: Option<usize>,
    /// Bootstrap exceedance count.
    pub exceedances: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub coefficient: f64,
    pub expectation: f64,
    pub centered: f64,
    pub p_value: f64,
    pub engine: Engine,
    pub diagnostics: Diagnostics,
}

impl TestResult {
    pub(crate) fn new(stat: Centered, p_value: f64, engine: Engine, diagnostics: Diagnostics) -> Self {
        Self {
            coefficient: stat.coefficient,
            expectation: stat.expectation,
            centered: stat.centered,
            p_value: p_value.clamp(0.0, 1.0),
            engine,
            diagnostics,
        }
    }
}
