//! One entry point over the four p-value engines.

use crate::asymptotic::{asymptotic_pvalue_with, VarianceForm};
use crate::bootstrap::{bootstrap_pvalue, BootstrapConfig};
use crate::error::{Error, Result};
use crate::exact::{exact_pvalue_with, ExactConfig, DEFAULT_EXACT_CAP, REGION_TOLERANCE};
use crate::mca::{mca_pvalue, McaConfig, DEFAULT_EPSILON};
use crate::model::{BinaryVector, Engine, TestResult};
use crate::rng::derive_seed;

/// Per-engine tuning shared by the library front ends and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub engine: Engine,
    /// MCA accuracy.
    pub epsilon: f64,
    /// MCA: report `p_L + eps` instead of `p_L`.
    pub report_upper: bool,
    /// Bootstrap iterations; `None` means `5 m`.
    pub iterations: Option<usize>,
    /// Master seed; each test derives its own stream from it.
    pub seed: u64,
    pub add_one_smoothing: bool,
    /// Largest `m` the exact engine accepts.
    pub exact_cap: usize,
    pub asymptotic_variance: VarianceForm,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Mca,
            epsilon: DEFAULT_EPSILON,
            report_upper: false,
            iterations: None,
            seed: 0,
            add_one_smoothing: false,
            exact_cap: DEFAULT_EXACT_CAP,
            asymptotic_variance: VarianceForm::ClosedForm,
        }
    }
}

impl EngineConfig {
    pub fn new(engine: Engine) -> Self {
        Self {
            engine,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.engine {
            Engine::Mca => self.mca().validate(),
            Engine::Bootstrap if self.iterations == Some(0) => {
                Err(Error::InvalidConfig("bootstrap iterations must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn mca(&self) -> McaConfig {
        McaConfig {
            epsilon: self.epsilon,
            report_upper: self.report_upper,
        }
    }

    /// Bootstrap settings for test number `index` of a batch.
    pub fn bootstrap(&self, index: u64) -> BootstrapConfig {
        BootstrapConfig {
            iterations: self.iterations,
            seed: derive_seed(self.seed, index),
            add_one_smoothing: self.add_one_smoothing,
        }
    }

    pub fn exact(&self) -> ExactConfig {
        ExactConfig {
            max_m: self.exact_cap,
            tolerance: REGION_TOLERANCE,
        }
    }
}

/// Tests one pair with the configured engine. `index` identifies the test
/// within a batch and selects its random stream.
pub fn run_test(a: &BinaryVector, b: &BinaryVector, cfg: &EngineConfig, index: u64) -> Result<TestResult> {
    match cfg.engine {
        Engine::Exact => exact_pvalue_with(a, b, &cfg.exact()),
        Engine::Asymptotic => asymptotic_pvalue_with(a, b, cfg.asymptotic_variance),
        Engine::Bootstrap => bootstrap_pvalue(a, b, &cfg.bootstrap(index)),
        Engine::Mca => mca_pvalue(a, b, &cfg.mca()),
    }
}
