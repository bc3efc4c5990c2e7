//! Named, reproducible experiment suites over kef-core: each suite turns a
//! family of identities, inequalities or constructions into a pass/fail
//! [`SuiteReport`] whose verdict is a pure function of the recorded numbers
//! (re-checkable offline). Reports serialize to JSON plus a flat CSV, and a
//! summary index maps suite name to pass/fail and max residual.
//!
//! Determinism contract: a config fully determines every reported number.
//! Cases are computed in parallel but are mutually independent and assembled
//! in case order, so the worker count never changes a single bit of the
//! deterministic portion of the report (everything except the run metadata).

pub mod continuity;
pub mod futaki;
pub mod identity;
pub mod inequality;
pub mod io;
pub mod mto;
pub mod witness;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(#[from] kef_core::error::KefError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SuiteError>;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    Identity,
    Inequality,
    Mto,
    Continuity,
    Witness,
    Futaki,
}

impl SuiteKind {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::Identity => "identity",
            SuiteKind::Inequality => "inequality",
            SuiteKind::Mto => "mto",
            SuiteKind::Continuity => "continuity",
            SuiteKind::Witness => "witness",
            SuiteKind::Futaki => "futaki",
        }
    }

    pub fn all() -> [SuiteKind; 6] {
        [
            SuiteKind::Identity,
            SuiteKind::Inequality,
            SuiteKind::Mto,
            SuiteKind::Continuity,
            SuiteKind::Witness,
            SuiteKind::Futaki,
        ]
    }

    /// The suite's tolerance table: the single place where each tolerance
    /// value lives.
    pub fn default_tolerances(&self) -> BTreeMap<String, f64> {
        let entries: &[(&str, f64)] = match self {
            SuiteKind::Identity => &[
                // sphere identity residuals (relative)
                ("sphere_identity", 1e-7),
                // toric identity residuals at the measured 64-points-per-axis
                // quadrature floor (relative)
                ("toric_identity", 1e-6),
                // mixed-discriminant polarization vs characteristic-polynomial
                ("mixed_discriminant", 1e-12),
            ],
            SuiteKind::Inequality => &[
                ("chain_margin", 1e-10),
                ("exactness", 1e-10),
                ("f_mean", 1e-10),
                // toric route: same bound at the box-quadrature floor
                ("f_mean_toric", 1e-8),
                ("jensen", 1e-10),
                ("mobius_equality", 1e-7),
                ("a_k_margin", 1e-8),
                ("ding_lower", 1e-9),
            ],
            SuiteKind::Mto => &[
                ("classical_slack", 1e-10),
                ("mobius_equality", 1e-7),
                ("generalized_slack", 1e-8),
            ],
            SuiteKind::Continuity => &[
                ("aubin_residual", 1e-8),
                ("monotone", 1e-10),
                ("e0_reconstruction", 1e-6),
                // truncated-limit tolerance for every t -> 1 extrapolation
                ("limit_chain", 2e-2),
                ("iikteq_margin", 1e-8),
            ],
            SuiteKind::Witness => &[
                // sweep must move at least this many times past its baseline
                ("growth_factor", 10.0),
                // slack allowed in the strict-monotonicity margins
                ("monotone", 0.0),
                // the b = 0 sweep point must sit at zero
                ("baseline_zero", 1e-10),
            ],
            SuiteKind::Futaki => &[("f_k", 1e-6), ("f_k_spread", 1e-8)],
        };
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub fn run(&self, config: &SuiteConfig) -> Result<SuiteReport> {
        config.validate()?;
        match self {
            SuiteKind::Identity => identity::identity_suite(config),
            SuiteKind::Inequality => inequality::inequality_suite(config),
            SuiteKind::Mto => mto::mto_suite(config),
            SuiteKind::Continuity => continuity::continuity_suite(config),
            SuiteKind::Witness => witness::witness_suite(config),
            SuiteKind::Futaki => futaki::futaki_suite(config),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSelector {
    Sphere { l: usize },
    Toric { n: usize, lbox: f64, points_per_axis: usize },
}

impl ModelSelector {
    pub fn describe(&self) -> String {
        match self {
            ModelSelector::Sphere { l } => format!("sphere L={l}"),
            ModelSelector::Toric {
                n,
                lbox,
                points_per_axis,
            } => format!("toric n={n} box=[-{lbox},{lbox}] {points_per_axis}/axis"),
        }
    }
}

/// Fully determines a suite run (bit-reproducible given the seed).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: SuiteKind,
    pub model: ModelSelector,
    /// Number of primary sampled cases (suites with fixed constructions,
    /// e.g. futaki, ignore it).
    pub samples: usize,
    pub seed: u64,
    /// Overrides of the suite's tolerance table; keys must exist there.
    pub tolerances: BTreeMap<String, f64>,
    /// 0 = available parallelism.
    pub workers: usize,
    /// Report output directory (None = no files written).
    pub output_dir: Option<String>,
}

impl SuiteConfig {
    pub fn new(suite: SuiteKind, model: ModelSelector) -> SuiteConfig {
        let samples = match suite {
            SuiteKind::Identity => match model {
                ModelSelector::Sphere { .. } => 25,
                ModelSelector::Toric { .. } => 10,
            },
            SuiteKind::Inequality => match model {
                ModelSelector::Sphere { .. } => 100,
                ModelSelector::Toric { .. } => 40,
            },
            SuiteKind::Mto => 100,
            SuiteKind::Continuity => 1,
            SuiteKind::Witness => 9,
            SuiteKind::Futaki => 6,
        };
        SuiteConfig {
            suite,
            model,
            samples,
            seed: 7,
            tolerances: BTreeMap::new(),
            workers: 0,
            output_dir: None,
        }
    }

    /// The spec-scale default model for each suite.
    pub fn default_for(suite: SuiteKind) -> SuiteConfig {
        let model = match suite {
            SuiteKind::Identity | SuiteKind::Inequality | SuiteKind::Mto => {
                ModelSelector::Sphere { l: 48 }
            }
            SuiteKind::Continuity | SuiteKind::Futaki => ModelSelector::Sphere { l: 48 },
            SuiteKind::Witness => ModelSelector::Sphere { l: 48 },
        };
        SuiteConfig::new(suite, model)
    }

    pub fn validate(&self) -> Result<()> {
        let table = self.suite.default_tolerances();
        for key in self.tolerances.keys() {
            if !table.contains_key(key) {
                return Err(SuiteError::Config(format!(
                    "unknown tolerance key `{key}` for suite `{}` (known: {})",
                    self.suite.name(),
                    table.keys().cloned().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        match self.model {
            ModelSelector::Sphere { l } => {
                if l < 8 {
                    return Err(SuiteError::Config(format!("sphere band limit {l} too small")));
                }
            }
            ModelSelector::Toric {
                n,
                lbox,
                points_per_axis,
            } => {
                if n == 0 || n > 3 {
                    return Err(SuiteError::Config(format!("toric n={n} out of 1..=3")));
                }
                if !(lbox > 0.0) || points_per_axis < 8 {
                    return Err(SuiteError::Config("toric box/resolution invalid".to_string()));
                }
            }
        }
        if self.samples == 0 {
            return Err(SuiteError::Config("samples must be positive".to_string()));
        }
        Ok(())
    }

    /// Effective tolerance: the override if present, else the table value.
    pub fn tol(&self, key: &str) -> f64 {
        if let Some(v) = self.tolerances.get(key) {
            return *v;
        }
        *self
            .suite
            .default_tolerances()
            .get(key)
            .unwrap_or_else(|| panic!("tolerance key `{key}` missing from the suite table"))
    }
}

/// One case: inputs, computed values, residuals (checked against a
/// tolerance), margins (checked for nonnegativity up to a tolerance), and
/// optional columnar series for plot emission.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CaseRecord {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub margins: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, Vec<f64>>,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl CaseRecord {
    pub fn new(name: impl Into<String>) -> CaseRecord {
        CaseRecord {
            name: name.into(),
            pass: true,
            ..CaseRecord::default()
        }
    }

    pub fn input(&mut self, key: &str, v: f64) {
        self.inputs.insert(key.to_string(), v);
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    /// Record |residual| and fail the case if it exceeds `tol`.
    pub fn residual(&mut self, key: &str, r: f64, tol: f64) {
        let r = r.abs();
        self.residuals.insert(key.to_string(), r);
        if !(r <= tol) {
            self.pass = false;
            self.failures
                .push(format!("residual {key} = {r:.3e} exceeds {tol:.1e}"));
        }
    }

    /// Record a signed margin and fail the case if it drops below `-tol`.
    pub fn margin(&mut self, key: &str, m: f64, tol: f64) {
        self.margins.insert(key.to_string(), m);
        if !(m >= -tol) {
            self.pass = false;
            self.failures
                .push(format!("margin {key} = {m:.3e} below -{tol:.1e}"));
        }
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.pass = false;
        self.failures.push(msg.into());
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub cases: usize,
    pub passed: usize,
    pub max_residual: f64,
    pub min_margin: f64,
}

/// Environment fingerprint echoed into every report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvFingerprint {
    pub package_version: String,
    pub model: String,
}

/// Run metadata excluded from the determinism contract (timing only).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub timestamp: String,
    pub wall_time_s: f64,
    pub workers_used: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub environment: EnvFingerprint,
    pub meta: RunMeta,
    pub cases: Vec<CaseRecord>,
    pub summary: SuiteSummary,
    /// True iff every case passes (pure function of `cases`).
    pub pass: bool,
}

impl SuiteReport {
    pub fn assemble(config: &SuiteConfig, cases: Vec<CaseRecord>, started: std::time::Instant) -> SuiteReport {
        let summary = SuiteSummary {
            cases: cases.len(),
            passed: cases.iter().filter(|c| c.pass).count(),
            max_residual: cases
                .iter()
                .flat_map(|c| c.residuals.values())
                .fold(0.0_f64, |a, &v| a.max(v)),
            min_margin: cases
                .iter()
                .flat_map(|c| c.margins.values())
                .fold(f64::INFINITY, |a, &v| a.min(v)),
        };
        let pass = cases.iter().all(|c| c.pass);
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            environment: EnvFingerprint {
                package_version: env!("CARGO_PKG_VERSION").to_string(),
                model: config.model.describe(),
            },
            meta: RunMeta {
                timestamp: io::utc_timestamp(),
                wall_time_s: started.elapsed().as_secs_f64(),
                workers_used: effective_workers(config.workers),
            },
            cases,
            summary,
            pass,
        }
    }

    /// The deterministic portion of the report as canonical JSON bytes:
    /// identical configs must reproduce these bytes regardless of worker
    /// count (run metadata is timing and therefore excluded).
    pub fn deterministic_bytes(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Det<'a> {
            config: &'a SuiteConfig,
            cases: &'a [CaseRecord],
            summary: &'a SuiteSummary,
            pass: bool,
        }
        serde_json::to_vec(&Det {
            config: &self.config,
            cases: &self.cases,
            summary: &self.summary,
            pass: self.pass,
        })
        .expect("report serialization cannot fail")
    }
}

pub fn effective_workers(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Run the per-case closures on a dedicated pool in case order. Each case is
/// independent and internally deterministic, so the collected vector is
/// bit-identical for every worker count.
pub fn run_cases<F>(config: &SuiteConfig, n_cases: usize, f: F) -> Result<Vec<CaseRecord>>
where
    F: Fn(usize) -> CaseRecord + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(effective_workers(config.workers))
        .build()
        .map_err(|e| SuiteError::Config(format!("thread pool: {e}")))?;
    use rayon::prelude::*;
    Ok(pool.install(|| (0..n_cases).into_par_iter().map(&f).collect()))
}
