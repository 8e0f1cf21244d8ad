//! Experiment configuration read from a single TOML file.
//!
//! Every section has defaults except `seed`, which must come from the file
//! or `--seed`. Unknown keys are rejected so typos surface as config errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use corrlab::clt::{BernsteinSchedule, Normalization, DEFAULT_EXPONENTS, DEFAULT_T_GRID};
use corrlab::correlations::{Estimator, MIN_BUDGET};
use corrlab::regularity::{AnosovBoundConstants, AnosovBudget, BilliardBoundConstants, ClassTag};
use corrlab::transfer::{PwConstants, DEFAULT_GRID};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    /// Worker pool size; defaults to the logical core count.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub system: SystemConfig,
    #[serde(default)]
    pub observable: ObservableConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub correlations: CorrelationsConfig,
    #[serde(default)]
    pub clt: CltConfig,
    #[serde(default)]
    pub transfer: TransferConfig,
    #[serde(default)]
    pub billiard: BilliardCheckConfig,
    #[serde(default)]
    pub regularity: RegularityConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    Doubling {
        #[serde(default = "one")]
        power: u32,
    },
    Tent {
        #[serde(default = "one")]
        power: u32,
    },
    CatMap,
    Toral {
        matrix: [[i64; 2]; 2],
    },
    Piecewise {
        #[serde(default = "piecewise_name")]
        name: String,
        branches: Vec<BranchConfig>,
        #[serde(default = "one")]
        power: u32,
        sampler_bins: Option<usize>,
    },
    Billiard {
        scatterers: Vec<ScattererConfig>,
        #[serde(default = "default_cap")]
        cap: f64,
    },
}

fn one() -> u32 {
    1
}

fn piecewise_name() -> String {
    "piecewise".into()
}

fn default_cap() -> f64 {
    corrlab::billiard::DEFAULT_CAP
}

/// Either `slope`/`intercept` or the three expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub lo: f64,
    pub hi: f64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub forward: Option<String>,
    pub inverse: Option<String>,
    pub derivative: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    CosFirstCoordinate,
    Sawtooth,
    FirstCoordinate,
    FreePath,
    ReflectionAngle,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    pub kind: ObservableKind,
    /// Grid values for `tabulated`.
    #[serde(default)]
    pub values: Vec<f64>,
    /// Exact invariant mean; estimated when absent.
    pub mean: Option<f64>,
}

impl Default for ObservableConfig {
    fn default() -> Self {
        Self {
            kind: ObservableKind::CosFirstCoordinate,
            values: Vec::new(),
            mean: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub t_grid: Vec<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            a: DEFAULT_EXPONENTS.0,
            b: DEFAULT_EXPONENTS.1,
            t_grid: DEFAULT_T_GRID.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Ensemble size for correlations and block statistics.
    pub samples: usize,
    /// Starts for `Var S_p`.
    pub var_sp: usize,
    /// Pairs for dynamical Hölder fits.
    pub pair_budget: usize,
    /// Transfer-operator grid size.
    pub grid: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            samples: 100_000,
            var_sp: corrlab::clt::VAR_BUDGET,
            pair_budget: 10_000,
            grid: DEFAULT_GRID,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub billiard: BilliardBoundConstants,
    pub anosov: AnosovBoundConstants,
    pub pw: PwConstants,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub steps: usize,
    pub starts: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            starts: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationsConfig {
    pub max_lag: usize,
    pub estimator: Estimator,
    /// Green-Kubo and moment cutoff; defaults to `max_lag`.
    pub cutoff: Option<usize>,
    /// Lags used by the decay fit; defaults to `1..=max_lag`.
    pub fit_window: Option<[usize; 2]>,
}

impl Default for CorrelationsConfig {
    fn default() -> Self {
        Self {
            max_lag: 20,
            estimator: Estimator::Ensemble,
            cutoff: None,
            fit_window: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CltConfig {
    pub n: usize,
    pub samples: usize,
    pub normalization: Normalization,
    /// Green-Kubo variance; estimated from an autocorrelation when absent.
    pub sigma2: Option<f64>,
    pub gk_max_lag: usize,
    pub gk_budget: usize,
    pub bins: usize,
    /// `(n, samples)` rows for a variance-convergence table.
    pub convergence: Vec<[usize; 2]>,
}

impl Default for CltConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            samples: 5000,
            normalization: Normalization::Empirical,
            sigma2: None,
            gk_max_lag: 30,
            gk_budget: 100_000,
            bins: 40,
            convergence: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    pub ulam_bins: usize,
    pub identity_grids: Vec<usize>,
    pub ly_functions: usize,
    pub p_values: Vec<usize>,
    /// `s` in the block factor `g = exp(i s f)`.
    pub phase_scale: f64,
    pub q_max: usize,
    /// Profile entries at or below this are grid round-off.
    pub fit_floor: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            ulam_bins: 1024,
            identity_grids: vec![1 << 10, 1 << 11, 1 << 12],
            ly_functions: 20,
            p_values: vec![10, 39, 251],
            phase_scale: 0.05,
            q_max: 14,
            fit_floor: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilliardCheckConfig {
    pub samples: usize,
    pub separation_cap: usize,
    pub k0: u32,
    pub log10_distance: [f64; 2],
}

impl Default for BilliardCheckConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            separation_cap: 60,
            k0: 2,
            log10_distance: [-8.0, -3.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub k: f64,
    pub theta: f64,
    pub sup: f64,
    #[serde(default = "both")]
    pub class: ClassTag,
}

fn both() -> ClassTag {
    ClassTag::Both
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularityConfig {
    pub f: BudgetConfig,
    pub g: BudgetConfig,
    pub n_max: u32,
    /// Factor counts of the multi-time products.
    pub r: u32,
    pub k: u32,
    pub anosov_f: Option<AnosovBudget>,
    pub anosov_g: Option<AnosovBudget>,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        let b = BudgetConfig {
            k: 1.0,
            theta: 0.5,
            sup: 1.0,
            class: ClassTag::Both,
        };
        Self {
            f: b,
            g: b,
            n_max: 20,
            r: 3,
            k: 3,
            anosov_f: None,
            anosov_g: None,
        }
    }
}

fn field(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: Some(field.into()),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config {
            field: None,
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_toml(&text)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| field("seed", "no seed in the config or on the command line"))
    }

    /// Checks everything that can be checked without running an experiment.
    pub fn validate(&self) -> Result<(), CliError> {
        self.seed()?;
        if self.workers == Some(0) {
            return Err(field("workers", "must be >= 1"));
        }
        let s = &self.schedule;
        BernsteinSchedule::new(s.n, s.a, s.b).map_err(|e| {
            let f = if !(s.a > s.b) || !(s.a < 0.5) {
                "schedule.a"
            } else if !(s.b > 0.0) {
                "schedule.b"
            } else {
                "schedule.n"
            };
            field(f, e.to_string())
        })?;
        if s.t_grid.iter().any(|t| !t.is_finite()) || s.t_grid.is_empty() {
            return Err(field("schedule.t_grid", "needs at least one finite t"));
        }
        let b = &self.budgets;
        for (name, v) in [
            ("budgets.samples", b.samples),
            ("budgets.var_sp", b.var_sp),
            ("budgets.pair_budget", b.pair_budget),
            ("clt.samples", self.clt.samples),
            ("clt.gk_budget", self.clt.gk_budget),
        ] {
            if v < MIN_BUDGET {
                return Err(field(name, format!("{v} is below the minimum {MIN_BUDGET}")));
            }
        }
        if b.grid < 16 {
            return Err(field("budgets.grid", "grid needs at least 16 points"));
        }
        if self.clt.n == 0 {
            return Err(field("clt.n", "must be >= 1"));
        }
        if self.clt.bins < 2 {
            return Err(field("clt.bins", "histograms need at least 2 bins"));
        }
        if let Some(s2) = self.clt.sigma2 {
            if !(s2 >= 0.0) {
                return Err(field("clt.sigma2", "must be >= 0"));
            }
        }
        for (i, row) in self.clt.convergence.iter().enumerate() {
            if row[0] == 0 || row[1] < MIN_BUDGET {
                return Err(field(
                    &format!("clt.convergence[{i}]"),
                    format!("need n >= 1 and at least {MIN_BUDGET} samples"),
                ));
            }
        }
        if self.simulate.steps == 0 || self.simulate.starts == 0 {
            return Err(field("simulate", "steps and starts must be >= 1"));
        }
        if let Some(c) = self.correlations.cutoff {
            if c > self.correlations.max_lag {
                return Err(field("correlations.cutoff", "must not exceed max_lag"));
            }
        }
        if let Some([lo, hi]) = self.correlations.fit_window {
            if lo > hi || hi > self.correlations.max_lag {
                return Err(field("correlations.fit_window", "must lie within 0..=max_lag"));
            }
        }
        if self.observable.kind == ObservableKind::Tabulated && self.observable.values.is_empty() {
            return Err(field("observable.values", "tabulated observables need values"));
        }
        let t = &self.transfer;
        if t.ulam_bins < 2 || t.identity_grids.iter().any(|&g| g < 16) {
            return Err(field("transfer", "grids need at least 16 points and 2 Ulam bins"));
        }
        if t.p_values.contains(&0) {
            return Err(field("transfer.p_values", "block lengths must be >= 1"));
        }
        self.constants
            .billiard
            .validate()
            .map_err(|e| field("constants.billiard", e.to_string()))?;
        self.constants
            .anosov
            .validate()
            .map_err(|e| field("constants.anosov", e.to_string()))?;
        self.constants
            .pw
            .validate()
            .map_err(|e| field("constants.pw", e.to_string()))?;
        let [lo, hi] = self.billiard.log10_distance;
        if !(lo < hi && hi < 0.0) {
            return Err(field("billiard.log10_distance", "need lo < hi < 0"));
        }
        if self.billiard.k0 == 0 {
            return Err(field("billiard.k0", "must be >= 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring where outputs go and
    /// how many workers run.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.workers = None;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "seed = 7\n[system]\nkind = \"doubling\"\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.system, SystemConfig::Doubling { power: 1 });
        assert_eq!(c.schedule.n, 10_000);
        assert_eq!(c.observable.kind, ObservableKind::CosFirstCoordinate);
    }

    #[test]
    fn schedule_order_points_at_a() {
        let c = ExperimentConfig::from_toml(&format!("{MINIMAL}[schedule]\na = 0.2\nb = 0.3\n"))
            .unwrap();
        match c.validate() {
            Err(CliError::Config { field, .. }) => assert_eq!(field.as_deref(), Some("schedule.a")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_missing_seed_are_rejected() {
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}bogus = 1\n")).is_err());
        let c = ExperimentConfig::from_toml("[system]\nkind = \"cat-map\"\n").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config { .. })));
    }

    #[test]
    fn hash_ignores_out_and_workers() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut b = a.clone();
        b.out = Some("elsewhere".into());
        b.workers = Some(3);
        assert_eq!(a.hash(), b.hash());
        b.seed = Some(8);
        assert_ne!(a.hash(), b.hash());
    }
}
