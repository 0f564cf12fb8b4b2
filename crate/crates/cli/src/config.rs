//! Experiment configuration.
//!
//! ```json
//! {
//!   "basis": { "L": 4.0, "cutoff": 1 },
//!   "dynamics": { "nu": 1.0, "dt": 0.001, "R": null },
//!   "master_seed": 7,
//!   "output_dir": "runs/ou",
//!   "registry": "runs/registry.json",
//!   "experiment": { "kind": "ou-tails", "epsilon": 0.01, "n": 10000 }
//! }
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use snslab_core::lab::{CalibrationPlan, EventSpec, Observable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(rename = "L")]
    pub period: f64,
    pub cutoff: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    #[serde(default = "one")]
    pub nu: f64,
    pub dt: f64,
    /// Cut-off radius; absent or `null` runs the dynamics without cut-off.
    #[serde(rename = "R", default)]
    pub radius: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// Initial condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    Zero,
    /// Gaussian direction from the run's `x0` stream, rescaled to `|Ax0| = a_norm`.
    Random { a_norm: f64 },
    /// `x0 = c·h_mode` with `|Ax0| = a_norm`.
    Mode { mode: usize, a_norm: f64 },
    Coefficients { values: Vec<f64> },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Zero
    }
}

fn default_paths() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Calibrate {
        #[serde(default)]
        plan: CalibrationPlan,
    },
    Simulate {
        t: f64,
        #[serde(default)]
        x0: InitSpec,
        #[serde(default = "every_step")]
        record_every: usize,
        #[serde(default)]
        columns: Vec<usize>,
    },
    OuTails {
        epsilon: f64,
        #[serde(default)]
        k_grid: Vec<f64>,
        #[serde(default = "tail_paths")]
        n: usize,
        #[serde(default = "moment_times")]
        moment_times: Vec<f64>,
        #[serde(default = "ks_modes")]
        ks_modes: Vec<usize>,
    },
    DetBound {
        #[serde(default = "cases_200")]
        cases: usize,
        #[serde(default = "k_range")]
        k_range: (f64, f64),
        #[serde(default = "one")]
        w_scale_max: f64,
        #[serde(default = "max_epsilon")]
        max_epsilon: f64,
    },
    Blowup {
        #[serde(default)]
        x0: InitSpec,
        /// Defaults to `|Ax0| + 1`.
        #[serde(default)]
        k: Option<f64>,
        epsilons: Vec<f64>,
        #[serde(default = "default_paths")]
        n: usize,
    },
    Loglip {
        t: f64,
        #[serde(default)]
        x0: InitSpec,
        direction: InitSpec,
        #[serde(default = "loglip_scales")]
        scales: Vec<f64>,
        event: EventSpec,
        #[serde(default = "default_paths")]
        n: usize,
    },
    BelCheck {
        #[serde(default = "configs_10")]
        configs: usize,
        epsilon: f64,
        radius: f64,
        #[serde(default = "fd_delta")]
        fd_delta: f64,
        #[serde(default = "default_paths")]
        n: usize,
        /// Largest `|Ax0|` of the random starting points.
        #[serde(default = "one")]
        a_x0_max: f64,
        observables: Vec<Observable>,
        #[serde(default = "flow_cases")]
        flow_cases: usize,
        #[serde(default = "flow_t")]
        flow_t: f64,
        #[serde(default = "fd_deltas")]
        fd_deltas: Vec<f64>,
    },
    Confronto {
        #[serde(default = "configs_20")]
        configs: usize,
        epsilon: f64,
        /// Radius range the random configurations draw from.
        radius_range: (f64, f64),
        #[serde(default = "one")]
        a_x0_max: f64,
        event: EventSpec,
        #[serde(default = "default_paths")]
        n: usize,
    },
    Chapman {
        #[serde(default = "configs_10")]
        configs: usize,
        t_range: (f64, f64),
        s_range: (f64, f64),
        #[serde(default = "one")]
        a_x0_max: f64,
        events: Vec<EventSpec>,
        #[serde(default = "nested_200")]
        n_outer: usize,
        #[serde(default = "nested_200")]
        n_inner: usize,
    },
    Telescope {
        t: f64,
        #[serde(default)]
        x0: InitSpec,
        event: EventSpec,
        /// Radius pairs; `null` is the dynamics without cut-off.
        pairs: Vec<(Option<f64>, Option<f64>)>,
        #[serde(default = "pieces")]
        pieces: Vec<usize>,
        #[serde(default = "default_paths")]
        n: usize,
    },
    Martingale {
        t: f64,
        #[serde(default)]
        x0: InitSpec,
        /// Test directions `φ = h_mode`.
        modes: Vec<usize>,
        #[serde(default = "martingale_paths")]
        n: usize,
    },
}

fn every_step() -> usize {
    1
}
fn tail_paths() -> usize {
    10_000
}
fn moment_times() -> Vec<f64> {
    vec![0.05, 0.2]
}
fn ks_modes() -> Vec<usize> {
    vec![0, 1, 2]
}
fn cases_200() -> usize {
    200
}
fn k_range() -> (f64, f64) {
    (1.0, 5.0)
}
fn max_epsilon() -> f64 {
    0.1
}
fn loglip_scales() -> Vec<f64> {
    vec![0.5, 0.2, 0.1, 0.05]
}
fn configs_10() -> usize {
    10
}
fn configs_20() -> usize {
    20
}
fn fd_delta() -> f64 {
    1e-4
}
fn flow_cases() -> usize {
    100
}
fn flow_t() -> f64 {
    0.1
}
fn fd_deltas() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}
fn nested_200() -> usize {
    200
}
fn pieces() -> Vec<usize> {
    vec![4, 8, 16]
}
fn martingale_paths() -> usize {
    1000
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Calibrate { .. } => "calibrate",
            Experiment::Simulate { .. } => "simulate",
            Experiment::OuTails { .. } => "ou-tails",
            Experiment::DetBound { .. } => "det-bound",
            Experiment::Blowup { .. } => "blowup",
            Experiment::Loglip { .. } => "loglip",
            Experiment::BelCheck { .. } => "bel-check",
            Experiment::Confronto { .. } => "confronto",
            Experiment::Chapman { .. } => "chapman",
            Experiment::Telescope { .. } => "telescope",
            Experiment::Martingale { .. } => "martingale",
        }
    }

    /// Experiments that read the frozen constants.
    pub fn needs_calibration(&self) -> bool {
        matches!(
            self,
            Experiment::DetBound { .. }
                | Experiment::Blowup { .. }
                | Experiment::Loglip { .. }
                | Experiment::BelCheck { .. }
                | Experiment::Telescope { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub basis: BasisConfig,
    pub dynamics: DynamicsConfig,
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_registry")]
    pub registry: PathBuf,
    /// Pins a registry version; the newest matching one otherwise.
    #[serde(default)]
    pub calibration_version: Option<u32>,
    pub experiment: Experiment,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_registry() -> PathBuf {
    PathBuf::from("registry.json")
}

/// Invalid config, pointing at a line of the source text.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}:{line}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

/// Line of the first occurrence of `"key"` as an object key, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| {
            l.find(&needle)
                .is_some_and(|i| l[i + needle.len()..].trim_start().starts_with(':'))
        })
        .map_or(1, |i| i + 1)
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError {
            path: path.to_owned(),
            line: e.line().max(1),
            field: None,
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(field, message)| {
            let key = field.rsplit('.').next().unwrap_or(&field).to_owned();
            ConfigError {
                path: path.to_owned(),
                line: line_of(text, &key),
                message: format!("field `{field}`: {message}"),
                field: Some(field),
            }
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.display().to_string(),
            line: 0,
            field: None,
            message: format!("cannot read config: {e}"),
        })?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.output_dir = base.join(&cfg.output_dir);
        cfg.registry = base.join(&cfg.registry);
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), (String, String)> {
        let bad = |f: &str, m: &str| Err((f.to_owned(), m.to_owned()));
        let positive = |f: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                bad(f, "must be a positive finite number")
            }
        };
        positive("basis.L", self.basis.period)?;
        if self.basis.cutoff < 1 {
            return bad("basis.cutoff", "must be at least 1");
        }
        positive("dynamics.dt", self.dynamics.dt)?;
        positive("dynamics.nu", self.dynamics.nu)?;
        if let Some(r) = self.dynamics.radius {
            positive("dynamics.R", r)?;
        }
        let modes = snslab_core::spectral::StokesBasis::<f64>::new(self.basis.period, self.basis.cutoff)
            .map_err(|e| ("basis".to_owned(), e.to_string()))?
            .len();
        let mode_ok = |f: &str, m: usize| {
            if m < modes {
                Ok(())
            } else {
                Err((f.to_owned(), format!("mode {m} out of range (basis has {modes})")))
            }
        };
        let init_ok = |f: &str, x: &InitSpec| match x {
            InitSpec::Zero => Ok(()),
            InitSpec::Random { a_norm } if *a_norm >= 0.0 => Ok(()),
            InitSpec::Mode { mode, a_norm } if *a_norm >= 0.0 => mode_ok(f, *mode),
            InitSpec::Coefficients { values } if values.len() == modes => Ok(()),
            InitSpec::Coefficients { values } => Err((
                f.to_owned(),
                format!("expected {modes} coefficients, got {}", values.len()),
            )),
            _ => bad(f, "a_norm must be non-negative"),
        };
        let event_ok = |f: &str, e: &EventSpec| e.validate(modes).map_err(|m| (f.to_owned(), m));
        let count = |f: &str, n: usize, min: usize| {
            if n >= min {
                Ok(())
            } else {
                Err((f.to_owned(), format!("must be at least {min}")))
            }
        };
        let range = |f: &str, r: (f64, f64)| {
            if r.0 > 0.0 && r.1 >= r.0 && r.1.is_finite() {
                Ok(())
            } else {
                bad(f, "needs 0 < lo <= hi")
            }
        };
        match &self.experiment {
            Experiment::Calibrate { plan } => {
                count("experiment.plan.c0_samples", plan.c0_samples, 1)?;
                count("experiment.plan.tail_paths", plan.tail_paths, 10)?;
                if plan.tail_epsilons.is_empty() {
                    return bad("experiment.plan.tail_epsilons", "must not be empty");
                }
                for e in &plan.tail_epsilons {
                    positive("experiment.plan.tail_epsilons", *e)?;
                }
                positive("experiment.plan.flow_radius_min", plan.flow_radius_min)?;
            }
            Experiment::Simulate { t, x0, record_every, columns } => {
                positive("experiment.t", *t)?;
                init_ok("experiment.x0", x0)?;
                count("experiment.record_every", *record_every, 1)?;
                for c in columns {
                    mode_ok("experiment.columns", *c)?;
                }
            }
            Experiment::OuTails { epsilon, n, moment_times, ks_modes, .. } => {
                positive("experiment.epsilon", *epsilon)?;
                count("experiment.n", *n, 10)?;
                for t in moment_times {
                    positive("experiment.moment_times", *t)?;
                }
                for m in ks_modes {
                    mode_ok("experiment.ks_modes", *m)?;
                }
            }
            Experiment::DetBound { cases, k_range, w_scale_max, max_epsilon } => {
                count("experiment.cases", *cases, 1)?;
                range("experiment.k_range", *k_range)?;
                positive("experiment.w_scale_max", *w_scale_max)?;
                positive("experiment.max_epsilon", *max_epsilon)?;
            }
            Experiment::Blowup { x0, k, epsilons, n } => {
                init_ok("experiment.x0", x0)?;
                if let Some(k) = k {
                    positive("experiment.k", *k)?;
                }
                if epsilons.is_empty() {
                    return bad("experiment.epsilons", "must not be empty");
                }
                for e in epsilons {
                    positive("experiment.epsilons", *e)?;
                }
                count("experiment.n", *n, 1)?;
            }
            Experiment::Loglip { t, x0, direction, scales, event, n } => {
                positive("experiment.t", *t)?;
                init_ok("experiment.x0", x0)?;
                init_ok("experiment.direction", direction)?;
                if matches!(direction, InitSpec::Zero) {
                    return bad("experiment.direction", "must be non-zero");
                }
                if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
                    return bad("experiment.scales", "every |Ah| must lie in (0, 1]");
                }
                event_ok("experiment.event", event)?;
                count("experiment.n", *n, 2)?;
            }
            Experiment::BelCheck { configs, epsilon, radius, fd_delta, n, observables, flow_cases, flow_t, fd_deltas, .. } => {
                count("experiment.configs", *configs, 1)?;
                positive("experiment.epsilon", *epsilon)?;
                positive("experiment.radius", *radius)?;
                positive("experiment.fd_delta", *fd_delta)?;
                count("experiment.n", *n, 2)?;
                if observables.is_empty() {
                    return bad("experiment.observables", "must not be empty");
                }
                count("experiment.flow_cases", *flow_cases, 1)?;
                positive("experiment.flow_t", *flow_t)?;
                if fd_deltas.len() < 2 {
                    return bad("experiment.fd_deltas", "needs at least two step sizes");
                }
                for d in fd_deltas {
                    positive("experiment.fd_deltas", *d)?;
                }
            }
            Experiment::Confronto { configs, epsilon, radius_range, event, n, .. } => {
                count("experiment.configs", *configs, 1)?;
                positive("experiment.epsilon", *epsilon)?;
                range("experiment.radius_range", *radius_range)?;
                event_ok("experiment.event", event)?;
                count("experiment.n", *n, 2)?;
            }
            Experiment::Chapman { configs, t_range, s_range, events, n_outer, n_inner, .. } => {
                count("experiment.configs", *configs, 1)?;
                range("experiment.t_range", *t_range)?;
                if !(s_range.0 >= 0.0 && s_range.1 >= s_range.0) {
                    return bad("experiment.s_range", "needs 0 <= lo <= hi");
                }
                if events.is_empty() {
                    return bad("experiment.events", "must not be empty");
                }
                for e in events {
                    event_ok("experiment.events", e)?;
                }
                count("experiment.n_outer", *n_outer, 2)?;
                count("experiment.n_inner", *n_inner, 1)?;
            }
            Experiment::Telescope { t, x0, event, pairs, pieces, n } => {
                positive("experiment.t", *t)?;
                init_ok("experiment.x0", x0)?;
                event_ok("experiment.event", event)?;
                if pairs.is_empty() {
                    return bad("experiment.pairs", "must not be empty");
                }
                for r in pairs.iter().flat_map(|p| [p.0, p.1]).flatten() {
                    positive("experiment.pairs", r)?;
                }
                if pieces.is_empty() || pieces.contains(&0) {
                    return bad("experiment.pieces", "every N must be positive");
                }
                count("experiment.n", *n, 2)?;
            }
            Experiment::Martingale { t, x0, modes: phis, n } => {
                positive("experiment.t", *t)?;
                init_ok("experiment.x0", x0)?;
                if phis.is_empty() {
                    return bad("experiment.modes", "must not be empty");
                }
                for m in phis {
                    mode_ok("experiment.modes", *m)?;
                }
                count("experiment.n", *n, 2)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OK: &str = r#"{
  "basis": { "L": 4.0, "cutoff": 1 },
  "dynamics": { "dt": 0.001 },
  "master_seed": 3,
  "experiment": { "kind": "ou-tails", "epsilon": 0.01 }
}"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(OK, "c.json").unwrap();
        assert_eq!(c.dynamics.nu, 1.0);
        assert_eq!(c.dynamics.radius, None);
        assert_eq!(c.experiment.kind(), "ou-tails");
    }

    #[test]
    fn zero_dt_names_field_and_line() {
        let text = OK.replace("0.001", "0");
        let e = ExperimentConfig::parse(&text, "c.json").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("dynamics.dt"));
        assert_eq!(e.line, 3);
        assert!(e.to_string().starts_with("c.json:3: field `dynamics.dt`"));
    }

    #[test]
    fn unknown_field_reports_line() {
        let text = OK.replace("\"master_seed\": 3", "\"master_sed\": 3");
        let e = ExperimentConfig::parse(&text, "c.json").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("master_sed"));
    }

    #[test]
    fn mode_out_of_range() {
        let text = OK.replace(r#""epsilon": 0.01"#, r#""epsilon": 0.01, "ks_modes": [52]"#);
        let e = ExperimentConfig::parse(&text, "c.json").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("experiment.ks_modes"));
    }
}
