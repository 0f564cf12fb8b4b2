//! Executes one configured experiment and writes its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use snslab_core::dynamics::{martingale_residual, simulate, CutoffSpec};
use snslab_core::io::{tail_table, trajectory_table, Cell, Table, TrajectorySidecar};
use snslab_core::lab::*;
use snslab_core::noise::{Recording, TailStatus};
use snslab_core::rng::{standard_normal, RNG_ALGORITHM, RNG_VERSION};
use snslab_core::StreamId;

use crate::config::{Experiment, ExperimentConfig, InitSpec};
use crate::registry::{Registry, RegistryEntry, Setup};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Runs with nothing to verify.
    None,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("config is for `{found}` but the subcommand is `{expected}`")]
    WrongExperiment { expected: String, found: String },
    #[error(
        "no calibration for this basis, nu and dt in {0}; run `snslab calibrate` with the same basis and dynamics first"
    )]
    MissingCalibration(String),
    #[error(transparent)]
    Registry(#[from] crate::registry::RegistryError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub verdict: Verdict,
    pub output_dir: PathBuf,
}

struct Outcome {
    verdict: Verdict,
    result: Value,
    table: Table,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the compact JSON of `value`.
pub fn config_hash(value: &Value) -> String {
    hex(&Sha256::digest(value.to_string().as_bytes()))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), RunError> {
    let body = serde_json::to_string_pretty(v).expect("artifact serializes") + "\n";
    std::fs::write(path, body).map_err(io_err(path))
}

/// Loads `config_path`, runs `subcommand` on it and writes
/// `manifest.json`, `result.json` and `data.csv`.
pub fn run(subcommand: &str, config_path: &Path, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let started = Instant::now();
    let mut cfg = ExperimentConfig::load(config_path)?;
    if cfg.experiment.kind() != subcommand {
        return Err(RunError::WrongExperiment {
            expected: subcommand.to_owned(),
            found: cfg.experiment.kind().to_owned(),
        });
    }
    if let Some(seed) = opts.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = out.clone();
    }
    let echo = serde_json::to_value(&cfg).expect("config serializes");
    let mut hashed = echo.clone();
    // Paths do not affect any output byte.
    if let Some(o) = hashed.as_object_mut() {
        o.remove("output_dir");
        o.remove("registry");
    }
    let hash = config_hash(&hashed);

    let model = Model::<f64>::new(cfg.basis.period, cfg.basis.cutoff, cfg.dynamics.nu, cfg.dynamics.dt)?;
    let mut registry = Registry::open(&cfg.registry)?;
    let setup = Setup {
        basis_fingerprint: model.basis.metadata().fingerprint(),
        nu: cfg.dynamics.nu,
        dt: cfg.dynamics.dt,
    };
    let entry: Option<RegistryEntry> = if cfg.experiment.needs_calibration() {
        Some(
            registry
                .lookup(&setup, cfg.calibration_version)
                .cloned()
                .ok_or_else(|| RunError::MissingCalibration(cfg.registry.display().to_string()))?,
        )
    } else {
        None
    };

    let jobs = opts.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let stream = StreamId::root(cfg.master_seed);
    let mut outcome = pool.install(|| execute(&cfg, &model, entry.as_ref().map(|e| &e.constants), &stream))?;

    let mut calibration = entry.as_ref().map(|e| json!({ "version": e.version, "config_hash": e.config_hash, "constants": e.constants }));
    if let Experiment::Calibrate { .. } = cfg.experiment {
        let constants = serde_json::from_value(outcome.result["constants"].clone()).expect("round trip");
        let added = registry.append(constants, hash.clone(), CODE_VERSION.to_owned())?;
        outcome.result["registry_version"] = json!(added.version);
        calibration = Some(json!({ "version": added.version, "config_hash": added.config_hash, "constants": added.constants }));
    }

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let data = dir.join("data.csv");
    outcome.table.write_file(&data).map_err(io_err(&data))?;
    let mut result = json!({
        "subcommand": subcommand,
        "verdict": outcome.verdict,
        "master_seed": cfg.master_seed,
        "config_hash": hash,
    });
    result["report"] = outcome.result;
    write_json(&dir.join("result.json"), &result)?;
    let manifest = json!({
        "tool": "snslab",
        "code_version": CODE_VERSION,
        "rng": { "algorithm": RNG_ALGORITHM, "version": RNG_VERSION },
        "subcommand": subcommand,
        "config": echo,
        "config_hash": hash,
        "master_seed": cfg.master_seed,
        "jobs": pool.current_num_threads(),
        "registry": cfg.registry.display().to_string(),
        "calibration": calibration,
        "artifacts": ["manifest.json", "result.json", "data.csv"],
        "verdict": outcome.verdict,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(RunSummary {
        verdict: outcome.verdict,
        output_dir: dir.clone(),
    })
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn init(model: &Model<f64>, spec: &InitSpec, stream: &StreamId) -> Vec<f64> {
    match spec {
        InitSpec::Zero => model.zeros(),
        InitSpec::Random { a_norm } => random_field(model, &mut stream.rng(), *a_norm),
        InitSpec::Mode { mode, a_norm } => {
            let mut x = model.zeros();
            x[*mode] = 1.0;
            model.with_a_norm(&x, *a_norm)
        }
        InitSpec::Coefficients { values } => values.clone(),
    }
}

fn random_field(model: &Model<f64>, rng: &mut impl Rng, a_norm: f64) -> Vec<f64> {
    let g: Vec<f64> = (0..model.modes()).map(|_| standard_normal(rng)).collect();
    model.with_a_norm(&g, a_norm)
}

/// `ceil(0.9 n)`.
fn nine_in_ten(n: usize) -> usize {
    (9 * n).div_ceil(10)
}

/// Uniform draw from `[lo, hi]` rounded down to the time grid, at least one step.
fn grid_time(rng: &mut impl Rng, range: (f64, f64), dt: f64) -> f64 {
    let t = if range.1 > range.0 { rng.random_range(range.0..=range.1) } else { range.0 };
    (t / dt).floor().max(1.0) * dt
}

fn execute(
    cfg: &ExperimentConfig,
    model: &Model<f64>,
    frozen: Option<&FrozenConstants>,
    stream: &StreamId,
) -> Result<Outcome, RunError> {
    let frozen = || frozen.expect("calibration checked by caller");
    let cutoff = cfg.dynamics.radius.map(CutoffSpec::new);
    let dt = cfg.dynamics.dt;
    let x0_stream = stream.named("x0");
    Ok(match &cfg.experiment {
        Experiment::Calibrate { plan } => {
            let (constants, fit) = calibrate(model, plan, stream)?;
            Outcome {
                verdict: Verdict::None,
                result: json!({ "constants": constants, "tail_fit": fit }),
                table: tail_table(&fit),
            }
        }
        Experiment::Simulate { t, x0, record_every, columns } => {
            let x = init(model, x0, &x0_stream);
            let f = model.forcing(model.steps(*t)?, &stream.named("paths"));
            let traj = simulate(&model.basis, &x, &f, cutoff.as_ref(), &Recording::Every(*record_every));
            let cols: Vec<usize> = if columns.is_empty() { (0..model.modes().min(6)).collect() } else { columns.clone() };
            Outcome {
                verdict: Verdict::None,
                result: json!({
                    "sidecar": TrajectorySidecar::new(&model.basis, &traj, cfg.master_seed),
                    "final_a_norm": traj.a_norm.last(),
                    "sup_a_norm": traj.sup_a.last(),
                    "blow_up_time": traj.blow_up,
                }),
                table: trajectory_table(&traj, &cols),
            }
        }
        Experiment::OuTails { epsilon, k_grid, n, moment_times, ks_modes } => {
            let (fit, ks) = ou_tail_experiment(model, *epsilon, k_grid, *n, &stream.named("tail"))?;
            let moments = ou_moment_check(model, moment_times, ks_modes, *n, &stream.named("moments"))?;
            let fit_ok = fit.status == TailStatus::Fitted
                && fit.r_squared.is_some_and(|r| r >= 0.95)
                && fit.eta_hat.is_some_and(|e| e > 0.0);
            let moments_ok = moments.iter().all(|m| m.z.abs() <= 3.0);
            let ks_ok = moments.iter().flat_map(|m| &m.modes).all(|c| c.ks_p_value >= 0.01);
            Outcome {
                verdict: verdict(fit_ok && moments_ok && ks_ok),
                result: json!({
                    "tail_fit": fit, "k_grid": ks, "moments": moments,
                    "checks": { "tail_fit": fit_ok, "second_moment": moments_ok, "ks": ks_ok },
                }),
                table: tail_table(&fit),
            }
        }
        Experiment::DetBound { cases, k_range, w_scale_max, max_epsilon } => {
            let r = det_bound_experiment(model, frozen(), *cases, *k_range, *w_scale_max, *max_epsilon, stream)?;
            let mut table = Table::new(&["case", "K", "epsilon", "a_x0", "theta_eps", "sup_a", "bound_2K", "riccati_margin", "pass", "riccati_holds"]);
            for (i, c) in r.cases.iter().enumerate() {
                table.push(vec![
                    i.into(), c.k.into(), c.epsilon.into(), c.a_x0.into(), c.theta_eps.into(), c.sup_a.into(),
                    (2.0 * c.k).into(), c.riccati_margin.into(),
                    (c.verdict == snslab_core::dynamics::LocalVerdict::Pass).into(), c.riccati_holds.into(),
                ]);
            }
            Outcome { verdict: verdict(r.all_pass() && r.admissible == *cases), result: json!(r), table }
        }
        Experiment::Blowup { x0, k, epsilons, n } => {
            let x = init(model, x0, &x0_stream);
            let k = k.unwrap_or_else(|| model.a_norm(&x) + 1.0);
            let r = blowup_tail_experiment(model, frozen(), &x, k, epsilons, *n, &stream.named("paths"))?;
            let mut table = Table::new(&["epsilon", "hits", "n", "p_hat", "ci_lo", "ci_hi", "envelope", "dominated"]);
            for p in &r.points {
                table.push(vec![p.epsilon.into(), p.hits.into(), p.n.into(), p.p_hat.into(), p.ci_lo.into(), p.ci_hi.into(), p.envelope.into(), p.dominated.into()]);
            }
            Outcome { verdict: verdict(!r.points.is_empty() && r.all_dominated()), result: json!(r), table }
        }
        Experiment::Loglip { t, x0, direction, scales, event, n } => {
            let x = init(model, x0, &x0_stream);
            let d = init(model, direction, &stream.named("direction"));
            let first = loglip_experiment(model, frozen(), *t, &x, &d, scales, event, *n, &stream.named("n"))?;
            let second = loglip_experiment(model, frozen(), *t, &x, &d, scales, event, 2 * n, &stream.named("2n"))?;
            let mut table = Table::new(&["n", "a_h", "diff", "se", "ci_lo", "ci_hi", "epsilon_used", "shape", "ratio", "resolution_limited", "envelope"]);
            for r in [&first, &second] {
                for p in &r.points {
                    table.push(vec![r.n.into(), p.a_h.into(), p.diff.into(), p.se.into(), p.ci.0.into(), p.ci.1.into(), p.epsilon_used.into(), p.shape.into(), p.ratio.into(), p.resolution_limited.into(), p.envelope.into()]);
                }
            }
            let dominated = [&first, &second].iter().all(|r| {
                r.points.iter().filter(|p| !p.resolution_limited).all(|p| p.envelope.is_some_and(|e| p.diff <= e))
            });
            let stability = match (first.c_t, second.c_t) {
                (Some(a), Some(b)) => Some(b / a),
                _ => None,
            };
            let stable = stability.is_some_and(|s| (0.5..=1.5).contains(&s));
            Outcome {
                verdict: verdict(dominated && stable),
                result: json!({ "n": first, "two_n": second, "c_t_ratio": stability, "dominated": dominated, "stable": stable }),
                table,
            }
        }
        Experiment::BelCheck { configs, epsilon, radius, fd_delta, n, a_x0_max, observables, flow_cases, flow_t, fd_deltas } => {
            let fr = frozen();
            let cfg_stream = stream.named("configs");
            let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..*configs as u64)
                .map(|i| {
                    let mut rng = cfg_stream.child(i).rng();
                    let a = rng.random_range(0.0..=*a_x0_max);
                    (random_field(model, &mut rng, a), random_field(model, &mut rng, 1.0))
                })
                .collect();
            let mut estimates = Vec::new();
            for (i, (x, h)) in draws.iter().enumerate() {
                let psi = &observables[i % observables.len()];
                estimates.push(bel_gradient(model, Some(fr), x, h, *radius, psi, *epsilon, *fd_delta, *n, &stream.named("bel").child(i as u64))?);
            }
            let (x, h) = &draws[0];
            let constant = bel_gradient(model, Some(fr), x, h, *radius, &Observable::Constant { value: 1.0 }, *epsilon, *fd_delta, *n, &stream.named("constant"))?;
            let flow = flow_bound_check(model, fr, *flow_t, *flow_cases, radius.max(fr.flow_radius_min), &stream.named("flow"))?;
            let order = fd_order_check(model, x, h, *radius, *flow_t, fd_deltas, &stream.named("fd-order"))?;
            let agree = estimates.iter().filter(|e| e.agree).count();
            let bounded = estimates.iter().all(|e| e.bound.is_some_and(|b| e.bel.mean.abs() <= b));
            let constant_ok = constant.bel.mean.abs() <= 3.0 * constant.bel.std_error;
            let order_ok = (order.order - 1.0).abs() <= 0.1;
            let mut table = Table::new(&["config", "observable", "a_h", "bel", "bel_se", "fd", "fd_se", "agree", "bound"]);
            for (i, e) in estimates.iter().chain([&constant]).enumerate() {
                let label = if i < estimates.len() { serde_json::to_string(&observables[i % observables.len()]).expect("serializes") } else { "constant".into() };
                table.push(vec![i.into(), Cell::S(label), e.a_h.into(), e.bel.mean.into(), e.bel.std_error.into(), e.fd.mean.into(), e.fd.std_error.into(), e.agree.into(), e.bound.into()]);
            }
            Outcome {
                verdict: verdict(agree >= nine_in_ten(*configs) && bounded && constant_ok && flow.all_hold() && order_ok),
                result: json!({
                    "estimates": estimates, "constant_observable": constant, "flow_bound": flow, "fd_order": order,
                    "checks": { "agree": agree, "configs": configs, "bounded": bounded, "constant": constant_ok, "flow": flow.all_hold(), "order": order_ok },
                }),
                table,
            }
        }
        Experiment::Confronto { configs, epsilon, radius_range, a_x0_max, event, n } => {
            let cfg_stream = stream.named("configs");
            let mut reports = Vec::new();
            for i in 0..*configs as u64 {
                let mut rng = cfg_stream.child(i).rng();
                let a = rng.random_range(0.0..=*a_x0_max);
                let radius = rng.random_range(radius_range.0..=radius_range.1);
                let x = random_field(model, &mut rng, a);
                reports.push(confronto_check(model, &x, *epsilon, &CutoffSpec::new(radius), event, *n, &stream.named("paths").child(i))?);
            }
            // A radius far above any path value: cut and uncut runs coincide.
            let x = random_field(model, &mut cfg_stream.named("above").rng(), *a_x0_max);
            let above = confronto_check(model, &x, *epsilon, &CutoffSpec::new(1e12), event, *n, &stream.named("above"))?;
            let above_exact = above.lhs == 0.0 && above.rhs == 0.0 && above.identical_paths == above.n;
            let mut table = Table::new(&["config", "radius", "p_uncut", "p_cut", "lhs", "lhs_se", "rhs", "rhs_se", "slack", "holds", "identical_paths"]);
            for (i, r) in reports.iter().chain([&above]).enumerate() {
                table.push(vec![i.into(), r.radius.into(), r.p_uncut.into(), r.p_cut.into(), r.lhs.into(), r.lhs_se.into(), r.rhs.into(), r.rhs_se.into(), r.slack.into(), r.holds.into(), r.identical_paths.into()]);
            }
            Outcome {
                verdict: verdict(reports.iter().all(|r| r.holds) && above_exact),
                result: json!({ "reports": reports, "above_sup": above, "above_sup_exact": above_exact }),
                table,
            }
        }
        Experiment::Chapman { configs, t_range, s_range, a_x0_max, events, n_outer, n_inner } => {
            let cfg_stream = stream.named("configs");
            let mut reports = Vec::new();
            for i in 0..*configs as u64 {
                let mut rng = cfg_stream.child(i).rng();
                let t = grid_time(&mut rng, *t_range, dt);
                let s = if s_range.1 > 0.0 { grid_time(&mut rng, *s_range, dt) } else { 0.0 };
                let a = rng.random_range(0.0..=*a_x0_max);
                let x = random_field(model, &mut rng, a);
                let event = &events[i as usize % events.len()];
                reports.push(chapman_kolmogorov_check(model, t, s, &x, event, *n_outer, *n_inner, &stream.named("paths").child(i))?);
            }
            let within = reports.iter().filter(|r| r.z.abs() <= 3.0).count();
            let mut table = Table::new(&["config", "t", "s", "direct", "nested", "nested_se", "z"]);
            for (i, r) in reports.iter().enumerate() {
                table.push(vec![i.into(), r.t.into(), r.s.into(), r.direct.p_hat.into(), r.nested.mean.into(), r.nested.std_error.into(), r.z.into()]);
            }
            Outcome {
                verdict: verdict(within >= nine_in_ten(*configs)),
                result: json!({ "reports": reports, "within_3": within }),
                table,
            }
        }
        Experiment::Telescope { t, x0, event, pairs, pieces, n } => {
            let x = init(model, x0, &x0_stream);
            let mut reports = Vec::new();
            for (i, (a, b)) in pairs.iter().enumerate() {
                reports.push(telescoping_compare(model, frozen(), *t, &x, event, *a, *b, pieces, *n, &stream.named("pairs").child(i as u64))?);
            }
            let (a, _) = pairs[0];
            let same = telescoping_compare(model, frozen(), *t, &x, event, a, a, pieces, *n, &stream.named("identical"))?;
            let mut table = Table::new(&["pair", "radius_a", "radius_b", "diff", "diff_se", "N", "tail_term", "exceedance_term", "bound", "dominated"]);
            for (i, r) in reports.iter().chain([&same]).enumerate() {
                for p in &r.points {
                    table.push(vec![i.into(), r.radius_a.into(), r.radius_b.into(), r.diff.mean.into(), r.diff.std_error.into(), p.pieces.into(), p.tail_term.into(), p.exceedance_term.into(), p.bound.into(), p.dominated.into()]);
                }
            }
            let ok = reports.iter().all(|r| r.all_dominated()) && same.diff_covers_zero();
            Outcome {
                verdict: verdict(ok),
                result: json!({ "reports": reports, "identical": same }),
                table,
            }
        }
        Experiment::Martingale { t, x0, modes, n } => {
            let x = init(model, x0, &x0_stream);
            let steps = model.steps(*t)?;
            let ensemble = map_paths(*n, &stream.named("paths"), |_, s| {
                simulate(&model.basis, &x, &model.forcing(steps, s), cutoff.as_ref(), &Recording::All)
            });
            let mut reports = Vec::new();
            for m in modes {
                let mut phi = model.zeros();
                phi[*m] = 1.0;
                reports.push(martingale_residual(&model.basis, &model.noise, &ensemble, &phi, *t).map_err(LabError::from)?);
            }
            let mut table = Table::new(&["mode", "mean", "se", "realized_qv", "expected_qv", "qv_ratio"]);
            for (m, r) in modes.iter().zip(&reports) {
                table.push(vec![(*m).into(), r.mean_residual.mean.into(), r.mean_residual.std_error.into(), r.realized_qv.into(), r.expected_qv.into(), r.qv_ratio.into()]);
            }
            let ok = reports.iter().all(|r| {
                (0.9..=1.1).contains(&r.qv_ratio) && r.mean_residual.mean.abs() <= 3.0 * r.mean_residual.std_error
            });
            Outcome {
                verdict: verdict(ok),
                result: json!({ "reports": reports, "blown_up": ensemble.iter().filter(|t| t.blown_up()).count() }),
                table,
            }
        }
    })
}
