//! Command-line front end.
//!
//! Every subcommand writes into a fresh run directory
//! `<out>/<UTC timestamp>-s<seeds>-<config hash>` holding the resolved
//! config next to its outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::association;
use crate::baselines::{self, GreedyController, RandomController};
use crate::config::ScenarioConfig;
use crate::env::trace::{TraceHeader, TraceRecord, TraceWriter, TRACE_SCHEMA, TRACE_VERSION};
use crate::env::{ActionMode, Env};
use crate::mappo::{self, ActorSet, Controller, DecentralizedController, Trainer};
use crate::metrics::{read_metrics, MetricsWriter};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// ED counts of the evaluation sweep.
pub const ED_SWEEP: [usize; 6] = [10, 20, 40, 60, 80, 100];
/// UAV counts of the evaluation sweep.
pub const UAV_SWEEP: std::ops::RangeInclusive<usize> = 2..=8;

#[derive(Parser, Debug)]
#[command(name = "uavlora", version, about = "UAV LoRa gateway energy-efficiency simulator and MAPPO trainer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file (TOML); built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; defaults to the config's seed list.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parent directory for run directories.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// `dotted.key=value`, applied after the config file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Random,
    Greedy,
    Mappo,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Roll out one episode with a fixed policy and write its trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "greedy")]
        policy: PolicyKind,
        /// Policy checkpoint, required for `--policy mappo`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train MAPPO for every seed.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a policy over the ED-count and UAV-count sweeps.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "mappo")]
        policy: PolicyKind,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// ED count held fixed during the UAV-count sweep.
        #[arg(long, default_value_t = 60)]
        uav_sweep_eds: usize,
    },
    /// Exhaustive per-step EE search on a tiny instance.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Collect reward curves and EE bar data from earlier runs.
    ExportPlots {
        #[command(flatten)]
        common: Common,
        /// Run directories to read (repeatable).
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
    },
    /// Load, validate and print the resolved configuration.
    ValidateConfig {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `argv` (program name first) and runs it. Returns the exit code:
/// 0 on success, 2 on usage or config errors, 1 otherwise.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(dir) => {
            if let Some(d) = dir {
                println!("{}", d.display());
            }
            0
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("invalid configuration: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<Option<PathBuf>> {
    match cmd {
        Command::Simulate { common, policy, checkpoint } => {
            simulate(&common, policy, checkpoint.as_deref()).map(Some)
        }
        Command::Train { common } => train(&common).map(Some),
        Command::Evaluate { common, policy, checkpoint, uav_sweep_eds } => {
            evaluate(&common, policy, checkpoint.as_deref(), uav_sweep_eds).map(Some)
        }
        Command::Oracle { common } => oracle(&common).map(Some),
        Command::ExportPlots { common, runs } => export_plots(&common, &runs).map(Some),
        Command::ValidateConfig { common } => {
            let cfg = load_config(&common)?;
            print!("{}", cfg.to_toml_string());
            eprintln!("config ok ({})", cfg.short_hash());
            Ok(None)
        }
    }
}

fn load_config(c: &Common) -> Result<ScenarioConfig> {
    let cfg = ScenarioConfig::load(c.config.as_deref(), &c.overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn seeds(c: &Common, cfg: &ScenarioConfig) -> Vec<u64> {
    c.seed.map_or_else(|| cfg.seeds.clone(), |s| vec![s])
}

/// Creates a fresh run directory and stores the resolved config in it.
pub fn create_run_dir(out: &Path, seeds: &[u64], cfg: &ScenarioConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let tag: Vec<String> = seeds.iter().map(u64::to_string).collect();
    let base = format!("{stamp}-s{}-{}", tag.join("_"), cfg.short_hash());
    let mut dir = out.join(&base);
    let mut n = 1;
    while dir.exists() {
        dir = out.join(format!("{base}-{n}"));
        n += 1;
    }
    std::fs::create_dir(&dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    Ok(dir)
}

fn controller(
    kind: PolicyKind,
    checkpoint: Option<&Path>,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<Box<dyn Controller>> {
    Ok(match kind {
        PolicyKind::Random => {
            Box::new(RandomController::new(cfg.radio.clone(), stream_rng(seed, Stream::Baseline)))
        }
        PolicyKind::Greedy => {
            let env = Env::new(cfg.clone(), seed)?;
            Box::new(GreedyController::for_env(&env))
        }
        PolicyKind::Mappo => {
            let path = checkpoint
                .ok_or_else(|| Error::Config("--policy mappo needs --checkpoint".into()))?;
            Box::new(DecentralizedController::load(path)?)
        }
    })
}

fn simulate(c: &Common, kind: PolicyKind, checkpoint: Option<&Path>) -> Result<PathBuf> {
    let cfg = load_config(c)?;
    let seed = seeds(c, &cfg)[0];
    let mut ctrl = controller(kind, checkpoint, &cfg, seed)?;
    let dir = create_run_dir(&c.out, &[seed], &cfg)?;
    let mut env = Env::new(cfg.clone(), seed)?;
    ctrl.check(&env)?;
    let mut obs = env.reset(seed);
    ctrl.reset(env.num_agents());

    let s = env.state();
    let rows = association::snapshot(&s.association, &s.ed_positions(), &s.uav_xy(), &s.gains);
    association::write_snapshot_csv(&dir.join("association.csv"), &rows)?;

    let header = TraceHeader {
        schema: TRACE_SCHEMA.into(),
        version: TRACE_VERSION,
        seed,
        num_eds: cfg.world.num_eds,
        num_uavs: cfg.world.num_uavs,
        horizon: cfg.world.horizon,
        policy: ctrl.name().into(),
    };
    let mut w = TraceWriter::create(&dir.join("trace.jsonl"), &header)?;
    loop {
        let joint = obs
            .iter()
            .enumerate()
            .map(|(u, o)| ctrl.act(u, o))
            .collect::<Result<Vec<_>>>()?;
        let out = env.step(&joint)?;
        w.write(&TraceRecord::from_info(&out.info, &cfg.radio))?;
        obs = out.observations;
        if out.done {
            break;
        }
    }
    w.finish()?;
    eprintln!("episode EE {:.3} bit/J over {} steps", env.episode_ee(), cfg.world.horizon);
    Ok(dir)
}

fn train(c: &Common) -> Result<PathBuf> {
    let cfg = load_config(c)?;
    let seeds = seeds(c, &cfg);
    let dir = create_run_dir(&c.out, &seeds, &cfg)?;
    for &seed in &seeds {
        let sub = dir.join(format!("seed-{seed}"));
        std::fs::create_dir_all(&sub)?;
        let mut metrics = MetricsWriter::create(&sub.join("metrics.csv"))?;
        let mut trainer = Trainer::new(cfg.clone(), seed)?;
        let planned = trainer.planned_updates();
        let every = cfg.train.checkpoint_every as u64;
        let report = (planned / 10).max(1);
        trainer.train(|t, row| {
            metrics.append(row)?;
            let done = row.update_index + 1;
            if every > 0 && done % every == 0 {
                t.actors().save(&sub.join(format!("policy_u{done}.json")))?;
            }
            if done % report == 0 || done == planned {
                eprintln!(
                    "seed {seed}: update {done}/{planned}, steps {}, reward {:.4}, EE {:.1}",
                    row.env_steps, row.mean_reward, row.mean_step_ee
                );
            }
            Ok(())
        })?;
        trainer.actors().save(&sub.join("policy.json"))?;
        trainer.save_critic(&sub.join("critic.json"))?;
    }
    Ok(dir)
}

/// One line of an evaluation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep: String,
    pub policy: String,
    pub num_eds: usize,
    pub num_uavs: usize,
    pub seed: u64,
    pub mean_step_ee: f64,
    pub episode_ee: f64,
    pub success_rate: f64,
    pub mean_margin_db: f64,
    pub min_margin_db: f64,
    pub mean_reward: f64,
}

/// Config for one sweep point. A trained policy fixes the observation
/// width, so its slot count pins the quota.
fn sweep_config(base: &ScenarioConfig, eds: usize, uavs: usize, actors: Option<&ActorSet>) -> ScenarioConfig {
    let mut cfg = base.clone();
    cfg.world.num_eds = eds;
    cfg.world.num_uavs = uavs;
    cfg.world.quota = match actors {
        Some(a) if a.action_mode == ActionMode::PerEd => Some(a.spec().slots),
        Some(a) => Some(a.spec().input_dim / crate::env::OBS_FEATURES),
        None => base.world.quota,
    };
    cfg
}

/// Runs `kind` over both sweeps; returns rows in sweep order.
pub fn evaluation_sweep(
    base: &ScenarioConfig,
    seeds: &[u64],
    kind: PolicyKind,
    checkpoint: Option<&Path>,
    uav_sweep_eds: usize,
) -> Result<Vec<SweepRow>> {
    let actors = match kind {
        PolicyKind::Mappo => Some(ActorSet::load(
            checkpoint.ok_or_else(|| Error::Config("--policy mappo needs --checkpoint".into()))?,
        )?),
        _ => None,
    };
    let points = ED_SWEEP
        .iter()
        .map(|&v| ("eds", v, base.world.num_uavs))
        .chain(UAV_SWEEP.map(|u| ("uavs", uav_sweep_eds, u)));
    let mut rows = Vec::new();
    for (sweep, v, u) in points {
        let cfg = sweep_config(base, v, u, actors.as_ref());
        for &seed in seeds {
            let mut ctrl: Box<dyn Controller> = match &actors {
                Some(a) => Box::new(DecentralizedController::new(a.clone())),
                None => controller(kind, None, &cfg, seed)?,
            };
            let r = mappo::evaluate(&cfg, ctrl.as_mut(), &[seed])?;
            let e = &r.episodes[0];
            rows.push(SweepRow {
                sweep: sweep.into(),
                policy: r.policy.clone(),
                num_eds: v,
                num_uavs: u,
                seed,
                mean_step_ee: e.mean_step_ee,
                episode_ee: e.episode_ee,
                success_rate: e.success_rate,
                mean_margin_db: e.mean_margin_db,
                min_margin_db: e.min_margin_db,
                mean_reward: e.mean_reward,
            });
        }
    }
    Ok(rows)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Metrics {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Metrics { path: path.to_path_buf(), message: e.to_string() })?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let err = |e: csv::Error| Error::Metrics { path: path.to_path_buf(), message: e.to_string() };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    r.deserialize().map(|x| x.map_err(err)).collect()
}

fn evaluate(c: &Common, kind: PolicyKind, checkpoint: Option<&Path>, uav_sweep_eds: usize) -> Result<PathBuf> {
    let cfg = load_config(c)?;
    let seeds = seeds(c, &cfg);
    let rows = evaluation_sweep(&cfg, &seeds, kind, checkpoint, uav_sweep_eds)?;
    let dir = create_run_dir(&c.out, &seeds, &cfg)?;
    let (eds, uavs): (Vec<SweepRow>, Vec<SweepRow>) = rows.into_iter().partition(|r| r.sweep == "eds");
    write_csv(&dir.join("eval_eds.csv"), &eds)?;
    write_csv(&dir.join("eval_uavs.csv"), &uavs)?;
    for r in eds.iter().chain(&uavs) {
        eprintln!(
            "{:>4} V={:<3} U={} seed={:<5} EE={:.1} success={:.3}",
            r.sweep, r.num_eds, r.num_uavs, r.seed, r.mean_step_ee, r.success_rate
        );
    }
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OracleReport {
    seed: u64,
    num_eds: usize,
    num_uavs: usize,
    oracle: baselines::OracleResult,
    greedy_ee: f64,
    random_ee: f64,
}

fn oracle(c: &Common) -> Result<PathBuf> {
    let mut cfg = load_config(c)?;
    let sets = baselines::default_restricted_sets();
    // tiny instance unless the caller overrode the world size
    if !c.overrides.iter().any(|o| o.starts_with("world.num_eds")) {
        cfg.world.num_eds = 3;
    }
    if !c.overrides.iter().any(|o| o.starts_with("world.num_uavs")) {
        cfg.world.num_uavs = 1;
    }
    cfg.radio = sets.clone();
    let seeds = seeds(c, &cfg);
    let dir = create_run_dir(&c.out, &seeds, &cfg)?;
    let mut reports = Vec::new();
    for &seed in &seeds {
        let env = Env::new(cfg.clone(), seed)?;
        let best = baselines::exhaustive_oracle(&env, &sets)?;
        let greedy = GreedyController::for_env(&env);
        let mut random = RandomController::new(sets.clone(), stream_rng(seed, Stream::Baseline));
        let ee_of = |ctrl: &mut dyn Controller| -> Result<f64> {
            let joint = env
                .observations()
                .iter()
                .enumerate()
                .map(|(u, o)| ctrl.act(u, o))
                .collect::<Result<Vec<_>>>()?;
            Ok(env.evaluate(&env.decode_actions(&joint)?).energy.ee_bits_per_joule)
        };
        let mut greedy = greedy;
        let report = OracleReport {
            seed,
            num_eds: cfg.world.num_eds,
            num_uavs: cfg.world.num_uavs,
            greedy_ee: ee_of(&mut greedy)?,
            random_ee: ee_of(&mut random)?,
            oracle: best,
        };
        eprintln!(
            "seed {seed}: oracle {:.3} ({} allocations), greedy {:.3}, random {:.3}",
            report.oracle.ee_bits_per_joule, report.oracle.evaluations, report.greedy_ee, report.random_ee
        );
        reports.push(report);
    }
    std::fs::write(dir.join("oracle.json"), serde_json::to_string_pretty(&reports)?)?;
    Ok(dir)
}

#[derive(Debug, Clone, Serialize)]
struct CurvePoint {
    run: String,
    seed: String,
    update_index: u64,
    env_steps: u64,
    mean_reward: f64,
    mean_step_ee: f64,
    success_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
struct EeBar {
    sweep: String,
    policy: String,
    num_eds: usize,
    num_uavs: usize,
    seeds: usize,
    mean_step_ee: f64,
    std_step_ee: f64,
    success_rate: f64,
}

fn export_plots(c: &Common, runs: &[PathBuf]) -> Result<PathBuf> {
    let cfg = load_config(c)?;
    let mut curve = Vec::new();
    let mut groups: BTreeMap<(String, String, usize, usize), Vec<SweepRow>> = BTreeMap::new();
    for run in runs {
        let name = run.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut entries: Vec<PathBuf> = std::fs::read_dir(run)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for sub in entries.iter().filter(|p| p.join("metrics.csv").is_file()) {
            let seed = sub.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            for m in read_metrics(&sub.join("metrics.csv"))? {
                curve.push(CurvePoint {
                    run: name.clone(),
                    seed: seed.trim_start_matches("seed-").into(),
                    update_index: m.update_index,
                    env_steps: m.env_steps,
                    mean_reward: m.mean_reward,
                    mean_step_ee: m.mean_step_ee,
                    success_rate: m.success_rate,
                });
            }
        }
        for file in ["eval_eds.csv", "eval_uavs.csv"] {
            let p = run.join(file);
            if p.is_file() {
                for r in read_csv::<SweepRow>(&p)? {
                    groups
                        .entry((r.sweep.clone(), r.policy.clone(), r.num_eds, r.num_uavs))
                        .or_default()
                        .push(r);
                }
            }
        }
    }
    let bars: Vec<EeBar> = groups
        .into_iter()
        .map(|((sweep, policy, num_eds, num_uavs), rs)| {
            let n = rs.len() as f64;
            let mean = rs.iter().map(|r| r.mean_step_ee).sum::<f64>() / n;
            let var = rs.iter().map(|r| (r.mean_step_ee - mean).powi(2)).sum::<f64>() / n;
            EeBar {
                sweep,
                policy,
                num_eds,
                num_uavs,
                seeds: rs.len(),
                mean_step_ee: mean,
                std_step_ee: var.sqrt(),
                success_rate: rs.iter().map(|r| r.success_rate).sum::<f64>() / n,
            }
        })
        .collect();
    let dir = create_run_dir(&c.out, &seeds(c, &cfg), &cfg)?;
    write_csv(&dir.join("reward_curve.csv"), &curve)?;
    write_csv(&dir.join("ee_bars.csv"), &bars)?;
    Ok(dir)
}
