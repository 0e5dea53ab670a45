use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use grp_core::experiment::{
    evaluate, evaluate_policy, sample_tasks, train_with, weight_summary, DemoTask, EvalReport,
    LayerWeights, TargetPolicy, Trajectory,
};
use grp_core::io::{
    read_model, write_json_file, write_model, write_report, write_trajectory_file, RunConfig,
};
use grp_core::mulnet::gradient_check_suite;
use grp_core::GrpModel;

const GRADCHECK_TOLERANCE: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "grp",
    version,
    about = "Swing-leg controller transfer with GRP models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed this subcommand consumes.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roll out the demonstration controller and write one CSV per swing.
    Demo {
        #[command(flatten)]
        common: Common,
        /// Number of swings (defaults to training.demo_count).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Train the hip and knee models online from demonstrations.
    Train {
        #[command(flatten)]
        common: Common,
        /// Knee layer count (overrides knee.m).
        #[arg(long)]
        layers: Option<usize>,
        /// Training episodes (overrides training.episodes).
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Drive the plant with the trained models alone and report landing errors.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Number of evaluation swings (defaults to evaluation.trajectories).
        #[arg(long)]
        n: Option<usize>,
        /// Directory holding hip.json and knee.json (defaults to --out).
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Compare analytic network gradients against central differences.
    Gradcheck {
        /// Seed for the random instances.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Write per-layer weight matrices and norms of trained models.
    DumpWeights {
        #[command(flatten)]
        common: Common,
        /// Directory holding hip.json and knee.json (defaults to --out).
        #[arg(long)]
        models: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::load(path).with_context(|| format!("config {}", path.display())),
        None => Ok(RunConfig::default()),
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Serialize)]
struct DemoManifest {
    seed: u64,
    files: Vec<String>,
    tasks: Vec<DemoTask>,
    report: EvalReport,
}

fn cmd_demo(common: Common, n: Option<usize>) -> Result<()> {
    let mut cfg = load_config(&common)?;
    if let Some(seed) = common.seed {
        cfg.seeds.demo = seed;
    }
    let n = n.unwrap_or(cfg.training.demo_count);
    if n == 0 {
        bail!("--n must be at least 1");
    }
    prepare_out(&common.out)?;
    let tasks = sample_tasks(&cfg.ranges, n, cfg.seeds.demo, &cfg.sim.params)?;
    let (results, trajs) = evaluate_policy(&tasks, &cfg.sim, TargetPolicy::default)?;
    let mut files = Vec::with_capacity(n);
    for (i, traj) in trajs.iter().enumerate() {
        let name = format!("demo_{i:03}.csv");
        write_trajectory_file(&common.out.join(&name), traj)?;
        files.push(name);
    }
    let report = EvalReport::from_results(results, cfg.evaluation.activity_threshold, vec![]);
    println!(
        "wrote {n} demonstrations to {}: average error {:.3} deg, max {:.3} deg, {} timeouts",
        common.out.display(),
        report.average_error_deg,
        report.max_error_deg,
        report.timeouts
    );
    let manifest = DemoManifest {
        seed: cfg.seeds.demo,
        files,
        tasks,
        report,
    };
    write_json_file(&common.out.join("manifest.json"), &manifest)?;
    Ok(())
}

fn cmd_train(common: Common, layers: Option<usize>, episodes: Option<usize>) -> Result<()> {
    let mut cfg = load_config(&common)?;
    if let Some(seed) = common.seed {
        cfg.seeds.init = seed;
    }
    if let Some(m) = layers {
        cfg.knee.m = m;
    }
    if let Some(e) = episodes {
        cfg.training.episodes = e;
    }
    cfg.validate()?;
    prepare_out(&common.out)?;
    let demos = sample_tasks(
        &cfg.ranges,
        cfg.training.demo_count,
        cfg.seeds.demo,
        &cfg.sim.params,
    )?;
    let mut hip = GrpModel::init(cfg.hip_config())?;
    let mut knee = GrpModel::init(cfg.knee_config())?;
    let total = cfg.training.episodes;
    let mut last: Option<Trajectory> = None;
    let log = train_with(
        &mut hip,
        &mut knee,
        &demos,
        total,
        &cfg.sim,
        |entry, traj| {
            if entry.episode as usize + 1 == total {
                last = Some(traj.clone());
            }
        },
    )?;
    write_model(&common.out.join("hip.json"), &hip)?;
    write_model(&common.out.join("knee.json"), &knee)?;
    write_json_file(&common.out.join("training_log.json"), &log)?;
    if let Some(traj) = &last {
        write_trajectory_file(&common.out.join("last_episode.csv"), traj)?;
    }
    if let Some(end) = log.episodes.last() {
        println!(
            "trained {total} episodes (hip m = {}, knee m = {}): final output error hip {:.3} N·m, knee {:.3} N·m",
            hip.m(),
            knee.m(),
            end.hip_output_error,
            end.knee_output_error
        );
    }
    Ok(())
}

fn load_models(dir: &Path) -> Result<(GrpModel, GrpModel)> {
    let load = |name: &str| {
        let path = dir.join(name);
        read_model(&path).with_context(|| format!("model {}", path.display()))
    };
    Ok((load("hip.json")?, load("knee.json")?))
}

fn cmd_eval(common: Common, n: Option<usize>, models: Option<PathBuf>) -> Result<()> {
    let mut cfg = load_config(&common)?;
    if let Some(seed) = common.seed {
        cfg.seeds.eval = seed;
    }
    let n = n.unwrap_or(cfg.evaluation.trajectories);
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let (hip, knee) = load_models(models.as_deref().unwrap_or(&common.out))?;
    prepare_out(&common.out)?;
    let tasks = sample_tasks(&cfg.ranges, n, cfg.seeds.eval, &cfg.sim.params)?;
    let (report, trajs) = evaluate(
        &hip,
        &knee,
        &tasks,
        &cfg.sim,
        cfg.evaluation.activity_threshold,
    )?;
    for (i, traj) in trajs.iter().enumerate() {
        write_trajectory_file(&common.out.join(format!("eval_{i:03}.csv")), traj)?;
    }
    write_report(&common.out.join("report.json"), &report)?;
    println!(
        "evaluated {n} swings: average error {:.3} deg, max {:.3} deg, {} timeouts, {} diverged",
        report.average_error_deg, report.max_error_deg, report.timeouts, report.diverged
    );
    for model in &report.models {
        let peaks: Vec<String> = model
            .peak_responsibility
            .iter()
            .map(|p| format!("{p:.3}"))
            .collect();
        println!(
            "{}: {} active generators, peak responsibility [{}]",
            model.name,
            model.active_generators,
            peaks.join(", ")
        );
    }
    Ok(())
}

fn cmd_gradcheck(seed: u64, n: usize) -> Result<()> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let worst = gradient_check_suite(n, seed, 1e-6);
    println!("max relative error {worst:.3e} over {n} instances");
    if !(worst < GRADCHECK_TOLERANCE) {
        bail!("gradient check failed: {worst:.3e} >= {GRADCHECK_TOLERANCE:e}");
    }
    Ok(())
}

#[derive(Serialize)]
struct ModelWeights {
    name: &'static str,
    layers: Vec<LayerWeights>,
}

fn cmd_dump_weights(common: Common, models: Option<PathBuf>) -> Result<()> {
    let (hip, knee) = load_models(models.as_deref().unwrap_or(&common.out))?;
    prepare_out(&common.out)?;
    let dump = vec![
        ModelWeights {
            name: "hip",
            layers: weight_summary(&hip),
        },
        ModelWeights {
            name: "knee",
            layers: weight_summary(&knee),
        },
    ];
    for model in &dump {
        for l in &model.layers {
            println!(
                "{} layer {}: generator norm {:.4} (max {:.4}), predictor norm {:.4} (max {:.4})",
                model.name,
                l.layer,
                l.generator_norm,
                l.generator_max_abs,
                l.predictor_norm,
                l.predictor_max_abs
            );
        }
    }
    write_json_file(&common.out.join("weights.json"), &dump)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Demo { common, n } => cmd_demo(common, n),
        Command::Train {
            common,
            layers,
            episodes,
        } => cmd_train(common, layers, episodes),
        Command::Eval { common, n, models } => cmd_eval(common, n, models),
        Command::Gradcheck { seed, n } => cmd_gradcheck(seed, n),
        Command::DumpWeights { common, models } => cmd_dump_weights(common, models),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
