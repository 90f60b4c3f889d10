use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use vfollow::ais::{
    extract_events, fit_lognormal, histogram_report, read_tracks, write_events_csv,
    write_histogram_csv, ExtractOptions,
};
use vfollow::config::RunConfig;
use vfollow::env::RiverEnv;
use vfollow::rl::{checkpoint, train, DdpgAgent};
use vfollow::rng::derive_seed;
use vfollow::validation::{run_scenario, write_metrics_toml, write_traces, Scenario};

#[derive(Parser)]
#[command(
    name = "vfollow",
    version,
    about = "Vessel-following reinforcement learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Configuration file; repeat to layer files, later ones win.
    #[arg(long)]
    config: Vec<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent on the stochastic river environment.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Run validation scenarios with a trained agent.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Only run these scenarios (built-in or configured names).
        #[arg(long)]
        scenario: Vec<String>,
    },
    /// Fit the time-gap distribution from a track file.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Track CSV: vessel_id,timestamp_s,x_m,y_m,speed_mps,length_m,beam_m[,stream_mps]
        tracks: PathBuf,
        /// Histogram bin width, s.
        #[arg(long, default_value_t = 20.0)]
        bin_width: f64,
        /// Maximum speed difference of a following pair, m/s.
        #[arg(long, default_value_t = 0.2)]
        speed_threshold: f64,
    },
    /// Run one scenario: a built-in or configured name, or a scenario TOML
    /// file.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        scenario: String,
    },
}

/// Failure class, mapped to the exit status.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut config = RunConfig::load(&common.config).map_err(|e| Failure::Config(e.into()))?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn cmd_train(common: &Common, episodes: Option<usize>) -> Result<(), Failure> {
    let mut config = load_config(common)?;
    if let Some(n) = episodes {
        config.episodes = n;
    }
    let out = config.output_dir.clone();
    let ckpt_dir = out.join("checkpoints");
    create_dir(&ckpt_dir)?;
    config
        .write_snapshot(&out.join("config.resolved.toml"))
        .map_err(|e| Failure::Runtime(e.into()))?;

    let mut env = RiverEnv::new(config.env.clone(), config.vessel);
    let mut agent = DdpgAgent::new(config.ddpg.clone(), config.seed);
    let every = config.checkpoint_every;
    log::info!(
        "training {} episodes, seed {}",
        config.episodes,
        config.seed
    );
    let report = train(
        &mut agent,
        &mut env,
        config.episodes,
        config.seed,
        |ep, agent| {
            log::info!(
                "episode {}: reward {:.4} steps {} collision {}",
                ep.episode,
                ep.total_reward,
                ep.steps,
                ep.collision
            );
            if every > 0 && (ep.episode + 1) % every == 0 {
                let path = ckpt_dir.join(format!("episode_{:05}.ckpt", ep.episode + 1));
                checkpoint::save_to_path(agent, &path)?;
            }
            Ok(())
        },
    )
    .context("training failed")?;

    let metrics = out.join("metrics.csv");
    report
        .write_csv(fs::File::create(&metrics).with_context(|| metrics.display().to_string())?)
        .context("cannot write metrics")?;
    checkpoint::save_to_path(&agent, &out.join("agent.ckpt")).context("cannot write checkpoint")?;
    println!(
        "trained {} episodes ({} collisions); checkpoint {}",
        report.episodes.len(),
        report.collisions(),
        out.join("agent.ckpt").display()
    );
    Ok(())
}

fn load_agent(path: &Path, config: &RunConfig) -> anyhow::Result<DdpgAgent> {
    checkpoint::load_from_path(path, config.ddpg.clone(), config.seed)
        .with_context(|| format!("cannot load checkpoint {}", path.display()))
}

fn run_and_write(agent: &DdpgAgent, scenario: &Scenario, config: &RunConfig) -> anyhow::Result<()> {
    let out = &config.output_dir;
    let result = run_scenario(agent, scenario, &config.env, &config.vessel)
        .with_context(|| format!("scenario {} failed", scenario.name))?;
    write_traces(out, &result).context("cannot write traces")?;
    let path = out.join(format!("{}_metrics.toml", scenario.name));
    write_metrics_toml(fs::File::create(&path)?, &result.metrics)
        .with_context(|| path.display().to_string())?;
    let m = &result.metrics;
    println!(
        "{}: steps {} collision {} min_gap {:.1} m comfort_rms_steady {:.4}{}",
        scenario.name,
        m.steps,
        m.collision,
        m.min_gap,
        m.comfort_rms_steady,
        m.string_stability_ratio
            .map(|r| format!(" string_stability {r:.3}"))
            .unwrap_or_default()
    );
    Ok(())
}

fn cmd_eval(common: &Common, checkpoint: &Path, only: &[String]) -> Result<(), Failure> {
    let config = load_config(common)?;
    let mut scenarios = config.eval_scenarios();
    if !only.is_empty() {
        scenarios = only
            .iter()
            .map(|name| {
                config
                    .scenario(name)
                    .ok_or_else(|| Failure::Config(anyhow::anyhow!("unknown scenario {name}")))
            })
            .collect::<Result<_, _>>()?;
    }
    let agent = load_agent(checkpoint, &config)?;
    create_dir(&config.output_dir)?;
    let configured = |name: &str| config.scenarios.iter().any(|s| s.name == name);
    for base in scenarios {
        for run in 0..config.eval_runs {
            let scenario = if config.eval_runs == 1 {
                base.clone()
            } else {
                let seed = derive_seed(base.seed, run as u64);
                let mut s = if configured(&base.name) {
                    Scenario {
                        seed,
                        ..base.clone()
                    }
                } else {
                    Scenario::builtin(&base.name, &config.env, seed).expect("built-in name")
                };
                s.name = format!("{}_run{run}", base.name);
                s
            };
            run_and_write(&agent, &scenario, &config)?;
        }
    }
    Ok(())
}

fn cmd_simulate(common: &Common, checkpoint: &Path, name: &str) -> Result<(), Failure> {
    let config = load_config(common)?;
    let file = Path::new(name);
    let scenario = if file.is_file() {
        let text = fs::read_to_string(file)
            .with_context(|| file.display().to_string())
            .map_err(Failure::Config)?;
        toml::from_str::<Scenario>(&text)
            .with_context(|| format!("{}: not a scenario", file.display()))
            .map_err(Failure::Config)?
    } else {
        config
            .scenario(name)
            .ok_or_else(|| Failure::Config(anyhow::anyhow!("unknown scenario {name}")))?
    };
    scenario
        .validate(&config.env)
        .map_err(|e| Failure::Config(e.into()))?;
    let agent = load_agent(checkpoint, &config)?;
    create_dir(&config.output_dir)?;
    run_and_write(&agent, &scenario, &config)?;
    Ok(())
}

fn cmd_calibrate(
    common: &Common,
    tracks_path: &Path,
    bin_width: f64,
    speed_threshold: f64,
) -> Result<(), Failure> {
    let config = load_config(common)?;
    if !(bin_width > 0.0) || !(speed_threshold > 0.0) {
        return Err(Failure::Config(anyhow::anyhow!(
            "--bin-width and --speed-threshold must be positive"
        )));
    }
    let file = fs::File::open(tracks_path)
        .with_context(|| format!("cannot open {}", tracks_path.display()))?;
    let tracks = read_tracks(file).with_context(|| tracks_path.display().to_string())?;
    if tracks.is_empty() {
        return Err(anyhow::anyhow!(
            "empty corpus: {} has no track points",
            tracks_path.display()
        )
        .into());
    }
    let opts = ExtractOptions {
        speed_threshold,
        ..ExtractOptions::default()
    };
    let events = extract_events(&tracks, &opts);
    if events.is_empty() {
        return Err(anyhow::anyhow!("empty corpus: no following events found").into());
    }
    let out = &config.output_dir;
    create_dir(out)?;
    write_events_csv(fs::File::create(out.join("events.csv"))?, &events)
        .context("cannot write events")?;

    let samples: Vec<f64> = events.iter().map(|e| e.time_gap).collect();
    let fit = fit_lognormal(&samples).context("lognormal fit failed")?;
    let ground = events.iter().filter(|e| !e.stream_relative).count();
    fs::write(out.join("fit.toml"), fit.to_config_toml(ground)).context("cannot write fit")?;
    let bins = histogram_report(&samples, bin_width).context("histogram failed")?;
    write_histogram_csv(fs::File::create(out.join("histogram.csv"))?, &bins)
        .context("cannot write histogram")?;
    println!(
        "{} events ({} ground-speed only): mu_t {:.4} sigma_t {:.4}",
        events.len(),
        ground,
        fit.mu,
        fit.sigma
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Train { common, episodes } => cmd_train(common, *episodes),
        Command::Eval {
            common,
            checkpoint,
            scenario,
        } => cmd_eval(common, checkpoint, scenario),
        Command::Calibrate {
            common,
            tracks,
            bin_width,
            speed_threshold,
        } => cmd_calibrate(common, tracks, *bin_width, *speed_threshold),
        Command::Simulate {
            common,
            checkpoint,
            scenario,
        } => cmd_simulate(common, checkpoint, scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
