use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use relmario::agents::{AgentKind, Policy};
use relmario::env::{generate_level_with, Level, LevelOptions, PhysicsConfig, RewardConfig};
use relmario::harness::{
    compare_agents, evaluate, mean, replay, run_training, AnyAgent, ExperimentConfig,
    LevelSeedPolicy,
};
use relmario::learning::LearningParams;

#[derive(Parser, Debug)]
#[command(name = "relmario", version, about = "Hierarchical relational SARSA platformer agent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train (or just run) one agent and write its learning curve.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Run several agents over shared seeds and print a comparison table.
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Re-execute a logged trajectory and verify it matches exactly.
    Replay(ReplayArgs),
    /// Generate a level and print it in the level file format.
    GenLevel(GenLevelArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Flat key=value file mirroring the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    level_type: i64,
    #[arg(long, default_value_t = 0)]
    difficulty: i64,
    #[arg(long, default_value_t = 2000)]
    episodes: u32,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.999)]
    epsilon_decay: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon_min: f64,
    #[arg(long, default_value_t = 1)]
    run_seed: u64,
    /// Reuse one level (this seed) for every episode.
    #[arg(long, value_name = "SEED")]
    fixed_level: Option<u64>,
    /// Put a coin run on the ground in front of every monster.
    #[arg(long)]
    coin_monster_pairs: bool,
    #[arg(long, default_value_t = RewardConfig::default().episode_tick_limit)]
    tick_limit: u32,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value = "hrl")]
    agent: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the Q-table here after training.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Load a Q-table before training.
    #[arg(long)]
    init_checkpoint: Option<PathBuf>,
    /// Log every tick of the final episode.
    #[arg(long)]
    log_trajectory: Option<PathBuf>,
    /// Write the final episode's level (defaults to `<trajectory>.level`).
    #[arg(long)]
    log_level: Option<PathBuf>,
    /// Greedy evaluation episodes after training.
    #[arg(long, default_value_t = 0)]
    eval_episodes: u32,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value = "hrl,scripted,random")]
    agents: String,
    #[arg(long, default_value_t = 3)]
    runs: u32,
    #[arg(long, default_value = "compare_out")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    level_file: PathBuf,
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long, default_value_t = RewardConfig::default().episode_tick_limit)]
    tick_limit: u32,
}

#[derive(Args, Debug)]
struct GenLevelArgs {
    #[arg(long, default_value_t = 0)]
    level_type: i64,
    #[arg(long, default_value_t = 0)]
    difficulty: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    coin_monster_pairs: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Turns `key=value` lines into flags placed before the command-line ones,
/// so later (command-line) occurrences win.
fn config_args(path: &PathBuf) -> anyhow::Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), n + 1);
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            bail!("{}:{}: config files cannot nest", path.display(), n + 1);
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

fn expand_config(raw: Vec<String>) -> anyhow::Result<Vec<String>> {
    let pos = raw.iter().position(|a| a == "--config");
    let inline = raw.iter().find_map(|a| a.strip_prefix("--config="));
    let path = match (pos, inline) {
        (Some(i), _) => raw.get(i + 1).cloned(),
        (None, Some(p)) => Some(p.to_string()),
        _ => None,
    };
    let Some(path) = path else { return Ok(raw) };
    let extra = config_args(&PathBuf::from(path))?;
    // Insert right after the subcommand name.
    let mut out = raw[..2.min(raw.len())].to_vec();
    out.extend(extra);
    out.extend(raw.into_iter().skip(2));
    Ok(out)
}

fn parse_agent(s: &str) -> anyhow::Result<AgentKind> {
    AgentKind::from_name(s.trim())
        .with_context(|| format!("unknown agent {s:?} (expected hrl, scripted or random)"))
}

fn base_config(c: &CommonArgs) -> ExperimentConfig {
    ExperimentConfig {
        level_type: c.level_type,
        difficulty: c.difficulty,
        level_seeds: c.fixed_level.map_or(LevelSeedPolicy::PerEpisode, LevelSeedPolicy::Fixed),
        level_options: LevelOptions {
            coin_monster_pairs: c.coin_monster_pairs,
        },
        episodes: c.episodes,
        learning: LearningParams {
            alpha: c.alpha,
            gamma: c.gamma,
            epsilon0: c.epsilon,
            epsilon_decay: c.epsilon_decay,
            epsilon_min: c.epsilon_min,
        },
        rewards: RewardConfig {
            episode_tick_limit: c.tick_limit,
            ..RewardConfig::default()
        },
        run_seed: c.run_seed,
        ..ExperimentConfig::default()
    }
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let trajectory_level = args.log_level.clone().or_else(|| {
        args.log_trajectory.as_ref().map(|t| {
            let mut p = t.clone().into_os_string();
            p.push(".level");
            PathBuf::from(p)
        })
    });
    let config = ExperimentConfig {
        agent: parse_agent(&args.agent)?,
        output: args.out.clone(),
        checkpoint: args.checkpoint.clone(),
        init_checkpoint: args.init_checkpoint.clone(),
        trajectory: args.log_trajectory.clone(),
        trajectory_level,
        ..base_config(&args.common)
    };
    let mut agent = AnyAgent::build(&config)?;
    let curve = run_training(&config, &mut agent)?;
    let s = curve.summary();
    println!("agent            {}", agent.name());
    println!("episodes         {}", s.episodes);
    println!("mean reward      {:.3}", s.mean_reward);
    println!("first 100 mean   {:.3}", s.mean_first_100);
    println!("last 100 mean    {:.3}", s.mean_last_100);
    println!("finish rate      {:.3}", s.finish_rate);
    if args.eval_episodes > 0 {
        let results = evaluate(&config, &mut agent, args.eval_episodes)?;
        let rewards: Vec<f64> = results.iter().map(|r| r.total_reward).collect();
        println!("eval mean reward {:.3} over {} episodes", mean(&rewards), rewards.len());
    }
    Ok(())
}

fn compare(args: CompareArgs) -> anyhow::Result<()> {
    let agents = args
        .agents
        .split(',')
        .map(parse_agent)
        .collect::<anyhow::Result<Vec<_>>>()?;
    let base = base_config(&args.common);
    let report = compare_agents(&base, &agents, args.runs, &args.out_dir)?;
    print!("{}", report.to_text());
    Ok(())
}

fn replay_cmd(args: ReplayArgs) -> anyhow::Result<()> {
    let level = Level::load(&std::fs::read_to_string(&args.level_file)?)?;
    let text = std::fs::read_to_string(&args.trajectory)?;
    let rewards = RewardConfig {
        episode_tick_limit: args.tick_limit,
        ..RewardConfig::default()
    };
    let s = replay(&level, &text, PhysicsConfig::default(), rewards)?;
    println!(
        "replay ok: {} ticks, total reward {}, final column {}",
        s.ticks, s.total_reward, s.final_column
    );
    Ok(())
}

fn gen_level(args: GenLevelArgs) -> anyhow::Result<()> {
    let options = LevelOptions {
        coin_monster_pairs: args.coin_monster_pairs,
    };
    let level = generate_level_with(args.level_type, args.difficulty, args.seed, options)?;
    match args.out {
        Some(p) => std::fs::write(p, level.dump())?,
        None => print!("{}", level.dump()),
    }
    Ok(())
}

fn run() -> anyhow::Result<()> {
    let raw = expand_config(std::env::args().collect())?;
    let cli = Cli::parse_from(raw);
    match cli.command {
        Command::Train(a) => train(a),
        Command::Compare(a) => compare(a),
        Command::Replay(a) => replay_cmd(a),
        Command::GenLevel(a) => gen_level(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
