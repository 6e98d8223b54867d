//! Experiment runner: episode loop, seed schedule, training runs with CSV
//! learning curves, agent comparison and trajectory replay.

mod compare;
mod curve;
mod replay;

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub use compare::{compare_agents, AgentRow, ComparisonReport};
pub use curve::{mean, CurveRow, CurveSummary, LearningCurve, CSV_HEADER, ROLLING_WINDOW};
pub use replay::{parse_trajectory, replay, ReplaySummary, TrajectoryLine};

use crate::agents::{
    AgentKind, Decision, EpisodeResult, HrlAgent, Policy, RandomAgent, ScriptedAgent,
};
use crate::env::{
    generate_level_with, Env, Level, LevelOptions, Observation, Outcome, PhysicsConfig,
    RewardConfig, StepEvents,
};
use crate::error::{Error, Result};
use crate::learning::{LearningParams, QStore};
use crate::perception::{perceive, RelationalState};

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const AGENT_SALT: u64 = 0xa6e7_0000_0000_0001;
const EVAL_SALT: u64 = 0xe7a1_0000_0000_0002;

/// Level seed for `episode` of the run `run_seed`.
pub fn level_seed(run_seed: u64, episode: u32) -> u64 {
    splitmix64(splitmix64(run_seed) ^ u64::from(episode))
}

pub fn agent_seed(run_seed: u64) -> u64 {
    splitmix64(run_seed ^ AGENT_SALT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSeedPolicy {
    Fixed(u64),
    PerEpisode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub level_type: i64,
    pub difficulty: i64,
    pub level_seeds: LevelSeedPolicy,
    pub level_options: LevelOptions,
    pub episodes: u32,
    pub agent: AgentKind,
    pub learning: LearningParams<f64>,
    pub rewards: RewardConfig,
    pub physics: PhysicsConfig,
    pub run_seed: u64,
    pub output: Option<PathBuf>,
    /// Q-table written after training (HRL only).
    pub checkpoint: Option<PathBuf>,
    /// Q-table loaded before training (HRL only).
    pub init_checkpoint: Option<PathBuf>,
    /// Per-tick log of the final episode.
    pub trajectory: Option<PathBuf>,
    /// Level file of the final episode, for replay.
    pub trajectory_level: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            level_type: 0,
            difficulty: 0,
            level_seeds: LevelSeedPolicy::PerEpisode,
            level_options: LevelOptions::default(),
            episodes: 2000,
            agent: AgentKind::Hrl,
            learning: LearningParams::default(),
            rewards: RewardConfig::default(),
            physics: PhysicsConfig::default(),
            run_seed: 1,
            output: None,
            checkpoint: None,
            init_checkpoint: None,
            trajectory: None,
            trajectory_level: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes < 1 {
            return Err(Error::InvalidParam("episodes must be at least 1".into()));
        }
        if self.level_type != 0 {
            return Err(Error::UnsupportedLevelType(self.level_type));
        }
        if self.difficulty < 0 {
            return Err(Error::InvalidDifficulty(self.difficulty));
        }
        self.learning.validate()?;
        self.rewards.validate()
    }

    pub fn level_for(&self, episode: u32) -> Result<Level> {
        let seed = match self.level_seeds {
            LevelSeedPolicy::Fixed(s) => s,
            LevelSeedPolicy::PerEpisode => level_seed(self.run_seed, episode),
        };
        generate_level_with(self.level_type, self.difficulty, seed, self.level_options)
    }

    /// Held-out levels for greedy evaluation, disjoint from the training
    /// schedule's stream.
    pub fn eval_level_for(&self, episode: u32) -> Result<Level> {
        let seed = match self.level_seeds {
            LevelSeedPolicy::Fixed(s) => s,
            LevelSeedPolicy::PerEpisode => level_seed(self.run_seed ^ EVAL_SALT, episode),
        };
        generate_level_with(self.level_type, self.difficulty, seed, self.level_options)
    }
}

/// Any of the three agents behind one type.
#[derive(Debug, Clone)]
pub enum AnyAgent {
    Hrl(Box<HrlAgent<f64>>),
    Scripted(ScriptedAgent),
    Random(Box<RandomAgent>),
}

impl AnyAgent {
    pub fn build(config: &ExperimentConfig) -> Result<AnyAgent> {
        let seed = agent_seed(config.run_seed);
        Ok(match config.agent {
            AgentKind::Hrl => {
                let mut agent = HrlAgent::new(config.learning, seed, &config.rewards)?;
                if let Some(path) = &config.init_checkpoint {
                    let text = std::fs::read_to_string(path)?;
                    agent = agent.with_store(QStore::load(&text)?);
                }
                AnyAgent::Hrl(Box::new(agent))
            }
            AgentKind::Scripted => AnyAgent::Scripted(ScriptedAgent),
            AgentKind::Random => AnyAgent::Random(Box::new(RandomAgent::new(seed))),
        })
    }

    pub fn as_hrl(&self) -> Option<&HrlAgent<f64>> {
        match self {
            AnyAgent::Hrl(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_hrl_mut(&mut self) -> Option<&mut HrlAgent<f64>> {
        match self {
            AnyAgent::Hrl(a) => Some(a),
            _ => None,
        }
    }

    fn policy(&mut self) -> &mut dyn Policy {
        match self {
            AnyAgent::Hrl(a) => a.as_mut(),
            AnyAgent::Scripted(a) => a,
            AnyAgent::Random(a) => a.as_mut(),
        }
    }
}

impl Policy for AnyAgent {
    fn begin_episode(&mut self) {
        self.policy().begin_episode()
    }

    fn act(&mut self, obs: &Observation, state: &RelationalState, reward: f64) -> Result<Decision> {
        self.policy().act(obs, state, reward)
    }

    fn end_episode(&mut self, final_reward: f64, outcome: Outcome) -> Result<()> {
        self.policy().end_episode(final_reward, outcome)
    }

    fn name(&self) -> &'static str {
        match self {
            AnyAgent::Hrl(_) => "hrl",
            AnyAgent::Scripted(_) => "scripted",
            AnyAgent::Random(_) => "random",
        }
    }

    fn take_flo_selections(&mut self) -> [u32; 5] {
        self.policy().take_flo_selections()
    }
}

/// Everything known about one tick after it ran.
#[derive(Debug)]
pub struct TickRecord<'a> {
    /// Tick index the decision was made at.
    pub tick: u32,
    pub observation: &'a Observation,
    pub state: &'a RelationalState,
    pub decision: Decision,
    pub reward: f64,
    pub events: StepEvents,
    pub next_observation: &'a Observation,
    pub outcome: Outcome,
}

impl TickRecord<'_> {
    pub fn trajectory_line(&self) -> String {
        TrajectoryLine {
            tick: self.tick,
            flo: self.decision.flo,
            klo: self.decision.klo,
            reward: self.reward,
            column: self.next_observation.mario.column(),
        }
        .to_string()
    }
}

/// Runs one episode from reset to termination.
pub fn run_episode(env: &mut Env, level: Level, agent: &mut dyn Policy) -> Result<EpisodeResult> {
    run_episode_with(env, level, agent, &mut |_| {})
}

/// As `run_episode`, calling `on_tick` after every step.
pub fn run_episode_with(
    env: &mut Env,
    level: Level,
    agent: &mut dyn Policy,
    on_tick: &mut dyn FnMut(&TickRecord<'_>),
) -> Result<EpisodeResult> {
    let mut obs = env.reset(level);
    agent.begin_episode();
    let _ = agent.take_flo_selections();
    let mut reward = 0.0;
    let mut result = EpisodeResult {
        total_reward: 0.0,
        ticks: 0,
        outcome: Outcome::Running,
        coins: 0,
        kills: 0,
        blocks: 0,
        max_column: obs.mario.max_column_reached,
        flo_selections: [0; 5],
    };
    loop {
        let state = perceive(&obs);
        let decision = agent.act(&obs, &state, reward)?;
        let step = env.step(decision.klo.action())?;
        reward = step.reward;
        result.total_reward += step.reward;
        result.ticks += 1;
        result.coins += step.events.coins;
        result.kills += step.events.kills;
        result.blocks += step.events.blocks;
        on_tick(&TickRecord {
            tick: obs.tick,
            observation: &obs,
            state: &state,
            decision,
            reward: step.reward,
            events: step.events,
            next_observation: &step.observation,
            outcome: step.outcome,
        });
        if step.done {
            result.outcome = step.outcome;
            result.max_column = step.observation.mario.max_column_reached;
            agent.end_episode(step.reward, step.outcome)?;
            result.flo_selections = agent.take_flo_selections();
            return Ok(result);
        }
        obs = step.observation;
    }
}

fn create_output(path: &Option<PathBuf>) -> Result<Option<(PathBuf, File)>> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Ok(Some((p.clone(), File::create(p)?)))
        }
        None => Ok(None),
    }
}

/// Trains (or just runs) `agent` for `config.episodes` episodes, keeping its
/// state across episodes, and writes the configured outputs. Output files
/// are opened before the first episode so bad paths fail fast.
pub fn run_training(config: &ExperimentConfig, agent: &mut AnyAgent) -> Result<LearningCurve> {
    config.validate()?;
    let csv = create_output(&config.output)?;
    let checkpoint = create_output(&config.checkpoint)?;
    let trajectory = create_output(&config.trajectory)?;
    let mut trajectory_level = create_output(&config.trajectory_level)?;

    let mut env = Env::new(config.level_for(0)?, config.physics, config.rewards);
    let mut curve = LearningCurve::default();
    let last = config.episodes - 1;
    let mut trace = String::new();
    for episode in 0..config.episodes {
        let level = config.level_for(episode)?;
        let log = episode == last && trajectory.is_some();
        if log {
            if let Some((_, f)) = trajectory_level.as_mut() {
                f.write_all(level.dump().as_bytes())?;
            }
        }
        let result = if log {
            run_episode_with(&mut env, level, agent, &mut |rec| {
                trace.push_str(&rec.trajectory_line());
                trace.push('\n');
            })?
        } else {
            run_episode(&mut env, level, agent)?
        };
        curve.push(result);
    }

    if let Some((_, mut f)) = csv {
        f.write_all(curve.to_csv().as_bytes())?;
    }
    if let Some((_, mut f)) = trajectory {
        f.write_all(trace.as_bytes())?;
    }
    if let Some((_, mut f)) = checkpoint {
        if let Some(hrl) = agent.as_hrl() {
            f.write_all(hrl.store().dump().as_bytes())?;
        }
    }
    Ok(curve)
}

/// Builds the configured agent and trains it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<LearningCurve> {
    let mut agent = AnyAgent::build(config)?;
    run_training(config, &mut agent)
}

/// Runs `episodes` greedy, non-learning episodes on held-out levels. The
/// agent's learning flag is restored afterwards.
pub fn evaluate(
    config: &ExperimentConfig,
    agent: &mut AnyAgent,
    episodes: u32,
) -> Result<Vec<EpisodeResult>> {
    if let Some(h) = agent.as_hrl_mut() {
        h.set_learning(false);
    }
    let mut env = Env::new(config.eval_level_for(0)?, config.physics, config.rewards);
    let out = (0..episodes)
        .map(|e| run_episode(&mut env, config.eval_level_for(e)?, agent))
        .collect();
    if let Some(h) = agent.as_hrl_mut() {
        h.set_learning(true);
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EntityKind, Facing, MonsterSpawn, GROUND_ROW, TileKind};

    #[test]
    fn seed_schedule_is_pure() {
        assert_eq!(level_seed(1, 5), level_seed(1, 5));
        assert_ne!(level_seed(1, 5), level_seed(1, 6));
        assert_ne!(level_seed(1, 5), level_seed(2, 5));
    }

    #[test]
    fn random_agent_respects_tick_limit() {
        let rewards = RewardConfig {
            episode_tick_limit: 200,
            ..RewardConfig::default()
        };
        let mut env = Env::new(Level::flat(40), PhysicsConfig::default(), rewards);
        let mut agent = RandomAgent::new(9);
        let r = run_episode(&mut env, Level::flat(40), &mut agent).unwrap();
        assert!(r.ticks <= 200);
        assert_ne!(r.outcome, Outcome::Running);
    }

    #[test]
    fn scripted_finishes_hazard_free_level() {
        let mut level = Level::flat(60);
        for c in [20, 21] {
            level.set(c, 12, TileKind::PipeTop);
            level.set(c, 13, TileKind::PipeBody);
            level.set(c, 14, TileKind::PipeBody);
        }
        level.set(30, 11, TileKind::QuestionBlock);
        level.set(40, 11, TileKind::Coin);
        let mut env = Env::with_defaults(level.clone());
        let r = run_episode(&mut env, level, &mut ScriptedAgent).unwrap();
        assert_eq!(r.outcome, Outcome::Finished);
        assert_eq!(r.blocks, 1);
    }

    #[test]
    fn same_config_same_result() {
        let mut level = Level::flat(60);
        level.monster_spawns.push(MonsterSpawn {
            kind: EntityKind::Walker,
            col: 20,
            row: GROUND_ROW - 1,
            facing: Facing::Left,
        });
        let run = || {
            let mut env = Env::with_defaults(level.clone());
            let mut agent = RandomAgent::new(4);
            run_episode(&mut env, level.clone(), &mut agent).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn single_episode_experiment_writes_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("curve.csv");
        let config = ExperimentConfig {
            episodes: 1,
            agent: AgentKind::Scripted,
            output: Some(out.clone()),
            ..ExperimentConfig::default()
        };
        let curve = run_experiment(&config).unwrap();
        assert_eq!(curve.rows.len(), 1);
        let text = std::fs::read_to_string(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text, curve.to_csv());
    }

    #[test]
    fn unwritable_output_fails_before_running() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let config = ExperimentConfig {
            episodes: 1,
            agent: AgentKind::Scripted,
            output: Some(blocker.join("curve.csv")),
            ..ExperimentConfig::default()
        };
        assert!(matches!(run_experiment(&config), Err(Error::Io(_))));
    }

    #[test]
    fn scripted_on_fixed_level_is_constant() {
        let config = ExperimentConfig {
            episodes: 200,
            agent: AgentKind::Scripted,
            level_seeds: LevelSeedPolicy::Fixed(3),
            ..ExperimentConfig::default()
        };
        let curve = run_experiment(&config).unwrap();
        let first = curve.rows[0].result.total_reward;
        assert!(curve.rows.iter().all(|r| r.result.total_reward == first));
    }
}
