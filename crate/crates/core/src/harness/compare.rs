use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::curve::{mean, LearningCurve};
use super::{run_experiment, splitmix64, ExperimentConfig};
use crate::agents::AgentKind;
use crate::error::{Error, Result};

/// Aggregate over runs for one agent: mean and sample standard deviation of
/// the per-run statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRow {
    pub agent: AgentKind,
    pub runs: usize,
    pub mean_reward: (f64, f64),
    pub last_100: (f64, f64),
    pub finish_rate: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<AgentRow>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (m, var.sqrt())
}

pub fn run_seed_for(base: u64, run: u32) -> u64 {
    splitmix64(base.wrapping_add(u64::from(run)))
}

pub fn curve_path(out_dir: &Path, agent: AgentKind, run: u32) -> PathBuf {
    out_dir.join(format!("{}_run{}.csv", agent.name(), run))
}

/// Trains every agent for `runs` independent runs (run `r` uses the same
/// seed for every agent), writes one CSV per (agent, run) into `out_dir`
/// and summarises them from the files written.
pub fn compare_agents(
    base: &ExperimentConfig,
    agents: &[AgentKind],
    runs: u32,
    out_dir: &Path,
) -> Result<ComparisonReport> {
    if runs < 3 {
        return Err(Error::InvalidParam("comparison needs at least 3 runs".into()));
    }
    if agents.len() < 2 {
        return Err(Error::InvalidParam("comparison needs at least 2 agents".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    for &agent in agents {
        for run in 0..runs {
            let config = ExperimentConfig {
                agent,
                run_seed: run_seed_for(base.run_seed, run),
                output: Some(curve_path(out_dir, agent, run)),
                checkpoint: None,
                trajectory: None,
                trajectory_level: None,
                ..base.clone()
            };
            run_experiment(&config)?;
        }
    }
    let mut rows = Vec::new();
    for &agent in agents {
        let mut means = Vec::new();
        let mut lasts = Vec::new();
        let mut finishes = Vec::new();
        for run in 0..runs {
            let text = std::fs::read_to_string(curve_path(out_dir, agent, run))?;
            let s = LearningCurve::from_csv(&text)?.summary();
            means.push(s.mean_reward);
            lasts.push(s.mean_last_100);
            finishes.push(s.finish_rate);
        }
        rows.push(AgentRow {
            agent,
            runs: runs as usize,
            mean_reward: mean_sd(&means),
            last_100: mean_sd(&lasts),
            finish_rate: mean_sd(&finishes),
        });
    }
    Ok(ComparisonReport { rows })
}

impl ComparisonReport {
    pub fn row(&self, agent: AgentKind) -> Option<&AgentRow> {
        self.rows.iter().find(|r| r.agent == agent)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("agent     runs  mean_reward          last_100             finish_rate\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<9} {:>4}  {:>9.3} ± {:<8.3} {:>9.3} ± {:<8.3} {:>6.3} ± {:.3}",
                r.agent.name(),
                r.runs,
                r.mean_reward.0,
                r.mean_reward.1,
                r.last_100.0,
                r.last_100.1,
                r.finish_rate.0,
                r.finish_rate.1
            );
        }
        out
    }
}
