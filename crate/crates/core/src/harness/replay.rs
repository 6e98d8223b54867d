use std::fmt;

use crate::env::{Env, Level, PhysicsConfig, RewardConfig};
use crate::error::{parse_err, Error, Result};
use crate::operators::{FloKind, Klo};

/// One logged tick: `{tick} flo={kind|none} klo={klo} r={reward} x={col}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryLine {
    pub tick: u32,
    pub flo: Option<FloKind>,
    pub klo: Klo,
    pub reward: f64,
    /// Mario's column after the step.
    pub column: i64,
}

impl fmt::Display for TrajectoryLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} flo={} klo={} r={} x={}",
            self.tick,
            self.flo.map_or("none", FloKind::name),
            self.klo.name(),
            self.reward,
            self.column
        )
    }
}

impl TrajectoryLine {
    pub fn parse(line: &str, n: usize) -> Result<TrajectoryLine> {
        let mut parts = line.split_whitespace();
        let tick = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(n, "bad tick"))?;
        let mut field = |key: &str| -> Result<&str> {
            parts
                .next()
                .and_then(|p| p.strip_prefix(key))
                .and_then(|p| p.strip_prefix('='))
                .ok_or_else(|| parse_err(n, format!("missing {key}=")))
        };
        let flo = match field("flo")? {
            "none" => None,
            s => Some(FloKind::from_name(s).ok_or_else(|| parse_err(n, "bad flo"))?),
        };
        let klo = Klo::from_name(field("klo")?).ok_or_else(|| parse_err(n, "bad klo"))?;
        let reward = field("r")?.parse().map_err(|_| parse_err(n, "bad reward"))?;
        let column = field("x")?.parse().map_err(|_| parse_err(n, "bad column"))?;
        if parts.next().is_some() {
            return Err(parse_err(n, "trailing fields"));
        }
        Ok(TrajectoryLine {
            tick,
            flo,
            klo,
            reward,
            column,
        })
    }
}

pub fn parse_trajectory(text: &str) -> Result<Vec<TrajectoryLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| TrajectoryLine::parse(l, i + 1))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplaySummary {
    pub ticks: u32,
    pub total_reward: f64,
    pub final_column: i64,
}

/// Re-executes the logged KLOs on `level` and checks every reward, column
/// and tick index bit-for-bit, and that the episode ends on the last line.
pub fn replay(
    level: &Level,
    text: &str,
    physics: PhysicsConfig,
    rewards: RewardConfig,
) -> Result<ReplaySummary> {
    let lines = parse_trajectory(text)?;
    if lines.is_empty() {
        return Err(Error::ReplayMismatch {
            tick: 0,
            msg: "empty trajectory".into(),
        });
    }
    let mut env = Env::new(level.clone(), physics, rewards);
    let mut total = 0.0;
    let mut column = env.mario().column();
    for (i, line) in lines.iter().enumerate() {
        let tick = env.tick();
        let mismatch = |msg: String| Error::ReplayMismatch { tick, msg };
        if line.tick != tick {
            return Err(mismatch(format!("logged tick {}", line.tick)));
        }
        if env.is_done() {
            return Err(mismatch("episode already ended".into()));
        }
        let step = env.step(line.klo.action())?;
        if step.reward.to_bits() != line.reward.to_bits() {
            return Err(mismatch(format!(
                "reward {} but logged {}",
                step.reward, line.reward
            )));
        }
        column = step.observation.mario.column();
        if column != line.column {
            return Err(mismatch(format!("column {column} but logged {}", line.column)));
        }
        total += step.reward;
        if step.done != (i + 1 == lines.len()) {
            return Err(mismatch(if step.done {
                "episode ended before the log did".into()
            } else {
                "log ended before the episode did".into()
            }));
        }
    }
    Ok(ReplaySummary {
        ticks: lines.len() as u32,
        total_reward: total,
        final_column: column,
    })
}
