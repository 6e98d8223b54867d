use std::fmt::Write as _;

use crate::agents::EpisodeResult;
use crate::env::Outcome;
use crate::error::{parse_err, Result};

pub const CSV_HEADER: &str =
    "episode,reward,ticks,outcome,coins,kills,blocks,max_column,rolling_mean_100";
pub const ROLLING_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub episode: u32,
    pub result: EpisodeResult,
    pub rolling_mean_100: f64,
}

/// Per-episode results of one experiment, in episode order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearningCurve {
    pub rows: Vec<CurveRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSummary {
    pub episodes: usize,
    pub mean_reward: f64,
    pub mean_first_100: f64,
    pub mean_last_100: f64,
    pub finish_rate: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

impl LearningCurve {
    /// Appends a result, computing the trailing mean over the last
    /// `ROLLING_WINDOW` episodes (fewer at the start).
    pub fn push(&mut self, result: EpisodeResult) {
        let episode = self.rows.len() as u32;
        let start = self.rows.len().saturating_sub(ROLLING_WINDOW - 1);
        let window: Vec<f64> = self.rows[start..]
            .iter()
            .map(|r| r.result.total_reward)
            .chain(std::iter::once(result.total_reward))
            .collect();
        self.rows.push(CurveRow {
            episode,
            rolling_mean_100: mean(&window),
            result,
        });
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.result.total_reward).collect()
    }

    pub fn summary(&self) -> CurveSummary {
        let rewards = self.rewards();
        let n = rewards.len();
        let head = &rewards[..n.min(ROLLING_WINDOW)];
        let tail = &rewards[n.saturating_sub(ROLLING_WINDOW)..];
        let finished = self
            .rows
            .iter()
            .filter(|r| r.result.outcome == Outcome::Finished)
            .count();
        CurveSummary {
            episodes: n,
            mean_reward: mean(&rewards),
            mean_first_100: mean(head),
            mean_last_100: mean(tail),
            finish_rate: if n == 0 { 0.0 } else { finished as f64 / n as f64 },
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let r = &row.result;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                row.episode,
                r.total_reward,
                r.ticks,
                r.outcome.name(),
                r.coins,
                r.kills,
                r.blocks,
                r.max_column,
                row.rolling_mean_100
            );
        }
        out
    }

    /// Parses a curve CSV. FLO selection counts are not part of the file and
    /// load as zero.
    pub fn from_csv(text: &str) -> Result<LearningCurve> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            _ => return Err(parse_err(1, "missing or unexpected CSV header")),
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let n = idx + 1;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(parse_err(n, "expected 9 columns"));
            }
            let bad = |what: &str| parse_err(n, format!("bad {what}"));
            rows.push(CurveRow {
                episode: cols[0].parse().map_err(|_| bad("episode"))?,
                result: EpisodeResult {
                    total_reward: cols[1].parse().map_err(|_| bad("reward"))?,
                    ticks: cols[2].parse().map_err(|_| bad("ticks"))?,
                    outcome: Outcome::from_name(cols[3]).ok_or_else(|| bad("outcome"))?,
                    coins: cols[4].parse().map_err(|_| bad("coins"))?,
                    kills: cols[5].parse().map_err(|_| bad("kills"))?,
                    blocks: cols[6].parse().map_err(|_| bad("blocks"))?,
                    max_column: cols[7].parse().map_err(|_| bad("max_column"))?,
                    flo_selections: [0; 5],
                },
                rolling_mean_100: cols[8].parse().map_err(|_| bad("rolling mean"))?,
            });
        }
        Ok(LearningCurve { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(reward: f64) -> EpisodeResult {
        EpisodeResult {
            total_reward: reward,
            ticks: 10,
            outcome: Outcome::TimedOut,
            coins: 0,
            kills: 0,
            blocks: 0,
            max_column: 2,
            flo_selections: [0; 5],
        }
    }

    #[test]
    fn one_episode_csv() {
        let mut c = LearningCurve::default();
        c.push(result(1.5));
        let csv = c.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().nth(1).unwrap(), "0,1.5,10,timed_out,0,0,0,2,1.5");
    }

    #[test]
    fn rolling_mean_window() {
        let mut c = LearningCurve::default();
        for i in 0..250 {
            c.push(result(i as f64));
        }
        // Episodes 150..=249 average to 199.5.
        assert_eq!(c.rows[249].rolling_mean_100, 199.5);
        assert_eq!(c.rows[0].rolling_mean_100, 0.0);
        assert_eq!(c.rows[9].rolling_mean_100, 4.5);
        let s = c.summary();
        assert_eq!(s.mean_first_100, 49.5);
        assert_eq!(s.mean_last_100, 199.5);
    }

    #[test]
    fn csv_round_trip() {
        let mut c = LearningCurve::default();
        for r in [-100.05, 3.25, 0.1 + 0.2] {
            c.push(result(r));
        }
        let back = LearningCurve::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
        assert!(LearningCurve::from_csv("nope\n").is_err());
    }
}
