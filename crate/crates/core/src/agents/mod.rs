//! Executable policies: the hierarchical learner and two baselines.

mod hrl;
mod random;
mod scripted;

pub use hrl::{AgentPhase, HrlAgent, Substate, UpdateStats};
pub use random::{random_act, RandomAgent};
pub use scripted::{scripted_act, ScriptedAgent};

use crate::env::{Observation, Outcome};
use crate::error::Result;
use crate::operators::{FloKind, Klo};
use crate::perception::RelationalState;

/// What a policy chose for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub klo: Klo,
    /// The FLO whose substate issued the KLO, for hierarchical agents.
    pub flo: Option<FloKind>,
}

pub trait Policy {
    fn begin_episode(&mut self) {}

    /// Chooses the next KLO. `reward` is the reward received for the
    /// previous decision (0 on the first tick of an episode).
    fn act(&mut self, obs: &Observation, state: &RelationalState, reward: f64) -> Result<Decision>;

    /// Called once after the final step of an episode.
    fn end_episode(&mut self, final_reward: f64, outcome: Outcome) -> Result<()>;

    fn name(&self) -> &'static str;

    /// FLO selections per kind since the last call.
    fn take_flo_selections(&mut self) -> [u32; 5] {
        [0; 5]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Hrl,
    Scripted,
    Random,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Hrl => "hrl",
            AgentKind::Scripted => "scripted",
            AgentKind::Random => "random",
        }
    }

    pub fn from_name(s: &str) -> Option<AgentKind> {
        [AgentKind::Hrl, AgentKind::Scripted, AgentKind::Random]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Summary of one finished episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub total_reward: f64,
    pub ticks: u32,
    pub outcome: Outcome,
    pub coins: u32,
    pub kills: u32,
    pub blocks: u32,
    pub max_column: i64,
    /// Indexed by `FloKind::index`.
    pub flo_selections: [u32; 5],
}
