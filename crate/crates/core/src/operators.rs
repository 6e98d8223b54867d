//! The two-level operator hierarchy: keystroke-level operators (KLOs),
//! functional-level operators (FLOs) with their proposal conditions, and the
//! rules that close a FLO's substate.

use crate::env::{Action, Direction, Outcome};
use crate::perception::{ObjectId, ObjectKind, RelationalState};

/// A primitive controller input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Klo {
    NoOp,
    Left,
    Right,
    Jump,
    JumpLeft,
    JumpRight,
    Fire,
}

impl Klo {
    pub const ALL: [Klo; 7] = [
        Klo::NoOp,
        Klo::Left,
        Klo::Right,
        Klo::Jump,
        Klo::JumpLeft,
        Klo::JumpRight,
        Klo::Fire,
    ];

    pub fn action(self) -> Action {
        let (direction, jump, fire) = match self {
            Klo::NoOp => (Direction::None, false, false),
            Klo::Left => (Direction::Left, false, false),
            Klo::Right => (Direction::Right, false, false),
            Klo::Jump => (Direction::None, true, false),
            Klo::JumpLeft => (Direction::Left, true, false),
            Klo::JumpRight => (Direction::Right, true, false),
            Klo::Fire => (Direction::None, false, true),
        };
        Action {
            direction,
            jump,
            fire,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Klo::NoOp => "noop",
            Klo::Left => "left",
            Klo::Right => "right",
            Klo::Jump => "jump",
            Klo::JumpLeft => "jump_left",
            Klo::JumpRight => "jump_right",
            Klo::Fire => "fire",
        }
    }

    pub fn from_name(s: &str) -> Option<Klo> {
        Klo::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FloKind {
    TackleMonster,
    GrabCoin,
    HitQuestionBlock,
    CrossPit,
    Advance,
}

impl FloKind {
    pub const ALL: [FloKind; 5] = [
        FloKind::TackleMonster,
        FloKind::GrabCoin,
        FloKind::HitQuestionBlock,
        FloKind::CrossPit,
        FloKind::Advance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FloKind::TackleMonster => "tackle_monster",
            FloKind::GrabCoin => "grab_coin",
            FloKind::HitQuestionBlock => "hit_question_block",
            FloKind::CrossPit => "cross_pit",
            FloKind::Advance => "advance",
        }
    }

    pub fn from_name(s: &str) -> Option<FloKind> {
        FloKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A FLO bound to the object that caused its proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloInstance {
    pub kind: FloKind,
    pub target: Option<ObjectId>,
    /// Column span of the target when proposed.
    pub target_span: Option<(i64, i64)>,
    pub proposed_at_tick: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    TargetLost,
    Timeout,
    MarioDied,
    EpisodeEnded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationStatus {
    Active,
    Success,
    Failure(FailureReason),
}

pub const SUBSTATE_TIMEOUT: u32 = 50;
pub const ADVANCE_COMMITMENT: u32 = 20;

/// Every FLO whose precondition holds, ordered by (kind, target id), plus
/// exactly one `Advance` at the end.
pub fn propose_flos(state: &RelationalState) -> Vec<FloInstance> {
    let mut out: Vec<FloInstance> = state
        .facts
        .iter()
        .filter_map(|f| {
            let kind = match f.kind {
                ObjectKind::Monster if f.isthreat => FloKind::TackleMonster,
                ObjectKind::Coin if f.isreachable => FloKind::GrabCoin,
                ObjectKind::QuestionBlock if f.isreachable => FloKind::HitQuestionBlock,
                ObjectKind::Pit if f.is_ahead => FloKind::CrossPit,
                _ => return None,
            };
            Some(FloInstance {
                kind,
                target: Some(f.object),
                target_span: Some(f.col_span),
                proposed_at_tick: state.tick,
            })
        })
        .collect();
    out.sort_by_key(|f| (f.kind, f.target));
    out.push(FloInstance {
        kind: FloKind::Advance,
        target: None,
        target_span: None,
        proposed_at_tick: state.tick,
    });
    out
}

fn span_visible(span: Option<(i64, i64)>, state: &RelationalState) -> bool {
    match (span, state.view_span) {
        (Some((a, b)), Some((lo, hi))) => a <= hi && b >= lo,
        _ => true,
    }
}

pub fn flo_terminated(
    flo: &FloInstance,
    state: &RelationalState,
    ticks_in_substate: u32,
    episode_outcome: Outcome,
) -> TerminationStatus {
    use TerminationStatus::*;
    match episode_outcome {
        Outcome::Running => {}
        Outcome::Died => return Failure(FailureReason::MarioDied),
        Outcome::Finished | Outcome::TimedOut => return Failure(FailureReason::EpisodeEnded),
    }
    let present = flo.target.and_then(|id| state.fact(id)).is_some();
    match flo.kind {
        FloKind::TackleMonster => {
            if !present {
                return Success;
            }
        }
        FloKind::GrabCoin | FloKind::HitQuestionBlock => {
            if !present {
                return if span_visible(flo.target_span, state) {
                    Success
                } else {
                    Failure(FailureReason::TargetLost)
                };
            }
        }
        FloKind::CrossPit => {
            let right_edge = flo.target_span.map_or(i64::MIN, |s| s.1);
            if state.mario_column > right_edge {
                return Success;
            }
            if !present {
                return Failure(FailureReason::TargetLost);
            }
        }
        FloKind::Advance => {
            if propose_flos(state).len() > 1 || ticks_in_substate >= ADVANCE_COMMITMENT {
                return Success;
            }
        }
    }
    if ticks_in_substate >= SUBSTATE_TIMEOUT {
        return Failure(FailureReason::Timeout);
    }
    Active
}

/// KLOs available inside a FLO's substate. The order is the selection
/// candidate order, so it decides ties: NoOp always comes last.
pub fn legal_klos(kind: FloKind) -> &'static [Klo] {
    use Klo::*;
    match kind {
        FloKind::TackleMonster => &[Left, Right, Jump, JumpLeft, JumpRight, Fire, NoOp],
        FloKind::GrabCoin | FloKind::HitQuestionBlock => {
            &[Left, Right, Jump, JumpLeft, JumpRight, NoOp]
        }
        FloKind::CrossPit | FloKind::Advance => &[Right, JumpRight, NoOp],
    }
}
