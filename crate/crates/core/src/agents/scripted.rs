use super::{Decision, Policy};
use crate::env::{Observation, Outcome};
use crate::error::Result;
use crate::operators::Klo;
use crate::perception::{ObjectKind, RelationalFact, RelationalState};

/// How close (in columns) a hazard must be before the script reacts.
const REACT_DX: i64 = 2;

fn ahead_within(f: &RelationalFact, max_dx: i64) -> bool {
    f.dx > 0 && f.dx <= max_dx
}

/// No solid tile between Mario's head and `row` in column `col`.
fn clear_above(obs: &Observation, col: i64, row: i64) -> bool {
    let head = obs.mario.row() - 1;
    (row + 1..=head).all(|r| !obs.tile(col, r).is_some_and(|t| t.is_solid()))
}

/// Fixed-priority rule policy.
///
/// 1. pit ahead within two columns: jump right
/// 2. threatening monster ahead: jump right over it when within two columns,
///    otherwise fire if ready
/// 3. pipe or wall directly ahead: jump right
/// 4. reachable coin or question block overhead: jump (toward it when it is
///    one column right)
/// 5. otherwise run right
pub fn scripted_act(obs: &Observation, state: &RelationalState) -> Klo {
    let facts = &state.facts;
    if facts
        .iter()
        .any(|f| f.kind == ObjectKind::Pit && f.is_ahead && ahead_within(f, REACT_DX))
    {
        return Klo::JumpRight;
    }
    let threat_ahead = facts
        .iter()
        .filter(|f| f.kind == ObjectKind::Monster && f.isthreat && f.dx >= 0)
        .min_by_key(|f| f.dx);
    if let Some(m) = threat_ahead {
        if m.dx <= REACT_DX {
            return Klo::JumpRight;
        }
        if state.mario_fire_ready {
            return Klo::Fire;
        }
    }
    let wall = facts.iter().any(|f| {
        ahead_within(f, REACT_DX)
            && match f.kind {
                ObjectKind::Pipe => true,
                ObjectKind::Platform => (-1..=0).contains(&f.dy),
                _ => false,
            }
    });
    if wall {
        return Klo::JumpRight;
    }
    let overhead = facts.iter().find(|f| {
        matches!(f.kind, ObjectKind::Coin | ObjectKind::QuestionBlock)
            && f.isreachable
            && f.dy < 0
            && (0..=1).contains(&f.dx)
            && clear_above(obs, state.mario_column + f.dx, obs.mario.row() + f.dy)
    });
    if let Some(f) = overhead {
        return if f.dx == 0 { Klo::Jump } else { Klo::JumpRight };
    }
    Klo::Right
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedAgent;

impl Policy for ScriptedAgent {
    fn act(&mut self, obs: &Observation, state: &RelationalState, _reward: f64) -> Result<Decision> {
        Ok(Decision {
            klo: scripted_act(obs, state),
            flo: None,
        })
    }

    fn end_episode(&mut self, _final_reward: f64, _outcome: Outcome) -> Result<()> {
        Ok(())
    }

    fn name(&self) -> &'static str {
        "scripted"
    }
}
