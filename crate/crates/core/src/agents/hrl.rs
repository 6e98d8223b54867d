use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Decision, Policy};
use crate::env::{Observation, Outcome, RewardConfig};
use crate::error::{Error, Result};
use crate::learning::{
    flo_key, klo_key, sarsa_update, scalar, select, smdp_flo_update, Exploration, FloKey, KloKey,
    LearningParams, QStore, Scalar, ValueTable,
};
use crate::operators::{
    flo_terminated, legal_klos, propose_flos, FailureReason, FloInstance, Klo, TerminationStatus,
};
use crate::perception::RelationalState;

/// An open FLO substate.
#[derive(Debug, Clone, PartialEq)]
pub struct Substate<T> {
    pub flo: FloInstance,
    pub flo_key: FloKey,
    /// KLOs issued so far inside this substate.
    pub ticks_in_substate: u32,
    /// Discounted reward collected so far.
    pub accumulated_r: T,
    /// `gamma^(rewards credited so far)`.
    discount: T,
    pub last_klo: Option<(KloKey, Klo)>,
    /// Unique per substate over the agent's lifetime.
    pub serial: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentPhase<T> {
    SelectingFlo,
    ExecutingFlo(Substate<T>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateStats {
    pub actions: u64,
    pub klo_updates: u64,
    pub flo_updates: u64,
    pub substates_opened: u64,
    pub substates_closed: u64,
}

/// Two-level SARSA learner: picks a FLO, then KLOs inside its substate
/// until the FLO terminates.
#[derive(Debug, Clone)]
pub struct HrlAgent<T: Scalar> {
    store: QStore<T>,
    params: LearningParams<T>,
    exploration: Exploration,
    rng: ChaCha8Rng,
    phase: AgentPhase<T>,
    learning: bool,
    in_episode: bool,
    stats: UpdateStats,
    selections: [u32; 5],
    next_serial: u64,
    last_status: Option<TerminationStatus>,
}

impl<T: Scalar> HrlAgent<T> {
    pub fn new(params: LearningParams<T>, seed: u64, rewards: &RewardConfig) -> Result<Self> {
        params.validate()?;
        let gamma = params.gamma.to_f64().unwrap();
        let bound = rewards.max_abs_step_reward() / (1.0 - gamma);
        Ok(HrlAgent {
            store: QStore::new().with_bound(scalar(bound)),
            exploration: Exploration::from_params(&params),
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: AgentPhase::SelectingFlo,
            learning: true,
            in_episode: false,
            stats: UpdateStats::default(),
            selections: [0; 5],
            next_serial: 0,
            last_status: None,
        })
    }

    /// Replaces the value tables, keeping this agent's value bound.
    pub fn with_store(mut self, store: QStore<T>) -> Self {
        let bound = self.store.bound();
        self.store = store;
        if let Some(b) = bound {
            self.store = std::mem::take(&mut self.store).with_bound(b);
        }
        self
    }

    pub fn store(&self) -> &QStore<T> {
        &self.store
    }

    pub fn params(&self) -> &LearningParams<T> {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        if self.learning {
            self.exploration.epsilon
        } else {
            0.0
        }
    }

    /// With learning off the agent acts greedily and never updates.
    pub fn set_learning(&mut self, on: bool) {
        self.learning = on;
    }

    pub fn phase(&self) -> &AgentPhase<T> {
        &self.phase
    }

    pub fn stats(&self) -> UpdateStats {
        self.stats
    }

    /// Status that closed the most recent substate.
    pub fn last_termination(&self) -> Option<TerminationStatus> {
        self.last_status
    }

    pub fn begin_episode(&mut self) {
        self.phase = AgentPhase::SelectingFlo;
        self.in_episode = true;
    }

    /// Greedy FLO choice in `state`, without side effects.
    pub fn greedy_flo(&self, state: &RelationalState) -> FloInstance {
        let cands = propose_flos(state);
        let mut best = 0;
        let mut best_v = self.store.value(&flo_key(state, &cands[0]));
        for (i, c) in cands.iter().enumerate().skip(1) {
            let v = self.store.value(&flo_key(state, c));
            if v > best_v {
                best = i;
                best_v = v;
            }
        }
        cands[best]
    }

    fn choose_klo(&mut self, key: KloKey) -> Result<Klo> {
        let legal = legal_klos(key.flo_kind);
        let values: Vec<T> = legal.iter().map(|&k| self.store.value(&(key, k))).collect();
        let eps = self.epsilon();
        let idx = select(legal, &values, eps, &mut self.rng)?;
        Ok(legal[idx])
    }

    fn klo_update(&mut self, prev: (KloKey, Klo), r: T, next: Option<(KloKey, Klo)>) -> Result<()> {
        if self.learning {
            let (a, g) = (self.params.alpha, self.params.gamma);
            sarsa_update(&mut self.store, prev, r, next.as_ref(), a, g)?;
            self.stats.klo_updates += 1;
        }
        Ok(())
    }

    fn flo_update(&mut self, closed: &Substate<T>, next: Option<FloKey>) -> Result<()> {
        if self.learning {
            let (a, g) = (self.params.alpha, self.params.gamma);
            smdp_flo_update(
                &mut self.store,
                closed.flo_key,
                closed.accumulated_r,
                closed.ticks_in_substate,
                next.as_ref(),
                a,
                g,
            )?;
            self.stats.flo_updates += 1;
        }
        Ok(())
    }

    /// One decision tick: credit `reward` to the running substate, close it
    /// if its FLO has terminated (selecting a successor in the same tick),
    /// then pick the next KLO.
    pub fn act_state(&mut self, state: &RelationalState, reward: f64) -> Result<Decision> {
        if !self.in_episode {
            return Err(Error::EpisodeOver);
        }
        if !reward.is_finite() {
            return Err(Error::NonFiniteReward(reward));
        }
        let r: T = scalar(reward);
        let gamma = self.params.gamma;
        let mut closed = None;
        let mut pending = None;

        if let AgentPhase::ExecutingFlo(mut sub) =
            std::mem::replace(&mut self.phase, AgentPhase::SelectingFlo)
        {
            sub.accumulated_r = sub.accumulated_r + sub.discount * r;
            sub.discount = sub.discount * gamma;
            let prev = sub.last_klo.expect("executing substate has issued a KLO");
            let status = flo_terminated(&sub.flo, state, sub.ticks_in_substate, Outcome::Running);
            if status == TerminationStatus::Active {
                let key = klo_key(state, &sub.flo);
                let klo = self.choose_klo(key)?;
                self.klo_update(prev, r, Some((key, klo)))?;
                sub.last_klo = Some((key, klo));
                sub.ticks_in_substate += 1;
                let decision = Decision {
                    klo,
                    flo: Some(sub.flo.kind),
                };
                self.phase = AgentPhase::ExecutingFlo(sub);
                self.stats.actions += 1;
                return Ok(decision);
            }
            // The last KLO bootstraps from the successor substate's first KLO.
            pending = Some(prev);
            self.last_status = Some(status);
            closed = Some(sub);
        }

        let cands = propose_flos(state);
        let keys: Vec<FloKey> = cands.iter().map(|f| flo_key(state, f)).collect();
        let values: Vec<T> = keys.iter().map(|k| self.store.value(k)).collect();
        let eps = self.epsilon();
        let idx = select(&cands, &values, eps, &mut self.rng)?;
        if let Some(c) = closed {
            self.flo_update(&c, Some(keys[idx]))?;
            self.stats.substates_closed += 1;
        }
        let flo = cands[idx];
        self.selections[flo.kind.index()] += 1;
        let key = klo_key(state, &flo);
        let klo = self.choose_klo(key)?;
        if let Some(prev) = pending {
            self.klo_update(prev, r, Some((key, klo)))?;
        }
        self.phase = AgentPhase::ExecutingFlo(Substate {
            flo,
            flo_key: keys[idx],
            ticks_in_substate: 1,
            accumulated_r: T::zero(),
            discount: T::one(),
            last_klo: Some((key, klo)),
            serial: self.next_serial,
        });
        self.next_serial += 1;
        self.stats.substates_opened += 1;
        self.stats.actions += 1;
        Ok(Decision {
            klo,
            flo: Some(flo.kind),
        })
    }

    /// Terminal bookkeeping: close the open substate against a terminal
    /// next-value of zero at both levels, then decay epsilon.
    pub fn episode_end(&mut self, final_reward: f64, outcome: Outcome) -> Result<()> {
        if !final_reward.is_finite() {
            return Err(Error::NonFiniteReward(final_reward));
        }
        let r: T = scalar(final_reward);
        if let AgentPhase::ExecutingFlo(mut sub) =
            std::mem::replace(&mut self.phase, AgentPhase::SelectingFlo)
        {
            sub.accumulated_r = sub.accumulated_r + sub.discount * r;
            if let Some(prev) = sub.last_klo {
                self.klo_update(prev, r, None)?;
            }
            self.flo_update(&sub, None)?;
            self.stats.substates_closed += 1;
            self.last_status = Some(TerminationStatus::Failure(match outcome {
                Outcome::Died => FailureReason::MarioDied,
                _ => FailureReason::EpisodeEnded,
            }));
        }
        if self.learning {
            self.exploration.decay();
        }
        self.in_episode = false;
        Ok(())
    }
}

impl<T: Scalar> Policy for HrlAgent<T> {
    fn begin_episode(&mut self) {
        HrlAgent::begin_episode(self);
    }

    fn act(&mut self, _obs: &Observation, state: &RelationalState, reward: f64) -> Result<Decision> {
        self.act_state(state, reward)
    }

    fn end_episode(&mut self, final_reward: f64, outcome: Outcome) -> Result<()> {
        self.episode_end(final_reward, outcome)
    }

    fn name(&self) -> &'static str {
        "hrl"
    }

    fn take_flo_selections(&mut self) -> [u32; 5] {
        std::mem::take(&mut self.selections)
    }
}
