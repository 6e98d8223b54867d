use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Decision, Policy};
use crate::env::{Observation, Outcome};
use crate::error::{Error, Result};
use crate::operators::Klo;
use crate::perception::RelationalState;

/// Uniform draw from `legal`.
pub fn random_act<R: Rng + ?Sized>(legal: &[Klo], rng: &mut R) -> Result<Klo> {
    if legal.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    Ok(legal[rng.gen_range(0..legal.len())])
}

#[derive(Debug, Clone)]
pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomAgent {
    fn act(&mut self, _obs: &Observation, _state: &RelationalState, _reward: f64) -> Result<Decision> {
        Ok(Decision {
            klo: random_act(&Klo::ALL, &mut self.rng)?,
            flo: None,
        })
    }

    fn end_episode(&mut self, _final_reward: f64, _outcome: Outcome) -> Result<()> {
        Ok(())
    }

    fn name(&self) -> &'static str {
        "random"
    }
}
