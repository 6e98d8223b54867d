//! Tabular value storage, epsilon-greedy selection and SARSA updates for
//! both levels of the operator hierarchy. Generic over the value scalar.

mod keys;
mod qstore;
mod update;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

pub use keys::{flo_key, klo_key, DyBand, FloKey, KloKey};
pub use qstore::{QStore, ValueTable};
pub use update::{sarsa_update, select, smdp_flo_update};

use crate::error::{Error, Result};

/// Scalar types usable as value-function entries.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

/// Lossy conversion from an `f64` literal or reward.
#[inline]
pub fn scalar<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("value representable in scalar type")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningParams<T> {
    pub alpha: T,
    pub gamma: T,
    pub epsilon0: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
}

impl<T: Scalar> Default for LearningParams<T> {
    fn default() -> Self {
        LearningParams {
            alpha: scalar(0.1),
            gamma: scalar(0.95),
            epsilon0: 0.2,
            epsilon_decay: 0.999,
            epsilon_min: 0.01,
        }
    }
}

impl<T: Scalar> LearningParams<T> {
    pub fn validate(&self) -> Result<()> {
        check_step(self.alpha, self.gamma)?;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.epsilon0) || !unit(self.epsilon_decay) || !unit(self.epsilon_min) {
            return Err(Error::InvalidParam(
                "epsilon0, epsilon_decay and epsilon_min must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Converts the step parameters to another scalar type.
    pub fn cast<U: Scalar>(&self) -> LearningParams<U> {
        LearningParams {
            alpha: scalar(self.alpha.to_f64().unwrap()),
            gamma: scalar(self.gamma.to_f64().unwrap()),
            epsilon0: self.epsilon0,
            epsilon_decay: self.epsilon_decay,
            epsilon_min: self.epsilon_min,
        }
    }
}

pub(crate) fn check_step<T: Scalar>(alpha: T, gamma: T) -> Result<()> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParam(format!("alpha {alpha} outside (0, 1]")));
    }
    if !(gamma >= T::zero() && gamma < T::one()) {
        return Err(Error::InvalidParam(format!("gamma {gamma} outside [0, 1)")));
    }
    Ok(())
}

/// Per-episode multiplicative epsilon decay with a floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exploration {
    pub epsilon: f64,
    pub decay: f64,
    pub min: f64,
}

impl Exploration {
    pub fn from_params<T>(p: &LearningParams<T>) -> Exploration {
        Exploration {
            epsilon: p.epsilon0,
            decay: p.epsilon_decay,
            min: p.epsilon_min,
        }
    }

    pub fn decay(&mut self) {
        if self.epsilon > self.min {
            self.epsilon = (self.epsilon * self.decay).max(self.min);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_clamps_at_floor() {
        let mut e = Exploration {
            epsilon: 0.01,
            decay: 0.5,
            min: 0.01,
        };
        e.decay();
        assert_eq!(e.epsilon, 0.01);
        let mut e = Exploration {
            epsilon: 0.2,
            decay: 0.5,
            min: 0.01,
        };
        e.decay();
        assert_eq!(e.epsilon, 0.1);
        for _ in 0..20 {
            e.decay();
        }
        assert_eq!(e.epsilon, 0.01);
    }

    #[test]
    fn param_domains() {
        assert!(LearningParams::<f64>::default().validate().is_ok());
        let mut p = LearningParams::<f32> {
            gamma: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p.gamma = 0.9;
        p.alpha = 0.0;
        assert!(p.validate().is_err());
    }
}
