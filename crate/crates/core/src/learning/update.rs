use rand::Rng;

use super::{check_step, Scalar, ValueTable};
use crate::error::{Error, Result};

/// Epsilon-greedy choice over `values`: with probability `epsilon` a uniform
/// index, otherwise the first index holding the maximum value.
///
/// One uniform draw is consumed on every call, plus one more when exploring.
pub fn select<C, T: Scalar, R: Rng + ?Sized>(
    candidates: &[C],
    values: &[T],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if candidates.len() != values.len() {
        return Err(Error::InvalidParam(format!(
            "{} candidates but {} values",
            candidates.len(),
            values.len()
        )));
    }
    let u: f64 = rng.gen();
    if u < epsilon {
        return Ok(rng.gen_range(0..candidates.len()));
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// One-step on-policy update toward `reward + gamma * Q(next)`, with a
/// terminal `next` contributing zero.
pub fn sarsa_update<K, T, S>(
    table: &mut S,
    key: K,
    reward: T,
    next: Option<&K>,
    alpha: T,
    gamma: T,
) -> Result<T>
where
    T: Scalar,
    S: ValueTable<K, T> + ?Sized,
{
    check_step(alpha, gamma)?;
    if !reward.is_finite() {
        return Err(Error::NonFiniteReward(reward.to_f64().unwrap_or(f64::NAN)));
    }
    let q = table.value(&key);
    let q_next = next.map_or_else(T::zero, |k| table.value(k));
    let updated = q + alpha * (reward + gamma * q_next - q);
    table.store(key, updated);
    Ok(updated)
}

/// Update for an operator that ran `duration` ticks and collected the
/// discounted return `accumulated`; the bootstrap is discounted by
/// `gamma^duration`.
pub fn smdp_flo_update<K, T, S>(
    table: &mut S,
    key: K,
    accumulated: T,
    duration: u32,
    next: Option<&K>,
    alpha: T,
    gamma: T,
) -> Result<T>
where
    T: Scalar,
    S: ValueTable<K, T> + ?Sized,
{
    if duration < 1 {
        return Err(Error::ZeroDuration(duration));
    }
    check_step(alpha, gamma)?;
    if !accumulated.is_finite() {
        return Err(Error::NonFiniteReward(
            accumulated.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let q = table.value(&key);
    let q_next = next.map_or_else(T::zero, |k| table.value(k));
    let discount = gamma.powi(duration as i32);
    let updated = q + alpha * (accumulated + discount * q_next - q);
    table.store(key, updated);
    Ok(updated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn table(entries: &[(u8, f64)]) -> HashMap<u8, f64> {
        entries.iter().copied().collect()
    }

    #[test]
    fn greedy_argmax_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select(&[0; 3], &[0.2, 0.9, 0.1], 0.0, &mut rng).unwrap(), 1);
        assert_eq!(select(&[0; 2], &[0.5, 0.5], 0.0, &mut rng).unwrap(), 0);
        assert_eq!(select(&['a'], &[-3.0f32], 0.0, &mut rng).unwrap(), 0);
    }

    #[test]
    fn empty_candidates_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let none: [u8; 0] = [];
        let vals: [f64; 0] = [];
        assert!(matches!(
            select(&none, &vals, 0.0, &mut rng),
            Err(Error::EmptyCandidates)
        ));
    }

    #[test]
    fn uniform_exploration_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 10_000;
        let mut counts = [0u32; 4];
        for _ in 0..n {
            counts[select(&[0; 4], &[0.0, 5.0, 1.0, 2.0], 1.0, &mut rng).unwrap()] += 1;
        }
        let p = 0.25;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() <= 4.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn sarsa_hand_arithmetic() {
        let mut t = table(&[]);
        assert_eq!(sarsa_update(&mut t, 0, 0.0, Some(&1), 0.5, 0.9).unwrap(), 0.0);
        assert_eq!(sarsa_update(&mut t, 0, 1.0, None, 0.5, 0.9).unwrap(), 0.5);
        let mut t = table(&[(0, 1.0), (1, 1.0)]);
        let v = sarsa_update(&mut t, 0, 1.0, Some(&1), 0.5, 0.9).unwrap();
        assert!((v - 1.45).abs() < 1e-12);
        assert_eq!(t[&0], v);
    }

    #[test]
    fn sarsa_rejects_bad_inputs() {
        let mut t = table(&[]);
        assert!(matches!(
            sarsa_update(&mut t, 0, f64::NAN, None, 0.5, 0.9),
            Err(Error::NonFiniteReward(_))
        ));
        assert!(sarsa_update(&mut t, 0, 1.0, None, 0.0, 0.9).is_err());
        assert!(sarsa_update(&mut t, 0, 1.0, None, 0.5, 1.0).is_err());
    }

    #[test]
    fn smdp_hand_arithmetic() {
        let mut t = table(&[(1, 2.0)]);
        assert_eq!(smdp_flo_update(&mut t, 5, 0.0, 7, None, 0.1, 0.9).unwrap(), 0.0);
        let v = smdp_flo_update(&mut t, 0, 10.0, 3, Some(&1), 0.1, 0.9).unwrap();
        assert!((v - 1.1458).abs() < 1e-12, "{v}");
        assert!(matches!(
            smdp_flo_update(&mut t, 0, 1.0, 0, None, 0.1, 0.9),
            Err(Error::ZeroDuration(0))
        ));
    }

    #[test]
    fn one_tick_smdp_equals_sarsa() {
        let mut a = table(&[(0, 0.3), (1, -0.4)]);
        let mut b = a.clone();
        let x = smdp_flo_update(&mut a, 0, 2.5, 1, Some(&1), 0.2, 0.95).unwrap();
        let y = sarsa_update(&mut b, 0, 2.5, Some(&1), 0.2, 0.95).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn terminal_death_update() {
        let mut t = table(&[]);
        assert!((sarsa_update(&mut t, 0, -100.0, None, 0.1, 0.95).unwrap() + 10.0).abs() < 1e-12);
    }
}
