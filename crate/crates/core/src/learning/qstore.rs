use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;

use super::keys::{DyBand, FloKey, KloKey};
use super::{scalar, Scalar};
use crate::env::Facing;
use crate::error::{parse_err, Result};
use crate::operators::{FloKind, Klo};
use crate::perception::DistanceBucket;

/// Read/write access to a table of action values. Absent keys read as zero.
pub trait ValueTable<K, T> {
    fn value(&self, key: &K) -> T;
    fn store(&mut self, key: K, value: T);
}

impl<K: Hash + Eq, T: Scalar> ValueTable<K, T> for HashMap<K, T> {
    fn value(&self, key: &K) -> T {
        self.get(key).copied().unwrap_or_else(T::zero)
    }

    fn store(&mut self, key: K, value: T) {
        self.insert(key, value);
    }
}

/// FLO-level and KLO-level preference tables.
#[derive(Debug, Clone, PartialEq)]
pub struct QStore<T> {
    flo: HashMap<FloKey, T>,
    klo: HashMap<(KloKey, Klo), T>,
    bound: Option<T>,
}

impl<T: Scalar> Default for QStore<T> {
    fn default() -> Self {
        QStore {
            flo: HashMap::new(),
            klo: HashMap::new(),
            bound: None,
        }
    }
}

impl<T: Scalar> QStore<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Enables the |Q| <= bound check on every write (debug builds).
    pub fn with_bound(mut self, bound: T) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn bound(&self) -> Option<T> {
        self.bound
    }

    pub fn flo_len(&self) -> usize {
        self.flo.len()
    }

    pub fn klo_len(&self) -> usize {
        self.klo.len()
    }

    /// Largest stored magnitude over both tables.
    pub fn max_abs(&self) -> T {
        self.flo
            .values()
            .chain(self.klo.values())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    fn check(&self, value: T) {
        debug_assert!(value.is_finite(), "non-finite value stored");
        if let Some(b) = self.bound {
            debug_assert!(
                value.abs() <= b * scalar(1.0 + 1e-9),
                "|Q| = {} exceeds bound {}",
                value.abs(),
                b
            );
        }
    }

    /// Line-oriented checkpoint, sorted so equal stores dump identically.
    pub fn dump(&self) -> String {
        let mut flo: Vec<_> = self.flo.iter().collect();
        flo.sort_by_key(|(k, _)| **k);
        let mut klo: Vec<_> = self.klo.iter().collect();
        klo.sort_by_key(|(k, _)| **k);
        let mut out = String::new();
        for (k, v) in flo {
            let _ = writeln!(
                out,
                "FLO {} {} {} {} {:.8e}",
                k.kind.name(),
                k.target_bucket.name(),
                k.target_direction.name(),
                k.mario_on_ground,
                v.to_f64().unwrap()
            );
        }
        for ((k, a), v) in klo {
            let _ = writeln!(
                out,
                "KLO {} {} {} {} {} {} {} {:.8e}",
                k.flo_kind.name(),
                k.dx_bucket.name(),
                k.dy_band.name(),
                k.target_direction.name(),
                k.mario_on_ground,
                k.fire_ready,
                a.name(),
                v.to_f64().unwrap()
            );
        }
        out
    }

    pub fn load(text: &str) -> Result<QStore<T>> {
        let mut store = QStore::new();
        for (idx, line) in text.lines().enumerate() {
            let n = idx + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            let flo_kind = |s: &str| {
                FloKind::from_name(s).ok_or_else(|| parse_err(n, format!("unknown FLO `{s}`")))
            };
            let bucket = |s: &str| {
                DistanceBucket::from_name(s)
                    .ok_or_else(|| parse_err(n, format!("unknown bucket `{s}`")))
            };
            let dir = |s: &str| {
                Facing::from_name(s).ok_or_else(|| parse_err(n, format!("unknown direction `{s}`")))
            };
            let flag = |s: &str| {
                s.parse::<bool>()
                    .map_err(|_| parse_err(n, format!("expected true/false, got `{s}`")))
            };
            let value = |s: &str| -> Result<T> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad value `{s}`")))?;
                if !v.is_finite() {
                    return Err(parse_err(n, "non-finite value"));
                }
                T::from_f64(v).ok_or_else(|| parse_err(n, "value out of range"))
            };
            match parts[..] {
                ["FLO", kind, b, d, g, v] => {
                    let key = FloKey {
                        kind: flo_kind(kind)?,
                        target_bucket: bucket(b)?,
                        target_direction: dir(d)?,
                        mario_on_ground: flag(g)?,
                    };
                    store.flo.insert(key, value(v)?);
                }
                ["KLO", kind, b, dy, d, g, f, a, v] => {
                    let key = KloKey {
                        flo_kind: flo_kind(kind)?,
                        dx_bucket: bucket(b)?,
                        dy_band: DyBand::from_name(dy)
                            .ok_or_else(|| parse_err(n, format!("unknown dy band `{dy}`")))?,
                        target_direction: dir(d)?,
                        mario_on_ground: flag(g)?,
                        fire_ready: flag(f)?,
                    };
                    let klo = Klo::from_name(a)
                        .ok_or_else(|| parse_err(n, format!("unknown KLO `{a}`")))?;
                    store.klo.insert((key, klo), value(v)?);
                }
                _ => return Err(parse_err(n, "expected a FLO or KLO record")),
            }
        }
        Ok(store)
    }
}

impl<T: Scalar> ValueTable<FloKey, T> for QStore<T> {
    fn value(&self, key: &FloKey) -> T {
        self.flo.get(key).copied().unwrap_or_else(T::zero)
    }

    fn store(&mut self, key: FloKey, value: T) {
        self.check(value);
        self.flo.insert(key, value);
    }
}

impl<T: Scalar> ValueTable<(KloKey, Klo), T> for QStore<T> {
    fn value(&self, key: &(KloKey, Klo)) -> T {
        self.klo.get(key).copied().unwrap_or_else(T::zero)
    }

    fn store(&mut self, key: (KloKey, Klo), value: T) {
        self.check(value);
        self.klo.insert(key, value);
    }
}
