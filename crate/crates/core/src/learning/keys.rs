use crate::env::Facing;
use crate::operators::{FloInstance, FloKind};
use crate::perception::{DistanceBucket, ObjectKind, RelationalFact, RelationalState};

/// Feature key for a FLO-level preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FloKey {
    pub kind: FloKind,
    pub target_bucket: DistanceBucket,
    pub target_direction: Facing,
    pub mario_on_ground: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DyBand {
    Above,
    Level,
    Below,
}

impl DyBand {
    pub fn of(dy: i64) -> DyBand {
        if dy < -1 {
            DyBand::Above
        } else if dy > 1 {
            DyBand::Below
        } else {
            DyBand::Level
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DyBand::Above => "above",
            DyBand::Level => "level",
            DyBand::Below => "below",
        }
    }

    pub fn from_name(s: &str) -> Option<DyBand> {
        [DyBand::Above, DyBand::Level, DyBand::Below]
            .into_iter()
            .find(|b| b.name() == s)
    }
}

/// Feature key for a KLO-level state; paired with a `Klo` in the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KloKey {
    pub flo_kind: FloKind,
    pub dx_bucket: DistanceBucket,
    pub dy_band: DyBand,
    pub target_direction: Facing,
    pub mario_on_ground: bool,
    pub fire_ready: bool,
}

/// The fact a FLO is about: its target, or the finish line for `Advance`.
fn focus<'a>(state: &'a RelationalState, flo: &FloInstance) -> Option<&'a RelationalFact> {
    match flo.kind {
        FloKind::Advance => state.nearest(ObjectKind::Finish),
        _ => flo.target.and_then(|id| state.fact(id)),
    }
}

pub fn flo_key(state: &RelationalState, flo: &FloInstance) -> FloKey {
    let (target_bucket, target_direction) = match (flo.kind, focus(state, flo)) {
        (FloKind::Advance, _) | (_, None) => (DistanceBucket::OutOfRange, Facing::Right),
        (_, Some(f)) => (f.bucket, f.direction),
    };
    FloKey {
        kind: flo.kind,
        target_bucket,
        target_direction,
        mario_on_ground: state.mario_on_ground,
    }
}

pub fn klo_key(state: &RelationalState, flo: &FloInstance) -> KloKey {
    let (dx_bucket, dy_band, target_direction) = match focus(state, flo) {
        Some(f) => (f.bucket, DyBand::of(f.dy), f.direction),
        None => (DistanceBucket::OutOfRange, DyBand::Level, Facing::Right),
    };
    KloKey {
        flo_kind: flo.kind,
        dx_bucket,
        dy_band,
        target_direction,
        mario_on_ground: state.mario_on_ground,
        fire_ready: state.mario_fire_ready,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::MarioState;
    use crate::operators::propose_flos;
    use crate::perception::elaborate;

    #[test]
    fn dy_bands() {
        assert_eq!(DyBand::of(-2), DyBand::Above);
        assert_eq!(DyBand::of(-1), DyBand::Level);
        assert_eq!(DyBand::of(1), DyBand::Level);
        assert_eq!(DyBand::of(2), DyBand::Below);
    }

    #[test]
    fn advance_without_finish_uses_defaults() {
        let m = MarioState {
            x: 5.125,
            y: 14.0,
            vx: 0.0,
            vy: 0.0,
            on_ground: true,
            fire_cooldown: 3,
            alive: true,
            max_column_reached: 5,
            facing: Facing::Right,
        };
        let s = elaborate(&[], &m, 0);
        let adv = propose_flos(&s)[0];
        let k = klo_key(&s, &adv);
        assert_eq!(k.dx_bucket, DistanceBucket::OutOfRange);
        assert_eq!(k.dy_band, DyBand::Level);
        assert_eq!(k.target_direction, Facing::Right);
        assert!(!k.fire_ready);
        let fk = flo_key(&s, &adv);
        assert_eq!(fk.target_bucket, DistanceBucket::OutOfRange);
        assert!(fk.mario_on_ground);
    }
}
