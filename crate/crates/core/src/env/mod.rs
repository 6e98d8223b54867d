//! Deterministic tile platformer: level generation, physics, monsters,
//! rewards and the episode lifecycle.
//!
//! Coordinates are in tile units with `y` growing downward; row 15 is the
//! ground row. Bodies are axis-aligned boxes whose `(x, y)` is the top-left
//! corner.

mod level;
mod render;
mod sim;
mod tile;

pub use level::{
    generate_level, generate_level_with, Level, LevelOptions, MonsterSpawn, DEFAULT_WIDTH,
    GROUND_ROW,
};
pub use render::render_ascii;
pub use sim::{Env, StepEvents, StepResult};
pub use tile::TileKind;

use crate::error::{Error, Result};

pub const LEVEL_ROWS: usize = 16;
pub const VIEW_COLS: usize = 22;
pub const SPAWN_COLUMN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Facing {
    Left,
    Right,
}

impl Facing {
    pub fn sign(self) -> f64 {
        match self {
            Facing::Left => -1.0,
            Facing::Right => 1.0,
        }
    }

    pub fn flip(self) -> Facing {
        match self {
            Facing::Left => Facing::Right,
            Facing::Right => Facing::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Facing::Left => "left",
            Facing::Right => "right",
        }
    }

    pub fn from_name(s: &str) -> Option<Facing> {
        match s {
            "left" => Some(Facing::Left),
            "right" => Some(Facing::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Walker,
    Fireball,
}

impl EntityKind {
    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Walker => "walker",
            EntityKind::Fireball => "fireball",
        }
    }

    pub fn from_name(s: &str) -> Option<EntityKind> {
        match s {
            "walker" => Some(EntityKind::Walker),
            "fireball" => Some(EntityKind::Fireball),
            _ => None,
        }
    }

    /// Bounding box size `(w, h)`.
    pub fn size(self) -> (f64, f64) {
        match self {
            EntityKind::Walker => (0.75, 1.0),
            EntityKind::Fireball => (0.5, 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntityState {
    pub id: u32,
    pub kind: EntityKind,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub alive: bool,
    pub facing: Facing,
}

impl EntityState {
    pub fn column(&self) -> i64 {
        let (w, _) = self.kind.size();
        (self.x + w / 2.0).floor() as i64
    }

    pub fn row(&self) -> i64 {
        let (_, h) = self.kind.size();
        (self.y + h / 2.0).floor() as i64
    }
}

pub const MARIO_WIDTH: f64 = 0.75;
pub const MARIO_HEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarioState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub on_ground: bool,
    pub fire_cooldown: u32,
    pub alive: bool,
    pub max_column_reached: i64,
    pub facing: Facing,
}

impl MarioState {
    /// Column containing Mario's horizontal center.
    pub fn column(&self) -> i64 {
        (self.x + MARIO_WIDTH / 2.0).floor() as i64
    }

    pub fn row(&self) -> i64 {
        (self.y + MARIO_HEIGHT / 2.0).floor() as i64
    }
}

/// The raw per-tick observation: a 16x22 tile window plus entity and Mario
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub viewport: [[TileKind; VIEW_COLS]; LEVEL_ROWS],
    pub viewport_origin_column: i64,
    pub entities: Vec<EntityState>,
    pub mario: MarioState,
    pub tick: u32,
}

impl Observation {
    /// Tile at an absolute column, if it lies inside the viewport.
    pub fn tile(&self, col: i64, row: i64) -> Option<TileKind> {
        let vc = col - self.viewport_origin_column;
        if vc < 0 || vc >= VIEW_COLS as i64 || row < 0 || row >= LEVEL_ROWS as i64 {
            None
        } else {
            Some(self.viewport[row as usize][vc as usize])
        }
    }

    /// Checks the viewport containment invariant.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let lo = self.viewport_origin_column as f64;
        let hi = lo + VIEW_COLS as f64;
        for e in &self.entities {
            if !(e.x >= lo && e.x < hi) {
                return Err(format!("entity {} at x={} outside [{lo}, {hi})", e.id, e.x));
            }
        }
        Ok(())
    }

    /// FNV-1a digest over every field, for trajectory comparisons.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::default();
        for row in &self.viewport {
            for t in row {
                h.write(&[*t as u8]);
            }
        }
        h.write(&self.viewport_origin_column.to_le_bytes());
        for e in &self.entities {
            h.write(&e.id.to_le_bytes());
            h.write(&[e.kind as u8, e.alive as u8, e.facing as u8]);
            for v in [e.x, e.y, e.vx, e.vy] {
                h.write(&v.to_bits().to_le_bytes());
            }
        }
        let m = &self.mario;
        for v in [m.x, m.y, m.vx, m.vy] {
            h.write(&v.to_bits().to_le_bytes());
        }
        h.write(&[m.on_ground as u8, m.alive as u8, m.facing as u8]);
        h.write(&m.fire_cooldown.to_le_bytes());
        h.write(&m.max_column_reached.to_le_bytes());
        h.write(&self.tick.to_le_bytes());
        h.0
    }
}

pub(crate) struct Fnv(pub u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    pub fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    Left,
    #[default]
    None,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Action {
    pub direction: Direction,
    pub jump: bool,
    pub fire: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Running,
    Finished,
    Died,
    TimedOut,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Running => "running",
            Outcome::Finished => "finished",
            Outcome::Died => "died",
            Outcome::TimedOut => "timed_out",
        }
    }

    pub fn from_name(s: &str) -> Option<Outcome> {
        [
            Outcome::Running,
            Outcome::Finished,
            Outcome::Died,
            Outcome::TimedOut,
        ]
        .into_iter()
        .find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    pub per_tick: f64,
    pub per_new_column: f64,
    pub coin: f64,
    pub monster_kill: f64,
    pub question_block: f64,
    pub finish: f64,
    pub death: f64,
    pub episode_tick_limit: u32,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            per_tick: -0.05,
            per_new_column: 1.0,
            coin: 10.0,
            monster_kill: 20.0,
            question_block: 5.0,
            finish: 100.0,
            death: -100.0,
            episode_tick_limit: 2000,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episode_tick_limit == 0 {
            return Err(Error::InvalidParam("episode_tick_limit must be > 0".into()));
        }
        let all = [
            self.per_tick,
            self.per_new_column,
            self.coin,
            self.monster_kill,
            self.question_block,
            self.finish,
            self.death,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("reward values must be finite".into()));
        }
        Ok(())
    }

    /// Upper bound on the magnitude of the reward from a single tick.
    pub fn max_abs_step_reward(&self) -> f64 {
        self.per_tick.abs()
            + self.per_new_column.abs()
            + 4.0 * self.coin.abs()
            + 4.0 * self.monster_kill.abs()
            + 2.0 * self.question_block.abs()
            + self.finish.abs().max(self.death.abs())
    }
}

/// Physics constants; all in tiles and ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConfig {
    pub max_speed: f64,
    pub accel: f64,
    pub jump_impulse: f64,
    pub gravity: f64,
    pub max_fall_speed: f64,
    pub stomp_bounce: f64,
    pub walker_speed: f64,
    pub fireball_speed: f64,
    pub fireball_lifetime: u32,
    pub fire_cooldown: u32,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            max_speed: 0.25,
            accel: 0.0625,
            jump_impulse: 0.9,
            gravity: 0.1,
            max_fall_speed: 0.9,
            stomp_bounce: 0.5,
            walker_speed: 0.1,
            fireball_speed: 0.5,
            fireball_lifetime: 30,
            fire_cooldown: 10,
        }
    }
}
