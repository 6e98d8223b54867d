use super::{
    Action, Direction, EntityKind, EntityState, Facing, Level, MarioState, Observation, Outcome,
    PhysicsConfig, RewardConfig, TileKind, LEVEL_ROWS, MARIO_HEIGHT, MARIO_WIDTH, SPAWN_COLUMN,
    VIEW_COLS,
};
use crate::error::{Error, Result};

/// Discrete events that happened during one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepEvents {
    pub coins: u32,
    pub kills: u32,
    pub blocks: u32,
    pub new_columns: u32,
    /// Finish or death reward credited this tick (0 otherwise).
    pub terminal_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub outcome: Outcome,
    pub events: StepEvents,
}

#[derive(Debug, Clone)]
struct Body {
    state: EntityState,
    age: u32,
}

/// One running episode on one level. Instances share nothing.
#[derive(Debug, Clone)]
pub struct Env {
    physics: PhysicsConfig,
    rewards: RewardConfig,
    level: Level,
    tiles: Level,
    mario: MarioState,
    bodies: Vec<Body>,
    next_id: u32,
    tick: u32,
    outcome: Outcome,
}

fn solid(level: &Level, col: i64, row: i64) -> bool {
    if col < 0 || col >= level.width as i64 {
        return true;
    }
    match level.tile_at(col, row) {
        Some(t) => t.is_solid(),
        None => false,
    }
}

/// Inclusive cell range covered by a half-open box.
fn cell_span(lo: f64, size: f64) -> (i64, i64) {
    (lo.floor() as i64, (lo + size).ceil() as i64 - 1)
}

fn cells(x: f64, y: f64, w: f64, h: f64) -> impl Iterator<Item = (i64, i64)> {
    let (c0, c1) = cell_span(x, w);
    let (r0, r1) = cell_span(y, h);
    (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| (c, r)))
}

fn overlaps_solid(level: &Level, x: f64, y: f64, w: f64, h: f64) -> bool {
    cells(x, y, w, h).any(|(c, r)| solid(level, c, r))
}

fn boxes_overlap(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> bool {
    a.0 < b.0 + b.2 && b.0 < a.0 + a.2 && a.1 < b.1 + b.3 && b.1 < a.1 + a.3
}

/// Moves a box horizontally, stopping flush against the first solid column.
fn move_x(level: &Level, x: f64, y: f64, w: f64, h: f64, dx: f64) -> (f64, bool) {
    let nx = x + dx;
    let hits: Vec<i64> = cells(nx, y, w, h)
        .filter(|&(c, r)| solid(level, c, r))
        .map(|(c, _)| c)
        .collect();
    if hits.is_empty() {
        return (nx, false);
    }
    if dx > 0.0 {
        let c = *hits.iter().min().unwrap();
        ((c as f64 - w).max(x), true)
    } else {
        let c = *hits.iter().max().unwrap();
        (((c + 1) as f64).min(x), true)
    }
}

/// Moves a box vertically; returns the new y and the solid cells that stopped it.
fn move_y(level: &Level, x: f64, y: f64, w: f64, h: f64, dy: f64) -> (f64, Vec<(i64, i64)>) {
    let ny = y + dy;
    let hits: Vec<(i64, i64)> = cells(x, ny, w, h)
        .filter(|&(c, r)| solid(level, c, r))
        .collect();
    if hits.is_empty() {
        return (ny, hits);
    }
    if dy > 0.0 {
        let r = hits.iter().map(|h| h.1).min().unwrap();
        let stop: Vec<_> = hits.into_iter().filter(|h| h.1 == r).collect();
        ((r as f64 - h).max(y), stop)
    } else {
        let r = hits.iter().map(|h| h.1).max().unwrap();
        let stop: Vec<_> = hits.into_iter().filter(|h| h.1 == r).collect();
        (((r + 1) as f64).min(y), stop)
    }
}

fn supported(level: &Level, x: f64, y: f64, w: f64, h: f64) -> bool {
    let bottom = y + h;
    if bottom.fract() != 0.0 {
        return false;
    }
    let (c0, c1) = cell_span(x, w);
    (c0..=c1).any(|c| solid(level, c, bottom as i64))
}

impl Env {
    pub fn new(level: Level, physics: PhysicsConfig, rewards: RewardConfig) -> Env {
        let mut env = Env {
            physics,
            rewards,
            tiles: level.clone(),
            level,
            mario: spawn_mario(),
            bodies: Vec::new(),
            next_id: 0,
            tick: 0,
            outcome: Outcome::Running,
        };
        env.restart();
        env
    }

    pub fn with_defaults(level: Level) -> Env {
        Env::new(level, PhysicsConfig::default(), RewardConfig::default())
    }

    /// Starts a fresh episode on `level`.
    pub fn reset(&mut self, level: Level) -> Observation {
        self.level = level;
        self.restart();
        self.observation()
    }

    fn restart(&mut self) {
        self.tiles = self.level.clone();
        self.mario = spawn_mario();
        self.bodies = self
            .level
            .monster_spawns
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let (w, _) = s.kind.size();
                Body {
                    state: EntityState {
                        id: i as u32,
                        kind: s.kind,
                        x: s.col as f64 + (1.0 - w) / 2.0,
                        y: s.row as f64,
                        vx: 0.0,
                        vy: 0.0,
                        alive: true,
                        facing: s.facing,
                    },
                    age: 0,
                }
            })
            .collect();
        self.next_id = self.bodies.len() as u32;
        self.tick = 0;
        self.outcome = Outcome::Running;
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    /// The level as modified by play (collected coins, used blocks).
    pub fn current_tiles(&self) -> &Level {
        &self.tiles
    }

    pub fn mario(&self) -> &MarioState {
        &self.mario
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn is_done(&self) -> bool {
        self.outcome != Outcome::Running
    }

    pub fn physics(&self) -> &PhysicsConfig {
        &self.physics
    }

    pub fn rewards(&self) -> &RewardConfig {
        &self.rewards
    }

    pub fn observation(&self) -> Observation {
        let width = self.tiles.width as i64;
        let origin = (self.mario.column() - VIEW_COLS as i64 / 2)
            .clamp(0, (width - VIEW_COLS as i64).max(0));
        let mut viewport = [[TileKind::Empty; VIEW_COLS]; LEVEL_ROWS];
        for (row, line) in viewport.iter_mut().enumerate() {
            for (vc, cell) in line.iter_mut().enumerate() {
                if let Some(t) = self.tiles.tile_at(origin + vc as i64, row as i64) {
                    *cell = t;
                }
            }
        }
        let lo = origin as f64;
        let hi = lo + VIEW_COLS as f64;
        let entities = self
            .bodies
            .iter()
            .map(|b| b.state)
            .filter(|e| e.alive && e.x >= lo && e.x < hi)
            .collect();
        Observation {
            viewport,
            viewport_origin_column: origin,
            entities,
            mario: self.mario,
            tick: self.tick,
        }
    }

    /// Advances the simulation by one tick.
    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.is_done() {
            return Err(Error::EpisodeOver);
        }
        let p = self.physics;
        let mut ev = StepEvents::default();

        // Mario: velocity.
        let m = &mut self.mario;
        let dir = match action.direction {
            Direction::Left => -1.0,
            Direction::None => 0.0,
            Direction::Right => 1.0,
        };
        if dir != 0.0 {
            m.vx = (m.vx + dir * p.accel).clamp(-p.max_speed, p.max_speed);
            m.facing = if dir > 0.0 { Facing::Right } else { Facing::Left };
        } else if m.vx > 0.0 {
            m.vx = (m.vx - p.accel).max(0.0);
        } else if m.vx < 0.0 {
            m.vx = (m.vx + p.accel).min(0.0);
        }
        if action.jump && m.on_ground {
            m.vy = -p.jump_impulse;
            m.on_ground = false;
        } else if !m.on_ground {
            m.vy = (m.vy + p.gravity).min(p.max_fall_speed);
        }
        let prev_bottom = m.y + MARIO_HEIGHT;
        let falling = m.vy > 0.0;

        // Mario: axis-separated movement.
        let (nx, blocked) = move_x(&self.tiles, m.x, m.y, MARIO_WIDTH, MARIO_HEIGHT, m.vx);
        m.x = nx;
        if blocked {
            m.vx = 0.0;
        }
        if m.vy != 0.0 {
            let (ny, stop) = move_y(&self.tiles, m.x, m.y, MARIO_WIDTH, MARIO_HEIGHT, m.vy);
            m.y = ny;
            if !stop.is_empty() {
                if m.vy > 0.0 {
                    m.on_ground = true;
                } else {
                    for (c, r) in stop {
                        if self.tiles.tile_at(c, r) == Some(TileKind::QuestionBlock) {
                            self.tiles.set(c as usize, r as usize, TileKind::UsedBlock);
                            ev.blocks += 1;
                        }
                    }
                }
                m.vy = 0.0;
            }
        }
        let on_support = supported(&self.tiles, m.x, m.y, MARIO_WIDTH, MARIO_HEIGHT);
        if m.on_ground && !on_support {
            m.on_ground = false;
        } else if !m.on_ground && m.vy == 0.0 && on_support {
            m.on_ground = true;
        }

        // Coins.
        for (c, r) in cells(m.x, m.y, MARIO_WIDTH, MARIO_HEIGHT) {
            if self.tiles.tile_at(c, r) == Some(TileKind::Coin) {
                self.tiles.set(c as usize, r as usize, TileKind::Empty);
                ev.coins += 1;
            }
        }

        // Fire.
        if action.fire && m.fire_cooldown == 0 {
            let (w, h) = EntityKind::Fireball.size();
            let x = match m.facing {
                Facing::Right => m.x + MARIO_WIDTH,
                Facing::Left => m.x - w,
            };
            self.bodies.push(Body {
                state: EntityState {
                    id: self.next_id,
                    kind: EntityKind::Fireball,
                    x,
                    y: m.y + (MARIO_HEIGHT - h) / 2.0,
                    vx: m.facing.sign() * p.fireball_speed,
                    vy: 0.0,
                    alive: true,
                    facing: m.facing,
                },
                age: 0,
            });
            self.next_id += 1;
            m.fire_cooldown = p.fire_cooldown;
        } else if m.fire_cooldown > 0 {
            m.fire_cooldown -= 1;
        }

        // Walkers patrol, turning at walls and ledges.
        for b in self.bodies.iter_mut() {
            let e = &mut b.state;
            if !e.alive || e.kind != EntityKind::Walker {
                continue;
            }
            let (w, h) = e.kind.size();
            e.vx = e.facing.sign() * p.walker_speed;
            let nx = e.x + e.vx;
            let wall = overlaps_solid(&self.tiles, nx, e.y, w, h);
            let foot = match e.facing {
                Facing::Right => cell_span(nx, w).1,
                Facing::Left => cell_span(nx, w).0,
            };
            let ledge = !solid(&self.tiles, foot, (e.y + h).floor() as i64);
            if wall || ledge {
                e.facing = e.facing.flip();
                e.vx = 0.0;
            } else {
                e.x = nx;
            }
        }

        // Fireballs fly straight and burn the first walker they touch.
        let lifetime = p.fireball_lifetime;
        let width = self.tiles.width as f64;
        for i in 0..self.bodies.len() {
            let b = &mut self.bodies[i];
            if !b.state.alive || b.state.kind != EntityKind::Fireball {
                continue;
            }
            let (w, h) = b.state.kind.size();
            b.age += 1;
            b.state.x += b.state.vx;
            let s = b.state;
            if b.age > lifetime
                || s.x < 0.0
                || s.x + w > width
                || overlaps_solid(&self.tiles, s.x, s.y, w, h)
            {
                b.state.alive = false;
                continue;
            }
            let fb = (s.x, s.y, w, h);
            let victim = self.bodies.iter().position(|o| {
                o.state.alive && o.state.kind == EntityKind::Walker && {
                    let (ow, oh) = o.state.kind.size();
                    boxes_overlap(fb, (o.state.x, o.state.y, ow, oh))
                }
            });
            if let Some(v) = victim {
                self.bodies[v].state.alive = false;
                self.bodies[i].state.alive = false;
                ev.kills += 1;
            }
        }
        self.bodies
            .retain(|b| b.state.kind != EntityKind::Fireball || b.state.alive);

        // Mario against walkers: stomp from above, otherwise Mario dies.
        let m = &mut self.mario;
        let mario_box = (m.x, m.y, MARIO_WIDTH, MARIO_HEIGHT);
        for b in self.bodies.iter_mut() {
            let e = &mut b.state;
            if !e.alive || e.kind != EntityKind::Walker {
                continue;
            }
            let (w, h) = e.kind.size();
            if !boxes_overlap(mario_box, (e.x, e.y, w, h)) {
                continue;
            }
            if falling && prev_bottom <= e.y + h / 2.0 {
                e.alive = false;
                ev.kills += 1;
                m.vy = -p.stomp_bounce;
                m.on_ground = false;
            } else {
                m.alive = false;
            }
        }
        if m.y > (LEVEL_ROWS - 1) as f64 {
            m.alive = false;
        }

        // Progress and rewards.
        let col = m.column();
        if col > m.max_column_reached {
            ev.new_columns = (col - m.max_column_reached) as u32;
            m.max_column_reached = col;
        }
        self.tick += 1;
        let r = &self.rewards;
        if !m.alive {
            self.outcome = Outcome::Died;
            ev.terminal_reward = r.death;
        } else if col >= self.tiles.finish_column as i64 {
            self.outcome = Outcome::Finished;
            ev.terminal_reward = r.finish;
        } else if self.tick >= r.episode_tick_limit {
            self.outcome = Outcome::TimedOut;
        }
        let reward = r.per_tick
            + r.per_new_column * f64::from(ev.new_columns)
            + r.coin * f64::from(ev.coins)
            + r.monster_kill * f64::from(ev.kills)
            + r.question_block * f64::from(ev.blocks)
            + ev.terminal_reward;

        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.is_done(),
            outcome: self.outcome,
            events: ev,
        })
    }

    /// True when Mario's box overlaps no solid tile.
    pub fn mario_clear_of_solids(&self) -> bool {
        let m = &self.mario;
        !overlaps_solid(&self.tiles, m.x, m.y, MARIO_WIDTH, MARIO_HEIGHT)
    }

    /// True when the tile row directly under Mario's feet holds a solid tile.
    pub fn mario_supported(&self) -> bool {
        let m = &self.mario;
        supported(&self.tiles, m.x, m.y, MARIO_WIDTH, MARIO_HEIGHT)
    }
}

fn spawn_mario() -> MarioState {
    MarioState {
        x: SPAWN_COLUMN as f64 + (1.0 - MARIO_WIDTH) / 2.0,
        y: (LEVEL_ROWS - 1) as f64 - MARIO_HEIGHT,
        vx: 0.0,
        vy: 0.0,
        on_ground: true,
        fire_cooldown: 0,
        alive: true,
        max_column_reached: SPAWN_COLUMN as i64,
        facing: Facing::Right,
    }
}
