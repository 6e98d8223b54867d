//! Relational view of an observation: objects extracted from the tile
//! window and qualitative facts about each one relative to Mario.

use std::fmt::Write as _;

use crate::env::{
    EntityKind, Facing, MarioState, Observation, TileKind, LEVEL_ROWS, VIEW_COLS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectKind {
    Monster,
    Coin,
    QuestionBlock,
    Pipe,
    Pit,
    Platform,
    Finish,
}

impl ObjectKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Monster => "monster",
            ObjectKind::Coin => "coin",
            ObjectKind::QuestionBlock => "question_block",
            ObjectKind::Pipe => "pipe",
            ObjectKind::Pit => "pit",
            ObjectKind::Platform => "platform",
            ObjectKind::Finish => "finish",
        }
    }
}

/// Object identifier. Tile objects pack `(kind, leftmost column, row)` so
/// numeric order is lexicographic order on that triple and a static object
/// keeps its id from tick to tick; monsters pack `(kind, entity id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub u64);

const COL_BIAS: i64 = 1 << 20;

impl ObjectId {
    fn for_tiles(kind: ObjectKind, col: i64, row: i64) -> ObjectId {
        ObjectId(((kind as u64) << 40) | (((col + COL_BIAS) as u64) << 8) | row as u64)
    }

    fn for_entity(id: u32) -> ObjectId {
        ObjectId(((ObjectKind::Monster as u64) << 40) | (u64::from(id) << 8))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameObject {
    pub id: ObjectId,
    pub kind: ObjectKind,
    /// Inclusive absolute column range.
    pub col_span: (i64, i64),
    pub anchor_row: i64,
    pub entity_ref: Option<u32>,
    /// Viewport tiles that make up this object (absolute coordinates).
    /// Pits are gaps and own no tiles; monsters are entities.
    pub cells: Vec<(i64, i64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceBucket {
    Adjacent,
    Near,
    Mid,
    Far,
    OutOfRange,
}

impl DistanceBucket {
    pub const ALL: [DistanceBucket; 5] = [
        DistanceBucket::Adjacent,
        DistanceBucket::Near,
        DistanceBucket::Mid,
        DistanceBucket::Far,
        DistanceBucket::OutOfRange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceBucket::Adjacent => "adjacent",
            DistanceBucket::Near => "near",
            DistanceBucket::Mid => "mid",
            DistanceBucket::Far => "far",
            DistanceBucket::OutOfRange => "out_of_range",
        }
    }

    pub fn from_name(s: &str) -> Option<DistanceBucket> {
        DistanceBucket::ALL.into_iter().find(|b| b.name() == s)
    }
}

pub fn bucket_distance(dx: i64) -> DistanceBucket {
    match dx.unsigned_abs() {
        0..=1 => DistanceBucket::Adjacent,
        2..=3 => DistanceBucket::Near,
        4..=6 => DistanceBucket::Mid,
        7..=10 => DistanceBucket::Far,
        _ => DistanceBucket::OutOfRange,
    }
}

/// Numeric windows behind the qualitative attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub threat_dx: i64,
    pub threat_dy: i64,
    pub reach_dx: i64,
    pub reach_dy_min: i64,
    pub reach_dy_max: i64,
    pub ahead_dx: i64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            threat_dx: 4,
            threat_dy: 3,
            reach_dx: 3,
            reach_dy_min: -4,
            reach_dy_max: 1,
            ahead_dx: 4,
        }
    }
}

impl Thresholds {
    pub fn is_threat(&self, kind: ObjectKind, dx: i64, dy: i64, alive: bool) -> bool {
        kind == ObjectKind::Monster && alive && dx.abs() <= self.threat_dx && dy.abs() <= self.threat_dy
    }

    pub fn is_reachable(&self, kind: ObjectKind, dx: i64, dy: i64) -> bool {
        matches!(kind, ObjectKind::Coin | ObjectKind::QuestionBlock)
            && dx.abs() <= self.reach_dx
            && (self.reach_dy_min..=self.reach_dy_max).contains(&dy)
    }

    pub fn is_ahead(&self, kind: ObjectKind, dx: i64) -> bool {
        match kind {
            ObjectKind::Pit | ObjectKind::Pipe => dx > 0 && dx <= self.ahead_dx,
            ObjectKind::Finish => dx > 0,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalFact {
    pub object: ObjectId,
    pub kind: ObjectKind,
    pub col_span: (i64, i64),
    pub dx: i64,
    pub dy: i64,
    pub bucket: DistanceBucket,
    pub direction: Facing,
    pub isthreat: bool,
    pub isreachable: bool,
    pub is_ahead: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalState {
    /// Sorted by object id, one fact per object.
    pub facts: Vec<RelationalFact>,
    pub mario_on_ground: bool,
    pub mario_fire_ready: bool,
    pub mario_column: i64,
    pub tick: u32,
    /// Absolute column range visible in the source observation, when known.
    pub view_span: Option<(i64, i64)>,
}

impl RelationalState {
    pub fn fact(&self, id: ObjectId) -> Option<&RelationalFact> {
        self.facts
            .binary_search_by_key(&id, |f| f.object)
            .ok()
            .map(|i| &self.facts[i])
    }

    /// Nearest fact of a kind, by |dx| then id.
    pub fn nearest(&self, kind: ObjectKind) -> Option<&RelationalFact> {
        self.facts
            .iter()
            .filter(|f| f.kind == kind)
            .min_by_key(|f| (f.dx.abs(), f.object))
    }

    /// Debug dump, one line per fact in id order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for f in &self.facts {
            let mut attrs = Vec::new();
            if f.isthreat {
                attrs.push("isthreat");
            }
            if f.isreachable {
                attrs.push("isreachable");
            }
            if f.is_ahead {
                attrs.push("is_ahead");
            }
            let attrs = if attrs.is_empty() {
                "-".to_string()
            } else {
                attrs.join(",")
            };
            let _ = writeln!(
                out,
                "{} id={} dx={} dy={} bucket={} dir={} attrs={}",
                f.kind.name(),
                f.object.0,
                f.dx,
                f.dy,
                f.bucket.name(),
                f.direction.name(),
                attrs
            );
        }
        out
    }
}

/// Maximal horizontal runs of tiles matching `pred` in one viewport row.
fn runs(obs: &Observation, row: usize, pred: impl Fn(TileKind) -> bool) -> Vec<(i64, i64)> {
    let origin = obs.viewport_origin_column;
    let mut out = Vec::new();
    let mut start = None;
    for vc in 0..=VIEW_COLS {
        let hit = vc < VIEW_COLS && pred(obs.viewport[row][vc]);
        match (hit, start) {
            (true, None) => start = Some(vc),
            (false, Some(s)) => {
                out.push((origin + s as i64, origin + vc as i64 - 1));
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn tile_object(kind: ObjectKind, cells: Vec<(i64, i64)>) -> GameObject {
    let left = cells.iter().map(|c| c.0).min().unwrap();
    let right = cells.iter().map(|c| c.0).max().unwrap();
    let top = cells.iter().map(|c| c.1).min().unwrap();
    GameObject {
        id: ObjectId::for_tiles(kind, left, top),
        kind,
        col_span: (left, right),
        anchor_row: top,
        entity_ref: None,
        cells,
    }
}

/// Groups the viewport into objects, sorted by id.
pub fn extract_objects(obs: &Observation) -> Vec<GameObject> {
    let origin = obs.viewport_origin_column;
    let mut objects = Vec::new();

    for e in &obs.entities {
        if e.alive && e.kind == EntityKind::Walker {
            let col = e.column();
            objects.push(GameObject {
                id: ObjectId::for_entity(e.id),
                kind: ObjectKind::Monster,
                col_span: (col, col),
                anchor_row: e.row(),
                entity_ref: Some(e.id),
                cells: Vec::new(),
            });
        }
    }

    let mut pipe_seen = [[false; VIEW_COLS]; LEVEL_ROWS];
    for row in 0..LEVEL_ROWS {
        let r = row as i64;
        for (a, b) in runs(obs, row, |t| t == TileKind::Coin) {
            objects.push(tile_object(ObjectKind::Coin, (a..=b).map(|c| (c, r)).collect()));
        }
        for (a, b) in runs(obs, row, |t| matches!(t, TileKind::Platform | TileKind::Brick)) {
            objects.push(tile_object(ObjectKind::Platform, (a..=b).map(|c| (c, r)).collect()));
        }
        for vc in 0..VIEW_COLS {
            let tile = obs.viewport[row][vc];
            let col = origin + vc as i64;
            if tile == TileKind::QuestionBlock {
                objects.push(tile_object(ObjectKind::QuestionBlock, vec![(col, r)]));
            }
            if tile.is_pipe() && !pipe_seen[row][vc] {
                // 4-connected flood fill over pipe tiles.
                let mut cells = Vec::new();
                let mut stack = vec![(vc, row)];
                pipe_seen[row][vc] = true;
                while let Some((c, rr)) = stack.pop() {
                    cells.push((origin + c as i64, rr as i64));
                    let mut push = |nc: usize, nr: usize| {
                        if obs.viewport[nr][nc].is_pipe() && !pipe_seen[nr][nc] {
                            pipe_seen[nr][nc] = true;
                            stack.push((nc, nr));
                        }
                    };
                    if c > 0 {
                        push(c - 1, rr);
                    }
                    if c + 1 < VIEW_COLS {
                        push(c + 1, rr);
                    }
                    if rr > 0 {
                        push(c, rr - 1);
                    }
                    if rr + 1 < LEVEL_ROWS {
                        push(c, rr + 1);
                    }
                }
                cells.sort_unstable();
                objects.push(tile_object(ObjectKind::Pipe, cells));
            }
        }
    }

    let bottom = LEVEL_ROWS - 1;
    for (a, b) in runs(obs, bottom, |t| t != TileKind::Ground) {
        objects.push(GameObject {
            id: ObjectId::for_tiles(ObjectKind::Pit, a, bottom as i64),
            kind: ObjectKind::Pit,
            col_span: (a, b),
            anchor_row: bottom as i64,
            entity_ref: None,
            cells: Vec::new(),
        });
    }

    for vc in 0..VIEW_COLS {
        let cells: Vec<(i64, i64)> = (0..LEVEL_ROWS)
            .filter(|&r| obs.viewport[r][vc] == TileKind::FinishPole)
            .map(|r| (origin + vc as i64, r as i64))
            .collect();
        if !cells.is_empty() {
            objects.push(tile_object(ObjectKind::Finish, cells));
        }
    }

    objects.sort_by_key(|o| o.id);
    objects
}

/// Signed distance from Mario's column to the nearest edge of a span; 0 inside it.
pub fn span_dx(span: (i64, i64), mario_col: i64) -> i64 {
    if span.0 > mario_col {
        span.0 - mario_col
    } else if span.1 < mario_col {
        span.1 - mario_col
    } else {
        0
    }
}

pub fn elaborate(objects: &[GameObject], mario: &MarioState, tick: u32) -> RelationalState {
    elaborate_with(&Thresholds::default(), objects, mario, tick)
}

pub fn elaborate_with(
    th: &Thresholds,
    objects: &[GameObject],
    mario: &MarioState,
    tick: u32,
) -> RelationalState {
    let mc = mario.column();
    let mr = mario.row();
    let mut facts: Vec<RelationalFact> = objects
        .iter()
        .map(|o| {
            let dx = span_dx(o.col_span, mc);
            let dy = o.anchor_row - mr;
            RelationalFact {
                object: o.id,
                kind: o.kind,
                col_span: o.col_span,
                dx,
                dy,
                bucket: bucket_distance(dx),
                direction: if dx >= 0 { Facing::Right } else { Facing::Left },
                // Monster objects are only built from live entities.
                isthreat: th.is_threat(o.kind, dx, dy, true),
                isreachable: th.is_reachable(o.kind, dx, dy),
                is_ahead: th.is_ahead(o.kind, dx),
            }
        })
        .collect();
    facts.sort_by_key(|f| f.object);
    facts.dedup_by_key(|f| f.object);
    RelationalState {
        facts,
        mario_on_ground: mario.on_ground,
        mario_fire_ready: mario.fire_cooldown == 0,
        mario_column: mc,
        tick,
        view_span: None,
    }
}

/// Extract then elaborate, recording the visible column range.
pub fn perceive(obs: &Observation) -> RelationalState {
    perceive_with(&Thresholds::default(), obs)
}

pub fn perceive_with(th: &Thresholds, obs: &Observation) -> RelationalState {
    let objects = extract_objects(obs);
    let mut state = elaborate_with(th, &objects, &obs.mario, obs.tick);
    state.view_span = Some((
        obs.viewport_origin_column,
        obs.viewport_origin_column + VIEW_COLS as i64 - 1,
    ));
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EntityState, Env, Level, GROUND_ROW};

    fn flat_obs() -> Observation {
        Env::with_defaults(Level::flat(60)).observation()
    }

    fn ground_only() -> Observation {
        let mut obs = flat_obs();
        for row in obs.viewport.iter_mut() {
            for t in row.iter_mut() {
                if *t == TileKind::FinishPole {
                    *t = TileKind::Empty;
                }
            }
        }
        obs
    }

    #[test]
    fn buckets() {
        assert_eq!(bucket_distance(0), DistanceBucket::Adjacent);
        assert_eq!(bucket_distance(1), DistanceBucket::Adjacent);
        assert_eq!(bucket_distance(3), DistanceBucket::Near);
        assert_eq!(bucket_distance(-3), DistanceBucket::Near);
        assert_eq!(bucket_distance(6), DistanceBucket::Mid);
        assert_eq!(bucket_distance(10), DistanceBucket::Far);
        assert_eq!(bucket_distance(11), DistanceBucket::OutOfRange);
        assert_eq!(bucket_distance(i64::MIN), DistanceBucket::OutOfRange);
    }

    #[test]
    fn ground_and_empty_yield_nothing() {
        assert!(extract_objects(&ground_only()).is_empty());
    }

    #[test]
    fn single_pit_span() {
        let mut obs = ground_only();
        obs.viewport[GROUND_ROW][8] = TileKind::Empty;
        obs.viewport[GROUND_ROW][9] = TileKind::Empty;
        let objs = extract_objects(&obs);
        assert_eq!(objs.len(), 1);
        assert_eq!(objs[0].kind, ObjectKind::Pit);
        assert_eq!(objs[0].col_span, (8, 9));
    }

    #[test]
    fn coin_runs_split_by_row() {
        let mut obs = ground_only();
        for c in 5..8 {
            obs.viewport[12][c] = TileKind::Coin;
        }
        obs.viewport[10][6] = TileKind::Coin;
        let objs = extract_objects(&obs);
        let coins: Vec<_> = objs.iter().filter(|o| o.kind == ObjectKind::Coin).collect();
        assert_eq!(coins.len(), 2);
        let run = coins.iter().find(|o| o.anchor_row == 12).unwrap();
        assert_eq!(run.col_span, (5, 7));
        let lone = coins.iter().find(|o| o.anchor_row == 10).unwrap();
        assert_eq!(lone.col_span, (6, 6));
        assert_ne!(run.id, lone.id);
    }

    #[test]
    fn pipe_group_is_one_object() {
        let mut obs = ground_only();
        for c in [10, 11] {
            obs.viewport[12][c] = TileKind::PipeTop;
            obs.viewport[13][c] = TileKind::PipeBody;
            obs.viewport[14][c] = TileKind::PipeBody;
        }
        let objs = extract_objects(&obs);
        assert_eq!(objs.len(), 1);
        assert_eq!(objs[0].kind, ObjectKind::Pipe);
        assert_eq!(objs[0].col_span, (10, 11));
        assert_eq!(objs[0].anchor_row, 12);
        assert_eq!(objs[0].cells.len(), 6);
    }

    fn mario_at(col: f64, row: f64) -> MarioState {
        let mut m = flat_obs().mario;
        m.x = col + 0.125;
        m.y = row;
        m
    }

    fn obj(kind: ObjectKind, span: (i64, i64), row: i64) -> GameObject {
        GameObject {
            id: ObjectId::for_tiles(kind, span.0, row),
            kind,
            col_span: span,
            anchor_row: row,
            entity_ref: None,
            cells: Vec::new(),
        }
    }

    #[test]
    fn monster_close_is_threat() {
        let mut obs = ground_only();
        obs.entities.push(EntityState {
            id: 0,
            kind: EntityKind::Walker,
            x: 4.125,
            y: 14.0,
            vx: 0.0,
            vy: 0.0,
            alive: true,
            facing: Facing::Left,
        });
        let s = perceive(&obs);
        assert_eq!(s.facts.len(), 1);
        let f = &s.facts[0];
        assert_eq!((f.dx, f.dy), (2, 0));
        assert!(f.isthreat);
        assert_eq!(f.direction, Facing::Right);
    }

    #[test]
    fn coin_reachability_predicate() {
        let m = mario_at(10.0, 14.0);
        let far = obj(ObjectKind::Coin, (15, 15), 12);
        let near = obj(ObjectKind::Coin, (12, 12), 11);
        let s = elaborate(&[far.clone(), near.clone()], &m, 0);
        let f_far = s.fact(far.id).unwrap();
        assert_eq!((f_far.dx, f_far.dy), (5, -2));
        assert!(!f_far.isreachable);
        let f_near = s.fact(near.id).unwrap();
        assert_eq!((f_near.dx, f_near.dy), (2, -3));
        assert!(f_near.isreachable);
    }

    #[test]
    fn nearest_edge_distance() {
        let m = mario_at(10.0, 14.0);
        assert_eq!(span_dx((13, 15), m.column()), 3);
        assert_eq!(span_dx((4, 7), m.column()), -3);
        assert_eq!(span_dx((9, 12), m.column()), 0);
        let s = elaborate(&[obj(ObjectKind::Pit, (13, 14), 15)], &m, 0);
        assert!(s.facts[0].is_ahead);
        assert_eq!(s.facts[0].bucket, DistanceBucket::Near);
        let s = elaborate(&[obj(ObjectKind::Finish, (40, 40), 5)], &m, 0);
        assert!(s.facts[0].is_ahead);
        assert_eq!(s.facts[0].bucket, DistanceBucket::OutOfRange);
    }

    #[test]
    fn elaboration_is_pure() {
        let obs = Env::with_defaults(crate::env::generate_level(0, 1, 3).unwrap()).observation();
        assert_eq!(perceive(&obs), perceive(&obs));
        assert_eq!(perceive(&obs).dump(), perceive(&obs).dump());
    }

    #[test]
    fn dump_format() {
        let m = mario_at(10.0, 14.0);
        let s = elaborate(&[obj(ObjectKind::Pit, (13, 14), 15)], &m, 0);
        let id = s.facts[0].object.0;
        assert_eq!(
            s.dump(),
            format!("pit id={id} dx=3 dy=1 bucket=near dir=right attrs=is_ahead\n")
        );
    }
}
