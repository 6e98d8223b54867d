use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EntityKind, Facing, TileKind, LEVEL_ROWS};
use crate::error::{parse_err, Error, Result};

pub const GROUND_ROW: usize = LEVEL_ROWS - 1;
pub const DEFAULT_WIDTH: usize = 100;
const MIN_WIDTH: usize = 30;
const FINISH_MARGIN: usize = 5;
const POLE_TOP_ROW: usize = 5;
/// Columns left of this are kept flat and monster-free around the spawn point.
const SAFE_PREFIX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonsterSpawn {
    pub kind: EntityKind,
    pub col: usize,
    pub row: usize,
    pub facing: Facing,
}

/// A complete level: the tile map plus monster spawns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Level {
    pub width: usize,
    /// Row-major, `LEVEL_ROWS * width` entries.
    pub tiles: Vec<TileKind>,
    pub monster_spawns: Vec<MonsterSpawn>,
    pub finish_column: usize,
    pub seed: u64,
    pub level_type: i64,
    pub difficulty: i64,
}

/// Generator knobs beyond `(level_type, difficulty, seed)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelOptions {
    /// Place a ground-level coin run on the walking line just in front of
    /// every monster spawn, so reaching the coins means meeting the monster.
    pub coin_monster_pairs: bool,
}

impl Level {
    /// A flat level of the given width: ground row, finish pole, nothing else.
    pub fn flat(width: usize) -> Level {
        assert!(width >= MIN_WIDTH, "levels are at least {MIN_WIDTH} columns wide");
        let mut level = Level {
            width,
            tiles: vec![TileKind::Empty; LEVEL_ROWS * width],
            monster_spawns: Vec::new(),
            finish_column: width - FINISH_MARGIN,
            seed: 0,
            level_type: 0,
            difficulty: 0,
        };
        for col in 0..width {
            level.set(col, GROUND_ROW, TileKind::Ground);
        }
        for row in POLE_TOP_ROW..GROUND_ROW {
            level.set(level.finish_column, row, TileKind::FinishPole);
        }
        level
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> TileKind {
        self.tiles[row * self.width + col]
    }

    /// Tile lookup in signed coordinates; `None` outside the map.
    #[inline]
    pub fn tile_at(&self, col: i64, row: i64) -> Option<TileKind> {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= LEVEL_ROWS as i64 {
            None
        } else {
            Some(self.get(col as usize, row as usize))
        }
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, tile: TileKind) {
        self.tiles[row * self.width + col] = tile;
    }

    /// Maximal runs of bottom-row columns without Ground, as inclusive ranges.
    pub fn pits(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for col in 0..self.width {
            let gap = self.get(col, GROUND_ROW) != TileKind::Ground;
            match (gap, start) {
                (true, None) => start = Some(col),
                (false, Some(s)) => {
                    out.push((s, col - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.width - 1));
        }
        out
    }

    /// Checks the structural invariants every level must satisfy.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.width < MIN_WIDTH {
            return Err(format!("width {} < {MIN_WIDTH}", self.width));
        }
        if self.tiles.len() != LEVEL_ROWS * self.width {
            return Err("tile grid has wrong size".into());
        }
        if self.finish_column >= self.width {
            return Err("finish column outside level".into());
        }
        let pole_cols: Vec<usize> = (0..self.width)
            .filter(|&c| (0..LEVEL_ROWS).any(|r| self.get(c, r) == TileKind::FinishPole))
            .collect();
        if pole_cols != [self.finish_column] {
            return Err(format!("finish pole columns {pole_cols:?}"));
        }
        for (start, end) in self.pits() {
            if start == 0 || end + 1 >= self.width {
                return Err(format!("pit [{start},{end}] touches the level edge"));
            }
            for col in start..=end {
                if self.get(col, GROUND_ROW) != TileKind::Empty {
                    return Err(format!("bottom row at {col} is neither Ground nor a pit"));
                }
            }
        }
        for s in &self.monster_spawns {
            if s.col >= self.width || s.row >= LEVEL_ROWS {
                return Err(format!("monster spawn {s:?} outside level"));
            }
        }
        Ok(())
    }

    /// Serializes the level in the plain-text level format.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (LEVEL_ROWS + 1) + 32);
        let _ = writeln!(
            out,
            "w={} finish={} seed={}",
            self.width, self.finish_column, self.seed
        );
        for row in 0..LEVEL_ROWS {
            for col in 0..self.width {
                out.push(self.get(col, row).file_char());
            }
            out.push('\n');
        }
        for s in &self.monster_spawns {
            let _ = writeln!(
                out,
                "monster {} {} {} {}",
                s.kind.name(),
                s.col,
                s.row,
                s.facing.name()
            );
        }
        out
    }

    /// Parses the plain-text level format. The header carries no level type
    /// or difficulty, so both load as 0.
    pub fn load(text: &str) -> Result<Level> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty level file"))?;
        let mut width = None;
        let mut finish = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| parse_err(1, format!("malformed header field `{field}`")))?;
            let bad = |_| parse_err(1, format!("bad value in `{field}`"));
            match key {
                "w" => width = Some(value.parse::<usize>().map_err(bad)?),
                "finish" => finish = Some(value.parse::<usize>().map_err(bad)?),
                "seed" => seed = Some(value.parse::<u64>().map_err(bad)?),
                _ => return Err(parse_err(1, format!("unknown header key `{key}`"))),
            }
        }
        let (width, finish_column, seed) = match (width, finish, seed) {
            (Some(w), Some(f), Some(s)) => (w, f, s),
            _ => return Err(parse_err(1, "header must contain w=, finish= and seed=")),
        };
        let mut tiles = Vec::with_capacity(LEVEL_ROWS * width);
        for _ in 0..LEVEL_ROWS {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| parse_err(LEVEL_ROWS + 1, "missing tile rows"))?;
            if line.chars().count() != width {
                return Err(parse_err(idx + 1, format!("expected {width} tiles")));
            }
            for c in line.chars() {
                let tile = TileKind::from_file_char(c)
                    .ok_or_else(|| parse_err(idx + 1, format!("unknown tile `{c}`")))?;
                tiles.push(tile);
            }
        }
        let mut monster_spawns = Vec::new();
        for (idx, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [tag, kind, col, row, facing] = parts[..] else {
                return Err(parse_err(idx + 1, "expected `monster <kind> <col> <row> <facing>`"));
            };
            if tag != "monster" {
                return Err(parse_err(idx + 1, format!("unexpected line tag `{tag}`")));
            }
            let kind = EntityKind::from_name(kind)
                .ok_or_else(|| parse_err(idx + 1, format!("unknown monster kind `{kind}`")))?;
            let facing = Facing::from_name(facing)
                .ok_or_else(|| parse_err(idx + 1, format!("unknown facing `{facing}`")))?;
            let col = col.parse().map_err(|_| parse_err(idx + 1, "bad column"))?;
            let row = row.parse().map_err(|_| parse_err(idx + 1, "bad row"))?;
            monster_spawns.push(MonsterSpawn {
                kind,
                col,
                row,
                facing,
            });
        }
        let level = Level {
            width,
            tiles,
            monster_spawns,
            finish_column,
            seed,
            level_type: 0,
            difficulty: 0,
        };
        level.validate().map_err(|msg| parse_err(0, msg))?;
        Ok(level)
    }
}

pub fn generate_level(level_type: i64, difficulty: i64, seed: u64) -> Result<Level> {
    generate_level_with(level_type, difficulty, seed, LevelOptions::default())
}

#[derive(Clone, Copy)]
enum Feature {
    Pit,
    Pipe,
    Coins,
    Blocks,
    Platform,
}

/// Seeded overground level generator.
pub fn generate_level_with(
    level_type: i64,
    difficulty: i64,
    seed: u64,
    options: LevelOptions,
) -> Result<Level> {
    if level_type != 0 {
        return Err(Error::UnsupportedLevelType(level_type));
    }
    if difficulty < 0 {
        return Err(Error::InvalidDifficulty(difficulty));
    }
    let d = difficulty.min(8) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::flat(DEFAULT_WIDTH);
    level.seed = seed;
    level.difficulty = difficulty;
    let width = level.width;
    let finish = level.finish_column;

    let max_pit = (2 + d / 2).min(4);
    let gap_lo = 3usize.saturating_sub(d / 3).max(2);
    let gap_hi = (9usize.saturating_sub(d)).max(gap_lo + 1);
    let weights: [(Feature, u32); 5] = [
        (Feature::Pit, 3 + d as u32),
        (Feature::Pipe, 2 + (d as u32) / 2),
        (Feature::Coins, 3),
        (Feature::Blocks, 2),
        (Feature::Platform, 2),
    ];
    let total: u32 = weights.iter().map(|w| w.1).sum();

    let end = finish - 8;
    let mut col = SAFE_PREFIX + rng.gen_range(0..4);
    while col < end {
        let mut pick = rng.gen_range(0..total);
        let mut feature = Feature::Coins;
        for (f, w) in weights {
            if pick < w {
                feature = f;
                break;
            }
            pick -= w;
        }
        let room = end - col;
        match feature {
            Feature::Pit => {
                let len = rng.gen_range(1..=max_pit).min(room);
                for c in col..col + len {
                    level.set(c, GROUND_ROW, TileKind::Empty);
                }
                col += len;
            }
            Feature::Pipe => {
                let height = rng.gen_range(2..=3);
                let len = 2.min(room);
                let top = GROUND_ROW - height;
                for c in col..col + len {
                    level.set(c, top, TileKind::PipeTop);
                    for r in top + 1..GROUND_ROW {
                        level.set(c, r, TileKind::PipeBody);
                    }
                }
                col += len;
            }
            Feature::Coins => {
                let len = rng.gen_range(1..=4).min(room);
                let row = [11, 12, GROUND_ROW - 1][rng.gen_range(0..3)];
                for c in col..col + len {
                    level.set(c, row, TileKind::Coin);
                }
                col += len;
            }
            Feature::Blocks => {
                let len = rng.gen_range(1..=3).min(room);
                let special = col + rng.gen_range(0..len);
                for c in col..col + len {
                    let tile = if c == special || rng.gen_bool(0.5) {
                        TileKind::QuestionBlock
                    } else {
                        TileKind::Brick
                    };
                    level.set(c, 11, tile);
                }
                col += len;
            }
            Feature::Platform => {
                let len = rng.gen_range(3..=5).min(room);
                let with_coins = rng.gen_bool(0.5);
                for c in col..col + len {
                    level.set(c, 11, TileKind::Platform);
                    if with_coins {
                        level.set(c, 10, TileKind::Coin);
                    }
                }
                col += len;
            }
        }
        col += rng.gen_range(gap_lo..=gap_hi);
    }

    // Monsters stand on ground, away from pits and pipes.
    let max_monsters = (width / 20) + 2 * d;
    let min_monsters = (2 + d).min(max_monsters);
    let wanted = rng.gen_range(min_monsters..=max_monsters);
    let mut candidates: Vec<usize> = (SAFE_PREFIX + 4..finish - 4)
        .filter(|&c| {
            (c.saturating_sub(1)..=c + 1).all(|cc| level.get(cc, GROUND_ROW) == TileKind::Ground)
                && level.get(c, GROUND_ROW - 1) == TileKind::Empty
                && !level.get(c, GROUND_ROW - 2).is_solid()
        })
        .collect();
    let mut spawn_cols = Vec::with_capacity(wanted);
    while spawn_cols.len() < wanted && !candidates.is_empty() {
        let c = candidates.swap_remove(rng.gen_range(0..candidates.len()));
        if spawn_cols.iter().all(|&s: &usize| s.abs_diff(c) >= 3) {
            spawn_cols.push(c);
        }
    }
    spawn_cols.sort_unstable();
    for c in spawn_cols {
        level.monster_spawns.push(MonsterSpawn {
            kind: EntityKind::Walker,
            col: c,
            row: GROUND_ROW - 1,
            facing: Facing::Left,
        });
        if options.coin_monster_pairs {
            for cc in c - 3..c {
                if level.get(cc, GROUND_ROW - 1) == TileKind::Empty
                    && level.get(cc, GROUND_ROW) == TileKind::Ground
                {
                    level.set(cc, GROUND_ROW - 1, TileKind::Coin);
                }
            }
        }
    }

    debug_assert!(level.validate().is_ok());
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_inputs_same_level() {
        let a = generate_level(0, 0, 42).unwrap();
        let b = generate_level(0, 0, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dump(), b.dump());
    }

    #[test]
    fn rejects_other_level_types() {
        assert!(matches!(
            generate_level(1, 0, 1),
            Err(Error::UnsupportedLevelType(1))
        ));
        assert!(matches!(
            generate_level(0, -1, 1),
            Err(Error::InvalidDifficulty(-1))
        ));
    }

    #[test]
    fn hundred_seeds_satisfy_invariants() {
        for seed in 0..100 {
            let level = generate_level(0, 0, seed).unwrap();
            level.validate().unwrap();
            for (s, e) in level.pits() {
                assert!(e - s < 2, "seed {seed}: pit [{s},{e}] too wide");
                assert_eq!(level.get(s - 1, GROUND_ROW), TileKind::Ground);
                assert_eq!(level.get(e + 1, GROUND_ROW), TileKind::Ground);
            }
            assert!(level.monster_spawns.len() <= level.width / 20);
        }
    }

    #[test]
    fn harder_levels_have_more_hazards() {
        let count = |d: i64| -> usize {
            (0..100)
                .map(|s| {
                    let l = generate_level(0, d, s).unwrap();
                    l.pits().len() + l.monster_spawns.len()
                })
                .sum()
        };
        let easy = count(0);
        let hard = count(3);
        assert!(hard >= easy, "difficulty 3: {hard} < difficulty 0: {easy}");
    }

    #[test]
    fn dump_load_round_trip_is_byte_exact() {
        for seed in [0, 7, 99] {
            let level = generate_level(0, 2, seed).unwrap();
            let text = level.dump();
            let back = Level::load(&text).unwrap();
            assert_eq!(back.dump(), text);
            assert_eq!(back.tiles, level.tiles);
            assert_eq!(back.monster_spawns, level.monster_spawns);
        }
    }

    #[test]
    fn load_rejects_garbage() {
        assert!(Level::load("").is_err());
        assert!(Level::load("w=30 finish=25").is_err());
        let mut text = Level::flat(30).dump();
        text.push_str("monster dragon 3 14 left\n");
        assert!(Level::load(&text).is_err());
    }

    #[test]
    fn conjunction_option_places_coins_in_monster_path() {
        let level = generate_level_with(
            0,
            0,
            5,
            LevelOptions {
                coin_monster_pairs: true,
            },
        )
        .unwrap();
        assert!(!level.monster_spawns.is_empty());
        for s in &level.monster_spawns {
            let coins = (s.col - 3..s.col)
                .filter(|&c| level.get(c, GROUND_ROW - 1) == TileKind::Coin)
                .count();
            assert!(coins >= 1, "no coin before monster at {}", s.col);
        }
    }
}
