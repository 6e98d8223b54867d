use super::{EntityKind, Observation, LEVEL_ROWS, VIEW_COLS};

/// Renders the viewport as 16 lines of 22 characters. Entities are drawn
/// over tiles and Mario over everything.
pub fn render_ascii(obs: &Observation) -> String {
    let mut grid: Vec<Vec<char>> = obs
        .viewport
        .iter()
        .map(|row| row.iter().map(|t| t.render_char()).collect())
        .collect();
    let origin = obs.viewport_origin_column;
    let mut put = |col: i64, row: i64, ch: char| {
        let vc = col - origin;
        if (0..VIEW_COLS as i64).contains(&vc) && (0..LEVEL_ROWS as i64).contains(&row) {
            grid[row as usize][vc as usize] = ch;
        }
    };
    for e in obs.entities.iter().filter(|e| e.alive) {
        let ch = match e.kind {
            EntityKind::Walker => 'W',
            EntityKind::Fireball => '*',
        };
        put(e.column(), e.row(), ch);
    }
    if obs.mario.alive {
        put(obs.mario.column(), obs.mario.row(), 'M');
    }
    let mut out = String::with_capacity(LEVEL_ROWS * (VIEW_COLS + 1));
    for row in grid {
        out.extend(row);
        out.push('\n');
    }
    out
}
