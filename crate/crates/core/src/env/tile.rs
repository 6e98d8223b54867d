/// Kind of a single map tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum TileKind {
    #[default]
    Empty,
    Ground,
    Brick,
    QuestionBlock,
    UsedBlock,
    Coin,
    PipeBody,
    PipeTop,
    Platform,
    FinishPole,
}

impl TileKind {
    pub const ALL: [TileKind; 10] = [
        TileKind::Empty,
        TileKind::Ground,
        TileKind::Brick,
        TileKind::QuestionBlock,
        TileKind::UsedBlock,
        TileKind::Coin,
        TileKind::PipeBody,
        TileKind::PipeTop,
        TileKind::Platform,
        TileKind::FinishPole,
    ];

    pub fn is_solid(self) -> bool {
        matches!(
            self,
            TileKind::Ground
                | TileKind::Brick
                | TileKind::QuestionBlock
                | TileKind::UsedBlock
                | TileKind::PipeBody
                | TileKind::PipeTop
                | TileKind::Platform
        )
    }

    pub fn is_pipe(self) -> bool {
        matches!(self, TileKind::PipeBody | TileKind::PipeTop)
    }

    /// Character used by the level file format.
    pub fn file_char(self) -> char {
        match self {
            TileKind::Empty => '.',
            TileKind::Ground => '#',
            TileKind::Brick => 'B',
            TileKind::QuestionBlock => '?',
            TileKind::UsedBlock => 'U',
            TileKind::Coin => 'c',
            TileKind::PipeBody => '|',
            TileKind::PipeTop => 'T',
            TileKind::Platform => '-',
            TileKind::FinishPole => 'F',
        }
    }

    pub fn from_file_char(c: char) -> Option<TileKind> {
        TileKind::ALL.into_iter().find(|t| t.file_char() == c)
    }

    /// Character used by the ASCII renderer. Empty renders as a blank.
    pub fn render_char(self) -> char {
        match self {
            TileKind::Empty => ' ',
            other => other.file_char(),
        }
    }
}
