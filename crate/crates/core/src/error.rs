use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported number of cells {got}; supported values are 1, 3 and 7")]
    UnsupportedCellCount { got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pilot index {index} out of range for {num_pilots} pilots")]
    PilotOutOfRange { index: usize, num_pilots: usize },

    #[error("reuse factor {factor} exceeds the number of cells {cells}")]
    ReuseFactorTooLarge { factor: usize, cells: usize },

    #[error("no proper {colors}-coloring exists for this {cells}-cell layout")]
    NoProperColoring { colors: usize, cells: usize },

    #[error("pilot length {pilots} must be shorter than the coherence block of {coherence} symbols")]
    OverheadTooLarge { pilots: usize, coherence: usize },

    #[error("zero channel estimate for user {user} of cell {cell}; cannot normalize precoder")]
    DegeneratePrecoder { cell: usize, user: usize },

    #[error("zero-forcing requires more antennas than users (M = {antennas}, K = {users})")]
    TooFewAntennas { antennas: usize, users: usize },

    #[error("rank-deficient estimate Gram matrix in cell {cell} (condition number {condition:e})")]
    RankDeficient { cell: usize, condition: f64 },

    #[error("empirical SINR needs at least {need} blocks, got {got}")]
    TooFewBlocks { got: usize, need: usize },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::ConfigSyntax { .. } => 2,
            Error::DegeneratePrecoder { .. } | Error::RankDeficient { .. } => 3,
            Error::Io { .. } => 1,
            // Anything else reaching the CLI came from a config value the
            // modules rejected.
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
