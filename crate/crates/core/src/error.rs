use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency {freq_ghz} GHz outside the validity range [{min_ghz}, {max_ghz}] GHz of material `{material}`")]
    FrequencyOutOfRange {
        material: String,
        freq_ghz: f64,
        min_ghz: f64,
        max_ghz: f64,
    },

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("unknown bundled scene `{0}`")]
    UnknownScene(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("cannot read scene file {path}: {source}")]
    SceneIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse scene: {0}")]
    SceneParse(#[source] serde_json::Error),

    #[error("invalid position: {0}")]
    InvalidPosition(String),

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("degenerate polarization frame: propagation parallel to the reflecting surface")]
    DegenerateFrame,

    #[error("reflection order {requested} exceeds the supported maximum {max}")]
    ReflectionOrderTooHigh { requested: usize, max: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the scene (missing file, malformed geometry, materials).
    pub fn is_scene_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownMaterial(_)
                | Error::UnknownScene(_)
                | Error::InvalidScene(_)
                | Error::SceneIo { .. }
                | Error::SceneParse(_)
        )
    }
}
