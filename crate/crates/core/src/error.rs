use thiserror::Error;

/// Library-wide error type.
///
/// Variants correspond to the failure modes the numerical contracts can
/// actually produce; everything else is a caller bug and panics.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter fell outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The physical grid is too small for the populated mode range, so a
    /// transform or product would wrap frequencies onto retained modes.
    #[error("aliasing: grid of {grid} points cannot hold modes up to {needed} alias-free")]
    Aliasing { grid: usize, needed: usize },

    /// Time quadrature too coarse for the fastest oscillation present.
    #[error("time aliasing: step {dt} does not resolve phase speed {phase_speed}")]
    TimeAliasing { dt: f64, phase_speed: f64 },

    /// A state coefficient became non-finite during integration.
    #[error("blowup/instability: non-finite state at t = {t}")]
    Blowup { t: f64 },

    /// Rejection sampling exceeded its attempt cap.
    #[error(
        "acceptance starvation: {attempts} proposals accepted none \
         (empirical acceptance rate {rate:.3e})"
    )]
    AcceptanceStarvation { attempts: u64, rate: f64 },

    /// A time-window diagnostic was asked of a trajectory with too few samples.
    #[error("insufficient samples: {got} in window, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    /// An ensemble member failed; carries the member's index and stream key
    /// so the offending draw can be replayed in isolation.
    #[error("ensemble member {index} (stream key {key:#018x}) failed: {source}")]
    Member {
        index: usize,
        key: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn member(index: usize, key: u64, source: Error) -> Self {
        Error::Member {
            index,
            key,
            source: Box::new(source),
        }
    }
}
