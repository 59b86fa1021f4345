//! Play-test service: a human plays an evolved game in real time against the
//! game's enemy agent over a websocket.
//!
//! The wire protocol is JSON text frames (see [`protocol`]). Each session owns
//! one game loop that advances on a fixed tick interval, or once per received
//! action in lockstep mode.

pub mod games;
pub mod protocol;
pub mod registry;
pub mod server;
pub mod session;

pub use games::{list_games, GameEntry};
pub use protocol::{ClientMessage, ServerMessage, WireAction};
pub use registry::Registry;
pub use server::{router, serve, AppState};
pub use session::{Session, SessionConfig, TickOutput};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Game(#[from] skilldepth::Error),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("no session {0:?}")]
    UnknownSession(String),
    #[error("session {0:?} is attached to another client")]
    Busy(String),
    #[error("game is over")]
    Finished,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
