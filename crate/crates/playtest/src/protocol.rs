//! JSON messages exchanged over the socket, one per text frame.

use serde::{Deserialize, Serialize};
use skilldepth::game::{Action, Snapshot, Turn};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WireAction {
    /// -1 anticlockwise, 0 straight, 1 clockwise.
    pub turn: i8,
    pub thrust: bool,
    pub shoot: bool,
}

impl WireAction {
    pub fn to_action(self) -> Result<Action> {
        let turn = Turn::from_sign(self.turn)
            .ok_or_else(|| Error::Protocol(format!("turn must be -1, 0 or 1, got {}", self.turn)))?;
        Ok(Action {
            turn,
            thrust: self.thrust,
            shoot: self.shoot,
        })
    }
}

impl From<Action> for WireAction {
    fn from(a: Action) -> Self {
        Self {
            turn: a.turn.sign(),
            thrust: a.thrust,
            shoot: a.shoot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ClientMessage {
    /// Creates a session and attaches this connection to it. Without a
    /// genome the server's default game is used.
    Start {
        #[serde(default)]
        genome: Option<Vec<u8>>,
        #[serde(default = "first_side")]
        human_side: u8,
        #[serde(default)]
        enemy: Option<u8>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Action(WireAction),
    /// Re-attaches to a session parked after a disconnect.
    Resume {
        session_id: String,
    },
}

fn first_side() -> u8 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ServerMessage {
    Session {
        session_id: String,
        human_side: u8,
        enemy: u8,
        tick_interval_ms: u64,
        seed: u64,
    },
    State(Snapshot),
    /// `winner` is 1 or 2, or null for a draw.
    Result {
        winner: Option<u8>,
        tick: u32,
        scores: [i64; 2],
    },
    Error {
        message: String,
    },
}

impl ClientMessage {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Protocol(e.to_string()))
    }
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }

    pub fn error(e: impl std::fmt::Display) -> Self {
        ServerMessage::Error { message: e.to_string() }
    }
}
