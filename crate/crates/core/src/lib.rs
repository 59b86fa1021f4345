//! Evolutionary search for skill-deep parameter sets of a two-player
//! real-time space shooter.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] - the 30-gene discrete search space and its operators.
//! * [`game`] - a deterministic, copyable simulation used as a forward model.
//! * [`agents`] - the six controllers that play the game.
//! * [`fitness`] - per-game score and the skill-depth fitness over three games.
//! * [`optimizers`] - RMHC, biased-mutation RMHC and the N-Tuple bandit EA.
//! * [`stats`] - re-evaluation summaries and the Mann-Whitney U test.
//! * [`harness`] - the multi-trial experiment driver and its report files.

pub mod agents;
pub mod error;
pub mod fitness;
pub mod game;
pub mod harness;
pub mod optimizers;
pub mod params;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};

/// Random generator used everywhere a run must be reproducible from a seed.
pub type Rng = rand_chacha::ChaCha8Rng;
