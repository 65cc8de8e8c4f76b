//! The agent lifecycle contract and the match driver.
//!
//! An agent lives for a session: `initialize_agent`, then any number of
//! games bracketed by `initialize_game` / `finalize_game`, then
//! `finalize_agent`. Inside a game the driver calls `get_move` whenever the
//! agent's seat is active, passing the masked [`Observation`] and the time
//! left in the current turn's budget.

mod driver;
mod process;
mod runner;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{CardSet, DeckSpec, HeroClass};
use crate::engine::{Action, GameResult, MatchConfig, Outcome, Seat};
use crate::observation::Observation;

pub use driver::{play_game, play_game_observed, play_games, FaultPolicy, GameRecord, GameSetup, SeatStats, Series};
pub use process::{serve, ProcessAgent, WireContext, WireMessage};
pub use runner::{AgentRunner, CallError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgentError {
    #[error("{0}")]
    Failed(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// What an agent learns when a game starts.
#[derive(Clone, Debug)]
pub struct GameContext {
    pub seat: Seat,
    /// Per-game seed for the agent's own randomness.
    pub seed: u64,
    pub deck: DeckSpec,
    pub opponent_class: HeroClass,
    pub config: MatchConfig,
    pub cards: Arc<CardSet>,
}

pub trait Agent: Send {
    fn name(&self) -> String;

    fn initialize_agent(&mut self) -> Result<(), AgentError> {
        Ok(())
    }

    fn initialize_game(&mut self, _ctx: &GameContext) -> Result<(), AgentError> {
        Ok(())
    }

    /// Picks one of `obs.options`. `time_left` is what remains of this
    /// turn's computation pool.
    fn get_move(&mut self, obs: &Observation, time_left: Duration) -> Result<Action, AgentError>;

    fn finalize_game(&mut self, _result: &GameResult) -> Result<(), AgentError> {
        Ok(())
    }

    fn finalize_agent(&mut self) -> Result<(), AgentError> {
        Ok(())
    }
}

/// Per-agent aggregate over a series of games.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentStats {
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
    pub games: u32,
    pub moves: u64,
    pub total_response_ms: f64,
    pub max_response_ms: f64,
    pub timeouts: u32,
    pub faults: u32,
}

impl AgentStats {
    /// Records one game from `seat`'s side.
    pub fn record(&mut self, seat: Seat, result: &GameResult, s: &SeatStats) {
        self.games += 1;
        match result.outcome {
            Outcome::Win(w) if w == seat => self.wins += 1,
            Outcome::Win(_) => self.losses += 1,
            Outcome::Draw => self.draws += 1,
        }
        self.moves += s.moves_made;
        self.total_response_ms += s.total_response_ms;
        self.max_response_ms = self.max_response_ms.max(s.max_response_ms);
        self.timeouts += s.timeouts;
        self.faults += s.faults;
    }

    pub fn merge(&mut self, other: &AgentStats) {
        self.wins += other.wins;
        self.draws += other.draws;
        self.losses += other.losses;
        self.games += other.games;
        self.moves += other.moves;
        self.total_response_ms += other.total_response_ms;
        self.max_response_ms = self.max_response_ms.max(other.max_response_ms);
        self.timeouts += other.timeouts;
        self.faults += other.faults;
    }

    /// Draws count half a win.
    pub fn win_rate(&self) -> f64 {
        if self.games == 0 {
            0.0
        } else {
            (self.wins as f64 + 0.5 * self.draws as f64) / self.games as f64
        }
    }

    /// Mean wall-clock time per `get_move` call.
    pub fn avg_response_ms(&self) -> f64 {
        if self.moves == 0 {
            0.0
        } else {
            self.total_response_ms / self.moves as f64
        }
    }
}
