//! Reference agents: pass, uniform random, one-ply greedy and flat Monte
//! Carlo over determinizations.

mod flat_mc;
mod greedy;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentError, GameContext};
use crate::engine::{Action, GameState, Seat};
use crate::observation::Observation;
use crate::rng::GameRng;

pub use flat_mc::{FlatMcAgent, FlatMcConfig, RolloutPolicy};
pub use greedy::GreedyAgent;

/// Linear evaluation weights. Own and opponent terms are mirrored so a
/// symmetric position scores 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicWeights {
    pub own_health: f64,
    pub opp_health: f64,
    pub own_board_attack: f64,
    pub own_board_health: f64,
    pub opp_board_attack: f64,
    pub opp_board_health: f64,
    pub hand_size: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        HeuristicWeights {
            own_health: 1.0,
            opp_health: -1.0,
            own_board_attack: 1.0,
            own_board_health: 1.0,
            opp_board_attack: -1.0,
            opp_board_health: -1.0,
            hand_size: 0.5,
        }
    }
}

impl HeuristicWeights {
    pub fn validate(&self) -> Result<(), String> {
        if self.as_array().iter().all(|w| w.is_finite()) {
            Ok(())
        } else {
            Err("heuristic weights must be finite".into())
        }
    }

    fn as_array(&self) -> [f64; 7] {
        [
            self.own_health,
            self.opp_health,
            self.own_board_attack,
            self.own_board_health,
            self.opp_board_attack,
            self.opp_board_health,
            self.hand_size,
        ]
    }

    pub fn score(&self, f: &Features) -> f64 {
        self.as_array().iter().zip(f.0).map(|(w, x)| w * x).sum()
    }
}

/// (own hero health, opponent hero health, own board attack, own board
/// health, opponent board attack, opponent board health, own hand size)
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Features(pub [f64; 7]);

fn board_sums(board: &[crate::engine::MinionInstance]) -> (f64, f64) {
    board.iter().fold((0.0, 0.0), |(a, h), m| {
        (a + m.attack() as f64, h + m.current_health() as f64)
    })
}

pub fn features(obs: &Observation) -> Features {
    let (oa, oh) = board_sums(&obs.own.board);
    let (ea, eh) = board_sums(&obs.opponent.board);
    Features([
        obs.own.hero_health as f64,
        obs.opponent.hero_health as f64,
        oa,
        oh,
        ea,
        eh,
        obs.own.hand.len() as f64,
    ])
}

/// Same as `features(&observe(state, seat))` without building the view.
pub fn state_features(state: &GameState, seat: Seat) -> Features {
    let me = state.player(seat);
    let them = state.player(seat.other());
    let (oa, oh) = board_sums(&me.board);
    let (ea, eh) = board_sums(&them.board);
    Features([
        me.hero_health as f64,
        them.hero_health as f64,
        oa,
        oh,
        ea,
        eh,
        me.hand.len() as f64,
    ])
}

pub fn heuristic_score(obs: &Observation, w: &HeuristicWeights) -> f64 {
    w.score(&features(obs))
}

/// Always ends the turn.
#[derive(Debug, Default)]
pub struct PassAgent;

impl Agent for PassAgent {
    fn name(&self) -> String {
        "pass".into()
    }

    fn get_move(&mut self, _: &Observation, _: Duration) -> Result<Action, AgentError> {
        Ok(Action::EndTurn)
    }
}

/// Picks uniformly among the options, seeded per game.
#[derive(Debug)]
pub struct RandomAgent {
    rng: GameRng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent {
            rng: GameRng::from_seed(seed),
        }
    }
}

impl Default for RandomAgent {
    fn default() -> Self {
        RandomAgent::new(0)
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> String {
        "random".into()
    }

    fn initialize_game(&mut self, ctx: &GameContext) -> Result<(), AgentError> {
        self.rng = GameRng::from_seed(ctx.seed);
        Ok(())
    }

    fn get_move(&mut self, obs: &Observation, _: Duration) -> Result<Action, AgentError> {
        self.rng
            .choose(&obs.options)
            .cloned()
            .ok_or_else(|| AgentError::Failed("no options".into()))
    }
}
