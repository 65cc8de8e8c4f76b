use std::sync::Arc;
use std::time::Duration;

use super::{state_features, HeuristicWeights};
use crate::agent::{Agent, AgentError, GameContext};
use crate::cards::CardSet;
use crate::engine::{Action, Outcome};
use crate::observation::{determinize, Observation};
use crate::rng::mix_seed;

/// One-ply search on a single determinization per call, seeded from the
/// game seed and turn number. Picks the option whose successor scores best
/// for the mover; a winning successor beats everything and a losing one
/// loses to everything. Ties go to the lowest option index.
pub struct GreedyAgent {
    weights: HeuristicWeights,
    seed: u64,
    cards: Option<Arc<CardSet>>,
}

impl GreedyAgent {
    pub fn new(weights: HeuristicWeights) -> Self {
        GreedyAgent {
            weights,
            seed: 0,
            cards: None,
        }
    }

    pub fn weights(&self) -> &HeuristicWeights {
        &self.weights
    }

    /// The choice for `obs`, as an index into `obs.options`.
    pub fn choose(&self, obs: &Observation, cards: &Arc<CardSet>) -> Result<usize, AgentError> {
        if obs.options.len() <= 1 {
            return Ok(0);
        }
        let seed = mix_seed(&[self.seed, obs.turn_number as u64]);
        let base = determinize(obs, cards, seed).map_err(|e| AgentError::Failed(e.to_string()))?;
        let me = obs.viewer;
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, option) in obs.options.iter().enumerate() {
            let mut s = base.clone();
            s.step_unchecked(option);
            let value = match s.result().map(|r| r.outcome) {
                Some(Outcome::Win(w)) if w == me => f64::INFINITY,
                Some(Outcome::Win(_)) => f64::MIN,
                _ => self.weights.score(&state_features(&s, me)),
            };
            if value > best.0 {
                best = (value, i);
            }
        }
        Ok(best.1)
    }
}

impl Default for GreedyAgent {
    fn default() -> Self {
        GreedyAgent::new(HeuristicWeights::default())
    }
}

impl Agent for GreedyAgent {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn initialize_game(&mut self, ctx: &GameContext) -> Result<(), AgentError> {
        self.seed = ctx.seed;
        self.cards = Some(Arc::clone(&ctx.cards));
        Ok(())
    }

    fn get_move(&mut self, obs: &Observation, _: Duration) -> Result<Action, AgentError> {
        let cards = self
            .cards
            .clone()
            .ok_or_else(|| AgentError::Failed("get_move before initialize_game".into()))?;
        let i = self.choose(obs, &cards)?;
        obs.options
            .get(i)
            .cloned()
            .ok_or_else(|| AgentError::Failed("no options".into()))
    }
}
