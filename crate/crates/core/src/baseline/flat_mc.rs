use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{state_features, HeuristicWeights};
use crate::agent::{Agent, AgentError, GameContext};
use crate::cards::CardSet;
use crate::engine::{Action, GameState, Seat};
use crate::observation::{determinize, Observation};
use crate::rng::{mix_seed, GameRng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RolloutPolicy {
    /// Uniform over the legal actions.
    Random,
    /// Attacks the enemy hero whenever some attack on it is legal,
    /// otherwise uniform.
    #[default]
    AggressiveRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatMcConfig {
    /// Rollouts per option when time allows.
    pub k: u32,
    /// Actions played after the option before the leaf is evaluated.
    pub depth: u32,
    /// Leaf heuristic divisor: value = logistic(score / scale).
    pub leaf_scale: f64,
    pub rollout_policy: RolloutPolicy,
    /// Fraction of the remaining turn budget one call may spend.
    pub time_fraction: f64,
}

impl Default for FlatMcConfig {
    fn default() -> Self {
        FlatMcConfig {
            k: 16,
            depth: 5,
            leaf_scale: 10.0,
            rollout_policy: RolloutPolicy::AggressiveRandom,
            time_fraction: 0.5,
        }
    }
}

impl FlatMcConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.k == 0 {
            return Err("k must be at least 1".into());
        }
        if !(self.leaf_scale.is_finite() && self.leaf_scale > 0.0) {
            return Err("leaf_scale must be positive".into());
        }
        if !(self.time_fraction > 0.0 && self.time_fraction <= 1.0) {
            return Err("time_fraction must be in (0, 1]".into());
        }
        Ok(())
    }
}

/// Flat Monte Carlo: every option gets up to `k` rollouts, each on a fresh
/// determinization. Terminal rollouts score 1 / 0.5 / 0; rollouts cut at
/// the depth cap score the logistic of the heuristic. Rollouts are run in
/// rounds (one per option per round) so that a time cut leaves every
/// option with the same count. The highest mean wins, ties to the lowest
/// index.
pub struct FlatMcAgent {
    config: FlatMcConfig,
    weights: HeuristicWeights,
    seed: u64,
    cards: Option<Arc<CardSet>>,
    /// Calls made so far in the current turn, for seeding.
    turn: u32,
    call_in_turn: u64,
    /// Rollouts per option actually run on the last call.
    last_rounds: u32,
}

impl FlatMcAgent {
    pub fn new(config: FlatMcConfig, weights: HeuristicWeights) -> Self {
        FlatMcAgent {
            config,
            weights,
            seed: 0,
            cards: None,
            turn: 0,
            call_in_turn: 0,
            last_rounds: 0,
        }
    }

    pub fn config(&self) -> &FlatMcConfig {
        &self.config
    }

    pub fn last_rounds(&self) -> u32 {
        self.last_rounds
    }

    /// Mean rollout value per option for `obs`, using `move_seed` for all
    /// randomness and stopping new rounds at `deadline`.
    pub fn evaluate(
        &mut self,
        obs: &Observation,
        cards: &Arc<CardSet>,
        move_seed: u64,
        deadline: Option<Instant>,
    ) -> Result<Vec<f64>, AgentError> {
        let n = obs.options.len();
        let mut totals = vec![0.0; n];
        let mut rounds = 0;
        let started = Instant::now();
        for r in 0..self.config.k {
            if r > 0 {
                if let Some(d) = deadline {
                    let per_round = started.elapsed() / r;
                    if Instant::now() + per_round > d {
                        break;
                    }
                }
            }
            for (i, option) in obs.options.iter().enumerate() {
                let seed = mix_seed(&[move_seed, i as u64, r as u64]);
                totals[i] += self.rollout(obs, cards, option, seed)?;
            }
            rounds += 1;
        }
        self.last_rounds = rounds;
        Ok(totals.into_iter().map(|t| t / rounds as f64).collect())
    }

    fn rollout(&self, obs: &Observation, cards: &Arc<CardSet>, option: &Action, seed: u64) -> Result<f64, AgentError> {
        let mut s = determinize(obs, cards, seed).map_err(|e| AgentError::Failed(e.to_string()))?;
        let mut rng = GameRng::from_seed(mix_seed(&[seed, 1]));
        s.step_unchecked(option);
        let mut buf = Vec::with_capacity(32);
        for _ in 0..self.config.depth {
            if s.is_over() {
                break;
            }
            buf.clear();
            s.push_legal_actions(&mut buf);
            let a = self.pick(&s, &buf, &mut rng);
            s.step_unchecked(&buf[a]);
        }
        Ok(self.value(&s, obs.viewer))
    }

    fn pick(&self, s: &GameState, options: &[Action], rng: &mut GameRng) -> usize {
        match self.config.rollout_policy {
            RolloutPolicy::Random => rng.below(options.len()),
            RolloutPolicy::AggressiveRandom => {
                let enemy = s.active_seat().other();
                let face: Vec<usize> = options
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| {
                        matches!(a,
                            Action::Attack { defender: crate::engine::Target::Hero(h), .. }
                            | Action::HeroAttack { defender: crate::engine::Target::Hero(h) }
                            if *h == enemy)
                    })
                    .map(|(i, _)| i)
                    .collect();
                if face.is_empty() {
                    rng.below(options.len())
                } else {
                    face[rng.below(face.len())]
                }
            }
        }
    }

    fn value(&self, s: &GameState, me: Seat) -> f64 {
        match s.result() {
            Some(r) => r.score_for(me),
            None => {
                let x = self.weights.score(&state_features(s, me)) / self.config.leaf_scale;
                1.0 / (1.0 + (-x).exp())
            }
        }
    }

    /// First option that wins on the spot. Such an option scores 1 in
    /// every rollout, so it is taken without sampling.
    fn immediate_win(&self, obs: &Observation, cards: &Arc<CardSet>, seed: u64) -> Result<Option<usize>, AgentError> {
        let base = determinize(obs, cards, seed).map_err(|e| AgentError::Failed(e.to_string()))?;
        Ok(obs.options.iter().position(|o| {
            let mut s = base.clone();
            s.step_unchecked(o);
            s.result().is_some_and(|r| r.score_for(obs.viewer) == 1.0)
        }))
    }

    fn move_seed(&mut self, obs: &Observation) -> u64 {
        if obs.turn_number != self.turn {
            self.turn = obs.turn_number;
            self.call_in_turn = 0;
        }
        self.call_in_turn += 1;
        mix_seed(&[self.seed, obs.turn_number as u64, self.call_in_turn])
    }
}

impl Default for FlatMcAgent {
    fn default() -> Self {
        FlatMcAgent::new(FlatMcConfig::default(), HeuristicWeights::default())
    }
}

impl Agent for FlatMcAgent {
    fn name(&self) -> String {
        "flatmc".into()
    }

    fn initialize_game(&mut self, ctx: &GameContext) -> Result<(), AgentError> {
        self.seed = ctx.seed;
        self.cards = Some(Arc::clone(&ctx.cards));
        self.turn = 0;
        self.call_in_turn = 0;
        Ok(())
    }

    fn get_move(&mut self, obs: &Observation, time_left: Duration) -> Result<Action, AgentError> {
        let cards = self
            .cards
            .clone()
            .ok_or_else(|| AgentError::Failed("get_move before initialize_game".into()))?;
        let seed = self.move_seed(obs);
        match obs.options.len() {
            0 => return Err(AgentError::Failed("no options".into())),
            1 => return Ok(obs.options[0].clone()),
            _ => {}
        }
        if let Some(win) = self.immediate_win(obs, &cards, seed)? {
            return Ok(obs.options[win].clone());
        }
        let deadline = Instant::now() + time_left.mul_f64(self.config.time_fraction);
        let means = self.evaluate(obs, &cards, seed, Some(deadline))?;
        let mut best = 0;
        for (i, &m) in means.iter().enumerate() {
            if m > means[best] {
                best = i;
            }
        }
        Ok(obs.options[best].clone())
    }
}
