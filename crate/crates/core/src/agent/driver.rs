//! Plays games between agent sessions.
//!
//! Time budget: each turn gives the active agent a pool of
//! `time_budget_ms`, shared by all its `get_move` calls in that turn. A
//! single call is awaited for at most twice the remaining pool. A call that
//! overruns the pool, or is cut off by the cap, counts as a timeout: its
//! action (if any) is discarded and the turn is ended for the agent.

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{AgentRunner, AgentStats, CallError, GameContext};
use crate::cards::{CardSet, DeckSpec};
use crate::engine::{Action, EngineError, GameEvent, GameResult, GameState, MatchConfig, Replay, ReplayHeader, Seat};
use crate::observation::observe;
use crate::rng::mix_seed;

const AGENT_SEED_TAG: u64 = 0xA6E7;

/// What happens when an agent errors, panics or returns an illegal action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultPolicy {
    /// The faulting agent loses immediately.
    #[default]
    Forfeit,
    /// The agent's turn is ended for it and play continues.
    ForceEndTurn,
}

#[derive(Clone, Debug)]
pub struct GameSetup<'a> {
    /// Decks by seat: first player, second player.
    pub decks: [&'a DeckSpec; 2],
    pub cards: Arc<CardSet>,
    pub config: MatchConfig,
    pub seed: u64,
    pub fault_policy: FaultPolicy,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeatStats {
    pub moves_made: u64,
    pub total_response_ms: f64,
    pub max_response_ms: f64,
    pub timeouts: u32,
    pub faults: u32,
    /// Description of the first fault, if any.
    pub fault: Option<String>,
}

impl SeatStats {
    fn fault(&mut self, why: String) {
        self.faults += 1;
        self.fault.get_or_insert(why);
    }
}

/// Everything recorded about one finished game. Arrays are indexed by seat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub seed: u64,
    pub agents: [String; 2],
    pub decks: [String; 2],
    pub result: GameResult,
    pub seats: [SeatStats; 2],
    /// Applied actions in order, forced end-of-turns included.
    pub actions: Vec<Action>,
    pub events: Vec<GameEvent>,
}

impl GameRecord {
    pub fn turns(&self) -> u32 {
        self.result.final_turn
    }

    pub fn replay(&self, decks: [&DeckSpec; 2], config: &MatchConfig, cards: &CardSet) -> Replay {
        Replay {
            header: ReplayHeader {
                deck_a: decks[0].clone(),
                deck_b: decks[1].clone(),
                seed: self.seed,
                config: config.clone(),
                card_set_version: cards.version().to_string(),
            },
            actions: self.actions.clone(),
            events: self.events.clone(),
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Plays one game. `agents[0]` takes the first seat with `setup.decks[0]`.
pub fn play_game(agents: [&mut AgentRunner; 2], setup: &GameSetup) -> Result<GameRecord, EngineError> {
    play_game_observed(agents, setup, &mut |_| {})
}

/// [`play_game`], calling `observer` on the initial state and after every
/// applied action.
pub fn play_game_observed(
    agents: [&mut AgentRunner; 2],
    setup: &GameSetup,
    observer: &mut dyn FnMut(&GameState),
) -> Result<GameRecord, EngineError> {
    let mut state = GameState::new_game(
        setup.decks[0],
        setup.decks[1],
        Arc::clone(&setup.cards),
        setup.config.clone(),
        setup.seed,
    )?;
    observer(&state);
    let budget = Duration::from_millis(setup.config.time_budget_ms);
    let mut seats: [SeatStats; 2] = Default::default();
    let mut actions = Vec::new();

    for seat in Seat::BOTH {
        let i = seat.index();
        let ctx = GameContext {
            seat,
            seed: mix_seed(&[setup.seed, i as u64, AGENT_SEED_TAG]),
            deck: setup.decks[i].clone(),
            opponent_class: setup.decks[1 - i].hero_class,
            config: setup.config.clone(),
            cards: Arc::clone(&setup.cards),
        };
        if let Err(e) = agents[i].initialize_game(ctx, budget) {
            seats[i].fault(format!("initialize_game: {e}"));
            state.forfeit(seat);
        }
    }

    let mut turn = state.turn_number();
    let mut used = Duration::ZERO;
    while !state.is_over() {
        if state.turn_number() != turn {
            turn = state.turn_number();
            used = Duration::ZERO;
        }
        let seat = state.active_seat();
        let i = seat.index();
        let remaining = budget.saturating_sub(used);
        let (out, took) = agents[i].get_move(observe(&state, seat), remaining, remaining * 2);
        used += took;
        let st = &mut seats[i];
        st.moves_made += 1;
        st.total_response_ms += ms(took);
        st.max_response_ms = st.max_response_ms.max(ms(took));

        let action = match out {
            Err(CallError::Timeout(_)) => {
                st.timeouts += 1;
                Action::EndTurn
            }
            Ok(_) if used > budget => {
                st.timeouts += 1;
                Action::EndTurn
            }
            Ok(a) => a,
            Err(e) => {
                st.fault(e.to_string());
                match setup.fault_policy {
                    FaultPolicy::Forfeit => {
                        state.forfeit(seat);
                        observer(&state);
                        break;
                    }
                    FaultPolicy::ForceEndTurn => Action::EndTurn,
                }
            }
        };
        match state.step(&action) {
            Ok(()) => actions.push(action),
            Err(e) => {
                st.fault(e.to_string());
                match setup.fault_policy {
                    FaultPolicy::Forfeit => state.forfeit(seat),
                    FaultPolicy::ForceEndTurn => {
                        state.step(&Action::EndTurn)?;
                        actions.push(Action::EndTurn);
                    }
                }
            }
        }
        observer(&state);
    }

    let result = state.result().expect("loop ends with a result");
    for seat in Seat::BOTH {
        let i = seat.index();
        if let Err(e) = agents[i].finalize_game(result, budget) {
            seats[i].fault(format!("finalize_game: {e}"));
        }
    }
    Ok(GameRecord {
        seed: setup.seed,
        agents: [agents[0].name().to_string(), agents[1].name().to_string()],
        decks: [setup.decks[0].name.clone(), setup.decks[1].name.clone()],
        result,
        seats,
        actions,
        events: state.event_log().to_vec(),
    })
}

/// Results of a head-to-head series, indexed by agent (not by seat).
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub agents: [String; 2],
    pub stats: [AgentStats; 2],
    pub games: Vec<GameRecord>,
}

/// Plays `n` games with seeds `base_seed..base_seed + n`. Agent 0 moves
/// first in even-numbered games, agent 1 in odd ones; each agent keeps its
/// own deck throughout.
#[allow(clippy::too_many_arguments)]
pub fn play_games(
    n: u32,
    agents: [&mut AgentRunner; 2],
    decks: [&DeckSpec; 2],
    cards: &Arc<CardSet>,
    config: &MatchConfig,
    base_seed: u64,
    fault_policy: FaultPolicy,
) -> Result<Series, EngineError> {
    config.validate()?;
    let [a, b] = agents;
    let names = [a.name().to_string(), b.name().to_string()];
    let mut stats: [AgentStats; 2] = Default::default();
    let mut games = Vec::with_capacity(n as usize);
    for k in 0..n {
        let swap = k % 2 == 1;
        let setup = GameSetup {
            decks: if swap { [decks[1], decks[0]] } else { decks },
            cards: Arc::clone(cards),
            config: config.clone(),
            seed: base_seed.wrapping_add(k as u64),
            fault_policy,
        };
        let rec = if swap {
            play_game([&mut *b, &mut *a], &setup)?
        } else {
            play_game([&mut *a, &mut *b], &setup)?
        };
        for agent in 0..2 {
            let seat = if (agent == 1) != swap {
                Seat::Second
            } else {
                Seat::First
            };
            stats[agent].record(seat, &rec.result, &rec.seats[seat.index()]);
        }
        games.push(rec);
    }
    Ok(Series {
        agents: names,
        stats,
        games,
    })
}
