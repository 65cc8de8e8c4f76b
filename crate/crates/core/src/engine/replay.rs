use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Action, EngineError, GameEvent, GameResult, GameState, MatchConfig};
use crate::cards::{CardSet, DeckSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayHeader {
    pub deck_a: DeckSpec,
    pub deck_b: DeckSpec,
    pub seed: u64,
    pub config: MatchConfig,
    pub card_set_version: String,
}

/// A recorded game: enough to re-run it, plus the log it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub header: ReplayHeader,
    pub actions: Vec<Action>,
    #[serde(default)]
    pub events: Vec<GameEvent>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReplayOutcome {
    Verified {
        result: Option<GameResult>,
        events: Vec<GameEvent>,
    },
    /// Action `index` was not legal when it came up.
    IllegalAction {
        index: usize,
        action: Action,
    },
    /// The re-executed log diverged from the recorded one at `ordinal`.
    Mismatch {
        ordinal: usize,
        recorded: Option<GameEvent>,
        replayed: Option<GameEvent>,
    },
    CardSetVersion {
        recorded: String,
        loaded: String,
    },
}

impl Replay {
    pub fn from_game(
        deck_a: &DeckSpec,
        deck_b: &DeckSpec,
        seed: u64,
        config: &MatchConfig,
        actions: Vec<Action>,
        final_state: &GameState,
    ) -> Replay {
        Replay {
            header: ReplayHeader {
                deck_a: deck_a.clone(),
                deck_b: deck_b.clone(),
                seed,
                config: config.clone(),
                card_set_version: final_state.cards.version().to_string(),
            },
            actions,
            events: final_state.event_log().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("replay serializes")
    }

    pub fn from_json(text: &str) -> Result<Replay, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Re-executes the action list from the header and compares the log.
    /// Games ended by forfeit keep the forfeit record as the last event;
    /// it is re-applied when the recorded log ends with one.
    pub fn verify(&self, cards: Arc<CardSet>) -> Result<ReplayOutcome, EngineError> {
        if cards.version() != self.header.card_set_version {
            return Ok(ReplayOutcome::CardSetVersion {
                recorded: self.header.card_set_version.clone(),
                loaded: cards.version().to_string(),
            });
        }
        let mut g = GameState::new_game(
            &self.header.deck_a,
            &self.header.deck_b,
            cards,
            self.header.config.clone(),
            self.header.seed,
        )?;
        for (index, action) in self.actions.iter().enumerate() {
            if g.step(action).is_err() {
                return Ok(ReplayOutcome::IllegalAction {
                    index,
                    action: action.clone(),
                });
            }
        }
        if g.result.is_none() {
            if let Some(super::Event::GameEnded { result }) = self.events.last().map(|e| &e.event) {
                if result.reason == super::EndReason::Forfeit {
                    if let super::Outcome::Win(w) = result.outcome {
                        g.forfeit(w.other());
                    }
                }
            }
        }
        let replayed = g.event_log();
        let n = replayed.len().max(self.events.len());
        for ordinal in 0..n {
            let (r, p) = (self.events.get(ordinal), replayed.get(ordinal));
            if r != p {
                return Ok(ReplayOutcome::Mismatch {
                    ordinal,
                    recorded: r.cloned(),
                    replayed: p.cloned(),
                });
            }
        }
        Ok(ReplayOutcome::Verified {
            result: g.result,
            events: replayed.to_vec(),
        })
    }
}
