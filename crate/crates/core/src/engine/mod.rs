//! The full-information game state machine.
//!
//! A [`GameState`] is a plain value: [`GameState::apply_action`] returns the
//! successor and leaves the input untouched, while [`GameState::step`]
//! advances a state in place for callers that own it (the match driver,
//! search rollouts). All randomness comes from the state's own seeded
//! generator, so a seed plus an action list reproduces a game exactly.

mod action;
mod event;
mod replay;
mod rules;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{
    validate_deck, CardId, CardSet, DeckSpec, DeckViolation, HeroClass, HeroPower, SecretCondition, Tribe, DECK_SIZE,
    RECRUIT_TOKEN,
};
use crate::rng::GameRng;

pub use action::{Action, Target};
pub use event::{events_to_jsonl, Event, GameEvent};
pub use replay::{Replay, ReplayHeader, ReplayOutcome};
pub(crate) use rules::minion_from_def;

pub const STARTING_HEALTH: i32 = 30;
pub const MAX_MANA: u32 = 10;

pub type InstanceId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("deck `{deck}` is invalid: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDeck {
        deck: String,
        violations: Vec<DeckViolation>,
    },
    #[error("unknown card `{0}`")]
    UnknownCard(String),
    #[error("illegal action {0:?}")]
    IllegalAction(Action),
    #[error("the game is already over")]
    GameAlreadyOver,
    #[error("invalid match config: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Seat {
    First,
    Second,
}

impl Seat {
    pub const BOTH: [Seat; 2] = [Seat::First, Seat::Second];

    pub fn index(self) -> usize {
        match self {
            Seat::First => 0,
            Seat::Second => 1,
        }
    }

    pub fn other(self) -> Seat {
        match self {
            Seat::First => Seat::Second,
            Seat::Second => Seat::First,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    /// Last turn that is played; the game is drawn when it ends.
    pub turn_limit: u32,
    /// Per-turn computation pool for an agent, in milliseconds.
    pub time_budget_ms: u64,
    pub hand_limit: usize,
    pub board_limit: usize,
    pub starting_hand_first: usize,
    pub starting_hand_second: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            turn_limit: 50,
            time_budget_ms: 60_000,
            hand_limit: 10,
            board_limit: 7,
            starting_hand_first: 3,
            starting_hand_second: 4,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::InvalidConfig(m.to_string()));
        if self.turn_limit == 0 {
            return bad("turn_limit must be positive");
        }
        if self.time_budget_ms == 0 {
            return bad("time_budget_ms must be positive");
        }
        if self.hand_limit == 0 || self.board_limit == 0 {
            return bad("hand and board limits must be positive");
        }
        if self.starting_hand_first == 0 || self.starting_hand_second == 0 {
            return bad("starting hands must be positive");
        }
        if self.starting_hand_first.max(self.starting_hand_second) > self.hand_limit
            || self.starting_hand_first.max(self.starting_hand_second) >= DECK_SIZE
        {
            return bad("starting hand exceeds hand limit or deck");
        }
        Ok(())
    }

    pub fn starting_hand(&self, seat: Seat) -> usize {
        match seat {
            Seat::First => self.starting_hand_first,
            Seat::Second => self.starting_hand_second,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win(Seat),
    Draw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndReason {
    HeroDead,
    TurnLimit,
    /// An agent fault ended the game (recorded by the match driver).
    Forfeit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameResult {
    pub outcome: Outcome,
    pub reason: EndReason,
    pub final_turn: u32,
}

impl GameResult {
    /// 1 for a win, 0.5 for a draw, 0 for a loss, from `seat`'s side.
    pub fn score_for(&self, seat: Seat) -> f64 {
        match self.outcome {
            Outcome::Draw => 0.5,
            Outcome::Win(w) if w == seat => 1.0,
            Outcome::Win(_) => 0.0,
        }
    }
}

/// A card outside the board: in a deck, hand or graveyard.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardInstance {
    pub instance_id: InstanceId,
    pub card: CardId,
}

/// Equality ignores the unserialized bookkeeping flags, which are either
/// transient or derived from the card definition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinionInstance {
    pub instance_id: InstanceId,
    pub card: CardId,
    /// Summoned by an effect rather than played from a deck. Tokens vanish
    /// when they die.
    pub token: bool,
    pub tribe: Option<Tribe>,
    pub taunt: bool,
    /// Printed attack plus permanent buffs.
    pub base_attack: i32,
    /// Printed health plus permanent buffs.
    pub base_health: i32,
    pub damage: i32,
    /// Derived from friendly auras; recomputed after every change.
    pub aura_attack: i32,
    pub aura_health: i32,
    pub exhausted: bool,
    pub attacks_this_turn: u32,
    #[serde(skip)]
    pub(crate) destroyed: bool,
    #[serde(skip)]
    pub(crate) has_aura: bool,
    #[serde(skip)]
    pub(crate) has_deathrattle: bool,
}

impl PartialEq for MinionInstance {
    fn eq(&self, o: &Self) -> bool {
        self.instance_id == o.instance_id
            && self.card == o.card
            && self.token == o.token
            && self.tribe == o.tribe
            && self.taunt == o.taunt
            && self.base_attack == o.base_attack
            && self.base_health == o.base_health
            && self.damage == o.damage
            && self.aura_attack == o.aura_attack
            && self.aura_health == o.aura_health
            && self.exhausted == o.exhausted
            && self.attacks_this_turn == o.attacks_this_turn
    }
}

impl Eq for MinionInstance {}

impl MinionInstance {
    pub fn attack(&self) -> i32 {
        (self.base_attack + self.aura_attack).max(0)
    }

    pub fn max_health(&self) -> i32 {
        self.base_health + self.aura_health
    }

    pub fn current_health(&self) -> i32 {
        self.max_health() - self.damage
    }

    pub fn is_dead(&self) -> bool {
        self.destroyed || self.current_health() <= 0
    }

    pub fn can_attack(&self) -> bool {
        !self.exhausted && self.attacks_this_turn < 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeaponState {
    pub instance_id: InstanceId,
    pub card: CardId,
    pub attack: i32,
    pub durability: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretInstance {
    pub instance_id: InstanceId,
    pub card: CardId,
    pub condition: SecretCondition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    pub hero_class: HeroClass,
    pub hero_health: i32,
    pub hero_power_used: bool,
    pub hero_attacks_this_turn: u32,
    pub weapon: Option<WeaponState>,
    pub mana_current: u32,
    pub mana_max: u32,
    /// The last element is the top of the deck (next draw).
    pub deck: Vec<CardInstance>,
    pub hand: Vec<CardInstance>,
    pub board: Vec<MinionInstance>,
    pub graveyard: Vec<CardInstance>,
    pub secrets: Vec<SecretInstance>,
    pub fatigue_counter: u32,
}

impl PlayerState {
    pub fn new(hero_class: HeroClass) -> Self {
        PlayerState {
            hero_class,
            hero_health: STARTING_HEALTH,
            hero_power_used: false,
            hero_attacks_this_turn: 0,
            weapon: None,
            mana_current: 0,
            mana_max: 0,
            deck: Vec::new(),
            hand: Vec::new(),
            board: Vec::new(),
            graveyard: Vec::new(),
            secrets: Vec::new(),
            fatigue_counter: 0,
        }
    }

    pub fn hero_power(&self) -> HeroPower {
        HeroPower::for_class(self.hero_class)
    }

    pub fn minion(&self, id: InstanceId) -> Option<&MinionInstance> {
        self.board.iter().find(|m| m.instance_id == id)
    }

    /// Cards from the original deck list still accounted for in some zone.
    pub fn deck_card_count(&self) -> usize {
        self.deck.len()
            + self.hand.len()
            + self.graveyard.len()
            + self.secrets.len()
            + self.board.iter().filter(|m| !m.token).count()
            + usize::from(self.weapon.is_some())
    }
}

/// Complete game state, including information hidden from the players.
#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    pub(crate) turn_number: u32,
    pub(crate) active: Seat,
    pub(crate) players: [PlayerState; 2],
    pub(crate) rng: GameRng,
    pub(crate) events: Vec<GameEvent>,
    pub(crate) record_events: bool,
    pub(crate) config: MatchConfig,
    pub(crate) result: Option<GameResult>,
    pub(crate) next_instance_id: InstanceId,
    pub(crate) cards: Arc<CardSet>,
}

impl GameState {
    /// Sets up a game: validates decks, shuffles both with the seeded
    /// generator (first seat first), deals starting hands and begins the
    /// first player's turn.
    pub fn new_game(
        deck_a: &DeckSpec,
        deck_b: &DeckSpec,
        cards: Arc<CardSet>,
        config: MatchConfig,
        seed: u64,
    ) -> Result<GameState, EngineError> {
        config.validate()?;
        for deck in [deck_a, deck_b] {
            let violations = validate_deck(deck, &cards);
            if let Some(DeckViolation::UnknownCard(id)) =
                violations.iter().find(|v| matches!(v, DeckViolation::UnknownCard(_)))
            {
                return Err(EngineError::UnknownCard(id.to_string()));
            }
            if !violations.is_empty() {
                return Err(EngineError::InvalidDeck {
                    deck: deck.name.clone(),
                    violations,
                });
            }
            if HeroPower::for_class(deck.hero_class) == HeroPower::Recruit && !cards.contains(RECRUIT_TOKEN) {
                return Err(EngineError::UnknownCard(RECRUIT_TOKEN.to_string()));
            }
        }
        let mut next_id: InstanceId = 1;
        let mut players = [deck_a, deck_b].map(|deck| {
            let mut p = PlayerState::new(deck.hero_class);
            p.deck = deck
                .card_ids
                .iter()
                .map(|c| {
                    let inst = CardInstance {
                        instance_id: next_id,
                        card: c.clone(),
                    };
                    next_id += 1;
                    inst
                })
                .collect();
            p
        });
        let mut rng = GameRng::from_seed(seed);
        for p in &mut players {
            rng.shuffle(&mut p.deck);
        }
        let mut state = GameState {
            turn_number: 0,
            active: Seat::First,
            players,
            rng,
            events: Vec::new(),
            record_events: true,
            config,
            result: None,
            next_instance_id: next_id,
            cards,
        };
        for seat in Seat::BOTH {
            for _ in 0..state.config.starting_hand(seat) {
                state.draw_card(seat);
            }
        }
        state.begin_turn();
        state.check_result();
        Ok(state)
    }

    pub fn turn_number(&self) -> u32 {
        self.turn_number
    }

    pub fn active_seat(&self) -> Seat {
        self.active
    }

    pub fn player(&self, seat: Seat) -> &PlayerState {
        &self.players[seat.index()]
    }

    /// Direct access for building scenarios. Nothing is re-validated.
    pub fn player_mut(&mut self, seat: Seat) -> &mut PlayerState {
        &mut self.players[seat.index()]
    }

    pub fn config(&self) -> &MatchConfig {
        &self.config
    }

    pub fn cards(&self) -> &Arc<CardSet> {
        &self.cards
    }

    pub fn result(&self) -> Option<GameResult> {
        self.result
    }

    pub fn is_over(&self) -> bool {
        self.result.is_some()
    }

    pub fn event_log(&self) -> &[GameEvent] {
        &self.events
    }

    /// Turns event recording on or off. Search code running throwaway
    /// simulations switches it off.
    pub fn set_record_events(&mut self, on: bool) {
        self.record_events = on;
    }

    /// Returns the successor state. `self` is left unchanged.
    pub fn apply_action(&self, action: &Action) -> Result<GameState, EngineError> {
        let mut next = self.clone();
        next.step(action)?;
        Ok(next)
    }

    /// Applies a legal action in place.
    pub fn step(&mut self, action: &Action) -> Result<(), EngineError> {
        if self.result.is_some() {
            return Err(EngineError::GameAlreadyOver);
        }
        if !self.legal_actions()?.contains(action) {
            return Err(EngineError::IllegalAction(action.clone()));
        }
        self.step_unchecked(action);
        Ok(())
    }

    /// Applies `action` without checking legality. The action must come from
    /// [`GameState::legal_actions`] of this exact state.
    pub fn step_unchecked(&mut self, action: &Action) {
        self.dispatch(action);
        self.check_result();
    }

    /// Ends the game with a loss for `seat`, as decided by the match driver.
    pub fn forfeit(&mut self, seat: Seat) {
        if self.result.is_none() {
            let result = GameResult {
                outcome: Outcome::Win(seat.other()),
                reason: EndReason::Forfeit,
                final_turn: self.turn_number,
            };
            self.result = Some(result);
            self.log(Event::GameEnded { result });
        }
    }

    /// Checks every state invariant that must hold between actions.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut ids = std::collections::HashSet::new();
        for seat in Seat::BOTH {
            let p = self.player(seat);
            let name = format!("{seat:?}");
            if p.mana_current > p.mana_max || p.mana_max > MAX_MANA {
                return Err(format!("{name}: mana {}/{}", p.mana_current, p.mana_max));
            }
            if p.hand.len() > self.config.hand_limit {
                return Err(format!("{name}: hand size {}", p.hand.len()));
            }
            if p.board.len() > self.config.board_limit {
                return Err(format!("{name}: board size {}", p.board.len()));
            }
            if p.deck_card_count() != DECK_SIZE {
                return Err(format!("{name}: {} deck cards accounted for", p.deck_card_count()));
            }
            if p.hero_health > STARTING_HEALTH {
                return Err(format!("{name}: hero health {}", p.hero_health));
            }
            if let Some(w) = &p.weapon {
                if w.durability < 1 {
                    return Err(format!("{name}: weapon with durability {}", w.durability));
                }
            }
            for m in &p.board {
                if m.is_dead() {
                    return Err(format!("{name}: dead minion {} on board", m.instance_id));
                }
                if m.current_health() > m.max_health() || m.damage < 0 {
                    return Err(format!("{name}: minion {} health out of range", m.instance_id));
                }
            }
            let all = p
                .deck
                .iter()
                .chain(&p.hand)
                .chain(&p.graveyard)
                .map(|c| c.instance_id)
                .chain(p.board.iter().map(|m| m.instance_id))
                .chain(p.secrets.iter().map(|s| s.instance_id))
                .chain(p.weapon.iter().map(|w| w.instance_id));
            for id in all {
                if !ids.insert(id) {
                    return Err(format!("instance {id} appears twice"));
                }
            }
            let mut secret_cards: Vec<_> = p.secrets.iter().map(|s| &s.card).collect();
            secret_cards.sort();
            secret_cards.dedup();
            if secret_cards.len() != p.secrets.len() {
                return Err(format!("{name}: duplicate secret"));
            }
        }
        if self.result.is_none() && self.turn_number > self.config.turn_limit {
            return Err(format!("turn {} past the limit without a result", self.turn_number));
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.ordinal != i as u64 {
                return Err(format!("event ordinal gap at {i}"));
            }
        }
        Ok(())
    }
}
