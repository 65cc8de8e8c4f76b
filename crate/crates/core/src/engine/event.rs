use serde::{Deserialize, Serialize};

use super::{GameResult, InstanceId, Seat, Target};
use crate::cards::CardId;

/// One entry of the game history. Serializes as
/// `{"ordinal": n, "kind": "...", "payload": {...}}` in that field order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEvent {
    pub ordinal: u64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum Event {
    TurnStarted {
        seat: Seat,
        turn: u32,
    },
    /// `burned` is set when the hand was full and the card went to the
    /// graveyard instead.
    CardDrawn {
        seat: Seat,
        instance_id: InstanceId,
        card: CardId,
        burned: bool,
    },
    FatigueDamage {
        seat: Seat,
        amount: u32,
    },
    CardPlayed {
        seat: Seat,
        instance_id: InstanceId,
        card: CardId,
        target: Option<Target>,
    },
    MinionSummoned {
        seat: Seat,
        instance_id: InstanceId,
        card: CardId,
        position: usize,
    },
    AttackResolved {
        attacker: Target,
        defender: Target,
    },
    DamageDealt {
        target: Target,
        amount: u32,
    },
    Healed {
        target: Target,
        amount: u32,
    },
    MinionDied {
        seat: Seat,
        instance_id: InstanceId,
        card: CardId,
    },
    SecretRevealed {
        seat: Seat,
        instance_id: InstanceId,
        card: CardId,
    },
    WeaponBroken {
        seat: Seat,
        instance_id: InstanceId,
        card: CardId,
    },
    TurnEnded {
        seat: Seat,
        turn: u32,
    },
    GameEnded {
        result: GameResult,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::TurnStarted { .. } => "TurnStarted",
            Event::CardDrawn { .. } => "CardDrawn",
            Event::FatigueDamage { .. } => "FatigueDamage",
            Event::CardPlayed { .. } => "CardPlayed",
            Event::MinionSummoned { .. } => "MinionSummoned",
            Event::AttackResolved { .. } => "AttackResolved",
            Event::DamageDealt { .. } => "DamageDealt",
            Event::Healed { .. } => "Healed",
            Event::MinionDied { .. } => "MinionDied",
            Event::SecretRevealed { .. } => "SecretRevealed",
            Event::WeaponBroken { .. } => "WeaponBroken",
            Event::TurnEnded { .. } => "TurnEnded",
            Event::GameEnded { .. } => "GameEnded",
        }
    }
}

/// JSON-lines rendering of an event log, one event per line.
pub fn events_to_jsonl(events: &[GameEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}
