use std::fmt;

use serde::{Deserialize, Serialize};

use super::format::json_error;
use super::{Archetype, CardClass, CardError, CardId, CardSet, HeroClass};

pub const DECK_SIZE: usize = 30;

/// Maximum copies of one card id in a deck.
pub const COPY_LIMIT: usize = 2;

/// A deck as stored in a deck file:
/// `{"name": str, "class": str, "archetype": str?, "cards": [30 ids]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeckSpec {
    pub name: String,
    #[serde(rename = "class")]
    pub hero_class: HeroClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archetype: Option<Archetype>,
    #[serde(rename = "cards")]
    pub card_ids: Vec<CardId>,
}

impl DeckSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("deck serializes")
    }
}

pub fn load_deck(document: &[u8]) -> Result<DeckSpec, CardError> {
    serde_json::from_slice(document).map_err(json_error)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DeckViolation {
    DeckSizeInvalid(usize),
    UnknownCard(CardId),
    ClassMismatch { card: CardId, card_class: CardClass },
    CopyLimitExceeded { card: CardId, copies: usize },
    Uncollectible(CardId),
}

impl fmt::Display for DeckViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeckViolation::DeckSizeInvalid(n) => {
                write!(f, "deck has {n} cards, expected {DECK_SIZE}")
            }
            DeckViolation::UnknownCard(id) => write!(f, "unknown card `{id}`"),
            DeckViolation::ClassMismatch { card, card_class } => {
                write!(f, "card `{card}` belongs to {card_class}")
            }
            DeckViolation::CopyLimitExceeded { card, copies } => {
                write!(f, "{copies} copies of `{card}` (limit {COPY_LIMIT})")
            }
            DeckViolation::Uncollectible(id) => write!(f, "card `{id}` is not collectible"),
        }
    }
}

/// Lists every rule the deck breaks. An empty report means the deck is legal.
///
/// Per-card violations are reported once per distinct id, in order of first
/// appearance.
pub fn validate_deck(deck: &DeckSpec, set: &CardSet) -> Vec<DeckViolation> {
    let mut report = Vec::new();
    if deck.card_ids.len() != DECK_SIZE {
        report.push(DeckViolation::DeckSizeInvalid(deck.card_ids.len()));
    }
    let mut seen: Vec<&CardId> = Vec::new();
    for id in &deck.card_ids {
        if seen.contains(&id) {
            continue;
        }
        seen.push(id);
        match set.get(id.as_str()) {
            None => report.push(DeckViolation::UnknownCard(id.clone())),
            Some(def) => {
                if def.uncollectible {
                    report.push(DeckViolation::Uncollectible(id.clone()));
                }
                if !def.class.allows(deck.hero_class) {
                    report.push(DeckViolation::ClassMismatch {
                        card: id.clone(),
                        card_class: def.class,
                    });
                }
            }
        }
        let copies = deck.card_ids.iter().filter(|c| *c == id).count();
        if copies > COPY_LIMIT {
            report.push(DeckViolation::CopyLimitExceeded {
                card: id.clone(),
                copies,
            });
        }
    }
    report
}
