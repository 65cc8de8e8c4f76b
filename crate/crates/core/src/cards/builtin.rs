use super::{load_card_set, load_deck, CardSet, DeckSpec};

const CARDS: &str = include_str!("../../data/cards.json");

const DECKS: [(&str, &str); 6] = [
    ("mage_tempo", include_str!("../../data/decks/mage_tempo.json")),
    ("mage_control", include_str!("../../data/decks/mage_control.json")),
    ("priest_control", include_str!("../../data/decks/priest_control.json")),
    ("priest_midrange", include_str!("../../data/decks/priest_midrange.json")),
    ("paladin_murloc", include_str!("../../data/decks/paladin_murloc.json")),
    (
        "paladin_midrange",
        include_str!("../../data/decks/paladin_midrange.json"),
    ),
];

/// Names of the six bundled decks, in premade-track order. The first three
/// are the "known" decks of the default premade track.
pub const PREMADE_DECK_NAMES: [&str; 6] = [
    "mage_tempo",
    "priest_control",
    "paladin_murloc",
    "mage_control",
    "priest_midrange",
    "paladin_midrange",
];

/// The bundled desk-scale card set.
pub fn builtin_card_set() -> CardSet {
    load_card_set(CARDS.as_bytes()).expect("bundled card set is valid")
}

pub fn builtin_deck(name: &str) -> Option<DeckSpec> {
    DECKS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| load_deck(doc.as_bytes()).expect("bundled deck is valid"))
}

/// The six bundled decks in [`PREMADE_DECK_NAMES`] order.
pub fn builtin_decks() -> Vec<DeckSpec> {
    PREMADE_DECK_NAMES
        .iter()
        .map(|n| builtin_deck(n).expect("listed deck exists"))
        .collect()
}
