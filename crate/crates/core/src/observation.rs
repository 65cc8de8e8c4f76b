//! Per-seat partial views of a game and sampling of full states from them.
//!
//! An [`Observation`] carries everything the viewer may know: its own zones
//! (with the deck as a sorted multiset, so draw order stays hidden), the
//! opponent's public board and counters, and the legal options when the
//! viewer is to move. Opponent hand, deck and secret identities never enter
//! the structure.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{CardId, CardKind, CardSet, HeroClass, DECK_SIZE};
use crate::engine::{
    Action, CardInstance, GameResult, GameState, InstanceId, MatchConfig, MinionInstance, PlayerState, Seat,
    SecretInstance, WeaponState,
};
use crate::rng::GameRng;

/// Card id used for every hidden card in a determinized state.
pub const DUMMY_CARD: &str = "dummy";

/// Placeholder for a card the viewer cannot see. All dummies are equal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DummyCard;

impl Serialize for DummyCard {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(DUMMY_CARD)
    }
}

impl<'de> Deserialize<'de> for DummyCard {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == DUMMY_CARD {
            Ok(DummyCard)
        } else {
            Err(serde::de::Error::custom(format!(
                "expected \"{DUMMY_CARD}\", got {s:?}"
            )))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObservationError {
    #[error("inconsistent observation: {0}")]
    InconsistentObservation(String),
}

/// The viewer's own player state. Identical to [`PlayerState`] except that
/// the deck is not part of it; see [`Observation::own_deck_remaining`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnView {
    pub hero_class: HeroClass,
    pub hero_health: i32,
    pub hero_power_used: bool,
    pub hero_attacks_this_turn: u32,
    pub weapon: Option<WeaponState>,
    pub mana_current: u32,
    pub mana_max: u32,
    pub hand: Vec<CardInstance>,
    pub board: Vec<MinionInstance>,
    pub graveyard: Vec<CardInstance>,
    pub secrets: Vec<SecretInstance>,
    pub fatigue_counter: u32,
}

/// What the viewer sees of the opponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpponentView {
    pub hero_class: HeroClass,
    pub hero_health: i32,
    pub hero_power_used: bool,
    pub hero_attacks_this_turn: u32,
    pub mana_current: u32,
    pub mana_max: u32,
    pub board: Vec<MinionInstance>,
    pub weapon: Option<WeaponState>,
    pub secret_count: usize,
    pub hand_count: usize,
    pub deck_count: usize,
    pub fatigue_counter: u32,
}

impl OpponentView {
    pub fn hidden_hand(&self) -> Vec<DummyCard> {
        vec![DummyCard; self.hand_count]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub viewer: Seat,
    pub active: Seat,
    pub turn_number: u32,
    pub config: MatchConfig,
    pub result: Option<GameResult>,
    pub own: OwnView,
    pub opponent: OpponentView,
    /// The viewer's remaining deck, sorted by card id.
    pub own_deck_remaining: Vec<CardId>,
    /// Legal actions when the viewer is to move, otherwise empty.
    pub options: Vec<Action>,
}

impl Observation {
    /// Canonical JSON rendering (fixed field order).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("observations serialize")
    }

    pub fn is_my_turn(&self) -> bool {
        self.viewer == self.active && self.result.is_none()
    }
}

/// Builds `seat`'s masked view of `state`.
pub fn observe(state: &GameState, seat: Seat) -> Observation {
    let me = state.player(seat);
    let them = state.player(seat.other());
    let mut own_deck_remaining: Vec<CardId> = me.deck.iter().map(|c| c.card.clone()).collect();
    own_deck_remaining.sort();
    let options = if state.active_seat() == seat && !state.is_over() {
        state.legal_actions().unwrap_or_default()
    } else {
        Vec::new()
    };
    Observation {
        viewer: seat,
        active: state.active_seat(),
        turn_number: state.turn_number(),
        config: state.config().clone(),
        result: state.result(),
        own: OwnView {
            hero_class: me.hero_class,
            hero_health: me.hero_health,
            hero_power_used: me.hero_power_used,
            hero_attacks_this_turn: me.hero_attacks_this_turn,
            weapon: me.weapon.clone(),
            mana_current: me.mana_current,
            mana_max: me.mana_max,
            hand: me.hand.clone(),
            board: me.board.clone(),
            graveyard: me.graveyard.clone(),
            secrets: me.secrets.clone(),
            fatigue_counter: me.fatigue_counter,
        },
        opponent: OpponentView {
            hero_class: them.hero_class,
            hero_health: them.hero_health,
            hero_power_used: them.hero_power_used,
            hero_attacks_this_turn: them.hero_attacks_this_turn,
            mana_current: them.mana_current,
            mana_max: them.mana_max,
            board: them.board.clone(),
            weapon: them.weapon.clone(),
            secret_count: them.secrets.len(),
            hand_count: them.hand.len(),
            deck_count: them.deck.len(),
            fatigue_counter: them.fatigue_counter,
        },
        own_deck_remaining,
        options,
    }
}

/// Samples a full game state consistent with `obs`.
///
/// Own zones are rebuilt exactly and the own deck is shuffled from the
/// multiset. The opponent's hand and deck are drawn uniformly (with
/// replacement, ignoring copy limits) from the collectible cards its class
/// may use, and its secrets from distinct secret cards of that pool. The
/// opponent graveyard is padded with [`DUMMY_CARD`] instances so that every
/// deck still accounts for 30 cards. The result records no events.
pub fn determinize(obs: &Observation, cards: &Arc<CardSet>, seed: u64) -> Result<GameState, ObservationError> {
    let bad = |m: String| Err(ObservationError::InconsistentObservation(m));
    let mut rng = GameRng::from_seed(seed);

    let mut next_id = max_visible_id(obs) + 1;
    let mut fresh = |card: CardId| {
        let inst = CardInstance {
            instance_id: next_id,
            card,
        };
        next_id += 1;
        inst
    };

    let own = &obs.own;
    let mut own_deck: Vec<CardInstance> = obs.own_deck_remaining.iter().cloned().map(&mut fresh).collect();
    rng.shuffle(&mut own_deck);
    let mut me = PlayerState::new(own.hero_class);
    me.hero_health = own.hero_health;
    me.hero_power_used = own.hero_power_used;
    me.hero_attacks_this_turn = own.hero_attacks_this_turn;
    me.weapon = own.weapon.clone();
    me.mana_current = own.mana_current;
    me.mana_max = own.mana_max;
    me.deck = own_deck;
    me.hand = own.hand.clone();
    me.board = restore_minions(&own.board, cards)?;
    me.graveyard = own.graveyard.clone();
    me.secrets = own.secrets.clone();
    me.fatigue_counter = own.fatigue_counter;
    if me.deck_card_count() != DECK_SIZE {
        return bad(format!("own zones hold {} deck cards", me.deck_card_count()));
    }

    let opp = &obs.opponent;
    let pool: Vec<&CardId> = cards
        .pool_for(opp.hero_class)
        .filter(|c| !c.uncollectible)
        .map(|c| &c.id)
        .collect();
    if pool.is_empty() && opp.hand_count + opp.deck_count > 0 {
        return bad(format!("no cards available to {}", opp.hero_class));
    }
    let mut secret_pool: Vec<&CardId> = cards
        .pool_for(opp.hero_class)
        .filter(|c| !c.uncollectible && c.kind == CardKind::Secret)
        .map(|c| &c.id)
        .collect();
    if secret_pool.len() < opp.secret_count {
        return bad(format!(
            "{} secrets but only {} candidates",
            opp.secret_count,
            secret_pool.len()
        ));
    }
    let mut them = PlayerState::new(opp.hero_class);
    them.hero_health = opp.hero_health;
    them.hero_power_used = opp.hero_power_used;
    them.hero_attacks_this_turn = opp.hero_attacks_this_turn;
    them.weapon = opp.weapon.clone();
    them.mana_current = opp.mana_current;
    them.mana_max = opp.mana_max;
    them.board = restore_minions(&opp.board, cards)?;
    them.fatigue_counter = opp.fatigue_counter;
    for _ in 0..opp.hand_count {
        let c = pool[rng.below(pool.len())].clone();
        them.hand.push(fresh(c));
    }
    for _ in 0..opp.deck_count {
        let c = pool[rng.below(pool.len())].clone();
        them.deck.push(fresh(c));
    }
    for _ in 0..opp.secret_count {
        let c = secret_pool.remove(rng.below(secret_pool.len())).clone();
        let condition = cards
            .get(c.as_str())
            .and_then(|d| d.secret_condition())
            .expect("secret card has a condition");
        let inst = fresh(c);
        them.secrets.push(SecretInstance {
            instance_id: inst.instance_id,
            card: inst.card,
            condition,
        });
    }
    let accounted = them.deck_card_count();
    if accounted > DECK_SIZE {
        return bad(format!("opponent zones hold {accounted} deck cards"));
    }
    for _ in accounted..DECK_SIZE {
        them.graveyard.push(fresh(CardId::new(DUMMY_CARD)));
    }

    let mut players = [me, them];
    if obs.viewer == Seat::Second {
        players.swap(0, 1);
    }
    Ok(GameState {
        turn_number: obs.turn_number,
        active: obs.active,
        players,
        rng: GameRng::from_seed(crate::rng::mix_seed(&[seed, 0x5EED])),
        events: Vec::new(),
        record_events: false,
        config: obs.config.clone(),
        result: obs.result,
        next_instance_id: next_id,
        cards: Arc::clone(cards),
    })
}

fn max_visible_id(obs: &Observation) -> InstanceId {
    let own = &obs.own;
    let opp = &obs.opponent;
    own.hand
        .iter()
        .chain(&own.graveyard)
        .map(|c| c.instance_id)
        .chain(own.board.iter().chain(&opp.board).map(|m| m.instance_id))
        .chain(own.secrets.iter().map(|s| s.instance_id))
        .chain(own.weapon.iter().chain(&opp.weapon).map(|w| w.instance_id))
        .max()
        .unwrap_or(0)
}

/// Re-derives the cached trigger flags a minion loses in serialization.
fn restore_minions(board: &[MinionInstance], cards: &CardSet) -> Result<Vec<MinionInstance>, ObservationError> {
    board
        .iter()
        .map(|m| {
            let def = cards
                .get(m.card.as_str())
                .ok_or_else(|| ObservationError::InconsistentObservation(format!("unknown card `{}`", m.card)))?;
            let fresh = crate::engine::minion_from_def(m.instance_id, def, m.token);
            Ok(MinionInstance {
                has_aura: fresh.has_aura,
                has_deathrattle: fresh.has_deathrattle,
                destroyed: false,
                ..m.clone()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::{builtin_card_set, builtin_deck};

    fn midgame(seed: u64, steps: usize) -> GameState {
        let set = Arc::new(builtin_card_set());
        let a = builtin_deck("mage_tempo").unwrap();
        let b = builtin_deck("paladin_murloc").unwrap();
        let mut g = GameState::new_game(&a, &b, set, MatchConfig::default(), seed).unwrap();
        let mut rng = GameRng::from_seed(seed + 1000);
        for _ in 0..steps {
            if g.is_over() {
                break;
            }
            let legal = g.legal_actions().unwrap();
            g.step(&legal[rng.below(legal.len())]).unwrap();
        }
        g
    }

    #[test]
    fn opponent_hand_is_a_count() {
        let g = midgame(3, 0);
        let obs = observe(&g, Seat::First);
        assert_eq!(obs.opponent.hand_count, 4);
        assert_eq!(obs.opponent.hidden_hand(), vec![DummyCard; 4]);
        assert_eq!(obs.own.hand.len(), 4);
        assert_eq!(obs.options, g.legal_actions().unwrap());
        let json = obs.to_json();
        for c in &g.player(Seat::Second).hand {
            let needle = format!("\"instance_id\":{},", c.instance_id);
            assert!(!json.contains(&needle));
        }
        assert!(observe(&g, Seat::Second).options.is_empty());
    }

    #[test]
    fn own_deck_is_sorted_multiset() {
        let g = midgame(4, 10);
        let obs = observe(&g, Seat::Second);
        let mut expect: Vec<_> = g.player(Seat::Second).deck.iter().map(|c| c.card.clone()).collect();
        expect.sort();
        assert_eq!(obs.own_deck_remaining, expect);
    }

    #[test]
    fn dummy_serializes_as_token() {
        assert_eq!(serde_json::to_string(&DummyCard).unwrap(), "\"dummy\"");
        assert_eq!(serde_json::from_str::<DummyCard>("\"dummy\"").unwrap(), DummyCard);
        assert!(serde_json::from_str::<DummyCard>("\"fire_dart\"").is_err());
    }

    #[test]
    fn masking_round_trip() {
        for seed in 0..20 {
            let g = midgame(seed, (seed as usize * 7) % 60);
            for seat in Seat::BOTH {
                let obs = observe(&g, seat);
                let d = determinize(&obs, g.cards(), seed).unwrap();
                d.check_invariants().unwrap();
                assert_eq!(observe(&d, seat).to_json(), obs.to_json());
                let back: Observation = serde_json::from_str(&obs.to_json()).unwrap();
                let d2 = determinize(&back, g.cards(), seed).unwrap();
                assert_eq!(observe(&d2, seat).to_json(), obs.to_json());
            }
        }
    }

    #[test]
    fn determinizations_vary_only_hidden_content() {
        let g = midgame(11, 25);
        let obs = observe(&g, Seat::First);
        let mut hands = std::collections::HashSet::new();
        for seed in 0..100 {
            let d = determinize(&obs, g.cards(), seed).unwrap();
            assert_eq!(observe(&d, Seat::First), obs);
            hands.insert(format!("{:?}", d.player(Seat::Second).hand));
        }
        assert!(hands.len() > 50, "only {} distinct hands", hands.len());
    }

    #[test]
    fn inconsistent_counts_rejected() {
        let g = midgame(2, 5);
        let mut obs = observe(&g, Seat::First);
        obs.opponent.deck_count = 40;
        assert!(determinize(&obs, g.cards(), 1).is_err());
        let mut obs = observe(&g, Seat::First);
        obs.own_deck_remaining.pop();
        assert!(determinize(&obs, g.cards(), 1).is_err());
        let mut obs = observe(&g, Seat::First);
        obs.opponent.secret_count = 9;
        assert!(determinize(&obs, g.cards(), 1).is_err());
    }
}
