//! Shared fixtures and independent oracles for the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Duration;

use deskstone_core::agent::{Agent, AgentRunner};
use deskstone_core::cards::{
    builtin_card_set, builtin_decks, CardKind, CardSet, DeckSpec, EffectAction, EffectTarget, HeroClass, Trigger,
};
use deskstone_core::engine::{Action, GameState, MatchConfig, Seat, Target};
use deskstone_core::rng::GameRng;

pub fn cards() -> Arc<CardSet> {
    Arc::new(builtin_card_set())
}

pub fn runner(agent: impl Agent + 'static) -> AgentRunner {
    AgentRunner::spawn(Box::new(agent), Duration::from_secs(10)).expect("agent starts")
}

/// A game between two random bundled decks after a random number of
/// uniformly random actions, with the decks used. Never returns a
/// finished game.
pub fn random_state(cards: &Arc<CardSet>, seed: u64, max_steps: usize) -> (GameState, [DeckSpec; 2]) {
    let decks = builtin_decks();
    let mut rng = GameRng::from_seed(seed);
    loop {
        let a = &decks[rng.below(decks.len())];
        let b = &decks[rng.below(decks.len())];
        let mut g = GameState::new_game(a, b, Arc::clone(cards), MatchConfig::default(), rng.next_u64())
            .expect("bundled decks are legal");
        let steps = rng.below(max_steps + 1);
        for _ in 0..steps {
            let options = g.legal_actions().unwrap();
            let pick = options[rng.below(options.len())].clone();
            let next = g.apply_action(&pick).unwrap();
            if next.is_over() {
                break;
            }
            g = next;
        }
        if !g.is_over() {
            return (g, [a.clone(), b.clone()]);
        }
    }
}

// ---- legality oracle -------------------------------------------------

fn all_characters(g: &GameState) -> Vec<Target> {
    let me = g.active_seat();
    let mut out = Vec::new();
    for seat in [me, me.other()] {
        out.push(Target::Hero(seat));
        out.extend(g.player(seat).board.iter().map(|m| Target::Minion(m.instance_id)));
    }
    out
}

fn all_minions(g: &GameState) -> Vec<Target> {
    all_characters(g)
        .into_iter()
        .filter(|t| matches!(t, Target::Minion(_)))
        .collect()
}

/// What a card's chosen target may be, read straight off its effects:
/// `None` if it takes no target, `Some(true)` if only minions qualify.
fn needs_target(g: &GameState, card: &str) -> Option<bool> {
    let def = g.cards().get(card).unwrap();
    let chosen: Vec<&EffectAction> = def
        .effects
        .iter()
        .filter(|e| e.target == EffectTarget::ChosenTarget)
        .filter(|e| matches!(e.trigger, Trigger::Battlecry | Trigger::OnCast))
        .map(|e| &e.action)
        .collect();
    if chosen.is_empty() {
        return None;
    }
    Some(chosen.iter().any(|a| {
        matches!(
            a,
            EffectAction::BuffAttack(_) | EffectAction::BuffHealth(_) | EffectAction::DestroyMinion
        )
    }))
}

fn defenders(g: &GameState) -> Vec<Target> {
    let enemy = g.active_seat().other();
    let board = &g.player(enemy).board;
    let taunts: Vec<Target> = board
        .iter()
        .filter(|m| m.taunt)
        .map(|m| Target::Minion(m.instance_id))
        .collect();
    if !taunts.is_empty() {
        return taunts;
    }
    let mut out = vec![Target::Hero(enemy)];
    out.extend(board.iter().map(|m| Target::Minion(m.instance_id)));
    out
}

/// Decides legality of `action` from the rules alone.
pub fn oracle_is_legal(g: &GameState, action: &Action) -> bool {
    if g.is_over() {
        return false;
    }
    let seat = g.active_seat();
    let me = g.player(seat);
    let board_full = me.board.len() >= g.config().board_limit;
    match action {
        Action::EndTurn => true,
        Action::PlayCard {
            hand_index,
            position,
            target,
        } => {
            let Some(inst) = me.hand.get(*hand_index) else {
                return false;
            };
            let def = g.cards().get(inst.card.as_str()).unwrap();
            if def.cost > me.mana_current {
                return false;
            }
            let want = needs_target(g, inst.card.as_str());
            let pool = match want {
                None => Vec::new(),
                Some(true) => all_minions(g),
                Some(false) => all_characters(g),
            };
            let target_ok = |optional: bool| match target {
                None => pool.is_empty() && (optional || want.is_none()),
                Some(t) => pool.contains(t),
            };
            match def.kind {
                CardKind::Minion => !board_full && *position == Some(me.board.len()) && target_ok(true),
                CardKind::Weapon => position.is_none() && target_ok(true),
                CardKind::Spell => position.is_none() && target_ok(false),
                CardKind::Secret => {
                    position.is_none() && target.is_none() && me.secrets.iter().all(|s| s.card != inst.card)
                }
            }
        }
        Action::HeroPower { target } => {
            if me.hero_power_used || me.mana_current < 2 {
                return false;
            }
            match me.hero_class {
                HeroClass::Paladin | HeroClass::Warrior | HeroClass::Warlock => target.is_none() && !board_full,
                _ => target.is_some_and(|t| all_characters(g).contains(&t)),
            }
        }
        Action::Attack { attacker, defender } => {
            let Some(m) = me.board.iter().find(|m| m.instance_id == *attacker) else {
                return false;
            };
            !m.exhausted && m.attacks_this_turn == 0 && defenders(g).contains(defender)
        }
        Action::HeroAttack { defender } => {
            me.weapon.is_some() && me.hero_attacks_this_turn == 0 && defenders(g).contains(defender)
        }
    }
}

/// Every action encoding within a small neighbourhood of the state: all
/// hand indices (plus one past the end), all positions, all characters
/// plus a bogus id as targets and attackers.
pub fn candidate_actions(g: &GameState) -> Vec<Action> {
    let me = g.player(g.active_seat());
    let mut targets: Vec<Option<Target>> = vec![None];
    targets.extend(all_characters(g).into_iter().map(Some));
    targets.push(Some(Target::Minion(999_999)));
    let mut positions: Vec<Option<usize>> = vec![None];
    positions.extend((0..=me.board.len() + 1).map(Some));
    let mut out = vec![Action::EndTurn];
    for hand_index in 0..=me.hand.len() {
        for &position in &positions {
            for &target in &targets {
                out.push(Action::PlayCard {
                    hand_index,
                    position,
                    target,
                });
            }
        }
    }
    for &target in &targets {
        out.push(Action::HeroPower { target });
    }
    let mut attackers: Vec<u32> = Seat::BOTH
        .iter()
        .flat_map(|&s| g.player(s).board.iter().map(|m| m.instance_id))
        .collect();
    attackers.push(999_999);
    for &defender in targets.iter().flatten() {
        for &attacker in &attackers {
            out.push(Action::Attack { attacker, defender });
        }
        out.push(Action::HeroAttack { defender });
    }
    out
}

/// Random action encodings, mostly nonsense.
pub fn fuzz_action(rng: &mut GameRng, g: &GameState) -> Action {
    let ids: Vec<u32> = Seat::BOTH
        .iter()
        .flat_map(|&s| g.player(s).board.iter().map(|m| m.instance_id))
        .chain([0, 1, 77, 4_000_000])
        .collect();
    let target = |rng: &mut GameRng| match rng.below(4) {
        0 => None,
        1 => Some(Target::Hero(if rng.below(2) == 0 { Seat::First } else { Seat::Second })),
        _ => Some(Target::Minion(ids[rng.below(ids.len())])),
    };
    match rng.below(5) {
        0 => Action::PlayCard {
            hand_index: rng.below(12),
            position: if rng.below(2) == 0 { None } else { Some(rng.below(9)) },
            target: target(rng),
        },
        1 => Action::HeroPower { target: target(rng) },
        2 => Action::Attack {
            attacker: ids[rng.below(ids.len())],
            defender: target(rng).unwrap_or(Target::Hero(Seat::First)),
        },
        3 => Action::HeroAttack {
            defender: target(rng).unwrap_or(Target::Hero(Seat::Second)),
        },
        _ => Action::EndTurn,
    }
}

// ---- state invariants ------------------------------------------------

/// Checks the between-action invariants from public state only.
pub fn check_state(g: &GameState, decks: [&DeckSpec; 2]) -> Result<(), String> {
    let cfg = g.config();
    let mut seen = HashSet::new();
    for seat in Seat::BOTH {
        let p = g.player(seat);
        let tag = format!("{seat:?}");
        if p.mana_max > 10 || p.mana_current > p.mana_max {
            return Err(format!("{tag}: mana {}/{}", p.mana_current, p.mana_max));
        }
        if p.hand.len() > cfg.hand_limit {
            return Err(format!("{tag}: {} cards in hand", p.hand.len()));
        }
        if p.board.len() > cfg.board_limit {
            return Err(format!("{tag}: {} minions on board", p.board.len()));
        }
        if let Some(w) = &p.weapon {
            if w.durability <= 0 {
                return Err(format!("{tag}: broken weapon still equipped"));
            }
        }
        if p.hero_health > 30 || (p.hero_health <= 0 && !g.is_over()) {
            return Err(format!("{tag}: hero health {}", p.hero_health));
        }
        for m in &p.board {
            if m.base_health + m.aura_health - m.damage <= 0 {
                return Err(format!("{tag}: dead minion {} left on board", m.instance_id));
            }
        }
        // Zone conservation: the 30 deck-list cards are somewhere, tokens
        // never leave the board.
        let mut ids: Vec<&str> = p
            .deck
            .iter()
            .chain(&p.hand)
            .chain(&p.graveyard)
            .map(|c| c.card.as_str())
            .chain(p.board.iter().filter(|m| !m.token).map(|m| m.card.as_str()))
            .chain(p.secrets.iter().map(|s| s.card.as_str()))
            .chain(p.weapon.iter().map(|w| w.card.as_str()))
            .collect();
        ids.sort_unstable();
        let mut expected: Vec<&str> = decks[seat.index()].card_ids.iter().map(|c| c.as_str()).collect();
        expected.sort_unstable();
        if ids != expected {
            return Err(format!("{tag}: zones hold {} cards, not the deck list", ids.len()));
        }
        for c in p.deck.iter().chain(&p.hand).chain(&p.graveyard) {
            if g.cards().get(c.card.as_str()).is_some_and(|d| d.uncollectible) {
                return Err(format!("{tag}: token {} outside the board", c.card.as_str()));
            }
        }
        let instance_ids = p
            .deck
            .iter()
            .chain(&p.hand)
            .chain(&p.graveyard)
            .map(|c| c.instance_id)
            .chain(p.board.iter().map(|m| m.instance_id))
            .chain(p.secrets.iter().map(|s| s.instance_id))
            .chain(p.weapon.iter().map(|w| w.instance_id));
        for id in instance_ids {
            if !seen.insert(id) {
                return Err(format!("instance {id} in two places"));
            }
        }
    }
    if g.turn_number() > cfg.turn_limit {
        return Err(format!("turn {} past the limit", g.turn_number()));
    }
    Ok(())
}

// ---- fatigue ---------------------------------------------------------

#[derive(Debug, PartialEq, Eq)]
pub struct FatiguePrediction {
    /// Turn of each seat's first fatigue hit, if any.
    pub first_fatigue_turn: [Option<u32>; 2],
    /// Total fatigue damage per seat when the game ends.
    pub total_damage: [u32; 2],
    /// `None` for a draw, otherwise the winning seat.
    pub winner: Option<Seat>,
    pub final_turn: u32,
}

/// Closed form for two players who only end their turn. Seat `s` draws on
/// turns `s + 1, s + 3, ...`; after `30 - hand` draws the k-th draw from an
/// empty deck deals k, so k hits cost k(k+1)/2.
pub fn fatigue_oracle(cfg: &MatchConfig) -> FatiguePrediction {
    let deck = |s: usize| 30 - cfg.starting_hand(Seat::BOTH[s]) as u32;
    // Turn on which seat s takes its n-th draw (1-based).
    let draw_turn = |s: usize, n: u32| s as u32 + 1 + 2 * (n - 1);
    // Smallest k with k(k+1)/2 >= 30.
    let lethal_k = (1..).find(|k| k * (k + 1) / 2 >= 30).unwrap();
    let death = |s: usize| draw_turn(s, deck(s) + lethal_k);
    let (d0, d1) = (death(0), death(1));
    let (final_turn, winner) = if d0.min(d1) <= cfg.turn_limit {
        if d0 < d1 {
            (d0, Some(Seat::Second))
        } else {
            (d1, Some(Seat::First))
        }
    } else {
        (cfg.turn_limit, None)
    };
    let mut first = [None; 2];
    let mut total = [0; 2];
    for s in 0..2 {
        let t = draw_turn(s, deck(s) + 1);
        if t <= final_turn {
            first[s] = Some(t);
        }
        // Own turns played up to the end: draws made.
        let draws = if final_turn < s as u32 + 1 {
            0
        } else {
            (final_turn - s as u32 - 1) / 2 + 1
        };
        let k = draws.saturating_sub(deck(s));
        total[s] = k * (k + 1) / 2;
    }
    FatiguePrediction {
        first_fatigue_turn: first,
        total_damage: total,
        winner,
        final_turn,
    }
}

// ---- statistics ------------------------------------------------------

/// Lower end of the Wilson score interval for `wins` out of `n`.
pub fn wilson_lower(wins: u32, n: u32, z: f64) -> f64 {
    let n = f64::from(n);
    let p = f64::from(wins) / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (centre - spread) / (1.0 + z2 / n)
}
