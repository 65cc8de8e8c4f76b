mod common;

use std::sync::Arc;
use std::time::Duration;

use common::*;
use deskstone_core::agent::{play_game, Agent, AgentError, FaultPolicy, GameSetup};
use deskstone_core::baseline::{GreedyAgent, PassAgent, RandomAgent};
use deskstone_core::cards::builtin_deck;
use deskstone_core::engine::{Action, EndReason, MatchConfig, Outcome, Seat};
use deskstone_core::observation::Observation;
use deskstone_core::tournament::{run_track, Entrant, TournamentError, TrackConfig, TrackKind};

/// Plays a card slot that does not exist.
struct Cheater;

impl Agent for Cheater {
    fn name(&self) -> String {
        "cheater".into()
    }

    fn get_move(&mut self, _: &Observation, _: Duration) -> Result<Action, AgentError> {
        Ok(Action::PlayCard {
            hand_index: 99,
            position: None,
            target: None,
        })
    }
}

struct Crashy;

impl Agent for Crashy {
    fn name(&self) -> String {
        "crashy".into()
    }

    fn get_move(&mut self, _: &Observation, _: Duration) -> Result<Action, AgentError> {
        panic!("boom")
    }
}

fn setup(
    policy: FaultPolicy,
    turn_limit: u32,
) -> (
    Arc<deskstone_core::cards::CardSet>,
    deskstone_core::cards::DeckSpec,
    MatchConfig,
    FaultPolicy,
) {
    let config = MatchConfig {
        turn_limit,
        ..MatchConfig::default()
    };
    (cards(), builtin_deck("mage_tempo").unwrap(), config, policy)
}

#[test]
fn illegal_action_forfeits_by_default() {
    let (cards, deck, config, policy) = setup(FaultPolicy::Forfeit, 50);
    let mut a = runner(Cheater);
    let mut b = runner(PassAgent);
    let s = GameSetup {
        decks: [&deck, &deck],
        cards,
        config,
        seed: 1,
        fault_policy: policy,
    };
    let rec = play_game([&mut a, &mut b], &s).unwrap();
    assert_eq!(rec.result.outcome, Outcome::Win(Seat::Second));
    assert_eq!(rec.result.reason, EndReason::Forfeit);
    assert_eq!(rec.seats[0].faults, 1);
    assert!(rec.seats[0].fault.as_deref().unwrap().contains("illegal"));
}

#[test]
fn force_end_turn_keeps_playing() {
    let (cards, deck, config, policy) = setup(FaultPolicy::ForceEndTurn, 6);
    let mut a = runner(Crashy);
    let mut b = runner(PassAgent);
    let s = GameSetup {
        decks: [&deck, &deck],
        cards,
        config,
        seed: 1,
        fault_policy: policy,
    };
    let rec = play_game([&mut a, &mut b], &s).unwrap();
    assert_eq!(rec.result.reason, EndReason::TurnLimit);
    assert_eq!(rec.seats[0].faults, 3);
    assert!(rec.actions.iter().all(|a| *a == Action::EndTurn));
}

#[test]
fn user_track_disqualifies_bad_decks() {
    let cards = cards();
    let good = builtin_deck("paladin_murloc").unwrap();
    let mut short = builtin_deck("mage_tempo").unwrap();
    short.card_ids.truncate(20);
    let entrants = [
        Entrant::new("a", || Box::new(GreedyAgent::default())).with_deck(good.clone()),
        Entrant::new("b", || Box::new(RandomAgent::default())).with_deck(good),
        Entrant::new("c", || Box::new(RandomAgent::default())).with_deck(short),
        Entrant::new("d", || Box::new(RandomAgent::default())),
    ];
    let mut track = TrackConfig::user_decks();
    track.repeats = 4;
    let report = run_track(&entrants, &track, &cards).unwrap();
    assert_eq!(report.kind, TrackKind::UserCreatedDeck);
    let out: Vec<&str> = report.disqualified.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(out, ["c", "d"]);
    assert_eq!(report.games.len(), 4);
    assert_eq!(report.ranking.agents(), ["a", "b"]);
    let json: serde_json::Value = serde_json::from_str(&report.to_json(false)).unwrap();
    assert_eq!(json["ranking"][0]["agent"], "a");
    assert_eq!(json["disqualified"].as_array().unwrap().len(), 2);
    assert!(json["ranking"][0].get("avg_response_ms").is_none());
    let timed: serde_json::Value = serde_json::from_str(&report.to_json(true)).unwrap();
    assert!(timed["ranking"][0]["avg_response_ms"].is_number());
}

#[test]
fn csv_timing_columns_come_last() {
    let cards = cards();
    let deck = builtin_deck("priest_midrange").unwrap();
    let entrants = [
        Entrant::new("p", || Box::new(PassAgent)).with_deck(deck.clone()),
        Entrant::new("q", || Box::new(PassAgent)).with_deck(deck),
    ];
    let mut track = TrackConfig::user_decks();
    track.match_config.turn_limit = 4;
    let report = run_track(&entrants, &track, &cards).unwrap();
    let plain = report.to_csv(false);
    let timed = report.to_csv(true);
    for (p, t) in plain.lines().zip(timed.lines()) {
        assert!(t.starts_with(p));
        assert_eq!(t.split(',').count(), p.split(',').count() + 4);
    }
    assert!(plain.lines().nth(1).unwrap().contains(",draw,,turn_limit,4,"));
}

#[test]
fn track_config_errors() {
    let cards = cards();
    let entrants = [
        Entrant::new("x", || Box::new(PassAgent)),
        Entrant::new("x", || Box::new(PassAgent)),
    ];
    let track = TrackConfig::premade(deskstone_core::tournament::builtin_premade());
    assert!(matches!(
        run_track(&entrants, &track, &cards),
        Err(TournamentError::InvalidTrackConfig(_))
    ));
    let mut bad = track.clone();
    bad.premade.pop();
    assert!(matches!(
        run_track(&entrants[..1], &bad, &cards),
        Err(TournamentError::InvalidTrackConfig(_))
    ));
    assert!(matches!(
        run_track(&entrants[..1], &track, &cards),
        Err(TournamentError::TooFewAgents(1))
    ));
}
