//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use deskstone_core::agent::{play_game, play_game_observed, play_games, Agent, AgentError, FaultPolicy, GameSetup};
use deskstone_core::baseline::{FlatMcAgent, FlatMcConfig, GreedyAgent, PassAgent, RandomAgent};
use deskstone_core::cards::{builtin_deck, builtin_decks, validate_deck, CardId, CardKind, DeckViolation};
use deskstone_core::engine::{
    events_to_jsonl, Action, EndReason, EngineError, Event, GameState, MatchConfig, Outcome, Replay, ReplayOutcome,
    Seat, MAX_MANA, STARTING_HEALTH,
};
use deskstone_core::observation::observe;
use deskstone_core::rng::GameRng;
use deskstone_core::tournament::{builtin_premade, run_track, split_sub_tournaments, Entrant, TrackConfig};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// AC1 ------------------------------------------------------------------

struct Sleepy(Duration);

impl Agent for Sleepy {
    fn name(&self) -> String {
        "sleepy".into()
    }

    fn get_move(&mut self, _: &deskstone_core::observation::Observation, _: Duration) -> Result<Action, AgentError> {
        std::thread::sleep(self.0);
        Ok(Action::EndTurn)
    }
}

fn ac1_constants() -> Check {
    let cards = cards();
    let deck = builtin_deck("mage_tempo").unwrap();
    let cfg = MatchConfig::default();
    ensure(cfg.turn_limit == 50, || {
        format!("default turn limit {}", cfg.turn_limit)
    })?;
    ensure(cfg.time_budget_ms == 60_000, || {
        format!("default budget {}", cfg.time_budget_ms)
    })?;
    ensure(STARTING_HEALTH == 30 && MAX_MANA == 10, || "constants changed".into())?;

    let g = GameState::new_game(&deck, &deck, Arc::clone(&cards), cfg.clone(), 1).map_err(|e| e.to_string())?;
    for s in Seat::BOTH {
        ensure(g.player(s).hero_health == 30, || {
            format!("{s:?} starts at {}", g.player(s).hero_health)
        })?;
    }

    // Deck size is enforced both ways.
    for n in [29, 31] {
        let mut bad = deck.clone();
        if n == 29 {
            bad.card_ids.pop();
        } else {
            let extra = cards
                .iter()
                .find(|c| !c.uncollectible && c.kind == CardKind::Minion && !deck.card_ids.contains(&c.id))
                .unwrap();
            bad.card_ids.push(extra.id.clone());
        }
        let v = validate_deck(&bad, &cards);
        ensure(
            v.iter()
                .any(|x| matches!(x, DeckViolation::DeckSizeInvalid(m) if *m == n)),
            || format!("{n}-card deck not flagged: {v:?}"),
        )?;
        let r = GameState::new_game(&bad, &deck, Arc::clone(&cards), cfg.clone(), 1);
        ensure(matches!(r, Err(EngineError::InvalidDeck { .. })), || {
            format!("{n}-card deck accepted")
        })?;
    }

    // Pass-only agents under the default config: a draw at turn 50, mana
    // capped at 10 throughout.
    let mut a = runner(PassAgent);
    let mut b = runner(PassAgent);
    let mut max_mana = 0;
    let setup = GameSetup {
        decks: [&deck, &deck],
        cards: Arc::clone(&cards),
        config: cfg.clone(),
        seed: 5,
        fault_policy: FaultPolicy::Forfeit,
    };
    let rec = play_game_observed([&mut a, &mut b], &setup, &mut |s| {
        for p in Seat::BOTH {
            max_mana = max_mana.max(s.player(p).mana_max).max(s.player(p).mana_current);
        }
    })
    .map_err(|e| e.to_string())?;
    ensure(
        rec.result.outcome == Outcome::Draw && rec.result.reason == EndReason::TurnLimit && rec.turns() == 50,
        || format!("pass-only result {:?}", rec.result),
    )?;
    ensure(max_mana == 10, || format!("peak mana {max_mana}"))?;

    // The budget is configurable and enforced.
    let short = MatchConfig {
        turn_limit: 4,
        time_budget_ms: 100,
        ..MatchConfig::default()
    };
    let mut slow = runner(Sleepy(Duration::from_millis(150)));
    let mut pass = runner(PassAgent);
    let setup = GameSetup { config: short, ..setup };
    let rec = play_game([&mut slow, &mut pass], &setup).map_err(|e| e.to_string())?;
    ensure(rec.seats[0].timeouts == 2 && rec.seats[1].timeouts == 0, || {
        format!("timeouts {:?}", rec.seats.clone().map(|s| s.timeouts))
    })?;
    Ok("health 30, mana cap 10, 30-card decks, 50-turn draw, 60000 ms default budget".into())
}

// AC2 ------------------------------------------------------------------

fn ac2_fuzz() -> Check {
    let cards = cards();
    let decks = builtin_decks();
    let cfg = MatchConfig {
        time_budget_ms: 100,
        ..MatchConfig::default()
    };
    let mut a = runner(RandomAgent::default());
    let mut b = runner(RandomAgent::default());
    let mut states = 0u64;
    let mut violations = Vec::new();
    for i in 0..1000u64 {
        let pair = [&decks[i as usize % 6], &decks[(i as usize / 6) % 6]];
        let setup = GameSetup {
            decks: pair,
            cards: Arc::clone(&cards),
            config: cfg.clone(),
            seed: 10_000 + i,
            fault_policy: FaultPolicy::Forfeit,
        };
        let mut last_events = 0;
        play_game_observed([&mut a, &mut b], &setup, &mut |s| {
            states += 1;
            let check = check_state(s, pair).and_then(|_| s.check_invariants()).and_then(|_| {
                // The log only grows, with contiguous ordinals.
                let log = s.event_log();
                if log.len() < last_events || log.iter().enumerate().any(|(k, e)| e.ordinal != k as u64) {
                    return Err("event log rewritten".to_string());
                }
                last_events = log.len();
                Ok(())
            });
            if let Err(e) = check {
                violations.push(format!("game {i}, turn {}: {e}", s.turn_number()));
            }
        })
        .map_err(|e| e.to_string())?;
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    Ok(format!("1000 games, {states} states, 0 violations"))
}

// AC3 ------------------------------------------------------------------

fn ac3_determinism() -> Check {
    let cards = cards();
    let decks = builtin_decks();
    let cfg = MatchConfig::default();
    let run = || -> Result<Vec<(String, Replay)>, String> {
        let mut a = runner(RandomAgent::default());
        let mut b = runner(RandomAgent::default());
        (0..100u64)
            .map(|i| {
                let pair = [&decks[i as usize % 6], &decks[(i as usize + 2) % 6]];
                let setup = GameSetup {
                    decks: pair,
                    cards: Arc::clone(&cards),
                    config: cfg.clone(),
                    seed: 500 + i,
                    fault_policy: FaultPolicy::Forfeit,
                };
                let rec = play_game([&mut a, &mut b], &setup).map_err(|e| e.to_string())?;
                Ok((events_to_jsonl(&rec.events), rec.replay(pair, &cfg, &cards)))
            })
            .collect()
    };
    let first = run()?;
    let second = run()?;
    let mut bytes = 0;
    for (i, ((x, replay), (y, _))) in first.iter().zip(&second).enumerate() {
        ensure(x == y, || format!("game {i}: logs differ"))?;
        bytes += x.len();
        // The recorded action list alone reproduces the same log.
        match replay.verify(Arc::clone(&cards)).map_err(|e| e.to_string())? {
            ReplayOutcome::Verified { events, .. } => ensure(events_to_jsonl(&events) == *x, || {
                format!("game {i}: replay log differs")
            })?,
            other => return Err(format!("game {i}: replay {other:?}")),
        }
    }
    Ok(format!("100 games, {bytes} bytes of identical JSONL, replays verified"))
}

// AC4 ------------------------------------------------------------------

fn ac4_hiding() -> Check {
    let cards = cards();
    let collectible: Vec<CardId> = cards
        .iter()
        .filter(|c| !c.uncollectible)
        .map(|c| c.id.clone())
        .collect();
    let secrets: Vec<_> = cards
        .iter()
        .filter(|c| c.kind == CardKind::Secret)
        .map(|c| (c.id.clone(), c.secret_condition().unwrap()))
        .collect();
    let mut rng = GameRng::from_seed(0xACE4);
    let (mut with_secrets, mut changed) = (0, 0);
    for i in 0..200u64 {
        let (g, _) = random_state(&cards, 40_000 + i, 80);
        let viewer = if rng.below(2) == 0 { Seat::First } else { Seat::Second };
        let before = observe(&g, viewer).to_json();
        let mut m = g.clone();
        let opp = m.player_mut(viewer.other());
        rng.shuffle(&mut opp.hand);
        rng.shuffle(&mut opp.deck);
        for c in opp.hand.iter_mut().chain(opp.deck.iter_mut()) {
            if rng.below(2) == 0 {
                c.card = collectible[rng.below(collectible.len())].clone();
            }
        }
        if !opp.secrets.is_empty() {
            with_secrets += 1;
        }
        for s in opp.secrets.iter_mut() {
            let (id, cond) = &secrets[rng.below(secrets.len())];
            s.card = id.clone();
            s.condition = *cond;
        }
        if m != g {
            changed += 1;
        }
        let after = observe(&m, viewer).to_json();
        ensure(before == after, || format!("state {i}: observation changed"))?;
    }
    ensure(changed >= 190, || format!("only {changed} states actually mutated"))?;
    Ok(format!(
        "200 states ({changed} mutated, {with_secrets} with secrets), observations byte-identical"
    ))
}

// AC5 ------------------------------------------------------------------

fn ac5_legality() -> Check {
    let cards = cards();
    let mut rng = GameRng::from_seed(0x1E6A1);
    let (mut small, mut enumerated, mut fuzzed, mut rejected) = (0, 0, 0, 0);
    for i in 0..500u64 {
        let (g, decks) = random_state(&cards, 90_000 + i, 150);
        let legal = g.legal_actions().map_err(|e| e.to_string())?;
        let set: HashSet<&Action> = legal.iter().collect();
        ensure(set.len() == legal.len(), || format!("state {i}: duplicate actions"))?;
        for a in &legal {
            let next = g
                .apply_action(a)
                .map_err(|e| format!("state {i}: {a:?} rejected: {e}"))?;
            check_state(&next, [&decks[0], &decks[1]]).map_err(|e| format!("state {i} after {a:?}: {e}"))?;
            enumerated += 1;
        }
        let minions: usize = Seat::BOTH.iter().map(|&s| g.player(s).board.len()).sum();
        small += usize::from(minions <= 4);
        {
            let oracle: HashSet<Action> = candidate_actions(&g)
                .into_iter()
                .filter(|a| oracle_is_legal(&g, a))
                .collect();
            let engine: HashSet<Action> = legal.iter().cloned().collect();
            ensure(oracle == engine, || {
                format!(
                    "state {i}: oracle-only {:?}, engine-only {:?}",
                    oracle.difference(&engine).collect::<Vec<_>>(),
                    engine.difference(&oracle).collect::<Vec<_>>()
                )
            })?;
        }
        for _ in 0..20 {
            let a = fuzz_action(&mut rng, &g);
            fuzzed += 1;
            let r = g.apply_action(&a);
            if set.contains(&a) {
                ensure(r.is_ok(), || format!("state {i}: enumerated {a:?} failed"))?;
            } else {
                rejected += 1;
                ensure(matches!(r, Err(EngineError::IllegalAction(_))), || {
                    format!("state {i}: non-enumerated {a:?} accepted")
                })?;
                ensure(!oracle_is_legal(&g, &a), || {
                    format!("state {i}: oracle allows missing {a:?}")
                })?;
            }
        }
    }
    Ok(format!(
        "500 states, {enumerated} actions applied, 500 oracle cross-checks ({small} with <= 4 minions), {rejected}/{fuzzed} fuzzed encodings rejected"
    ))
}

// AC6 ------------------------------------------------------------------

fn ac6_fatigue() -> Check {
    let cards = cards();
    let deck = builtin_deck("priest_control").unwrap();
    let mut a = runner(PassAgent);
    let mut b = runner(PassAgent);
    let mut configs = vec![MatchConfig::default()];
    for limit in [55, 60, 62, 64, 66, 68, 70, 80, 120] {
        configs.push(MatchConfig {
            turn_limit: limit,
            ..MatchConfig::default()
        });
    }
    configs.push(MatchConfig {
        turn_limit: 70,
        starting_hand_first: 5,
        starting_hand_second: 5,
        ..MatchConfig::default()
    });
    let mut summary = Vec::new();
    for (n, cfg) in configs.iter().enumerate() {
        let setup = GameSetup {
            decks: [&deck, &deck],
            cards: Arc::clone(&cards),
            config: cfg.clone(),
            seed: 77 + n as u64,
            fault_policy: FaultPolicy::Forfeit,
        };
        let rec = play_game([&mut a, &mut b], &setup).map_err(|e| e.to_string())?;
        let mut turn = 0;
        let mut first = [None; 2];
        let mut total = [0u32; 2];
        for e in &rec.events {
            match &e.event {
                Event::TurnStarted { turn: t, .. } => turn = *t,
                Event::FatigueDamage { seat, amount } => {
                    first[seat.index()].get_or_insert(turn);
                    total[seat.index()] += amount;
                }
                _ => {}
            }
        }
        let want = fatigue_oracle(cfg);
        let winner = match rec.result.outcome {
            Outcome::Win(s) => Some(s),
            Outcome::Draw => None,
        };
        ensure(
            first == want.first_fatigue_turn
                && total == want.total_damage
                && winner == want.winner
                && rec.turns() == want.final_turn,
            || {
                format!(
                    "limit {}: got first {first:?} total {total:?} winner {winner:?} turn {}, oracle {want:?}",
                    cfg.turn_limit,
                    rec.turns()
                )
            },
        )?;
        summary.push(format!("{}:{:?}", cfg.turn_limit, want.total_damage));
    }
    Ok(format!(
        "{} configs match k(k+1)/2 ({})",
        configs.len(),
        summary.join(" ")
    ))
}

// AC7 ------------------------------------------------------------------

const Z95: f64 = 1.959_963_984_540_054;

fn ladder(x: Box<dyn Agent>, y: Box<dyn Agent>) -> Result<(u32, u32, f64), String> {
    let cards = cards();
    let deck = builtin_deck("mage_tempo").unwrap();
    let mut a = deskstone_core::agent::AgentRunner::spawn(x, Duration::from_secs(10)).map_err(|e| e.to_string())?;
    let mut b = deskstone_core::agent::AgentRunner::spawn(y, Duration::from_secs(10)).map_err(|e| e.to_string())?;
    let s = play_games(
        200,
        [&mut a, &mut b],
        [&deck, &deck],
        &cards,
        &MatchConfig::default(),
        1000,
        FaultPolicy::Forfeit,
    )
    .map_err(|e| e.to_string())?;
    let wins = s.stats[0].wins;
    Ok((wins, s.stats[0].games, wilson_lower(wins, s.stats[0].games, Z95)))
}

fn ac7_ladder() -> Check {
    let started = Instant::now();
    let (gw, gn, glo) = ladder(Box::new(GreedyAgent::default()), Box::new(RandomAgent::default()))?;
    let flat = FlatMcAgent::new(FlatMcConfig::default(), Default::default());
    ensure(flat.config().k == 16, || "flat MC default k is not 16".into())?;
    let (fw, fn_, flo) = ladder(Box::new(flat), Box::new(GreedyAgent::default()))?;
    let line = format!(
        "greedy>random {gw}/{gn} (lower {glo:.3}), flatmc>greedy {fw}/{fn_} (lower {flo:.3}), {:.1}s",
        started.elapsed().as_secs_f64()
    );
    ensure(gn == 200 && fn_ == 200 && glo > 0.5 && flo > 0.5, || line.clone())?;
    Ok(line)
}

// AC8 ------------------------------------------------------------------

fn ac8_tournament() -> Check {
    let cards = cards();
    let entrants = [
        Entrant::new("random", || Box::new(RandomAgent::default())),
        Entrant::new("greedy", || Box::new(GreedyAgent::default())),
    ];
    let mut track = TrackConfig::premade(builtin_premade());
    track.base_seed = 2018;
    let first = run_track(&entrants, &track, &cards).map_err(|e| e.to_string())?;
    ensure(first.games.len() == 36, || format!("{} games", first.games.len()))?;
    // (random's deck, greedy's deck) for every game.
    let pairs: HashSet<_> = first
        .games
        .iter()
        .map(|g| {
            let r = usize::from(g.agents[0] != "random");
            (g.decks[r].clone(), g.decks[1 - r].clone())
        })
        .collect();
    ensure(pairs.len() == 36, || {
        format!("{} distinct ordered deck pairs", pairs.len())
    })?;
    let (wins, losses) = (first.stats.total_wins(), first.stats.total_losses());
    let decisive = first.games.iter().filter(|g| g.winner().is_some()).count() as u32;
    ensure(wins == losses && wins == decisive, || {
        format!("wins {wins}, losses {losses}, decisive {decisive}")
    })?;
    let csv = first.to_csv(false);
    ensure(csv.lines().count() == 37, || {
        format!("{} csv lines", csv.lines().count())
    })?;
    track.workers = 2;
    let again = run_track(&entrants, &track, &cards).map_err(|e| e.to_string())?;
    ensure(again.to_csv(false) == csv, || "rerun CSV differs".into())?;
    Ok(format!(
        "36 games, {wins} wins = {losses} losses, rerun CSV byte-identical"
    ))
}

// AC9 ------------------------------------------------------------------

fn ac9_split() -> Check {
    let names: Vec<String> = (1..=20).map(|i| format!("team{i:02}")).collect();
    let plan = split_sub_tournaments(&names, 8, None, 99).map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = plan.groups.iter().map(|g| g.len()).collect();
    ensure(sizes == [7, 7, 6], || format!("sizes {sizes:?}"))?;
    let mut all: Vec<&String> = plan.groups.iter().flatten().collect();
    all.sort();
    all.dedup();
    ensure(all.len() == 20, || "agents lost or duplicated".into())?;
    let again = split_sub_tournaments(&names, 8, None, 99).map_err(|e| e.to_string())?;
    ensure(plan == again, || "same seed, different plan".into())?;
    Ok(format!(
        "groups 7/7/6, {} promoted per group, stable under seed 99",
        plan.promote_per_group
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("AC1 constants", ac1_constants),
        ("AC2 invariant fuzz", ac2_fuzz),
        ("AC3 determinism", ac3_determinism),
        ("AC4 information hiding", ac4_hiding),
        ("AC5 legal actions", ac5_legality),
        ("AC6 fatigue oracle", ac6_fatigue),
        ("AC7 agent ladder", ac7_ladder),
        ("AC8 tournament accounting", ac8_tournament),
        ("AC9 sub-tournament split", ac9_split),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let out = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
