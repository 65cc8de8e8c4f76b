//! Competition tracks: round-robin scheduling, repeated matches with seat
//! and deck rotation, ranking and reports.
//!
//! Premade track: every pair of agents plays all 36 ordered assignments of
//! the six decks (agent X's deck by agent Y's deck, mirrors included), each
//! `repeats` times. User-deck track: every pair plays `repeats` games, each
//! agent with its own deck. In both, the first seat alternates with
//! `(deck_pair + repeat) % 2`, and game seeds are
//! `mix_seed([base_seed, pairing, deck_pair, repeat])`.

mod report;
mod split;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{play_game, Agent, AgentRunner, AgentStats, FaultPolicy, GameRecord, GameSetup};
use crate::cards::{validate_deck, CardSet, DeckSpec};
use crate::engine::{EngineError, MatchConfig, Outcome, Seat};
use crate::rng::mix_seed;

pub use report::{GameRow, RankingRow, RankingTable, TournamentReport};
pub use split::{split_sub_tournaments, SubTournamentPlan};

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("a round robin needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("invalid track config: {0}")]
    InvalidTrackConfig(String),
    #[error("invalid group size {0}; must be at least 2")]
    InvalidGroupSize(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("agent `{agent}` could not start: {message}")]
    AgentStart { agent: String, message: String },
}

pub type AgentFactory = Arc<dyn Fn() -> Box<dyn Agent> + Send + Sync>;

/// A named tournament participant. Each worker builds its own instance.
#[derive(Clone)]
pub struct Entrant {
    pub name: String,
    pub factory: AgentFactory,
    /// Required on the user-deck track, ignored on the premade track.
    pub deck: Option<DeckSpec>,
}

impl Entrant {
    pub fn new(name: impl Into<String>, factory: impl Fn() -> Box<dyn Agent> + Send + Sync + 'static) -> Self {
        Entrant {
            name: name.into(),
            factory: Arc::new(factory),
            deck: None,
        }
    }

    pub fn with_deck(mut self, deck: DeckSpec) -> Self {
        self.deck = Some(deck);
        self
    }
}

impl std::fmt::Debug for Entrant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Entrant")
            .field("name", &self.name)
            .field("deck", &self.deck.as_ref().map(|d| &d.name))
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackKind {
    PremadeDeck,
    UserCreatedDeck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremadeDeck {
    pub deck: DeckSpec,
    /// Known to participants before submission. Metadata only.
    pub known: bool,
}

/// The six bundled decks, the first three marked known.
pub fn builtin_premade() -> Vec<PremadeDeck> {
    crate::cards::builtin_decks()
        .into_iter()
        .enumerate()
        .map(|(i, deck)| PremadeDeck { deck, known: i < 3 })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TrackConfig {
    pub kind: TrackKind,
    /// Exactly six for the premade track, three of them known.
    pub premade: Vec<PremadeDeck>,
    pub repeats: u32,
    pub match_config: MatchConfig,
    pub base_seed: u64,
    pub fault_policy: FaultPolicy,
    /// Worker threads. Results do not depend on it.
    pub workers: usize,
}

impl TrackConfig {
    pub fn premade(decks: Vec<PremadeDeck>) -> Self {
        TrackConfig {
            kind: TrackKind::PremadeDeck,
            premade: decks,
            repeats: 1,
            match_config: MatchConfig::default(),
            base_seed: 0,
            fault_policy: FaultPolicy::default(),
            workers: 1,
        }
    }

    pub fn user_decks() -> Self {
        TrackConfig {
            kind: TrackKind::UserCreatedDeck,
            premade: Vec::new(),
            ..TrackConfig::premade(Vec::new())
        }
    }

    fn validate(&self, cards: &CardSet) -> Result<(), TournamentError> {
        let bad = |m: String| Err(TournamentError::InvalidTrackConfig(m));
        if self.repeats == 0 {
            return bad("repeats must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        self.match_config.validate()?;
        if self.kind == TrackKind::PremadeDeck {
            if self.premade.len() != 6 {
                return bad(format!("premade track needs 6 decks, got {}", self.premade.len()));
            }
            let known = self.premade.iter().filter(|d| d.known).count();
            if known != 3 {
                return bad(format!("premade track needs 3 known decks, got {known}"));
            }
            for d in &self.premade {
                let v = validate_deck(&d.deck, cards);
                if !v.is_empty() {
                    let why: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    return bad(format!("deck `{}`: {}", d.deck.name, why.join("; ")));
                }
            }
        }
        Ok(())
    }
}

/// Every unordered pair `(i, j)` with `i < j`, in lexicographic order.
pub fn schedule_round_robin(n: usize) -> Result<Vec<(usize, usize)>, TournamentError> {
    if n < 2 {
        return Err(TournamentError::TooFewAgents(n));
    }
    Ok((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect())
}

/// One game of the plan. Agent indices refer to the eligible entrants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduledGame {
    pub index: usize,
    pub pairing: usize,
    pub deck_pair: usize,
    pub repeat: u32,
    pub seed: u64,
    /// (agent, deck) in seat order.
    pub first: (usize, DeckSpec),
    pub second: (usize, DeckSpec),
}

/// Expands a track into its game list without playing anything.
pub fn plan_games(
    n_agents: usize,
    agent_decks: &[Option<DeckSpec>],
    track: &TrackConfig,
) -> Result<Vec<ScheduledGame>, TournamentError> {
    let pairings = schedule_round_robin(n_agents)?;
    let mut games = Vec::new();
    for (p, &(x, y)) in pairings.iter().enumerate() {
        let deck_pairs: Vec<(DeckSpec, DeckSpec)> = match track.kind {
            TrackKind::PremadeDeck => {
                let d = &track.premade;
                (0..d.len() * d.len())
                    .map(|k| (d[k / d.len()].deck.clone(), d[k % d.len()].deck.clone()))
                    .collect()
            }
            TrackKind::UserCreatedDeck => {
                let get = |i: usize| {
                    agent_decks[i]
                        .clone()
                        .ok_or_else(|| TournamentError::InvalidTrackConfig(format!("agent {i} has no deck")))
                };
                vec![(get(x)?, get(y)?)]
            }
        };
        for (dp, (dx, dy)) in deck_pairs.into_iter().enumerate() {
            for r in 0..track.repeats {
                let seed = mix_seed(&[track.base_seed, p as u64, dp as u64, r as u64]);
                let (first, second) = if (dp as u64 + r as u64).is_multiple_of(2) {
                    ((x, dx.clone()), (y, dy.clone()))
                } else {
                    ((y, dy.clone()), (x, dx.clone()))
                };
                games.push(ScheduledGame {
                    index: games.len(),
                    pairing: p,
                    deck_pair: dp,
                    repeat: r,
                    seed,
                    first,
                    second,
                });
            }
        }
    }
    Ok(games)
}

/// Per-agent totals keyed by agent name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GameStats {
    pub agents: BTreeMap<String, AgentStats>,
}

impl GameStats {
    pub fn record(&mut self, rec: &GameRecord) {
        for seat in Seat::BOTH {
            self.agents.entry(rec.agents[seat.index()].clone()).or_default().record(
                seat,
                &rec.result,
                &rec.seats[seat.index()],
            );
        }
    }

    /// Order-independent merge.
    pub fn merge(&mut self, other: &GameStats) {
        for (name, s) in &other.agents {
            self.agents.entry(name.clone()).or_default().merge(s);
        }
    }

    pub fn total_wins(&self) -> u32 {
        self.agents.values().map(|s| s.wins).sum()
    }

    pub fn total_losses(&self) -> u32 {
        self.agents.values().map(|s| s.losses).sum()
    }
}

/// Runs a whole track and returns its report.
pub fn run_track(
    entrants: &[Entrant],
    track: &TrackConfig,
    cards: &Arc<CardSet>,
) -> Result<TournamentReport, TournamentError> {
    track.validate(cards)?;
    let mut names = std::collections::HashSet::new();
    for e in entrants {
        if !names.insert(e.name.as_str()) {
            return Err(TournamentError::InvalidTrackConfig(format!(
                "duplicate agent name `{}`",
                e.name
            )));
        }
    }
    let mut disqualified = Vec::new();
    let eligible: Vec<&Entrant> = match track.kind {
        TrackKind::PremadeDeck => entrants.iter().collect(),
        TrackKind::UserCreatedDeck => entrants
            .iter()
            .filter(|e| {
                let reason = match &e.deck {
                    None => Some("no deck supplied".to_string()),
                    Some(d) => {
                        let v = validate_deck(d, cards);
                        (!v.is_empty()).then(|| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
                    }
                };
                match reason {
                    Some(r) => {
                        disqualified.push((e.name.clone(), r));
                        false
                    }
                    None => true,
                }
            })
            .collect(),
    };
    let decks: Vec<Option<DeckSpec>> = eligible.iter().map(|e| e.deck.clone()).collect();
    let plan = plan_games(eligible.len(), &decks, track)?;
    let records = execute(&eligible, &plan, track, cards)?;

    let mut stats = GameStats::default();
    for e in &eligible {
        stats.agents.entry(e.name.clone()).or_default();
    }
    let mut rows = Vec::with_capacity(plan.len());
    for (g, rec) in plan.iter().zip(&records) {
        stats.record(rec);
        rows.push(GameRow::new(g, rec));
    }
    Ok(TournamentReport {
        kind: track.kind,
        base_seed: track.base_seed,
        repeats: track.repeats,
        premade: track.premade.clone(),
        ranking: RankingTable::from_stats(&stats),
        stats,
        games: rows,
        disqualified,
    })
}

fn execute(
    entrants: &[&Entrant],
    plan: &[ScheduledGame],
    track: &TrackConfig,
    cards: &Arc<CardSet>,
) -> Result<Vec<GameRecord>, TournamentError> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<GameRecord>>> = Mutex::new(vec![None; plan.len()]);
    let failure: Mutex<Option<TournamentError>> = Mutex::new(None);
    let startup = Duration::from_millis(track.match_config.time_budget_ms);
    std::thread::scope(|scope| {
        for _ in 0..track.workers.min(plan.len().max(1)) {
            scope.spawn(|| {
                let mut runners: Vec<Option<AgentRunner>> = entrants.iter().map(|_| None).collect();
                loop {
                    if failure.lock().expect("lock").is_some() {
                        return;
                    }
                    let k = next.fetch_add(1, Ordering::SeqCst);
                    let Some(g) = plan.get(k) else { return };
                    for i in [g.first.0, g.second.0] {
                        if runners[i].is_none() {
                            match AgentRunner::spawn((entrants[i].factory)(), startup) {
                                Ok(r) => runners[i] = Some(r),
                                Err(e) => {
                                    *failure.lock().expect("lock") = Some(TournamentError::AgentStart {
                                        agent: entrants[i].name.clone(),
                                        message: e.to_string(),
                                    });
                                    return;
                                }
                            }
                        }
                    }
                    let (lo, hi) = (g.first.0.min(g.second.0), g.first.0.max(g.second.0));
                    let (left, right) = runners.split_at_mut(hi);
                    let a = left[lo].as_mut().expect("spawned");
                    let b = right[0].as_mut().expect("spawned");
                    let setup = GameSetup {
                        decks: [&g.first.1, &g.second.1],
                        cards: Arc::clone(cards),
                        config: track.match_config.clone(),
                        seed: g.seed,
                        fault_policy: track.fault_policy,
                    };
                    let seats = if g.first.0 == lo { [a, b] } else { [b, a] };
                    match play_game(seats, &setup) {
                        Ok(mut rec) => {
                            rec.agents = [entrants[g.first.0].name.clone(), entrants[g.second.0].name.clone()];
                            rec.events.clear();
                            results.lock().expect("lock")[k] = Some(rec);
                        }
                        Err(e) => {
                            *failure.lock().expect("lock") = Some(e.into());
                            return;
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(results
        .into_inner()
        .expect("lock")
        .into_iter()
        .map(|r| r.expect("every game played"))
        .collect())
}

/// Winner of a finished game by agent name, if not a draw.
pub fn winner_name(rec: &GameRecord) -> Option<&str> {
    match rec.result.outcome {
        Outcome::Win(s) => Some(rec.agents[s.index()].as_str()),
        Outcome::Draw => None,
    }
}
