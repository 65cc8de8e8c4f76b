//! Tournament outputs: one CSV row per game, a JSON summary and a plain
//! text ranking. Timing-dependent values sit in trailing CSV columns and
//! separate JSON fields so the rest can be compared byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{GameStats, PremadeDeck, ScheduledGame, TrackKind};
use crate::agent::{AgentStats, GameRecord};
use crate::engine::{EndReason, Outcome};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRow {
    pub game: usize,
    pub pairing: usize,
    pub deck_pair: usize,
    pub repeat: u32,
    pub seed: u64,
    pub agents: [String; 2],
    pub decks: [String; 2],
    pub outcome: Outcome,
    pub reason: EndReason,
    pub turns: u32,
    pub moves: [u64; 2],
    pub timeouts: [u32; 2],
    pub faults: [u32; 2],
    pub response_ms: [f64; 2],
    pub max_response_ms: [f64; 2],
}

impl GameRow {
    pub(crate) fn new(g: &ScheduledGame, rec: &GameRecord) -> Self {
        GameRow {
            game: g.index,
            pairing: g.pairing,
            deck_pair: g.deck_pair,
            repeat: g.repeat,
            seed: g.seed,
            agents: rec.agents.clone(),
            decks: rec.decks.clone(),
            outcome: rec.result.outcome,
            reason: rec.result.reason,
            turns: rec.turns(),
            moves: rec.seats.clone().map(|s| s.moves_made),
            timeouts: rec.seats.clone().map(|s| s.timeouts),
            faults: rec.seats.clone().map(|s| s.faults),
            response_ms: rec.seats.clone().map(|s| s.total_response_ms),
            max_response_ms: rec.seats.clone().map(|s| s.max_response_ms),
        }
    }

    pub fn winner(&self) -> Option<&str> {
        match self.outcome {
            Outcome::Win(s) => Some(&self.agents[s.index()]),
            Outcome::Draw => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub agent: String,
    pub win_rate: f64,
    pub stats: AgentStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub rows: Vec<RankingRow>,
}

impl RankingTable {
    /// Sorted by win rate (draws half), then lower mean response time, then
    /// name.
    pub fn from_stats(stats: &GameStats) -> Self {
        let mut rows: Vec<RankingRow> = stats
            .agents
            .iter()
            .map(|(name, s)| RankingRow {
                rank: 0,
                agent: name.clone(),
                win_rate: s.win_rate(),
                stats: s.clone(),
            })
            .collect();
        rows.sort_by(|a, b| {
            b.win_rate
                .total_cmp(&a.win_rate)
                .then_with(|| a.stats.avg_response_ms().total_cmp(&b.stats.avg_response_ms()))
                .then_with(|| a.agent.cmp(&b.agent))
        });
        for (i, r) in rows.iter_mut().enumerate() {
            r.rank = i + 1;
        }
        RankingTable { rows }
    }

    pub fn agents(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.agent.as_str()).collect()
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.agent.len()).max().unwrap_or(5).max(5);
        let mut out = format!(
            "{:>4}  {:<width$}  {:>5}  {:>5}  {:>5}  {:>5}  {:>8}  {:>10}\n",
            "rank", "agent", "games", "wins", "draws", "loss", "win_rate", "avg_ms"
        );
        for r in &self.rows {
            let s = &r.stats;
            out.push_str(&format!(
                "{:>4}  {:<width$}  {:>5}  {:>5}  {:>5}  {:>5}  {:>8.4}  {:>10.3}\n",
                r.rank,
                r.agent,
                s.games,
                s.wins,
                s.draws,
                s.losses,
                r.win_rate,
                s.avg_response_ms()
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TournamentReport {
    pub kind: TrackKind,
    pub base_seed: u64,
    pub repeats: u32,
    pub premade: Vec<PremadeDeck>,
    pub games: Vec<GameRow>,
    pub stats: GameStats,
    pub ranking: RankingTable,
    /// Entrants excluded before play, with the reason.
    pub disqualified: Vec<(String, String)>,
}

const CSV_HEADER: [&str; 19] = [
    "game",
    "pairing",
    "deck_pair",
    "repeat",
    "seed",
    "first_agent",
    "second_agent",
    "first_deck",
    "second_deck",
    "outcome",
    "winner",
    "reason",
    "turns",
    "first_moves",
    "second_moves",
    "first_timeouts",
    "second_timeouts",
    "first_faults",
    "second_faults",
];

const CSV_TIMING: [&str; 4] = [
    "first_response_ms",
    "second_response_ms",
    "first_max_response_ms",
    "second_max_response_ms",
];

fn outcome_label(o: Outcome) -> &'static str {
    match o {
        Outcome::Win(crate::engine::Seat::First) => "first",
        Outcome::Win(crate::engine::Seat::Second) => "second",
        Outcome::Draw => "draw",
    }
}

fn reason_label(r: EndReason) -> &'static str {
    match r {
        EndReason::HeroDead => "hero_dead",
        EndReason::TurnLimit => "turn_limit",
        EndReason::Forfeit => "forfeit",
    }
}

impl TournamentReport {
    /// One row per game in schedule order. With `timing` off the trailing
    /// response-time columns are left out.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        if timing {
            header.extend(CSV_TIMING);
        }
        w.write_record(&header).expect("write to memory");
        for g in &self.games {
            let mut rec = vec![
                g.game.to_string(),
                g.pairing.to_string(),
                g.deck_pair.to_string(),
                g.repeat.to_string(),
                g.seed.to_string(),
                g.agents[0].clone(),
                g.agents[1].clone(),
                g.decks[0].clone(),
                g.decks[1].clone(),
                outcome_label(g.outcome).to_string(),
                g.winner().unwrap_or("").to_string(),
                reason_label(g.reason).to_string(),
                g.turns.to_string(),
                g.moves[0].to_string(),
                g.moves[1].to_string(),
                g.timeouts[0].to_string(),
                g.timeouts[1].to_string(),
                g.faults[0].to_string(),
                g.faults[1].to_string(),
            ];
            if timing {
                rec.extend([
                    format!("{:.3}", g.response_ms[0]),
                    format!("{:.3}", g.response_ms[1]),
                    format!("{:.3}", g.max_response_ms[0]),
                    format!("{:.3}", g.max_response_ms[1]),
                ]);
            }
            w.write_record(&rec).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }

    /// JSON summary: track parameters, ranking and disqualifications.
    pub fn to_json(&self, timing: bool) -> String {
        let ranking: Vec<Value> = self
            .ranking
            .rows
            .iter()
            .map(|r| {
                let s = &r.stats;
                let mut m = Map::new();
                m.insert("rank".into(), json!(r.rank));
                m.insert("agent".into(), json!(r.agent));
                m.insert("win_rate".into(), json!(r.win_rate));
                m.insert("games".into(), json!(s.games));
                m.insert("wins".into(), json!(s.wins));
                m.insert("draws".into(), json!(s.draws));
                m.insert("losses".into(), json!(s.losses));
                m.insert("moves".into(), json!(s.moves));
                m.insert("timeouts".into(), json!(s.timeouts));
                m.insert("faults".into(), json!(s.faults));
                if timing {
                    m.insert("total_response_ms".into(), json!(s.total_response_ms));
                    m.insert("avg_response_ms".into(), json!(s.avg_response_ms()));
                    m.insert("max_response_ms".into(), json!(s.max_response_ms));
                }
                Value::Object(m)
            })
            .collect();
        let decks: Vec<Value> = self
            .premade
            .iter()
            .map(|d| json!({"name": d.deck.name, "known": d.known}))
            .collect();
        let disq: Vec<Value> = self
            .disqualified
            .iter()
            .map(|(a, r)| json!({"agent": a, "reason": r}))
            .collect();
        let doc = json!({
            "track": match self.kind {
                TrackKind::PremadeDeck => "premade",
                TrackKind::UserCreatedDeck => "user",
            },
            "base_seed": self.base_seed,
            "repeats": self.repeats,
            "games": self.games.len(),
            "decks": decks,
            "ranking": ranking,
            "disqualified": disq,
        });
        serde_json::to_string_pretty(&doc).expect("summary serializes")
    }
}
