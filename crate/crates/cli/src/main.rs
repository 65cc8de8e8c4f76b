//! `deskstone`: play matches, run tournament tracks, check decks, list
//! cards, verify replays and serve built-in agents over stdio.
//!
//! Exit codes: 0 success, 1 a check failed (invalid deck, replay
//! mismatch), 2 usage, configuration or I/O error, 3 agent fault.

mod agents;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deskstone_core::agent::{play_game, serve, AgentRunner, FaultPolicy, GameSetup};
use deskstone_core::cards::{
    builtin_card_set, builtin_deck, load_card_set, load_deck, validate_deck, CardClass, CardKind, CardSet, DeckSpec,
    HeroClass, PREMADE_DECK_NAMES,
};
use deskstone_core::engine::{events_to_jsonl, EndReason, MatchConfig, Outcome, Replay, ReplayOutcome};
use deskstone_core::tournament::{builtin_premade, run_track, split_sub_tournaments, Entrant, TrackConfig};

use agents::{AgentSpec, Settings};

#[derive(Parser)]
#[command(
    name = "deskstone",
    version,
    about = "Card game engine, agent harness and tournament runner"
)]
struct Cli {
    /// Card set JSON file. Defaults to the bundled set.
    #[arg(long, global = true, env = "DESKSTONE_CARDS")]
    cards: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game between two agents.
    Play(PlayArgs),
    /// Run a premade-deck or user-deck track.
    Tournament(TournamentArgs),
    /// Check a deck against the card set.
    ValidateDeck {
        /// Deck file, or builtin:NAME.
        deck: String,
    },
    /// Print the card set, optionally filtered.
    ListCards {
        /// Hero class or Neutral.
        #[arg(long)]
        class: Option<String>,
        /// Minion, Spell, Secret or Weapon.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Re-execute a replay file, print its event log and check it matches.
    Replay {
        file: PathBuf,
        /// Print only the verdict.
        #[arg(long)]
        quiet: bool,
    },
    /// Split agents into sub-tournament groups.
    Split {
        /// Agent names.
        #[arg(required = true)]
        agents: Vec<String>,
        #[arg(long, default_value_t = 8)]
        max_group_size: usize,
        /// Agents advancing to the final. Defaults to the group count.
        #[arg(long)]
        finalists: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve a built-in agent over the stdin/stdout line protocol.
    ServeAgent {
        /// Agent spec (exec: is not allowed).
        agent: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Options shared by commands that play games.
#[derive(Args)]
struct MatchArgs {
    /// TOML file with [match], [weights] and [flat_mc] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Last turn played before a draw [default: 50].
    #[arg(long)]
    turn_limit: Option<u32>,
    /// Per-turn computation budget in ms [default: 60000].
    #[arg(long)]
    budget_ms: Option<u64>,
    #[arg(long, value_enum, default_value_t = Policy::Forfeit)]
    fault_policy: Policy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    /// A faulting agent loses the game.
    Forfeit,
    /// A faulting agent's turn is ended and play continues.
    EndTurn,
}

impl From<Policy> for FaultPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Forfeit => FaultPolicy::Forfeit,
            Policy::EndTurn => FaultPolicy::ForceEndTurn,
        }
    }
}

#[derive(Args)]
struct PlayArgs {
    /// pass | random | greedy | flatmc[:k=N,depth=N,leaf_scale=X,policy=P] | exec:CMD
    #[arg(long)]
    agent_a: String,
    #[arg(long)]
    agent_b: String,
    /// Deck file or builtin:NAME for the first player.
    #[arg(long)]
    deck_a: String,
    #[arg(long)]
    deck_b: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the event log here as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Write a replay file here.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[command(flatten)]
    game: MatchArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Track {
    Premade,
    User,
}

#[derive(Args)]
struct TournamentArgs {
    #[arg(long, value_enum)]
    track: Track,
    /// NAME=SPEC or SPEC; repeat for each entrant.
    #[arg(long = "agent", required = true)]
    agents: Vec<String>,
    /// NAME=DECK for the user track; repeat for each entrant.
    #[arg(long = "deck")]
    decks: Vec<String>,
    /// Six premade decks; the first three are marked known. Defaults to
    /// the bundled six.
    #[arg(long = "premade", num_args = 6, value_delimiter = ',')]
    premade: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Per-game CSV report.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON summary.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Include response-time columns in the reports.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    game: MatchArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_cards(cli.cards.as_deref()).and_then(|cards| run(cli.command, cards));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command, cards: Arc<CardSet>) -> CmdResult {
    match command {
        Command::Play(args) => cmd_play(args, cards),
        Command::Tournament(args) => cmd_tournament(args, cards),
        Command::ValidateDeck { deck } => cmd_validate_deck(&deck, &cards),
        Command::ListCards { class, kind } => cmd_list_cards(class.as_deref(), kind.as_deref(), &cards),
        Command::Replay { file, quiet } => cmd_replay(&file, quiet, cards),
        Command::Split {
            agents,
            max_group_size,
            finalists,
            seed,
        } => {
            let plan = split_sub_tournaments(&agents, max_group_size, finalists, seed)
                .map_err(|e| Failure::config(e.to_string()))?;
            for (i, g) in plan.groups.iter().enumerate() {
                println!("group {}: {}", i + 1, g.join(" "));
            }
            if plan.needs_final() {
                println!("promote {} per group to the final", plan.promote_per_group);
            }
            Ok(0)
        }
        Command::ServeAgent { agent, config } => {
            let settings = Settings::load(config.as_deref()).map_err(Failure::config)?;
            let spec = AgentSpec::parse(&agent, &settings).map_err(Failure::config)?;
            if matches!(spec, AgentSpec::Exec(_)) {
                return Err(Failure::config("serve-agent takes a built-in agent"));
            }
            let mut a = spec.build(spec.label(), &settings.weights);
            let stdin = std::io::stdin().lock();
            serve(a.as_mut(), cards, stdin, std::io::stdout().lock()).map_err(|e| Failure {
                code: 3,
                message: e.to_string(),
            })?;
            Ok(0)
        }
    }
}

fn load_cards(path: Option<&Path>) -> Result<Arc<CardSet>, Failure> {
    match path {
        None => Ok(Arc::new(builtin_card_set())),
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
            load_card_set(&bytes)
                .map(Arc::new)
                .map_err(|e| Failure::config(format!("{}: {e}", p.display())))
        }
    }
}

fn load_deck_arg(arg: &str) -> Result<DeckSpec, Failure> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return builtin_deck(name).ok_or_else(|| {
            Failure::config(format!(
                "no built-in deck `{name}` (have {})",
                PREMADE_DECK_NAMES.join(", ")
            ))
        });
    }
    let bytes = std::fs::read(arg).map_err(|e| Failure::config(format!("{arg}: {e}")))?;
    load_deck(&bytes).map_err(|e| Failure::config(format!("{arg}: {e}")))
}

fn match_config(args: &MatchArgs) -> Result<(Settings, MatchConfig), Failure> {
    let settings = Settings::load(args.config.as_deref()).map_err(Failure::config)?;
    let mut cfg = settings.match_config.clone();
    if let Some(t) = args.turn_limit {
        cfg.turn_limit = t;
    }
    if let Some(b) = args.budget_ms {
        cfg.time_budget_ms = b;
    }
    cfg.validate().map_err(|e| Failure::config(e.to_string()))?;
    Ok((settings, cfg))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn cmd_play(args: PlayArgs, cards: Arc<CardSet>) -> CmdResult {
    let (settings, config) = match_config(&args.game)?;
    let specs = [
        AgentSpec::parse(&args.agent_a, &settings).map_err(Failure::config)?,
        AgentSpec::parse(&args.agent_b, &settings).map_err(Failure::config)?,
    ];
    let decks = [load_deck_arg(&args.deck_a)?, load_deck_arg(&args.deck_b)?];
    for d in &decks {
        let v = validate_deck(d, &cards);
        if !v.is_empty() {
            let why: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            return Err(Failure::config(format!("deck `{}`: {}", d.name, why.join("; "))));
        }
    }
    let names = if specs[0].label() == specs[1].label() {
        [format!("{}-a", specs[0].label()), format!("{}-b", specs[1].label())]
    } else {
        [specs[0].label().to_string(), specs[1].label().to_string()]
    };
    let startup = Duration::from_millis(config.time_budget_ms);
    let mut runners = Vec::with_capacity(2);
    for (spec, name) in specs.iter().zip(&names) {
        let r = AgentRunner::spawn(spec.build(name, &settings.weights), startup).map_err(|e| Failure {
            code: 3,
            message: format!("agent {name}: {e}"),
        })?;
        runners.push(r);
    }
    let [a, b] = &mut runners[..] else { unreachable!() };
    let setup = GameSetup {
        decks: [&decks[0], &decks[1]],
        cards: Arc::clone(&cards),
        config: config.clone(),
        seed: args.seed,
        fault_policy: args.game.fault_policy.into(),
    };
    let rec = play_game([a, b], &setup).map_err(|e| Failure::config(e.to_string()))?;

    let verdict = match rec.result.outcome {
        Outcome::Draw => "Draw".to_string(),
        Outcome::Win(s) => format!("{} wins", names[s.index()]),
    };
    let reason = match rec.result.reason {
        EndReason::HeroDead => "hero dead",
        EndReason::TurnLimit => "turn limit",
        EndReason::Forfeit => "forfeit",
    };
    println!("result: {verdict} ({reason}) after {} turns", rec.turns());
    for (i, s) in rec.seats.iter().enumerate() {
        println!(
            "{}: deck {}, {} moves, {:.1} ms total, {:.1} ms max, {} timeouts, {} faults{}",
            names[i],
            decks[i].name,
            s.moves_made,
            s.total_response_ms,
            s.max_response_ms,
            s.timeouts,
            s.faults,
            s.fault.as_ref().map(|f| format!(" ({f})")).unwrap_or_default()
        );
    }
    if let Some(p) = &args.events {
        write_file(p, &events_to_jsonl(&rec.events))?;
    }
    if let Some(p) = &args.replay {
        write_file(p, &rec.replay([&decks[0], &decks[1]], &config, &cards).to_json())?;
    }
    Ok(if rec.seats.iter().any(|s| s.faults > 0) { 3 } else { 0 })
}

fn cmd_tournament(args: TournamentArgs, cards: Arc<CardSet>) -> CmdResult {
    let (settings, config) = match_config(&args.game)?;
    let mut decks = std::collections::HashMap::new();
    for d in &args.decks {
        let (name, path) = d
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("--deck `{d}`: expected NAME=DECK")))?;
        decks.insert(name.to_string(), load_deck_arg(path)?);
    }
    let mut entrants = Vec::new();
    for a in &args.agents {
        let (name, spec) = match a.split_once('=') {
            Some((n, s)) if !a.starts_with("exec:") => (n.to_string(), s),
            _ => (String::new(), a.as_str()),
        };
        let spec = AgentSpec::parse(spec, &settings).map_err(Failure::config)?;
        let name = if name.is_empty() {
            spec.label().to_string()
        } else {
            name
        };
        let weights = settings.weights;
        let label = name.clone();
        let mut e = Entrant::new(name.clone(), move || spec.build(&label, &weights));
        if let Some(d) = decks.remove(&name) {
            e = e.with_deck(d);
        }
        entrants.push(e);
    }
    if let Some(extra) = decks.keys().next() {
        return Err(Failure::config(format!("--deck for unknown agent `{extra}`")));
    }
    let mut track = match args.track {
        Track::Premade => {
            let premade = match &args.premade {
                None => builtin_premade(),
                Some(list) => list
                    .iter()
                    .enumerate()
                    .map(|(i, d)| {
                        load_deck_arg(d).map(|deck| deskstone_core::tournament::PremadeDeck { deck, known: i < 3 })
                    })
                    .collect::<Result<_, _>>()?,
            };
            TrackConfig::premade(premade)
        }
        Track::User => TrackConfig::user_decks(),
    };
    track.repeats = args.repeats;
    track.match_config = config;
    track.base_seed = args.seed;
    track.fault_policy = args.game.fault_policy.into();
    track.workers = args.workers;

    let report = run_track(&entrants, &track, &cards).map_err(|e| Failure::config(e.to_string()))?;
    for (agent, why) in &report.disqualified {
        eprintln!("disqualified {agent}: {why}");
    }
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} games", report.games.len());
    let _ = write!(out, "{}", report.ranking.to_text());
    if let Some(p) = &args.csv {
        write_file(p, &report.to_csv(args.timing))?;
    }
    if let Some(p) = &args.json {
        write_file(p, &report.to_json(args.timing))?;
    }
    Ok(0)
}

fn cmd_validate_deck(arg: &str, cards: &CardSet) -> CmdResult {
    let deck = load_deck_arg(arg)?;
    let v = validate_deck(&deck, cards);
    if v.is_empty() {
        println!("OK");
        return Ok(0);
    }
    println!("deck `{}` is invalid:", deck.name);
    for x in v {
        println!("  {x}");
    }
    Ok(1)
}

fn parse_class(s: &str) -> Result<CardClass, Failure> {
    if s.eq_ignore_ascii_case("neutral") {
        return Ok(CardClass::Neutral);
    }
    HeroClass::ALL
        .iter()
        .find(|c| c.as_str().eq_ignore_ascii_case(s))
        .map(|&c| CardClass::Hero(c))
        .ok_or_else(|| Failure::config(format!("unknown class `{s}`")))
}

fn cmd_list_cards(class: Option<&str>, kind: Option<&str>, cards: &CardSet) -> CmdResult {
    let class = class.map(parse_class).transpose()?;
    let kind = kind
        .map(|k| {
            CardKind::ALL
                .iter()
                .copied()
                .find(|c| c.as_str().eq_ignore_ascii_case(k))
                .ok_or_else(|| Failure::config(format!("unknown kind `{k}`")))
        })
        .transpose()?;
    let mut out = std::io::stdout().lock();
    for c in cards.iter() {
        if class.is_some_and(|x| x != c.class) || kind.is_some_and(|k| k != c.kind) {
            continue;
        }
        let stats = match c.kind {
            CardKind::Minion | CardKind::Weapon => format!("{}/{}", c.attack, c.health_or_durability),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "{:<20} {:<8} {:<7} {:>2} {:>5}  {}{}",
            c.id.as_str(),
            c.class.to_string(),
            c.kind.as_str(),
            c.cost,
            stats,
            c.name,
            if c.uncollectible { " (token)" } else { "" }
        );
    }
    Ok(0)
}

fn cmd_replay(path: &Path, quiet: bool, cards: Arc<CardSet>) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let replay = Replay::from_json(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let outcome = replay
        .verify(cards)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    match outcome {
        ReplayOutcome::Verified { result, events } => {
            if !quiet {
                print!("{}", events_to_jsonl(&events));
            }
            match result {
                Some(r) => println!("verified: {:?} ({:?}) at turn {}", r.outcome, r.reason, r.final_turn),
                None => println!("verified: game unfinished"),
            }
            Ok(0)
        }
        ReplayOutcome::IllegalAction { index, action } => {
            println!("mismatch: action {index} ({action:?}) is illegal on replay");
            Ok(1)
        }
        ReplayOutcome::Mismatch {
            ordinal,
            recorded,
            replayed,
        } => {
            println!("mismatch at event {ordinal}");
            let show = |e: Option<deskstone_core::engine::GameEvent>| {
                e.map(|e| serde_json::to_string(&e).expect("events serialize"))
                    .unwrap_or_else(|| "(none)".into())
            };
            println!("  recorded: {}", show(recorded));
            println!("  replayed: {}", show(replayed));
            Ok(1)
        }
        ReplayOutcome::CardSetVersion { recorded, loaded } => {
            println!("mismatch: replay recorded with card set {recorded}, loaded {loaded}");
            Ok(1)
        }
    }
}
