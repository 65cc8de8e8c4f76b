//! Newline-delimited JSON bridge for agents running in another process.
//!
//! The driver writes one message per line to the agent's stdin:
//! `initialize_agent`, `initialize_game`, `observation`, `finalize_game`
//! and `finalize_agent` (the `type` field names the message). Only
//! `observation` expects an answer: one line holding either
//! `{"type":"action","action":...}` or `{"type":"error","message":...}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Agent, AgentError, GameContext};
use crate::cards::{CardSet, DeckSpec, HeroClass};
use crate::engine::{Action, GameResult, MatchConfig, Seat};
use crate::observation::Observation;

/// [`GameContext`] without the card set, which each side loads itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireContext {
    pub seat: Seat,
    pub seed: u64,
    pub deck: DeckSpec,
    pub opponent_class: HeroClass,
    pub config: MatchConfig,
    pub card_set_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    InitializeAgent,
    InitializeGame {
        context: WireContext,
    },
    Observation {
        observation: Box<Observation>,
        time_left_ms: u64,
    },
    Action {
        action: Action,
    },
    Error {
        message: String,
    },
    FinalizeGame {
        result: GameResult,
    },
    FinalizeAgent,
}

fn protocol(e: impl std::fmt::Display) -> AgentError {
    AgentError::Protocol(e.to_string())
}

/// An agent implemented by a child process speaking the line protocol.
pub struct ProcessAgent {
    name: String,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ProcessAgent {
    /// Starts `command` through `sh -c`.
    pub fn spawn(name: &str, command: &str) -> std::io::Result<ProcessAgent> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessAgent {
            name: name.to_string(),
            child,
            stdin,
            stdout,
        })
    }

    fn send(&mut self, msg: &WireMessage) -> Result<(), AgentError> {
        let mut line = serde_json::to_string(msg).map_err(protocol)?;
        line.push('\n');
        self.stdin.write_all(line.as_bytes()).map_err(protocol)?;
        self.stdin.flush().map_err(protocol)
    }

    fn receive(&mut self) -> Result<WireMessage, AgentError> {
        let mut line = String::new();
        loop {
            line.clear();
            if self.stdout.read_line(&mut line).map_err(protocol)? == 0 {
                return Err(protocol("agent process closed its output"));
            }
            if !line.trim().is_empty() {
                return serde_json::from_str(line.trim()).map_err(protocol);
            }
        }
    }
}

impl Drop for ProcessAgent {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Agent for ProcessAgent {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn initialize_agent(&mut self) -> Result<(), AgentError> {
        self.send(&WireMessage::InitializeAgent)
    }

    fn initialize_game(&mut self, ctx: &GameContext) -> Result<(), AgentError> {
        self.send(&WireMessage::InitializeGame {
            context: WireContext {
                seat: ctx.seat,
                seed: ctx.seed,
                deck: ctx.deck.clone(),
                opponent_class: ctx.opponent_class,
                config: ctx.config.clone(),
                card_set_version: ctx.cards.version().to_string(),
            },
        })
    }

    fn get_move(&mut self, obs: &Observation, time_left: Duration) -> Result<Action, AgentError> {
        self.send(&WireMessage::Observation {
            observation: Box::new(obs.clone()),
            time_left_ms: time_left.as_millis() as u64,
        })?;
        match self.receive()? {
            WireMessage::Action { action } => Ok(action),
            WireMessage::Error { message } => Err(AgentError::Failed(message)),
            other => Err(protocol(format!("expected an action, got {other:?}"))),
        }
    }

    fn finalize_game(&mut self, result: &GameResult) -> Result<(), AgentError> {
        self.send(&WireMessage::FinalizeGame { result: *result })
    }

    fn finalize_agent(&mut self) -> Result<(), AgentError> {
        self.send(&WireMessage::FinalizeAgent)?;
        let _ = self.child.wait();
        Ok(())
    }
}

/// Serves `agent` over the line protocol until `finalize_agent` or end of
/// input.
pub fn serve(
    agent: &mut dyn Agent,
    cards: Arc<CardSet>,
    input: impl BufRead,
    mut output: impl Write,
) -> Result<(), AgentError> {
    let mut reply = |msg: WireMessage| -> Result<(), AgentError> {
        let line = serde_json::to_string(&msg).map_err(protocol)?;
        writeln!(output, "{line}").map_err(protocol)?;
        output.flush().map_err(protocol)
    };
    for line in input.lines() {
        let line = line.map_err(protocol)?;
        if line.trim().is_empty() {
            continue;
        }
        let msg: WireMessage = serde_json::from_str(&line).map_err(protocol)?;
        match msg {
            WireMessage::InitializeAgent => agent.initialize_agent()?,
            WireMessage::InitializeGame { context } => {
                if context.card_set_version != cards.version() {
                    return Err(protocol(format!(
                        "card set version {} does not match {}",
                        context.card_set_version,
                        cards.version()
                    )));
                }
                agent.initialize_game(&GameContext {
                    seat: context.seat,
                    seed: context.seed,
                    deck: context.deck,
                    opponent_class: context.opponent_class,
                    config: context.config,
                    cards: Arc::clone(&cards),
                })?
            }
            WireMessage::Observation {
                observation,
                time_left_ms,
            } => match agent.get_move(&observation, Duration::from_millis(time_left_ms)) {
                Ok(action) => reply(WireMessage::Action { action })?,
                Err(e) => reply(WireMessage::Error { message: e.to_string() })?,
            },
            WireMessage::FinalizeGame { result } => agent.finalize_game(&result)?,
            WireMessage::FinalizeAgent => return agent.finalize_agent(),
            other => return Err(protocol(format!("unexpected message {other:?}"))),
        }
    }
    agent.finalize_agent()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_shapes() {
        let m = WireMessage::Action {
            action: Action::EndTurn,
        };
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"type":"action","action":"EndTurn"}"#
        );
        let back: WireMessage = serde_json::from_str(r#"{"type":"finalize_agent"}"#).unwrap();
        assert_eq!(back, WireMessage::FinalizeAgent);
    }
}
