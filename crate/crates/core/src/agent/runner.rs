//! Runs an agent on its own thread so calls can be abandoned on timeout.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::{Agent, AgentError, GameContext};
use crate::engine::{Action, GameResult};
use crate::observation::Observation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CallError {
    #[error("no answer within {0:?}")]
    Timeout(Duration),
    #[error("agent failed: {0}")]
    Agent(AgentError),
    #[error("agent panicked: {0}")]
    Panicked(String),
    #[error("agent thread is gone")]
    Disconnected,
}

enum Request {
    InitializeGame(Box<GameContext>),
    GetMove(Box<Observation>, Duration),
    FinalizeGame(GameResult),
    FinalizeAgent,
}

enum Reply {
    Done,
    Move(Action),
}

type Tagged = (u64, Result<Reply, CallError>);

/// Owns one agent session on a worker thread.
///
/// Every call carries a sequence number. A call that times out leaves its
/// answer in flight; it is discarded when it eventually arrives, and later
/// calls queue behind it on the worker.
pub struct AgentRunner {
    name: String,
    tx: Option<Sender<(u64, Request)>>,
    rx: Receiver<Tagged>,
    seq: u64,
    worker: Option<thread::JoinHandle<()>>,
    finalized: bool,
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_string()
    }
}

impl AgentRunner {
    /// Starts the worker and runs `initialize_agent` on it.
    pub fn spawn(agent: Box<dyn Agent>, init_timeout: Duration) -> Result<AgentRunner, CallError> {
        let name = agent.name();
        let (req_tx, req_rx) = mpsc::channel::<(u64, Request)>();
        let (rep_tx, rep_rx) = mpsc::channel::<Tagged>();
        let worker = thread::Builder::new()
            .name(format!("agent-{name}"))
            .spawn(move || worker_loop(agent, req_rx, rep_tx))
            .map_err(|_| CallError::Disconnected)?;
        let mut runner = AgentRunner {
            name,
            tx: Some(req_tx),
            rx: rep_rx,
            seq: 0,
            worker: Some(worker),
            finalized: false,
        };
        // sequence 0 is the initialize_agent answer sent by the worker itself
        runner.wait_for(0, init_timeout)?;
        Ok(runner)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn send(&mut self, req: Request) -> Result<u64, CallError> {
        self.seq += 1;
        self.tx
            .as_ref()
            .ok_or(CallError::Disconnected)?
            .send((self.seq, req))
            .map_err(|_| CallError::Disconnected)?;
        Ok(self.seq)
    }

    fn wait_for(&mut self, seq: u64, timeout: Duration) -> Result<Reply, CallError> {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.rx.recv_timeout(left) {
                Ok((s, reply)) if s == seq => return reply,
                Ok(_) => continue,
                Err(RecvTimeoutError::Timeout) => return Err(CallError::Timeout(timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(CallError::Disconnected),
            }
        }
    }

    fn call(&mut self, req: Request, timeout: Duration) -> Result<Reply, CallError> {
        let seq = self.send(req)?;
        self.wait_for(seq, timeout)
    }

    pub fn initialize_game(&mut self, ctx: GameContext, timeout: Duration) -> Result<(), CallError> {
        self.call(Request::InitializeGame(Box::new(ctx)), timeout).map(|_| ())
    }

    /// Asks for a move, waiting at most `cap`. Returns the action and the
    /// measured wall-clock time of the wait.
    pub fn get_move(
        &mut self,
        obs: Observation,
        time_left: Duration,
        cap: Duration,
    ) -> (Result<Action, CallError>, Duration) {
        let start = Instant::now();
        let out = self
            .call(Request::GetMove(Box::new(obs), time_left), cap)
            .and_then(|r| match r {
                Reply::Move(a) => Ok(a),
                Reply::Done => Err(CallError::Disconnected),
            });
        (out, start.elapsed())
    }

    pub fn finalize_game(&mut self, result: GameResult, timeout: Duration) -> Result<(), CallError> {
        self.call(Request::FinalizeGame(result), timeout).map(|_| ())
    }

    /// Runs `finalize_agent` and stops the worker.
    pub fn finish(mut self, timeout: Duration) -> Result<(), CallError> {
        self.finalized = true;
        let out = self.call(Request::FinalizeAgent, timeout).map(|_| ());
        self.tx = None;
        if out.is_ok() {
            if let Some(w) = self.worker.take() {
                let _ = w.join();
            }
        }
        out
    }
}

impl Drop for AgentRunner {
    fn drop(&mut self) {
        if !self.finalized {
            if let Ok(seq) = self.send(Request::FinalizeAgent) {
                let _ = self.wait_for(seq, Duration::from_secs(1));
            }
        }
        // A hung worker is left detached rather than joined.
        self.tx = None;
    }
}

fn worker_loop(mut agent: Box<dyn Agent>, rx: Receiver<(u64, Request)>, tx: Sender<Tagged>) {
    let guarded = |agent: &mut Box<dyn Agent>, f: &mut dyn FnMut(&mut Box<dyn Agent>) -> Result<Reply, AgentError>| {
        match catch_unwind(AssertUnwindSafe(|| f(agent))) {
            Ok(Ok(r)) => Ok(r),
            Ok(Err(e)) => Err(CallError::Agent(e)),
            Err(p) => Err(CallError::Panicked(panic_message(p))),
        }
    };
    let init = guarded(&mut agent, &mut |a| a.initialize_agent().map(|_| Reply::Done));
    if tx.send((0, init)).is_err() {
        return;
    }
    while let Ok((seq, req)) = rx.recv() {
        let stop = matches!(req, Request::FinalizeAgent);
        let mut req = Some(req);
        let reply = guarded(&mut agent, &mut |a| match req.take().expect("request handled once") {
            Request::InitializeGame(ctx) => a.initialize_game(&ctx).map(|_| Reply::Done),
            Request::GetMove(obs, left) => a.get_move(&obs, left).map(Reply::Move),
            Request::FinalizeGame(r) => a.finalize_game(&r).map(|_| Reply::Done),
            Request::FinalizeAgent => a.finalize_agent().map(|_| Reply::Done),
        });
        if tx.send((seq, reply)).is_err() || stop {
            return;
        }
    }
}
