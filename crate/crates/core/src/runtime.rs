//! Streaming driver for machine programs.
//!
//! A [`Session`] owns the input cursor: symbols reach a [`Program`] strictly
//! left to right, one call per symbol, and the session records how many
//! graph primitives ran between consecutive external events (symbol reads
//! and the final halt). Those gaps are what the real-time meter inspects.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EngineError, GraphConfig, GraphStats, NodeRef, StorageGraph};

pub const MAX_REGISTERS: usize = 32;

/// One letter of the input alphabet `{0, 1, @, #}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    At,
    Hash,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::Zero, Symbol::One, Symbol::At, Symbol::Hash];

    pub fn from_byte(b: u8) -> Option<Symbol> {
        match b {
            b'0' => Some(Symbol::Zero),
            b'1' => Some(Symbol::One),
            b'@' => Some(Symbol::At),
            b'#' => Some(Symbol::Hash),
            _ => None,
        }
    }

    pub fn as_byte(self) -> u8 {
        match self {
            Symbol::Zero => b'0',
            Symbol::One => b'1',
            Symbol::At => b'@',
            Symbol::Hash => b'#',
        }
    }

    /// The bit carried by a data symbol.
    pub fn bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// A block separator arrived before or after the counter walk finished.
    Pacing,
    /// Structurally malformed input (block count, stray separator, ...).
    Format,
    /// Input ended before the final `#`.
    Truncated,
    /// Symbols after the final `#`.
    BadSuffix,
    /// A byte outside `{0, 1, @, #}`.
    BadAlphabet,
    /// Well-formed but `b_x != b_y`, or an index path is absent.
    Mismatch,
    /// The program broke an engine invariant. Never a property of the input.
    MachineFault,
}

impl RejectReason {
    pub fn name(self) -> &'static str {
        match self {
            RejectReason::Pacing => "pacing",
            RejectReason::Format => "format",
            RejectReason::Truncated => "truncated",
            RejectReason::BadSuffix => "bad_suffix",
            RejectReason::BadAlphabet => "bad_alphabet",
            RejectReason::Mismatch => "mismatch",
            RejectReason::MachineFault => "machine_fault",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("accept"),
            Verdict::Reject(_) => f.write_str("reject"),
        }
    }
}

/// What a symbol handler asks of the driver. Acceptance is only possible at
/// end of input, so there is no early `Accept`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Reject(RejectReason),
}

/// A program bug surfaced while running. Reported as
/// [`RejectReason::MachineFault`], never as an input rejection.
#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
pub enum Fault {
    #[error("engine: {0}")]
    Engine(#[serde(serialize_with = "display")] EngineError),
    #[error("register `{0}` is empty")]
    EmptyRegister(&'static str),
    #[error("broken invariant: {0}")]
    Invariant(&'static str),
}

fn display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl From<EngineError> for Fault {
    fn from(e: EngineError) -> Self {
        Fault::Engine(e)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("invalid graph configuration: {0}")]
    Graph(#[from] EngineError),
    #[error("{0} registers requested, at most {MAX_REGISTERS} allowed")]
    TooManyRegisters(usize),
    #[error("trace has no events")]
    EmptyTrace,
    #[error("no results to report on")]
    EmptyReport,
}

/// Index of a named register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Reg(pub usize);

/// The machine's finitely many distinguished node handles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Registers {
    names: &'static [&'static str],
    slots: Vec<Option<NodeRef>>,
}

impl Registers {
    pub fn new(names: &'static [&'static str]) -> Result<Self, RuntimeError> {
        if names.len() > MAX_REGISTERS {
            return Err(RuntimeError::TooManyRegisters(names.len()));
        }
        Ok(Registers { names, slots: vec![None; names.len()] })
    }

    pub fn names(&self) -> &'static [&'static str] {
        self.names
    }

    pub fn lookup(&self, name: &str) -> Option<Reg> {
        self.names.iter().position(|&n| n == name).map(Reg)
    }

    /// The node held in `r`, or a fault naming the empty register.
    pub fn node(&self, r: Reg) -> Result<NodeRef, Fault> {
        self.slots[r.0].ok_or(Fault::EmptyRegister(self.names[r.0]))
    }
}

impl Index<Reg> for Registers {
    type Output = Option<NodeRef>;

    fn index(&self, r: Reg) -> &Option<NodeRef> {
        &self.slots[r.0]
    }
}

impl IndexMut<Reg> for Registers {
    fn index_mut(&mut self, r: Reg) -> &mut Option<NodeRef> {
        &mut self.slots[r.0]
    }
}

/// An online recognizer over `{0, 1, @, #}`.
///
/// Handlers touch memory only through graph primitives and the register
/// file. Everything else a program remembers lives in `Control`, which must
/// be finite-state: enums, flags and bounded counters, never a quantity that
/// grows with the input. A program value holds no per-run state, so one
/// value can drive any number of runs.
pub trait Program {
    type Control: Clone + fmt::Debug + PartialEq;

    fn graph_config(&self) -> GraphConfig;

    fn register_names(&self) -> &'static [&'static str];

    fn on_start(&self, g: &mut StorageGraph, regs: &mut Registers) -> Result<Self::Control, Fault>;

    fn on_symbol(
        &self,
        ctl: &mut Self::Control,
        g: &mut StorageGraph,
        regs: &mut Registers,
        sym: Symbol,
    ) -> Result<Flow, Fault>;

    fn on_end(
        &self,
        ctl: &mut Self::Control,
        g: &mut StorageGraph,
        regs: &mut Registers,
    ) -> Result<Verdict, Fault>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ReadSymbol,
    Halt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub position: usize,
    /// Primitives executed since the previous event (or since the run began).
    pub gap: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Trace {
    pub events: Vec<Event>,
    pub total_steps: u64,
}

impl Trace {
    pub fn gaps(&self) -> impl Iterator<Item = u64> + '_ {
        self.events.iter().map(|e| e.gap)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub verdict: Verdict,
    pub trace: Trace,
    pub stats: GraphStats,
    /// Detail for `Reject(MachineFault)`.
    pub fault: Option<Fault>,
}

/// A run in progress. Cloning a session forks it, which lets a harness
/// explore every continuation of a shared prefix.
pub struct Session<'p, P: Program> {
    program: &'p P,
    graph: StorageGraph,
    regs: Registers,
    control: Option<P::Control>,
    events: Vec<Event>,
    mark: u64,
    delivered: usize,
    outcome: Option<(Verdict, Option<Fault>)>,
}

impl<P: Program> Clone for Session<'_, P> {
    fn clone(&self) -> Self {
        Session {
            program: self.program,
            graph: self.graph.clone(),
            regs: self.regs.clone(),
            control: self.control.clone(),
            events: self.events.clone(),
            mark: self.mark,
            delivered: self.delivered,
            outcome: self.outcome.clone(),
        }
    }
}

impl<'p, P: Program> Session<'p, P> {
    /// Fresh graph, empty registers, then the program's start handler.
    pub fn new(program: &'p P) -> Result<Self, RuntimeError> {
        let graph = StorageGraph::new(&program.graph_config())?;
        let regs = Registers::new(program.register_names())?;
        let mut s = Session {
            program,
            graph,
            regs,
            control: None,
            events: Vec::new(),
            mark: 0,
            delivered: 0,
            outcome: None,
        };
        match program.on_start(&mut s.graph, &mut s.regs) {
            Ok(ctl) => s.control = Some(ctl),
            Err(f) => s.halt(Verdict::Reject(RejectReason::MachineFault), Some(f)),
        }
        Ok(s)
    }

    pub fn graph(&self) -> &StorageGraph {
        &self.graph
    }

    pub fn registers(&self) -> &Registers {
        &self.regs
    }

    pub fn control(&self) -> Option<&P::Control> {
        self.control.as_ref()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Number of symbols handed to the program so far.
    pub fn delivered(&self) -> usize {
        self.delivered
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.outcome.as_ref().map(|(v, _)| *v)
    }

    fn halt(&mut self, v: Verdict, fault: Option<Fault>) {
        let now = self.graph.steps();
        self.events.push(Event { kind: EventKind::Halt, position: self.delivered, gap: now - self.mark });
        self.mark = now;
        self.outcome = Some((v, fault));
    }

    /// Delivers the next input byte. Returns the verdict once the run has
    /// halted; bytes offered after that are ignored.
    pub fn feed(&mut self, byte: u8) -> Option<Verdict> {
        if let Some((v, _)) = &self.outcome {
            return Some(*v);
        }
        let Some(sym) = Symbol::from_byte(byte) else {
            self.halt(Verdict::Reject(RejectReason::BadAlphabet), None);
            return self.verdict();
        };
        let now = self.graph.steps();
        self.events.push(Event { kind: EventKind::ReadSymbol, position: self.delivered, gap: now - self.mark });
        self.mark = now;
        self.delivered += 1;
        let ctl = self.control.as_mut().expect("running session has control state");
        match self.program.on_symbol(ctl, &mut self.graph, &mut self.regs, sym) {
            Ok(Flow::Continue) => None,
            Ok(Flow::Reject(r)) => {
                self.halt(Verdict::Reject(r), None);
                self.verdict()
            }
            Err(f) => {
                self.halt(Verdict::Reject(RejectReason::MachineFault), Some(f));
                self.verdict()
            }
        }
    }

    /// Signals end of input and collects the result.
    pub fn finish(mut self) -> RunResult {
        if self.outcome.is_none() {
            let ctl = self.control.as_mut().expect("running session has control state");
            match self.program.on_end(ctl, &mut self.graph, &mut self.regs) {
                Ok(v) => self.halt(v, None),
                Err(f) => self.halt(Verdict::Reject(RejectReason::MachineFault), Some(f)),
            }
        }
        let (verdict, fault) = self.outcome.take().expect("halted");
        RunResult {
            verdict,
            trace: Trace { events: self.events, total_steps: self.graph.steps() },
            stats: self.graph.stats(),
            fault,
        }
    }
}

/// Runs `program` over `input` from a fresh graph.
pub fn run<P: Program>(program: &P, input: &[u8]) -> Result<RunResult, RuntimeError> {
    let mut s = Session::new(program)?;
    for &b in input {
        if s.feed(b).is_some() {
            break;
        }
    }
    Ok(s.finish())
}

pub fn max_gap(trace: &Trace) -> Result<u64, RuntimeError> {
    trace.gaps().max().ok_or(RuntimeError::EmptyTrace)
}

pub fn mean_gap(trace: &Trace) -> Result<f64, RuntimeError> {
    if trace.events.is_empty() {
        return Err(RuntimeError::EmptyTrace);
    }
    Ok(trace.total_steps as f64 / trace.events.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub runs: usize,
    pub max_gap: u64,
    pub mean_gap: f64,
}

/// Empirical real-time constant over a batch of runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealTimeReport {
    pub per_n: BTreeMap<u32, SizeSummary>,
    /// Largest gap seen in any run.
    pub c_observed: u64,
    /// Every input size produced the same maximum gap.
    pub constant_in_n: bool,
}

pub fn real_time_report<'a, I>(results: I) -> Result<RealTimeReport, RuntimeError>
where
    I: IntoIterator<Item = (u32, &'a RunResult)>,
{
    // (runs, max, events, steps)
    let mut acc: BTreeMap<u32, (usize, u64, u64, u64)> = BTreeMap::new();
    for (n, r) in results {
        let g = max_gap(&r.trace)?;
        let e = acc.entry(n).or_default();
        e.0 += 1;
        e.1 = e.1.max(g);
        e.2 += r.trace.events.len() as u64;
        e.3 += r.trace.total_steps;
    }
    if acc.is_empty() {
        return Err(RuntimeError::EmptyReport);
    }
    let per_n: BTreeMap<u32, SizeSummary> = acc
        .into_iter()
        .map(|(n, (runs, max, events, steps))| {
            (n, SizeSummary { runs, max_gap: max, mean_gap: steps as f64 / events as f64 })
        })
        .collect();
    let c_observed = per_n.values().map(|s| s.max_gap).max().unwrap_or(0);
    let constant_in_n = per_n.values().all(|s| s.max_gap == c_observed);
    Ok(RealTimeReport { per_n, c_observed, constant_in_n })
}

/// True iff no observed gap exceeds `c`.
pub fn assert_real_time(report: &RealTimeReport, c: u64) -> bool {
    c >= 1 && report.c_observed <= c
}
