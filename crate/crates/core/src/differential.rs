//! Oracle-differential checking: machine selection, a seeded fuzz corpus,
//! and an exhaustive sweep over short strings.

use std::collections::HashSet;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::GraphConfig;
use crate::engine::StorageGraph;
use crate::kum::KumRecognizer;
use crate::lang::{self, all_instances, encoded_len, gen_negative, gen_positive, member, NegativeKind};
use crate::runtime::{run, Fault, Flow, Program, RejectReason, Registers, RunResult, Session, Symbol, Verdict};
use crate::smm::SmmRecognizer;

/// Wraps a recognizer and turns every acceptance into a rejection. Exists
/// so the fuzz harness can be shown to catch a broken machine.
#[derive(Clone, Copy, Debug, Default)]
pub struct Corrupted<P>(pub P);

impl<P: Program> Program for Corrupted<P> {
    type Control = P::Control;

    fn graph_config(&self) -> GraphConfig {
        self.0.graph_config()
    }

    fn register_names(&self) -> &'static [&'static str] {
        self.0.register_names()
    }

    fn on_start(&self, g: &mut StorageGraph, regs: &mut Registers) -> Result<P::Control, Fault> {
        self.0.on_start(g, regs)
    }

    fn on_symbol(&self, ctl: &mut P::Control, g: &mut StorageGraph, regs: &mut Registers, sym: Symbol) -> Result<Flow, Fault> {
        self.0.on_symbol(ctl, g, regs, sym)
    }

    fn on_end(&self, ctl: &mut P::Control, g: &mut StorageGraph, regs: &mut Registers) -> Result<Verdict, Fault> {
        Ok(match self.0.on_end(ctl, g, regs)? {
            Verdict::Accept => Verdict::Reject(RejectReason::Mismatch),
            v => v,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Machine {
    Kum,
    Smm,
    Oracle,
    /// The KUM recognizer wrapped in [`Corrupted`].
    KumCorrupted,
}

impl Machine {
    pub fn name(self) -> &'static str {
        match self {
            Machine::Kum => "kum",
            Machine::Smm => "smm",
            Machine::Oracle => "oracle",
            Machine::KumCorrupted => "kum-corrupted",
        }
    }

    /// Runs the machine. The oracle has no trace and yields `None`.
    pub fn run(self, input: &[u8]) -> (Verdict, Option<RunResult>) {
        let r = match self {
            Machine::Oracle => return (oracle_verdict(input), None),
            Machine::Kum => run(&KumRecognizer, input),
            Machine::Smm => run(&SmmRecognizer, input),
            Machine::KumCorrupted => run(&Corrupted(KumRecognizer), input),
        };
        let r = r.expect("shipped programs have valid configurations");
        (r.verdict, Some(r))
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The oracle's verdict, with a reason derived from the parse error.
pub fn oracle_verdict(input: &[u8]) -> Verdict {
    match lang::parse(input) {
        Ok(inst) if inst.is_member() => Verdict::Accept,
        Ok(_) => Verdict::Reject(RejectReason::Mismatch),
        Err(e) => Verdict::Reject(match e.kind {
            NegativeKind::BadAlphabet => RejectReason::BadAlphabet,
            NegativeKind::TruncatedTail => RejectReason::Truncated,
            NegativeKind::BadSuffix => RejectReason::BadSuffix,
            _ => RejectReason::Format,
        }),
    }
}

/// Where a fuzz case came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Positive,
    Negative(NegativeKind),
    Mutated,
    Soup,
}

/// The `index`-th case of the corpus for `seed`. Each case draws from its
/// own stream, so a case can be regenerated without the ones before it.
pub fn fuzz_case(seed: u64, index: u64, max_n: u32) -> (Origin, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.gen_range(1..=max_n.max(1));
    match rng.gen_range(0..10) {
        0..=2 => {
            let s = gen_positive(n, &mut rng).expect("n within generator range").encode();
            (Origin::Positive, s)
        }
        3..=5 => {
            let feasible: Vec<NegativeKind> = NegativeKind::ALL.into_iter().filter(|k| k.feasible_for(n)).collect();
            let kind = feasible[rng.gen_range(0..feasible.len())];
            let s = gen_negative(n, kind, &mut rng).expect("feasible kind");
            (Origin::Negative(kind), s)
        }
        6..=8 => {
            let base = gen_positive(n, &mut rng).expect("n within generator range").encode();
            (Origin::Mutated, mutate(base.into_bytes(), &mut rng))
        }
        _ => {
            let len = rng.gen_range(0..=48);
            let s = (0..len).map(|_| soup_byte(&mut rng)).collect();
            (Origin::Soup, String::from_utf8(s).expect("ascii"))
        }
    }
}

fn soup_byte<R: Rng>(rng: &mut R) -> u8 {
    if rng.gen_ratio(1, 50) {
        b'x'
    } else {
        b"01@#"[rng.gen_range(0..4)]
    }
}

/// One to three point edits: substitution, insertion or deletion.
fn mutate<R: Rng>(mut s: Vec<u8>, rng: &mut R) -> String {
    for _ in 0..rng.gen_range(1..=3) {
        let at = rng.gen_range(0..=s.len());
        match rng.gen_range(0..3) {
            0 if at < s.len() => s[at] = soup_byte(rng),
            1 => s.insert(at, soup_byte(rng)),
            _ if at < s.len() => {
                s.remove(at);
            }
            _ => s.push(soup_byte(rng)),
        }
    }
    String::from_utf8(s).expect("ascii")
}

/// A case on which some machine disagreed with the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub case: u64,
    pub input: String,
    pub oracle: Verdict,
    pub verdicts: Vec<(Machine, Verdict)>,
}

impl fmt::Display for Disagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}: {}\toracle={}", self.case, self.input, self.oracle)?;
        for (m, v) in &self.verdicts {
            write!(f, "\t{m}={v}")?;
            if let Verdict::Reject(r) = v {
                write!(f, "({})", r.name())?;
            }
        }
        Ok(())
    }
}

/// Acceptance must agree with the oracle, and a machine fault never counts
/// as agreement.
fn agrees(oracle: Verdict, v: Verdict) -> bool {
    v != Verdict::Reject(RejectReason::MachineFault) && oracle.is_accept() == v.is_accept()
}

/// Runs `cases` corpus entries through every machine; stops at the first
/// disagreement.
pub fn fuzz(machines: &[Machine], cases: u64, seed: u64, max_n: u32) -> Result<u64, Disagreement> {
    for case in 0..cases {
        let (_, input) = fuzz_case(seed, case, max_n);
        check_input(machines, case, &input)?;
    }
    Ok(cases)
}

pub fn check_input(machines: &[Machine], case: u64, input: &str) -> Result<(), Disagreement> {
    let oracle = oracle_verdict(input.as_bytes());
    let verdicts: Vec<(Machine, Verdict)> = machines.iter().map(|&m| (m, m.run(input.as_bytes()).0)).collect();
    if verdicts.iter().all(|&(_, v)| agrees(oracle, v)) {
        Ok(())
    } else {
        Err(Disagreement { case, input: input.to_owned(), oracle, verdicts })
    }
}

/// Object-safe handle on a running session, so a sweep can drive several
/// programs with different control types side by side.
trait Live {
    fn fork(&self) -> Box<dyn Live + '_>;
    fn feed(&mut self, b: u8) -> bool;
    fn halted(&self) -> bool;
    fn result_at_end(&self) -> RunResult;
}

impl<P: Program> Live for Session<'_, P> {
    fn fork(&self) -> Box<dyn Live + '_> {
        Box::new(self.clone())
    }

    fn feed(&mut self, b: u8) -> bool {
        Session::feed(self, b).is_some()
    }

    fn halted(&self) -> bool {
        self.verdict().is_some()
    }

    fn result_at_end(&self) -> RunResult {
        self.clone().finish()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub max_len: usize,
    /// Strings whose verdicts were checked, directly or through a pruned
    /// subtree.
    pub strings: u64,
    /// Prefixes on which some machine was still running.
    pub live_prefixes: u64,
    /// Members of length at most `max_len`.
    pub members: usize,
    /// Largest degree seen per machine (KUM first, then SMM).
    pub max_degree: Vec<usize>,
    /// Runs that ended in a machine fault.
    pub faults: u64,
    /// Hash over every verdict, trace and stats in visiting order; equal
    /// across repeated sweeps iff the machines behaved identically.
    pub digest: u64,
    pub disagreements: Vec<String>,
}

/// Strings over the four-symbol alphabet of length `<= depth`, counting the
/// empty one.
fn subtree_size(depth: usize) -> u64 {
    (0..=depth as u32).map(|d| 4u64.pow(d)).sum()
}

/// Checks KUM, SMM and `member` against each other on every string over
/// `{0,1,@,#}` of length at most `max_len`.
///
/// Prefixes are explored depth-first with forked sessions. Once every
/// machine has rejected a prefix, all its extensions are rejected too; the
/// subtree is then settled by checking that no member of length at most
/// `max_len` extends the prefix. The member set comes from enumerating
/// every instance small enough to fit, and `member` is checked against it
/// on every prefix the machines still run on.
pub fn exhaustive_sweep(max_len: usize) -> SweepReport {
    let mut members: HashSet<Vec<u8>> = HashSet::new();
    for n in 1.. {
        if encoded_len(n) > max_len {
            break;
        }
        members.extend(all_instances(n).filter(|i| i.is_member()).map(|i| i.encode().into_bytes()));
    }
    let mut prefixes: HashSet<Vec<u8>> = HashSet::new();
    for m in &members {
        for j in 0..=m.len() {
            prefixes.insert(m[..j].to_vec());
        }
    }
    let kum = KumRecognizer;
    let smm = SmmRecognizer;
    let roots: Vec<Box<dyn Live + '_>> = vec![
        Box::new(Session::new(&kum).expect("valid program")),
        Box::new(Session::new(&smm).expect("valid program")),
    ];
    let mut report = SweepReport { max_len, members: members.len(), max_degree: vec![0; 2], ..SweepReport::default() };
    let mut prefix = Vec::with_capacity(max_len);
    let mut hasher = DefaultHasher::new();
    sweep(&roots, &mut prefix, max_len, &members, &prefixes, &mut report, &mut hasher);
    report.digest = hasher.finish();
    report
}

fn tally(report: &mut SweepReport, hasher: &mut DefaultHasher, i: usize, r: &RunResult) {
    r.verdict.hash(hasher);
    r.trace.hash(hasher);
    r.stats.hash(hasher);
    report.max_degree[i] = report.max_degree[i].max(r.stats.max_degree);
    if r.verdict == Verdict::Reject(RejectReason::MachineFault) {
        report.faults += 1;
    }
}

fn sweep(
    sessions: &[Box<dyn Live + '_>],
    prefix: &mut Vec<u8>,
    max_len: usize,
    members: &HashSet<Vec<u8>>,
    prefixes: &HashSet<Vec<u8>>,
    report: &mut SweepReport,
    hasher: &mut DefaultHasher,
) {
    prefix.hash(hasher);
    if sessions.iter().all(|s| s.halted()) {
        for (i, s) in sessions.iter().enumerate() {
            tally(report, hasher, i, &s.result_at_end());
        }
        report.strings += subtree_size(max_len - prefix.len());
        if prefixes.contains(prefix.as_slice()) {
            note(report, format!("{}: rejected early, but a member extends it", show(prefix)));
        }
        return;
    }
    report.live_prefixes += 1;
    report.strings += 1;
    let expected = members.contains(prefix.as_slice());
    if member(prefix) != expected {
        note(report, format!("{}: member() disagrees with enumeration", show(prefix)));
    }
    for (i, s) in sessions.iter().enumerate() {
        let r = s.result_at_end();
        tally(report, hasher, i, &r);
        if r.verdict.is_accept() != expected {
            note(report, format!("{}: machine {i} verdict differs from oracle", show(prefix)));
        }
    }
    if prefix.len() == max_len {
        return;
    }
    for &b in b"01@#" {
        let forked: Vec<Box<dyn Live + '_>> = sessions
            .iter()
            .map(|s| {
                let mut f = s.fork();
                f.feed(b);
                f
            })
            .collect();
        prefix.push(b);
        sweep(&forked, prefix, max_len, members, prefixes, report, hasher);
        prefix.pop();
    }
}

fn note(report: &mut SweepReport, msg: String) {
    if report.disagreements.len() < 20 {
        report.disagreements.push(msg);
    }
}

fn show(s: &[u8]) -> String {
    if s.is_empty() {
        "<empty>".to_owned()
    } else {
        String::from_utf8_lossy(s).into_owned()
    }
}
