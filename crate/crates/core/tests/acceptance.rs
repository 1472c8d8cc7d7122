//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kumsim::differential::{exhaustive_sweep, oracle_verdict, Machine};
use kumsim::kum::{KumRecognizer, KumSnapshot, DEGREE_BOUND};
use kumsim::lang::{gen_all_equal, gen_negative, gen_positive, member, parse, NegativeKind};
use kumsim::runtime::{assert_real_time, max_gap, real_time_report, run, Program, RunResult, Session};
use kumsim::smm::{SmmRecognizer, SmmSnapshot};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAP_GOLDEN: &str = include_str!("data/realtime_golden.json");
const GAP_CEILING: u64 = 64;

/// Runs twice and compares serialized traces and stats; every run in the
/// suite goes through here so determinism is checked on all of them.
struct Runner {
    runs: Cell<u64>,
    nondeterministic: Cell<u64>,
    max_kum_degree: Cell<usize>,
    faults: Cell<u64>,
}

impl Runner {
    fn new() -> Self {
        Runner { runs: Cell::new(0), nondeterministic: Cell::new(0), max_kum_degree: Cell::new(0), faults: Cell::new(0) }
    }

    fn run<P: Program>(&self, p: &P, input: &[u8], kum: bool) -> RunResult {
        let a = run(p, input).expect("valid program");
        let b = run(p, input).expect("valid program");
        self.runs.set(self.runs.get() + 1);
        if serde_json::to_vec(&a).unwrap() != serde_json::to_vec(&b).unwrap() {
            self.nondeterministic.set(self.nondeterministic.get() + 1);
        }
        if kum {
            self.max_kum_degree.set(self.max_kum_degree.get().max(a.stats.max_degree));
        }
        if a.fault.is_some() {
            self.faults.set(self.faults.get() + 1);
        }
        a
    }

    fn kum(&self, input: &[u8]) -> RunResult {
        self.run(&KumRecognizer, input, true)
    }

    fn smm(&self, input: &[u8]) -> RunResult {
        self.run(&SmmRecognizer, input, false)
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn pinned(key: &str) -> u64 {
    let v: serde_json::Value = serde_json::from_str(GAP_GOLDEN).expect("golden file is JSON");
    v[key].as_u64().expect("golden value")
}

fn criterion_1(r: &Runner, sweep_digest: &mut u64) -> Outcome {
    let start = Instant::now();
    let sweep = exhaustive_sweep(14);
    *sweep_digest = sweep.digest;
    let mut bad = sweep.disagreements.clone();
    if sweep.strings != (0..=14u32).map(|d| 4u64.pow(d)).sum::<u64>() {
        bad.push(format!("sweep covered {} strings", sweep.strings));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut cases = 0;
    for n in 2..=8u32 {
        let kinds: Vec<NegativeKind> = NegativeKind::ALL.into_iter().filter(|k| k.feasible_for(n)).collect();
        for i in 0..500 {
            // Half positive, the rest cycling through every feasible defect.
            let text = if i % 2 == 0 {
                gen_positive(n, &mut rng).unwrap().encode()
            } else {
                gen_negative(n, kinds[(i / 2) % kinds.len()], &mut rng).unwrap()
            };
            let want = member(text.as_bytes());
            let k = r.kum(text.as_bytes()).verdict.is_accept();
            let s = r.smm(text.as_bytes()).verdict.is_accept();
            if k != want || s != want {
                bad.push(format!("n={n}: {text} kum={k} smm={s} member={want}"));
            }
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        bad.push(format!("took {elapsed:?}"));
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} strings of length <= 14 ({} live prefixes, {} members) + {cases} generator cases, {} disagreements, {:.1?}{}",
            sweep.strings,
            sweep.live_prefixes,
            sweep.members,
            bad.len(),
            elapsed,
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
    .with_sweep(sweep.max_degree[0], sweep.faults, r)
}

impl Outcome {
    /// Folds the sweep's degree and fault counts into the shared tallies
    /// used by criterion 3.
    fn with_sweep(self, kum_degree: usize, faults: u64, r: &Runner) -> Outcome {
        r.max_kum_degree.set(r.max_kum_degree.get().max(kum_degree));
        r.faults.set(r.faults.get() + faults);
        self
    }
}

fn criterion_2(r: &Runner) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2ea1);
    let mut per_machine: BTreeMap<&str, Vec<(u32, RunResult)>> = BTreeMap::new();
    let mut rejected = 0;
    for n in [2u32, 4, 6, 8, 10, 12] {
        for _ in 0..50 {
            let text = gen_positive(n, &mut rng).unwrap().encode();
            for (name, res) in [("kum", r.kum(text.as_bytes())), ("smm", r.smm(text.as_bytes()))] {
                if !res.verdict.is_accept() {
                    rejected += 1;
                }
                per_machine.entry(name).or_default().push((n, res));
            }
        }
    }
    let mut pass = rejected == 0;
    let mut detail = Vec::new();
    for (name, key) in [("kum", "g_kum"), ("smm", "g_smm")] {
        let results = &per_machine[name];
        let report = real_time_report(results.iter().map(|(n, res)| (*n, res))).unwrap();
        let gaps: Vec<(u32, u64)> = report.per_n.iter().map(|(n, s)| (*n, s.max_gap)).collect();
        // Every run, not just the per-n maximum, must hit the same constant.
        let mut per_run: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
        for (n, res) in results {
            let g = max_gap(&res.trace).unwrap();
            let e = per_run.entry(*n).or_insert((g, g));
            e.0 = e.0.min(g);
            e.1 = e.1.max(g);
        }
        let c = report.c_observed;
        let constant = per_run.iter().filter(|(n, _)| **n >= 4).all(|(_, &(lo, hi))| lo == c && hi == c);
        let n2_ok = per_run.get(&2).is_some_and(|&(_, hi)| hi <= c);
        let golden = pinned(key);
        pass &= constant && n2_ok && assert_real_time(&report, GAP_CEILING) && c <= golden;
        detail.push(format!("{key}={c} (golden {golden}, per-n {gaps:?})"));
    }
    let (gk, gs) = (pinned("g_kum"), pinned("g_smm"));
    pass &= gs <= gk;
    outcome(pass, format!("{}; {rejected} positives rejected", detail.join("; ")))
}

fn criterion_3(r: &Runner) -> Outcome {
    let d = r.max_kum_degree.get();
    let f = r.faults.get();
    outcome(d <= DEGREE_BOUND && f == 0, format!("KUM max_degree {d} (bound {DEGREE_BOUND}), {f} machine faults"))
}

fn criterion_4(r: &Runner) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut seen = Vec::new();
    for n in [4u32, 8, 12] {
        let text = gen_all_equal(n).unwrap().encode();
        let s = r.smm(text.as_bytes());
        let k = r.kum(text.as_bytes());
        pass &= s.stats.max_in_degree == 1 << n && s.stats.max_degree <= 3 && k.stats.max_degree <= DEGREE_BOUND;
        pass &= s.verdict.is_accept() && k.verdict.is_accept();
        seen.push(format!("n={n}: smm in-degree {} / kum degree {}", s.stats.max_in_degree, k.stats.max_degree));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    outcome(pass, format!("{}, {elapsed:.1?}", seen.join("; ")))
}

fn criterion_5(r: &Runner) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c5);
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in 2..=8u32 {
        for _ in 0..20 {
            let text = gen_positive(n, &mut rng).unwrap().encode();
            // The oracle's count comes from the parsed text, not the generator.
            let distinct = parse(text.as_bytes()).unwrap().distinct_values();
            let cut = text.match_indices('#').nth(1).unwrap().0 + 1;
            let prefix = &text.as_bytes()[..cut];
            let kum = after(&KumRecognizer, prefix, |s| KumSnapshot::capture(s.graph(), s.registers()).unwrap());
            let smm = after(&SmmRecognizer, prefix, |s| SmmSnapshot::capture(s.graph(), s.registers()).unwrap());
            let full = 1usize << n;
            if kum.a_leaves != full || kum.b_lower_leaves != full || kum.b_upper_leaves != distinct {
                bad.push(format!("kum n={n}: {kum:?} vs 2^n={full}, distinct={distinct}"));
            }
            if smm.t_leaves != full || smm.reps != distinct {
                bad.push(format!("smm n={n}: {smm:?}"));
            }
            r.runs.set(r.runs.get() + 1);
            checked += 1;
        }
    }
    outcome(bad.is_empty(), format!("{checked} instances, {} mismatches{}", bad.len(), first(&bad)))
}

/// Feeds `input` to a fresh session twice and inspects the state, counting
/// a determinism failure if the two snapshots differ.
fn after<P: Program, T: PartialEq>(p: &P, input: &[u8], look: impl Fn(&Session<'_, P>) -> T) -> T {
    let once = || {
        let mut s = Session::new(p).unwrap();
        for &b in input {
            assert!(s.feed(b).is_none(), "halted before the y-phase");
        }
        look(&s)
    };
    let (a, b) = (once(), once());
    assert!(a == b, "snapshots differ between identical runs");
    a
}

fn criterion_6(r: &Runner) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a6);
    let mut bad = Vec::new();
    let mut prefixes = 0;
    for i in 0..100 {
        let n = rng.gen_range(2..=6);
        let text = if i % 4 == 3 {
            gen_negative(n, NegativeKind::ValueMismatch, &mut rng).unwrap()
        } else {
            gen_positive(n, &mut rng).unwrap().encode()
        };
        let bytes = text.as_bytes();
        let full_k = r.kum(bytes);
        let full_s = r.smm(bytes);
        for j in 0..=bytes.len() {
            for (name, full, cut) in [("kum", &full_k, r.kum(&bytes[..j])), ("smm", &full_s, r.smm(&bytes[..j]))] {
                let m = j.min(full.trace.events.len());
                let take = m.min(cut.trace.events.len());
                if take < m || cut.trace.events[..m] != full.trace.events[..m] {
                    bad.push(format!("{name}: {text} cut at {j}"));
                }
            }
            prefixes += 1;
        }
    }
    outcome(bad.is_empty(), format!("100 instances, {prefixes} truncations, {} divergent{}", bad.len(), first(&bad)))
}

fn criterion_7(r: &Runner, sweep_digest: u64) -> Outcome {
    let again = exhaustive_sweep(14).digest;
    let nd = r.nondeterministic.get() + u64::from(again != sweep_digest);
    outcome(nd == 0, format!("{} runs repeated plus the full sweep, {nd} differences", r.runs.get()))
}

fn criterion_8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_kumsim");
    let corrupted = Command::new(bin)
        .args(["fuzz", "--machines", "kum-corrupted", "--cases", "10000", "--seed", "8"])
        .output()
        .expect("spawn kumsim");
    let text = String::from_utf8_lossy(&corrupted.stdout).into_owned();
    let reproducer = text.lines().nth(1).unwrap_or("").to_owned();
    // The reproducer must be a real member that the corrupted build rejects.
    let reproduces = member(reproducer.as_bytes())
        && oracle_verdict(reproducer.as_bytes()).is_accept()
        && !Machine::KumCorrupted.run(reproducer.as_bytes()).0.is_accept();
    let healthy = Command::new(bin).args(["fuzz", "--cases", "10000", "--seed", "8"]).output().expect("spawn kumsim");
    let healthy_out = String::from_utf8_lossy(&healthy.stdout).trim().to_owned();
    let pass = corrupted.status.code() == Some(1) && reproduces && healthy.status.code() == Some(0);
    outcome(
        pass,
        format!(
            "corrupted exit {:?} reproducer {reproducer:?}; real build exit {:?} ({healthy_out})",
            corrupted.status.code(),
            healthy.status.code()
        ),
    )
}

fn first(bad: &[String]) -> String {
    bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
}

fn main() -> ExitCode {
    let r = Runner::new();
    let mut digest = 0;
    let mut results = Vec::new();
    let mut check = |id: u32, name: &str, o: Outcome| {
        println!("{} [{id}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push(o.pass);
    };
    check(1, "oracle equivalence", criterion_1(&r, &mut digest));
    check(2, "real-time bound", criterion_2(&r));
    check(3, "degree invariant", criterion_3(&r));
    check(4, "in-degree separation", criterion_4(&r));
    check(5, "structural counts", criterion_5(&r));
    check(6, "streaming prefix", criterion_6(&r));
    check(7, "determinism", criterion_7(&r, digest));
    check(8, "fuzz self-test", criterion_8());
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
