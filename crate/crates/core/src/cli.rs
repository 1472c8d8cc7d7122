//! Command-line front end.
//!
//! Exit codes: 0 on success or agreement, 1 on a differential mismatch or
//! an exceeded gap threshold, 2 on usage and I/O errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::differential::{fuzz, Machine};
use crate::lang::{gen_all_equal, gen_negative, gen_positive, NegativeKind, MAX_GEN_N};
use crate::runtime::{max_gap, mean_gap, real_time_report, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CSV_HEADER: &str = "n,input_len,verdict,total_steps,max_gap,mean_gap,node_count,max_degree,max_in_degree";

#[derive(Debug, Parser)]
#[command(name = "kumsim", version, about = "Pointer-machine simulator and real-time recognizers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate instance strings, one per line.
    Gen {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// positive, all-equal, or a negative kind (value-mismatch,
        /// wrong-block-length, wrong-block-count, missing-separator,
        /// bad-suffix, bad-alphabet, truncated-tail).
        #[arg(long, default_value = "positive")]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a machine on each input line: verdict, total steps, max gap.
    Run {
        #[arg(long, value_enum, default_value_t = MachineArg::Kum)]
        machine: MachineArg,
        /// Input file, or "-" for standard input.
        #[arg(default_value = "-")]
        input: String,
    },
    /// Generate instances over a range of n and emit one CSV row per run.
    Profile {
        #[arg(long, value_enum, default_value_t = MachineArg::Kum)]
        machine: MachineArg,
        /// Single n or inclusive range such as 2-12.
        #[arg(long, default_value = "2-12", value_parser = parse_n_range)]
        n: (u32, u32),
        #[arg(long, default_value_t = 10)]
        per_n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Family::Positive)]
        family: Family,
        /// CSV destination; standard output if absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Exit 1 if any run's max gap exceeds this real-time constant.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threshold: Option<u64>,
    },
    /// Compare machines against the oracle on a seeded mixed corpus.
    Fuzz {
        #[arg(long, value_enum, value_delimiter = ',', default_value = "kum,smm")]
        machines: Vec<MachineArg>,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=MAX_GEN_N as i64))]
        max_n: u32,
    },
    /// Graph statistics for each input line, as JSON.
    Stats {
        #[arg(long, value_enum, default_value_t = MachineArg::Kum)]
        machine: MachineArg,
        #[arg(default_value = "-")]
        input: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MachineArg {
    Kum,
    Smm,
    Oracle,
    #[value(hide = true)]
    KumCorrupted,
}

impl From<MachineArg> for Machine {
    fn from(m: MachineArg) -> Machine {
        match m {
            MachineArg::Kum => Machine::Kum,
            MachineArg::Smm => Machine::Smm,
            MachineArg::Oracle => Machine::Oracle,
            MachineArg::KumCorrupted => Machine::KumCorrupted,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Positive,
    AllEqual,
}

fn parse_n_range(s: &str) -> Result<(u32, u32), String> {
    let bound = |t: &str| -> Result<u32, String> {
        let n: u32 = t.trim().parse().map_err(|_| format!("not a number: {t}"))?;
        if (1..=MAX_GEN_N).contains(&n) {
            Ok(n)
        } else {
            Err(format!("n must be in 1..={MAX_GEN_N}"))
        }
    };
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (bound(a)?, bound(b)?),
        None => {
            let n = bound(s)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_cli(args, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` and runs the command against the given streams.
pub fn run_cli<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
                return EXIT_OK;
            }
            let _ = write!(err, "{text}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, stdin, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cmd: Command, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, String> {
    match cmd {
        Command::Gen { n, count, kind, seed, out: path } => {
            let mut sink = output(path, out)?;
            cmd_gen(n, count, &kind, seed, &mut sink)?;
            sink.flush().map_err(|e| e.to_string())?;
            Ok(EXIT_OK)
        }
        Command::Run { machine, input } => {
            for_each_line(&input, stdin, |line| {
                let (verdict, result) = Machine::from(machine).run(line.as_bytes());
                let (steps, gap) = match result {
                    Some(r) => (r.trace.total_steps, max_gap(&r.trace).unwrap_or(0)),
                    None => (0, 0),
                };
                writeln!(out, "{verdict}\t{steps}\t{gap}")
            })?;
            Ok(EXIT_OK)
        }
        Command::Profile { machine, n, per_n, seed, family, csv, threshold } => {
            let mut sink = output(csv, out)?;
            let c = cmd_profile(machine.into(), n, per_n, seed, family, &mut sink)?;
            sink.flush().map_err(|e| e.to_string())?;
            Ok(match threshold {
                Some(t) if c > t => EXIT_MISMATCH,
                _ => EXIT_OK,
            })
        }
        Command::Fuzz { machines, cases, seed, max_n } => {
            let machines: Vec<Machine> = machines.into_iter().map(Machine::from).collect();
            let names: Vec<&str> = machines.iter().map(|m| m.name()).collect();
            match fuzz(&machines, cases, seed, max_n) {
                Ok(n) => {
                    writeln!(out, "ok\t{n} cases\t{}", names.join(",")).map_err(|e| e.to_string())?;
                    Ok(EXIT_OK)
                }
                Err(d) => {
                    let mut verdicts = format!("oracle={}", d.oracle);
                    for (m, v) in &d.verdicts {
                        verdicts.push_str(&format!("\t{m}={}", describe(*v)));
                    }
                    writeln!(out, "mismatch\tcase={}\tseed={seed}\tmax_n={max_n}\n{}\n{verdicts}", d.case, d.input)
                        .map_err(|e| e.to_string())?;
                    Ok(EXIT_MISMATCH)
                }
            }
        }
        Command::Stats { machine, input } => {
            for_each_line(&input, stdin, |line| {
                let (verdict, result) = Machine::from(machine).run(line.as_bytes());
                let row = StatsRow {
                    verdict: verdict.to_string(),
                    node_count: result.as_ref().map(|r| r.stats.node_count),
                    max_degree: result.as_ref().map(|r| r.stats.max_degree),
                    max_in_degree: result.as_ref().map(|r| r.stats.max_in_degree),
                };
                writeln!(out, "{}", serde_json::to_string(&row).expect("plain struct"))
            })?;
            Ok(EXIT_OK)
        }
    }
}

fn describe(v: Verdict) -> String {
    match v {
        Verdict::Accept => "accept".to_owned(),
        Verdict::Reject(r) => format!("reject({})", r.name()),
    }
}

#[derive(Serialize)]
struct StatsRow {
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    node_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_in_degree: Option<usize>,
}

fn output<'a>(path: Option<PathBuf>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, String> {
    match path {
        Some(p) => {
            let f = File::create(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(out)),
    }
}

fn for_each_line(
    input: &str,
    stdin: &mut dyn BufRead,
    mut f: impl FnMut(&str) -> io::Result<()>,
) -> Result<(), String> {
    let mut file;
    let reader: &mut dyn BufRead = if input == "-" {
        stdin
    } else {
        file = BufReader::new(File::open(input).map_err(|e| format!("{input}: {e}"))?);
        &mut file
    };
    for line in reader.lines() {
        let line = line.map_err(|e| e.to_string())?;
        f(&line).map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Writes `count` instances of the requested kind.
pub fn cmd_gen(n: u32, count: u64, kind: &str, seed: u64, out: &mut dyn Write) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let line = match kind {
            "positive" => gen_positive(n, &mut rng).map(|i| i.encode()),
            "all-equal" => gen_all_equal(n).map(|i| i.encode()),
            other => {
                let k = NegativeKind::from_name(other).ok_or_else(|| format!("unknown kind `{other}`"))?;
                gen_negative(n, k, &mut rng)
            }
        }
        .map_err(|e| e.to_string())?;
        writeln!(out, "{line}").map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Writes the CSV and returns the largest max gap seen.
pub fn cmd_profile(
    machine: Machine,
    (lo, hi): (u32, u32),
    per_n: u64,
    seed: u64,
    family: Family,
    out: &mut dyn Write,
) -> Result<u64, String> {
    let io = |e: io::Error| e.to_string();
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    let mut results = Vec::new();
    for n in lo..=hi {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(n));
        for _ in 0..per_n {
            let inst = match family {
                Family::Positive => gen_positive(n, &mut rng),
                Family::AllEqual => gen_all_equal(n),
            }
            .map_err(|e| e.to_string())?;
            let text = inst.encode();
            let (verdict, result) = machine.run(text.as_bytes());
            let row = match &result {
                Some(r) => format!(
                    "{n},{},{verdict},{},{},{:.3},{},{},{}",
                    text.len(),
                    r.trace.total_steps,
                    max_gap(&r.trace).unwrap_or(0),
                    mean_gap(&r.trace).unwrap_or(0.0),
                    r.stats.node_count,
                    r.stats.max_degree,
                    r.stats.max_in_degree
                ),
                None => format!("{n},{},{verdict},0,0,0.000,0,0,0", text.len()),
            };
            writeln!(out, "{row}").map_err(io)?;
            if let Some(r) = result {
                results.push((n, r));
            }
        }
    }
    if results.is_empty() {
        return Ok(0);
    }
    let report = real_time_report(results.iter().map(|(n, r)| (*n, r))).map_err(|e| e.to_string())?;
    Ok(report.c_observed)
}
