//! Ground truth for the block-equality language
//!
//! `L = { b_{0^n} @ ... @ b_{1^n} # x # y # : |b_i| = floor(n/2), |x| = |y| = n, b_x = b_y }`.
//!
//! Everything here works on plain values: [`parse`] and [`member`] decide
//! membership by evaluating the definition directly, and the generators
//! check their own output against [`member`] before returning it.

use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Largest `n` the generators will build (2^n blocks are materialized).
pub const MAX_GEN_N: u32 = 24;

/// Ways an input can fall outside `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeKind {
    /// Well-formed, but `b_x != b_y`.
    ValueMismatch,
    WrongBlockLength,
    WrongBlockCount,
    MissingSeparator,
    BadSuffix,
    BadAlphabet,
    TruncatedTail,
}

impl NegativeKind {
    pub const ALL: [NegativeKind; 7] = [
        NegativeKind::ValueMismatch,
        NegativeKind::WrongBlockLength,
        NegativeKind::WrongBlockCount,
        NegativeKind::MissingSeparator,
        NegativeKind::BadSuffix,
        NegativeKind::BadAlphabet,
        NegativeKind::TruncatedTail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NegativeKind::ValueMismatch => "value-mismatch",
            NegativeKind::WrongBlockLength => "wrong-block-length",
            NegativeKind::WrongBlockCount => "wrong-block-count",
            NegativeKind::MissingSeparator => "missing-separator",
            NegativeKind::BadSuffix => "bad-suffix",
            NegativeKind::BadAlphabet => "bad-alphabet",
            NegativeKind::TruncatedTail => "truncated-tail",
        }
    }

    pub fn from_name(s: &str) -> Option<NegativeKind> {
        NegativeKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn feasible_for(self, n: u32) -> bool {
        n >= 1 && (self != NegativeKind::ValueMismatch || n >= 2)
    }
}

impl fmt::Display for NegativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("{kind} at byte {position}")]
pub struct FormatError {
    /// Never [`NegativeKind::ValueMismatch`].
    pub kind: NegativeKind,
    pub position: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("n must be in 1..=63, got {0}")]
    BadN(u32),
    #[error("expected {expected} blocks, got {got}")]
    BlockCount { expected: usize, got: usize },
    #[error("block {index} does not fit in {k} bits")]
    BlockTooWide { index: usize, k: u32 },
    #[error("index {0} does not fit in n bits")]
    IndexTooWide(u64),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("n = {0} is outside 1..={MAX_GEN_N}")]
    BadN(u32),
    #[error("{kind} is infeasible for n = {n}")]
    Infeasible { kind: NegativeKind, n: u32 },
}

/// A structured member candidate. Block `i` is the block indexed by the
/// n-bit binary representation of `i`; blocks and indices are stored as
/// integers whose widths are `k = floor(n/2)` and `n` respectively.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InstanceL {
    n: u32,
    blocks: Vec<u64>,
    x: u64,
    y: u64,
}

impl InstanceL {
    pub fn new(n: u32, blocks: Vec<u64>, x: u64, y: u64) -> Result<Self, InstanceError> {
        if !(1..=63).contains(&n) {
            return Err(InstanceError::BadN(n));
        }
        let expected = 1usize
            .checked_shl(n)
            .ok_or(InstanceError::BadN(n))?;
        if blocks.len() != expected {
            return Err(InstanceError::BlockCount { expected, got: blocks.len() });
        }
        let k = n / 2;
        if let Some(index) = blocks.iter().position(|&b| b >> k != 0) {
            return Err(InstanceError::BlockTooWide { index, k });
        }
        for idx in [x, y] {
            if idx >> n != 0 {
                return Err(InstanceError::IndexTooWide(idx));
            }
        }
        Ok(InstanceL { n, blocks, x, y })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Block length `floor(n/2)`.
    pub fn k(&self) -> u32 {
        self.n / 2
    }

    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    pub fn is_member(&self) -> bool {
        self.blocks[self.x as usize] == self.blocks[self.y as usize]
    }

    pub fn distinct_values(&self) -> usize {
        let mut v = self.blocks.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    pub fn encode(&self) -> String {
        let k = self.k() as usize;
        let mut s = String::with_capacity(self.encoded_len());
        for (i, &b) in self.blocks.iter().enumerate() {
            if i > 0 {
                s.push('@');
            }
            push_bits(&mut s, b, k);
        }
        s.push('#');
        push_bits(&mut s, self.x, self.n as usize);
        s.push('#');
        push_bits(&mut s, self.y, self.n as usize);
        s.push('#');
        s
    }

    pub fn encoded_len(&self) -> usize {
        encoded_len(self.n)
    }
}

/// Length of any encoded instance of size `n`.
pub fn encoded_len(n: u32) -> usize {
    let count = 1usize << n;
    count * (n as usize / 2 + 1) + 2 * n as usize + 2
}

fn push_bits(s: &mut String, v: u64, width: usize) {
    for j in (0..width).rev() {
        s.push(if (v >> j) & 1 == 1 { '1' } else { '0' });
    }
}

fn bits_value(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b == b'1'))
}

fn is_bit(b: u8) -> bool {
    b == b'0' || b == b'1'
}

/// Parses a candidate string.
///
/// Errors name the first offending byte. An out-of-alphabet byte anywhere
/// wins over structural errors. An index field cut short by a separator or
/// by end of input is `TruncatedTail`; an index field running past `n` bits
/// is `MissingSeparator`.
pub fn parse(s: &[u8]) -> Result<InstanceL, FormatError> {
    let err = |kind, position| FormatError { kind, position };
    if let Some(p) = s.iter().position(|b| !matches!(b, b'0' | b'1' | b'@' | b'#')) {
        return Err(err(NegativeKind::BadAlphabet, p));
    }

    let mut pos = 0;
    let mut raw: Vec<&[u8]> = Vec::new();
    loop {
        let start = pos;
        while pos < s.len() && is_bit(s[pos]) {
            pos += 1;
        }
        if pos == s.len() {
            return Err(err(NegativeKind::TruncatedTail, pos));
        }
        let block = &s[start..pos];
        if let Some(first) = raw.first() {
            if block.len() != first.len() {
                return Err(err(NegativeKind::WrongBlockLength, start));
            }
        }
        raw.push(block);
        pos += 1;
        if s[pos - 1] == b'#' {
            break;
        }
    }

    let k = raw[0].len();
    let count = raw.len();
    let n = if count.is_power_of_two() { count.trailing_zeros() as usize } else { usize::MAX };
    if n == 0 || (n != 2 * k && n != 2 * k + 1) {
        return Err(err(NegativeKind::WrongBlockCount, pos - 1));
    }

    let mut index = || -> Result<u64, FormatError> {
        let start = pos;
        while pos < start + n {
            if pos == s.len() || !is_bit(s[pos]) {
                return Err(err(NegativeKind::TruncatedTail, pos));
            }
            pos += 1;
        }
        match s.get(pos) {
            None => Err(err(NegativeKind::TruncatedTail, pos)),
            Some(b'#') => {
                pos += 1;
                Ok(bits_value(&s[start..start + n]))
            }
            Some(_) => Err(err(NegativeKind::MissingSeparator, pos)),
        }
    };
    let x = index()?;
    let y = index()?;
    if pos != s.len() {
        return Err(err(NegativeKind::BadSuffix, pos));
    }

    let blocks = raw.iter().map(|b| bits_value(b)).collect();
    Ok(InstanceL::new(n as u32, blocks, x, y).expect("parsed fields satisfy instance invariants"))
}

/// Membership by direct evaluation of the definition.
pub fn member(s: &[u8]) -> bool {
    parse(s).map(|i| i.is_member()).unwrap_or(false)
}

fn check_n(n: u32) -> Result<(), GenError> {
    if (1..=MAX_GEN_N).contains(&n) {
        Ok(())
    } else {
        Err(GenError::BadN(n))
    }
}

fn random_blocks<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Vec<u64> {
    let k = n / 2;
    (0..1usize << n).map(|_| rng.gen_range(0..1u64 << k)).collect()
}

/// Uniform blocks, uniform `x`, and `y` uniform among indices whose block
/// equals `b_x`.
pub fn gen_positive<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<InstanceL, GenError> {
    check_n(n)?;
    let blocks = random_blocks(n, rng);
    let x = rng.gen_range(0..blocks.len());
    let cohort: Vec<usize> = (0..blocks.len()).filter(|&j| blocks[j] == blocks[x]).collect();
    let y = cohort[rng.gen_range(0..cohort.len())];
    let inst = InstanceL::new(n, blocks, x as u64, y as u64).expect("generated instance is valid");
    debug_assert!(member(inst.encode().as_bytes()));
    Ok(inst)
}

/// Every block is the all-zero string, `x = 0^n`, `y = 1^n`.
pub fn gen_all_equal(n: u32) -> Result<InstanceL, GenError> {
    check_n(n)?;
    let count = 1usize << n;
    Ok(InstanceL::new(n, vec![0; count], 0, count as u64 - 1).expect("valid"))
}

/// A string outside `L` exhibiting the requested defect.
pub fn gen_negative<R: Rng + ?Sized>(n: u32, kind: NegativeKind, rng: &mut R) -> Result<String, GenError> {
    check_n(n)?;
    if !kind.feasible_for(n) {
        return Err(GenError::Infeasible { kind, n });
    }
    loop {
        let s = negative_candidate(n, kind, rng);
        if !member(s.as_bytes()) {
            return Ok(s);
        }
    }
}

fn negative_candidate<R: Rng + ?Sized>(n: u32, kind: NegativeKind, rng: &mut R) -> String {
    let k = (n / 2) as usize;
    match kind {
        NegativeKind::ValueMismatch => {
            let blocks = random_blocks(n, rng);
            let x = rng.gen_range(0..blocks.len());
            let others: Vec<usize> = (0..blocks.len()).filter(|&j| blocks[j] != blocks[x]).collect();
            // All blocks equal: resample.
            let y = if others.is_empty() { x } else { others[rng.gen_range(0..others.len())] };
            InstanceL::new(n, blocks, x as u64, y as u64).expect("valid").encode()
        }
        NegativeKind::WrongBlockLength => {
            let inst = gen_positive(n, rng).expect("n checked");
            let mut blocks = split_blocks(&inst);
            let j = rng.gen_range(1..blocks.len());
            if k > 0 && rng.gen_bool(0.5) {
                blocks[j].pop();
            } else {
                blocks[j].push(if rng.gen_bool(0.5) { '1' } else { '0' });
            }
            join_blocks(&blocks, &inst)
        }
        NegativeKind::WrongBlockCount => {
            let inst = gen_positive(n, rng).expect("n checked");
            let mut blocks = split_blocks(&inst);
            let j = rng.gen_range(0..blocks.len());
            if rng.gen_bool(0.5) {
                let dup = blocks[j].clone();
                blocks.insert(j, dup);
            } else {
                blocks.remove(j);
            }
            join_blocks(&blocks, &inst)
        }
        NegativeKind::MissingSeparator => {
            let s = gen_positive(n, rng).expect("n checked").encode();
            // Any separator except the final '#', which would be truncation.
            let seps: Vec<usize> = s[..s.len() - 1]
                .bytes()
                .enumerate()
                .filter(|&(_, b)| b == b'@' || b == b'#')
                .map(|(i, _)| i)
                .collect();
            let drop = seps[rng.gen_range(0..seps.len())];
            let mut out = s;
            out.remove(drop);
            out
        }
        NegativeKind::BadSuffix => {
            let mut s = gen_positive(n, rng).expect("n checked").encode();
            for _ in 0..rng.gen_range(1..=3) {
                s.push(['0', '1', '@', '#'][rng.gen_range(0..4)]);
            }
            s
        }
        NegativeKind::BadAlphabet => {
            let s = gen_positive(n, rng).expect("n checked").encode();
            let at = rng.gen_range(0..s.len());
            let bad = ['2', 'x', 'a', ' ', '$', '|'][rng.gen_range(0..6)];
            let mut out: Vec<char> = s.chars().collect();
            out[at] = bad;
            out.into_iter().collect()
        }
        NegativeKind::TruncatedTail => {
            let s = gen_positive(n, rng).expect("n checked").encode();
            let keep = rng.gen_range(0..s.len());
            s[..keep].to_string()
        }
    }
}

fn split_blocks(inst: &InstanceL) -> Vec<String> {
    let s = inst.encode();
    let base = &s[..s.find('#').expect("encoded instance has '#'")];
    base.split('@').map(str::to_string).collect()
}

fn join_blocks(blocks: &[String], inst: &InstanceL) -> String {
    let s = inst.encode();
    let tail = &s[s.find('#').expect("encoded instance has '#'")..];
    format!("{}{}", blocks.join("@"), tail)
}

/// Every instance of size `n`, in lexicographic order of (blocks, x, y).
/// Only sensible for tiny `n`.
pub fn all_instances(n: u32) -> impl Iterator<Item = InstanceL> {
    let count = 1usize << n;
    let k = n / 2;
    let per_block = 1u64 << k;
    let assignments = per_block.pow(count as u32);
    (0..assignments).flat_map(move |code| {
        let blocks: Vec<u64> = (0..count)
            .rev()
            .map(|i| (code / per_block.pow(i as u32)) % per_block)
            .collect();
        (0..count as u64).flat_map(move |x| {
            let blocks = blocks.clone();
            (0..count as u64).map(move |y| InstanceL::new(n, blocks.clone(), x, y).expect("valid"))
        })
    })
}
