//! Real-time KUM recognizer for the block-equality language.
//!
//! The machine never looks ahead and does a fixed amount of work per input
//! symbol. While reading the base segment it keeps:
//!
//! * a counter of width `w = 2k + 1` (`k` = length of the first block) as
//!   three rotating chains: `C_prev = i - 1`, `C_cur = i`, and `C_next`,
//!   which receives `i + 1` during phase `i` at two bit positions per symbol;
//! * tree A, an index trie of depth `w` whose leaves link to a fresh chain
//!   spelling the block read in that phase;
//! * tree B, a value trie of depth `k`; below each value leaf hangs an
//!   index trie holding every index whose block has that value. The index
//!   path for `i - 1` is laid down during phase `i`, two levels per symbol,
//!   since the value leaf of `b_{i-1}` is only known once that block ends.
//!
//! Indices are zero-padded to `w` bits. Whether `n = 2k` or `n = 2k + 1` is
//! read off the counter's head bit when the base segment ends; for even `n`
//! the walks over `x` and `y` first step over the pad branch.
//!
//! Reading `x` walks tree A to the leaf for `x` while the index path of the
//! last block is completed. Reading `y` has two halves: during the first
//! `k` symbols the machine spells `b_x` down the value trie and queues the
//! bits of `y`; afterwards every symbol enqueues one bit and dequeues two,
//! descending the index trie below `b_x`. The input is accepted iff that
//! descent lands on a leaf exactly as the final `#` arrives.
//!
//! Ports: `parent`, `left` (0-child, next chain node), `right` (1-child),
//! `val` (A leaf to value chain). Chains link their `left` port toward the
//! tail and their `parent` port toward the head.

use crate::engine::{GraphConfig, ModelKind, NodeRef, PortLabel, StorageGraph};
use crate::gadgets::{
    bit_color, descend_or_grow, idle, peek_chain, peek_level, peek_path, read_msb, Counter, CounterCtl, CounterRegs,
    Wiring, BLANK, MARK, ONE, PALETTE, ZERO,
};
use crate::runtime::{Fault, Flow, Program, Reg, RejectReason, Registers, Symbol, Verdict};

pub const DEGREE_BOUND: usize = 4;

pub const PARENT: PortLabel = PortLabel(0);
pub const LEFT: PortLabel = PortLabel(1);
pub const RIGHT: PortLabel = PortLabel(2);
pub const VAL: PortLabel = PortLabel(3);

pub const WIRING: Wiring = Wiring {
    model: ModelKind::Kum,
    toward_tail: LEFT,
    toward_head: PARENT,
    zero_child: LEFT,
    one_child: RIGHT,
    parent: PARENT,
};

const A_ROOT: Reg = Reg(0);
const B_ROOT: Reg = Reg(1);
const COUNTER: CounterRegs = CounterRegs {
    prev_head: Reg(2),
    prev_tail: Reg(3),
    cur_head: Reg(4),
    cur_tail: Reg(5),
    next_head: Reg(6),
    next_tail: Reg(7),
    inc_cur: Reg(8),
    inc_next: Reg(9),
};
const READ_A: Reg = Reg(10);
const READ_LOW: Reg = Reg(11);
const A_CUR: Reg = Reg(12);
const UP_CUR: Reg = Reg(13);
const LOW_CUR: Reg = Reg(14);
const LOW_START: Reg = Reg(15);
const VAL_HEAD: Reg = Reg(16);
const VAL_TAIL: Reg = Reg(17);
const VAL_CUR: Reg = Reg(18);
const Q_HEAD: Reg = Reg(19);
const Q_TAIL: Reg = Reg(20);

static REGISTER_NAMES: [&str; 21] = [
    "a_root",
    "b_root",
    "prev_head",
    "prev_tail",
    "cur_head",
    "cur_tail",
    "next_head",
    "next_tail",
    "inc_cur",
    "inc_next",
    "read_a",
    "read_low",
    "a_cur",
    "up_cur",
    "low_cur",
    "low_start",
    "val_head",
    "val_tail",
    "val_cur",
    "q_head",
    "q_tail",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Reading `b_{0^n}`: chains, A path and value string grow together.
    FirstBlock,
    /// Reading `b_i` for `i >= 1`.
    Block,
    /// Reading `x`.
    X,
    /// First `k` symbols of `y`.
    YFirst,
    /// Remaining symbols of `y`.
    YSecond,
    /// Final `#` seen.
    Done,
}

/// Finite control of the KUM recognizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KumControl {
    pub phase: Phase,
    counter: CounterCtl,
    /// `n = 2k`, so indices carry a leading pad bit.
    n_even: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KumRecognizer;

pub fn build_kum_recognizer() -> KumRecognizer {
    KumRecognizer
}

fn counter() -> Counter<'static> {
    Counter { wiring: &WIRING, regs: COUNTER }
}

fn reject(r: RejectReason) -> Result<Flow, Fault> {
    Ok(Flow::Reject(r))
}

impl KumRecognizer {
    fn first_block_bit(&self, g: &mut StorageGraph, regs: &mut Registers, bit: bool) -> Result<Flow, Fault> {
        let c = counter();
        for _ in 0..2 {
            c.append(g, regs, [ZERO, ZERO, ZERO])?;
        }
        let mut a = regs.node(A_CUR)?;
        for _ in 0..2 {
            a = descend_or_grow(g, &WIRING, a, false, BLANK)?;
        }
        regs[A_CUR] = Some(a);
        regs[UP_CUR] = Some(descend_or_grow(g, &WIRING, regs.node(UP_CUR)?, bit, BLANK)?);
        self.append_value_bit(g, regs, bit)?;
        Ok(Flow::Continue)
    }

    fn first_block_end(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl) -> Result<Flow, Fault> {
        // The final chain node fixes w = 2k + 1; C_next starts at 1.
        counter().append(g, regs, [ZERO, ZERO, ONE])?;
        let leaf = descend_or_grow(g, &WIRING, regs.node(A_CUR)?, false, BLANK)?;
        g.link(leaf, VAL, regs.node(VAL_HEAD)?, PARENT)?;
        self.next_phase(g, regs, ctl)?;
        Ok(Flow::Continue)
    }

    /// Saves `b_i`'s value leaf, rotates the counter and restarts every walk.
    fn next_phase(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl) -> Result<(), Fault> {
        let c = counter();
        regs[LOW_START] = regs[UP_CUR];
        c.rotate(regs);
        c.begin_walk(regs, &mut ctl.counter);
        regs[READ_A] = regs[COUNTER.cur_head];
        regs[READ_LOW] = regs[COUNTER.prev_head];
        regs[A_CUR] = regs[A_ROOT];
        regs[UP_CUR] = regs[B_ROOT];
        regs[LOW_CUR] = regs[LOW_START];
        let header = g.create_node(BLANK)?;
        regs[VAL_HEAD] = Some(header);
        regs[VAL_TAIL] = Some(header);
        ctl.phase = Phase::Block;
        Ok(())
    }

    fn append_value_bit(&self, g: &mut StorageGraph, regs: &mut Registers, bit: bool) -> Result<(), Fault> {
        let node = g.create_node(bit_color(bit))?;
        g.link(regs.node(VAL_TAIL)?, LEFT, node, PARENT)?;
        regs[VAL_TAIL] = Some(node);
        Ok(())
    }

    /// One level of an index path: a counter bit read most-significant
    /// first, then descend or grow. Five primitives.
    fn index_level(&self, g: &mut StorageGraph, regs: &mut Registers, reader: Reg, cursor: Reg) -> Result<Option<bool>, Fault> {
        let Some(r) = read_msb(g, &WIRING, regs, reader)? else {
            return Ok(None);
        };
        // Lower-B leaves are marked so the final descent can recognise them.
        let color = if r.last && cursor == LOW_CUR { MARK } else { BLANK };
        let next = descend_or_grow(g, &WIRING, regs.node(cursor)?, r.bit, color)?;
        regs[cursor] = Some(next);
        Ok(Some(r.last))
    }

    fn block_bit(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl, bit: bool) -> Result<Flow, Fault> {
        let c = counter();
        for _ in 0..2 {
            // Walk exhausted: the block is longer than the first one.
            if !c.walk_position(g, regs, &mut ctl.counter)? {
                return reject(RejectReason::Pacing);
            }
        }
        for (reader, cursor) in [(READ_A, A_CUR), (READ_LOW, LOW_CUR)] {
            for _ in 0..2 {
                if self.index_level(g, regs, reader, cursor)?.is_none() {
                    return Err(Fault::Invariant("index reader ran ahead of the counter walk"));
                }
            }
        }
        regs[UP_CUR] = Some(descend_or_grow(g, &WIRING, regs.node(UP_CUR)?, bit, BLANK)?);
        self.append_value_bit(g, regs, bit)?;
        Ok(Flow::Continue)
    }

    /// `@` or the first `#` closing phase `i >= 1`.
    fn block_end(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl, last: bool) -> Result<Flow, Fault> {
        let c = counter();
        if !c.walk_position(g, regs, &mut ctl.counter)? || !c.walk_finished(regs) {
            return reject(RejectReason::Pacing);
        }
        let a_done = self.index_level(g, regs, READ_A, A_CUR)?;
        let low_done = self.index_level(g, regs, READ_LOW, LOW_CUR)?;
        if a_done != Some(true) || low_done != Some(true) {
            return Err(Fault::Invariant("index paths out of step with the counter"));
        }
        g.link(regs.node(A_CUR)?, VAL, regs.node(VAL_HEAD)?, PARENT)?;
        let cnt = ctl.counter;
        if !last {
            if cnt.overflowed() {
                // More than 2^w blocks.
                return reject(RejectReason::Format);
            }
            self.next_phase(g, regs, ctl)?;
            return Ok(Flow::Continue);
        }
        // C_cur must be 2^n - 1 for n in {2k, 2k+1}: all ones below the head.
        if !cnt.low_bits_all_ones() {
            return reject(RejectReason::Format);
        }
        ctl.n_even = !cnt.head_bit();
        self.next_phase(g, regs, ctl)?;
        ctl.phase = Phase::X;
        let root = regs.node(A_ROOT)?;
        if ctl.n_even {
            let pad = g.neighbor(root, LEFT)?.ok_or(Fault::Invariant("A lacks the pad branch"))?;
            regs[A_CUR] = Some(pad);
        } else {
            idle(g, root, 1)?;
        }
        Ok(Flow::Continue)
    }

    fn x_bit(&self, g: &mut StorageGraph, regs: &mut Registers, bit: bool) -> Result<Flow, Fault> {
        let Some(next) = g.neighbor(regs.node(A_CUR)?, WIRING.child(bit))? else {
            // Past an A leaf: x is longer than n.
            return reject(RejectReason::Format);
        };
        regs[A_CUR] = Some(next);
        // Finish the lower-B path of the last index, two levels per symbol.
        for _ in 0..2 {
            if self.index_level(g, regs, READ_LOW, LOW_CUR)?.is_none() {
                idle(g, next, 5)?;
            }
        }
        Ok(Flow::Continue)
    }

    fn x_end(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl) -> Result<Flow, Fault> {
        let Some(header) = g.neighbor(regs.node(A_CUR)?, VAL)? else {
            // Not at a leaf: x is shorter than n.
            return reject(RejectReason::Format);
        };
        if regs[READ_LOW].is_some() {
            return Err(Fault::Invariant("last lower-B path unfinished after x"));
        }
        let first = g.neighbor(header, LEFT)?;
        regs[VAL_CUR] = first;
        regs[UP_CUR] = regs[B_ROOT];
        if first.is_none() {
            // k = 0: nothing to spell, go straight to the lower trie.
            self.enter_y_second(g, regs, ctl)?;
        } else {
            ctl.phase = Phase::YFirst;
            idle(g, header, 1)?;
        }
        Ok(Flow::Continue)
    }

    fn enter_y_second(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl) -> Result<(), Fault> {
        let leaf = regs.node(UP_CUR)?;
        if ctl.n_even {
            let pad = g.neighbor(leaf, LEFT)?.ok_or(Fault::Invariant("lower-B lacks the pad branch"))?;
            regs[LOW_CUR] = Some(pad);
        } else {
            idle(g, leaf, 1)?;
            regs[LOW_CUR] = Some(leaf);
        }
        ctl.phase = Phase::YSecond;
        Ok(())
    }

    fn enqueue(&self, g: &mut StorageGraph, regs: &mut Registers, bit: bool) -> Result<(), Fault> {
        let node = g.create_node(bit_color(bit))?;
        match regs[Q_TAIL] {
            Some(t) => g.link(t, LEFT, node, PARENT)?,
            None => {
                idle(g, node, 1)?;
                regs[Q_HEAD] = Some(node);
            }
        }
        regs[Q_TAIL] = Some(node);
        Ok(())
    }

    fn y_first_bit(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl, bit: bool) -> Result<Flow, Fault> {
        self.enqueue(g, regs, bit)?;
        let v = regs.node(VAL_CUR)?;
        let value_bit = g.get_color(v)? == ONE;
        let up = g
            .neighbor(regs.node(UP_CUR)?, WIRING.child(value_bit))?
            .ok_or(Fault::Invariant("value of b_x missing from the value trie"))?;
        regs[UP_CUR] = Some(up);
        regs[VAL_CUR] = g.neighbor(v, LEFT)?;
        if regs[VAL_CUR].is_none() {
            self.enter_y_second(g, regs, ctl)?;
        } else {
            idle(g, v, 1)?;
        }
        Ok(Flow::Continue)
    }

    fn y_second_bit(&self, g: &mut StorageGraph, regs: &mut Registers, bit: bool) -> Result<Flow, Fault> {
        self.enqueue(g, regs, bit)?;
        for _ in 0..2 {
            let Some(head) = regs[Q_HEAD] else {
                idle(g, regs.node(LOW_CUR)?, 3)?;
                continue;
            };
            let qbit = g.get_color(head)? == ONE;
            regs[Q_HEAD] = g.neighbor(head, LEFT)?;
            if regs[Q_HEAD].is_none() {
                regs[Q_TAIL] = None;
            }
            match g.neighbor(regs.node(LOW_CUR)?, WIRING.child(qbit))? {
                Some(next) => regs[LOW_CUR] = Some(next),
                // y is not among the indices sharing b_x's value.
                None => return reject(RejectReason::Mismatch),
            }
        }
        Ok(Flow::Continue)
    }

    fn y_end(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut KumControl) -> Result<Flow, Fault> {
        if regs[Q_HEAD].is_some() {
            return reject(RejectReason::Format);
        }
        if g.get_color(regs.node(LOW_CUR)?)? != MARK {
            return reject(RejectReason::Format);
        }
        ctl.phase = Phase::Done;
        Ok(Flow::Continue)
    }
}

impl Program for KumRecognizer {
    type Control = KumControl;

    fn graph_config(&self) -> GraphConfig {
        GraphConfig {
            model: ModelKind::Kum,
            degree_bound: Some(DEGREE_BOUND),
            palette: PALETTE.to_vec(),
            labels: vec!["parent", "left", "right", "val"],
        }
    }

    fn register_names(&self) -> &'static [&'static str] {
        &REGISTER_NAMES
    }

    fn on_start(&self, g: &mut StorageGraph, regs: &mut Registers) -> Result<KumControl, Fault> {
        regs[A_ROOT] = Some(g.origin());
        regs[A_CUR] = Some(g.origin());
        let b = g.create_node(BLANK)?;
        regs[B_ROOT] = Some(b);
        regs[UP_CUR] = Some(b);
        let header = g.create_node(BLANK)?;
        regs[VAL_HEAD] = Some(header);
        regs[VAL_TAIL] = Some(header);
        Ok(KumControl { phase: Phase::FirstBlock, counter: CounterCtl::default(), n_even: false })
    }

    fn on_symbol(&self, ctl: &mut KumControl, g: &mut StorageGraph, regs: &mut Registers, sym: Symbol) -> Result<Flow, Fault> {
        use Symbol::*;
        match (ctl.phase, sym) {
            (Phase::FirstBlock, Zero | One) => self.first_block_bit(g, regs, sym == One),
            (Phase::FirstBlock, At) => self.first_block_end(g, regs, ctl),
            // A single block: n would be 0.
            (Phase::FirstBlock, Hash) => reject(RejectReason::Format),
            (Phase::Block, Zero | One) => self.block_bit(g, regs, ctl, sym == One),
            (Phase::Block, At) => self.block_end(g, regs, ctl, false),
            (Phase::Block, Hash) => self.block_end(g, regs, ctl, true),
            (Phase::X, Zero | One) => self.x_bit(g, regs, sym == One),
            (Phase::X, Hash) => self.x_end(g, regs, ctl),
            (Phase::YFirst, Zero | One) => self.y_first_bit(g, regs, ctl, sym == One),
            (Phase::YSecond, Zero | One) => self.y_second_bit(g, regs, sym == One),
            (Phase::YSecond, Hash) => self.y_end(g, regs, ctl),
            (Phase::YFirst, Hash) => reject(RejectReason::Format),
            (Phase::X | Phase::YFirst | Phase::YSecond, At) => reject(RejectReason::Format),
            (Phase::Done, _) => reject(RejectReason::BadSuffix),
        }
    }

    fn on_end(&self, ctl: &mut KumControl, _g: &mut StorageGraph, _regs: &mut Registers) -> Result<Verdict, Fault> {
        Ok(match ctl.phase {
            Phase::Done => Verdict::Accept,
            _ => Verdict::Reject(RejectReason::Truncated),
        })
    }
}

/// Zero-cost view of the recognizer's structures, for tests and tooling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KumSnapshot {
    /// Counter width `w`, once the first block has ended.
    pub width: usize,
    pub prev: u64,
    pub cur: u64,
    pub next: u64,
    /// Nodes at depth `w` of tree A.
    pub a_leaves: usize,
    /// Nodes at depth `k` of tree B.
    pub b_upper_leaves: usize,
    /// Marked depth-`w` nodes summed over every index trie below a value leaf.
    pub b_lower_leaves: usize,
    /// Queued bits, head first.
    pub queue: Vec<bool>,
}

impl KumSnapshot {
    pub fn capture(g: &StorageGraph, regs: &Registers) -> Result<Self, Fault> {
        let (prev, _) = peek_chain(g, &WIRING, regs[COUNTER.prev_head])?;
        let (cur, width) = peek_chain(g, &WIRING, regs[COUNTER.cur_head])?;
        let (next, _) = peek_chain(g, &WIRING, regs[COUNTER.next_head])?;
        let k = width.saturating_sub(1) / 2;
        let a_leaves = peek_level(g, &WIRING, regs.node(A_ROOT)?, width)?.len();
        let uppers = peek_level(g, &WIRING, regs.node(B_ROOT)?, k)?;
        let mut b_lower_leaves = 0;
        for &u in &uppers {
            for leaf in peek_level(g, &WIRING, u, width)? {
                if g.peek_color(leaf)? == MARK {
                    b_lower_leaves += 1;
                }
            }
        }
        let mut queue = Vec::new();
        let mut at = regs[Q_HEAD];
        while let Some(node) = at {
            queue.push(g.peek_color(node)? == ONE);
            at = g.peek_neighbor(node, LEFT)?;
        }
        Ok(KumSnapshot { width, prev, cur, next, a_leaves, b_upper_leaves: uppers.len(), b_lower_leaves, queue })
    }
}

/// Zero-cost: tree A holds the `width`-bit path for `index`.
pub fn a_has_path(g: &StorageGraph, regs: &Registers, index: u64, width: usize) -> Result<bool, Fault> {
    Ok(peek_path(g, &WIRING, regs.node(A_ROOT)?, index, width)?.is_some())
}

/// Zero-cost: the index trie below value `value` (`k` bits) holds the
/// `width`-bit path for `index`, ending in a marked leaf.
pub fn b_lower_has(g: &StorageGraph, regs: &Registers, value: u64, k: usize, index: u64, width: usize) -> Result<bool, Fault> {
    let Some(leaf) = peek_path(g, &WIRING, regs.node(B_ROOT)?, value, k)? else {
        return Ok(false);
    };
    match peek_path(g, &WIRING, leaf, index, width)? {
        Some(end) => Ok(g.peek_color(end)? == MARK),
        None => Ok(false),
    }
}

/// The node the A walk currently stands on.
pub fn a_cursor(regs: &Registers) -> Option<NodeRef> {
    regs[A_CUR]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{max_gap, run, Session};

    fn verdict(s: &str) -> Verdict {
        run(&KumRecognizer, s.as_bytes()).unwrap().verdict
    }

    fn session_after<'a>(p: &'a KumRecognizer, prefix: &str) -> Session<'a, KumRecognizer> {
        let mut s = Session::new(p).unwrap();
        for b in prefix.bytes() {
            assert_eq!(s.feed(b), None, "halted early on {prefix}");
        }
        s
    }

    #[test]
    fn verdict_examples() {
        assert_eq!(verdict("0@1@0@1#00#10#"), Verdict::Accept);
        assert_eq!(verdict("0@1@0@1#00#01#"), Verdict::Reject(RejectReason::Mismatch));
        assert_eq!(verdict("1@1@1@1#00#11#"), Verdict::Accept);
        assert_eq!(verdict("@#0#1#"), Verdict::Accept);
        assert_eq!(verdict("0@1@0@1#00#10#0"), Verdict::Reject(RejectReason::BadSuffix));
        assert_eq!(verdict("0@1@0@1#00#10"), Verdict::Reject(RejectReason::Truncated));
    }

    #[test]
    fn first_block_fixes_width() {
        let p = KumRecognizer;
        let s = session_after(&p, "0@");
        let snap = KumSnapshot::capture(s.graph(), s.registers()).unwrap();
        assert_eq!(snap.width, 3);
        assert_eq!((snap.prev, snap.cur), (0, 1));
        assert!(a_has_path(s.graph(), s.registers(), 0b000, 3).unwrap());

        let s = session_after(&p, "@");
        let snap = KumSnapshot::capture(s.graph(), s.registers()).unwrap();
        assert_eq!(snap.width, 1);
        let header = s.graph().peek_neighbor(
            peek_path(s.graph(), &WIRING, s.registers()[A_ROOT].unwrap(), 0, 1).unwrap().unwrap(),
            VAL,
        );
        let header = header.unwrap().unwrap();
        assert_eq!(s.graph().peek_neighbor(header, LEFT).unwrap(), None);
    }

    #[test]
    fn phase_one_state() {
        let p = KumRecognizer;
        let s = session_after(&p, "0@1@");
        let (g, r) = (s.graph(), s.registers());
        let snap = KumSnapshot::capture(g, r).unwrap();
        // After rotation C_cur holds what C_next accumulated: 010.
        assert_eq!(snap.cur, 0b010);
        assert!(a_has_path(g, r, 0b001, 3).unwrap());
        assert!(b_lower_has(g, r, 0, 1, 0b000, 3).unwrap());
        let leaf = peek_path(g, &WIRING, r[A_ROOT].unwrap(), 0b001, 3).unwrap().unwrap();
        assert_eq!(g.degree(leaf).unwrap(), 2);
    }

    #[test]
    fn x_phase_completes_last_path() {
        let p = KumRecognizer;
        let s = session_after(&p, "0@1@0@1#00#");
        let (g, r) = (s.graph(), s.registers());
        // Padded 000 is the leaf for x = 00.
        let leaf = peek_path(g, &WIRING, r[A_ROOT].unwrap(), 0b000, 3).unwrap();
        assert_eq!(leaf, a_cursor(r));
        assert!(b_lower_has(g, r, 1, 1, 0b011, 3).unwrap());
        let snap = KumSnapshot::capture(g, r).unwrap();
        assert_eq!((snap.a_leaves, snap.b_lower_leaves, snap.b_upper_leaves), (4, 4, 2));
    }

    #[test]
    fn y_first_queues_and_spells_bx() {
        let p = KumRecognizer;
        let s = session_after(&p, "0@1@0@1#00#1");
        let snap = KumSnapshot::capture(s.graph(), s.registers()).unwrap();
        assert_eq!(snap.queue, vec![true]);
        assert_eq!(s.control().unwrap().phase, Phase::YSecond);
        let value_leaf = peek_path(s.graph(), &WIRING, s.registers()[B_ROOT].unwrap(), 0, 1).unwrap();
        // Pad branch already consumed below the value leaf of b_x = 0.
        let pad = s.graph().peek_neighbor(value_leaf.unwrap(), LEFT).unwrap();
        assert_eq!(s.registers()[LOW_CUR], pad);
    }

    #[test]
    fn malformed_blocks() {
        // Short block: caught at its '@'.
        assert_eq!(verdict("00@0@00@00#0000#0000#"), Verdict::Reject(RejectReason::Pacing));
        // Long block: caught on its extra symbol.
        assert_eq!(verdict("0@11@0@1#00#10#"), Verdict::Reject(RejectReason::Pacing));
        // Three blocks: counter not all ones.
        assert_eq!(verdict("0@1@0#00#01#"), Verdict::Reject(RejectReason::Format));
        // x one bit short / long.
        assert_eq!(verdict("0@1@0@1#0#10#"), Verdict::Reject(RejectReason::Format));
        assert_eq!(verdict("0@1@0@1#000#10#"), Verdict::Reject(RejectReason::Format));
        // y one bit long.
        assert_eq!(verdict("0@1@0@1#00#100#"), Verdict::Reject(RejectReason::Mismatch));
        assert_eq!(verdict("0@1@0@1#00#1#"), Verdict::Reject(RejectReason::Format));
        assert_eq!(verdict("##"), Verdict::Reject(RejectReason::Format));
    }

    #[test]
    fn odd_n_instance() {
        // n = 3, k = 1: b = 0,1,1,0,1,1,0,0.
        let base = "0@1@1@0@1@1@0@0";
        assert_eq!(verdict(&format!("{base}#101#010#")), Verdict::Accept);
        assert_eq!(verdict(&format!("{base}#101#011#")), Verdict::Reject(RejectReason::Mismatch));
        assert_eq!(verdict(&format!("{base}#101#01#")), Verdict::Reject(RejectReason::Format));
    }

    #[test]
    fn base_symbols_cost_a_fixed_amount() {
        let r = run(&KumRecognizer, b"0@1@0@1#00#10#").unwrap();
        assert_eq!(max_gap(&r.trace).unwrap(), 33);
        assert!(r.stats.max_degree <= DEGREE_BOUND);
    }
}
