//! Real-time SMM recognizer.
//!
//! An index trie T of depth `w` maps every block index to a leaf whose `V`
//! pointer targets a representative vertex of that block's value. Values
//! live in a trie U; the last level of U points at the first T leaf seen
//! with that value (the anchor), whose `V` pointer names the
//! representative. Only T leaves point at representatives, so a value
//! shared by `m` blocks gives its representative in-degree exactly `m`.
//! Membership is then a single identity test between the representatives
//! reached by `x` and by `y`.
//!
//! Counter and pacing are shared with the KUM recognizer; there is no
//! second index trie and no queue.

use crate::engine::{GraphConfig, ModelKind, NodeRef, PortLabel, StorageGraph};
use crate::gadgets::{
    descend_or_grow, idle, peek_chain, peek_level, read_msb, Counter, CounterCtl, CounterRegs, Wiring, BLANK, ONE,
    PALETTE, ZERO,
};
use crate::runtime::{Fault, Flow, Program, Reg, RejectReason, Registers, Symbol, Verdict};

pub const L: PortLabel = PortLabel(0);
pub const R: PortLabel = PortLabel(1);
pub const V: PortLabel = PortLabel(2);

pub const WIRING: Wiring = Wiring {
    model: ModelKind::Smm,
    toward_tail: L,
    toward_head: R,
    zero_child: L,
    one_child: R,
    parent: L,
};

const T_ROOT: Reg = Reg(0);
const U_ROOT: Reg = Reg(1);
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
const READ_T: Reg = Reg(10);
const T_CUR: Reg = Reg(11);
const U_CUR: Reg = Reg(12);
const REP_X: Reg = Reg(13);

static REGISTER_NAMES: [&str; 14] = [
    "t_root",
    "u_root",
    "prev_head",
    "prev_tail",
    "cur_head",
    "cur_tail",
    "next_head",
    "next_tail",
    "inc_cur",
    "inc_next",
    "read_t",
    "t_cur",
    "u_cur",
    "rep_x",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    FirstBlock,
    Block,
    X,
    Y,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmmControl {
    pub phase: Phase,
    counter: CounterCtl,
    n_even: bool,
    /// Last bit of the current block, not yet descended in U.
    pending: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SmmRecognizer;

pub fn build_smm_recognizer() -> SmmRecognizer {
    SmmRecognizer
}

fn counter() -> Counter<'static> {
    Counter { wiring: &WIRING, regs: COUNTER }
}

fn reject(r: RejectReason) -> Result<Flow, Fault> {
    Ok(Flow::Reject(r))
}

impl SmmRecognizer {
    /// Descends U on the held-back bit and holds back `bit`. Three primitives.
    fn value_bit(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut SmmControl, bit: bool) -> Result<(), Fault> {
        let u = regs.node(U_CUR)?;
        match ctl.pending.replace(bit) {
            Some(b) => regs[U_CUR] = Some(descend_or_grow(g, &WIRING, u, b, BLANK)?),
            None => idle(g, u, 3)?,
        }
        Ok(())
    }

    /// Points the T leaf just finished at its value's representative,
    /// creating the representative for a new value. Four primitives.
    fn settle_rep(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut SmmControl) -> Result<(), Fault> {
        let leaf = regs.node(T_CUR)?;
        let u = regs.node(U_CUR)?;
        match ctl.pending.take() {
            Some(b) => match g.neighbor(u, WIRING.child(b))? {
                Some(anchor) => {
                    let rep = g.neighbor(anchor, V)?.ok_or(Fault::Invariant("anchor without representative"))?;
                    g.set_pointer(leaf, V, rep)?;
                    idle(g, rep, 1)?;
                }
                None => {
                    let rep = g.create_node(BLANK)?;
                    g.set_pointer(u, WIRING.child(b), leaf)?;
                    g.set_pointer(leaf, V, rep)?;
                }
            },
            // k = 0: every block has the empty value.
            None => {
                g.set_pointer(leaf, V, u)?;
                idle(g, u, 3)?;
            }
        }
        Ok(())
    }

    fn first_block_bit(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut SmmControl, bit: bool) -> Result<Flow, Fault> {
        let c = counter();
        for _ in 0..2 {
            c.append(g, regs, [ZERO, ZERO, ZERO])?;
        }
        let mut t = regs.node(T_CUR)?;
        for _ in 0..2 {
            t = descend_or_grow(g, &WIRING, t, false, BLANK)?;
        }
        regs[T_CUR] = Some(t);
        self.value_bit(g, regs, ctl, bit)?;
        Ok(Flow::Continue)
    }

    fn first_block_end(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut SmmControl) -> Result<Flow, Fault> {
        counter().append(g, regs, [ZERO, ZERO, ONE])?;
        regs[T_CUR] = Some(descend_or_grow(g, &WIRING, regs.node(T_CUR)?, false, BLANK)?);
        self.settle_rep(g, regs, ctl)?;
        self.next_phase(regs, ctl);
        Ok(Flow::Continue)
    }

    fn next_phase(&self, regs: &mut Registers, ctl: &mut SmmControl) {
        let c = counter();
        c.rotate(regs);
        c.begin_walk(regs, &mut ctl.counter);
        regs[READ_T] = regs[COUNTER.cur_head];
        regs[T_CUR] = regs[T_ROOT];
        regs[U_CUR] = regs[U_ROOT];
        ctl.phase = Phase::Block;
    }

    fn index_level(&self, g: &mut StorageGraph, regs: &mut Registers) -> Result<bool, Fault> {
        let r = read_msb(g, &WIRING, regs, READ_T)?.ok_or(Fault::Invariant("index reader ran ahead of the counter walk"))?;
        regs[T_CUR] = Some(descend_or_grow(g, &WIRING, regs.node(T_CUR)?, r.bit, BLANK)?);
        Ok(r.last)
    }

    fn block_bit(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut SmmControl, bit: bool) -> Result<Flow, Fault> {
        let c = counter();
        for _ in 0..2 {
            if !c.walk_position(g, regs, &mut ctl.counter)? {
                return reject(RejectReason::Pacing);
            }
        }
        for _ in 0..2 {
            self.index_level(g, regs)?;
        }
        self.value_bit(g, regs, ctl, bit)?;
        Ok(Flow::Continue)
    }

    fn block_end(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut SmmControl, last: bool) -> Result<Flow, Fault> {
        let c = counter();
        if !c.walk_position(g, regs, &mut ctl.counter)? || !c.walk_finished(regs) {
            return reject(RejectReason::Pacing);
        }
        if !self.index_level(g, regs)? {
            return Err(Fault::Invariant("index path out of step with the counter"));
        }
        self.settle_rep(g, regs, ctl)?;
        let cnt = ctl.counter;
        if !last {
            if cnt.overflowed() {
                return reject(RejectReason::Format);
            }
            self.next_phase(regs, ctl);
            return Ok(Flow::Continue);
        }
        if !cnt.low_bits_all_ones() {
            return reject(RejectReason::Format);
        }
        ctl.n_even = !cnt.head_bit();
        ctl.phase = Phase::X;
        self.start_index_walk(g, regs, ctl)?;
        Ok(Flow::Continue)
    }

    /// Puts the T cursor at the root, past the pad branch for even `n`.
    /// One primitive.
    fn start_index_walk(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &SmmControl) -> Result<(), Fault> {
        let root = regs.node(T_ROOT)?;
        if ctl.n_even {
            regs[T_CUR] = Some(g.neighbor(root, L)?.ok_or(Fault::Invariant("T lacks the pad branch"))?);
        } else {
            idle(g, root, 1)?;
            regs[T_CUR] = Some(root);
        }
        Ok(())
    }

    fn walk_bit(&self, g: &mut StorageGraph, regs: &mut Registers, bit: bool) -> Result<Flow, Fault> {
        match g.neighbor(regs.node(T_CUR)?, WIRING.child(bit))? {
            Some(next) => {
                regs[T_CUR] = Some(next);
                Ok(Flow::Continue)
            }
            None => reject(RejectReason::Format),
        }
    }

    /// The representative behind the T cursor, or `None` off a leaf.
    fn rep_here(&self, g: &mut StorageGraph, regs: &Registers) -> Result<Option<NodeRef>, Fault> {
        Ok(g.neighbor(regs.node(T_CUR)?, V)?)
    }
}

impl Program for SmmRecognizer {
    type Control = SmmControl;

    fn graph_config(&self) -> GraphConfig {
        GraphConfig { model: ModelKind::Smm, degree_bound: None, palette: PALETTE.to_vec(), labels: vec!["L", "R", "V"] }
    }

    fn register_names(&self) -> &'static [&'static str] {
        &REGISTER_NAMES
    }

    fn on_start(&self, g: &mut StorageGraph, regs: &mut Registers) -> Result<SmmControl, Fault> {
        regs[T_ROOT] = Some(g.origin());
        regs[T_CUR] = Some(g.origin());
        let u = g.create_node(BLANK)?;
        regs[U_ROOT] = Some(u);
        regs[U_CUR] = Some(u);
        Ok(SmmControl { phase: Phase::FirstBlock, counter: CounterCtl::default(), n_even: false, pending: None })
    }

    fn on_symbol(&self, ctl: &mut SmmControl, g: &mut StorageGraph, regs: &mut Registers, sym: Symbol) -> Result<Flow, Fault> {
        use Symbol::*;
        match (ctl.phase, sym) {
            (Phase::FirstBlock, Zero | One) => self.first_block_bit(g, regs, ctl, sym == One),
            (Phase::FirstBlock, At) => self.first_block_end(g, regs, ctl),
            (Phase::FirstBlock, Hash) => reject(RejectReason::Format),
            (Phase::Block, Zero | One) => self.block_bit(g, regs, ctl, sym == One),
            (Phase::Block, At) => self.block_end(g, regs, ctl, false),
            (Phase::Block, Hash) => self.block_end(g, regs, ctl, true),
            (Phase::X | Phase::Y, Zero | One) => self.walk_bit(g, regs, sym == One),
            (Phase::X, Hash) => {
                let Some(rep) = self.rep_here(g, regs)? else {
                    return reject(RejectReason::Format);
                };
                regs[REP_X] = Some(rep);
                ctl.phase = Phase::Y;
                self.start_index_walk(g, regs, ctl)?;
                Ok(Flow::Continue)
            }
            (Phase::Y, Hash) => {
                let Some(rep) = self.rep_here(g, regs)? else {
                    return reject(RejectReason::Format);
                };
                if !g.identity_eq(rep, regs.node(REP_X)?)? {
                    return reject(RejectReason::Mismatch);
                }
                ctl.phase = Phase::Done;
                Ok(Flow::Continue)
            }
            (Phase::X | Phase::Y, At) => reject(RejectReason::Format),
            (Phase::Done, _) => reject(RejectReason::BadSuffix),
        }
    }

    fn on_end(&self, ctl: &mut SmmControl, _g: &mut StorageGraph, _regs: &mut Registers) -> Result<Verdict, Fault> {
        Ok(match ctl.phase {
            Phase::Done => Verdict::Accept,
            _ => Verdict::Reject(RejectReason::Truncated),
        })
    }
}

/// Zero-cost view of the SMM structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmmSnapshot {
    pub width: usize,
    pub cur: u64,
    /// Nodes at depth `w` of T.
    pub t_leaves: usize,
    /// Distinct representatives targeted by T leaves.
    pub reps: usize,
}

impl SmmSnapshot {
    pub fn capture(g: &StorageGraph, regs: &Registers) -> Result<Self, Fault> {
        let (cur, width) = peek_chain(g, &WIRING, regs[COUNTER.cur_head])?;
        let leaves = peek_level(g, &WIRING, regs.node(T_ROOT)?, width)?;
        let mut reps = Vec::new();
        for &leaf in &leaves {
            if let Some(rep) = g.peek_neighbor(leaf, V)? {
                reps.push(rep);
            }
        }
        reps.sort();
        reps.dedup();
        Ok(SmmSnapshot { width, cur, t_leaves: leaves.len(), reps: reps.len() })
    }
}
