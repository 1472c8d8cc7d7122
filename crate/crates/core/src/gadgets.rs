//! Fixed-cost building blocks shared by the two recognizers: an n-bit
//! counter kept as three rotating bit chains, most-significant-first chain
//! readers, and trie descent.
//!
//! Every helper costs the same number of primitives whichever branch it
//! takes, padding the cheaper branch with reads. That keeps the work done on
//! a given kind of input symbol independent of the data.

use crate::engine::{Color, EngineError, ModelKind, NodeRef, PortLabel, StorageGraph};
use crate::runtime::{Fault, Reg, Registers};

pub const ZERO: Color = Color(0);
pub const ONE: Color = Color(1);
pub const BLANK: Color = Color(2);
pub const MARK: Color = Color(3);

pub const PALETTE: [&str; 4] = ["zero", "one", "blank", "mark"];

pub fn bit_color(bit: bool) -> Color {
    if bit {
        ONE
    } else {
        ZERO
    }
}

/// How a program lays its structures onto a graph's ports.
#[derive(Clone, Copy, Debug)]
pub struct Wiring {
    pub model: ModelKind,
    /// Chain link toward the least significant end.
    pub toward_tail: PortLabel,
    /// Chain link toward the most significant end.
    pub toward_head: PortLabel,
    pub zero_child: PortLabel,
    pub one_child: PortLabel,
    /// Port a KUM tree node uses for its parent edge.
    pub parent: PortLabel,
}

impl Wiring {
    pub fn child(&self, bit: bool) -> PortLabel {
        if bit {
            self.one_child
        } else {
            self.zero_child
        }
    }

    /// Primitives spent by [`Wiring::join`].
    fn join_cost(&self) -> usize {
        match self.model {
            ModelKind::Kum => 1,
            ModelKind::Smm => 2,
        }
    }

    /// Doubly links `upper` (more significant) to `lower`.
    pub fn join(&self, g: &mut StorageGraph, upper: NodeRef, lower: NodeRef) -> Result<(), EngineError> {
        match self.model {
            ModelKind::Kum => g.link(upper, self.toward_tail, lower, self.toward_head),
            ModelKind::Smm => {
                g.set_pointer(upper, self.toward_tail, lower)?;
                g.set_pointer(lower, self.toward_head, upper)
            }
        }
    }

    /// Hangs `child` below `parent` on the branch for `bit`. One primitive.
    pub fn attach(&self, g: &mut StorageGraph, parent: NodeRef, bit: bool, child: NodeRef) -> Result<(), EngineError> {
        match self.model {
            ModelKind::Kum => g.link(parent, self.child(bit), child, self.parent),
            ModelKind::Smm => g.set_pointer(parent, self.child(bit), child),
        }
    }
}

/// One wasted read: keeps both arms of a branch equally long.
pub fn idle(g: &mut StorageGraph, at: NodeRef, times: usize) -> Result<(), EngineError> {
    for _ in 0..times {
        g.get_color(at)?;
    }
    Ok(())
}

/// Moves one level down the trie on `bit`, creating the child with `color`
/// if it is missing. Three primitives.
pub fn descend_or_grow(
    g: &mut StorageGraph,
    w: &Wiring,
    from: NodeRef,
    bit: bool,
    color: Color,
) -> Result<NodeRef, EngineError> {
    match g.neighbor(from, w.child(bit))? {
        Some(child) => {
            idle(g, child, 2)?;
            Ok(child)
        }
        None => {
            let child = g.create_node(color)?;
            w.attach(g, from, bit, child)?;
            Ok(child)
        }
    }
}

/// Registers holding the three counter chains and the increment walk.
#[derive(Clone, Copy, Debug)]
pub struct CounterRegs {
    pub prev_head: Reg,
    pub prev_tail: Reg,
    pub cur_head: Reg,
    pub cur_tail: Reg,
    pub next_head: Reg,
    pub next_tail: Reg,
    pub inc_cur: Reg,
    pub inc_next: Reg,
}

/// Finite-state part of the counter: the carry of the running increment and
/// what the most recently processed position looked like.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CounterCtl {
    carry: bool,
    last_carry_in: bool,
    last_bit: bool,
}

impl CounterCtl {
    /// After a finished walk: whether every bit below the head of `C_cur`
    /// is one.
    pub fn low_bits_all_ones(&self) -> bool {
        self.last_carry_in
    }

    /// After a finished walk: the head (most significant) bit of `C_cur`.
    pub fn head_bit(&self) -> bool {
        self.last_bit
    }

    /// After a finished walk: `C_cur + 1` did not fit.
    pub fn overflowed(&self) -> bool {
        self.last_carry_in && self.last_bit
    }
}

pub struct Counter<'a> {
    pub wiring: &'a Wiring,
    pub regs: CounterRegs,
}

impl Counter<'_> {
    /// Primitives spent by [`Counter::append`].
    pub fn append_cost(&self) -> usize {
        3 * (1 + self.wiring.join_cost())
    }

    /// Grows each chain by one node at its tail, colored `prev`, `cur`,
    /// `next` respectively.
    pub fn append(&self, g: &mut StorageGraph, regs: &mut Registers, colors: [Color; 3]) -> Result<(), Fault> {
        let r = &self.regs;
        let chains = [(r.prev_head, r.prev_tail), (r.cur_head, r.cur_tail), (r.next_head, r.next_tail)];
        for ((head, tail), color) in chains.into_iter().zip(colors) {
            let node = g.create_node(color)?;
            match regs[tail] {
                Some(t) => self.wiring.join(g, t, node)?,
                None => {
                    idle(g, node, self.wiring.join_cost())?;
                    regs[head] = Some(node);
                }
            }
            regs[tail] = Some(node);
        }
        Ok(())
    }

    /// Positions the increment walk at the tails of `C_cur` and `C_next`.
    pub fn begin_walk(&self, regs: &mut Registers, ctl: &mut CounterCtl) {
        regs[self.regs.inc_cur] = regs[self.regs.cur_tail];
        regs[self.regs.inc_next] = regs[self.regs.next_tail];
        *ctl = CounterCtl { carry: true, ..CounterCtl::default() };
    }

    pub fn walk_finished(&self, regs: &Registers) -> bool {
        regs[self.regs.inc_cur].is_none()
    }

    /// Writes one bit of `C_cur + 1` into `C_next` and steps toward the
    /// head. Four primitives. Returns `false`, without spending anything,
    /// when the walk has already passed the head.
    pub fn walk_position(&self, g: &mut StorageGraph, regs: &mut Registers, ctl: &mut CounterCtl) -> Result<bool, Fault> {
        let Some(cur) = regs[self.regs.inc_cur] else {
            return Ok(false);
        };
        let next = regs.node(self.regs.inc_next)?;
        let bit = g.get_color(cur)? == ONE;
        g.set_color(next, bit_color(bit ^ ctl.carry))?;
        ctl.last_carry_in = ctl.carry;
        ctl.last_bit = bit;
        ctl.carry &= bit;
        regs[self.regs.inc_cur] = g.neighbor(cur, self.wiring.toward_head)?;
        regs[self.regs.inc_next] = g.neighbor(next, self.wiring.toward_head)?;
        Ok(true)
    }

    /// `C_prev <- C_cur <- C_next <- C_prev`. Register moves only.
    pub fn rotate(&self, regs: &mut Registers) {
        let r = &self.regs;
        let (ph, pt) = (regs[r.prev_head], regs[r.prev_tail]);
        regs[r.prev_head] = regs[r.cur_head];
        regs[r.prev_tail] = regs[r.cur_tail];
        regs[r.cur_head] = regs[r.next_head];
        regs[r.cur_tail] = regs[r.next_tail];
        regs[r.next_head] = ph;
        regs[r.next_tail] = pt;
    }
}

/// A bit read from a chain reader, most significant first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReadBit {
    pub bit: bool,
    /// The reader just consumed the tail.
    pub last: bool,
}

/// Reads the bit under `reader` and advances it toward the tail. Two
/// primitives, or none when the reader is already past the tail.
pub fn read_msb(g: &mut StorageGraph, w: &Wiring, regs: &mut Registers, reader: Reg) -> Result<Option<ReadBit>, Fault> {
    let Some(at) = regs[reader] else {
        return Ok(None);
    };
    let bit = g.get_color(at)? == ONE;
    let next = g.neighbor(at, w.toward_tail)?;
    regs[reader] = next;
    Ok(Some(ReadBit { bit, last: next.is_none() }))
}

/// Zero-cost: value of the chain starting at `head`, and its length.
pub fn peek_chain(g: &StorageGraph, w: &Wiring, head: Option<NodeRef>) -> Result<(u64, usize), EngineError> {
    let (mut value, mut len, mut at) = (0u64, 0usize, head);
    while let Some(node) = at {
        value = (value << 1) | u64::from(g.peek_color(node)? == ONE);
        len += 1;
        at = g.peek_neighbor(node, w.toward_tail)?;
    }
    Ok((value, len))
}

/// Zero-cost: follows `bits` (most significant first, `width` of them) from
/// `root` through child ports.
pub fn peek_path(g: &StorageGraph, w: &Wiring, root: NodeRef, bits: u64, width: usize) -> Result<Option<NodeRef>, EngineError> {
    let mut at = root;
    for j in (0..width).rev() {
        match g.peek_neighbor(at, w.child((bits >> j) & 1 == 1))? {
            Some(next) => at = next,
            None => return Ok(None),
        }
    }
    Ok(Some(at))
}

/// Zero-cost: every node exactly `depth` child-links below `root`.
pub fn peek_level(g: &StorageGraph, w: &Wiring, root: NodeRef, depth: usize) -> Result<Vec<NodeRef>, EngineError> {
    let mut level = vec![root];
    for _ in 0..depth {
        let mut below = Vec::with_capacity(level.len() * 2);
        for node in level {
            for port in [w.zero_child, w.one_child] {
                if let Some(c) = g.peek_neighbor(node, port)? {
                    below.push(c);
                }
            }
        }
        level = below;
    }
    Ok(level)
}
