//! Storage-graph memory shared by both pointer-machine variants.
//!
//! A [`StorageGraph`] is a set of colored nodes whose links hang off named
//! ports. Under [`ModelKind::Kum`] a link is an undirected edge recorded on
//! both endpoints and every node's degree is capped by the graph's degree
//! bound. Under [`ModelKind::Smm`] a link is a one-sided pointer keyed by
//! `(node, direction)`; out-degree is capped by the size of the direction
//! alphabet and in-degree is unconstrained.
//!
//! Every machine primitive costs exactly one metered step. Observers prefixed
//! `peek_` and [`StorageGraph::stats`] cost nothing: they exist for the test
//! harness and never appear in a machine program. A primitive that fails
//! leaves the graph, including its step counter, unchanged.

use std::fmt;

use thiserror::Error;

/// Largest palette a graph accepts.
pub const MAX_PALETTE: usize = 64;

/// Which pointer-machine memory discipline a graph follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Kolmogorov-Uspensky: undirected edges, degree at most `D`.
    Kum,
    /// Storage modification: directed pointers, out-degree at most `|labels|`.
    Smm,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Kum => f.write_str("kum"),
            ModelKind::Smm => f.write_str("smm"),
        }
    }
}

/// Handle to a node. Nodes are never deleted, so a handle never dangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef(u32);

impl NodeRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index into the palette fixed at graph creation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Color(pub u8);

/// Index into the port-label alphabet fixed at graph creation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PortLabel(pub u8);

/// Shape of a fresh graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphConfig {
    pub model: ModelKind,
    /// Degree bound `D`. Required for KUM; ignored for SMM where the
    /// out-degree cap is the label count.
    pub degree_bound: Option<usize>,
    pub palette: Vec<&'static str>,
    pub labels: Vec<&'static str>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("degree bound must be at least 1")]
    ZeroDegreeBound,
    #[error("KUM graphs need a degree bound")]
    MissingDegreeBound,
    #[error("palette must be nonempty")]
    EmptyPalette,
    #[error("palette of {0} colors exceeds the limit of {MAX_PALETTE}")]
    PaletteTooLarge(usize),
    #[error("port label alphabet must be nonempty")]
    EmptyLabels,
    #[error("port label alphabet of {0} labels is too large")]
    TooManyLabels(usize),
    #[error("unknown color {0}")]
    UnknownColor(u8),
    #[error("unknown port label {0}")]
    UnknownPort(u8),
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("node {node} would exceed degree bound {bound}")]
    DegreeBoundExceeded { node: u32, bound: usize },
    #[error("port {port} of node {node} is occupied")]
    PortOccupied { node: u32, port: u8 },
    #[error("port {port} of node {node} is free")]
    PortFree { node: u32, port: u8 },
    #[error("operation `{op}` is not available on a {model} graph")]
    WrongModel { op: &'static str, model: ModelKind },
    #[error("a self-loop must use two distinct ports")]
    SelfLoopSamePort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Edge {
    to: NodeRef,
    // Port on `to` holding the other end; KUM only.
    back: Option<PortLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    color: Color,
    ports: Vec<Option<Edge>>,
    degree: u32,
    in_degree: u32,
}

/// Zero-cost snapshot of graph instrumentation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize)]
pub struct GraphStats {
    pub node_count: usize,
    /// Largest number of occupied ports ever seen on one node (degree for
    /// KUM, out-degree for SMM).
    pub max_degree: usize,
    /// Largest number of incoming links ever seen on one node. For KUM this
    /// coincides with the degree since edges are undirected.
    pub max_in_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageGraph {
    model: ModelKind,
    degree_bound: usize,
    palette: Vec<&'static str>,
    labels: Vec<&'static str>,
    nodes: Vec<Node>,
    steps: u64,
    max_degree: u32,
    max_in_degree: u32,
}

impl StorageGraph {
    /// Builds a graph holding a single node of the default color (palette
    /// entry 0). No steps are charged.
    pub fn new(config: &GraphConfig) -> Result<Self, EngineError> {
        if config.palette.is_empty() {
            return Err(EngineError::EmptyPalette);
        }
        if config.palette.len() > MAX_PALETTE {
            return Err(EngineError::PaletteTooLarge(config.palette.len()));
        }
        if config.labels.is_empty() {
            return Err(EngineError::EmptyLabels);
        }
        if config.labels.len() > u8::MAX as usize {
            return Err(EngineError::TooManyLabels(config.labels.len()));
        }
        let degree_bound = match config.model {
            ModelKind::Kum => match config.degree_bound {
                None => return Err(EngineError::MissingDegreeBound),
                Some(0) => return Err(EngineError::ZeroDegreeBound),
                Some(d) => d,
            },
            ModelKind::Smm => config.labels.len(),
        };
        let mut g = StorageGraph {
            model: config.model,
            degree_bound,
            palette: config.palette.clone(),
            labels: config.labels.clone(),
            nodes: Vec::new(),
            steps: 0,
            max_degree: 0,
            max_in_degree: 0,
        };
        g.push_node(Color(0));
        Ok(g)
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    /// Degree cap: `D` for KUM, the out-degree cap `|labels|` for SMM.
    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// The node present before any primitive ran.
    pub fn origin(&self) -> NodeRef {
        NodeRef(0)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn color_name(&self, c: Color) -> Option<&'static str> {
        self.palette.get(c.0 as usize).copied()
    }

    pub fn label_name(&self, p: PortLabel) -> Option<&'static str> {
        self.labels.get(p.0 as usize).copied()
    }

    fn push_node(&mut self, color: Color) -> NodeRef {
        let r = NodeRef(self.nodes.len() as u32);
        self.nodes.push(Node {
            color,
            ports: vec![None; self.labels.len()],
            degree: 0,
            in_degree: 0,
        });
        r
    }

    fn check_color(&self, c: Color) -> Result<(), EngineError> {
        if (c.0 as usize) < self.palette.len() {
            Ok(())
        } else {
            Err(EngineError::UnknownColor(c.0))
        }
    }

    fn check_port(&self, p: PortLabel) -> Result<(), EngineError> {
        if (p.0 as usize) < self.labels.len() {
            Ok(())
        } else {
            Err(EngineError::UnknownPort(p.0))
        }
    }

    fn node(&self, a: NodeRef) -> Result<&Node, EngineError> {
        self.nodes.get(a.index()).ok_or(EngineError::UnknownNode(a.0))
    }

    fn tick(&mut self) {
        self.steps += 1;
    }

    fn note_degrees(&mut self, a: NodeRef) {
        let n = &self.nodes[a.index()];
        self.max_degree = self.max_degree.max(n.degree);
        self.max_in_degree = self.max_in_degree.max(n.in_degree);
    }

    pub fn create_node(&mut self, c: Color) -> Result<NodeRef, EngineError> {
        self.check_color(c)?;
        self.tick();
        Ok(self.push_node(c))
    }

    /// Joins port `pa` of `a` and port `pb` of `b` with an undirected edge.
    pub fn link(
        &mut self,
        a: NodeRef,
        pa: PortLabel,
        b: NodeRef,
        pb: PortLabel,
    ) -> Result<(), EngineError> {
        if self.model != ModelKind::Kum {
            return Err(EngineError::WrongModel { op: "link", model: self.model });
        }
        self.check_port(pa)?;
        self.check_port(pb)?;
        let (na, nb) = (self.node(a)?, self.node(b)?);
        if a == b && pa == pb {
            return Err(EngineError::SelfLoopSamePort);
        }
        if na.ports[pa.0 as usize].is_some() {
            return Err(EngineError::PortOccupied { node: a.0, port: pa.0 });
        }
        if nb.ports[pb.0 as usize].is_some() {
            return Err(EngineError::PortOccupied { node: b.0, port: pb.0 });
        }
        let bound = self.degree_bound;
        let grow_a = if a == b { 2 } else { 1 };
        if na.degree as usize + grow_a > bound {
            return Err(EngineError::DegreeBoundExceeded { node: a.0, bound });
        }
        if a != b && nb.degree as usize + 1 > bound {
            return Err(EngineError::DegreeBoundExceeded { node: b.0, bound });
        }
        self.tick();
        self.nodes[a.index()].ports[pa.0 as usize] = Some(Edge { to: b, back: Some(pb) });
        self.nodes[b.index()].ports[pb.0 as usize] = Some(Edge { to: a, back: Some(pa) });
        self.nodes[a.index()].degree += 1;
        self.nodes[b.index()].degree += 1;
        for n in [a, b] {
            let node = &mut self.nodes[n.index()];
            node.in_degree = node.degree;
        }
        self.note_degrees(a);
        self.note_degrees(b);
        Ok(())
    }

    /// Points direction `d` of `a` at `b`, replacing any previous target.
    pub fn set_pointer(&mut self, a: NodeRef, d: PortLabel, b: NodeRef) -> Result<(), EngineError> {
        if self.model != ModelKind::Smm {
            return Err(EngineError::WrongModel { op: "set_pointer", model: self.model });
        }
        self.check_port(d)?;
        self.node(a)?;
        self.node(b)?;
        self.tick();
        let old = self.nodes[a.index()].ports[d.0 as usize].replace(Edge { to: b, back: None });
        match old {
            Some(e) => self.nodes[e.to.index()].in_degree -= 1,
            None => self.nodes[a.index()].degree += 1,
        }
        self.nodes[b.index()].in_degree += 1;
        self.note_degrees(a);
        self.note_degrees(b);
        Ok(())
    }

    /// Removes the link on `port` of `a`: both ends for KUM, one side for SMM.
    pub fn unlink(&mut self, a: NodeRef, port: PortLabel) -> Result<(), EngineError> {
        self.check_port(port)?;
        let edge = self.node(a)?.ports[port.0 as usize]
            .ok_or(EngineError::PortFree { node: a.0, port: port.0 })?;
        self.tick();
        self.nodes[a.index()].ports[port.0 as usize] = None;
        match self.model {
            ModelKind::Kum => {
                let back = edge.back.expect("KUM edges record their back port");
                self.nodes[edge.to.index()].ports[back.0 as usize] = None;
                self.nodes[a.index()].degree -= 1;
                self.nodes[edge.to.index()].degree -= 1;
                for n in [a, edge.to] {
                    let node = &mut self.nodes[n.index()];
                    node.in_degree = node.degree;
                }
            }
            ModelKind::Smm => {
                self.nodes[a.index()].degree -= 1;
                self.nodes[edge.to.index()].in_degree -= 1;
            }
        }
        Ok(())
    }

    /// Follows `port` of `a`.
    pub fn neighbor(&mut self, a: NodeRef, port: PortLabel) -> Result<Option<NodeRef>, EngineError> {
        let target = self.peek_neighbor(a, port)?;
        self.tick();
        Ok(target)
    }

    pub fn get_color(&mut self, a: NodeRef) -> Result<Color, EngineError> {
        let c = self.node(a)?.color;
        self.tick();
        Ok(c)
    }

    pub fn set_color(&mut self, a: NodeRef, c: Color) -> Result<(), EngineError> {
        self.check_color(c)?;
        self.node(a)?;
        self.tick();
        self.nodes[a.index()].color = c;
        Ok(())
    }

    /// Constant-time identity test of two reached nodes.
    pub fn identity_eq(&mut self, a: NodeRef, b: NodeRef) -> Result<bool, EngineError> {
        self.node(a)?;
        self.node(b)?;
        self.tick();
        Ok(a == b)
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            node_count: self.nodes.len(),
            max_degree: self.max_degree as usize,
            max_in_degree: self.max_in_degree as usize,
        }
    }

    pub fn peek_neighbor(&self, a: NodeRef, port: PortLabel) -> Result<Option<NodeRef>, EngineError> {
        self.check_port(port)?;
        Ok(self.node(a)?.ports[port.0 as usize].map(|e| e.to))
    }

    pub fn peek_color(&self, a: NodeRef) -> Result<Color, EngineError> {
        Ok(self.node(a)?.color)
    }

    /// Current number of occupied ports on `a`.
    pub fn degree(&self, a: NodeRef) -> Result<usize, EngineError> {
        Ok(self.node(a)?.degree as usize)
    }

    /// Current number of links arriving at `a`.
    pub fn in_degree(&self, a: NodeRef) -> Result<usize, EngineError> {
        Ok(self.node(a)?.in_degree as usize)
    }
}
