//! Directed graphs over the vertex set `{0, .., q-1}` and the local-move
//! operators that define the structure proposal.
//!
//! Vertex `0` is the latent response. It may have parents but never
//! children. External formats use 1-based labels, so vertex `0` here is
//! node `1` in edge-list files.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Index of the latent response vertex.
pub const RESPONSE: usize = 0;

/// A directed graph with a dense adjacency matrix and no structural
/// invariants beyond "no self loops". Used for thresholded edge sets, which
/// may contain cycles.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Digraph {
    q: usize,
    adj: Vec<bool>,
}

impl Digraph {
    pub fn new(q: usize) -> Self {
        Digraph {
            q,
            adj: vec![false; q * q],
        }
    }

    pub fn from_edges<I>(q: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Digraph::new(q);
        for (u, v) in edges {
            g.insert(u, v)?;
        }
        Ok(g)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.q {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                q: self.q,
            })
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.q && v < self.q && self.adj[u * self.q + v]
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::InvalidEdge {
                from: u,
                to: v,
                reason: "self loop",
            });
        }
        self.adj[u * self.q + v] = true;
        Ok(())
    }

    pub fn remove(&mut self, u: usize, v: usize) {
        if u < self.q && v < self.q {
            self.adj[u * self.q + v] = false;
        }
    }

    /// Flips the presence of `u -> v`.
    pub fn toggle(&mut self, u: usize, v: usize) -> Result<()> {
        if self.has_edge(u, v) {
            self.remove(u, v);
            Ok(())
        } else {
            self.insert(u, v)
        }
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }

    /// Edges in row-major order (by tail, then head).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let q = self.q;
        self.adj
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / q, i % q))
    }

    /// Edges present in exactly one of `self` and `other`.
    pub fn symmetric_difference(&self, other: &Digraph) -> Vec<(usize, usize)> {
        debug_assert_eq!(self.q, other.q);
        let q = self.q;
        self.adj
            .iter()
            .zip(&other.adj)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| (i / q, i % q))
            .collect()
    }

    /// Kahn's algorithm; `None` when a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let q = self.q;
        let mut indeg = vec![0usize; q];
        for (_, v) in self.edges() {
            indeg[v] += 1;
        }
        let mut stack: Vec<usize> = (0..q).rev().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(q);
        while let Some(u) = stack.pop() {
            order.push(u);
            for v in (0..q).rev() {
                if self.adj[u * q + v] {
                    indeg[v] -= 1;
                    if indeg[v] == 0 {
                        stack.push(v);
                    }
                }
            }
        }
        (order.len() == q).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// `reach[u * q + v]` is true when a directed path of length >= 1 leads
    /// from `u` to `v`.
    pub fn reachability(&self) -> Vec<bool> {
        let q = self.q;
        let mut reach = vec![false; q * q];
        let mut stack = Vec::with_capacity(q);
        for src in 0..q {
            stack.clear();
            stack.push(src);
            while let Some(u) = stack.pop() {
                for v in 0..q {
                    if self.adj[u * q + v] && !reach[src * q + v] {
                        reach[src * q + v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        reach
    }
}

/// True iff the graph admits a topological ordering.
pub fn is_acyclic(graph: &Digraph) -> bool {
    graph.is_acyclic()
}

/// A DAG in which vertex [`RESPONSE`] has no children and no pair of
/// vertices is joined in both directions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dag {
    graph: Digraph,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn empty(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("a DAG needs at least one vertex".into()));
        }
        Ok(Dag {
            graph: Digraph::new(q),
            parents: vec![Vec::new(); q],
        })
    }

    pub fn from_edges<I>(q: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Dag::try_from_digraph(Digraph::from_edges(q, edges)?)
    }

    pub fn try_from_digraph(graph: Digraph) -> Result<Self> {
        if graph.q() == 0 {
            return Err(Error::InvalidConfig("a DAG needs at least one vertex".into()));
        }
        for (u, v) in graph.edges() {
            if u == RESPONSE {
                return Err(Error::InvalidEdge {
                    from: u,
                    to: v,
                    reason: "the response vertex cannot have children",
                });
            }
            if graph.has_edge(v, u) {
                return Err(Error::InvalidEdge {
                    from: u,
                    to: v,
                    reason: "both directions present",
                });
            }
        }
        if !graph.is_acyclic() {
            return Err(Error::Cyclic);
        }
        let q = graph.q();
        let mut parents = vec![Vec::new(); q];
        for (u, v) in graph.edges() {
            parents[v].push(u);
        }
        for p in &mut parents {
            p.sort_unstable();
        }
        Ok(Dag { graph, parents })
    }

    /// Every covariate is a parent of the response and nothing else.
    pub fn star(q: usize) -> Result<Self> {
        Dag::from_edges(q, (1..q).map(|u| (u, RESPONSE)))
    }

    pub fn q(&self) -> usize {
        self.graph.q()
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.graph.has_edge(u, v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.graph.edges()
    }

    pub fn as_digraph(&self) -> &Digraph {
        &self.graph
    }

    /// Sorted parent set of `j`. Panics when `j` is out of range; use
    /// [`Dag::try_parents`] for checked access.
    pub fn parents(&self, j: usize) -> &[usize] {
        &self.parents[j]
    }

    pub fn try_parents(&self, j: usize) -> Result<&[usize]> {
        self.parents.get(j).map(Vec::as_slice).ok_or(Error::VertexOutOfRange {
            vertex: j,
            q: self.q(),
        })
    }

    /// `j` followed by its sorted parents.
    pub fn family(&self, j: usize) -> Result<Vec<usize>> {
        let pa = self.try_parents(j)?;
        let mut fa = Vec::with_capacity(pa.len() + 1);
        fa.push(j);
        fa.extend_from_slice(pa);
        Ok(fa)
    }

    pub fn children(&self, j: usize) -> Result<Vec<usize>> {
        self.graph.check(j)?;
        Ok((0..self.q()).filter(|&v| self.graph.has_edge(j, v)).collect())
    }

    pub fn topological_order(&self) -> Vec<usize> {
        self.graph
            .topological_order()
            .expect("Dag invariant: acyclic")
    }

    /// All operators whose application yields another valid DAG.
    pub fn valid_operators(&self) -> Vec<DagOperator> {
        self.valid_operators_capped(None)
    }

    /// Like [`Dag::valid_operators`], dropping insertions that would exceed
    /// `max_edges`.
    pub fn valid_operators_capped(&self, max_edges: Option<usize>) -> Vec<DagOperator> {
        let q = self.q();
        let reach = self.graph.reachability();
        let can_insert = max_edges.is_none_or(|m| self.n_edges() < m);
        let mut ops = Vec::new();
        for u in 0..q {
            for v in 0..q {
                if u == v {
                    continue;
                }
                if self.has_edge(u, v) {
                    ops.push(DagOperator::delete(u, v));
                    if self.reversal_is_valid(u, v, &reach) {
                        ops.push(DagOperator::reverse(u, v));
                    }
                } else if can_insert
                    && u != RESPONSE
                    && !self.has_edge(v, u)
                    && !reach[v * q + u]
                {
                    ops.push(DagOperator::insert(u, v));
                }
            }
        }
        ops
    }

    /// Number of valid operators, without materializing them.
    pub fn count_valid_operators(&self, max_edges: Option<usize>) -> usize {
        let q = self.q();
        let reach = self.graph.reachability();
        let can_insert = max_edges.is_none_or(|m| self.n_edges() < m);
        let mut count = 0;
        for u in 0..q {
            for v in 0..q {
                if u == v {
                    continue;
                }
                if self.has_edge(u, v) {
                    count += 1;
                    if self.reversal_is_valid(u, v, &reach) {
                        count += 1;
                    }
                } else if can_insert
                    && u != RESPONSE
                    && !self.has_edge(v, u)
                    && !reach[v * q + u]
                {
                    count += 1;
                }
            }
        }
        count
    }

    // Reversing u -> v closes a cycle iff another path u ~> v exists.
    fn reversal_is_valid(&self, u: usize, v: usize, reach: &[bool]) -> bool {
        let q = self.q();
        if v == RESPONSE {
            return false;
        }
        !(0..q).any(|c| c != v && self.has_edge(u, c) && reach[c * q + v])
    }

    pub fn is_valid_operator(&self, op: &DagOperator) -> bool {
        let q = self.q();
        let (u, v) = (op.from, op.to);
        if u >= q || v >= q || u == v {
            return false;
        }
        match op.kind {
            OpKind::Delete => self.has_edge(u, v),
            OpKind::Reverse => {
                self.has_edge(u, v) && self.reversal_is_valid(u, v, &self.graph.reachability())
            }
            OpKind::Insert => {
                u != RESPONSE
                    && !self.has_edge(u, v)
                    && !self.has_edge(v, u)
                    && !self.graph.reachability()[v * q + u]
            }
        }
    }

    /// Returns the DAG obtained by applying `op`.
    pub fn apply(&self, op: &DagOperator) -> Result<Dag> {
        if !self.is_valid_operator(op) {
            return Err(Error::InvalidOperator(*op));
        }
        let mut next = self.clone();
        next.apply_unchecked(op);
        Ok(next)
    }

    /// In-place application for operators already known to be valid (for
    /// example, drawn from [`Dag::valid_operators`]).
    pub fn apply_unchecked(&mut self, op: &DagOperator) {
        let (u, v) = (op.from, op.to);
        match op.kind {
            OpKind::Insert => self.add_edge(u, v),
            OpKind::Delete => self.drop_edge(u, v),
            OpKind::Reverse => {
                self.drop_edge(u, v);
                self.add_edge(v, u);
            }
        }
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        let q = self.q();
        self.graph.adj[u * q + v] = true;
        let pa = &mut self.parents[v];
        if let Err(pos) = pa.binary_search(&u) {
            pa.insert(pos, u);
        }
    }

    fn drop_edge(&mut self, u: usize, v: usize) {
        let q = self.q();
        self.graph.adj[u * q + v] = false;
        self.parents[v].retain(|&p| p != u);
    }

    /// Serializes as one `u v` line per edge with 1-based labels.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        out
    }

    /// Parses the format produced by [`Dag::to_edge_list`]. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_edge_list(q: usize, text: &str) -> Result<Dag> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) if u >= 1 && v >= 1 => {
                    edges.push((u - 1, v - 1))
                }
                _ => {
                    return Err(Error::InvalidData(format!(
                        "edge list line {}: expected two 1-based vertex labels, got {:?}",
                        lineno + 1,
                        line
                    )))
                }
            }
        }
        Dag::from_edges(q, edges)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Dag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.graph.serialize(s)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Dag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let g = Digraph::deserialize(d)?;
        Dag::try_from_digraph(g).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OpKind {
    Insert,
    Delete,
    Reverse,
}

/// A local modification of a DAG acting on the edge `from -> to`.
///
/// For `Reverse`, `from -> to` is the edge present before the move.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DagOperator {
    pub kind: OpKind,
    pub from: usize,
    pub to: usize,
}

impl DagOperator {
    pub fn insert(from: usize, to: usize) -> Self {
        DagOperator {
            kind: OpKind::Insert,
            from,
            to,
        }
    }

    pub fn delete(from: usize, to: usize) -> Self {
        DagOperator {
            kind: OpKind::Delete,
            from,
            to,
        }
    }

    pub fn reverse(from: usize, to: usize) -> Self {
        DagOperator {
            kind: OpKind::Reverse,
            from,
            to,
        }
    }

    /// The operator that undoes `self`.
    pub fn inverse(&self) -> Self {
        match self.kind {
            OpKind::Insert => DagOperator::delete(self.from, self.to),
            OpKind::Delete => DagOperator::insert(self.from, self.to),
            OpKind::Reverse => DagOperator::reverse(self.to, self.from),
        }
    }

    /// Vertices whose parent set changes. A reversal is a deletion followed
    /// by an insertion, so it touches both endpoints.
    pub fn affected_nodes(&self) -> ([usize; 2], usize) {
        match self.kind {
            OpKind::Insert | OpKind::Delete => ([self.to, self.to], 1),
            OpKind::Reverse => ([self.to, self.from], 2),
        }
    }
}

impl fmt::Display for DagOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            OpKind::Insert => "InsertD",
            OpKind::Delete => "DeleteD",
            OpKind::Reverse => "ReverseD",
        };
        write!(f, "{} {}->{}", name, self.from + 1, self.to + 1)
    }
}
