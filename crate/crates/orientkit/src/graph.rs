//! Mixed multigraphs, demand pair lists, and edge orientations.
//!
//! A [`MixedGraph`] holds undirected edges and directed arcs over dense node
//! ids `0..n`. Edge and arc ids are positions in their respective lists, so
//! they stay dense and stable. Parallel edges and parallel arcs are fine;
//! self-loops are rejected at construction (contractions drop the loops they
//! create instead of storing them).

use std::collections::VecDeque;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction assigned to an undirected edge, relative to its stored endpoints:
/// `Forward` sends `u -> v`, `Backward` sends `v -> u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDir {
    Forward,
    Backward,
}

impl EdgeDir {
    #[must_use]
    pub fn flipped(self) -> Self {
        match self {
            EdgeDir::Forward => EdgeDir::Backward,
            EdgeDir::Backward => EdgeDir::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedEdge {
    pub u: usize,
    pub v: usize,
    pub cost: Rational64,
}

impl UndirectedEdge {
    /// The endpoint other than `x`; panics if `x` is not an endpoint.
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            debug_assert_eq!(x, self.v);
            self.u
        }
    }

    /// Direction that sends this edge out of `from` into the other endpoint.
    pub fn dir_from(&self, from: usize) -> EdgeDir {
        if from == self.u {
            EdgeDir::Forward
        } else {
            debug_assert_eq!(from, self.v);
            EdgeDir::Backward
        }
    }

    /// Tail and head under `dir`.
    pub fn endpoints(&self, dir: EdgeDir) -> (usize, usize) {
        match dir {
            EdgeDir::Forward => (self.u, self.v),
            EdgeDir::Backward => (self.v, self.u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MixedGraph {
    n: usize,
    edges: Vec<UndirectedEdge>,
    arcs: Vec<Arc>,
}

impl MixedGraph {
    #[must_use]
    pub fn new(n: usize) -> Self {
        MixedGraph { n, edges: Vec::new(), arcs: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::NodeOutOfRange { node: v, n: self.n });
        }
        Ok(())
    }

    /// Adds an undirected edge and returns its id.
    pub fn add_edge(&mut self, u: usize, v: usize, cost: Rational64) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop { u });
        }
        if cost < Rational64::zero() {
            return Err(Error::NegativeCost { u, v });
        }
        self.edges.push(UndirectedEdge { u, v, cost });
        Ok(self.edges.len() - 1)
    }

    /// Adds an undirected edge of cost 1.
    pub fn add_unit_edge(&mut self, u: usize, v: usize) -> Result<usize> {
        self.add_edge(u, v, Rational64::from_integer(1))
    }

    /// Adds a directed arc and returns its id.
    pub fn add_arc(&mut self, tail: usize, head: usize) -> Result<usize> {
        self.check_node(tail)?;
        self.check_node(head)?;
        if tail == head {
            return Err(Error::SelfLoop { u: tail });
        }
        self.arcs.push(Arc { tail, head });
        Ok(self.arcs.len() - 1)
    }

    pub fn edge(&self, id: usize) -> &UndirectedEdge {
        &self.edges[id]
    }

    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    pub fn edges(&self) -> &[UndirectedEdge] {
        &self.edges
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_undirected(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_digraph(&self) -> bool {
        self.edges.is_empty()
    }

    /// Sum of costs over the given edge ids.
    pub fn cost_of(&self, edge_ids: &[usize]) -> Rational64 {
        edge_ids.iter().map(|&e| self.edges[e].cost).sum()
    }

    /// Incidence lists over undirected edges only: `adj[v] = [(neighbor, edge id)]`.
    pub fn undirected_adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        adj
    }

    /// Out-neighbor lists of the digraph obtained by keeping all arcs and
    /// orienting every undirected edge per `orientation`. An orientation is
    /// mandatory as soon as the graph has undirected edges.
    pub fn oriented_out_adjacency(&self, orientation: Option<&Orientation>) -> Result<Vec<Vec<usize>>> {
        let mut adj = vec![Vec::new(); self.n];
        for a in &self.arcs {
            adj[a.tail].push(a.head);
        }
        match orientation {
            Some(d) => {
                d.check_domain(self)?;
                for (id, e) in self.edges.iter().enumerate() {
                    let (tail, head) = e.endpoints(d.get(id));
                    adj[tail].push(head);
                }
            }
            None => {
                if !self.edges.is_empty() {
                    return Err(Error::MissingOrientation);
                }
            }
        }
        Ok(adj)
    }

    /// The digraph with `orientation` applied: arcs are kept, every
    /// undirected edge becomes an arc.
    pub fn apply_orientation(&self, orientation: &Orientation) -> Result<MixedGraph> {
        orientation.check_domain(self)?;
        let mut d = MixedGraph::new(self.n);
        d.arcs = self.arcs.clone();
        for (id, e) in self.edges.iter().enumerate() {
            let (tail, head) = e.endpoints(orientation.get(id));
            d.arcs.push(Arc { tail, head });
        }
        Ok(d)
    }

    /// Connected components of the undirected part (arcs ignored), labelled
    /// `0..k` in order of their minimum node.
    pub fn undirected_components(&self) -> Vec<usize> {
        let adj = self.undirected_adjacency();
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in &adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// An ordered list of demand pairs `(s, t)`, each asking for a directed
/// `s -> t` path. Duplicates are allowed and carry multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairList {
    pairs: Vec<(usize, usize)>,
}

impl PairList {
    #[must_use]
    pub fn new() -> Self {
        PairList { pairs: Vec::new() }
    }

    #[must_use]
    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> Self {
        PairList { pairs }
    }

    pub fn push(&mut self, s: usize, t: usize) {
        self.pairs.push((s, t));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, i: usize) -> (usize, usize) {
        self.pairs[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Checks every endpoint against the node range of a graph with `n` nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        for &(s, t) in &self.pairs {
            if s >= n {
                return Err(Error::NodeOutOfRange { node: s, n });
            }
            if t >= n {
                return Err(Error::NodeOutOfRange { node: t, n });
            }
        }
        Ok(())
    }
}

/// A total orientation of the undirected edges of a companion graph; entry
/// `i` is the direction of edge id `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    dirs: Vec<EdgeDir>,
}

impl Orientation {
    /// All edges `Forward`.
    #[must_use]
    pub fn forward(edge_count: usize) -> Self {
        Orientation { dirs: vec![EdgeDir::Forward; edge_count] }
    }

    #[must_use]
    pub fn from_dirs(dirs: Vec<EdgeDir>) -> Self {
        Orientation { dirs }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn get(&self, edge: usize) -> EdgeDir {
        self.dirs[edge]
    }

    pub fn set(&mut self, edge: usize, dir: EdgeDir) {
        self.dirs[edge] = dir;
    }

    pub fn dirs(&self) -> &[EdgeDir] {
        &self.dirs
    }

    pub fn check_domain(&self, g: &MixedGraph) -> Result<()> {
        if self.dirs.len() != g.edge_count() {
            return Err(Error::OrientationDomainMismatch {
                got: self.dirs.len(),
                expected: g.edge_count(),
            });
        }
        Ok(())
    }
}

/// Indices into `pairs` of the pairs satisfied by the digraph `g` +
/// `orientation`: pair `(s, t)` is satisfied when a directed `s -> t` path
/// exists. Multiplicity is preserved because indices are returned.
pub fn satisfied_pair_indices(
    g: &MixedGraph,
    orientation: Option<&Orientation>,
    pairs: &PairList,
) -> Result<Vec<usize>> {
    pairs.validate(g.node_count())?;
    let adj = g.oriented_out_adjacency(orientation)?;
    // One BFS per distinct source.
    let mut sources: Vec<usize> = pairs.iter().map(|(s, _)| s).collect();
    sources.sort_unstable();
    sources.dedup();
    let mut reach: Vec<(usize, Vec<bool>)> = Vec::with_capacity(sources.len());
    for &s in &sources {
        let mut seen = vec![false; g.node_count()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        reach.push((s, seen));
    }
    let lookup = |s: usize| -> &Vec<bool> {
        let i = reach.binary_search_by_key(&s, |&(src, _)| src).unwrap();
        &reach[i].1
    };
    Ok(pairs
        .iter()
        .enumerate()
        .filter(|&(_, (s, t))| lookup(s)[t])
        .map(|(i, _)| i)
        .collect())
}

/// Like [`satisfied_pair_indices`] but returns the satisfied sub-multiset itself.
pub fn satisfied_pairs(
    g: &MixedGraph,
    orientation: Option<&Orientation>,
    pairs: &PairList,
) -> Result<PairList> {
    let idx = satisfied_pair_indices(g, orientation, pairs)?;
    Ok(PairList::from_pairs(idx.into_iter().map(|i| pairs.get(i)).collect()))
}

/// Result of [`topological_order`]: either a full order over the nodes or a
/// directed cycle as a list of arc ids with `head(a_i) == tail(a_{i+1})`
/// cyclically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologicalOrder {
    Order(Vec<usize>),
    Cycle(Vec<usize>),
}

/// Topological order of the arc part of `g` (undirected edges are ignored),
/// or a directed cycle witness. Kahn's algorithm with a min-heap, so the
/// order is the lexicographically smallest one.
pub fn topological_order(g: &MixedGraph) -> TopologicalOrder {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = g.node_count();
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, a) in g.arcs().iter().enumerate() {
        indeg[a.head] += 1;
        out[a.tail].push((a.head, id));
    }
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    let mut remaining = vec![true; n];
    while let Some(Reverse(v)) = heap.pop() {
        remaining[v] = false;
        order.push(v);
        for &(w, _) in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse(w));
            }
        }
    }
    if order.len() == n {
        return TopologicalOrder::Order(order);
    }

    // Every leftover node keeps a predecessor among the leftovers, so walking
    // predecessors from any of them must close a cycle.
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for (id, a) in g.arcs().iter().enumerate() {
        if remaining[a.tail] && remaining[a.head] && pred[a.head].is_none() {
            pred[a.head] = Some(id);
        }
    }
    let start = (0..n).find(|&v| remaining[v]).expect("leftover node exists");
    let mut seen_at = vec![usize::MAX; n];
    let mut walk: Vec<usize> = Vec::new(); // arc ids, walked backwards
    let mut cur = start;
    loop {
        if seen_at[cur] != usize::MAX {
            let cycle_arcs = &walk[seen_at[cur]..];
            let mut cycle: Vec<usize> = cycle_arcs.to_vec();
            cycle.reverse();
            return TopologicalOrder::Cycle(cycle);
        }
        seen_at[cur] = walk.len();
        let arc = pred[cur].expect("leftover node has a leftover predecessor");
        walk.push(arc);
        cur = g.arc(arc).tail;
    }
}
