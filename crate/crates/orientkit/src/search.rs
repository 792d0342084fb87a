//! Exact decision primitives: the near-linear tree orientability test and
//! the exhaustive orientation oracle used as ground truth in testing.

use crate::error::{Error, Result};
use crate::graph::{
    satisfied_pair_indices, EdgeDir, MixedGraph, Orientation, PairList,
};
use crate::kernel::{contract_to_tree, lift_orientation, DropResolution};
use crate::lca::LcaIndex;

/// Accumulated requirement on a single edge while demand paths are marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeConstraint {
    Free,
    MustForward,
    MustBackward,
    Conflict,
}

impl EdgeConstraint {
    /// Combines two requirements; commutative and idempotent, with
    /// `Conflict` absorbing.
    #[must_use]
    pub fn join(self, other: EdgeConstraint) -> EdgeConstraint {
        use EdgeConstraint::*;
        match (self, other) {
            (Free, x) | (x, Free) => x,
            (Conflict, _) | (_, Conflict) => Conflict,
            (MustForward, MustForward) => MustForward,
            (MustBackward, MustBackward) => MustBackward,
            (MustForward, MustBackward) | (MustBackward, MustForward) => Conflict,
        }
    }
}

/// Why a pair set cannot be fully oriented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibleWitness {
    /// Pairs `pair_a` and `pair_b` (indices into the input list) demand
    /// opposite directions of edge `edge`.
    EdgeConflict { edge: usize, pair_a: usize, pair_b: usize },
    /// This pair's endpoints lie in different connected components.
    DisconnectedPair { pair: usize },
}

/// Outcome of a full-satisfaction decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrientationDecision {
    Feasible(Orientation),
    Infeasible(InfeasibleWitness),
}

impl OrientationDecision {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OrientationDecision::Feasible(_))
    }
}

/// Pointer chain that skips over already-marked parent edges; `find`
/// returns the first node at or above `v` whose parent edge is unmarked.
struct SkipChain {
    next: Vec<usize>,
}

impl SkipChain {
    fn new(n: usize) -> Self {
        SkipChain { next: (0..n).collect() }
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.next[root] != root {
            root = self.next[root];
        }
        let mut cur = v;
        while self.next[cur] != root {
            let nx = self.next[cur];
            self.next[cur] = root;
            cur = nx;
        }
        root
    }
}

/// Decides whether a forest admits an orientation satisfying *every* pair.
/// Each pair's unique path is split at the LCA: edges on the source half
/// must point child→parent, edges on the target half parent→child. Two
/// skip chains (one per direction) ensure each edge is marked at most once
/// per direction, so the whole scan is near-linear. Unconstrained edges
/// default to `Forward`.
pub fn decide_tree_orientable(forest: &MixedGraph, pairs: &PairList) -> Result<OrientationDecision> {
    pairs.validate(forest.node_count())?;
    let idx = LcaIndex::build_forest(forest)?;
    let n = forest.node_count();
    let m = forest.edge_count();
    // marks[e]: pair that first demanded child→parent (up) / parent→child (down).
    let mut up_mark: Vec<Option<usize>> = vec![None; m];
    let mut down_mark: Vec<Option<usize>> = vec![None; m];
    let mut up_chain = SkipChain::new(n);
    let mut down_chain = SkipChain::new(n);

    for (i, (s, t)) in pairs.iter().enumerate() {
        if s == t {
            continue;
        }
        let Some(l) = idx.lca(s, t) else {
            return Ok(OrientationDecision::Infeasible(InfeasibleWitness::DisconnectedPair {
                pair: i,
            }));
        };
        let ld = idx.depth(l);
        // Source half: climb from s, demanding child→parent.
        let mut v = up_chain.find(s);
        while idx.depth(v) > ld {
            let e = idx.parent_edge(v).expect("non-root node has a parent edge");
            if let Some(j) = down_mark[e] {
                return Ok(OrientationDecision::Infeasible(InfeasibleWitness::EdgeConflict {
                    edge: e,
                    pair_a: j,
                    pair_b: i,
                }));
            }
            up_mark[e] = Some(i);
            let p = idx.parent(v);
            up_chain.next[v] = p;
            v = up_chain.find(p);
        }
        // Target half: climb from t, demanding parent→child.
        let mut v = down_chain.find(t);
        while idx.depth(v) > ld {
            let e = idx.parent_edge(v).expect("non-root node has a parent edge");
            if let Some(j) = up_mark[e] {
                return Ok(OrientationDecision::Infeasible(InfeasibleWitness::EdgeConflict {
                    edge: e,
                    pair_a: j,
                    pair_b: i,
                }));
            }
            down_mark[e] = Some(i);
            let p = idx.parent(v);
            down_chain.next[v] = p;
            v = down_chain.find(p);
        }
    }

    let mut orientation = Orientation::forward(m);
    for e in 0..m {
        let ed = forest.edge(e);
        let child = if idx.depth(ed.u) > idx.depth(ed.v) { ed.u } else { ed.v };
        if up_mark[e].is_some() {
            orientation.set(e, ed.dir_from(child));
        } else if down_mark[e].is_some() {
            orientation.set(e, ed.dir_from(child).flipped());
        }
    }
    debug_assert_eq!(
        satisfied_pair_indices(forest, Some(&orientation), pairs).unwrap().len(),
        pairs.len()
    );
    Ok(OrientationDecision::Feasible(orientation))
}

/// Decides whether an undirected graph admits an orientation satisfying
/// every pair, by contracting to a forest, deciding there, and lifting the
/// result back. Witness indices refer to the input pair list; a conflict
/// edge id refers to the input graph.
pub fn decide_undirected_orientable(
    g: &MixedGraph,
    pairs: &PairList,
) -> Result<OrientationDecision> {
    let tc = contract_to_tree(g, pairs)?;
    if let Some(d) = tc
        .dropped
        .iter()
        .filter(|d| d.resolution == DropResolution::Unsatisfiable)
        .min_by_key(|d| d.origin)
    {
        return Ok(OrientationDecision::Infeasible(InfeasibleWitness::DisconnectedPair {
            pair: d.origin,
        }));
    }
    match decide_tree_orientable(&tc.forest, &tc.pairs)? {
        OrientationDecision::Feasible(forest_orient) => {
            let lifted = lift_orientation(&forest_orient, &tc.log)?;
            debug_assert_eq!(
                satisfied_pair_indices(g, Some(&lifted), pairs).unwrap().len(),
                pairs.len()
            );
            Ok(OrientationDecision::Feasible(lifted))
        }
        OrientationDecision::Infeasible(w) => Ok(OrientationDecision::Infeasible(match w {
            InfeasibleWitness::EdgeConflict { edge, pair_a, pair_b } => {
                InfeasibleWitness::EdgeConflict {
                    edge: tc.log.kernel_edge_to_orig[edge],
                    pair_a: tc.pair_origin[pair_a],
                    pair_b: tc.pair_origin[pair_b],
                }
            }
            InfeasibleWitness::DisconnectedPair { pair } => {
                InfeasibleWitness::DisconnectedPair { pair: tc.pair_origin[pair] }
            }
        })),
    }
}

/// Ground-truth result of [`oracle_max_orientation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub value: usize,
    pub orientation: Orientation,
}

/// Default edge cap for the exhaustive oracle.
pub const DEFAULT_ORACLE_EDGE_CAP: usize = 20;

/// Exhaustively tries all `2^|E|` orientations of the undirected edges
/// (arcs stay fixed) and returns the maximum number of satisfied pairs,
/// breaking ties toward the lexicographically smallest direction vector
/// (`Forward` before `Backward`, edge 0 most significant). The search space
/// may be sharded across `threads` workers; the merge is deterministic.
pub fn oracle_max_orientation(
    g: &MixedGraph,
    pairs: &PairList,
    cap: usize,
    threads: usize,
) -> Result<OracleResult> {
    pairs.validate(g.node_count())?;
    let m = g.edge_count();
    if m > cap {
        return Err(Error::EdgeCapExceeded { edges: m, cap });
    }
    // Ascending masks enumerate direction vectors in lexicographic order:
    // edge j maps to bit m-1-j, and Forward (0) sorts before Backward (1).
    let decode = |mask: u64| -> Orientation {
        let dirs = (0..m)
            .map(|j| if mask >> (m - 1 - j) & 1 == 1 { EdgeDir::Backward } else { EdgeDir::Forward })
            .collect();
        Orientation::from_dirs(dirs)
    };
    let total: u64 = 1 << m;
    let workers = threads.max(1).min(total as usize);
    let scan = |from: u64, to: u64| -> (usize, u64) {
        let mut best = (0usize, from);
        let mut first = true;
        for mask in from..to {
            let d = decode(mask);
            let count = satisfied_pair_indices(g, Some(&d), pairs)
                .expect("pairs validated")
                .len();
            if first || count > best.0 {
                best = (count, mask);
                first = false;
            }
        }
        best
    };
    let best = if workers <= 1 {
        scan(0, total)
    } else {
        let chunk = total.div_ceil(workers as u64);
        let results: Vec<(usize, u64)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers as u64)
                .map(|w| {
                    let scan = &scan;
                    scope.spawn(move || scan(w * chunk, ((w + 1) * chunk).min(total)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("oracle shard panicked")).collect()
        });
        // Shards cover ascending ranges; keeping strictly-greater updates
        // yields the lowest best mask overall.
        let mut merged = results[0];
        for &r in &results[1..] {
            if r.0 > merged.0 {
                merged = r;
            }
        }
        merged
    };
    Ok(OracleResult { value: best.0, orientation: decode(best.1) })
}
