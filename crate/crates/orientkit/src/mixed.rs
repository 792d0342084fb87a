//! P-orientability of mixed graphs in `n^O(|P|)` time: contract undirected
//! components and ori-cycles until the arc overlay is a DAG, guess each
//! pair's first and last edge, then scan the overlay's topological order,
//! committing one undirected component at a time and checking the demanded
//! entry→exit routes with the undirected decision procedure.
//!
//! An ori-cycle is a closed walk alternating arcs with undirected paths;
//! orienting the path edges along the walk makes its node set strongly
//! connected, so the whole set can be treated as one node (the decision is
//! unchanged in both directions). After exhaustive contraction every arc
//! runs between distinct undirected components and the component graph is
//! acyclic, which is what lets a left-to-right scan work.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{
    satisfied_pair_indices, topological_order, EdgeDir, MixedGraph, Orientation, PairList,
    TopologicalOrder,
};
use crate::kernel::Dsu;
use crate::search::{decide_undirected_orientable, OrientationDecision};

/// Tuning knobs for [`decide_mixed_orientable`].
#[derive(Debug, Clone)]
pub struct MixedOptions {
    /// Maximum accepted `|P|`; the running time is exponential in it.
    pub cap: usize,
    /// Memoize scan states. The answer is identical with it off; the flag
    /// exists so the equivalence can be tested.
    pub memo: bool,
    /// Worker threads across the (first, last) guess space.
    pub threads: usize,
}

impl Default for MixedOptions {
    fn default() -> Self {
        MixedOptions { cap: 4, memo: true, threads: 1 }
    }
}

/// One ori-cycle contraction: the arcs around the cycle, the undirected
/// edges spliced between consecutive arcs (oriented along the walk), and
/// the representative nodes united by the merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriCycleMerge {
    pub arcs: Vec<usize>,
    pub oriented_edges: Vec<(usize, EdgeDir)>,
    pub merged_nodes: Vec<usize>,
}

/// The contracted view of a mixed graph: one overlay node per undirected
/// component of the contracted node set, arcs relabeled onto components,
/// and the log of ori-cycle merges that made it acyclic.
#[derive(Debug, Clone)]
pub struct DagOverlay {
    /// Acyclic digraph whose nodes are undirected components, in scan
    /// (topological) order.
    pub graph: MixedGraph,
    /// Original node → overlay node.
    pub node_map: Vec<usize>,
    /// Original arc id → overlay arc id; `None` for arcs absorbed into a
    /// merged blob.
    pub arc_map: Vec<Option<usize>>,
    /// Ori-cycle contractions, in the order they were applied.
    pub events: Vec<OriCycleMerge>,
}

/// A pair's progress point during the scan: the most recent arc taken, the
/// contracted node it currently occupies (absorbed anchors), or finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurPoint {
    Arc(usize),
    AtNode(usize),
    Done,
}

/// Memoization key of the scan: the position in the component topological
/// order plus every pair's current point. The guessed first/last anchors
/// are fixed per guess and live outside the state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SearchState {
    pub position: usize,
    pub cur: Vec<CurPoint>,
}

/// Outcome of the mixed decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MixedDecision {
    Yes(Orientation),
    No,
}

impl MixedDecision {
    pub fn is_yes(&self) -> bool {
        matches!(self, MixedDecision::Yes(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PoolSrc {
    Arc(usize),
    Edge(usize, EdgeDir),
}

#[derive(Debug, Clone, Copy)]
struct PoolArc {
    tail: usize,
    head: usize,
    src: PoolSrc,
}

struct RawMerge {
    pool_arcs: Vec<usize>,
    oriented_edges: Vec<(usize, EdgeDir)>,
    merged_roots: Vec<usize>,
}

/// Fully contracted instance, in representative-node ("root") space.
struct Contracted {
    /// node → representative after all merges.
    root: Vec<usize>,
    /// root → index of its component in topological order.
    comp_of_root: Vec<usize>,
    /// Components in topological order; each lists its roots ascending.
    comps: Vec<Vec<usize>>,
    pool: Vec<PoolArc>,
    /// Pool arcs still crossing distinct components.
    alive: Vec<bool>,
    /// Per original edge: orientation forced by guessing or splicing.
    fixed: Vec<Option<EdgeDir>>,
    /// Per original edge: the component it survives in (undirected,
    /// distinct endpoints' roots), else `None`.
    surviving_comp: Vec<Option<usize>>,
    events: Vec<RawMerge>,
}

/// Runs the contraction loop. `guessed` holds consistent edge orientations
/// to treat as arcs (empty for the public overlay view).
fn contract_engine(g: &MixedGraph, guessed: &[(usize, EdgeDir)]) -> Contracted {
    let n = g.node_count();
    let m = g.edge_count();
    let mut fixed: Vec<Option<EdgeDir>> = vec![None; m];
    let mut pool: Vec<PoolArc> = g
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| PoolArc { tail: a.tail, head: a.head, src: PoolSrc::Arc(i) })
        .collect();
    for &(e, d) in guessed {
        debug_assert!(fixed[e].is_none(), "edge {e} guessed twice");
        fixed[e] = Some(d);
        let (tail, head) = g.edge(e).endpoints(d);
        pool.push(PoolArc { tail, head, src: PoolSrc::Edge(e, d) });
    }
    let mut dsu = Dsu::new(n);
    let mut alive = vec![true; pool.len()];
    let mut events: Vec<RawMerge> = Vec::new();

    loop {
        assert!(events.len() <= n, "contraction failed to terminate");
        // Root-level adjacency over surviving undirected edges; lists stay
        // in ascending edge id order, keeping path choices deterministic.
        let mut is_root = vec![false; n];
        for v in 0..n {
            is_root[dsu.find(v)] = true;
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, ed) in g.edges().iter().enumerate() {
            if fixed[e].is_some() {
                continue;
            }
            let (ru, rv) = (dsu.find(ed.u), dsu.find(ed.v));
            if ru != rv {
                adj[ru].push((rv, e));
                adj[rv].push((ru, e));
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for r in 0..n {
            if !is_root[r] || comp[r] != usize::MAX {
                continue;
            }
            let c = comps.len();
            comp[r] = c;
            let mut nodes = vec![r];
            let mut head = 0;
            while head < nodes.len() {
                let u = nodes[head];
                head += 1;
                for &(w, _) in &adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        nodes.push(w);
                    }
                }
            }
            nodes.sort_unstable();
            comps.push(nodes);
        }
        for i in 0..pool.len() {
            if alive[i] && dsu.find(pool[i].tail) == dsu.find(pool[i].head) {
                alive[i] = false; // absorbed into a strongly connected blob
            }
        }
        // A cycle to contract: an arc within one component closes an
        // ori-cycle on its own; otherwise ask the overlay for one.
        let self_loop = (0..pool.len()).find(|&i| {
            alive[i] && comp[dsu.find(pool[i].tail)] == comp[dsu.find(pool[i].head)]
        });
        let cycle: Vec<usize> = if let Some(i) = self_loop {
            vec![i]
        } else {
            let mut overlay = MixedGraph::new(comps.len().max(1));
            let mut overlay_to_pool = Vec::new();
            for (i, p) in pool.iter().enumerate() {
                if alive[i] {
                    overlay
                        .add_arc(comp[dsu.find(p.tail)], comp[dsu.find(p.head)])
                        .expect("alive arcs cross components");
                    overlay_to_pool.push(i);
                }
            }
            match topological_order(&overlay) {
                TopologicalOrder::Order(order) => {
                    // Acyclic: finalize with components in scan order.
                    let mut comps_topo: Vec<Vec<usize>> = Vec::with_capacity(comps.len());
                    let mut comp_of_root = vec![usize::MAX; n];
                    for &c in &order {
                        for &r in &comps[c] {
                            comp_of_root[r] = comps_topo.len();
                        }
                        comps_topo.push(comps[c].clone());
                    }
                    let root: Vec<usize> = (0..n).map(|v| dsu.find(v)).collect();
                    let surviving_comp: Vec<Option<usize>> = (0..m)
                        .map(|e| {
                            if fixed[e].is_some() {
                                return None;
                            }
                            let (ru, rv) = (root[g.edge(e).u], root[g.edge(e).v]);
                            if ru == rv {
                                None
                            } else {
                                Some(comp_of_root[ru])
                            }
                        })
                        .collect();
                    return Contracted {
                        root,
                        comp_of_root,
                        comps: comps_topo,
                        pool,
                        alive,
                        fixed,
                        surviving_comp,
                        events,
                    };
                }
                TopologicalOrder::Cycle(arcs) => {
                    arcs.into_iter().map(|a| overlay_to_pool[a]).collect()
                }
            }
        };
        // Contract the ori-cycle: splice the undirected path between each
        // arc's head and the next arc's tail, orienting it along the walk.
        let mut oriented: Vec<(usize, EdgeDir)> = Vec::new();
        let mut merged: Vec<usize> = Vec::new();
        let k = cycle.len();
        for j in 0..k {
            let a = cycle[j];
            let b = cycle[(j + 1) % k];
            let from = dsu.find(pool[a].head);
            let to = dsu.find(pool[b].tail);
            merged.push(dsu.find(pool[a].tail));
            merged.push(from);
            if from == to {
                continue;
            }
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[from] = true;
            let mut queue = VecDeque::from([from]);
            while let Some(u) = queue.pop_front() {
                if u == to {
                    break;
                }
                for &(w, e) in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        prev[w] = Some((u, e));
                        queue.push_back(w);
                    }
                }
            }
            assert!(seen[to], "consecutive cycle arcs share a component");
            let mut back = to;
            let mut path_rev: Vec<(usize, usize, usize)> = Vec::new();
            while back != from {
                let (pu, e) = prev[back].expect("walk reaches the BFS source");
                path_rev.push((pu, back, e));
                back = pu;
            }
            for &(ru, rv, e) in path_rev.iter().rev() {
                let ed = g.edge(e);
                let d = if dsu.find(ed.u) == ru { ed.dir_from(ed.u) } else { ed.dir_from(ed.v) };
                debug_assert_eq!(dsu.find(g.edge(e).other(ed.u)), if dsu.find(ed.u) == ru { rv } else { ru });
                fixed[e] = Some(d);
                oriented.push((e, d));
                merged.push(ru);
                merged.push(rv);
            }
        }
        merged.sort_unstable();
        merged.dedup();
        for &w in &merged[1..] {
            dsu.union(merged[0], w);
        }
        for &a in &cycle {
            alive[a] = false;
        }
        events.push(RawMerge { pool_arcs: cycle, oriented_edges: oriented, merged_roots: merged });
    }
}

/// Contracts undirected components and ori-cycles until the component
/// overlay is a DAG. Returns the overlay and the reduced pair list: pairs
/// whose endpoints were merged into one blob are auto-satisfied (a blob is
/// strongly connected once its spliced edges take their logged directions)
/// and are omitted; the rest keep their original endpoints, mapped to
/// overlay nodes by `node_map`.
pub fn contract_until_dag(g: &MixedGraph, pairs: &PairList) -> Result<(DagOverlay, PairList)> {
    pairs.validate(g.node_count())?;
    let con = contract_engine(g, &[]);
    let mut graph = MixedGraph::new(con.comps.len().max(1));
    let mut arc_map = vec![None; g.arcs().len()];
    for (i, p) in con.pool.iter().enumerate() {
        if con.alive[i] {
            let id = graph
                .add_arc(con.comp_of_root[con.root[p.tail]], con.comp_of_root[con.root[p.head]])
                .expect("alive arcs cross components");
            let PoolSrc::Arc(orig) = p.src else { unreachable!("public pool holds arcs only") };
            arc_map[orig] = Some(id);
        }
    }
    assert!(
        matches!(topological_order(&graph), TopologicalOrder::Order(_)),
        "contracted overlay must be acyclic"
    );
    let node_map: Vec<usize> = (0..g.node_count()).map(|v| con.comp_of_root[con.root[v]]).collect();
    let events = con
        .events
        .into_iter()
        .map(|ev| OriCycleMerge {
            arcs: ev
                .pool_arcs
                .into_iter()
                .map(|i| {
                    let PoolSrc::Arc(orig) = con.pool[i].src else {
                        unreachable!("public pool holds arcs only")
                    };
                    orig
                })
                .collect(),
            oriented_edges: ev.oriented_edges,
            merged_nodes: ev.merged_roots,
        })
        .collect();
    let reduced = PairList::from_pairs(
        pairs.iter().filter(|&(s, t)| con.root[s] != con.root[t]).collect(),
    );
    Ok((DagOverlay { graph, node_map, arc_map, events }, reduced))
}

/// Decides whether one undirected component can be oriented to provide a
/// directed path for every (enter, exit) demand. Thin delegate to the
/// undirected decision; the graph must carry no arcs.
pub fn component_demand_check(
    component: &MixedGraph,
    demands: &PairList,
) -> Result<OrientationDecision> {
    if !component.is_undirected() {
        return Err(Error::NotUndirected);
    }
    decide_undirected_orientable(component, demands)
}

/// Where a pair must end up: matching a surviving last arc, or reaching the
/// blob that swallowed its last anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Arc(usize),
    Node(usize),
}

/// A guessed first or last anchor: an existing arc, or an undirected edge
/// committed to one direction (and thereafter treated as an arc).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Anchor {
    Arc(usize),
    Edge(usize, EdgeDir),
}

/// One undirected component extracted as a standalone graph for demand
/// checks; nodes are the component's roots, compacted.
struct CompSub {
    graph: MixedGraph,
    edge_ids: Vec<usize>,
    node_of_root: HashMap<usize, usize>,
}

struct ScanCtx<'a> {
    con: &'a Contracted,
    subs: &'a [CompSub],
    targets: &'a [Target],
    memo_on: bool,
    memo: HashMap<SearchState, Option<Vec<(usize, EdgeDir)>>>,
}

#[derive(Debug, Clone, Copy)]
enum BranchOpt {
    Finish { demand: (usize, usize) },
    Take { arc: usize, demand: (usize, usize) },
}

impl<'a> ScanCtx<'a> {
    fn point_root(&self, c: CurPoint) -> usize {
        match c {
            CurPoint::Arc(a) => self.con.root[self.con.pool[a].head],
            CurPoint::AtNode(r) => r,
            CurPoint::Done => unreachable!("done pairs have no point"),
        }
    }

    fn normalize_done(&self, c: CurPoint, target: Target) -> CurPoint {
        match target {
            Target::Arc(b) if c == CurPoint::Arc(b) => CurPoint::Done,
            Target::Node(q) if self.point_root(c) == q => CurPoint::Done,
            _ => c,
        }
    }

    /// Decides the remaining scan from `cur`, returning the orientations of
    /// the component edges it had to commit. The position is normalized to
    /// the first component any active pair heads into.
    fn solve(&mut self, cur: &[CurPoint]) -> Option<Vec<(usize, EdgeDir)>> {
        let active: Vec<usize> =
            (0..cur.len()).filter(|&i| cur[i] != CurPoint::Done).collect();
        if active.is_empty() {
            return Some(Vec::new());
        }
        let position = active
            .iter()
            .map(|&i| self.con.comp_of_root[self.point_root(cur[i])])
            .min()
            .expect("active set is nonempty");
        let state = SearchState { position, cur: cur.to_vec() };
        if self.memo_on {
            if let Some(hit) = self.memo.get(&state) {
                return hit.clone();
            }
        }
        let here: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| self.con.comp_of_root[self.point_root(cur[i])] == position)
            .collect();
        // Options per pair heading into this component: finish inside it
        // (absorbed last anchor), or leave by any arc whose tail is here.
        let mut options: Vec<Vec<BranchOpt>> = Vec::with_capacity(here.len());
        for &i in &here {
            let x = self.point_root(cur[i]);
            let mut opts = Vec::new();
            if let Target::Node(q) = self.targets[i] {
                if self.con.comp_of_root[q] == position {
                    debug_assert_ne!(q, x, "reaching the target blob normalizes to Done");
                    opts.push(BranchOpt::Finish { demand: (x, q) });
                }
            }
            for (a, p) in self.con.pool.iter().enumerate() {
                if self.con.alive[a] && self.con.comp_of_root[self.con.root[p.tail]] == position {
                    opts.push(BranchOpt::Take { arc: a, demand: (x, self.con.root[p.tail]) });
                }
            }
            options.push(opts);
        }
        let mut answer: Option<Vec<(usize, EdgeDir)>> = None;
        if options.iter().all(|o| !o.is_empty()) {
            let mut idxs = vec![0usize; here.len()];
            'branches: loop {
                let mut demands: Vec<(usize, usize)> = Vec::new();
                let mut cur2 = cur.to_vec();
                for (slot, &i) in here.iter().enumerate() {
                    match options[slot][idxs[slot]] {
                        BranchOpt::Finish { demand } => {
                            if demand.0 != demand.1 {
                                demands.push(demand);
                            }
                            cur2[i] = CurPoint::Done;
                        }
                        BranchOpt::Take { arc, demand } => {
                            if demand.0 != demand.1 {
                                demands.push(demand);
                            }
                            cur2[i] = self.normalize_done(CurPoint::Arc(arc), self.targets[i]);
                        }
                    }
                }
                let sub = &self.subs[position];
                let mapped = PairList::from_pairs(
                    demands.iter().map(|&(a, b)| (sub.node_of_root[&a], sub.node_of_root[&b])).collect(),
                );
                let check = component_demand_check(&sub.graph, &mapped)
                    .expect("component subgraphs are undirected and demands in range");
                if let OrientationDecision::Feasible(orient) = check {
                    if let Some(rest) = self.solve(&cur2) {
                        let mut w: Vec<(usize, EdgeDir)> = sub
                            .edge_ids
                            .iter()
                            .enumerate()
                            .map(|(k, &e)| (e, orient.get(k)))
                            .collect();
                        w.extend(rest);
                        answer = Some(w);
                        break 'branches;
                    }
                }
                // Advance the odometer lexicographically.
                let mut slot = here.len();
                loop {
                    if slot == 0 {
                        break 'branches;
                    }
                    slot -= 1;
                    idxs[slot] += 1;
                    if idxs[slot] < options[slot].len() {
                        break;
                    }
                    idxs[slot] = 0;
                }
            }
        }
        if self.memo_on {
            self.memo.insert(state, answer.clone());
        }
        answer
    }
}

/// Runs one (first, last) guess to completion. Returns the full edge
/// direction vector on success.
fn run_guess(
    g: &MixedGraph,
    anchors: &[(Anchor, Anchor)],
    memo_on: bool,
) -> Option<Vec<EdgeDir>> {
    // Collect guessed edge orientations; conflicting guesses are dead.
    let mut emap: BTreeMap<usize, EdgeDir> = BTreeMap::new();
    for &(f, l) in anchors {
        for a in [f, l] {
            if let Anchor::Edge(e, d) = a {
                match emap.entry(e) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(d);
                    }
                    std::collections::btree_map::Entry::Occupied(o) => {
                        if *o.get() != d {
                            return None;
                        }
                    }
                }
            }
        }
    }
    let guessed: Vec<(usize, EdgeDir)> = emap.iter().map(|(&e, &d)| (e, d)).collect();
    let con = contract_engine(g, &guessed);
    let pool_of = |a: Anchor| -> usize {
        match a {
            Anchor::Arc(i) => i,
            Anchor::Edge(e, _) => {
                g.arcs().len()
                    + guessed.iter().position(|&(ge, _)| ge == e).expect("guessed edge pooled")
            }
        }
    };
    let mut targets = Vec::with_capacity(anchors.len());
    let mut cur0 = Vec::with_capacity(anchors.len());
    for &(f, l) in anchors {
        let fp = pool_of(f);
        let lp = pool_of(l);
        let target = if con.root[con.pool[lp].tail] == con.root[con.pool[lp].head] {
            Target::Node(con.root[con.pool[lp].head])
        } else {
            Target::Arc(lp)
        };
        let start = if con.root[con.pool[fp].tail] == con.root[con.pool[fp].head] {
            CurPoint::AtNode(con.root[con.pool[fp].head])
        } else {
            CurPoint::Arc(fp)
        };
        targets.push(target);
        cur0.push(start);
    }
    let subs: Vec<CompSub> = con
        .comps
        .iter()
        .enumerate()
        .map(|(c, roots)| {
            let mut graph = MixedGraph::new(roots.len());
            let node_of_root: HashMap<usize, usize> =
                roots.iter().enumerate().map(|(k, &r)| (r, k)).collect();
            let mut edge_ids = Vec::new();
            for (e, ed) in g.edges().iter().enumerate() {
                if con.surviving_comp[e] == Some(c) {
                    graph
                        .add_unit_edge(node_of_root[&con.root[ed.u]], node_of_root[&con.root[ed.v]])
                        .expect("surviving edges join distinct roots");
                    edge_ids.push(e);
                }
            }
            CompSub { graph, edge_ids, node_of_root }
        })
        .collect();
    let mut ctx = ScanCtx { con: &con, subs: &subs, targets: &targets, memo_on, memo: HashMap::new() };
    let cur0: Vec<CurPoint> =
        cur0.into_iter().zip(&targets).map(|(c, &t)| ctx.normalize_done(c, t)).collect();
    let chosen = ctx.solve(&cur0)?;
    let mut dirs: Vec<EdgeDir> =
        (0..g.edge_count()).map(|e| con.fixed[e].unwrap_or(EdgeDir::Forward)).collect();
    for (e, d) in chosen {
        debug_assert!(con.fixed[e].is_none());
        dirs[e] = d;
    }
    Some(dirs)
}

/// node → set of nodes reachable when every undirected edge may be used in
/// both directions (arcs keep theirs). An upper bound on any orientation's
/// reachability, used to prune pairs and guesses.
fn relaxed_reachability(g: &MixedGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for ed in g.edges() {
        out[ed.u].push(ed.v);
        out[ed.v].push(ed.u);
    }
    for a in g.arcs() {
        out[a.tail].push(a.head);
    }
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &out[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen
        })
        .collect()
}

fn anchor_head(g: &MixedGraph, a: Anchor) -> usize {
    match a {
        Anchor::Arc(i) => g.arc(i).head,
        Anchor::Edge(e, d) => g.edge(e).endpoints(d).1,
    }
}

fn anchor_tail(g: &MixedGraph, a: Anchor) -> usize {
    match a {
        Anchor::Arc(i) => g.arc(i).tail,
        Anchor::Edge(e, d) => g.edge(e).endpoints(d).0,
    }
}

/// Decides whether the mixed graph admits an orientation of its undirected
/// edges giving every pair a directed path. For each pair both the first
/// and the last edge of its path are guessed (undirected anchors are
/// committed to a direction and treated as arcs), the graph is contracted
/// to a DAG overlay, and the overlay is scanned in topological order with
/// memoized branching; the lowest-indexed successful guess provides the
/// witness. YES answers always carry an orientation that has been checked
/// to satisfy every pair.
pub fn decide_mixed_orientable(
    g: &MixedGraph,
    pairs: &PairList,
    opts: &MixedOptions,
) -> Result<MixedDecision> {
    pairs.validate(g.node_count())?;
    if pairs.len() > opts.cap {
        return Err(Error::PairCapExceeded { pairs: pairs.len(), cap: opts.cap });
    }
    let reach = relaxed_reachability(g);
    let mut active: Vec<(usize, usize)> =
        pairs.iter().filter(|&(s, t)| s != t).collect();
    active.sort_unstable();
    active.dedup();
    if active.iter().any(|&(s, t)| !reach[s][t]) {
        return Ok(MixedDecision::No);
    }
    let verify = |dirs: Vec<EdgeDir>| -> Result<MixedDecision> {
        let orientation = Orientation::from_dirs(dirs);
        let ok = satisfied_pair_indices(g, Some(&orientation), pairs)?.len() == pairs.len();
        assert!(ok, "accepted orientation must satisfy every pair");
        Ok(MixedDecision::Yes(orientation))
    };
    if active.is_empty() {
        return verify(vec![EdgeDir::Forward; g.edge_count()]);
    }

    // Guess menus per pair: first anchors leave the source, last anchors
    // enter the target; arcs first, then edges, each ascending by id.
    let mut firsts: Vec<Vec<Anchor>> = Vec::with_capacity(active.len());
    let mut lasts: Vec<Vec<Anchor>> = Vec::with_capacity(active.len());
    for &(s, t) in &active {
        let mut f: Vec<Anchor> = g
            .arcs()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.tail == s)
            .map(|(i, _)| Anchor::Arc(i))
            .collect();
        f.extend(g.edges().iter().enumerate().filter(|(_, ed)| ed.u == s || ed.v == s).map(
            |(e, ed)| Anchor::Edge(e, ed.dir_from(s)),
        ));
        let mut l: Vec<Anchor> = g
            .arcs()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.head == t)
            .map(|(i, _)| Anchor::Arc(i))
            .collect();
        l.extend(g.edges().iter().enumerate().filter(|(_, ed)| ed.u == t || ed.v == t).map(
            |(e, ed)| Anchor::Edge(e, ed.dir_from(ed.other(t))),
        ));
        if f.is_empty() || l.is_empty() {
            return Ok(MixedDecision::No);
        }
        firsts.push(f);
        lasts.push(l);
    }
    let radix: Vec<u128> =
        (0..active.len()).map(|i| (firsts[i].len() * lasts[i].len()) as u128).collect();
    let total: u128 = radix.iter().product();
    let decode = |mut gi: u128| -> Vec<(Anchor, Anchor)> {
        let mut picks = vec![(Anchor::Arc(0), Anchor::Arc(0)); active.len()];
        for i in (0..active.len()).rev() {
            let d = (gi % radix[i]) as usize;
            gi /= radix[i];
            picks[i] = (firsts[i][d / lasts[i].len()], lasts[i][d % lasts[i].len()]);
        }
        picks
    };
    let scan = |from: u128, to: u128| -> Option<(u128, Vec<EdgeDir>)> {
        'guesses: for gi in from..to {
            let anchors = decode(gi);
            for &(f, l) in &anchors {
                // The middle segment must connect even in the relaxation.
                if f != l && !reach[anchor_head(g, f)][anchor_tail(g, l)] {
                    continue 'guesses;
                }
            }
            if let Some(dirs) = run_guess(g, &anchors, opts.memo) {
                return Some((gi, dirs));
            }
        }
        None
    };
    let workers = opts.threads.max(1).min(total.min(64) as usize).max(1);
    let hit = if workers <= 1 {
        scan(0, total)
    } else {
        let chunk = total.div_ceil(workers as u128);
        let results: Vec<Option<(u128, Vec<EdgeDir>)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers as u128)
                .map(|w| {
                    let scan = &scan;
                    scope.spawn(move || scan(w * chunk, ((w + 1) * chunk).min(total)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("guess shard panicked")).collect()
        });
        results.into_iter().flatten().min_by_key(|&(gi, _)| gi)
    };
    match hit {
        Some((_, dirs)) => verify(dirs),
        None => Ok(MixedDecision::No),
    }
}
