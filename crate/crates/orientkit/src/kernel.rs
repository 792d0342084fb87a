//! Instance kernelization for pair-orientation problems.
//!
//! Three reductions shrink an undirected instance to an equivalent tree
//! instance while a [`ContractionLog`] records enough to translate any
//! orientation of the kernel back to the full input:
//!
//! 1. every 2-edge-connected component collapses to one node (it can always
//!    be oriented strongly connected, so it never blocks any pair);
//! 2. every edge used by at most one demand path is contracted (one path can
//!    always have the edge oriented its way — the direction is recorded);
//! 3. maximal chains of degree-2 nodes touching no pair are merged into a
//!    single edge (flow through a pass-through node enters one side iff it
//!    leaves the other).
//!
//! The surviving tree has at most `3p - 1` nodes where `p` counts surviving
//! pairs, every kernel edge carries at least two demand paths, every leaf is
//! an endpoint of at least two pairs, and every degree-2 node is a pair
//! endpoint.

use serde::{Deserialize, Serialize};

use crate::connectivity::{strong_orientation, BridgeDecomposition};
use crate::error::{Error, Result};
use crate::graph::{EdgeDir, MixedGraph, Orientation, PairList};
use crate::lca::LcaIndex;

/// Union-find with path compression; the representative of a set is always
/// its minimum element, which keeps every merge deterministic.
#[derive(Debug, Clone)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the two sets; the smaller root survives. Returns false if the
    /// elements were already together.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        if ra < rb {
            self.parent[rb] = ra;
        } else {
            self.parent[ra] = rb;
        }
        true
    }
}

/// One reduction step. All node and edge ids refer to the *original* graph
/// stored in the log. Directions are relative to an edge's stored endpoint
/// order, which every reduction preserves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ContractionEvent {
    /// A 2-edge-connected component collapsed into its minimum node.
    MergeComponent { survivor: usize, absorbed: Vec<usize>, internal_edges: Vec<usize> },
    /// A tree edge carrying `path_count` ≤ 1 demand paths was contracted.
    /// With exactly one path, `forced_dir` is the direction that path needs.
    ContractEdge {
        edge: usize,
        survivor: usize,
        absorbed: usize,
        path_count: usize,
        forced_dir: Option<EdgeDir>,
    },
    /// A pass-through node was removed by merging `removed_edge` into
    /// `kept_edge`. The two recorded directions express the same traversal
    /// of the node, so on lift-back `removed_edge` points into the node
    /// exactly when `kept_edge` points out of it.
    SuppressDegree2 {
        node: usize,
        kept_edge: usize,
        removed_edge: usize,
        removed_toward_node: EdgeDir,
        kept_away_from_node: EdgeDir,
    },
}

/// Ordered record of every reduction applied to `original`, plus the map
/// from kernel edge slots back to original edge ids. Replaying the events
/// forward reproduces the kernel; [`lift_orientation`] replays them backward.
#[derive(Debug, Clone)]
pub struct ContractionLog {
    pub original: MixedGraph,
    pub events: Vec<ContractionEvent>,
    pub kernel_edge_to_orig: Vec<usize>,
}

/// Why a pair left the instance during reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropResolution {
    /// Its endpoints merged; any lifted orientation satisfies it.
    AutoSatisfied,
    /// Its endpoints lie in different connected components; nothing can.
    Unsatisfiable,
}

/// A pair removed during reduction, with its original endpoints and its
/// index in the input pair list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DroppedPair {
    pub source: usize,
    pub target: usize,
    pub origin: usize,
    pub resolution: DropResolution,
}

/// Number of dropped pairs that are automatically satisfied by any lift.
pub fn auto_satisfied_count(dropped: &[DroppedPair]) -> usize {
    dropped.iter().filter(|d| d.resolution == DropResolution::AutoSatisfied).count()
}

/// Stage-one result: 2-edge-connected components contracted away. The forest
/// keeps one node per component (including isolated ones) relabeled densely;
/// `pair_origin[i]` is the input index of surviving pair `i` and
/// `node_origin[v]` the original node a forest node stands for.
#[derive(Debug, Clone)]
pub struct TreeContraction {
    pub forest: MixedGraph,
    pub pairs: PairList,
    pub pair_origin: Vec<usize>,
    pub node_origin: Vec<usize>,
    pub dropped: Vec<DroppedPair>,
    pub log: ContractionLog,
}

impl TreeContraction {
    pub fn auto_satisfied(&self) -> usize {
        auto_satisfied_count(&self.dropped)
    }
}

/// Fully reduced instance. `tree` is a forest with dense node ids (isolated
/// nodes removed), `path_counts[e]` counts the demand paths through kernel
/// edge `e` (always ≥ 2), and the log lifts kernel orientations back to the
/// original graph.
#[derive(Debug, Clone)]
pub struct KernelInstance {
    pub tree: MixedGraph,
    pub pairs: PairList,
    pub pair_origin: Vec<usize>,
    pub node_origin: Vec<usize>,
    pub dropped: Vec<DroppedPair>,
    pub log: ContractionLog,
    pub path_counts: Vec<usize>,
}

impl KernelInstance {
    pub fn auto_satisfied(&self) -> usize {
        auto_satisfied_count(&self.dropped)
    }
}

/// Collapses every 2-edge-connected component of an undirected graph to a
/// single node, yielding a forest over the component roots. Pairs whose
/// endpoints land on the same node are dropped as auto-satisfied; pairs
/// spanning different connected components are dropped as unsatisfiable.
pub fn contract_to_tree(g: &MixedGraph, pairs: &PairList) -> Result<TreeContraction> {
    if !g.is_undirected() {
        return Err(Error::NotUndirected);
    }
    pairs.validate(g.node_count())?;

    let bd = BridgeDecomposition::new(g);
    let comp_of = &bd.component_of; // dense labels in min-node order
    let mut events = Vec::new();
    let mut node_origin = Vec::with_capacity(bd.component_nodes.len());
    let mut internal: Vec<Vec<usize>> = vec![Vec::new(); bd.component_nodes.len()];
    for (id, e) in g.edges().iter().enumerate() {
        if !bd.is_bridge[id] {
            internal[comp_of[e.u]].push(id);
        }
    }
    for (c, nodes) in bd.component_nodes.iter().enumerate() {
        let survivor = nodes[0];
        node_origin.push(survivor);
        if nodes.len() > 1 {
            events.push(ContractionEvent::MergeComponent {
                survivor,
                absorbed: nodes[1..].to_vec(),
                internal_edges: std::mem::take(&mut internal[c]),
            });
        }
    }

    let mut forest = MixedGraph::new(bd.component_nodes.len());
    let mut kernel_edge_to_orig = Vec::new();
    for (id, e) in g.edges().iter().enumerate() {
        if bd.is_bridge[id] {
            forest
                .add_edge(comp_of[e.u], comp_of[e.v], e.cost)
                .expect("bridge endpoints lie in distinct components");
            kernel_edge_to_orig.push(id);
        }
    }

    let mut surviving = PairList::new();
    let mut pair_origin = Vec::new();
    let mut dropped = Vec::new();
    for (i, (s, t)) in pairs.iter().enumerate() {
        if comp_of[s] == comp_of[t] {
            dropped.push(DroppedPair {
                source: s,
                target: t,
                origin: i,
                resolution: DropResolution::AutoSatisfied,
            });
        } else if bd.conn_component_of[s] != bd.conn_component_of[t] {
            dropped.push(DroppedPair {
                source: s,
                target: t,
                origin: i,
                resolution: DropResolution::Unsatisfiable,
            });
        } else {
            surviving.push(comp_of[s], comp_of[t]);
            pair_origin.push(i);
        }
    }

    Ok(TreeContraction {
        forest,
        pairs: surviving,
        pair_origin,
        node_origin,
        dropped,
        log: ContractionLog { original: g.clone(), events, kernel_edge_to_orig },
    })
}

/// Per-edge demand-path counts split by traversal sense relative to the
/// rooting: `up[e]` paths cross `e` child→parent, `down[e]` parent→child.
/// Every pair `(s, t)` splits at `l = lca(s, t)` into an upward half `s → l`
/// and a downward half `l → t`; a subtree prefix sum then counts, for each
/// edge, the halves whose lower endpoint lies below it.
fn path_counts_split(
    forest: &MixedGraph,
    pairs: &PairList,
) -> Result<(Vec<usize>, Vec<usize>, LcaIndex)> {
    let idx = LcaIndex::build_forest(forest)?;
    let n = forest.node_count();
    let mut diff_up = vec![0i64; n];
    let mut diff_down = vec![0i64; n];
    for (s, t) in pairs.iter() {
        let l = idx.lca(s, t).ok_or(Error::PairDisconnected { s, t })?;
        diff_up[s] += 1;
        diff_up[l] -= 1;
        diff_down[t] += 1;
        diff_down[l] -= 1;
    }
    // Children are always deeper than parents, so accumulating in order of
    // strictly decreasing depth completes every subtree sum before it is
    // folded into the parent.
    let max_depth = (0..n).map(|v| idx.depth(v)).max().unwrap_or(0);
    let mut by_depth: Vec<Vec<usize>> = vec![Vec::new(); max_depth + 1];
    for v in 0..n {
        by_depth[idx.depth(v)].push(v);
    }
    let mut up = vec![0usize; forest.edge_count()];
    let mut down = vec![0usize; forest.edge_count()];
    for depth_nodes in by_depth.iter().rev() {
        for &v in depth_nodes {
            if let Some(pe) = idx.parent_edge(v) {
                debug_assert!(diff_up[v] >= 0 && diff_down[v] >= 0);
                up[pe] = diff_up[v] as usize;
                down[pe] = diff_down[v] as usize;
                let p = idx.parent(v);
                diff_up[p] += diff_up[v];
                diff_down[p] += diff_down[v];
            }
        }
    }
    Ok((up, down, idx))
}

/// Number of demand paths through each edge of a forest, indexed by edge id.
/// Pair endpoints must be co-located per component (drop stray pairs first).
pub fn path_counts(forest: &MixedGraph, pairs: &PairList) -> Result<Vec<usize>> {
    pairs.validate(forest.node_count())?;
    let (up, down, _) = path_counts_split(forest, pairs)?;
    Ok(up.iter().zip(&down).map(|(a, b)| a + b).collect())
}

/// Runs the full reduction pipeline on an undirected instance.
pub fn kernelize(g: &MixedGraph, pairs: &PairList) -> Result<KernelInstance> {
    let tc = contract_to_tree(g, pairs)?;
    let forest = &tc.forest;
    let nf = forest.node_count();
    let (up, down, lca) = path_counts_split(forest, &tc.pairs)?;
    let pcount: Vec<usize> = up.iter().zip(&down).map(|(a, b)| a + b).collect();

    let mut events = tc.log.events;
    let mut dropped = tc.dropped;

    // Contract every edge carrying at most one demand path. Path counts of
    // the surviving edges are unaffected: each demand path keeps using
    // exactly the surviving edges it used before.
    let mut dsu = Dsu::new(nf);
    for e in 0..forest.edge_count() {
        if pcount[e] > 1 {
            continue;
        }
        let ed = forest.edge(e);
        let ra = dsu.find(ed.u);
        let rb = dsu.find(ed.v);
        debug_assert_ne!(ra, rb, "forest edges never close a cycle");
        let forced_dir = if pcount[e] == 1 {
            // One path crosses: upward halves run child→parent.
            let child = if lca.depth(ed.u) > lca.depth(ed.v) { ed.u } else { ed.v };
            Some(if up[e] == 1 { ed.dir_from(child) } else { ed.dir_from(child).flipped() })
        } else {
            None
        };
        events.push(ContractionEvent::ContractEdge {
            edge: tc.log.kernel_edge_to_orig[e],
            survivor: tc.node_origin[ra.min(rb)],
            absorbed: tc.node_origin[ra.max(rb)],
            path_count: pcount[e],
            forced_dir,
        });
        dsu.union(ra, rb);
    }

    // Pairs whose whole path was contracted had every edge to themselves;
    // the recorded forced directions satisfy them outright.
    let mut surviving = PairList::new();
    let mut pair_origin = Vec::new();
    for (i, (s, t)) in tc.pairs.iter().enumerate() {
        if dsu.find(s) == dsu.find(t) {
            let (os, ot) = pairs.get(tc.pair_origin[i]);
            dropped.push(DroppedPair {
                source: os,
                target: ot,
                origin: tc.pair_origin[i],
                resolution: DropResolution::AutoSatisfied,
            });
        } else {
            surviving.push(dsu.find(s), dsu.find(t));
            pair_origin.push(tc.pair_origin[i]);
        }
    }

    // Live view after contraction, in forest-root coordinates.
    let live_edges: Vec<usize> = (0..forest.edge_count()).filter(|&e| pcount[e] > 1).collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nf];
    for &e in &live_edges {
        let ed = forest.edge(e);
        let (ra, rb) = (dsu.find(ed.u), dsu.find(ed.v));
        adj[ra].push((rb, e));
        adj[rb].push((ra, e));
    }
    let mut is_endpoint = vec![false; nf];
    for (s, t) in surviving.iter() {
        is_endpoint[s] = true;
        is_endpoint[t] = true;
    }
    let alive = |v: usize, dsu: &mut Dsu| dsu.find(v) == v;
    let suppressible: Vec<bool> = (0..nf)
        .map(|v| dsu.find(v) == v && adj[v].len() == 2 && !is_endpoint[v])
        .collect();

    // Walk every maximal live path between non-suppressible anchors, keep
    // its minimum edge id, and merge the rest into it. Each removal pairs
    // the removed edge with its neighbor toward the kept edge; logging each
    // side farthest-from-kept first lets the backward replay resolve
    // directions nearest-first.
    let cur_dir_from = |e: usize, v: usize, dsu: &mut Dsu| -> EdgeDir {
        let ed = forest.edge(e);
        if dsu.find(ed.u) == v {
            EdgeDir::Forward
        } else {
            debug_assert_eq!(dsu.find(ed.v), v);
            EdgeDir::Backward
        }
    };
    let mut visited = vec![false; forest.edge_count()];
    // Final endpoints of each kept edge, in slot order.
    let mut final_ends: Vec<Option<(usize, usize)>> = vec![None; forest.edge_count()];
    for anchor in 0..nf {
        if !alive(anchor, &mut dsu) || suppressible[anchor] {
            continue;
        }
        for slot in 0..adj[anchor].len() {
            let (first_next, first_edge) = adj[anchor][slot];
            if visited[first_edge] {
                continue;
            }
            // chain_nodes[i] sits between chain_edges[i-1] and chain_edges[i].
            let mut chain_edges = vec![first_edge];
            let mut chain_nodes = Vec::new();
            visited[first_edge] = true;
            let mut prev_edge = first_edge;
            let mut node = first_next;
            while suppressible[node] {
                chain_nodes.push(node);
                let &(next_node, next_edge) =
                    adj[node].iter().find(|&&(_, e)| e != prev_edge).expect("degree is 2");
                visited[next_edge] = true;
                chain_edges.push(next_edge);
                prev_edge = next_edge;
                node = next_node;
            }
            let far_anchor = node;
            let k = chain_nodes.len(); // edges = k + 1
            let kept_pos = (0..=k).min_by_key(|&i| chain_edges[i]).unwrap();
            let kept = chain_edges[kept_pos];
            // Left of kept: nodes 1..=kept_pos in chain order (index i-1).
            for i in 0..kept_pos {
                let v = chain_nodes[i];
                let removed = chain_edges[i];
                let toward = chain_edges[i + 1];
                events.push(ContractionEvent::SuppressDegree2 {
                    node: tc.node_origin[v],
                    kept_edge: tc.log.kernel_edge_to_orig[toward],
                    removed_edge: tc.log.kernel_edge_to_orig[removed],
                    removed_toward_node: cur_dir_from(removed, v, &mut dsu).flipped(),
                    kept_away_from_node: cur_dir_from(toward, v, &mut dsu),
                });
            }
            // Right of kept, farthest first.
            for i in (kept_pos..k).rev() {
                let v = chain_nodes[i];
                let removed = chain_edges[i + 1];
                let toward = chain_edges[i];
                events.push(ContractionEvent::SuppressDegree2 {
                    node: tc.node_origin[v],
                    kept_edge: tc.log.kernel_edge_to_orig[toward],
                    removed_edge: tc.log.kernel_edge_to_orig[removed],
                    removed_toward_node: cur_dir_from(removed, v, &mut dsu).flipped(),
                    kept_away_from_node: cur_dir_from(toward, v, &mut dsu),
                });
            }
            // The kept edge now spans the two anchors; preserve slot order.
            let near_side = if kept_pos == 0 { anchor } else { chain_nodes[kept_pos - 1] };
            let kd = forest.edge(kept);
            let ends = if dsu.find(kd.u) == near_side {
                (anchor, far_anchor)
            } else {
                debug_assert_eq!(dsu.find(kd.v), near_side);
                (far_anchor, anchor)
            };
            final_ends[kept] = Some(ends);
        }
    }

    // Assemble the kernel: surviving anchors that still touch an edge.
    let kept_edges: Vec<usize> =
        (0..forest.edge_count()).filter(|&e| final_ends[e].is_some()).collect();
    let mut touched = vec![false; nf];
    for &e in &kept_edges {
        let (a, b) = final_ends[e].unwrap();
        touched[a] = true;
        touched[b] = true;
    }
    let kernel_nodes: Vec<usize> = (0..nf).filter(|&v| touched[v]).collect();
    let mut relabel = vec![usize::MAX; nf];
    for (new, &old) in kernel_nodes.iter().enumerate() {
        relabel[old] = new;
    }
    let mut tree = MixedGraph::new(kernel_nodes.len());
    let mut kernel_edge_to_orig = Vec::new();
    let mut kept_path_counts = Vec::new();
    for &e in &kept_edges {
        let (a, b) = final_ends[e].unwrap();
        tree.add_edge(relabel[a], relabel[b], forest.edge(e).cost)
            .expect("kernel edges connect distinct anchors");
        kernel_edge_to_orig.push(tc.log.kernel_edge_to_orig[e]);
        kept_path_counts.push(pcount[e]);
    }
    let kernel_pairs = PairList::from_pairs(
        surviving.iter().map(|(s, t)| (relabel[s], relabel[t])).collect(),
    );
    let node_origin: Vec<usize> = kernel_nodes.iter().map(|&v| tc.node_origin[v]).collect();

    let instance = KernelInstance {
        tree,
        pairs: kernel_pairs,
        pair_origin,
        node_origin,
        dropped,
        log: ContractionLog {
            original: tc.log.original,
            events,
            kernel_edge_to_orig,
        },
        path_counts: kept_path_counts,
    };
    assert_kernel_invariants(&instance);
    Ok(instance)
}

/// Kernelizes a forest instance; rejects cyclic or directed input.
pub fn reduce(forest: &MixedGraph, pairs: &PairList) -> Result<KernelInstance> {
    LcaIndex::build_forest(forest)?;
    kernelize(forest, pairs)
}

fn assert_kernel_invariants(k: &KernelInstance) {
    let n = k.tree.node_count();
    let p = k.pairs.len();
    if p == 0 {
        assert_eq!(n, 0, "pairless kernels must be empty");
        return;
    }
    assert!(n <= 3 * p - 1, "kernel has {n} nodes for {p} pairs, exceeding 3p-1");
    assert!(k.path_counts.iter().all(|&c| c >= 2), "kernel edge with fewer than 2 paths");
    let mut degree = vec![0usize; n];
    for e in k.tree.edges() {
        degree[e.u] += 1;
        degree[e.v] += 1;
    }
    let mut endpoint_uses = vec![0usize; n];
    for (s, t) in k.pairs.iter() {
        endpoint_uses[s] += 1;
        endpoint_uses[t] += 1;
    }
    for v in 0..n {
        match degree[v] {
            0 => panic!("isolated node {v} survived"),
            1 => assert!(endpoint_uses[v] >= 2, "leaf {v} touches {} pairs", endpoint_uses[v]),
            2 => assert!(endpoint_uses[v] >= 1, "pass-through node {v} survived"),
            _ => {}
        }
    }
}

/// Translates an orientation of the kernel back to a total orientation of
/// the original graph by replaying the log backward: merged components get
/// a strong orientation, single-path edges their recorded direction, merged
/// chain edges the direction consistent with their kept neighbor, and
/// everything else defaults to `Forward`. Satisfies at least the kernel's
/// satisfied pairs plus every auto-satisfied drop.
pub fn lift_orientation(kernel_orient: &Orientation, log: &ContractionLog) -> Result<Orientation> {
    if kernel_orient.len() != log.kernel_edge_to_orig.len() {
        return Err(Error::OrientationDomainMismatch {
            got: kernel_orient.len(),
            expected: log.kernel_edge_to_orig.len(),
        });
    }
    let mut dirs = vec![EdgeDir::Forward; log.original.edge_count()];
    for (slot, &orig) in log.kernel_edge_to_orig.iter().enumerate() {
        dirs[orig] = kernel_orient.get(slot);
    }
    for ev in log.events.iter().rev() {
        match ev {
            ContractionEvent::SuppressDegree2 {
                kept_edge,
                removed_edge,
                removed_toward_node,
                kept_away_from_node,
                ..
            } => {
                dirs[*removed_edge] = if dirs[*kept_edge] == *kept_away_from_node {
                    *removed_toward_node
                } else {
                    removed_toward_node.flipped()
                };
            }
            ContractionEvent::ContractEdge { edge, forced_dir, .. } => {
                dirs[*edge] = forced_dir.unwrap_or(EdgeDir::Forward);
            }
            ContractionEvent::MergeComponent { survivor, absorbed, .. } => {
                let mut component = absorbed.clone();
                component.push(*survivor);
                for (id, dir) in strong_orientation(&log.original, &component)? {
                    dirs[id] = dir;
                }
            }
        }
    }
    Ok(Orientation::from_dirs(dirs))
}
