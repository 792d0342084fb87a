//! Bridges, 2-edge-connected components, strong orientations, and
//! vertex-connectivity values.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::flow::max_flow;
use crate::graph::{EdgeDir, MixedGraph};

/// Bridge structure of the undirected part of a graph: bridge edges,
/// 2-edge-connected components, and plain connected components.
#[derive(Debug, Clone)]
pub struct BridgeDecomposition {
    /// Bridge edge ids in increasing order.
    pub bridges: Vec<usize>,
    /// `is_bridge[e]` for every edge id.
    pub is_bridge: Vec<bool>,
    /// 2-edge-connected component of each node, labelled in order of each
    /// component's minimum node.
    pub component_of: Vec<usize>,
    /// Nodes of each 2-edge-connected component, ascending.
    pub component_nodes: Vec<Vec<usize>>,
    /// Connected component of each node (same labelling rule).
    pub conn_component_of: Vec<usize>,
    adj: Vec<Vec<(usize, usize)>>,
    n: usize,
}

impl BridgeDecomposition {
    /// Runs an iterative lowpoint computation over the undirected edges of
    /// `g`. Arcs are ignored entirely; parallel edges never count as bridges
    /// because traversal skips only the single tree-edge id.
    pub fn new(g: &MixedGraph) -> Self {
        let n = g.node_count();
        let m = g.edge_count();
        let adj = g.undirected_adjacency();
        let conn_component_of = g.undirected_components();

        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut is_bridge = vec![false; m];
        let mut timer = 0usize;
        // Frame: (node, parent edge id, next adjacency position).
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();
        for start in 0..n {
            if disc[start] != usize::MAX {
                continue;
            }
            disc[start] = timer;
            low[start] = timer;
            timer += 1;
            stack.push((start, usize::MAX, 0));
            while let Some(&mut (u, pedge, ref mut pos)) = stack.last_mut() {
                if *pos < adj[u].len() {
                    let (w, id) = adj[u][*pos];
                    *pos += 1;
                    if id == pedge {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, id, 0));
                    } else {
                        low[u] = low[u].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&mut (p, _, _)) = stack.last_mut() {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            is_bridge[pedge] = true;
                        }
                    }
                }
            }
        }
        let bridges: Vec<usize> = (0..m).filter(|&e| is_bridge[e]).collect();

        // 2ecc = connected components after deleting bridges.
        let mut component_of = vec![usize::MAX; n];
        let mut component_nodes = Vec::new();
        for start in 0..n {
            if component_of[start] != usize::MAX {
                continue;
            }
            let label = component_nodes.len();
            component_of[start] = label;
            let mut nodes = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(w, id) in &adj[u] {
                    if !is_bridge[id] && component_of[w] == usize::MAX {
                        component_of[w] = label;
                        nodes.push(w);
                        queue.push_back(w);
                    }
                }
            }
            nodes.sort_unstable();
            component_nodes.push(nodes);
        }

        BridgeDecomposition {
            bridges,
            is_bridge,
            component_of,
            component_nodes,
            conn_component_of,
            adj,
            n,
        }
    }

    /// Splits the connected component containing bridge `edge_id` into the
    /// two node sets separated by that bridge, as `(side of u, side of v)`
    /// where `(u, v)` are the bridge endpoints. Both sides are ascending.
    pub fn side_partition(&self, g: &MixedGraph, edge_id: usize) -> (Vec<usize>, Vec<usize>) {
        debug_assert!(self.is_bridge[edge_id]);
        let e = g.edge(edge_id);
        let mut side_u = Vec::new();
        let mut seen = vec![false; self.n];
        seen[e.u] = true;
        let mut queue = VecDeque::from([e.u]);
        while let Some(x) = queue.pop_front() {
            side_u.push(x);
            for &(w, id) in &self.adj[x] {
                if id != edge_id && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let comp = self.conn_component_of[e.u];
        let mut side_v: Vec<usize> = (0..self.n)
            .filter(|&x| self.conn_component_of[x] == comp && !seen[x])
            .collect();
        side_u.sort_unstable();
        side_v.sort_unstable();
        (side_u, side_v)
    }
}

/// Orients every undirected edge with both endpoints inside `component` so
/// that the component becomes strongly connected. Requires the induced
/// subgraph to be connected and bridgeless (2-edge-connected); singleton
/// components yield no fragments. Classic DFS scheme: tree edges point away
/// from the root, all other edges point from descendant to ancestor.
pub fn strong_orientation(g: &MixedGraph, component: &[usize]) -> Result<Vec<(usize, EdgeDir)>> {
    if !g.is_undirected() {
        return Err(Error::NotUndirected);
    }
    for &v in component {
        g.check_node(v)?;
    }
    if component.len() <= 1 {
        return Ok(Vec::new());
    }
    let mut inside = vec![false; g.node_count()];
    for &v in component {
        inside[v] = true;
    }
    let mut edge_ids = Vec::new();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.node_count()];
    for (id, e) in g.edges().iter().enumerate() {
        if inside[e.u] && inside[e.v] {
            edge_ids.push(id);
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
    }
    // Connectivity and bridge check on the induced subgraph.
    {
        let mut sub = MixedGraph::new(g.node_count());
        for &id in &edge_ids {
            let e = g.edge(id);
            sub.add_edge(e.u, e.v, e.cost)?;
        }
        let comp = sub.undirected_components();
        let root_comp = comp[component[0]];
        if component.iter().any(|&v| comp[v] != root_comp) {
            return Err(Error::ComponentDisconnected);
        }
        let bd = BridgeDecomposition::new(&sub);
        if let Some(&b) = bd.bridges.first() {
            // Bridge ids in `sub` are positions into `edge_ids`.
            return Err(Error::ComponentHasBridge { edge: edge_ids[b] });
        }
    }

    let root = component.iter().copied().min().expect("nonempty component");
    let mut disc = vec![usize::MAX; g.node_count()];
    let mut assigned: Vec<Option<EdgeDir>> = vec![None; g.edge_count()];
    let mut timer = 0usize;
    disc[root] = timer;
    timer += 1;
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
        if *pos >= adj[u].len() {
            stack.pop();
            continue;
        }
        let (w, id) = adj[u][*pos];
        *pos += 1;
        if assigned[id].is_some() {
            continue;
        }
        if disc[w] == usize::MAX {
            // Tree edge away from the root: u -> w.
            assigned[id] = Some(g.edge(id).dir_from(u));
            disc[w] = timer;
            timer += 1;
            stack.push((w, 0));
        } else if disc[w] < disc[u] {
            // Back edge toward the ancestor: u -> w.
            assigned[id] = Some(g.edge(id).dir_from(u));
        } else {
            // Forward edge in DFS terms; orient toward the ancestor u.
            assigned[id] = Some(g.edge(id).dir_from(w));
        }
    }
    Ok(edge_ids
        .into_iter()
        .map(|id| (id, assigned[id].expect("edge in connected component was visited")))
        .collect())
}

/// Number of internally node-disjoint `s -> t` paths in a digraph, computed
/// as a max-flow after splitting every node except `s` and `t`: internal
/// node splits carry capacity 1, and every arc carries capacity 1 as well,
/// so each arc backs at most one path — a direct `s -> t` arc counts as
/// exactly one path, and parallel arcs count separately. Returns
/// [`Error::NotDigraph`] if undirected edges are present.
pub fn vertex_connectivity_value(g: &MixedGraph, s: usize, t: usize) -> Result<i64> {
    if !g.is_digraph() {
        return Err(Error::NotDigraph);
    }
    g.check_node(s)?;
    g.check_node(t)?;
    if s == t {
        return Err(Error::IdenticalTerminals { s });
    }
    let n = g.node_count();
    // Node v splits into v_in = v, v_out = v + n.
    let big = (g.arc_count() as i64) + 1;
    let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
    for v in 0..n {
        let cap = if v == s || v == t { big } else { 1 };
        arcs.push((v, v + n, cap));
    }
    for a in g.arcs() {
        arcs.push((a.tail + n, a.head, 1));
    }
    Ok(max_flow(2 * n, &arcs, s + n, t))
}
