//! Lowest-common-ancestor index over a rooted forest, via binary lifting.

use crate::error::{Error, Result};
use crate::graph::MixedGraph;

/// Rooted-forest index answering `lca`, `depth`, and parent-edge queries in
/// `O(log n)` after `O(n log n)` preprocessing.
#[derive(Debug, Clone)]
pub struct LcaIndex {
    depth: Vec<usize>,
    /// `up[k][v]` = the `2^k`-th ancestor of `v`, or `v` itself at the root.
    up: Vec<Vec<usize>>,
    parent_edge: Vec<Option<usize>>,
    root_of: Vec<usize>,
}

impl LcaIndex {
    /// Builds the index for an undirected forest; each component is rooted at
    /// its minimum node. Errors with [`Error::NotAForest`] if any component
    /// has a cycle (checked via the edge count) or if arcs are present.
    pub fn build_forest(g: &MixedGraph) -> Result<Self> {
        if !g.is_undirected() {
            return Err(Error::NotAForest);
        }
        let comp = g.undirected_components();
        let components = comp.iter().copied().max().map_or(0, |c| c + 1);
        if g.edge_count() + components != g.node_count() {
            return Err(Error::NotAForest);
        }
        Ok(Self::build_unchecked(g))
    }

    /// Builds the index for an undirected tree rooted at `root`. Errors with
    /// [`Error::NotATree`] unless the graph is one connected cycle-free
    /// component containing `root`.
    pub fn build_rooted(g: &MixedGraph, root: usize) -> Result<Self> {
        g.check_node(root)?;
        if !g.is_undirected() {
            return Err(Error::NotATree);
        }
        let comp = g.undirected_components();
        if comp.iter().any(|&c| c != 0) || g.edge_count() + 1 != g.node_count() {
            return Err(Error::NotATree);
        }
        let mut index = Self::build_unchecked(g);
        if root != 0 {
            // Re-root: rebuild the traversal from the requested root.
            index = Self::from_roots(g, &[root]);
        }
        Ok(index)
    }

    fn build_unchecked(g: &MixedGraph) -> Self {
        let comp = g.undirected_components();
        let components = comp.iter().copied().max().map_or(0, |c| c + 1);
        // Minimum node of each component serves as its root.
        let mut roots = vec![usize::MAX; components];
        for v in (0..g.node_count()).rev() {
            roots[comp[v]] = v;
        }
        Self::from_roots(g, &roots)
    }

    fn from_roots(g: &MixedGraph, roots: &[usize]) -> Self {
        let n = g.node_count();
        let adj = g.undirected_adjacency();
        let mut depth = vec![0usize; n];
        let mut parent = vec![usize::MAX; n];
        let mut parent_edge = vec![None; n];
        let mut root_of = vec![usize::MAX; n];
        let mut stack = Vec::new();
        for &r in roots {
            parent[r] = r;
            root_of[r] = r;
            stack.push(r);
            while let Some(u) = stack.pop() {
                for &(w, id) in &adj[u] {
                    if root_of[w] == usize::MAX {
                        root_of[w] = root_of[u];
                        parent[w] = u;
                        parent_edge[w] = Some(id);
                        depth[w] = depth[u] + 1;
                        stack.push(w);
                    }
                }
            }
        }
        let levels = (usize::BITS - n.max(2).leading_zeros()) as usize;
        let mut up = Vec::with_capacity(levels);
        up.push(parent);
        for k in 1..levels {
            let prev = &up[k - 1];
            let next: Vec<usize> = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        LcaIndex { depth, up, parent_edge, root_of }
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn parent(&self, v: usize) -> usize {
        self.up[0][v]
    }

    /// Edge id connecting `v` to its parent; `None` at a root.
    pub fn parent_edge(&self, v: usize) -> Option<usize> {
        self.parent_edge[v]
    }

    pub fn root_of(&self, v: usize) -> usize {
        self.root_of[v]
    }

    /// Ancestor of `v` that is `steps` levels up (clamped at the root).
    pub fn ancestor(&self, mut v: usize, mut steps: usize) -> usize {
        let mut k = 0;
        while steps > 0 {
            if steps & 1 == 1 {
                v = self.up[k.min(self.up.len() - 1)][v];
            }
            steps >>= 1;
            k += 1;
        }
        v
    }

    /// Lowest common ancestor of `a` and `b`, or `None` when they live in
    /// different components.
    pub fn lca(&self, a: usize, b: usize) -> Option<usize> {
        if self.root_of[a] != self.root_of[b] {
            return None;
        }
        let (mut a, mut b) = (a, b);
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        a = self.ancestor(a, self.depth[a] - self.depth[b]);
        if a == b {
            return Some(a);
        }
        for k in (0..self.up.len()).rev() {
            if self.up[k][a] != self.up[k][b] {
                a = self.up[k][a];
                b = self.up[k][b];
            }
        }
        Some(self.up[0][a])
    }

    /// Number of edges on the unique `a`–`b` path, or `None` across components.
    pub fn path_len(&self, a: usize, b: usize) -> Option<usize> {
        let l = self.lca(a, b)?;
        Some(self.depth[a] + self.depth[b] - 2 * self.depth[l])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forest(n: usize, edges: &[(usize, usize)]) -> MixedGraph {
        let mut g = MixedGraph::new(n);
        for &(u, v) in edges {
            g.add_unit_edge(u, v).unwrap();
        }
        g
    }

    #[test]
    fn rejects_cycles_and_arcs() {
        let g = forest(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(matches!(LcaIndex::build_forest(&g), Err(Error::NotAForest)));
        let mut g = forest(2, &[(0, 1)]);
        g.add_arc(0, 1).unwrap();
        assert!(matches!(LcaIndex::build_forest(&g), Err(Error::NotAForest)));
    }

    #[test]
    fn build_rooted_requires_one_tree() {
        let g = forest(4, &[(0, 1), (2, 3)]);
        assert!(matches!(LcaIndex::build_rooted(&g, 0), Err(Error::NotATree)));
    }

    #[test]
    fn lca_on_small_tree() {
        //      0
        //     / \
        //    1   2
        //   / \
        //  3   4
        let g = forest(5, &[(0, 1), (0, 2), (1, 3), (1, 4)]);
        let idx = LcaIndex::build_forest(&g).unwrap();
        assert_eq!(idx.lca(3, 4), Some(1));
        assert_eq!(idx.lca(3, 2), Some(0));
        assert_eq!(idx.lca(4, 4), Some(4));
        assert_eq!(idx.depth(3), 2);
        assert_eq!(idx.path_len(3, 2), Some(3));
    }

    #[test]
    fn lca_across_components_is_none() {
        let g = forest(4, &[(0, 1), (2, 3)]);
        let idx = LcaIndex::build_forest(&g).unwrap();
        assert_eq!(idx.lca(0, 2), None);
        assert_eq!(idx.lca(1, 0), Some(0));
        assert_eq!(idx.root_of(3), 2);
    }

    /// Oracle: LCA by explicitly intersecting root paths.
    fn lca_naive(parent: &[usize], a: usize, b: usize) -> Option<usize> {
        let path = |mut v: usize| {
            let mut p = vec![v];
            while parent[v] != v {
                v = parent[v];
                p.push(v);
            }
            p
        };
        let pa = path(a);
        let pb = path(b);
        pa.iter().find(|x| pb.contains(x)).copied()
    }

    #[test]
    fn lca_matches_path_intersection_on_random_forests() {
        let mut state = 0xdeadbeefcafef00du64;
        let mut next = move |m: usize| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as usize) % m
        };
        for _ in 0..40 {
            let n = 1 + next(20);
            let mut g = MixedGraph::new(n);
            // Random forest: each node 1..n attaches to a lower node or stays a root.
            let mut parent_hint = vec![usize::MAX; n];
            for v in 1..n {
                if next(4) != 0 {
                    let p = next(v);
                    g.add_unit_edge(p, v).unwrap();
                    parent_hint[v] = p;
                }
            }
            let idx = LcaIndex::build_forest(&g).unwrap();
            // The naive parent array must agree with the index's DFS because
            // components are rooted at their minimum node and every edge goes
            // low-to-high here.
            let parent: Vec<usize> = (0..n)
                .map(|v| if parent_hint[v] == usize::MAX { v } else { parent_hint[v] })
                .collect();
            for a in 0..n {
                for b in 0..n {
                    assert_eq!(idx.lca(a, b), lca_naive(&parent, a, b), "lca({a},{b})");
                }
            }
        }
    }
}
