//! Minimal max-flow helper shared by the connectivity and disjoint-path
//! modules (Edmonds–Karp on an adjacency-list residual graph).

use std::collections::VecDeque;

/// Maximum `s -> t` flow over integer-capacity arcs `(tail, head, cap)`.
/// Arcs with non-positive capacity are ignored. Runs BFS augmentation, which
/// is plenty for the small networks this crate builds.
pub(crate) fn max_flow(n: usize, arcs: &[(usize, usize, i64)], s: usize, t: usize) -> i64 {
    debug_assert!(s < n && t < n && s != t);
    // Residual arcs stored in pairs: 2k forward, 2k+1 backward.
    let mut head = Vec::with_capacity(arcs.len() * 2);
    let mut cap = Vec::with_capacity(arcs.len() * 2);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v, c) in arcs {
        if c <= 0 {
            continue;
        }
        adj[u].push(head.len());
        head.push(v);
        cap.push(c);
        adj[v].push(head.len());
        head.push(u);
        cap.push(0);
    }
    let mut flow = 0i64;
    loop {
        let mut pred: Vec<Option<usize>> = vec![None; n]; // residual arc into node
        let mut queue = VecDeque::from([s]);
        let mut reached = false;
        'bfs: while let Some(u) = queue.pop_front() {
            for &a in &adj[u] {
                let v = head[a];
                if cap[a] > 0 && v != s && pred[v].is_none() {
                    pred[v] = Some(a);
                    if v == t {
                        reached = true;
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if !reached {
            return flow;
        }
        let mut delta = i64::MAX;
        let mut v = t;
        while v != s {
            let a = pred[v].unwrap();
            delta = delta.min(cap[a]);
            v = head[a ^ 1];
        }
        let mut v = t;
        while v != s {
            let a = pred[v].unwrap();
            cap[a] -= delta;
            cap[a ^ 1] += delta;
            v = head[a ^ 1];
        }
        flow += delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path() {
        assert_eq!(max_flow(3, &[(0, 1, 4), (1, 2, 3)], 0, 2), 3);
    }

    #[test]
    fn parallel_paths_add_up() {
        let arcs = [(0, 1, 2), (1, 3, 2), (0, 2, 1), (2, 3, 5)];
        assert_eq!(max_flow(4, &arcs, 0, 3), 3);
    }

    #[test]
    fn needs_backward_edges() {
        // Classic instance where a greedy forward-only routing gets stuck.
        let arcs = [
            (0, 1, 1),
            (0, 2, 1),
            (1, 2, 1),
            (1, 3, 1),
            (2, 4, 1),
            (3, 4, 1),
            (3, 5, 1),
            (4, 5, 1),
        ];
        assert_eq!(max_flow(6, &arcs, 0, 5), 2);
    }

    #[test]
    fn disconnected_sink() {
        assert_eq!(max_flow(3, &[(0, 1, 7)], 0, 2), 0);
    }

    /// Oracle: enumerate all s-t cuts and take the minimum capacity.
    fn min_cut_naive(n: usize, arcs: &[(usize, usize, i64)], s: usize, t: usize) -> i64 {
        let mut best = i64::MAX;
        for mask in 0u32..(1 << n) {
            if mask & (1 << s) == 0 || mask & (1 << t) != 0 {
                continue;
            }
            let cut: i64 = arcs
                .iter()
                .filter(|&&(u, v, _)| mask & (1 << u) != 0 && mask & (1 << v) == 0)
                .map(|&(_, _, c)| c.max(0))
                .sum();
            best = best.min(cut);
        }
        best
    }

    #[test]
    fn flow_equals_min_cut_on_random_networks() {
        let mut state = 0xabcdef12345u64;
        let mut next = move |m: usize| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as usize) % m
        };
        for _ in 0..80 {
            let n = 2 + next(5);
            let mut arcs = Vec::new();
            for _ in 0..next(10) {
                let u = next(n);
                let v = next(n);
                if u != v {
                    arcs.push((u, v, next(4) as i64));
                }
            }
            let s = 0;
            let t = n - 1;
            if s == t {
                continue;
            }
            assert_eq!(max_flow(n, &arcs, s, t), min_cut_naive(n, &arcs, s, t));
        }
    }
}
