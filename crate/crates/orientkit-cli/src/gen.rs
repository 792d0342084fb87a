//! Seeded random-instance generation.

use clap::ValueEnum;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orientkit::graph::{MixedGraph, TopologicalOrder, topological_order};

use crate::instance::{ArcSpec, CostValue, EdgeSpec, InstanceFile};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// A uniformly random tree with unit costs.
    Tree,
    /// A random spanning tree plus extra costed edges.
    RandomConnected,
    /// Undirected components tied together by arcs that keep the
    /// component-contracted overlay acyclic.
    MixedDagOverlay,
    /// A two-terminal instance for disjoint-paths runs; the graph is not
    /// forced to be connected, so feasible and infeasible cases both occur.
    TwoTerminal,
}

pub struct GenParams {
    pub family: Family,
    pub nodes: usize,
    pub max_edges: usize,
    pub max_pairs: usize,
    pub ell: i64,
    pub seed: u64,
}

fn random_tree_edges(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|v| (rng.gen_range(0..v), v)).collect()
}

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let s = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            (s, t)
        })
        .collect()
}

fn unit_edges(list: Vec<(usize, usize)>) -> Vec<EdgeSpec> {
    list.into_iter().map(|(u, v)| EdgeSpec { u, v, cost: None }).collect()
}

fn costed_edges(rng: &mut ChaCha8Rng, list: Vec<(usize, usize)>) -> Vec<EdgeSpec> {
    list.into_iter()
        .map(|(u, v)| EdgeSpec { u, v, cost: Some(CostValue::Int(rng.gen_range(1..=6))) })
        .collect()
}

/// Adds up to `target - base.len()` random non-duplicate extra edges.
fn extend_with_extras(
    rng: &mut ChaCha8Rng,
    base: &mut Vec<(usize, usize)>,
    n: usize,
    target: usize,
) {
    let mut seen: Vec<(usize, usize)> =
        base.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    seen.sort_unstable();
    while base.len() < target {
        let mut fresh = None;
        for _ in 0..16 {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            let key = (u.min(v), u.max(v));
            if seen.binary_search(&key).is_err() {
                fresh = Some((u, v, key));
                break;
            }
        }
        match fresh {
            Some((u, v, key)) => {
                let at = seen.binary_search(&key).unwrap_err();
                seen.insert(at, key);
                base.push((u, v));
            }
            None => break,
        }
    }
}

pub fn generate(params: &GenParams) -> Result<InstanceFile, CliError> {
    let n = params.nodes;
    let bad = |msg: String| Err(CliError::malformed(msg));
    if n == 0 {
        return bad("--nodes must be at least 1".to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let inst = match params.family {
        Family::Tree => {
            let edges = random_tree_edges(&mut rng, n);
            let pair_count = rng.gen_range(0..=params.max_pairs);
            let pairs = random_pairs(&mut rng, n, pair_count);
            InstanceFile {
                nodes: n,
                edges: unit_edges(edges),
                arcs: vec![],
                pairs,
                k: None,
                ell: None,
                s: None,
                t: None,
            }
        }
        Family::RandomConnected => {
            if params.max_edges + 1 < n {
                return bad(format!(
                    "--cap-edges {} cannot connect {n} nodes (needs at least {})",
                    params.max_edges,
                    n - 1
                ));
            }
            let mut edges = random_tree_edges(&mut rng, n);
            let cap = params.max_edges.min(n * (n - 1) / 2);
            let target = if cap > edges.len() {
                rng.gen_range(edges.len()..=cap)
            } else {
                edges.len()
            };
            extend_with_extras(&mut rng, &mut edges, n, target);
            let pair_count = rng.gen_range(0..=params.max_pairs);
            let pairs = random_pairs(&mut rng, n, pair_count);
            InstanceFile {
                nodes: n,
                edges: costed_edges(&mut rng, edges),
                arcs: vec![],
                pairs,
                k: None,
                ell: None,
                s: None,
                t: None,
            }
        }
        Family::MixedDagOverlay => {
            // Assign nodes to groups, build a random tree inside each group,
            // and add arcs that always point from an earlier group to a
            // later one in a random group order, so contracting the
            // undirected components leaves a DAG.
            let groups = rng.gen_range(2..=(n / 2).max(2));
            let comp: Vec<usize> = (0..n).map(|_| rng.gen_range(0..groups)).collect();
            let mut edges = Vec::new();
            for gid in 0..groups {
                let members: Vec<usize> = (0..n).filter(|&v| comp[v] == gid).collect();
                for i in 1..members.len() {
                    let p = rng.gen_range(0..i);
                    edges.push((members[p], members[i]));
                }
            }
            let mut order: Vec<usize> = (0..groups).collect();
            for i in (1..groups).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let mut pos = vec![0usize; groups];
            for (rank, &gid) in order.iter().enumerate() {
                pos[gid] = rank;
            }
            let arc_budget = rng.gen_range(0..=6usize);
            let mut arcs = Vec::new();
            for _ in 0..arc_budget {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if comp[a] == comp[b] {
                    continue;
                }
                let (tail, head) =
                    if pos[comp[a]] < pos[comp[b]] { (a, b) } else { (b, a) };
                arcs.push(ArcSpec { tail, head });
            }
            let pair_count = rng.gen_range(0..=params.max_pairs);
            let pairs = random_pairs(&mut rng, n, pair_count);
            let inst = InstanceFile {
                nodes: n,
                edges: unit_edges(edges),
                arcs,
                pairs,
                k: None,
                ell: None,
                s: None,
                t: None,
            };
            assert_overlay_acyclic(&inst);
            inst
        }
        Family::TwoTerminal => {
            if n < 2 {
                return bad("two-terminal instances need at least 2 nodes".to_string());
            }
            if params.ell < 1 {
                return bad("--ell must be at least 1".to_string());
            }
            let cap = params.max_edges.max(1);
            let m = rng.gen_range(n.saturating_sub(1).max(1)..=cap.max(n));
            // Endpoints drawn freely (no duplicate filtering): parallel edges
            // are meaningful here, and sparse draws leave some instances
            // disconnected, giving the feasible/infeasible mix.
            let mut edges = Vec::with_capacity(m);
            for _ in 0..m {
                let u = rng.gen_range(0..n);
                let mut v = rng.gen_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                edges.push((u, v));
            }
            InstanceFile {
                nodes: n,
                edges: costed_edges(&mut rng, edges),
                arcs: vec![],
                pairs: vec![],
                k: None,
                ell: Some(params.ell),
                s: Some(0),
                t: Some(n - 1),
            }
        }
    };
    Ok(inst)
}

/// Generation-time invariant for the overlay family: contracting every
/// undirected component must leave an acyclic arc structure.
fn assert_overlay_acyclic(inst: &InstanceFile) {
    let (g, _) = inst.to_graph(true).expect("generated instance is valid");
    let comp = g.undirected_components();
    let groups = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut contracted = MixedGraph::new(groups);
    for a in g.arcs() {
        contracted
            .add_arc(comp[a.tail], comp[a.head])
            .expect("overlay arcs join distinct components");
    }
    assert!(
        matches!(topological_order(&contracted), TopologicalOrder::Order(_)),
        "overlay contraction must be acyclic"
    );
}
