//! Maximum-pairs orientation with a certified `p / (4·log₂(3p))` lower
//! bound, and the fixed-parameter decision "can `k` pairs be satisfied?".
//!
//! The guarantee comes from a centroid decomposition of the kernel tree:
//! every demand path is assigned to the first level whose centroid hits it,
//! some level carries a `1/log₂` fraction of the pairs, and labeling each
//! centroid's branches IN/OUT satisfies a quarter of that level's pairs
//! (derandomized by conditional expectation, tracked in exact quarter
//! units). Because the kernel has fewer than `3p` nodes, the level count is
//! below `log₂(3p)`, which yields the stated bound.

use crate::error::{Error, Result};
use crate::graph::{satisfied_pair_indices, MixedGraph, Orientation, PairList};
use crate::kernel::{kernelize, lift_orientation};
use crate::search::{decide_tree_orientable, OrientationDecision};

/// `⌈p / (4·log₂(3p))⌉` for `p ≥ 1`; the per-instance guarantee on surviving
/// kernel pairs.
pub fn guarantee_bound(p: usize) -> usize {
    if p == 0 {
        return 0;
    }
    (p as f64 / (4.0 * (3.0 * p as f64).log2())).ceil() as usize
}

/// One star of a centroid level: the centroid, its component's nodes, and
/// the indices of the pairs whose path runs through the centroid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentroidStar {
    pub centroid: usize,
    pub component: Vec<usize>,
    pub pair_indices: Vec<usize>,
}

/// All stars at one depth of the centroid decomposition. Components at one
/// level are node-disjoint, and each pair is assigned to exactly one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentroidLevel {
    pub level: usize,
    pub stars: Vec<CentroidStar>,
}

/// Builds the centroid decomposition of a forest, assigning every pair with
/// distinct endpoints to the level where a centroid first meets its path.
/// Recursion continues only into pieces still holding unassigned pairs, so
/// the level count stays within `⌈log₂ n⌉ + 1`.
pub fn centroid_decomposition(forest: &MixedGraph, pairs: &PairList) -> Result<Vec<CentroidLevel>> {
    pairs.validate(forest.node_count())?;
    crate::lca::LcaIndex::build_forest(forest)?;
    let adj = forest.undirected_adjacency();
    let comp_of = forest.undirected_components();
    for (s, t) in pairs.iter() {
        if s != t && comp_of[s] != comp_of[t] {
            return Err(Error::PairDisconnected { s, t });
        }
    }

    let components = comp_of.iter().copied().max().map_or(0, |c| c + 1);
    let mut initial: Vec<Vec<usize>> = vec![Vec::new(); components];
    for v in 0..forest.node_count() {
        initial[comp_of[v]].push(v);
    }
    let mut initial_pairs: Vec<Vec<usize>> = vec![Vec::new(); components];
    for (i, (s, t)) in pairs.iter().enumerate() {
        if s != t {
            initial_pairs[comp_of[s]].push(i);
        }
    }

    let n = forest.node_count();
    let mut in_component = vec![usize::MAX; n]; // stamp for membership tests
    let mut levels: Vec<CentroidLevel> = Vec::new();
    // Queue entries: (component nodes, pending pair indices, level).
    let mut queue: std::collections::VecDeque<(Vec<usize>, Vec<usize>, usize)> = initial
        .into_iter()
        .zip(initial_pairs)
        .filter(|(_, p)| !p.is_empty())
        .map(|(c, p)| (c, p, 0))
        .collect();
    let mut stamp = 0;
    while let Some((component, pending, level)) = queue.pop_front() {
        stamp += 1;
        for &v in &component {
            in_component[v] = stamp;
        }
        let centroid = find_centroid(&adj, &component, &in_component, stamp);
        // Pieces after removing the centroid, keyed by the centroid's
        // neighbors in ascending order.
        let mut piece_of = std::collections::HashMap::new();
        let mut pieces: Vec<Vec<usize>> = Vec::new();
        for &(nb, _) in &adj[centroid] {
            if in_component[nb] != stamp || piece_of.contains_key(&nb) {
                continue;
            }
            let idx = pieces.len();
            let mut nodes = vec![nb];
            piece_of.insert(nb, idx);
            let mut head = 0;
            while head < nodes.len() {
                let u = nodes[head];
                head += 1;
                for &(w, _) in &adj[u] {
                    if in_component[w] == stamp && w != centroid && !piece_of.contains_key(&w) {
                        piece_of.insert(w, idx);
                        nodes.push(w);
                    }
                }
            }
            pieces.push(nodes);
        }
        let mut assigned = Vec::new();
        let mut pushed_down: Vec<Vec<usize>> = vec![Vec::new(); pieces.len()];
        for &i in &pending {
            let (s, t) = pairs.get(i);
            if s == centroid || t == centroid || piece_of[&s] != piece_of[&t] {
                assigned.push(i);
            } else {
                pushed_down[piece_of[&s]].push(i);
            }
        }
        if levels.len() <= level {
            levels.push(CentroidLevel { level, stars: Vec::new() });
        }
        levels[level].stars.push(CentroidStar {
            centroid,
            component: component.clone(),
            pair_indices: assigned,
        });
        for (piece, piece_pairs) in pieces.into_iter().zip(pushed_down) {
            if !piece_pairs.is_empty() {
                queue.push_back((piece, piece_pairs, level + 1));
            }
        }
    }
    if n > 0 {
        let cap = (n.max(2) as f64).log2().ceil() as usize + 1;
        assert!(levels.len() <= cap, "{} centroid levels exceed cap {cap}", levels.len());
    }
    Ok(levels)
}

/// Centroid of a component: the minimum-id node minimizing the largest piece
/// left after its removal.
fn find_centroid(
    adj: &[Vec<(usize, usize)>],
    component: &[usize],
    in_component: &[usize],
    stamp: usize,
) -> usize {
    let total = component.len();
    let root = *component.iter().min().expect("nonempty component");
    // Iterative DFS computing subtree sizes and the max piece per node.
    let mut order = Vec::with_capacity(total);
    let mut parent = std::collections::HashMap::new();
    parent.insert(root, root);
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(w, _) in &adj[u] {
            if in_component[w] == stamp && !parent.contains_key(&w) {
                parent.insert(w, u);
                stack.push(w);
            }
        }
    }
    let mut size = std::collections::HashMap::new();
    let mut max_piece = std::collections::HashMap::new();
    for &u in order.iter().rev() {
        let mut s = 1usize;
        let mut mp = 0usize;
        for &(w, _) in &adj[u] {
            if in_component[w] == stamp && parent[&w] == u && w != u {
                let sw = size[&w];
                s += sw;
                mp = mp.max(sw);
            }
        }
        mp = mp.max(total - s);
        size.insert(u, s);
        max_piece.insert(u, mp);
    }
    let mut best = root;
    for &v in component {
        let (mv, mb) = (max_piece[&v], max_piece[&best]);
        if mv < mb || (mv == mb && v < best) {
            best = v;
        }
    }
    best
}

/// IN branches point toward the centroid, OUT branches away from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    In,
    Out,
}

/// A star-labeling instance: disjoint branch node sets hanging off one
/// centroid (the centroid belongs to no branch).
#[derive(Debug, Clone)]
pub struct StarInstance {
    pub centroid: usize,
    pub branches: Vec<Vec<usize>>,
}

/// Result of [`orient_star_level`]: the chosen labels, the satisfied pair
/// indices, and the conditional-expectation trace in quarter units (entry 0
/// is the a-priori expectation; one entry per fixed branch thereafter).
#[derive(Debug, Clone)]
pub struct StarLabeling {
    pub labels: Vec<BranchLabel>,
    pub satisfied: Vec<usize>,
    pub expectation_trace: Vec<u64>,
}

/// Labels the branches of a star so that at least `⌈|pairs|/4⌉` pairs are
/// satisfied, where pair `(s, t)` needs `branch(s) = IN` and
/// `branch(t) = OUT` (an endpoint equal to the centroid only needs the
/// other half). Branches are fixed in index order, each taking the label
/// with the larger conditional expectation (ties choose IN); expectations
/// are exact quarter-unit integers, so the trace never decreases.
pub fn orient_star_level(star: &StarInstance, pairs: &PairList) -> Result<StarLabeling> {
    let b = star.branches.len();
    let mut branch_of = std::collections::HashMap::new();
    for (i, nodes) in star.branches.iter().enumerate() {
        for &v in nodes {
            branch_of.insert(v, i);
        }
    }
    // Per pair: the branches of s and t (None = centroid endpoint).
    let mut sides: Vec<(Option<usize>, Option<usize>)> = Vec::with_capacity(pairs.len());
    for (s, t) in pairs.iter() {
        let bs = if s == star.centroid { None } else { Some(*branch_of.get(&s).ok_or(Error::PairNotThroughCentroid { s, t })?) };
        let bt = if t == star.centroid { None } else { Some(*branch_of.get(&t).ok_or(Error::PairNotThroughCentroid { s, t })?) };
        match (bs, bt) {
            (None, None) => return Err(Error::PairNotThroughCentroid { s, t }),
            (Some(x), Some(y)) if x == y => return Err(Error::PairNotThroughCentroid { s, t }),
            _ => sides.push((bs, bt)),
        }
    }

    // Expected satisfaction in quarter units given labels fixed so far:
    // 4 if certain, 2 if one needed label remains open, 1 if two remain,
    // 0 once any needed label is violated.
    let expectation = |labels: &[Option<BranchLabel>]| -> u64 {
        let mut total = 0u64;
        for &(bs, bt) in &sides {
            let s_state = bs.map(|x| labels[x]); // None = centroid endpoint
            let t_state = bt.map(|x| labels[x]);
            let s_factor = match s_state {
                None => 4,
                Some(None) => 2,
                Some(Some(BranchLabel::In)) => 4,
                Some(Some(BranchLabel::Out)) => 0,
            };
            let t_factor = match t_state {
                None => 4,
                Some(None) => 2,
                Some(Some(BranchLabel::Out)) => 4,
                Some(Some(BranchLabel::In)) => 0,
            };
            total += s_factor * t_factor / 4;
        }
        total
    };

    let mut labels: Vec<Option<BranchLabel>> = vec![None; b];
    let mut trace = vec![expectation(&labels)];
    for i in 0..b {
        labels[i] = Some(BranchLabel::In);
        let e_in = expectation(&labels);
        labels[i] = Some(BranchLabel::Out);
        let e_out = expectation(&labels);
        let pick = if e_in >= e_out { BranchLabel::In } else { BranchLabel::Out };
        labels[i] = Some(pick);
        let e = e_in.max(e_out);
        assert!(e >= *trace.last().unwrap(), "conditional expectation decreased");
        trace.push(e);
    }
    let final_labels: Vec<BranchLabel> = labels.into_iter().map(|l| l.unwrap()).collect();
    let satisfied: Vec<usize> = sides
        .iter()
        .enumerate()
        .filter(|&(_, &(bs, bt))| {
            bs.map_or(true, |x| final_labels[x] == BranchLabel::In)
                && bt.map_or(true, |x| final_labels[x] == BranchLabel::Out)
        })
        .map(|(i, _)| i)
        .collect();
    debug_assert_eq!(*trace.last().unwrap(), 4 * satisfied.len() as u64);
    assert!(satisfied.len() >= pairs.len().div_ceil(4), "quarter guarantee violated");
    Ok(StarLabeling { labels: final_labels, satisfied, expectation_trace: trace })
}

/// Output of [`approx_max_orientation`].
#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub orientation: Orientation,
    /// Indices of input pairs satisfied by `orientation`.
    pub satisfied: Vec<usize>,
    /// `auto_satisfied + ⌈p′/(4·log₂(3p′))⌉`; the satisfied count is always
    /// at least this.
    pub certified_bound: usize,
    pub auto_satisfied: usize,
    /// Level of the centroid decomposition the labeling was applied to.
    pub chosen_level: Option<usize>,
    /// Expectation traces of the chosen level's stars, in quarter units.
    pub star_traces: Vec<Vec<u64>>,
}

/// Orients an undirected instance so that at least
/// `auto + ⌈p′/(4·log₂(3p′))⌉` pairs get their directed path: kernelize,
/// pick the centroid level holding the most pairs, label each of its stars,
/// orient branch subtrees accordingly (everything else Forward), and lift.
pub fn approx_max_orientation(g: &MixedGraph, pairs: &PairList) -> Result<ApproxResult> {
    let k = kernelize(g, pairs)?;
    let p_kernel = k.pairs.len();
    let auto = k.auto_satisfied();
    let certified_bound = auto + guarantee_bound(p_kernel);

    let mut kernel_orient = Orientation::forward(k.tree.edge_count());
    let mut chosen_level = None;
    let mut star_traces = Vec::new();
    if p_kernel > 0 {
        let levels = centroid_decomposition(&k.tree, &k.pairs)?;
        let best = levels
            .iter()
            .max_by_key(|l| {
                (
                    l.stars.iter().map(|s| s.pair_indices.len()).sum::<usize>(),
                    std::cmp::Reverse(l.level),
                )
            })
            .expect("nonempty kernel has at least one level");
        chosen_level = Some(best.level);
        let adj = k.tree.undirected_adjacency();
        for star in &best.stars {
            if star.pair_indices.is_empty() {
                continue;
            }
            // Branches = pieces hanging off the centroid, in ascending
            // neighbor order; and hop distance from the centroid to tell
            // each edge's near end.
            let mut inside = vec![false; k.tree.node_count()];
            for &v in &star.component {
                inside[v] = true;
            }
            let mut dist = vec![usize::MAX; k.tree.node_count()];
            dist[star.centroid] = 0;
            let mut branch_idx = vec![usize::MAX; k.tree.node_count()];
            let mut branches: Vec<Vec<usize>> = Vec::new();
            for &(nb, _) in &adj[star.centroid] {
                if !inside[nb] || branch_idx[nb] != usize::MAX {
                    continue;
                }
                let idx = branches.len();
                let mut nodes = vec![nb];
                branch_idx[nb] = idx;
                dist[nb] = 1;
                let mut head = 0;
                while head < nodes.len() {
                    let u = nodes[head];
                    head += 1;
                    for &(w, _) in &adj[u] {
                        if inside[w] && w != star.centroid && branch_idx[w] == usize::MAX {
                            branch_idx[w] = idx;
                            dist[w] = dist[u] + 1;
                            nodes.push(w);
                        }
                    }
                }
                branches.push(nodes);
            }
            let star_pairs = PairList::from_pairs(
                star.pair_indices.iter().map(|&i| k.pairs.get(i)).collect(),
            );
            let instance = StarInstance { centroid: star.centroid, branches };
            let labeling = orient_star_level(&instance, &star_pairs)?;
            // Apply: IN branches point each edge toward the centroid.
            for (e, ed) in k.tree.edges().iter().enumerate() {
                if !inside[ed.u] || !inside[ed.v] {
                    continue;
                }
                let away = if dist[ed.u] > dist[ed.v] { ed.u } else { ed.v };
                let branch = branch_idx[away];
                debug_assert_ne!(branch, usize::MAX);
                match labeling.labels[branch] {
                    BranchLabel::In => kernel_orient.set(e, ed.dir_from(away)),
                    BranchLabel::Out => kernel_orient.set(e, ed.dir_from(away).flipped()),
                }
            }
            star_traces.push(labeling.expectation_trace);
        }
    }

    let orientation = lift_orientation(&kernel_orient, &k.log)?;
    let satisfied = satisfied_pair_indices(g, Some(&orientation), pairs)?;
    assert!(
        satisfied.len() >= certified_bound,
        "satisfied {} below certified bound {certified_bound}",
        satisfied.len()
    );
    Ok(ApproxResult {
        orientation,
        satisfied,
        certified_bound,
        auto_satisfied: auto,
        chosen_level,
        star_traces,
    })
}

/// Decision for "does some orientation satisfy at least `k` pairs?".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KPairsDecision {
    Yes(Orientation),
    No,
}

/// Outcome of [`decide_k_pairs`], recording whether the subset-enumeration
/// path was taken or the certified bound already settled the answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KPairsOutcome {
    pub decision: KPairsDecision,
    pub used_enumeration: bool,
}

fn binom_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Lexicographic rank → ascending index subset of `{0..n}` of size `k`.
fn unrank_subset(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut subset = Vec::with_capacity(k);
    let mut c = 0;
    let mut remaining = k;
    while remaining > 0 {
        let count = binom_u128(n - c - 1, remaining - 1);
        if rank < count {
            subset.push(c);
            remaining -= 1;
        } else {
            rank -= count;
        }
        c += 1;
    }
    subset
}

/// Advances an ascending subset of `{0..n}` to its lexicographic successor;
/// false when it was the last one.
fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in (0..k).rev() {
        if subset[i] < n - (k - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Decides whether some orientation satisfies at least `k` pairs. Fast path:
/// if `k` is within the certified approximation bound, YES with that
/// witness. Otherwise the deficit `k′ = k − auto` is small enough that all
/// `k′`-subsets of the kernel pairs can be enumerated (in lexicographic
/// order, shardable over `threads` workers with a deterministic
/// lowest-subset winner); YES iff some subset is tree-orientable.
pub fn decide_k_pairs(
    g: &MixedGraph,
    pairs: &PairList,
    k: usize,
    threads: usize,
) -> Result<KPairsOutcome> {
    if k == 0 {
        return Ok(KPairsOutcome {
            decision: KPairsDecision::Yes(Orientation::forward(g.edge_count())),
            used_enumeration: false,
        });
    }
    if k > pairs.len() {
        return Ok(KPairsOutcome { decision: KPairsDecision::No, used_enumeration: false });
    }
    let kern = kernelize(g, pairs)?;
    let auto = kern.auto_satisfied();
    let p = kern.pairs.len();
    if k <= auto + guarantee_bound(p) {
        let approx = approx_max_orientation(g, pairs)?;
        debug_assert!(approx.satisfied.len() >= k);
        return Ok(KPairsOutcome {
            decision: KPairsDecision::Yes(approx.orientation),
            used_enumeration: false,
        });
    }
    let need = k - auto;
    if need > p {
        return Ok(KPairsOutcome { decision: KPairsDecision::No, used_enumeration: true });
    }
    // The fast path failed, so the deficit exceeds the guarantee fraction,
    // which caps the subset count at (4e·log₂(3p))^need.
    let frac = p as f64 / (4.0 * (3.0 * p as f64).log2());
    assert!(need as f64 > frac, "enumeration entered below the guarantee threshold");
    let cap = (4.0 * std::f64::consts::E * (3.0 * p as f64).log2()).powi(need as i32);
    let total = binom_u128(p, need);
    assert!(
        (total as f64) <= cap * (1.0 + 1e-9),
        "subset count {total} exceeds expected cap {cap}"
    );

    let scan = |from: u128, to: u128| -> Option<(u128, Orientation)> {
        if from >= to {
            return None;
        }
        let mut subset = unrank_subset(p, need, from);
        let mut rank = from;
        loop {
            let chosen =
                PairList::from_pairs(subset.iter().map(|&i| kern.pairs.get(i)).collect());
            if let OrientationDecision::Feasible(d) =
                decide_tree_orientable(&kern.tree, &chosen).expect("kernel tree is a forest")
            {
                return Some((rank, d));
            }
            rank += 1;
            if rank >= to || !next_subset(&mut subset, p) {
                return None;
            }
        }
    };
    let workers = threads.max(1).min(total.min(64) as usize).max(1);
    let hit = if workers <= 1 {
        scan(0, total)
    } else {
        let chunk = total.div_ceil(workers as u128);
        let results: Vec<Option<(u128, Orientation)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers as u128)
                .map(|w| {
                    let scan = &scan;
                    scope.spawn(move || scan(w * chunk, ((w + 1) * chunk).min(total)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("subset shard panicked")).collect()
        });
        results.into_iter().flatten().min_by_key(|&(rank, _)| rank)
    };
    match hit {
        Some((_, kernel_orient)) => {
            let lifted = lift_orientation(&kernel_orient, &kern.log)?;
            debug_assert!(
                satisfied_pair_indices(g, Some(&lifted), pairs)?.len() >= k,
                "witness satisfies fewer than {k} pairs"
            );
            Ok(KPairsOutcome { decision: KPairsDecision::Yes(lifted), used_enumeration: true })
        }
        None => Ok(KPairsOutcome { decision: KPairsDecision::No, used_enumeration: true }),
    }
}
