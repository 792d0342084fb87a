//! One function per run subcommand: solve, re-verify the answer from the
//! instance plus the produced orientation, and package the result file.

use num_rational::Rational64;
use serde_json::json;

use orientkit::connectivity::vertex_connectivity_value;
use orientkit::disjoint::{
    oracle_min_cost_disjoint_subgraph, solve_disjoint_paths_orientation,
    DEFAULT_ORIENTATION_EDGE_CAP,
};
use orientkit::error::Error;
use orientkit::graph::{satisfied_pair_indices, MixedGraph, Orientation, PairList};
use orientkit::kernel::{kernelize, DropResolution};
use orientkit::maxpairs::{approx_max_orientation, decide_k_pairs, KPairsDecision};
use orientkit::mixed::{decide_mixed_orientable, MixedDecision, MixedOptions};
use orientkit::search::{oracle_max_orientation, DEFAULT_ORACLE_EDGE_CAP};
use orientkit::steiner::{oracle_min_cost_orientable_subgraph, steiner_forest_orientation};

use crate::dot::export_dot;
use crate::instance::{orientation_map, CostValue, InstanceFile, ResultFile};
use crate::{CliError, RunArgs};

/// What a subcommand hands back to `main` for writing.
pub struct Outcome {
    pub json: String,
    pub dot: Option<String>,
    pub exit: i32,
}

/// Maps library errors onto the exit-code contract: 1 malformed input,
/// 2 infeasible, 3 verification failure, 4 cap exceeded.
pub fn map_lib_error(e: Error) -> CliError {
    let code = match &e {
        Error::NodeOutOfRange { .. }
        | Error::SelfLoop { .. }
        | Error::NegativeCost { .. }
        | Error::NotUndirected
        | Error::NotDigraph
        | Error::MissingOrientation
        | Error::OrientationDomainMismatch { .. }
        | Error::NotAForest
        | Error::NotATree
        | Error::IdenticalTerminals { .. } => 1,
        Error::PairDisconnected { .. }
        | Error::InfeasiblePair { .. }
        | Error::InfeasibleCover { .. }
        | Error::InfeasibleFlow { .. } => 2,
        Error::EdgeCapExceeded { .. }
        | Error::PairCapExceeded { .. }
        | Error::OrientationCapExceeded { .. } => 4,
        Error::ComponentHasBridge { .. }
        | Error::ComponentDisconnected
        | Error::PairNotThroughCentroid { .. }
        | Error::CoverViolated { .. }
        | Error::Internal(_) => 3,
    };
    CliError { code, msg: e.to_string() }
}

fn verified(g: &MixedGraph, o: &Orientation, pairs: &PairList) -> Result<Vec<usize>, CliError> {
    satisfied_pair_indices(g, Some(o), pairs).map_err(map_lib_error)
}

fn dot_if(
    args: &RunArgs,
    g: &MixedGraph,
    pairs: &PairList,
    o: Option<&Orientation>,
) -> Option<String> {
    args.dot.as_ref().map(|_| export_dot(g, pairs, o))
}

fn oracle_cap(args: &RunArgs) -> usize {
    args.cap_edges.unwrap_or(DEFAULT_ORACLE_EDGE_CAP)
}

pub fn max_orient(inst: &InstanceFile, args: &RunArgs, threads: usize) -> Result<Outcome, CliError> {
    let (g, pairs) = inst.to_graph(false)?;
    let res = approx_max_orientation(&g, &pairs).map_err(map_lib_error)?;
    let sat = verified(&g, &res.orientation, &pairs)?;
    if sat != res.satisfied {
        return Err(CliError::verification(
            "the reported satisfied set does not re-verify against the orientation".into(),
        ));
    }
    if sat.len() < res.certified_bound {
        return Err(CliError::verification(format!(
            "satisfied only {} pairs, below the certified bound {}",
            sat.len(),
            res.certified_bound
        )));
    }
    if args.oracle_check {
        let oracle =
            oracle_max_orientation(&g, &pairs, oracle_cap(args), threads).map_err(map_lib_error)?;
        if oracle.value < sat.len() {
            return Err(CliError::verification(format!(
                "approximation satisfied {} pairs but the oracle optimum is {}",
                sat.len(),
                oracle.value
            )));
        }
    }
    let mut rf = ResultFile::new("ok");
    rf.value = Some(sat.len());
    rf.certified_bound = Some(res.certified_bound);
    rf.orientation = orientation_map(&res.orientation);
    rf.satisfied_pairs = sat;
    rf.transcript = Some(json!({
        "auto_satisfied": res.auto_satisfied,
        "chosen_level": res.chosen_level,
    }));
    Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, Some(&res.orientation)), exit: 0 })
}

pub fn k_pairs(inst: &InstanceFile, args: &RunArgs, threads: usize) -> Result<Outcome, CliError> {
    let (g, pairs) = inst.to_graph(false)?;
    let k = args.k.or(inst.k).ok_or_else(|| {
        CliError::malformed("k-pairs needs --k or a \"k\" field in the instance".into())
    })?;
    let outcome = decide_k_pairs(&g, &pairs, k, threads).map_err(map_lib_error)?;
    let oracle_yes = if args.oracle_check {
        let oracle =
            oracle_max_orientation(&g, &pairs, oracle_cap(args), threads).map_err(map_lib_error)?;
        Some(oracle.value >= k)
    } else {
        None
    };
    match outcome.decision {
        KPairsDecision::Yes(o) => {
            let sat = verified(&g, &o, &pairs)?;
            if sat.len() < k {
                return Err(CliError::verification(format!(
                    "witness satisfies {} pairs, below the target {k}",
                    sat.len()
                )));
            }
            if oracle_yes == Some(false) {
                return Err(CliError::verification(
                    "decision is YES but the oracle optimum is below k".into(),
                ));
            }
            let mut rf = ResultFile::new("yes");
            rf.value = Some(sat.len());
            rf.orientation = orientation_map(&o);
            rf.satisfied_pairs = sat;
            rf.transcript = Some(json!({ "used_enumeration": outcome.used_enumeration }));
            Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, Some(&o)), exit: 0 })
        }
        KPairsDecision::No => {
            if oracle_yes == Some(true) {
                return Err(CliError::verification(
                    "decision is NO but the oracle satisfies k pairs".into(),
                ));
            }
            let mut rf = ResultFile::new("no");
            rf.transcript = Some(json!({ "used_enumeration": outcome.used_enumeration }));
            Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, None), exit: 2 })
        }
    }
}

pub fn mixed_orient(inst: &InstanceFile, args: &RunArgs, threads: usize) -> Result<Outcome, CliError> {
    let (g, pairs) = inst.to_graph(true)?;
    let opts = MixedOptions {
        cap: args.cap_pairs.unwrap_or_else(|| MixedOptions::default().cap),
        memo: true,
        threads,
    };
    let decision = decide_mixed_orientable(&g, &pairs, &opts).map_err(map_lib_error)?;
    let oracle_yes = if args.oracle_check {
        let oracle =
            oracle_max_orientation(&g, &pairs, oracle_cap(args), threads).map_err(map_lib_error)?;
        Some(oracle.value == pairs.len())
    } else {
        None
    };
    match decision {
        MixedDecision::Yes(o) => {
            let sat = verified(&g, &o, &pairs)?;
            if sat.len() != pairs.len() {
                return Err(CliError::verification(format!(
                    "witness satisfies {} of {} pairs",
                    sat.len(),
                    pairs.len()
                )));
            }
            if oracle_yes == Some(false) {
                return Err(CliError::verification(
                    "decision is YES but the oracle cannot satisfy every pair".into(),
                ));
            }
            let mut rf = ResultFile::new("yes");
            rf.value = Some(sat.len());
            rf.orientation = orientation_map(&o);
            rf.satisfied_pairs = sat;
            Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, Some(&o)), exit: 0 })
        }
        MixedDecision::No => {
            if oracle_yes == Some(true) {
                return Err(CliError::verification(
                    "decision is NO but the oracle satisfies every pair".into(),
                ));
            }
            let rf = ResultFile::new("no");
            Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, None), exit: 2 })
        }
    }
}

pub fn steiner_orient(inst: &InstanceFile, args: &RunArgs, _threads: usize) -> Result<Outcome, CliError> {
    let (g, pairs) = inst.to_graph(false)?;
    match steiner_forest_orientation(&g, &pairs) {
        Ok(sol) => {
            let sat = verified(&g, &sol.orientation, &pairs)?;
            if sat.len() != pairs.len() {
                return Err(CliError::verification(format!(
                    "orientation satisfies {} of {} pairs",
                    sat.len(),
                    pairs.len()
                )));
            }
            if g.cost_of(&sol.h_edges) != sol.cost {
                return Err(CliError::verification(
                    "reported cost does not equal the bought edges' total".into(),
                ));
            }
            if args.oracle_check {
                match oracle_min_cost_orientable_subgraph(&g, &pairs, oracle_cap(args))
                    .map_err(map_lib_error)?
                {
                    Some((_, opt)) => {
                        if sol.cost > Rational64::from_integer(4) * opt {
                            return Err(CliError::verification(format!(
                                "cost {} exceeds 4x the optimum {opt}",
                                sol.cost
                            )));
                        }
                    }
                    None => {
                        return Err(CliError::verification(
                            "solver bought a subgraph but the oracle says none exists".into(),
                        ))
                    }
                }
            }
            let mut rf = ResultFile::new("ok");
            rf.cost = Some(CostValue::from_rational(sol.cost));
            rf.orientation = orientation_map(&sol.orientation);
            rf.satisfied_pairs = sat;
            rf.transcript = Some(json!({
                "h_edges": sol.h_edges,
                "forest_dual": CostValue::from_rational(sol.forest_dual),
                "cover_dual": CostValue::from_rational(sol.cover_dual),
            }));
            Ok(Outcome {
                json: rf.to_json(),
                dot: dot_if(args, &g, &pairs, Some(&sol.orientation)),
                exit: 0,
            })
        }
        Err(e @ (Error::PairDisconnected { .. } | Error::InfeasibleCover { .. })) => {
            if args.oracle_check
                && oracle_min_cost_orientable_subgraph(&g, &pairs, oracle_cap(args))
                    .map_err(map_lib_error)?
                    .is_some()
            {
                return Err(CliError::verification(
                    "solver reported infeasible but the oracle found a subgraph".into(),
                ));
            }
            let mut rf = ResultFile::new("infeasible");
            rf.transcript = Some(json!({ "reason": e.to_string() }));
            Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, None), exit: 2 })
        }
        Err(e) => Err(map_lib_error(e)),
    }
}

/// Rebuilds the bought digraph from (instance, orientation, h_edges) and
/// recomputes both connectivity numbers — the re-verification the result
/// file promises.
fn kappa_of(
    g: &MixedGraph,
    h_edges: &[usize],
    o: &Orientation,
    s: usize,
    t: usize,
) -> Result<(i64, i64), CliError> {
    let mut d = MixedGraph::new(g.node_count());
    for &e in h_edges {
        if e >= g.edge_count() {
            return Err(CliError::verification(format!("solution mentions unknown edge {e}")));
        }
        let (a, b) = g.edge(e).endpoints(o.get(e));
        d.add_arc(a, b).map_err(map_lib_error)?;
    }
    let kst = vertex_connectivity_value(&d, s, t).map_err(map_lib_error)?;
    let kts = vertex_connectivity_value(&d, t, s).map_err(map_lib_error)?;
    Ok((kst, kts))
}

pub fn disjoint_paths(inst: &InstanceFile, args: &RunArgs, threads: usize) -> Result<Outcome, CliError> {
    let (g, pairs) = inst.to_graph(false)?;
    if !pairs.is_empty() {
        return Err(CliError::malformed(
            "disjoint-paths instances use s/t/ell; the pairs list must be empty".into(),
        ));
    }
    let s = args.s.or(inst.s).ok_or_else(|| {
        CliError::malformed("disjoint-paths needs --s or an \"s\" field in the instance".into())
    })?;
    let t = args.t.or(inst.t).ok_or_else(|| {
        CliError::malformed("disjoint-paths needs --t or a \"t\" field in the instance".into())
    })?;
    let ell = args.ell.or(inst.ell).ok_or_else(|| {
        CliError::malformed("disjoint-paths needs --ell or an \"ell\" field in the instance".into())
    })?;
    if ell < 1 {
        return Err(CliError::malformed("--ell must be at least 1".into()));
    }
    let cap = args.cap_edges.unwrap_or(DEFAULT_ORIENTATION_EDGE_CAP);
    match solve_disjoint_paths_orientation(&g, s, t, ell, cap, threads) {
        Ok(sol) => {
            let (kst, kts) = kappa_of(&g, &sol.h_edges, &sol.orientation, s, t)?;
            if kst != sol.kappa_st || kts != sol.kappa_ts {
                return Err(CliError::verification(
                    "reported connectivity numbers do not re-verify".into(),
                ));
            }
            if kst < ell || kts < ell {
                return Err(CliError::verification(format!(
                    "orientation gives {kst} and {kts} disjoint paths, below {ell}"
                )));
            }
            if g.cost_of(&sol.h_edges) != sol.cost {
                return Err(CliError::verification(
                    "reported cost does not equal the bought edges' total".into(),
                ));
            }
            if args.oracle_check {
                match oracle_min_cost_disjoint_subgraph(&g, s, t, ell, oracle_cap(args))
                    .map_err(map_lib_error)?
                {
                    Some((_, opt)) => {
                        if sol.cost != opt {
                            return Err(CliError::verification(format!(
                                "cost {} differs from the oracle optimum {opt}",
                                sol.cost
                            )));
                        }
                    }
                    None => {
                        return Err(CliError::verification(
                            "solver succeeded but the oracle says no subgraph works".into(),
                        ))
                    }
                }
            }
            let mut rf = ResultFile::new("ok");
            rf.cost = Some(CostValue::from_rational(sol.cost));
            rf.orientation = orientation_map(&sol.orientation);
            rf.transcript = Some(json!({
                "h_edges": sol.h_edges,
                "kappa_st": sol.kappa_st,
                "kappa_ts": sol.kappa_ts,
            }));
            Ok(Outcome {
                json: rf.to_json(),
                dot: dot_if(args, &g, &pairs, Some(&sol.orientation)),
                exit: 0,
            })
        }
        Err(Error::InfeasibleFlow { max_flow, required }) => {
            if args.oracle_check
                && oracle_min_cost_disjoint_subgraph(&g, s, t, ell, oracle_cap(args))
                    .map_err(map_lib_error)?
                    .is_some()
            {
                return Err(CliError::verification(
                    "solver reported infeasible but the oracle found a subgraph".into(),
                ));
            }
            let mut rf = ResultFile::new("infeasible");
            rf.transcript = Some(json!({ "max_flow": max_flow, "required": required }));
            Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, None), exit: 2 })
        }
        Err(e) => Err(map_lib_error(e)),
    }
}

pub fn kernel(inst: &InstanceFile, args: &RunArgs, threads: usize) -> Result<Outcome, CliError> {
    let (g, pairs) = inst.to_graph(false)?;
    let kern = kernelize(&g, &pairs).map_err(map_lib_error)?;
    let p_prime = kern.pairs.len();
    let size = kern.tree.node_count();
    let bound_ok = if p_prime == 0 { size == 0 } else { size <= 3 * p_prime - 1 };
    if !bound_ok {
        return Err(CliError::verification(format!(
            "kernel has {size} nodes, exceeding the bound for {p_prime} pairs"
        )));
    }
    if args.oracle_check {
        let cap = oracle_cap(args);
        let orig = oracle_max_orientation(&g, &pairs, cap, threads).map_err(map_lib_error)?;
        let reduced =
            oracle_max_orientation(&kern.tree, &kern.pairs, cap, threads).map_err(map_lib_error)?;
        if orig.value != reduced.value + kern.auto_satisfied() {
            return Err(CliError::verification(format!(
                "optimum {} of the original differs from kernel optimum {} + {} auto-satisfied",
                orig.value,
                reduced.value,
                kern.auto_satisfied()
            )));
        }
    }
    let dropped: Vec<serde_json::Value> = kern
        .dropped
        .iter()
        .map(|d| {
            json!({
                "source": d.source,
                "target": d.target,
                "origin": d.origin,
                "resolution": match d.resolution {
                    DropResolution::AutoSatisfied => "auto_satisfied",
                    DropResolution::Unsatisfiable => "unsatisfiable",
                },
            })
        })
        .collect();
    let mut rf = ResultFile::new("ok");
    rf.value = Some(size);
    rf.transcript = Some(json!({
        "auto_satisfied": kern.auto_satisfied(),
        "instance": serde_json::to_value(InstanceFile::from_graph(&kern.tree, &kern.pairs))
            .expect("kernel instance serializes"),
        "node_origin": kern.node_origin,
        "pair_origin": kern.pair_origin,
        "dropped": dropped,
    }));
    let dot = args.dot.as_ref().map(|_| export_dot(&kern.tree, &kern.pairs, None));
    Ok(Outcome { json: rf.to_json(), dot, exit: 0 })
}

pub fn oracle(inst: &InstanceFile, args: &RunArgs, threads: usize) -> Result<Outcome, CliError> {
    let (g, pairs) = inst.to_graph(true)?;
    let res =
        oracle_max_orientation(&g, &pairs, oracle_cap(args), threads).map_err(map_lib_error)?;
    let sat = verified(&g, &res.orientation, &pairs)?;
    if sat.len() != res.value {
        return Err(CliError::verification(format!(
            "oracle witness satisfies {} pairs but claims {}",
            sat.len(),
            res.value
        )));
    }
    let mut rf = ResultFile::new("ok");
    rf.value = Some(res.value);
    rf.orientation = orientation_map(&res.orientation);
    rf.satisfied_pairs = sat;
    Ok(Outcome { json: rf.to_json(), dot: dot_if(args, &g, &pairs, Some(&res.orientation)), exit: 0 })
}
