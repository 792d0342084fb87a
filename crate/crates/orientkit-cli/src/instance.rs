//! JSON instance and result schemas, plus conversion to the library types.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use orientkit::graph::{EdgeDir, MixedGraph, Orientation, PairList};

use crate::CliError;

/// An edge cost: a plain integer or an exact fraction rendered as `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostValue {
    Int(i64),
    Ratio(String),
}

impl CostValue {
    pub fn to_rational(&self) -> Result<Rational64, String> {
        match self {
            CostValue::Int(i) => Ok(Rational64::from_integer(*i)),
            CostValue::Ratio(s) => {
                let (p, q) = s
                    .split_once('/')
                    .ok_or_else(|| format!("cost string {s:?} is not of the form \"p/q\""))?;
                let p: i64 = p
                    .trim()
                    .parse()
                    .map_err(|_| format!("cost numerator {p:?} is not an integer"))?;
                let q: i64 = q
                    .trim()
                    .parse()
                    .map_err(|_| format!("cost denominator {q:?} is not an integer"))?;
                if q == 0 {
                    return Err(format!("cost {s:?} has a zero denominator"));
                }
                Ok(Rational64::new(p, q))
            }
        }
    }

    pub fn from_rational(r: Rational64) -> CostValue {
        if r.is_integer() {
            CostValue::Int(*r.numer())
        } else {
            CostValue::Ratio(format!("{}/{}", r.numer(), r.denom()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub tail: usize,
    pub head: usize,
}

/// The JSON document consumed by every run subcommand and produced by `gen`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub nodes: usize,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arcs: Vec<ArcSpec>,
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

impl InstanceFile {
    pub fn load(path: &Path) -> Result<InstanceFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::malformed(format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::malformed(format!("{} is not a valid instance file: {e}", path.display()))
        })
    }

    /// Builds the library graph and pair list, validating everything the
    /// schema alone cannot. `allow_arcs` is set only by subcommands whose
    /// problem is defined on mixed graphs.
    pub fn to_graph(&self, allow_arcs: bool) -> Result<(MixedGraph, PairList), CliError> {
        if !allow_arcs && !self.arcs.is_empty() {
            return Err(CliError::malformed(
                "this subcommand works on undirected instances; \
                 arcs are only accepted by mixed-orient and oracle"
                    .to_string(),
            ));
        }
        let mut g = MixedGraph::new(self.nodes);
        for (i, e) in self.edges.iter().enumerate() {
            let cost = match &e.cost {
                Some(c) => {
                    let r = c
                        .to_rational()
                        .map_err(|m| CliError::malformed(format!("edge {i}: {m}")))?;
                    if r < Rational64::zero() {
                        return Err(CliError::malformed(format!(
                            "edge {i}: negative cost {r}"
                        )));
                    }
                    r
                }
                None => Rational64::from_integer(1),
            };
            g.add_edge(e.u, e.v, cost)
                .map_err(|err| CliError::malformed(format!("edge {i}: {err}")))?;
        }
        for (i, a) in self.arcs.iter().enumerate() {
            g.add_arc(a.tail, a.head)
                .map_err(|err| CliError::malformed(format!("arc {i}: {err}")))?;
        }
        let pairs = PairList::from_pairs(self.pairs.clone());
        pairs
            .validate(g.node_count())
            .map_err(|err| CliError::malformed(format!("pair list: {err}")))?;
        Ok((g, pairs))
    }

    /// Re-encodes a library graph (used by the kernel subcommand to embed the
    /// reduced instance in its transcript).
    pub fn from_graph(g: &MixedGraph, pairs: &PairList) -> InstanceFile {
        InstanceFile {
            nodes: g.node_count(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    u: e.u,
                    v: e.v,
                    cost: if e.cost == Rational64::from_integer(1) {
                        None
                    } else {
                        Some(CostValue::from_rational(e.cost))
                    },
                })
                .collect(),
            arcs: g.arcs().iter().map(|a| ArcSpec { tail: a.tail, head: a.head }).collect(),
            pairs: pairs.as_slice().to_vec(),
            k: None,
            ell: None,
            s: None,
            t: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("instance serializes");
        out.push('\n');
        out
    }
}

/// The JSON document every run subcommand writes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultFile {
    /// `"ok"`, `"yes"`, `"no"`, or `"infeasible"`.
    pub status: String,
    /// Count-valued results (satisfied pairs, oracle optimum, kernel size).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<usize>,
    /// Cost-valued results, exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostValue>,
    /// Lower bound certified by the approximation, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_bound: Option<usize>,
    /// Edge id -> "fwd" (u->v) or "bwd" (v->u); domain = instance edges.
    /// Empty when the result carries no orientation.
    pub orientation: BTreeMap<usize, String>,
    /// Indices into the instance pair list, ascending, re-verified before
    /// being written.
    pub satisfied_pairs: Vec<usize>,
    /// Subcommand-specific extras needed to re-verify the result exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<serde_json::Value>,
}

impl ResultFile {
    pub fn new(status: &str) -> ResultFile {
        ResultFile {
            status: status.to_string(),
            value: None,
            cost: None,
            certified_bound: None,
            orientation: BTreeMap::new(),
            satisfied_pairs: Vec::new(),
            transcript: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("result serializes");
        out.push('\n');
        out
    }
}

/// Renders a full-domain orientation as the result-file map.
pub fn orientation_map(o: &Orientation) -> BTreeMap<usize, String> {
    o.dirs()
        .iter()
        .enumerate()
        .map(|(id, d)| {
            (id, match d {
                EdgeDir::Forward => "fwd".to_string(),
                EdgeDir::Backward => "bwd".to_string(),
            })
        })
        .collect()
}

/// Parses a result-file orientation map back into a library orientation.
pub fn orientation_from_map(
    map: &BTreeMap<usize, String>,
    edge_count: usize,
) -> Result<Orientation, String> {
    if map.len() != edge_count {
        return Err(format!(
            "orientation covers {} edges but the instance has {edge_count}",
            map.len()
        ));
    }
    let mut dirs = vec![EdgeDir::Forward; edge_count];
    for (&id, word) in map {
        if id >= edge_count {
            return Err(format!("orientation mentions unknown edge {id}"));
        }
        dirs[id] = match word.as_str() {
            "fwd" => EdgeDir::Forward,
            "bwd" => EdgeDir::Backward,
            other => return Err(format!("edge {id}: unknown direction {other:?}")),
        };
    }
    Ok(Orientation::from_dirs(dirs))
}

/// Writes `bytes` to `path` atomically: a temp file in the same directory is
/// renamed over the target, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_file_name(format!(
        "{}.tmp",
        path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    ));
    let fail = |e: std::io::Error| {
        CliError::malformed(format!("cannot write {}: {e}", path.display()))
    };
    {
        let mut f = std::fs::File::create(&tmp).map_err(fail)?;
        f.write_all(bytes).map_err(fail)?;
        f.sync_all().map_err(fail)?;
    }
    std::fs::rename(&tmp, path).map_err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_round_trips_integers_and_fractions() {
        let one = CostValue::Int(7).to_rational().unwrap();
        assert_eq!(one, Rational64::from_integer(7));
        let half = CostValue::Ratio("3/2".into()).to_rational().unwrap();
        assert_eq!(half, Rational64::new(3, 2));
        assert_eq!(CostValue::from_rational(Rational64::new(3, 2)), CostValue::Ratio("3/2".into()));
        assert_eq!(CostValue::from_rational(Rational64::new(4, 2)), CostValue::Int(2));
    }

    #[test]
    fn bad_costs_are_rejected() {
        assert!(CostValue::Ratio("x/2".into()).to_rational().is_err());
        assert!(CostValue::Ratio("1/0".into()).to_rational().is_err());
        assert!(CostValue::Ratio("7".into()).to_rational().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"nodes": 2, "edges": [], "pairs": [], "bogus": 1}"#;
        assert!(serde_json::from_str::<InstanceFile>(text).is_err());
    }

    #[test]
    fn arcs_are_rejected_for_undirected_commands() {
        let inst = InstanceFile {
            nodes: 2,
            edges: vec![],
            arcs: vec![ArcSpec { tail: 0, head: 1 }],
            pairs: vec![],
            k: None,
            ell: None,
            s: None,
            t: None,
        };
        assert!(inst.to_graph(false).is_err());
        assert!(inst.to_graph(true).is_ok());
    }

    #[test]
    fn negative_and_self_loop_edges_are_rejected() {
        let neg = InstanceFile {
            nodes: 2,
            edges: vec![EdgeSpec { u: 0, v: 1, cost: Some(CostValue::Int(-1)) }],
            arcs: vec![],
            pairs: vec![],
            k: None,
            ell: None,
            s: None,
            t: None,
        };
        assert!(neg.to_graph(false).is_err());
        let loopy = InstanceFile {
            nodes: 2,
            edges: vec![EdgeSpec { u: 1, v: 1, cost: None }],
            arcs: vec![],
            pairs: vec![],
            k: None,
            ell: None,
            s: None,
            t: None,
        };
        assert!(loopy.to_graph(false).is_err());
    }

    #[test]
    fn orientation_map_round_trips() {
        let o = Orientation::from_dirs(vec![EdgeDir::Forward, EdgeDir::Backward]);
        let map = orientation_map(&o);
        assert_eq!(map.get(&0).unwrap(), "fwd");
        assert_eq!(map.get(&1).unwrap(), "bwd");
        let back = orientation_from_map(&map, 2).unwrap();
        assert_eq!(back.dirs(), o.dirs());
        assert!(orientation_from_map(&map, 3).is_err());
    }
}
