//! DOT rendering of instances and solutions.

use orientkit::graph::{MixedGraph, Orientation, PairList};

/// Renders the graph in DOT. Oriented edges become arrows, unoriented edges
/// are drawn without arrowheads, arcs are bold arrows, and every demand pair
/// appears as a dashed gray arc that does not influence the layout.
pub fn export_dot(g: &MixedGraph, pairs: &PairList, orientation: Option<&Orientation>) -> String {
    let mut out = String::from("digraph orientkit {\n");
    for v in 0..g.node_count() {
        out.push_str(&format!("  {v};\n"));
    }
    for (id, e) in g.edges().iter().enumerate() {
        match orientation {
            Some(o) => {
                let (a, b) = e.endpoints(o.get(id));
                out.push_str(&format!("  {a} -> {b} [label=\"e{id} c={}\"];\n", e.cost));
            }
            None => {
                out.push_str(&format!(
                    "  {} -> {} [dir=none, label=\"e{id} c={}\"];\n",
                    e.u, e.v, e.cost
                ));
            }
        }
    }
    for (id, a) in g.arcs().iter().enumerate() {
        out.push_str(&format!("  {} -> {} [style=bold, label=\"a{id}\"];\n", a.tail, a.head));
    }
    for (s, t) in pairs.iter() {
        out.push_str(&format!(
            "  {s} -> {t} [style=dashed, color=gray, constraint=false];\n"
        ));
    }
    out.push_str("}\n");
    out
}
