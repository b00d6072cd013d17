//! DOT export of evaluation graphs.
//!
//! Universal nodes are drawn as boxes, existential nodes as ellipses; the
//! fill color shows the truth value under a given assignment (green for
//! true, red for false, gray for undefined). Node statements are emitted in
//! node-id order, so the output is deterministic.

use std::fmt::Display;

use crate::eval::{EvaluationGraph, NodeClass, TruthAssignment};

const FILL_TRUE: &str = "palegreen";
const FILL_FALSE: &str = "lightcoral";
const FILL_UNDEFINED: &str = "lightgray";

/// Render an evaluation graph as a DOT digraph, coloring nodes by the given
/// assignment (typically the least fixed point).
pub fn to_dot<P: Display>(graph: &EvaluationGraph<P>, assignment: &TruthAssignment) -> String {
    let mut out = String::from("digraph evaluation {\n");
    for id in graph.node_ids() {
        let shape = match graph.class(id) {
            NodeClass::Universal => "box",
            NodeClass::Existential => "ellipse",
        };
        let fill = match assignment.get(id) {
            Some(true) => FILL_TRUE,
            Some(false) => FILL_FALSE,
            None => FILL_UNDEFINED,
        };
        out.push_str(&format!(
            "  n{} [label=\"{}\", shape={}, style=filled, fillcolor={}];\n",
            id.0,
            escape(&graph.payload(id).to_string()),
            shape,
            fill
        ));
    }
    for id in graph.node_ids() {
        for succ in graph.successors(id) {
            out.push_str(&format!("  n{} -> n{};\n", id.0, succ.0));
        }
    }
    out.push_str("}\n");
    out
}

fn escape(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::EvaluationGraph;

    #[test]
    fn single_node_graph_has_one_node_statement() {
        let mut g: EvaluationGraph<String> = EvaluationGraph::new();
        g.add_node(NodeClass::Universal, "root".into());
        let dot = to_dot(&g, &g.least_fixed_point());
        assert_eq!(dot.matches("label=").count(), 1);
        assert!(dot.contains("shape=box"));
        assert!(dot.contains("fillcolor=palegreen"));
    }

    #[test]
    fn labels_are_escaped() {
        let mut g: EvaluationGraph<String> = EvaluationGraph::new();
        g.add_node(NodeClass::Existential, "say \"hi\"\\".into());
        let dot = to_dot(&g, &TruthAssignment::undefined(1));
        assert!(dot.contains("say \\\"hi\\\"\\\\"));
    }
}
