//! Evaluation graphs and the least fixed point of truth-assignment evolution.
//!
//! An evaluation graph is a finite digraph whose nodes are classified as
//! universal or existential. A partial [`TruthAssignment`] evolves in
//! simultaneous rounds:
//!
//! * a universal node becomes `true` when all successors are `true` (in
//!   particular when it has none) and `false` when some successor is `false`;
//! * an existential node becomes `false` when all successors are `false` (in
//!   particular when it has none) and `true` when some successor is `true`;
//! * otherwise it keeps its value.
//!
//! Iterating from the completely undefined assignment yields a fixed point
//! that is least with respect to the extension order — the "most undefined"
//! one. Nodes still undefined there are reported as
//! [`Verdict::Indeterminate`].
//!
//! ```
//! use gfl::eval::{EvalNodeId, EvaluationGraph, NodeClass, Verdict};
//!
//! let mut g: EvaluationGraph<&str> = EvaluationGraph::new();
//! let root = g.add_node(NodeClass::Existential, "either");
//! let yes = g.add_node(NodeClass::Universal, "vacuous");
//! let cycle = g.add_node(NodeClass::Existential, "self-dependent");
//! g.add_edge(root, yes);
//! g.add_edge(root, cycle);
//! g.add_edge(cycle, cycle);
//!
//! // the childless universal node becomes true, so the root does too; the
//! // self-dependent node never receives a value
//! let fixed = g.least_fixed_point();
//! assert_eq!(fixed.get(yes), Some(true));
//! assert_eq!(fixed.get(cycle), None);
//! assert_eq!(g.verdict_at(root)?, Verdict::Accepted);
//! assert_eq!(g.verdict_at(cycle)?, Verdict::Indeterminate);
//! # Ok::<(), gfl::eval::EvalError>(())
//! ```

use std::fmt;

use thiserror::Error;

/// Index of a node in an [`EvaluationGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvalNodeId(pub u32);

impl EvalNodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeClass {
    Universal,
    Existential,
}

#[derive(Clone, Debug)]
struct EvalNode<P> {
    class: NodeClass,
    successors: Vec<EvalNodeId>,
    payload: P,
}

/// A finite digraph of universal/existential nodes carrying report payloads.
#[derive(Clone, Debug, Default)]
pub struct EvaluationGraph<P> {
    nodes: Vec<EvalNode<P>>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("node {0} does not exist (graph has {1} nodes)")]
    UnknownNode(u32, usize),
}

/// Outcome at a node under the least fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accepted,
    Rejected,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// Partial map from nodes to truth values, ordered by extension: `a ⊑ b` iff
/// `b` agrees with `a` wherever `a` is defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthAssignment {
    values: Vec<Option<bool>>,
}

impl TruthAssignment {
    pub fn undefined(len: usize) -> Self {
        TruthAssignment { values: vec![None; len] }
    }

    pub fn from_values(values: Vec<Option<bool>>) -> Self {
        TruthAssignment { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, node: EvalNodeId) -> Option<bool> {
        self.values.get(node.index()).copied().flatten()
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }

    /// The extension order: `other` agrees with `self` on `self`'s domain.
    pub fn is_below(&self, other: &TruthAssignment) -> bool {
        self.values
            .iter()
            .zip(other.values.iter())
            .all(|(a, b)| a.is_none() || a == b)
    }
}

impl<P> EvaluationGraph<P> {
    pub fn new() -> Self {
        EvaluationGraph { nodes: Vec::new() }
    }

    pub fn add_node(&mut self, class: NodeClass, payload: P) -> EvalNodeId {
        let id = EvalNodeId(self.nodes.len() as u32);
        self.nodes.push(EvalNode { class, successors: Vec::new(), payload });
        id
    }

    pub fn add_edge(&mut self, from: EvalNodeId, to: EvalNodeId) {
        assert!(from.index() < self.nodes.len() && to.index() < self.nodes.len());
        self.nodes[from.index()].successors.push(to);
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = EvalNodeId> {
        (0..self.nodes.len() as u32).map(EvalNodeId)
    }

    pub fn class(&self, node: EvalNodeId) -> NodeClass {
        self.nodes[node.index()].class
    }

    pub fn successors(&self, node: EvalNodeId) -> &[EvalNodeId] {
        &self.nodes[node.index()].successors
    }

    pub fn payload(&self, node: EvalNodeId) -> &P {
        &self.nodes[node.index()].payload
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.successors.len()).sum()
    }

    pub fn map_payload<Q>(self, mut f: impl FnMut(P) -> Q) -> EvaluationGraph<Q> {
        EvaluationGraph {
            nodes: self
                .nodes
                .into_iter()
                .map(|n| EvalNode { class: n.class, successors: n.successors, payload: f(n.payload) })
                .collect(),
        }
    }

    pub fn is_acyclic(&self) -> bool {
        // 0 = white, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for start in 0..self.nodes.len() {
            if state[start] != 0 {
                continue;
            }
            state[start] = 1;
            stack.push((start, 0));
            while let Some((v, i)) = stack.pop() {
                if i < self.nodes[v].successors.len() {
                    stack.push((v, i + 1));
                    let w = self.nodes[v].successors[i].index();
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => return false,
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                }
            }
        }
        true
    }

    /// One simultaneous evolution round; reads only `assignment`.
    pub fn evolve(&self, assignment: &TruthAssignment) -> TruthAssignment {
        let values = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let succ = node.successors.iter().map(|s| assignment.get(*s));
                let (mut all_true, mut all_false, mut some_true, mut some_false) =
                    (true, true, false, false);
                for v in succ {
                    match v {
                        Some(true) => {
                            all_false = false;
                            some_true = true;
                        }
                        Some(false) => {
                            all_true = false;
                            some_false = true;
                        }
                        None => {
                            all_true = false;
                            all_false = false;
                        }
                    }
                }
                match node.class {
                    NodeClass::Universal if all_true => Some(true),
                    NodeClass::Universal if some_false => Some(false),
                    NodeClass::Existential if all_false => Some(false),
                    NodeClass::Existential if some_true => Some(true),
                    _ => assignment.get(EvalNodeId(i as u32)),
                }
            })
            .collect();
        TruthAssignment { values }
    }

    /// Iterate [`evolve`](Self::evolve) from the undefined assignment until
    /// stable. The result is a fixed point and the least one under `⊑`.
    pub fn least_fixed_point(&self) -> TruthAssignment {
        let mut current = TruthAssignment::undefined(self.nodes.len());
        loop {
            let next = self.evolve(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    /// The whole evolution chain from undefined up to and including the fixed
    /// point.
    pub fn evolution_chain(&self) -> Vec<TruthAssignment> {
        let mut chain = vec![TruthAssignment::undefined(self.nodes.len())];
        loop {
            let next = self.evolve(chain.last().expect("nonempty"));
            if Some(&next) == chain.last() {
                return chain;
            }
            chain.push(next);
        }
    }

    /// Verdict of the least fixed point at `root`.
    pub fn verdict_at(&self, root: EvalNodeId) -> Result<Verdict, EvalError> {
        if root.index() >= self.nodes.len() {
            return Err(EvalError::UnknownNode(root.0, self.nodes.len()));
        }
        Ok(match self.least_fixed_point().get(root) {
            Some(true) => Verdict::Accepted,
            Some(false) => Verdict::Rejected,
            None => Verdict::Indeterminate,
        })
    }
}
