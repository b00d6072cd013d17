//! Alternating graph automata.
//!
//! An automaton has ranked states, each existential or universal, and
//! transitions labeled with graphs: a transition from a state of rank `m` to a
//! state of rank `n` carries a graph of type `(m, n)`. In a configuration
//! `(q, G)` the automaton may follow any transition `(q, Γ, q′)` by locating
//! an isomorphic copy of `Γ` as a frontal subgraph of `G` and cutting it off.
//!
//! The configuration graph of an input is a finite evaluation graph; the
//! least fixed point of truth evolution at the initial configuration decides
//! acceptance. An automaton without permutation cycles — cycles of
//! transitions all labeled by permutation graphs — has acyclic configuration
//! graphs and therefore never answers "indeterminate".
//!
//! ```
//! use gfl::{samples, Verdict};
//!
//! let ham = samples::ham_automaton();
//! assert!(ham.validate().is_empty());
//! assert!(!ham.has_permutation_cycle());
//!
//! assert_eq!(ham.classify(&samples::cycle_graph(3))?, Verdict::Accepted);
//! assert_eq!(ham.classify(&samples::path_graph(3))?, Verdict::Rejected);
//! assert_eq!(ham.classify(&samples::star_graph(2))?, Verdict::Rejected);
//! # Ok::<(), gfl::automaton::AutomatonError>(())
//! ```

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::alphabet::Alphabet;
use crate::eval::{EvalError, EvalNodeId, EvaluationGraph, NodeClass, Verdict};
use crate::graph::{CanonicalKey, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub rank: usize,
    pub universal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: StateId,
    pub graph: Graph,
    pub to: StateId,
}

/// An alternating graph automaton. Construct freely, then check
/// [`validate`](Automaton::validate); the semantic operations refuse invalid
/// automata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Alphabet,
    states: Vec<State>,
    transitions: Vec<Transition>,
    initial: StateId,
}

/// A state paired with the part of the input that is still to be consumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub state: StateId,
    pub remainder: Graph,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    DuplicateStateName { name: String },
    InitialOutOfRange { index: u32 },
    TransitionStateOutOfRange { transition: usize },
    TransitionFrontMismatch { transition: usize, state: String, rank: usize, got: usize },
    TransitionRearMismatch { transition: usize, state: String, rank: usize, got: usize },
    TransitionGraphInvalid { transition: usize, message: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::DuplicateStateName { name } => {
                write!(f, "state name `{name}` is declared twice")
            }
            ValidationIssue::InitialOutOfRange { index } => {
                write!(f, "initial state #{index} is not a state")
            }
            ValidationIssue::TransitionStateOutOfRange { transition } => {
                write!(f, "transition #{transition} mentions a state that does not exist")
            }
            ValidationIssue::TransitionFrontMismatch { transition, state, rank, got } => {
                write!(
                    f,
                    "transition #{transition}: graph front length {got} differs from rank {rank} of source state `{state}`"
                )
            }
            ValidationIssue::TransitionRearMismatch { transition, state, rank, got } => {
                write!(
                    f,
                    "transition #{transition}: graph rear length {got} differs from rank {rank} of target state `{state}`"
                )
            }
            ValidationIssue::TransitionGraphInvalid { transition, message } => {
                write!(f, "transition #{transition}: {message}")
            }
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("invalid automaton: {}", format_issues(.0))]
    Invalid(Vec<ValidationIssue>),
    #[error("input graph has front length {got} but the initial state has rank {rank}")]
    InputType { rank: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Automaton {
    pub fn new(
        alphabet: Alphabet,
        states: Vec<State>,
        transitions: Vec<Transition>,
        initial: StateId,
    ) -> Self {
        Automaton { alphabet, states, transitions, initial }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id.index()]
    }

    pub fn state_named(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s.name == name)
            .map(|i| StateId(i as u32))
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// Check all structural invariants, reporting every violation.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].iter().any(|t| t.name == s.name) {
                issues.push(ValidationIssue::DuplicateStateName { name: s.name.clone() });
            }
        }
        if self.initial.index() >= self.states.len() {
            issues.push(ValidationIssue::InitialOutOfRange { index: self.initial.0 });
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.from.index() >= self.states.len() || t.to.index() >= self.states.len() {
                issues.push(ValidationIssue::TransitionStateOutOfRange { transition: i });
                continue;
            }
            let from = &self.states[t.from.index()];
            let to = &self.states[t.to.index()];
            let (front, rear) = t.graph.graph_type();
            if front != from.rank {
                issues.push(ValidationIssue::TransitionFrontMismatch {
                    transition: i,
                    state: from.name.clone(),
                    rank: from.rank,
                    got: front,
                });
            }
            if rear != to.rank {
                issues.push(ValidationIssue::TransitionRearMismatch {
                    transition: i,
                    state: to.name.clone(),
                    rank: to.rank,
                    got: rear,
                });
            }
            for (_, e) in t.graph.edges() {
                if e.label.index() >= self.alphabet.len() {
                    issues.push(ValidationIssue::TransitionGraphInvalid {
                        transition: i,
                        message: format!("edge label #{} is not in the alphabet", e.label.index()),
                    });
                } else if self.alphabet.rank(e.label) != e.attachment.len() {
                    issues.push(ValidationIssue::TransitionGraphInvalid {
                        transition: i,
                        message: format!(
                            "edge label `{}` has rank {} but {} attached nodes",
                            self.alphabet.name(e.label),
                            self.alphabet.rank(e.label),
                            e.attachment.len()
                        ),
                    });
                }
            }
        }
        issues
    }

    /// All single transition steps from a configuration, each paired with the
    /// index of the transition it follows.
    pub fn steps(&self, c: &Configuration) -> Vec<(Configuration, usize)> {
        let mut out = Vec::new();
        for (i, t) in self.transitions.iter().enumerate() {
            if t.from != c.state {
                continue;
            }
            for handle in c.remainder.embeddings(&t.graph) {
                out.push((
                    Configuration { state: t.to, remainder: c.remainder.cut_off(&handle) },
                    i,
                ));
            }
        }
        out
    }

    /// Breadth-first closure of the initial configuration under transition
    /// steps, deduplicated structurally. Node 0 is the initial configuration.
    pub fn configuration_graph(
        &self,
        input: &Graph,
    ) -> Result<EvaluationGraph<Configuration>, AutomatonError> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(AutomatonError::Invalid(issues));
        }
        let rank = self.states[self.initial.index()].rank;
        if input.front().len() != rank {
            return Err(AutomatonError::InputType { rank, got: input.front().len() });
        }

        let mut eg: EvaluationGraph<Configuration> = EvaluationGraph::new();
        let mut index: HashMap<(u32, CanonicalKey), EvalNodeId> = HashMap::new();
        let mut queue: VecDeque<EvalNodeId> = VecDeque::new();

        let root = Configuration { state: self.initial, remainder: input.clone() };
        let root_id = eg.add_node(self.class_of(self.initial), root.clone());
        index.insert((self.initial.0, root.remainder.canonical_key()), root_id);
        queue.push_back(root_id);

        while let Some(id) = queue.pop_front() {
            let config = eg.payload(id).clone();
            let mut seen_here: Vec<EvalNodeId> = Vec::new();
            for (succ, _) in self.steps(&config) {
                let key = (succ.state.0, succ.remainder.canonical_key());
                let succ_id = match index.get(&key) {
                    Some(found) => *found,
                    None => {
                        let new_id = eg.add_node(self.class_of(succ.state), succ);
                        index.insert(key, new_id);
                        queue.push_back(new_id);
                        new_id
                    }
                };
                if !seen_here.contains(&succ_id) {
                    seen_here.push(succ_id);
                    eg.add_edge(id, succ_id);
                }
            }
        }
        Ok(eg)
    }

    /// Acceptance of an input graph: the verdict of the least fixed point at
    /// the initial configuration. `Accepted` means the input is in the lower
    /// language; anything but `Rejected` means it is in the upper language.
    pub fn classify(&self, input: &Graph) -> Result<Verdict, AutomatonError> {
        Ok(self.configuration_graph(input)?.verdict_at(EvalNodeId(0))?)
    }

    /// True iff some cycle of transitions is labeled entirely by permutation
    /// graphs.
    pub fn has_permutation_cycle(&self) -> bool {
        let n = self.states.len();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in &self.transitions {
            if t.from.index() < n && t.to.index() < n && t.graph.is_permutation() {
                adjacency[t.from.index()].push(t.to.index());
            }
        }
        // 0 = white, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            state[start] = 1;
            stack.push((start, 0));
            while let Some((v, i)) = stack.pop() {
                if i < adjacency[v].len() {
                    stack.push((v, i + 1));
                    let w = adjacency[v][i];
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => return true,
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                }
            }
        }
        false
    }

    fn class_of(&self, q: StateId) -> NodeClass {
        if self.states[q.index()].universal {
            NodeClass::Universal
        } else {
            NodeClass::Existential
        }
    }
}
