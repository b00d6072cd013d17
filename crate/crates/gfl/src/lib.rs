//! Graph languages defined by matching and cutting.
//!
//! This crate implements a family of closely related formalisms for
//! specifying global properties of edge-labeled hypergraphs:
//!
//! * [`graph`] — hypergraphs with *front* and *rear* interface sequences,
//!   typed concatenation, frontal subgraphs and the cut-off operation;
//! * [`expr`] — regular-expression-like *graph expressions* (union,
//!   concatenation, star) denoting graph languages, with anchored matching;
//! * [`eval`] — evaluation graphs whose universal/existential nodes receive
//!   truth values as the least (most undefined) fixed point of an evolution
//!   step;
//! * [`automaton`] — alternating graph automata that consume a graph by
//!   repeatedly cutting off matched subgraphs;
//! * [`formula`] — recursive systems of graph formulas with variables,
//!   their configuration-graph semantics, and the shallow normal form;
//! * [`translate`] — the constructions converting automata to formula
//!   systems and shallow systems back to automata, which preserve both the
//!   accepted and the not-rejected languages;
//! * [`format`] — a plain-text format for alphabets, graphs, expressions,
//!   systems, and automata, plus DOT export in [`dot`];
//! * [`cli`] — the `gfl` command-line tool built from all of the above.
//!
//! The guide in `book/` walks through the concepts with runnable examples;
//! [`samples`] contains the worked objects used there and in the tests.
//!
//! ```
//! use gfl::samples;
//!
//! let ham = samples::ham_automaton();
//! let triangle = samples::cycle_graph(3);
//! assert_eq!(ham.classify(&triangle).unwrap(), gfl::eval::Verdict::Accepted);
//! ```

pub mod alphabet;
pub mod automaton;
pub mod cli;
pub mod dot;
pub mod eval;
pub mod expr;
pub mod format;
pub mod formula;
pub mod graph;
pub mod samples;
pub mod translate;

pub use alphabet::{Alphabet, Symbol};
pub use eval::Verdict;
pub use expr::GraphExpression;
pub use graph::{FrontalHandle, Graph};
