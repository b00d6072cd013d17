//! Worked objects used throughout the tests and the guide: the building-block
//! graphs of the Hamiltonian-cycle specifications, the cycle expression, the
//! Hamiltonian-cycle automaton and formula system, small input graphs, and a
//! brute-force Hamiltonicity oracle for unlabeled digraphs.

use crate::alphabet::Alphabet;
use crate::automaton::{Automaton, State, StateId, Transition};
use crate::expr::GraphExpression;
use crate::formula::{Formula, FormulaSystem};
use crate::graph::Graph;

/// The alphabet of unlabeled graphs: just the invisible binary label.
pub fn unlabeled() -> Alphabet {
    Alphabet::unlabeled()
}

/// One node carrying a loop; empty interfaces. Type (0,0).
pub fn loop_graph() -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let v = b.node();
    b.edge("_", &[v, v]);
    b.finish().expect("well-formed")
}

/// One isolated node; empty interfaces. Type (0,0).
pub fn node_graph() -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    b.node();
    b.finish().expect("well-formed")
}

/// An edge `y -> x` with empty front and rear `(x, y)`: picks the first edge
/// of a cycle, leaving the head of the walk first and the start node second.
/// Type (0,2).
pub fn edge_up() -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let x = b.node();
    let y = b.node();
    b.edge("_", &[y, x]).rear(&[x, y]);
    b.finish().expect("well-formed")
}

/// Front `(x, y)`, an edge `x -> z` to a fresh node, rear `(z, y)`: extends
/// the walk by one edge, discarding the previous head. Type (2,2).
pub fn out_en() -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let x = b.node();
    let y = b.node();
    let z = b.node();
    b.edge("_", &[x, z]).front(&[x, y]).rear(&[z, y]);
    b.finish().expect("well-formed")
}

/// Front `(z, y)` with an edge `z -> y` and empty rear: closes the walk back
/// to its start node. Type (2,0).
pub fn edge_down() -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let z = b.node();
    let y = b.node();
    b.edge("_", &[z, y]).front(&[z, y]);
    b.finish().expect("well-formed")
}

/// The expression recognizing cycles in a graph with empty interfaces:
/// a single loop, or a first edge, any number of extensions, and a closing
/// edge.
pub fn cycle_expression() -> GraphExpression {
    GraphExpression::union(
        GraphExpression::atom(loop_graph()),
        GraphExpression::concat(
            GraphExpression::concat(
                GraphExpression::atom(edge_up()),
                GraphExpression::star(GraphExpression::atom(out_en())),
            ),
            GraphExpression::atom(edge_down()),
        ),
    )
}

/// The alternating graph automaton accepting exactly the unlabeled digraphs
/// that contain a Hamiltonian cycle.
///
/// From `q0` it consumes a loop (one-node cycles) or a first cycle edge, in
/// `q1` it follows further edges while cutting visited nodes away, and
/// `q2` — the only universal state — accepts iff no node is left: any
/// remaining node steps to the rejecting sink `q3`.
pub fn ham_automaton() -> Automaton {
    let alphabet = unlabeled();
    let states = vec![
        State { name: "q0".into(), rank: 0, universal: false },
        State { name: "q1".into(), rank: 2, universal: false },
        State { name: "q2".into(), rank: 0, universal: true },
        State { name: "q3".into(), rank: 0, universal: false },
    ];
    let transitions = vec![
        Transition { from: StateId(0), graph: edge_up(), to: StateId(1) },
        Transition { from: StateId(0), graph: loop_graph(), to: StateId(2) },
        Transition { from: StateId(1), graph: out_en(), to: StateId(1) },
        Transition { from: StateId(1), graph: edge_down(), to: StateId(2) },
        Transition { from: StateId(2), graph: node_graph(), to: StateId(3) },
    ];
    Automaton::new(alphabet, states, transitions, StateId(0))
}

/// The recursive formula system specifying Hamiltonian cycles, tested at `u`:
///
/// * `u` — the graph starts with a loop and then satisfies `v`, or with an
///   edge and then satisfies `w`;
/// * `w` — keep following edges (`w` again), or close the cycle and require
///   `v`;
/// * `v` — no node is left.
///
/// `u` and `v` have rank 0; `w` continues a type-(0,2) expression, so it has
/// rank 2.
pub fn ham_system() -> FormulaSystem {
    let mut sys = FormulaSystem::new(unlabeled());
    let u = sys.add_variable("u", 0).expect("fresh");
    let v = sys.add_variable("v", 0).expect("fresh");
    let w = sys.add_variable("w", 2).expect("fresh");
    sys.set_definition(
        u,
        Formula::or(
            Formula::exists(GraphExpression::atom(loop_graph()), Formula::Var(v)),
            Formula::exists(GraphExpression::atom(edge_up()), Formula::Var(w)),
        ),
    );
    sys.set_definition(
        v,
        Formula::not(Formula::exists(
            GraphExpression::atom(node_graph()),
            Formula::True,
        )),
    );
    sys.set_definition(
        w,
        Formula::or(
            Formula::exists(GraphExpression::atom(out_en()), Formula::Var(w)),
            Formula::exists(GraphExpression::atom(edge_down()), Formula::Var(v)),
        ),
    );
    sys
}

/// The directed cycle on `n` nodes (a loop for `n = 1`, empty for `n = 0`),
/// with empty interfaces.
pub fn cycle_graph(n: usize) -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let v = b.nodes(n);
    for i in 0..n {
        b.edge("_", &[v[i], v[(i + 1) % n]]);
    }
    b.finish().expect("well-formed")
}

/// The directed path on `n` nodes, with empty interfaces.
pub fn path_graph(n: usize) -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let v = b.nodes(n);
    for i in 1..n {
        b.edge("_", &[v[i - 1], v[i]]);
    }
    b.finish().expect("well-formed")
}

/// A center node with edges to `leaves` fresh nodes, empty interfaces.
pub fn star_graph(leaves: usize) -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let center = b.node();
    for _ in 0..leaves {
        let leaf = b.node();
        b.edge("_", &[center, leaf]);
    }
    b.finish().expect("well-formed")
}

/// One node, no edges, empty interfaces.
pub fn single_node() -> Graph {
    node_graph()
}

/// The unlabeled digraph on nodes `0..n` whose edge `i -> j` is present iff
/// bit `i * n + j` of `mask` is set; empty interfaces.
pub fn digraph_from_mask(n: usize, mask: u64) -> Graph {
    let alphabet = unlabeled();
    let mut b = Graph::builder(&alphabet);
    let v = b.nodes(n);
    for i in 0..n {
        for j in 0..n {
            if mask & (1 << (i * n + j)) != 0 {
                b.edge("_", &[v[i], v[j]]);
            }
        }
    }
    b.finish().expect("well-formed")
}

/// Brute-force Hamiltonicity oracle by permutation enumeration: is there a
/// cyclic arrangement of all `n` nodes whose consecutive edges all exist?
/// The empty graph has none; a single node needs a loop.
pub fn has_hamiltonian_cycle(n: usize, mask: u64) -> bool {
    let edge = |i: usize, j: usize| mask & (1 << (i * n + j)) != 0;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return edge(0, 0);
    }
    // fix node 0 first; permute the rest
    let mut rest: Vec<usize> = (1..n).collect();
    permutations(&mut rest, 0, &mut |perm| {
        let mut prev = 0;
        for &next in perm {
            if !edge(prev, next) {
                return false;
            }
            prev = next;
        }
        edge(prev, 0)
    })
}

/// Calls `check` for every permutation of `items[at..]`; returns true as soon
/// as one check succeeds.
fn permutations(items: &mut Vec<usize>, at: usize, check: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if at == items.len() {
        return check(items);
    }
    for i in at..items.len() {
        items.swap(at, i);
        if permutations(items, at + 1, check) {
            items.swap(at, i);
            return true;
        }
        items.swap(at, i);
    }
    false
}
