//! Shared helpers for the integration and acceptance tests: corpus file
//! loading, enumeration of small unlabeled digraphs up to isomorphism,
//! seeded random generators, and a small DOT well-formedness checker.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use gfl::alphabet::Alphabet;
use gfl::automaton::{Automaton, State, StateId, Transition};
use gfl::eval::{EvaluationGraph, NodeClass, TruthAssignment};
use gfl::expr::GraphExpression;
use gfl::formula::{Formula, FormulaSystem, VarId};
use gfl::graph::Graph;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

pub fn read_corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name))
        .unwrap_or_else(|e| panic!("cannot read corpus file {name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// unlabeled digraph corpus

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn rec(items: &mut Vec<usize>, at: usize, out: &mut Vec<Vec<usize>>) {
        if at == items.len() {
            out.push(items.clone());
            return;
        }
        for i in at..items.len() {
            items.swap(at, i);
            rec(items, at + 1, out);
            items.swap(at, i);
        }
    }
    rec(&mut items, 0, &mut out);
    out
}

/// For each permutation, `invcell[k]` is the adjacency-matrix cell that maps
/// onto cell `k` when relabeling nodes by the permutation.
fn inverse_cell_maps(n: usize) -> Vec<Vec<usize>> {
    permutations(n)
        .into_iter()
        .map(|p| {
            let mut inv = vec![0usize; n * n];
            for i in 0..n {
                for j in 0..n {
                    inv[p[i] * n + p[j]] = i * n + j;
                }
            }
            inv
        })
        .collect()
}

/// Is `mask` the numerically smallest adjacency matrix in its isomorphism
/// class?
fn is_canonical(mask: u64, n: usize, inv_maps: &[Vec<usize>]) -> bool {
    let cells = n * n;
    for inv in inv_maps {
        // compare permuted(mask) with mask from the highest bit down
        for k in (0..cells).rev() {
            let permuted = (mask >> inv[k]) & 1;
            let original = (mask >> k) & 1;
            if permuted != original {
                if permuted < original {
                    return false;
                }
                break;
            }
        }
    }
    true
}

/// Canonical representatives of all unlabeled digraphs on exactly `n` nodes
/// (loops allowed, no parallel edges), as adjacency masks.
pub fn canonical_digraph_masks(n: usize) -> Vec<u64> {
    let inv_maps: Vec<Vec<usize>> = inverse_cell_maps(n)
        .into_iter()
        .filter(|inv| inv.iter().enumerate().any(|(k, &v)| v != k))
        .collect();
    let cells = n * n;
    (0u64..(1 << cells))
        .filter(|&mask| is_canonical(mask, n, &inv_maps))
        .collect()
}

/// The number of unlabeled digraphs on `n` nodes by Burnside's lemma: the
/// average, over all node permutations, of 2^(orbits of the induced cell
/// permutation). Independent check for the canonical enumeration.
pub fn burnside_digraph_count(n: usize) -> u64 {
    let perms = permutations(n);
    let total: u128 = perms
        .iter()
        .map(|p| {
            let cells = n * n;
            let mut seen = vec![false; cells];
            let mut orbits = 0u32;
            for start in 0..cells {
                if seen[start] {
                    continue;
                }
                orbits += 1;
                let mut k = start;
                while !seen[k] {
                    seen[k] = true;
                    let (i, j) = (k / n, k % n);
                    k = p[i] * n + p[j];
                }
            }
            1u128 << orbits
        })
        .sum();
    (total / perms.len() as u128) as u64
}

// ---------------------------------------------------------------------------
// random generators

/// A random well-formed unlabeled graph with the requested interface lengths.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    front_len: usize,
    rear_len: usize,
    max_edges: usize,
) -> Graph {
    let at_least = front_len.max(rear_len);
    let n = rng.random_range(at_least..=max_nodes.max(at_least));
    let alphabet = Alphabet::unlabeled();
    let mut b = Graph::builder(&alphabet);
    let nodes = b.nodes(n);
    if n > 0 {
        let edges = rng.random_range(0..=max_edges);
        for _ in 0..edges {
            let s = nodes[rng.random_range(0..n)];
            let t = nodes[rng.random_range(0..n)];
            b.edge("_", &[s, t]);
        }
    }
    let mut order: Vec<_> = nodes.clone();
    order.shuffle(rng);
    b.front(&order[..front_len]);
    let mut order: Vec<_> = nodes;
    order.shuffle(rng);
    b.rear(&order[..rear_len]);
    b.finish().expect("generated graphs are well-formed")
}

/// A random graph expression of the given type, with atoms of at most three
/// nodes.
pub fn random_expression(
    rng: &mut ChaCha8Rng,
    depth: usize,
    front: usize,
    rear: usize,
) -> GraphExpression {
    if depth == 0 || rng.random_bool(0.35) {
        if rng.random_bool(0.08) {
            return GraphExpression::empty(front, rear);
        }
        return GraphExpression::atom(random_graph(rng, 3, front, rear, 2));
    }
    match rng.random_range(0..4u8) {
        0 => GraphExpression::union(
            random_expression(rng, depth - 1, front, rear),
            random_expression(rng, depth - 1, front, rear),
        ),
        1 => {
            let mid = rng.random_range(0..=2usize);
            GraphExpression::concat(
                random_expression(rng, depth - 1, front, mid),
                random_expression(rng, depth - 1, mid, rear),
            )
        }
        _ if front == rear => {
            GraphExpression::star(random_expression(rng, depth - 1, front, front))
        }
        _ => GraphExpression::atom(random_graph(rng, 3, front, rear, 2)),
    }
}

/// A random automaton: up to `max_states` states of rank at most 2, the
/// initial state of rank 0, and transition graphs of at most three nodes.
/// Permutation-graph labels are drawn with a fixed probability so that
/// permutation cycles (and indeterminate verdicts) occur in the corpus.
pub fn random_automaton(rng: &mut ChaCha8Rng, max_states: usize) -> Automaton {
    let n_states = rng.random_range(1..=max_states);
    let states: Vec<State> = (0..n_states)
        .map(|i| State {
            name: format!("q{i}"),
            rank: if i == 0 { 0 } else { rng.random_range(0..=2) },
            universal: rng.random_bool(0.4),
        })
        .collect();
    let mut transitions = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let out_degree = rng.random_range(0..=2usize);
        for _ in 0..out_degree {
            let target = rng.random_range(0..n_states);
            let target_rank = states[target].rank;
            let graph = if s.rank == target_rank && rng.random_bool(0.25) {
                let mut pattern: Vec<usize> = (0..s.rank).collect();
                pattern.shuffle(rng);
                Graph::permutation(&pattern)
            } else {
                random_graph(rng, 3, s.rank, target_rank, 2)
            };
            transitions.push(Transition {
                from: StateId(i as u32),
                graph,
                to: StateId(target as u32),
            });
        }
    }
    Automaton::new(Alphabet::unlabeled(), states, transitions, StateId(0))
}

/// A random acyclic formula system: definitions reference only
/// higher-indexed variables. The first variable has rank 0.
pub fn random_acyclic_system(rng: &mut ChaCha8Rng, max_vars: usize, depth: usize) -> FormulaSystem {
    let n = rng.random_range(1..=max_vars);
    let mut sys = FormulaSystem::new(Alphabet::unlabeled());
    let ranks: Vec<usize> = (0..n)
        .map(|i| if i == 0 { 0 } else { rng.random_range(0..=2) })
        .collect();
    for (i, rank) in ranks.iter().enumerate() {
        sys.add_variable(&format!("x{i}"), *rank).expect("fresh names");
    }
    for i in 0..n {
        let fo = random_formula(rng, depth, ranks[i], i, &ranks);
        sys.set_definition(VarId(i as u32), fo);
    }
    assert!(sys.validate().is_empty(), "generator produced an invalid system");
    assert!(sys.is_acyclic(), "generator produced a cyclic system");
    sys
}

fn random_formula(
    rng: &mut ChaCha8Rng,
    depth: usize,
    rank: usize,
    current: usize,
    ranks: &[usize],
) -> Formula {
    let later_vars: Vec<usize> = (current + 1..ranks.len())
        .filter(|&j| ranks[j] == rank)
        .collect();
    if depth == 0 {
        return match rng.random_range(0..3u8) {
            0 => Formula::True,
            1 => Formula::False,
            _ => match later_vars.as_slice() {
                [] => Formula::True,
                vars => Formula::Var(VarId(vars[rng.random_range(0..vars.len())] as u32)),
            },
        };
    }
    match rng.random_range(0..6u8) {
        0 => Formula::not(random_formula(rng, depth - 1, rank, current, ranks)),
        1 => Formula::and(
            random_formula(rng, depth - 1, rank, current, ranks),
            random_formula(rng, depth - 1, rank, current, ranks),
        ),
        2 => Formula::or(
            random_formula(rng, depth - 1, rank, current, ranks),
            random_formula(rng, depth - 1, rank, current, ranks),
        ),
        3 | 4 => {
            let inner = rng.random_range(0..=2usize);
            let ex = random_expression(rng, 1, rank, inner);
            let body = random_formula(rng, depth - 1, inner, current, ranks);
            if rng.random_bool(0.5) {
                Formula::exists(ex, body)
            } else {
                Formula::forall(ex, body)
            }
        }
        _ => random_formula(rng, 0, rank, current, ranks),
    }
}

/// A random evaluation graph with unit payloads.
pub fn random_eval_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> EvaluationGraph<usize> {
    let n = rng.random_range(1..=max_nodes);
    let mut g: EvaluationGraph<usize> = EvaluationGraph::new();
    for i in 0..n {
        let class = if rng.random_bool(0.5) {
            NodeClass::Universal
        } else {
            NodeClass::Existential
        };
        g.add_node(class, i);
    }
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(0.25) {
                g.add_edge(gfl::eval::EvalNodeId(i as u32), gfl::eval::EvalNodeId(j as u32));
            }
        }
    }
    g
}

/// Every fixed point of the evolution step, by exhaustive enumeration of all
/// partial assignments.
pub fn all_fixed_points<P>(g: &EvaluationGraph<P>) -> Vec<TruthAssignment> {
    let n = g.node_count();
    let mut out = Vec::new();
    let mut values = vec![0u8; n]; // 0 undefined, 1 false, 2 true
    loop {
        let assignment = TruthAssignment::from_values(
            values
                .iter()
                .map(|v| match v {
                    0 => None,
                    1 => Some(false),
                    _ => Some(true),
                })
                .collect(),
        );
        if g.evolve(&assignment) == assignment {
            out.push(assignment);
        }
        // base-3 increment
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            values[i] += 1;
            if values[i] == 3 {
                values[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// DOT checking

/// A small well-formedness checker for the DOT we emit: one `digraph` with
/// node statements `name [attr=value, ...];` and edge statements
/// `name -> name;`.
pub fn check_dot(text: &str) -> Result<(), String> {
    let text = text.trim();
    let body = text
        .strip_prefix("digraph")
        .ok_or("missing digraph keyword")?
        .trim_start();
    let body = match body.strip_prefix('{') {
        Some(rest) => rest,
        None => {
            let (_, rest) = body.split_once('{').ok_or("missing opening brace")?;
            rest
        }
    };
    let body = body.strip_suffix('}').ok_or("missing closing brace")?.trim();
    // split into statements on `;`, but not inside quoted values
    let mut statements: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut in_quote = false;
    let mut escaped = false;
    for c in body.chars() {
        if in_quote {
            current.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_quote = true;
                current.push(c);
            }
            ';' => {
                statements.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if in_quote {
        return Err("unterminated quoted value".into());
    }
    if !current.trim().is_empty() {
        return Err(format!("statement without terminating `;`: {current}"));
    }
    let mut names: BTreeSet<String> = BTreeSet::new();
    for statement in statements.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        // quoted text only occurs inside attribute lists, so a statement
        // without `[` and with `->` is an edge
        if !statement.contains('[') {
            if let Some((from, to)) = statement.split_once("->") {
                let from = from.trim();
                let to = to.trim();
                if !names.contains(from) || !names.contains(to) {
                    return Err(format!("edge between undeclared nodes: {statement}"));
                }
                continue;
            }
        }
        let (name, attrs) = match statement.split_once('[') {
            Some((name, attrs)) => (name.trim(), Some(attrs)),
            None => (statement, None),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("bad node name in: {statement}"));
        }
        if let Some(attrs) = attrs {
            let attrs = attrs.trim_end().strip_suffix(']').ok_or("missing closing bracket")?;
            check_attr_list(attrs)?;
        }
        names.insert(name.to_owned());
    }
    Ok(())
}

fn check_attr_list(attrs: &str) -> Result<(), String> {
    // values may be quoted strings with escapes, or bare words
    let mut chars = attrs.chars().peekable();
    loop {
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            return Ok(());
        }
        // attribute name
        let mut saw_name = false;
        while matches!(chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_') {
            chars.next();
            saw_name = true;
        }
        if !saw_name {
            return Err(format!("expected attribute name in [{attrs}]"));
        }
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        if chars.next() != Some('=') {
            return Err(format!("expected = in [{attrs}]"));
        }
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            Some('"') => {
                chars.next();
                loop {
                    match chars.next() {
                        Some('\\') => {
                            chars.next();
                        }
                        Some('"') => break,
                        Some(_) => {}
                        None => return Err("unterminated quoted value".into()),
                    }
                }
            }
            Some(_) => {
                while matches!(chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_')
                {
                    chars.next();
                }
            }
            None => return Err("missing attribute value".into()),
        }
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            Some(',') => continue,
            None => return Ok(()),
            Some(c) => return Err(format!("unexpected `{c}` in attribute list")),
        }
    }
}
