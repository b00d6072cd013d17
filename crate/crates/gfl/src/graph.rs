//! Interfaced hypergraphs and the structural operations everything else is
//! built on.
//!
//! A [`Graph`] is an edge-labeled hypergraph together with two repetition-free
//! node sequences, its *front* and *rear* interfaces. The pair of interface
//! lengths is the *type* of the graph. Two graphs compose by [typed
//! concatenation](Graph::concatenate): the rear interface of the left operand
//! is identified, position by position, with the front interface of the right
//! operand.
//!
//! A [`FrontalHandle`] designates a *frontal subgraph* of a host: a subgraph
//! that owns the host's whole front interface and whose own rear interface
//! covers every host-rear node it touches. Cutting the subgraph off
//! ([`Graph::cut_off`]) removes its interior nodes, its edges, and every edge
//! left dangling; the subgraph's rear becomes the new front. Cutting is
//! deliberately *not* an inverse of concatenation: dangling edges are lost.
//!
//! [`Graph::embeddings`] enumerates the isomorphic copies of a pattern that
//! occur as frontal subgraphs of a host; [`Graph::frontal_subgraphs`] is the
//! exhaustive enumerator used as a test oracle.
//!
//! ```
//! use gfl::{Alphabet, Graph};
//!
//! // a single edge from the front node to the rear node, of type (1,1)
//! let alphabet = Alphabet::unlabeled();
//! let mut b = Graph::builder(&alphabet);
//! let (x, y) = (b.node(), b.node());
//! b.edge("_", &[x, y]).front(&[x]).rear(&[y]);
//! let step = b.finish()?;
//!
//! // concatenation glues rear to front: two steps make a path
//! let path = step.concatenate(&step)?;
//! assert_eq!(path.graph_type(), (1, 1));
//! assert_eq!((path.node_count(), path.edge_count()), (3, 2));
//!
//! // the first step is a frontal subgraph of the path; cutting it off
//! // leaves the second step
//! let copies = path.embeddings(&step);
//! assert_eq!(copies.len(), 1);
//! let rest = path.cut_off(copies.first().unwrap());
//! assert!(rest.is_isomorphic(&step));
//! # Ok::<(), gfl::graph::GraphError>(())
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::alphabet::{Alphabet, Symbol};

/// Opaque node identifier. Ids are local to one graph and its derived cuts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Opaque edge identifier, disjoint from node ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

/// A labeled hyperedge: a symbol plus the sequence of attached nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub label: Symbol,
    pub attachment: Vec<NodeId>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown edge label `{name}`")]
    UnknownSymbol { name: String },
    #[error("symbol #{index} is not in the alphabet")]
    SymbolOutOfRange { index: usize },
    #[error("label `{label}` has rank {rank} but the edge attaches {got} nodes")]
    RankMismatch { label: String, rank: usize, got: usize },
    #[error("edge attaches to node {0:?} which is not in the graph")]
    UnknownAttachment(NodeId),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdgeId(EdgeId),
    #[error("{which} interface is not repetition-free")]
    InterfaceRepetition { which: &'static str },
    #[error("{which} interface mentions node {node:?} which is not in the graph")]
    InterfaceOutsideGraph { which: &'static str, node: NodeId },
    #[error("concatenation type mismatch: left rear has length {left}, right front has length {right}")]
    ConcatTypeMismatch { left: usize, right: usize },
    #[error("frontal subgraph must contain host front node {0:?}")]
    HandleFrontNotContained(NodeId),
    #[error("frontal subgraph node {0:?} is not in the host")]
    HandleNodeOutsideHost(NodeId),
    #[error("frontal subgraph edge {0:?} is not in the host")]
    HandleEdgeOutsideHost(EdgeId),
    #[error("frontal subgraph edge {edge:?} attaches node {node:?} outside the subgraph")]
    HandleEdgeDangling { edge: EdgeId, node: NodeId },
    #[error("frontal subgraph rear is not repetition-free")]
    HandleRearRepetition,
    #[error("frontal subgraph rear node {0:?} is not in the subgraph")]
    HandleRearOutside(NodeId),
    #[error("subgraph node {0:?} lies in the host rear but not in the subgraph rear")]
    HandleRearCoverage(NodeId),
}

/// An edge-labeled hypergraph with front and rear interface sequences.
///
/// Graphs are immutable once built; every operation returns a fresh value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<EdgeId, Edge>,
    front: Vec<NodeId>,
    rear: Vec<NodeId>,
}

/// Deterministic serialization of a graph's full structure. Two graphs are
/// structurally equal iff their keys are equal; used to deduplicate
/// configurations whose graphs share one id universe.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Box<[u32]>);

fn check_interface(
    which: &'static str,
    seq: &[NodeId],
    nodes: &BTreeSet<NodeId>,
) -> Result<(), GraphError> {
    let mut seen = BTreeSet::new();
    for n in seq {
        if !nodes.contains(n) {
            return Err(GraphError::InterfaceOutsideGraph { which, node: *n });
        }
        if !seen.insert(*n) {
            return Err(GraphError::InterfaceRepetition { which });
        }
    }
    Ok(())
}

impl Graph {
    /// Validated construction from explicit parts.
    pub fn from_parts(
        alphabet: &Alphabet,
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (EdgeId, Symbol, Vec<NodeId>)>,
        front: Vec<NodeId>,
        rear: Vec<NodeId>,
    ) -> Result<Graph, GraphError> {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        let mut edge_map = BTreeMap::new();
        for (id, label, attachment) in edges {
            if label.index() >= alphabet.len() {
                return Err(GraphError::SymbolOutOfRange { index: label.index() });
            }
            let rank = alphabet.rank(label);
            if attachment.len() != rank {
                return Err(GraphError::RankMismatch {
                    label: alphabet.name(label).to_owned(),
                    rank,
                    got: attachment.len(),
                });
            }
            for n in &attachment {
                if !nodes.contains(n) {
                    return Err(GraphError::UnknownAttachment(*n));
                }
            }
            if edge_map.insert(id, Edge { label, attachment }).is_some() {
                return Err(GraphError::DuplicateEdgeId(id));
            }
        }
        check_interface("front", &front, &nodes)?;
        check_interface("rear", &rear, &nodes)?;
        Ok(Graph { nodes, edges: edge_map, front, rear })
    }

    pub fn builder(alphabet: &Alphabet) -> GraphBuilder<'_> {
        GraphBuilder {
            alphabet,
            next_node: 0,
            nodes: BTreeSet::new(),
            edges: Vec::new(),
            front: Vec::new(),
            rear: Vec::new(),
            error: None,
        }
    }

    /// The identity graph on `n` nodes: no edges, front = rear.
    pub fn identity(n: usize) -> Graph {
        let nodes: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
        Graph {
            nodes: nodes.iter().copied().collect(),
            edges: BTreeMap::new(),
            front: nodes.clone(),
            rear: nodes,
        }
    }

    /// The permutation graph whose rear at position `j` is its front node at
    /// position `pattern[j]`. Panics if `pattern` is not a permutation.
    pub fn permutation(pattern: &[usize]) -> Graph {
        let n = pattern.len();
        let mut seen = vec![false; n];
        for &p in pattern {
            assert!(p < n && !seen[p], "not a permutation: {pattern:?}");
            seen[p] = true;
        }
        let nodes: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
        Graph {
            nodes: nodes.iter().copied().collect(),
            edges: BTreeMap::new(),
            front: nodes.clone(),
            rear: pattern.iter().map(|&p| NodeId(p as u32)).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().map(|(id, e)| (*id, e))
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn front(&self) -> &[NodeId] {
        &self.front
    }

    pub fn rear(&self) -> &[NodeId] {
        &self.rear
    }

    /// The pair (front length, rear length).
    pub fn graph_type(&self) -> (usize, usize) {
        (self.front.len(), self.rear.len())
    }

    /// True iff the graph has no edges and its nodes are exactly the members
    /// of both interfaces.
    pub fn is_permutation(&self) -> bool {
        if !self.edges.is_empty() || self.front.len() != self.nodes.len() {
            return false;
        }
        // front and rear are repetition-free, so comparing lengths and
        // membership suffices.
        self.rear.len() == self.nodes.len()
            && self.front.iter().all(|n| self.nodes.contains(n))
            && self.rear.iter().all(|n| self.nodes.contains(n))
    }

    /// True iff this is an identity graph: a permutation graph with
    /// front = rear position-wise.
    pub fn is_identity(&self) -> bool {
        self.is_permutation() && self.front == self.rear
    }

    /// For a permutation graph, the pattern `p` with `rear[j] = front[p[j]]`.
    pub fn permutation_pattern(&self) -> Option<Vec<usize>> {
        if !self.is_permutation() {
            return None;
        }
        let pos: BTreeMap<NodeId, usize> =
            self.front.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        Some(self.rear.iter().map(|n| pos[n]).collect())
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let mut buf = Vec::with_capacity(
            4 + self.nodes.len() + self.edges.len() * 5 + self.front.len() + self.rear.len(),
        );
        buf.push(self.nodes.len() as u32);
        buf.extend(self.nodes.iter().map(|n| n.0));
        buf.push(self.edges.len() as u32);
        for (id, e) in &self.edges {
            buf.push(id.0);
            buf.push(e.label.index() as u32);
            buf.push(e.attachment.len() as u32);
            buf.extend(e.attachment.iter().map(|n| n.0));
        }
        buf.push(self.front.len() as u32);
        buf.extend(self.front.iter().map(|n| n.0));
        buf.push(self.rear.len() as u32);
        buf.extend(self.rear.iter().map(|n| n.0));
        CanonicalKey(buf.into_boxed_slice())
    }

    /// Typed concatenation. The right operand is renamed to a fresh copy whose
    /// front nodes coincide position-wise with the left rear; everything else
    /// receives fresh ids, deterministically in ascending id order.
    pub fn concatenate(&self, right: &Graph) -> Result<Graph, GraphError> {
        if self.rear.len() != right.front.len() {
            return Err(GraphError::ConcatTypeMismatch {
                left: self.rear.len(),
                right: right.front.len(),
            });
        }
        let mut map: BTreeMap<NodeId, NodeId> = right
            .front
            .iter()
            .zip(self.rear.iter())
            .map(|(r, l)| (*r, *l))
            .collect();
        let mut next = self.nodes.iter().next_back().map_or(0, |n| n.0 + 1);
        for n in &right.nodes {
            map.entry(*n).or_insert_with(|| {
                let id = NodeId(next);
                next += 1;
                id
            });
        }
        let mut nodes = self.nodes.clone();
        nodes.extend(map.values().copied());
        let mut edges = self.edges.clone();
        let first_free = self.edges.keys().next_back().map_or(0, |e| e.0 + 1);
        for (offset, e) in right.edges.values().enumerate() {
            edges.insert(
                EdgeId(first_free + offset as u32),
                Edge {
                    label: e.label,
                    attachment: e.attachment.iter().map(|n| map[n]).collect(),
                },
            );
        }
        Ok(Graph {
            nodes,
            edges,
            front: self.front.clone(),
            rear: right.rear.iter().map(|n| map[n]).collect(),
        })
    }

    /// Materialize the subgraph a handle denotes: its nodes and edges, the
    /// host's front, and the handle's rear.
    pub fn extract(&self, handle: &FrontalHandle) -> Graph {
        debug_assert!(handle.validate(self).is_ok());
        Graph {
            nodes: handle.nodes.clone(),
            edges: handle
                .edges
                .iter()
                .map(|id| (*id, self.edges[id].clone()))
                .collect(),
            front: self.front.clone(),
            rear: handle.rear.clone(),
        }
    }

    /// Cut the designated frontal subgraph off the host: interior subgraph
    /// nodes disappear, then the subgraph's edges, then every host edge left
    /// attached to a removed node. The handle's rear becomes the new front.
    ///
    /// ```
    /// use gfl::{Alphabet, Graph};
    ///
    /// let alphabet = Alphabet::unlabeled();
    /// let mut b = Graph::builder(&alphabet);
    /// let v = b.nodes(4); // a, b, c, d
    /// b.edge("_", &[v[0], v[1]]) // a -> b
    ///     .edge("_", &[v[0], v[3]]) // a -> d
    ///     .edge("_", &[v[1], v[2]]) // b -> c
    ///     .front(&[v[0], v[2]])
    ///     .rear(&[v[3]]);
    /// let host = b.finish()?;
    ///
    /// // the frontal subgraph {a, b, c} with the edge a -> b and rear (b, c)
    /// let handle = gfl::FrontalHandle::new(
    ///     &host,
    ///     [v[0], v[1], v[2]].into_iter().collect(),
    ///     [gfl::graph::EdgeId(0)].into_iter().collect(),
    ///     vec![v[1], v[2]],
    /// )?;
    /// let rest = host.cut_off(&handle);
    ///
    /// // node a disappeared, and the edge a -> d went dangling with it
    /// assert_eq!(rest.node_count(), 3);
    /// assert_eq!(rest.edge_count(), 1);
    /// assert_eq!(rest.front(), &[v[1], v[2]]);
    /// # Ok::<(), gfl::graph::GraphError>(())
    /// ```
    pub fn cut_off(&self, handle: &FrontalHandle) -> Graph {
        debug_assert!(handle.validate(self).is_ok());
        let keep: BTreeSet<NodeId> = handle.rear.iter().copied().collect();
        let removed: BTreeSet<NodeId> =
            handle.nodes.difference(&keep).copied().collect();
        let nodes: BTreeSet<NodeId> = self.nodes.difference(&removed).copied().collect();
        let edges: BTreeMap<EdgeId, Edge> = self
            .edges
            .iter()
            .filter(|(id, e)| {
                !handle.edges.contains(id)
                    && e.attachment.iter().all(|n| !removed.contains(n))
            })
            .map(|(id, e)| (*id, e.clone()))
            .collect();
        Graph {
            nodes,
            edges,
            front: handle.rear.clone(),
            rear: self.rear.clone(),
        }
    }

    /// All embeddings of `pattern` as a frontal subgraph of `self`: injective
    /// structure-preserving maps sending the pattern front to the host front
    /// position-wise, subject to the rear-coverage condition. Handles are
    /// deduplicated by their (nodes, edges, rear) image.
    pub fn embeddings(&self, pattern: &Graph) -> BTreeSet<FrontalHandle> {
        let mut out = BTreeSet::new();
        if pattern.front.len() != self.front.len()
            || pattern.nodes.len() > self.nodes.len()
            || pattern.edges.len() > self.edges.len()
        {
            return out;
        }
        let mut search = EmbedSearch {
            host: self,
            pattern,
            host_rear: self.rear.iter().copied().collect(),
            node_map: BTreeMap::new(),
            used_nodes: BTreeSet::new(),
            edge_map: BTreeMap::new(),
            used_edges: BTreeSet::new(),
            out: &mut out,
        };
        for (p, h) in pattern.front.iter().zip(self.front.iter()) {
            search.node_map.insert(*p, *h);
            search.used_nodes.insert(*h);
        }
        let remaining: Vec<EdgeId> = pattern.edges.keys().copied().collect();
        search.match_edges(remaining);
        out
    }

    /// Exhaustively enumerate every frontal handle on this graph whose rear
    /// has the requested length. Exponential; intended as a desk-scale oracle.
    pub fn frontal_subgraphs(&self, rear_len: usize) -> BTreeSet<FrontalHandle> {
        let front_set: BTreeSet<NodeId> = self.front.iter().copied().collect();
        let rear_set: BTreeSet<NodeId> = self.rear.iter().copied().collect();
        let optional: Vec<NodeId> = self.nodes.difference(&front_set).copied().collect();
        assert!(
            optional.len() <= 20,
            "frontal_subgraphs is an oracle for small hosts"
        );
        let mut out = BTreeSet::new();
        for mask in 0u64..(1 << optional.len()) {
            let mut sub_nodes = front_set.clone();
            for (i, n) in optional.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    sub_nodes.insert(*n);
                }
            }
            let induced: Vec<EdgeId> = self
                .edges
                .iter()
                .filter(|(_, e)| e.attachment.iter().all(|n| sub_nodes.contains(n)))
                .map(|(id, _)| *id)
                .collect();
            assert!(induced.len() <= 20, "frontal_subgraphs is an oracle for small hosts");
            let required: BTreeSet<NodeId> =
                sub_nodes.intersection(&rear_set).copied().collect();
            if required.len() > rear_len || rear_len > sub_nodes.len() {
                continue;
            }
            let candidates: Vec<NodeId> = sub_nodes.iter().copied().collect();
            let mut rears: Vec<Vec<NodeId>> = Vec::new();
            let mut current = Vec::with_capacity(rear_len);
            enumerate_rears(&candidates, &required, rear_len, &mut current, &mut rears);
            for emask in 0u64..(1 << induced.len()) {
                let sub_edges: BTreeSet<EdgeId> = induced
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| emask & (1 << i) != 0)
                    .map(|(_, id)| *id)
                    .collect();
                for rear in &rears {
                    let handle = FrontalHandle {
                        nodes: sub_nodes.clone(),
                        edges: sub_edges.clone(),
                        rear: rear.clone(),
                    };
                    debug_assert!(handle.validate(self).is_ok());
                    out.insert(handle);
                }
            }
        }
        out
    }

    /// Graph isomorphism respecting labels, attachment order, and both
    /// interface sequences position-wise. Plain backtracking with incidence
    /// signatures for pruning; meant for the small graphs of this domain.
    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        if self.graph_type() != other.graph_type()
            || self.nodes.len() != other.nodes.len()
            || self.edges.len() != other.edges.len()
        {
            return false;
        }
        let mut left_labels: BTreeMap<Symbol, usize> = BTreeMap::new();
        for e in self.edges.values() {
            *left_labels.entry(e.label).or_default() += 1;
        }
        let mut right_labels: BTreeMap<Symbol, usize> = BTreeMap::new();
        for e in other.edges.values() {
            *right_labels.entry(e.label).or_default() += 1;
        }
        if left_labels != right_labels {
            return false;
        }

        let mut map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        let mut inverse: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        let forced = self
            .front
            .iter()
            .zip(other.front.iter())
            .chain(self.rear.iter().zip(other.rear.iter()));
        for (l, r) in forced {
            match (map.get(l), inverse.get(r)) {
                (Some(r2), _) if r2 != r => return false,
                (_, Some(l2)) if l2 != l => return false,
                _ => {
                    map.insert(*l, *r);
                    inverse.insert(*r, *l);
                }
            }
        }

        let left_sig = incidence_signatures(self);
        let right_sig = incidence_signatures(other);
        for (l, r) in &map {
            if left_sig[l] != right_sig[r] {
                return false;
            }
        }
        let unbound: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| !map.contains_key(n))
            .copied()
            .collect();
        iso_backtrack(self, other, &left_sig, &right_sig, &unbound, 0, &mut map, &mut inverse)
    }

    /// Rebuild this graph over `to`, translating each edge label by name.
    pub fn relabeled(&self, from: &Alphabet, to: &Alphabet) -> Result<Graph, GraphError> {
        let mut edges = BTreeMap::new();
        for (id, e) in &self.edges {
            let name = from.name(e.label);
            let sym = to
                .get(name)
                .ok_or_else(|| GraphError::UnknownSymbol { name: name.to_owned() })?;
            if to.rank(sym) != from.rank(e.label) {
                return Err(GraphError::RankMismatch {
                    label: name.to_owned(),
                    rank: to.rank(sym),
                    got: from.rank(e.label),
                });
            }
            edges.insert(*id, Edge { label: sym, attachment: e.attachment.clone() });
        }
        Ok(Graph {
            nodes: self.nodes.clone(),
            edges,
            front: self.front.clone(),
            rear: self.rear.clone(),
        })
    }

    /// Renumber nodes to 0..n (in ascending id order) and edges to 0..m.
    pub fn renumbered(&self) -> Graph {
        let node_map: BTreeMap<NodeId, NodeId> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, NodeId(i as u32)))
            .collect();
        Graph {
            nodes: node_map.values().copied().collect(),
            edges: self
                .edges
                .values()
                .enumerate()
                .map(|(i, e)| {
                    (
                        EdgeId(i as u32),
                        Edge {
                            label: e.label,
                            attachment: e.attachment.iter().map(|n| node_map[n]).collect(),
                        },
                    )
                })
                .collect(),
            front: self.front.iter().map(|n| node_map[n]).collect(),
            rear: self.rear.iter().map(|n| node_map[n]).collect(),
        }
    }

    /// Render with label names resolved against an alphabet.
    pub fn display_with<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        GraphDisplay { graph: self, alphabet }
    }
}

struct GraphDisplay<'a> {
    graph: &'a Graph,
    alphabet: &'a Alphabet,
}

impl fmt::Display for GraphDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.graph;
        write!(f, "nodes")?;
        for n in &g.nodes {
            write!(f, " {}", n.0)?;
        }
        write!(f, "; edges")?;
        for (i, e) in g.edges.values().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {}(", self.alphabet.name(e.label))?;
            for (j, n) in e.attachment.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", n.0)?;
            }
            write!(f, ")")?;
        }
        write!(f, "; front")?;
        write_seq(f, &g.front)?;
        write!(f, "; rear")?;
        write_seq(f, &g.rear)
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, seq: &[NodeId]) -> fmt::Result {
    for n in seq {
        write!(f, " {}", n.0)?;
    }
    Ok(())
}

/// Incidence signature of every node: sorted (label, position) multiset plus
/// interface membership flags.
fn incidence_signatures(g: &Graph) -> BTreeMap<NodeId, Vec<(Symbol, usize)>> {
    let mut sig: BTreeMap<NodeId, Vec<(Symbol, usize)>> =
        g.nodes.iter().map(|n| (*n, Vec::new())).collect();
    for e in g.edges.values() {
        for (pos, n) in e.attachment.iter().enumerate() {
            sig.get_mut(n).expect("attachment in nodes").push((e.label, pos));
        }
    }
    for v in sig.values_mut() {
        v.sort_unstable();
    }
    sig
}

#[allow(clippy::too_many_arguments)]
fn iso_backtrack(
    left: &Graph,
    right: &Graph,
    left_sig: &BTreeMap<NodeId, Vec<(Symbol, usize)>>,
    right_sig: &BTreeMap<NodeId, Vec<(Symbol, usize)>>,
    unbound: &[NodeId],
    depth: usize,
    map: &mut BTreeMap<NodeId, NodeId>,
    inverse: &mut BTreeMap<NodeId, NodeId>,
) -> bool {
    if depth == unbound.len() {
        return edges_correspond(left, right, map);
    }
    let l = unbound[depth];
    let candidates: Vec<NodeId> = right
        .nodes
        .iter()
        .filter(|r| !inverse.contains_key(r) && right_sig[r] == left_sig[&l])
        .copied()
        .collect();
    for r in candidates {
        map.insert(l, r);
        inverse.insert(r, l);
        if iso_backtrack(left, right, left_sig, right_sig, unbound, depth + 1, map, inverse) {
            return true;
        }
        map.remove(&l);
        inverse.remove(&r);
    }
    false
}

fn edges_correspond(left: &Graph, right: &Graph, map: &BTreeMap<NodeId, NodeId>) -> bool {
    let mut wanted: BTreeMap<(Symbol, Vec<NodeId>), isize> = BTreeMap::new();
    for e in left.edges.values() {
        let image: Vec<NodeId> = e.attachment.iter().map(|n| map[n]).collect();
        *wanted.entry((e.label, image)).or_default() += 1;
    }
    for e in right.edges.values() {
        *wanted.entry((e.label, e.attachment.clone())).or_default() -= 1;
    }
    wanted.values().all(|c| *c == 0)
}

fn enumerate_rears(
    candidates: &[NodeId],
    required: &BTreeSet<NodeId>,
    len: usize,
    current: &mut Vec<NodeId>,
    out: &mut Vec<Vec<NodeId>>,
) {
    let missing = required.iter().filter(|n| !current.contains(n)).count();
    let remaining = len - current.len();
    if missing > remaining {
        return;
    }
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for n in candidates {
        if !current.contains(n) {
            current.push(*n);
            enumerate_rears(candidates, required, len, current, out);
            current.pop();
        }
    }
}

struct EmbedSearch<'a> {
    host: &'a Graph,
    pattern: &'a Graph,
    host_rear: BTreeSet<NodeId>,
    node_map: BTreeMap<NodeId, NodeId>,
    used_nodes: BTreeSet<NodeId>,
    edge_map: BTreeMap<EdgeId, EdgeId>,
    used_edges: BTreeSet<EdgeId>,
    out: &'a mut BTreeSet<FrontalHandle>,
}

impl EmbedSearch<'_> {
    fn match_edges(&mut self, remaining: Vec<EdgeId>) {
        if remaining.is_empty() {
            let unbound: Vec<NodeId> = self
                .pattern
                .nodes
                .iter()
                .filter(|n| !self.node_map.contains_key(n))
                .copied()
                .collect();
            self.match_isolated(&unbound, 0);
            return;
        }
        // Pick the pattern edge with the most already-bound attachments.
        let (pick, _) = remaining
            .iter()
            .enumerate()
            .max_by_key(|(_, id)| {
                self.pattern.edges[id]
                    .attachment
                    .iter()
                    .filter(|n| self.node_map.contains_key(n))
                    .count()
            })
            .expect("nonempty");
        let mut rest = remaining;
        let pe_id = rest.swap_remove(pick);
        let pe = &self.pattern.edges[&pe_id];
        let host_edges: Vec<EdgeId> = self.host.edges.keys().copied().collect();
        for he_id in host_edges {
            if self.used_edges.contains(&he_id) {
                continue;
            }
            let he = &self.host.edges[&he_id];
            if he.label != pe.label || he.attachment.len() != pe.attachment.len() {
                continue;
            }
            let mut added: Vec<NodeId> = Vec::new();
            let mut ok = true;
            for (p, h) in pe.attachment.iter().zip(he.attachment.iter()) {
                match self.node_map.get(p) {
                    Some(bound) => {
                        if bound != h {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        if self.used_nodes.contains(h) {
                            ok = false;
                            break;
                        }
                        self.node_map.insert(*p, *h);
                        self.used_nodes.insert(*h);
                        added.push(*p);
                    }
                }
            }
            if ok {
                self.edge_map.insert(pe_id, he_id);
                self.used_edges.insert(he_id);
                self.match_edges(rest.clone());
                self.edge_map.remove(&pe_id);
                self.used_edges.remove(&he_id);
            }
            for p in added {
                let h = self.node_map.remove(&p).expect("was added");
                self.used_nodes.remove(&h);
            }
        }
    }

    fn match_isolated(&mut self, unbound: &[NodeId], depth: usize) {
        if depth == unbound.len() {
            self.emit();
            return;
        }
        let p = unbound[depth];
        let hosts: Vec<NodeId> = self
            .host
            .nodes
            .iter()
            .filter(|h| !self.used_nodes.contains(h))
            .copied()
            .collect();
        for h in hosts {
            self.node_map.insert(p, h);
            self.used_nodes.insert(h);
            self.match_isolated(unbound, depth + 1);
            self.node_map.remove(&p);
            self.used_nodes.remove(&h);
        }
    }

    fn emit(&mut self) {
        let rear: Vec<NodeId> = self.pattern.rear.iter().map(|n| self.node_map[n]).collect();
        let rear_set: BTreeSet<NodeId> = rear.iter().copied().collect();
        // Rear coverage: an image node lying in the host rear must be covered
        // by the image rear.
        for h in self.node_map.values() {
            if self.host_rear.contains(h) && !rear_set.contains(h) {
                return;
            }
        }
        let handle = FrontalHandle {
            nodes: self.node_map.values().copied().collect(),
            edges: self.edge_map.values().copied().collect(),
            rear,
        };
        debug_assert!(handle.validate(self.host).is_ok());
        self.out.insert(handle);
    }
}

/// Designates a frontal subgraph of a host graph by its node set, edge set,
/// and rear sequence. A handle is only meaningful for the host it was
/// validated against; cutting preserves node ids, so handles transfer to
/// remainders of the same host.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrontalHandle {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<EdgeId>,
    rear: Vec<NodeId>,
}

impl FrontalHandle {
    pub fn new(
        host: &Graph,
        nodes: BTreeSet<NodeId>,
        edges: BTreeSet<EdgeId>,
        rear: Vec<NodeId>,
    ) -> Result<FrontalHandle, GraphError> {
        let handle = FrontalHandle { nodes, edges, rear };
        handle.validate(host)?;
        Ok(handle)
    }

    /// The identity handle: just the host's front, no edges, rear = front.
    /// Cutting it off returns the host unchanged.
    pub fn identity(host: &Graph) -> FrontalHandle {
        FrontalHandle {
            nodes: host.front.iter().copied().collect(),
            edges: BTreeSet::new(),
            rear: host.front.clone(),
        }
    }

    /// Combine a handle on a host with a handle on the corresponding
    /// remainder into one handle on the host, mirroring concatenation of the
    /// extracted subgraphs: node and edge sets unite, the rear is the inner
    /// handle's rear.
    pub fn compose(&self, inner: &FrontalHandle) -> FrontalHandle {
        FrontalHandle {
            nodes: self.nodes.union(&inner.nodes).copied().collect(),
            edges: self.edges.union(&inner.edges).copied().collect(),
            rear: inner.rear.clone(),
        }
    }

    pub fn validate(&self, host: &Graph) -> Result<(), GraphError> {
        for n in &host.front {
            if !self.nodes.contains(n) {
                return Err(GraphError::HandleFrontNotContained(*n));
            }
        }
        for n in &self.nodes {
            if !host.nodes.contains(n) {
                return Err(GraphError::HandleNodeOutsideHost(*n));
            }
        }
        for id in &self.edges {
            let e = host
                .edges
                .get(id)
                .ok_or(GraphError::HandleEdgeOutsideHost(*id))?;
            for n in &e.attachment {
                if !self.nodes.contains(n) {
                    return Err(GraphError::HandleEdgeDangling { edge: *id, node: *n });
                }
            }
        }
        let mut seen = BTreeSet::new();
        for n in &self.rear {
            if !self.nodes.contains(n) {
                return Err(GraphError::HandleRearOutside(*n));
            }
            if !seen.insert(*n) {
                return Err(GraphError::HandleRearRepetition);
            }
        }
        let host_rear: BTreeSet<NodeId> = host.rear.iter().copied().collect();
        for n in &self.nodes {
            if host_rear.contains(n) && !seen.contains(n) {
                return Err(GraphError::HandleRearCoverage(*n));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<EdgeId> {
        &self.edges
    }

    pub fn rear(&self) -> &[NodeId] {
        &self.rear
    }

    /// Interior nodes: those removed when the handle is cut off.
    pub fn interior(&self) -> BTreeSet<NodeId> {
        let keep: BTreeSet<NodeId> = self.rear.iter().copied().collect();
        self.nodes.difference(&keep).copied().collect()
    }
}

/// Builder for graphs over a fixed alphabet; node and edge ids are assigned
/// sequentially in declaration order.
pub struct GraphBuilder<'a> {
    alphabet: &'a Alphabet,
    next_node: u32,
    nodes: BTreeSet<NodeId>,
    edges: Vec<(Symbol, Vec<NodeId>)>,
    front: Vec<NodeId>,
    rear: Vec<NodeId>,
    error: Option<GraphError>,
}

impl GraphBuilder<'_> {
    pub fn node(&mut self) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        self.nodes.insert(id);
        id
    }

    pub fn nodes(&mut self, count: usize) -> Vec<NodeId> {
        (0..count).map(|_| self.node()).collect()
    }

    pub fn edge(&mut self, label: &str, attachment: &[NodeId]) -> &mut Self {
        if self.error.is_some() {
            return self;
        }
        match self.alphabet.get(label) {
            Some(sym) => self.edges.push((sym, attachment.to_vec())),
            None => {
                self.error = Some(GraphError::UnknownSymbol { name: label.to_owned() })
            }
        }
        self
    }

    pub fn front(&mut self, seq: &[NodeId]) -> &mut Self {
        self.front = seq.to_vec();
        self
    }

    pub fn rear(&mut self, seq: &[NodeId]) -> &mut Self {
        self.rear = seq.to_vec();
        self
    }

    pub fn finish(&mut self) -> Result<Graph, GraphError> {
        if let Some(err) = self.error.take() {
            return Err(err);
        }
        Graph::from_parts(
            self.alphabet,
            std::mem::take(&mut self.nodes),
            self.edges
                .drain(..)
                .enumerate()
                .map(|(i, (sym, att))| (EdgeId(i as u32), sym, att)),
            std::mem::take(&mut self.front),
            std::mem::take(&mut self.rear),
        )
    }
}
