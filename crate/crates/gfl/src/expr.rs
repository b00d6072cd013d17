//! Graph expressions and their languages.
//!
//! An expression denotes a set of graphs of one type: the empty language, a
//! single graph, a union, a typed concatenation, or a star. Matching an
//! expression against a host graph enumerates the frontal handles whose
//! extracted subgraph lies in the language (membership is always judged up to
//! isomorphism).
//!
//! Star languages may contain permutation graphs, whose cut-off does not
//! shrink the host; [`GraphExpression::non_permuting`] rewrites an expression
//! so that no starred subexpression's language contains a permutation graph,
//! without changing the language. Both the brute-force membership oracle and
//! the compositional matcher rewrite such stars first, which makes every star
//! round strictly shrink the remaining graph.
//!
//! ```
//! use gfl::samples;
//!
//! // a loop, or an opening edge, any number of extensions, and a closing
//! // edge: the cycles
//! let cycle = samples::cycle_expression();
//! assert_eq!(cycle.expr_type()?, (0, 0));
//!
//! assert!(cycle.member(&samples::cycle_graph(3))?);
//! assert!(!cycle.member(&samples::path_graph(2))?);
//!
//! // on the triangle, the only matching frontal subgraph is the whole graph
//! let matches = cycle.match_expression(&samples::cycle_graph(3))?;
//! assert_eq!(matches.len(), 1);
//! assert_eq!(matches.first().unwrap().nodes().len(), 3);
//! # Ok::<(), gfl::expr::ExprError>(())
//! ```

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::graph::{CanonicalKey, FrontalHandle, Graph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphExpression {
    /// The empty language of a declared type.
    Empty { front: usize, rear: usize },
    /// The singleton language of one graph.
    Atom(Graph),
    Union(Box<GraphExpression>, Box<GraphExpression>),
    Concat(Box<GraphExpression>, Box<GraphExpression>),
    Star(Box<GraphExpression>),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("union operands have types ({},{}) and ({},{}) in `{at}`", left.0, left.1, right.0, right.1)]
    UnionTypeMismatch { left: (usize, usize), right: (usize, usize), at: String },
    #[error("concatenation joins a rear of length {left} to a front of length {right} in `{at}`")]
    ConcatTypeMismatch { left: usize, right: usize, at: String },
    #[error("star operand has non-square type ({},{}) in `{at}`", ty.0, ty.1)]
    StarNotSquare { ty: (usize, usize), at: String },
    #[error("expression of type ({},{}) does not apply to a graph of type ({},{})", expr.0, expr.1, graph.0, graph.1)]
    GraphTypeMismatch { expr: (usize, usize), graph: (usize, usize) },
    #[error("expression of type ({},{}) cannot match a host with front length {front}", expr.0, expr.1)]
    HostFrontMismatch { expr: (usize, usize), front: usize },
}

impl GraphExpression {
    pub fn empty(front: usize, rear: usize) -> Self {
        GraphExpression::Empty { front, rear }
    }

    pub fn atom(graph: Graph) -> Self {
        GraphExpression::Atom(graph)
    }

    pub fn union(left: GraphExpression, right: GraphExpression) -> Self {
        GraphExpression::Union(Box::new(left), Box::new(right))
    }

    pub fn concat(left: GraphExpression, right: GraphExpression) -> Self {
        GraphExpression::Concat(Box::new(left), Box::new(right))
    }

    pub fn star(operand: GraphExpression) -> Self {
        GraphExpression::Star(Box::new(operand))
    }

    /// The type of the denoted language, or the first typing violation.
    pub fn expr_type(&self) -> Result<(usize, usize), ExprError> {
        match self {
            GraphExpression::Empty { front, rear } => Ok((*front, *rear)),
            GraphExpression::Atom(g) => Ok(g.graph_type()),
            GraphExpression::Union(a, b) => {
                let (ta, tb) = (a.expr_type()?, b.expr_type()?);
                if ta != tb {
                    return Err(ExprError::UnionTypeMismatch {
                        left: ta,
                        right: tb,
                        at: self.to_string(),
                    });
                }
                Ok(ta)
            }
            GraphExpression::Concat(a, b) => {
                let (ta, tb) = (a.expr_type()?, b.expr_type()?);
                if ta.1 != tb.0 {
                    return Err(ExprError::ConcatTypeMismatch {
                        left: ta.1,
                        right: tb.0,
                        at: self.to_string(),
                    });
                }
                Ok((ta.0, tb.1))
            }
            GraphExpression::Star(e) => {
                let ty = e.expr_type()?;
                if ty.0 != ty.1 {
                    return Err(ExprError::StarNotSquare { ty, at: self.to_string() });
                }
                Ok(ty)
            }
        }
    }

    /// All subexpressions in preorder, including `self`.
    pub fn subexpressions(&self) -> Vec<&GraphExpression> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            out.push(e);
            match e {
                GraphExpression::Union(a, b) | GraphExpression::Concat(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                GraphExpression::Star(a) => stack.push(a),
                _ => {}
            }
        }
        out
    }

    /// Patterns of the permutation graphs in the language, where pattern `p`
    /// stands for the graph with `rear[j] = front[p[j]]`.
    fn permutation_patterns(&self) -> Result<BTreeSet<Vec<usize>>, ExprError> {
        Ok(match self {
            GraphExpression::Empty { .. } => BTreeSet::new(),
            GraphExpression::Atom(g) => g.permutation_pattern().into_iter().collect(),
            GraphExpression::Union(a, b) => {
                let mut pa = a.permutation_patterns()?;
                pa.extend(b.permutation_patterns()?);
                pa
            }
            GraphExpression::Concat(a, b) => {
                let pa = a.permutation_patterns()?;
                let pb = b.permutation_patterns()?;
                let mut out = BTreeSet::new();
                for p in &pa {
                    for q in &pb {
                        out.insert(compose_patterns(p, q));
                    }
                }
                out
            }
            GraphExpression::Star(e) => {
                let n = self.expr_type()?.0;
                monoid_closure(e.permutation_patterns()?, n)
            }
        })
    }

    /// The finitely many permutation graphs of the language, one
    /// representative per isomorphism class.
    pub fn permutation_set(&self) -> Result<Vec<Graph>, ExprError> {
        self.expr_type()?;
        Ok(self
            .permutation_patterns()?
            .iter()
            .map(|p| Graph::permutation(p))
            .collect())
    }

    /// True iff no starred subexpression's language contains a permutation
    /// graph.
    pub fn is_non_permuting(&self) -> Result<bool, ExprError> {
        self.expr_type()?;
        for sub in self.subexpressions() {
            if let GraphExpression::Star(e) = sub {
                if !e.permutation_patterns()?.is_empty() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// A language-equivalent expression with no permuting star: the
    /// permutation graphs of the language are split off as explicit atoms,
    /// and every star is rewritten over a permutation-free core.
    ///
    /// ```
    /// use gfl::{Graph, GraphExpression};
    ///
    /// // Id₁ is a permutation graph, so this star would not shrink
    /// let ex = GraphExpression::star(GraphExpression::atom(Graph::identity(1)));
    /// assert!(!ex.is_non_permuting()?);
    ///
    /// let rewritten = ex.non_permuting()?;
    /// assert!(rewritten.is_non_permuting()?);
    /// // the language is unchanged: it contains exactly Id₁
    /// assert!(rewritten.member(&Graph::identity(1))?);
    /// # Ok::<(), gfl::expr::ExprError>(())
    /// ```
    pub fn non_permuting(&self) -> Result<GraphExpression, ExprError> {
        let ty = self.expr_type()?;
        let (core, perms) = self.stripped()?;
        Ok(rebuild(core, &perms, ty))
    }

    /// Returns a non-permuting expression for the language minus its
    /// permutation graphs, together with the permutation patterns it lost.
    fn stripped(&self) -> Result<(GraphExpression, BTreeSet<Vec<usize>>), ExprError> {
        let ty = self.expr_type()?;
        Ok(match self {
            GraphExpression::Empty { .. } => (self.clone(), BTreeSet::new()),
            GraphExpression::Atom(g) => match g.permutation_pattern() {
                Some(p) => (
                    GraphExpression::empty(ty.0, ty.1),
                    std::iter::once(p).collect(),
                ),
                None => (self.clone(), BTreeSet::new()),
            },
            GraphExpression::Union(a, b) => {
                let (a0, pa) = a.stripped()?;
                let (b0, mut pb) = b.stripped()?;
                pb.extend(pa);
                (union_of(a0, b0), pb)
            }
            GraphExpression::Concat(a, b) => {
                let (a0, pa) = a.stripped()?;
                let (b0, pb) = b.stripped()?;
                let full_a = rebuild(a0.clone(), &pa, a.expr_type()?);
                let full_b = rebuild(b0.clone(), &pb, b.expr_type()?);
                // members with a non-permutation factor on either side
                let core = union_of(concat_of(a0, full_b)?, concat_of(full_a, b0)?);
                let mut perms = BTreeSet::new();
                for p in &pa {
                    for q in &pb {
                        perms.insert(compose_patterns(p, q));
                    }
                }
                (core, perms)
            }
            GraphExpression::Star(e) => {
                let (e0, pe) = e.stripped()?;
                let n = ty.0;
                let closure = monoid_closure(pe, n);
                let pi = perm_union(&closure);
                // Π e0 (Π e0)* Π : every member with at least one
                // non-permutation factor, permutation runs absorbed into Π.
                let seed = concat_of(pi.clone(), e0)?;
                let core = concat_of(concat_of(seed.clone(), star_of(seed, n))?, pi)?;
                (core, closure)
            }
        })
    }

    /// Brute-force membership oracle: decides whether `g` is isomorphic to a
    /// member of the language by enumerating all decompositions of `g`.
    pub fn member(&self, g: &Graph) -> Result<bool, ExprError> {
        let ty = self.expr_type()?;
        if g.graph_type() != ty {
            return Err(ExprError::GraphTypeMismatch { expr: ty, graph: g.graph_type() });
        }
        let prepared = self.prepared_for_matching()?;
        let mut ctx = MemberCtx::default();
        Ok(ctx.run(&prepared, g))
    }

    /// All frontal handles on `host` whose extracted subgraph lies in the
    /// language. Computed compositionally; star matching runs a least
    /// fixpoint seeded with the identity handle.
    pub fn match_expression(&self, host: &Graph) -> Result<BTreeSet<FrontalHandle>, ExprError> {
        let ty = self.expr_type()?;
        if host.front().len() != ty.0 {
            return Err(ExprError::HostFrontMismatch { expr: ty, front: host.front().len() });
        }
        let prepared = self.prepared_for_matching()?;
        let mut ctx = MatchCtx::default();
        let result = ctx.run(&prepared, host);
        Ok(result.as_ref().clone())
    }

    fn prepared_for_matching(&self) -> Result<Cow<'_, GraphExpression>, ExprError> {
        if self.is_non_permuting()? {
            Ok(Cow::Borrowed(self))
        } else {
            Ok(Cow::Owned(self.non_permuting()?))
        }
    }
}

fn expr_ptr(e: &GraphExpression) -> usize {
    e as *const GraphExpression as usize
}

/// Pattern of the concatenation of two permutation graphs.
fn compose_patterns(left: &[usize], right: &[usize]) -> Vec<usize> {
    right.iter().map(|&j| left[j]).collect()
}

fn identity_pattern(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Close a set of permutation patterns under composition; always contains the
/// identity. At most n! elements.
fn monoid_closure(base: BTreeSet<Vec<usize>>, n: usize) -> BTreeSet<Vec<usize>> {
    let mut set = base;
    set.insert(identity_pattern(n));
    loop {
        let mut grew = false;
        let snapshot: Vec<Vec<usize>> = set.iter().cloned().collect();
        for p in &snapshot {
            for q in &snapshot {
                if set.insert(compose_patterns(p, q)) {
                    grew = true;
                }
            }
        }
        if !grew {
            return set;
        }
    }
}

fn union_of(a: GraphExpression, b: GraphExpression) -> GraphExpression {
    match (&a, &b) {
        (GraphExpression::Empty { .. }, _) => b,
        (_, GraphExpression::Empty { .. }) => a,
        _ => GraphExpression::union(a, b),
    }
}

fn concat_of(a: GraphExpression, b: GraphExpression) -> Result<GraphExpression, ExprError> {
    let (ta, tb) = (a.expr_type()?, b.expr_type()?);
    if matches!(a, GraphExpression::Empty { .. }) || matches!(b, GraphExpression::Empty { .. }) {
        return Ok(GraphExpression::empty(ta.0, tb.1));
    }
    Ok(GraphExpression::concat(a, b))
}

fn star_of(e: GraphExpression, n: usize) -> GraphExpression {
    if matches!(e, GraphExpression::Empty { .. }) {
        GraphExpression::atom(Graph::identity(n))
    } else {
        GraphExpression::star(e)
    }
}

fn perm_union(patterns: &BTreeSet<Vec<usize>>) -> GraphExpression {
    let mut expr: Option<GraphExpression> = None;
    for p in patterns {
        let atom = GraphExpression::atom(Graph::permutation(p));
        expr = Some(match expr {
            None => atom,
            Some(prev) => GraphExpression::union(prev, atom),
        });
    }
    expr.expect("closure always contains the identity")
}

fn rebuild(
    core: GraphExpression,
    perms: &BTreeSet<Vec<usize>>,
    ty: (usize, usize),
) -> GraphExpression {
    let mut expr = core;
    for p in perms {
        expr = union_of(expr, GraphExpression::atom(Graph::permutation(p)));
    }
    if let GraphExpression::Empty { .. } = expr {
        GraphExpression::empty(ty.0, ty.1)
    } else {
        expr
    }
}

/// All (extract, remainder) pairs of a graph at one middle interface width.
type Decompositions = Rc<Vec<(Graph, Graph)>>;

#[derive(Default)]
struct MemberCtx {
    memo: HashMap<(usize, CanonicalKey), bool>,
    decomps: HashMap<(CanonicalKey, usize), Decompositions>,
}

impl MemberCtx {
    fn run(&mut self, ex: &GraphExpression, g: &Graph) -> bool {
        let key = (expr_ptr(ex), g.canonical_key());
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let result = match ex {
            GraphExpression::Empty { .. } => false,
            GraphExpression::Atom(h) => g.is_isomorphic(h),
            GraphExpression::Union(a, b) => self.run(a, g) || self.run(b, g),
            GraphExpression::Concat(a, b) => {
                let mid = a.expr_type().expect("typed").1;
                let decomps = self.decompositions(g, mid);
                decomps
                    .iter()
                    .any(|(left, right)| self.run(a, left) && self.run(b, right))
            }
            GraphExpression::Star(e) => {
                if g.is_identity() {
                    true
                } else {
                    // operand language is permutation-free after preparation,
                    // so a genuine first factor strictly shrinks the rest
                    let mid = g.front().len();
                    let decomps = self.decompositions(g, mid);
                    decomps.iter().any(|(left, right)| {
                        !left.is_permutation() && self.run(e, left) && self.run(ex, right)
                    })
                }
            }
        };
        self.memo.insert(key, result);
        result
    }

    /// All ways of writing `g` as a concatenation with a middle interface of
    /// width `mid`: frontal handles whose cut loses nothing but the handle
    /// itself (no dangling edges).
    fn decompositions(&mut self, g: &Graph, mid: usize) -> Decompositions {
        let key = (g.canonical_key(), mid);
        if let Some(d) = self.decomps.get(&key) {
            return Rc::clone(d);
        }
        let mut list = Vec::new();
        for handle in g.frontal_subgraphs(mid) {
            let interior = handle.interior();
            let clean = g.edges().all(|(id, e)| {
                handle.edges().contains(&id)
                    || e.attachment.iter().all(|n| !interior.contains(n))
            });
            if clean {
                list.push((g.extract(&handle), g.cut_off(&handle)));
            }
        }
        let rc = Rc::new(list);
        self.decomps.insert(key, Rc::clone(&rc));
        rc
    }
}

#[derive(Default)]
struct MatchCtx {
    memo: HashMap<(usize, CanonicalKey), Rc<BTreeSet<FrontalHandle>>>,
}

impl MatchCtx {
    fn run(&mut self, ex: &GraphExpression, host: &Graph) -> Rc<BTreeSet<FrontalHandle>> {
        let key = (expr_ptr(ex), host.canonical_key());
        if let Some(cached) = self.memo.get(&key) {
            return Rc::clone(cached);
        }
        let result = match ex {
            GraphExpression::Empty { .. } => BTreeSet::new(),
            GraphExpression::Atom(g) => host.embeddings(g),
            GraphExpression::Union(a, b) => {
                let mut set = self.run(a, host).as_ref().clone();
                set.extend(self.run(b, host).iter().cloned());
                set
            }
            GraphExpression::Concat(a, b) => {
                let mut set = BTreeSet::new();
                let left = self.run(a, host);
                for p1 in left.iter() {
                    let remainder = host.cut_off(p1);
                    for p2 in self.run(b, &remainder).iter() {
                        set.insert(p1.compose(p2));
                    }
                }
                set
            }
            GraphExpression::Star(e) => {
                // least fixpoint seeded with the identity handle; the operand
                // language is permutation-free, so every extension strictly
                // shrinks the remainder and the rounds terminate
                let mut set = BTreeSet::new();
                let identity = FrontalHandle::identity(host);
                set.insert(identity.clone());
                let mut frontier = vec![identity];
                while let Some(p) = frontier.pop() {
                    let remainder = host.cut_off(&p);
                    for p2 in self.run(e, &remainder).iter() {
                        let composed = p.compose(p2);
                        if set.insert(composed.clone()) {
                            frontier.push(composed);
                        }
                    }
                }
                set
            }
        };
        let rc = Rc::new(result);
        self.memo.insert(key, Rc::clone(&rc));
        rc
    }
}

impl fmt::Display for GraphExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphExpression::Empty { front, rear } => write!(f, "empty({front},{rear})"),
            GraphExpression::Atom(g) => {
                let (m, n) = g.graph_type();
                write!(f, "<graph ({m},{n}): {}n {}e>", g.node_count(), g.edge_count())
            }
            GraphExpression::Union(a, b) => write!(f, "({a} + {b})"),
            GraphExpression::Concat(a, b) => write!(f, "({a} . {b})"),
            GraphExpression::Star(e) => write!(f, "{e}*"),
        }
    }
}
