//! Recursive systems of graph formulas with variables.
//!
//! A system maps every ranked variable to a formula built from constants,
//! variables, quantifiers over graph expressions, negation, conjunction, and
//! disjunction. Systems may be cyclic; their semantics is the least fixed
//! point of truth evolution on the *formula configuration graph* (FCG), whose
//! nodes are triples of a subformula occurrence, a remaining graph, and a
//! sign that flips under negation. A configuration is universal when its sign
//! is positive and its formula conjunctive (`true`, `∧`, `∀`), or negative
//! and disjunctive; existential otherwise.
//!
//! For acyclic systems the FCG is acyclic and the fixed point total, and the
//! semantics coincides with the straightforward inductive satisfaction
//! relation implemented by [`FormulaSystem::satisfies`].
//!
//! [`FormulaSystem::shallow_normal_form`] rewrites any system, preserving the
//! languages of all original variables, so that every definition is one of
//! `true`, `false`, `x ∨ y`, `x ∧ y`, `∃(G, x)`, `∀(G, x)` with `G` a single
//! graph. Negations are first pushed down into fresh twin variables; compound
//! expressions are then decomposed, rewriting permuting stars on the way.
//!
//! ```
//! use gfl::{samples, Verdict};
//!
//! // u: cut a loop and require v, or cut an edge and require w
//! // w: keep cutting edges, or close the cycle and require v
//! // v: no node is left           — together: a Hamiltonian cycle
//! let sys = samples::ham_system();
//! let u = sys.var_named("u").unwrap();
//! assert!(!sys.is_acyclic()); // w refers to itself
//!
//! assert_eq!(sys.classify_at(u, &samples::cycle_graph(4))?, Verdict::Accepted);
//! assert_eq!(sys.classify_at(u, &samples::star_graph(2))?, Verdict::Rejected);
//!
//! // the normal form preserves every original variable's verdicts
//! let normal = sys.shallow_normal_form()?;
//! assert!(normal.var_ids().all(|x| normal.definition(x).is_shallow()));
//! let nu = normal.var_named("u").unwrap();
//! assert_eq!(normal.classify_at(nu, &samples::cycle_graph(4))?, Verdict::Accepted);
//! # Ok::<(), gfl::formula::FormulaError>(())
//! ```

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::alphabet::Alphabet;
use crate::eval::{EvalError, EvalNodeId, EvaluationGraph, NodeClass, Verdict};
use crate::expr::{ExprError, GraphExpression};
use crate::graph::{CanonicalKey, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Var(VarId),
    Exists(GraphExpression, Box<Formula>),
    Forall(GraphExpression, Box<Formula>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn exists(ex: GraphExpression, body: Formula) -> Formula {
        Formula::Exists(ex, Box::new(body))
    }

    pub fn forall(ex: GraphExpression, body: Formula) -> Formula {
        Formula::Forall(ex, Box::new(body))
    }

    // constructor, always called as `Formula::not(..)`
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Conjunctive formulas are `true`, conjunctions, and universal
    /// quantifications; everything else is disjunctive.
    pub fn is_conjunctive(&self) -> bool {
        matches!(self, Formula::True | Formula::And(..) | Formula::Forall(..))
    }

    /// All subformulas in preorder, including `self`.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            out.push(f);
            match f {
                Formula::Not(a) => stack.push(a),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                Formula::Exists(_, b) | Formula::Forall(_, b) => stack.push(b),
                _ => {}
            }
        }
        out
    }

    /// Whether this definition already has one of the six shallow shapes:
    /// `true`, `false`, `x ∨ y`, `x ∧ y`, `∃(G, x)`, `∀(G, x)`.
    pub fn is_shallow(&self) -> bool {
        match self {
            Formula::True | Formula::False => true,
            Formula::And(a, b) | Formula::Or(a, b) => {
                matches!(**a, Formula::Var(_)) && matches!(**b, Formula::Var(_))
            }
            Formula::Exists(ex, body) | Formula::Forall(ex, body) => {
                matches!(ex, GraphExpression::Atom(_)) && matches!(**body, Formula::Var(_))
            }
            _ => false,
        }
    }
}

/// Positive or negated evaluation context of a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// Index into the occurrence table of a system: one id per subformula
/// occurrence of every definition, plus one entry occurrence per variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccurrenceId(pub u32);

impl OccurrenceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Payload of an FCG node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaConfiguration {
    pub occurrence: OccurrenceId,
    pub remainder: Graph,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    MissingDefinition { variable: String },
    VariableOutOfRange { variable: String, index: u32 },
    TypeMismatch { variable: String, message: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::MissingDefinition { variable } => {
                write!(f, "variable `{variable}` has no definition")
            }
            ValidationIssue::VariableOutOfRange { variable, index } => {
                write!(f, "definition of `{variable}` mentions unknown variable #{index}")
            }
            ValidationIssue::TypeMismatch { variable, message } => {
                write!(f, "definition of `{variable}`: {message}")
            }
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("invalid formula system: {}", format_issues(.0))]
    Invalid(Vec<ValidationIssue>),
    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(String),
    #[error("the system is cyclic; this operation requires an acyclic system")]
    Cyclic,
    #[error("input graph has front length {got} but variable `{variable}` has rank {rank}")]
    InputType { variable: String, rank: usize, got: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
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

/// A finite map from ranked variables to formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaSystem {
    alphabet: Alphabet,
    variables: Vec<Variable>,
    definitions: Vec<Option<Formula>>,
}

impl FormulaSystem {
    pub fn new(alphabet: Alphabet) -> Self {
        FormulaSystem { alphabet, variables: Vec::new(), definitions: Vec::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn add_variable(&mut self, name: &str, rank: usize) -> Result<VarId, FormulaError> {
        if self.variables.iter().any(|v| v.name == name) {
            return Err(FormulaError::DuplicateVariable(name.to_owned()));
        }
        let id = VarId(self.variables.len() as u32);
        self.variables.push(Variable { name: name.to_owned(), rank });
        self.definitions.push(None);
        Ok(id)
    }

    pub fn set_definition(&mut self, x: VarId, fo: Formula) {
        self.definitions[x.index()] = Some(fo);
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, x: VarId) -> &Variable {
        &self.variables[x.index()]
    }

    pub fn var_named(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    /// The definition of `x`. Panics when it was never set; `validate`
    /// reports that condition instead.
    pub fn definition(&self, x: VarId) -> &Formula {
        self.definitions[x.index()]
            .as_ref()
            .expect("definition set for every variable")
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len() as u32).map(VarId)
    }

    /// Check that every variable is defined and every definition typechecks.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        for (i, v) in self.variables.iter().enumerate() {
            match &self.definitions[i] {
                None => issues.push(ValidationIssue::MissingDefinition { variable: v.name.clone() }),
                Some(def) => {
                    if let Err(message) = self.check_formula(def, v.rank) {
                        issues.push(match message {
                            CheckError::OutOfRange(index) => ValidationIssue::VariableOutOfRange {
                                variable: v.name.clone(),
                                index,
                            },
                            CheckError::Message(message) => ValidationIssue::TypeMismatch {
                                variable: v.name.clone(),
                                message,
                            },
                        });
                    }
                }
            }
        }
        issues
    }

    fn check_formula(&self, fo: &Formula, expected: usize) -> Result<(), CheckError> {
        match fo {
            Formula::True | Formula::False => Ok(()),
            Formula::Var(x) => {
                let Some(v) = self.variables.get(x.index()) else {
                    return Err(CheckError::OutOfRange(x.0));
                };
                if v.rank != expected {
                    return Err(CheckError::Message(format!(
                        "variable `{}` has rank {} where a formula of type {} is required",
                        v.name, v.rank, expected
                    )));
                }
                Ok(())
            }
            Formula::Exists(ex, body) | Formula::Forall(ex, body) => {
                let ty = ex.expr_type().map_err(|e| CheckError::Message(e.to_string()))?;
                if ty.0 != expected {
                    return Err(CheckError::Message(format!(
                        "quantifier expression has type ({},{}) where type {} is required",
                        ty.0, ty.1, expected
                    )));
                }
                self.check_formula(body, ty.1)
            }
            Formula::Not(f) => self.check_formula(f, expected),
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.check_formula(a, expected)?;
                self.check_formula(b, expected)
            }
        }
    }

    /// Edges `u -> v` whenever `v` occurs as a variable in the definition of
    /// `u`.
    pub fn dependency_graph(&self) -> BTreeSet<(VarId, VarId)> {
        let mut edges = BTreeSet::new();
        for u in self.var_ids() {
            if let Some(def) = &self.definitions[u.index()] {
                for sub in def.subformulas() {
                    if let Formula::Var(v) = sub {
                        if v.index() < self.variables.len() {
                            edges.insert((u, *v));
                        }
                    }
                }
            }
        }
        edges
    }

    pub fn is_acyclic(&self) -> bool {
        let n = self.variables.len();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, v) in self.dependency_graph() {
            adjacency[u.index()].push(v.index());
        }
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

    /// Number every subformula occurrence of every definition (preorder, in
    /// variable order), followed by one entry occurrence per variable. FCG
    /// nodes identify their formula part by occurrence id.
    pub fn occurrences(&self) -> OccurrenceTable<'_> {
        let mut kinds: Vec<OccKind<'_>> = Vec::new();
        let mut children: Vec<Vec<OccurrenceId>> = Vec::new();
        let mut def_root = Vec::with_capacity(self.variables.len());
        for x in self.var_ids() {
            def_root.push(walk_def(self.definition(x), &mut kinds, &mut children));
        }
        let def_count = kinds.len();
        let mut entry = Vec::with_capacity(self.variables.len());
        for x in self.var_ids() {
            let id = OccurrenceId(kinds.len() as u32);
            kinds.push(OccKind::Entry(x));
            children.push(vec![def_root[x.index()]]);
            entry.push(id);
        }
        for occ in 0..def_count {
            if let OccKind::Def(Formula::Var(y)) = kinds[occ] {
                children[occ] = vec![def_root[y.index()]];
            }
        }
        OccurrenceTable { kinds, children, entry, def_root }
    }

    /// The formula configuration graph of this system at variable `x` for an
    /// input graph: the breadth-first closure of the initial configuration
    /// `(x, input, pos)` under the step relation. Node 0 is the initial
    /// configuration.
    pub fn fcg(
        &self,
        x: VarId,
        input: &Graph,
    ) -> Result<EvaluationGraph<FormulaConfiguration>, FormulaError> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(FormulaError::Invalid(issues));
        }
        let v = self.variable(x);
        if input.front().len() != v.rank {
            return Err(FormulaError::InputType {
                variable: v.name.clone(),
                rank: v.rank,
                got: input.front().len(),
            });
        }
        let table = self.occurrences();
        let mut eg: EvaluationGraph<FormulaConfiguration> = EvaluationGraph::new();
        let mut index: HashMap<(u32, CanonicalKey, Sign), EvalNodeId> = HashMap::new();
        let mut queue: VecDeque<EvalNodeId> = VecDeque::new();

        let root = FormulaConfiguration {
            occurrence: table.entry(x),
            remainder: input.clone(),
            sign: Sign::Pos,
        };
        let root_id = eg.add_node(table.class(root.occurrence, root.sign), root.clone());
        index.insert(
            (root.occurrence.0, root.remainder.canonical_key(), root.sign),
            root_id,
        );
        queue.push_back(root_id);

        while let Some(id) = queue.pop_front() {
            let config = eg.payload(id).clone();
            let mut successors: Vec<FormulaConfiguration> = Vec::new();
            match table.kind(config.occurrence) {
                OccKind::Entry(_) => successors.push(FormulaConfiguration {
                    occurrence: table.children(config.occurrence)[0],
                    remainder: config.remainder.clone(),
                    sign: config.sign,
                }),
                OccKind::Def(fo) => match fo {
                    Formula::True | Formula::False => {}
                    Formula::Var(_) => successors.push(FormulaConfiguration {
                        occurrence: table.children(config.occurrence)[0],
                        remainder: config.remainder.clone(),
                        sign: config.sign,
                    }),
                    Formula::Not(_) => successors.push(FormulaConfiguration {
                        occurrence: table.children(config.occurrence)[0],
                        remainder: config.remainder.clone(),
                        sign: config.sign.flip(),
                    }),
                    Formula::And(..) | Formula::Or(..) => {
                        for child in table.children(config.occurrence) {
                            successors.push(FormulaConfiguration {
                                occurrence: *child,
                                remainder: config.remainder.clone(),
                                sign: config.sign,
                            });
                        }
                    }
                    Formula::Exists(ex, _) | Formula::Forall(ex, _) => {
                        let body = table.children(config.occurrence)[0];
                        for handle in ex.match_expression(&config.remainder)? {
                            successors.push(FormulaConfiguration {
                                occurrence: body,
                                remainder: config.remainder.cut_off(&handle),
                                sign: config.sign,
                            });
                        }
                    }
                },
            }
            let mut seen_here: Vec<EvalNodeId> = Vec::new();
            for succ in successors {
                let key = (succ.occurrence.0, succ.remainder.canonical_key(), succ.sign);
                let succ_id = match index.get(&key) {
                    Some(found) => *found,
                    None => {
                        let class = table.class(succ.occurrence, succ.sign);
                        let new_id = eg.add_node(class, succ);
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

    /// Acceptance of an input graph at variable `x`: the verdict of the least
    /// fixed point at the initial configuration of the FCG.
    pub fn classify_at(&self, x: VarId, input: &Graph) -> Result<Verdict, FormulaError> {
        Ok(self.fcg(x, input)?.verdict_at(EvalNodeId(0))?)
    }

    /// Inductive satisfaction oracle for acyclic systems: structural
    /// recursion with quantifiers ranging over all matches of their
    /// expression and variables unfolding to their definitions.
    pub fn satisfies(&self, graph: &Graph, fo: &Formula) -> Result<bool, FormulaError> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(FormulaError::Invalid(issues));
        }
        if !self.is_acyclic() {
            return Err(FormulaError::Cyclic);
        }
        if let Err(err) = self.check_formula(fo, graph.front().len()) {
            let issue = match err {
                CheckError::OutOfRange(index) => {
                    ValidationIssue::VariableOutOfRange { variable: "<query>".into(), index }
                }
                CheckError::Message(message) => {
                    ValidationIssue::TypeMismatch { variable: "<query>".into(), message }
                }
            };
            return Err(FormulaError::Invalid(vec![issue]));
        }
        let mut memo = HashMap::new();
        self.sat(graph, fo, &mut memo)
    }

    fn sat(
        &self,
        graph: &Graph,
        fo: &Formula,
        memo: &mut HashMap<(usize, CanonicalKey), bool>,
    ) -> Result<bool, FormulaError> {
        let key = (fo as *const Formula as usize, graph.canonical_key());
        if let Some(v) = memo.get(&key) {
            return Ok(*v);
        }
        let result = match fo {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(x) => self.sat(graph, self.definition(*x), memo)?,
            Formula::Not(f) => !self.sat(graph, f, memo)?,
            Formula::And(a, b) => self.sat(graph, a, memo)? && self.sat(graph, b, memo)?,
            Formula::Or(a, b) => self.sat(graph, a, memo)? || self.sat(graph, b, memo)?,
            Formula::Exists(ex, body) => {
                let mut found = false;
                for handle in ex.match_expression(graph)? {
                    if self.sat(&graph.cut_off(&handle), body, memo)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Formula::Forall(ex, body) => {
                let mut all = true;
                for handle in ex.match_expression(graph)? {
                    if !self.sat(&graph.cut_off(&handle), body, memo)? {
                        all = false;
                        break;
                    }
                }
                all
            }
        };
        memo.insert(key, result);
        Ok(result)
    }

    /// Render a formula with variable names resolved against this system.
    pub fn render_formula(&self, fo: &Formula) -> String {
        let mut out = String::new();
        self.render_into(fo, &mut out, 0);
        out
    }

    fn render_into(&self, fo: &Formula, out: &mut String, level: u8) {
        // level: 0 = or-context, 1 = and-context, 2 = unary
        let needs_parens = match fo {
            Formula::Or(..) => level > 0,
            Formula::And(..) => level > 1,
            _ => false,
        };
        if needs_parens {
            out.push('(');
        }
        match fo {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Var(x) => match self.variables.get(x.index()) {
                Some(v) => out.push_str(&v.name),
                None => out.push_str(&format!("?{}", x.0)),
            },
            Formula::Not(f) => {
                out.push('!');
                self.render_into(f, out, 2);
            }
            Formula::And(a, b) => {
                self.render_into(a, out, 1);
                out.push_str(" & ");
                self.render_into(b, out, 2);
            }
            Formula::Or(a, b) => {
                self.render_into(a, out, 0);
                out.push_str(" | ");
                self.render_into(b, out, 1);
            }
            Formula::Exists(ex, body) => {
                out.push_str(&format!("exists {ex} -> "));
                self.render_into(body, out, 2);
            }
            Formula::Forall(ex, body) => {
                out.push_str(&format!("forall {ex} -> "));
                self.render_into(body, out, 2);
            }
        }
        if needs_parens {
            out.push(')');
        }
    }

    /// Push negations down to the leaves. Every variable `x` receives a twin
    /// defined as the negation of `x`'s definition; `!x` rewrites to the
    /// twin. Original variables keep their ids and their languages.
    ///
    /// ```
    /// use gfl::formula::{Formula, FormulaSystem};
    /// use gfl::expr::GraphExpression;
    /// use gfl::{samples, Alphabet};
    ///
    /// let mut sys = FormulaSystem::new(Alphabet::unlabeled());
    /// let v = sys.add_variable("v", 0)?;
    /// sys.set_definition(v, Formula::not(Formula::exists(
    ///     GraphExpression::atom(samples::node_graph()),
    ///     Formula::True,
    /// )));
    ///
    /// let pushed = sys.eliminate_negations()?;
    /// // !exists became forall-not: "every node cut leaves a failed remainder"
    /// assert_eq!(
    ///     pushed.definition(v),
    ///     &Formula::forall(GraphExpression::atom(samples::node_graph()), Formula::False)
    /// );
    /// # Ok::<(), gfl::formula::FormulaError>(())
    /// ```
    pub fn eliminate_negations(&self) -> Result<FormulaSystem, FormulaError> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(FormulaError::Invalid(issues));
        }
        let n = self.variables.len();
        let mut used: BTreeSet<String> =
            self.variables.iter().map(|v| v.name.clone()).collect();
        let mut variables = self.variables.clone();
        for i in 0..n {
            let name = fresh_name(&format!("{}_neg", self.variables[i].name), &mut used);
            variables.push(Variable { name, rank: self.variables[i].rank });
        }
        let twin = |x: VarId| VarId(x.0 + n as u32);
        let mut definitions = Vec::with_capacity(2 * n);
        for i in 0..n {
            definitions.push(Some(push_negations(self.definition(VarId(i as u32)), false, n, &twin)));
        }
        for i in 0..n {
            definitions.push(Some(push_negations(self.definition(VarId(i as u32)), true, n, &twin)));
        }
        Ok(FormulaSystem { alphabet: self.alphabet.clone(), variables, definitions })
    }

    /// Rewrite the system so that every definition has one of the six shallow
    /// shapes, preserving the verdicts of every original variable on every
    /// input. Fresh variables receive deterministic names; variables that
    /// became unreachable from the original ones are pruned.
    pub fn shallow_normal_form(&self) -> Result<FormulaSystem, FormulaError> {
        let sys = self.eliminate_negations()?;
        let mut variables = sys.variables.clone();
        let mut definitions: Vec<Formula> = sys
            .definitions
            .iter()
            .map(|d| d.clone().expect("validated"))
            .collect();
        let mut used: BTreeSet<String> = variables.iter().map(|v| v.name.clone()).collect();
        let mut counter = 0u32;
        let mut fresh = |rank: usize,
                         variables: &mut Vec<Variable>,
                         definitions: &mut Vec<Formula>,
                         def: Formula,
                         used: &mut BTreeSet<String>| {
            counter += 1;
            let name = fresh_name(&format!("v{counter}"), used);
            variables.push(Variable { name, rank });
            definitions.push(def);
            VarId(variables.len() as u32 - 1)
        };

        let mut i = 0;
        while i < definitions.len() {
            let def = definitions[i].clone();
            if def.is_shallow() || matches!(def, Formula::Var(_)) {
                i += 1;
                continue;
            }
            let rank = variables[i].rank;
            match def {
                Formula::And(a, b) | Formula::Or(a, b) => {
                    let conj = matches!(definitions[i], Formula::And(..));
                    let mut operand = |fo: Formula,
                                       variables: &mut Vec<Variable>,
                                       definitions: &mut Vec<Formula>,
                                       used: &mut BTreeSet<String>| {
                        match fo {
                            Formula::Var(x) => x,
                            other => fresh(rank, variables, definitions, other, used),
                        }
                    };
                    let xa = operand(*a, &mut variables, &mut definitions, &mut used);
                    let xb = operand(*b, &mut variables, &mut definitions, &mut used);
                    definitions[i] = if conj {
                        Formula::and(Formula::Var(xa), Formula::Var(xb))
                    } else {
                        Formula::or(Formula::Var(xa), Formula::Var(xb))
                    };
                }
                Formula::Exists(ex, body) | Formula::Forall(ex, body) => {
                    let exists = matches!(definitions[i], Formula::Exists(..));
                    let quantify = |ex: GraphExpression, fo: Formula| {
                        if exists {
                            Formula::exists(ex, fo)
                        } else {
                            Formula::forall(ex, fo)
                        }
                    };
                    match ex {
                        GraphExpression::Atom(g) => {
                            // body is not a variable here, else the definition
                            // would have been shallow already
                            let j = g.graph_type().1;
                            let x1 = fresh(j, &mut variables, &mut definitions, *body, &mut used);
                            definitions[i] =
                                quantify(GraphExpression::Atom(g), Formula::Var(x1));
                        }
                        GraphExpression::Empty { .. } => {
                            // no frontal subgraph ever matches the empty
                            // language: an existential quantifier is false, a
                            // universal one true
                            definitions[i] =
                                if exists { Formula::False } else { Formula::True };
                        }
                        GraphExpression::Union(e1, e2) => {
                            let x1 =
                                fresh(rank, &mut variables, &mut definitions, quantify(*e1, (*body).clone()), &mut used);
                            let x2 =
                                fresh(rank, &mut variables, &mut definitions, quantify(*e2, *body), &mut used);
                            definitions[i] = if exists {
                                Formula::or(Formula::Var(x1), Formula::Var(x2))
                            } else {
                                Formula::and(Formula::Var(x1), Formula::Var(x2))
                            };
                        }
                        GraphExpression::Concat(e1, e2) => {
                            let mid = e1.expr_type()?.1;
                            let x1 =
                                fresh(mid, &mut variables, &mut definitions, quantify(*e2, *body), &mut used);
                            definitions[i] = quantify(*e1, Formula::Var(x1));
                        }
                        GraphExpression::Star(e1) => {
                            let star = GraphExpression::Star(e1.clone());
                            if !star.is_non_permuting()? {
                                // rewrite the star so its rounds strictly
                                // shrink, then decompose the result
                                definitions[i] = quantify(star.non_permuting()?, *body);
                            } else {
                                let x1 =
                                    fresh(rank, &mut variables, &mut definitions, *body, &mut used);
                                let x2 = fresh(
                                    rank,
                                    &mut variables,
                                    &mut definitions,
                                    quantify(*e1, Formula::Var(VarId(i as u32))),
                                    &mut used,
                                );
                                definitions[i] = if exists {
                                    Formula::or(Formula::Var(x1), Formula::Var(x2))
                                } else {
                                    Formula::and(Formula::Var(x1), Formula::Var(x2))
                                };
                            }
                        }
                    }
                }
                Formula::Not(_) => unreachable!("negations were eliminated"),
                Formula::True | Formula::False | Formula::Var(_) => unreachable!("shallow or deferred"),
            }
        }

        // bare-variable definitions become x' ∧ x'
        for def in definitions.iter_mut() {
            if let Formula::Var(x) = def {
                let x = *x;
                *def = Formula::and(Formula::Var(x), Formula::Var(x));
            }
        }

        // prune everything unreachable from the original variables
        let originals = self.variables.len();
        let mut keep = vec![false; variables.len()];
        let mut queue: VecDeque<usize> = (0..originals).collect();
        for q in &queue {
            keep[*q] = true;
        }
        while let Some(i) = queue.pop_front() {
            for sub in definitions[i].subformulas() {
                if let Formula::Var(v) = sub {
                    if !keep[v.index()] {
                        keep[v.index()] = true;
                        queue.push_back(v.index());
                    }
                }
            }
        }
        let mut remap: Vec<Option<VarId>> = vec![None; variables.len()];
        let mut kept_vars = Vec::new();
        let mut kept_defs = Vec::new();
        for (i, k) in keep.iter().enumerate() {
            if *k {
                remap[i] = Some(VarId(kept_vars.len() as u32));
                kept_vars.push(variables[i].clone());
                kept_defs.push(definitions[i].clone());
            }
        }
        let kept_defs = kept_defs
            .into_iter()
            .map(|d| Some(remap_vars(d, &remap)))
            .collect();
        Ok(FormulaSystem {
            alphabet: self.alphabet.clone(),
            variables: kept_vars,
            definitions: kept_defs,
        })
    }
}

enum CheckError {
    OutOfRange(u32),
    Message(String),
}

fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut candidate = base.to_owned();
    let mut k = 1;
    while used.contains(&candidate) {
        k += 1;
        candidate = format!("{base}{k}");
    }
    used.insert(candidate.clone());
    candidate
}

fn push_negations(fo: &Formula, negate: bool, originals: usize, twin: &impl Fn(VarId) -> VarId) -> Formula {
    match fo {
        Formula::True => {
            if negate {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if negate {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Var(x) => {
            if negate {
                // twins of twins fold back to the original
                if x.index() < originals {
                    Formula::Var(twin(*x))
                } else {
                    Formula::Var(VarId(x.0 - originals as u32))
                }
            } else {
                Formula::Var(*x)
            }
        }
        Formula::Not(f) => push_negations(f, !negate, originals, twin),
        Formula::And(a, b) => {
            let (na, nb) = (
                push_negations(a, negate, originals, twin),
                push_negations(b, negate, originals, twin),
            );
            if negate {
                Formula::or(na, nb)
            } else {
                Formula::and(na, nb)
            }
        }
        Formula::Or(a, b) => {
            let (na, nb) = (
                push_negations(a, negate, originals, twin),
                push_negations(b, negate, originals, twin),
            );
            if negate {
                Formula::and(na, nb)
            } else {
                Formula::or(na, nb)
            }
        }
        Formula::Exists(ex, body) => {
            let nb = push_negations(body, negate, originals, twin);
            if negate {
                Formula::forall(ex.clone(), nb)
            } else {
                Formula::exists(ex.clone(), nb)
            }
        }
        Formula::Forall(ex, body) => {
            let nb = push_negations(body, negate, originals, twin);
            if negate {
                Formula::exists(ex.clone(), nb)
            } else {
                Formula::forall(ex.clone(), nb)
            }
        }
    }
}

fn remap_vars(fo: Formula, remap: &[Option<VarId>]) -> Formula {
    match fo {
        Formula::Var(x) => Formula::Var(remap[x.index()].expect("kept variables only")),
        Formula::Not(f) => Formula::not(remap_vars(*f, remap)),
        Formula::And(a, b) => Formula::and(remap_vars(*a, remap), remap_vars(*b, remap)),
        Formula::Or(a, b) => Formula::or(remap_vars(*a, remap), remap_vars(*b, remap)),
        Formula::Exists(ex, b) => Formula::exists(ex, remap_vars(*b, remap)),
        Formula::Forall(ex, b) => Formula::forall(ex, remap_vars(*b, remap)),
        other => other,
    }
}

fn walk_def<'s>(
    fo: &'s Formula,
    kinds: &mut Vec<OccKind<'s>>,
    children: &mut Vec<Vec<OccurrenceId>>,
) -> OccurrenceId {
    let id = OccurrenceId(kinds.len() as u32);
    kinds.push(OccKind::Def(fo));
    children.push(Vec::new());
    match fo {
        Formula::True | Formula::False | Formula::Var(_) => {}
        Formula::Not(f) => {
            let c = walk_def(f, kinds, children);
            children[id.index()].push(c);
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let ca = walk_def(a, kinds, children);
            let cb = walk_def(b, kinds, children);
            children[id.index()].push(ca);
            children[id.index()].push(cb);
        }
        Formula::Exists(_, body) | Formula::Forall(_, body) => {
            let c = walk_def(body, kinds, children);
            children[id.index()].push(c);
        }
    }
    id
}

#[derive(Clone, Copy, Debug)]
enum OccKind<'s> {
    /// A subformula occurrence inside a definition.
    Def(&'s Formula),
    /// The entry occurrence of a variable, behaving like the bare formula
    /// `x`.
    Entry(VarId),
}

/// Occurrence table of a system; see [`FormulaSystem::occurrences`].
pub struct OccurrenceTable<'s> {
    kinds: Vec<OccKind<'s>>,
    children: Vec<Vec<OccurrenceId>>,
    entry: Vec<OccurrenceId>,
    def_root: Vec<OccurrenceId>,
}

impl<'s> OccurrenceTable<'s> {
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// The entry occurrence of a variable: the initial node of FCGs at that
    /// variable.
    pub fn entry(&self, x: VarId) -> OccurrenceId {
        self.entry[x.index()]
    }

    pub fn definition_root(&self, x: VarId) -> OccurrenceId {
        self.def_root[x.index()]
    }

    /// The formula at an occurrence; entry occurrences report `None` (they
    /// stand for the bare variable).
    pub fn formula(&self, occ: OccurrenceId) -> Option<&'s Formula> {
        match self.kinds[occ.index()] {
            OccKind::Def(f) => Some(f),
            OccKind::Entry(_) => None,
        }
    }

    /// The variable an entry occurrence stands for.
    pub fn entry_variable(&self, occ: OccurrenceId) -> Option<VarId> {
        match self.kinds[occ.index()] {
            OccKind::Entry(x) => Some(x),
            OccKind::Def(_) => None,
        }
    }

    fn children(&self, occ: OccurrenceId) -> &[OccurrenceId] {
        &self.children[occ.index()]
    }

    fn kind(&self, occ: OccurrenceId) -> OccKind<'s> {
        self.kinds[occ.index()]
    }

    fn class(&self, occ: OccurrenceId, sign: Sign) -> NodeClass {
        let conjunctive = match self.kinds[occ.index()] {
            OccKind::Def(f) => f.is_conjunctive(),
            OccKind::Entry(_) => false,
        };
        let universal = match sign {
            Sign::Pos => conjunctive,
            Sign::Neg => !conjunctive,
        };
        if universal {
            NodeClass::Universal
        } else {
            NodeClass::Existential
        }
    }
}
