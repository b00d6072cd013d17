//! The plain-text format for alphabets, graphs, expressions, formula
//! systems, and automata.
//!
//! ```text
//! # comments run to the end of the line
//! alphabet { _/2; L/1 }
//!
//! graph G (2,1) {
//!   nodes a b c d;
//!   front a c;
//!   rear d;
//!   edge _(a,b);
//! }
//!
//! expr Cycle = LOOP + EDGE_UP . OUT_EN* . EDGE_DOWN;
//!
//! system {
//!   let u:0 = exists LOOP -> v | exists EDGE_UP -> w;
//! }
//!
//! automaton {
//!   state q0:0 exists init;
//!   trans q0 -EDGE_UP-> q1;
//! }
//! ```
//!
//! Expression operators: postfix `*` binds strongest, then `.`, then `+`.
//! Formula operators: `!` and quantifier bodies bind strongest, then `&`,
//! then `|`; `exists EX -> FO` and `forall EX -> FO` take a unary body, so
//! compound bodies need parentheses. Names must be declared before use; the
//! invisible label `_` is declared implicitly when first used. Parsing
//! resolves all references and typechecks every item; [`SpecFile::serialize`]
//! and [`SpecFile::parse`] round-trip structurally.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::alphabet::{Alphabet, INVISIBLE_LABEL};
use crate::automaton::{Automaton, State, StateId, Transition};
use crate::expr::GraphExpression;
use crate::formula::{Formula, FormulaSystem, VarId};
use crate::graph::{CanonicalKey, Graph, NodeId};

/// A named graph together with the display names of its nodes, in id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedGraph {
    pub name: String,
    pub graph: Graph,
    pub node_names: Vec<String>,
}

/// The parsed contents of one format file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpecFile {
    pub alphabet: Alphabet,
    pub graphs: Vec<NamedGraph>,
    pub exprs: Vec<(String, GraphExpression)>,
    pub system: Option<FormulaSystem>,
    pub automaton: Option<Automaton>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Slash,
    Plus,
    Dot,
    Star,
    Bang,
    Amp,
    Pipe,
    Eq,
    Dash,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Star => "`*`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Dash => "`-`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                bump(&mut chars);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if is_ident_continue(c) {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            tokens.push(Token { tok: Tok::Ident(s), line: tline, col: tcol });
            continue;
        }
        if c.is_ascii_digit() {
            let mut n = 0usize;
            while let Some(&c) = chars.peek() {
                if let Some(d) = c.to_digit(10) {
                    n = n * 10 + d as usize;
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            tokens.push(Token { tok: Tok::Int(n), line: tline, col: tcol });
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '/' => Tok::Slash,
            '+' => Tok::Plus,
            '.' => Tok::Dot,
            '*' => Tok::Star,
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '=' => Tok::Eq,
            '-' => {
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    Tok::Dash
                }
            }
            other => {
                return Err(ParseError {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        tokens.push(Token { tok, line: tline, col: tcol });
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    spec: SpecFile,
    graph_index: HashMap<String, usize>,
    expr_index: HashMap<String, usize>,
    saw_alphabet_block: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.tokens[self.pos].line, self.tokens[self.pos].col)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, message: message.into() }
    }

    fn error_at(&self, at: (usize, usize), message: impl Into<String>) -> ParseError {
        ParseError { line: at.0, col: at.1, message: message.into() }
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            other => Err(self.error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<usize, ParseError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.advance();
                Ok(n)
            }
            ref other => Err(self.error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`, found {}", self.peek().describe())))
        }
    }

    fn file(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(()),
                Tok::Ident(kw) => match kw.as_str() {
                    "alphabet" => self.alphabet_block()?,
                    "graph" => self.graph_block()?,
                    "expr" => self.expr_decl()?,
                    "system" => self.system_block()?,
                    "automaton" => self.automaton_block()?,
                    other => {
                        return Err(self.error(format!(
                            "expected a declaration (alphabet, graph, expr, system, automaton), found `{other}`"
                        )))
                    }
                },
                other => {
                    return Err(self.error(format!(
                        "expected a declaration, found {}",
                        other.describe()
                    )))
                }
            }
        }
    }

    fn alphabet_block(&mut self) -> Result<(), ParseError> {
        let at = self.here();
        self.expect_keyword("alphabet")?;
        if self.saw_alphabet_block {
            return Err(self.error_at(at, "duplicate alphabet block".to_string()));
        }
        self.saw_alphabet_block = true;
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace) {
            let at = self.here();
            let name = self.expect_ident("a symbol name")?;
            self.expect(Tok::Slash)?;
            let rank = self.expect_int("a rank")?;
            self.spec
                .alphabet
                .declare(&name, rank)
                .map_err(|e| self.error_at(at, e.to_string()))?;
            if matches!(self.peek(), Tok::Semi) {
                self.advance();
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace)
    }

    fn label_symbol(&mut self, name: &str, at: (usize, usize)) -> Result<crate::alphabet::Symbol, ParseError> {
        if let Some(sym) = self.spec.alphabet.get(name) {
            return Ok(sym);
        }
        if name == INVISIBLE_LABEL {
            // the invisible label is declared implicitly
            return self
                .spec
                .alphabet
                .declare(INVISIBLE_LABEL, 2)
                .map_err(|e| self.error_at(at, e.to_string()));
        }
        Err(self.error_at(at, format!("unknown edge label `{name}`")))
    }

    fn graph_block(&mut self) -> Result<(), ParseError> {
        let block_at = self.here();
        self.expect_keyword("graph")?;
        let name_at = self.here();
        let name = self.expect_ident("a graph name")?;
        if self.graph_index.contains_key(&name) {
            return Err(self.error_at(name_at, format!("graph `{name}` is declared twice")));
        }
        self.expect(Tok::LParen)?;
        let front_len = self.expect_int("the front interface length")?;
        self.expect(Tok::Comma)?;
        let rear_len = self.expect_int("the rear interface length")?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;

        let mut node_names: Vec<String> = Vec::new();
        let mut node_ids: HashMap<String, NodeId> = HashMap::new();
        let mut edges: Vec<(crate::alphabet::Symbol, Vec<NodeId>)> = Vec::new();
        let mut front: Option<Vec<NodeId>> = None;
        let mut rear: Option<Vec<NodeId>> = None;

        while !matches!(self.peek(), Tok::RBrace) {
            let stmt_at = self.here();
            let kw = self.expect_ident("a graph statement (nodes, front, rear, edge)")?;
            match kw.as_str() {
                "nodes" => {
                    while let Tok::Ident(n) = self.peek().clone() {
                        let at = self.here();
                        self.advance();
                        if node_ids.contains_key(&n) {
                            return Err(
                                self.error_at(at, format!("node `{n}` is declared twice"))
                            );
                        }
                        let id = NodeId(node_names.len() as u32);
                        node_ids.insert(n.clone(), id);
                        node_names.push(n);
                    }
                    self.expect(Tok::Semi)?;
                }
                "front" | "rear" => {
                    let mut seq = Vec::new();
                    while let Tok::Ident(n) = self.peek().clone() {
                        let at = self.here();
                        self.advance();
                        let id = *node_ids
                            .get(&n)
                            .ok_or_else(|| self.error_at(at, format!("unknown node `{n}`")))?;
                        if seq.contains(&id) {
                            return Err(self.error_at(
                                at,
                                format!("{kw} interface is not repetition-free: node `{n}` repeats"),
                            ));
                        }
                        seq.push(id);
                    }
                    self.expect(Tok::Semi)?;
                    let slot = if kw == "front" { &mut front } else { &mut rear };
                    if slot.is_some() {
                        return Err(
                            self.error_at(stmt_at, format!("duplicate {kw} statement"))
                        );
                    }
                    *slot = Some(seq);
                }
                "edge" => {
                    let label_at = self.here();
                    let label = self.expect_ident("an edge label")?;
                    let sym = self.label_symbol(&label, label_at)?;
                    self.expect(Tok::LParen)?;
                    let mut attachment = Vec::new();
                    if !matches!(self.peek(), Tok::RParen) {
                        loop {
                            let at = self.here();
                            let n = self.expect_ident("a node name")?;
                            let id = *node_ids
                                .get(&n)
                                .ok_or_else(|| self.error_at(at, format!("unknown node `{n}`")))?;
                            attachment.push(id);
                            if matches!(self.peek(), Tok::Comma) {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Semi)?;
                    let rank = self.spec.alphabet.rank(sym);
                    if attachment.len() != rank {
                        return Err(self.error_at(
                            label_at,
                            format!(
                                "label `{label}` has rank {rank} but the edge attaches {} nodes",
                                attachment.len()
                            ),
                        ));
                    }
                    edges.push((sym, attachment));
                }
                other => {
                    return Err(self.error_at(
                        stmt_at,
                        format!("expected nodes, front, rear, or edge, found `{other}`"),
                    ))
                }
            }
        }
        self.expect(Tok::RBrace)?;

        let front = front.unwrap_or_default();
        let rear = rear.unwrap_or_default();
        if front.len() != front_len || rear.len() != rear_len {
            return Err(self.error_at(
                block_at,
                format!(
                    "graph `{name}` is declared with type ({front_len},{rear_len}) but has type ({},{})",
                    front.len(),
                    rear.len()
                ),
            ));
        }
        let graph = Graph::from_parts(
            &self.spec.alphabet,
            (0..node_names.len() as u32).map(NodeId),
            edges
                .into_iter()
                .enumerate()
                .map(|(i, (sym, att))| (crate::graph::EdgeId(i as u32), sym, att)),
            front,
            rear,
        )
        .map_err(|e| self.error_at(block_at, e.to_string()))?;
        self.graph_index.insert(name.clone(), self.spec.graphs.len());
        self.spec.graphs.push(NamedGraph { name, graph, node_names });
        Ok(())
    }

    fn expr_decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("expr")?;
        let name_at = self.here();
        let name = self.expect_ident("an expression name")?;
        if self.expr_index.contains_key(&name) {
            return Err(self.error_at(name_at, format!("expr `{name}` is declared twice")));
        }
        self.expect(Tok::Eq)?;
        let expr = self.expression()?;
        self.expect(Tok::Semi)?;
        expr.expr_type().map_err(|e| self.error_at(name_at, e.to_string()))?;
        self.expr_index.insert(name.clone(), self.spec.exprs.len());
        self.spec.exprs.push((name, expr));
        Ok(())
    }

    fn expression(&mut self) -> Result<GraphExpression, ParseError> {
        let mut expr = self.expr_concat()?;
        while matches!(self.peek(), Tok::Plus) {
            self.advance();
            let rhs = self.expr_concat()?;
            expr = GraphExpression::union(expr, rhs);
        }
        Ok(expr)
    }

    fn expr_concat(&mut self) -> Result<GraphExpression, ParseError> {
        let mut expr = self.expr_star()?;
        while matches!(self.peek(), Tok::Dot) {
            self.advance();
            let rhs = self.expr_star()?;
            expr = GraphExpression::concat(expr, rhs);
        }
        Ok(expr)
    }

    fn expr_star(&mut self) -> Result<GraphExpression, ParseError> {
        let mut expr = self.expr_primary()?;
        while matches!(self.peek(), Tok::Star) {
            self.advance();
            expr = GraphExpression::star(expr);
        }
        Ok(expr)
    }

    fn expr_primary(&mut self) -> Result<GraphExpression, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let e = self.expression()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) if name == "empty" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let front = self.expect_int("the front interface length")?;
                self.expect(Tok::Comma)?;
                let rear = self.expect_int("the rear interface length")?;
                self.expect(Tok::RParen)?;
                Ok(GraphExpression::empty(front, rear))
            }
            Tok::Ident(name) => {
                let at = self.here();
                self.advance();
                let graph = self.graph_index.get(&name);
                let expr = self.expr_index.get(&name);
                match (graph, expr) {
                    (Some(_), Some(_)) => Err(self.error_at(
                        at,
                        format!("`{name}` names both a graph and an expr; rename one"),
                    )),
                    (Some(&g), None) => {
                        Ok(GraphExpression::atom(self.spec.graphs[g].graph.clone()))
                    }
                    (None, Some(&e)) => Ok(self.spec.exprs[e].1.clone()),
                    (None, None) => {
                        Err(self.error_at(at, format!("unknown graph or expr `{name}`")))
                    }
                }
            }
            other => Err(self.error(format!(
                "expected a graph name, `empty(m,n)`, or `(`, found {}",
                other.describe()
            ))),
        }
    }

    fn system_block(&mut self) -> Result<(), ParseError> {
        let block_at = self.here();
        self.expect_keyword("system")?;
        if self.spec.system.is_some() {
            return Err(self.error_at(block_at, "duplicate system block".to_string()));
        }
        self.expect(Tok::LBrace)?;

        // first pass: collect headers, remember where each body starts
        let mut decls: Vec<(String, usize, usize)> = Vec::new(); // name, rank, body position
        let mut sys = FormulaSystem::new(self.spec.alphabet.clone());
        while !matches!(self.peek(), Tok::RBrace) {
            self.expect_keyword("let")?;
            let name_at = self.here();
            let name = self.expect_ident("a variable name")?;
            self.expect(Tok::Colon)?;
            let rank = self.expect_int("a rank")?;
            self.expect(Tok::Eq)?;
            sys.add_variable(&name, rank)
                .map_err(|e| self.error_at(name_at, e.to_string()))?;
            decls.push((name, rank, self.pos));
            // formulas contain no semicolons, so skip to the next one
            while !matches!(self.peek(), Tok::Semi | Tok::Eof) {
                self.advance();
            }
            self.expect(Tok::Semi)?;
        }
        self.expect(Tok::RBrace)?;
        let after_block = self.pos;

        // second pass: parse the bodies with every variable in scope
        for (i, (_, _, body_pos)) in decls.iter().enumerate() {
            self.pos = *body_pos;
            let fo = self.formula(&sys)?;
            self.expect(Tok::Semi)?;
            sys.set_definition(VarId(i as u32), fo);
        }
        self.pos = after_block;

        let issues = sys.validate();
        if let Some(first) = issues.first() {
            return Err(self.error_at(block_at, first.to_string()));
        }
        self.spec.system = Some(sys);
        Ok(())
    }

    fn formula(&mut self, sys: &FormulaSystem) -> Result<Formula, ParseError> {
        let mut fo = self.formula_and(sys)?;
        while matches!(self.peek(), Tok::Pipe) {
            self.advance();
            let rhs = self.formula_and(sys)?;
            fo = Formula::or(fo, rhs);
        }
        Ok(fo)
    }

    fn formula_and(&mut self, sys: &FormulaSystem) -> Result<Formula, ParseError> {
        let mut fo = self.formula_unary(sys)?;
        while matches!(self.peek(), Tok::Amp) {
            self.advance();
            let rhs = self.formula_unary(sys)?;
            fo = Formula::and(fo, rhs);
        }
        Ok(fo)
    }

    fn formula_unary(&mut self, sys: &FormulaSystem) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.advance();
                Ok(Formula::not(self.formula_unary(sys)?))
            }
            Tok::LParen => {
                self.advance();
                let fo = self.formula(sys)?;
                self.expect(Tok::RParen)?;
                Ok(fo)
            }
            Tok::Ident(kw) if kw == "true" => {
                self.advance();
                Ok(Formula::True)
            }
            Tok::Ident(kw) if kw == "false" => {
                self.advance();
                Ok(Formula::False)
            }
            Tok::Ident(kw) if kw == "exists" || kw == "forall" => {
                self.advance();
                let ex = self.expression()?;
                self.expect(Tok::Arrow)?;
                let body = self.formula_unary(sys)?;
                Ok(if kw == "exists" {
                    Formula::exists(ex, body)
                } else {
                    Formula::forall(ex, body)
                })
            }
            Tok::Ident(name) => {
                let at = self.here();
                self.advance();
                match sys.var_named(&name) {
                    Some(x) => Ok(Formula::Var(x)),
                    None => Err(self.error_at(at, format!("unknown variable `{name}`"))),
                }
            }
            other => Err(self.error(format!(
                "expected a formula, found {}",
                other.describe()
            ))),
        }
    }

    fn automaton_block(&mut self) -> Result<(), ParseError> {
        let block_at = self.here();
        self.expect_keyword("automaton")?;
        if self.spec.automaton.is_some() {
            return Err(self.error_at(block_at, "duplicate automaton block".to_string()));
        }
        self.expect(Tok::LBrace)?;
        let mut states: Vec<State> = Vec::new();
        let mut state_index: HashMap<String, StateId> = HashMap::new();
        let mut transitions: Vec<Transition> = Vec::new();
        let mut initial: Option<StateId> = None;
        while !matches!(self.peek(), Tok::RBrace) {
            let stmt_at = self.here();
            let kw = self.expect_ident("`state` or `trans`")?;
            match kw.as_str() {
                "state" => {
                    let name_at = self.here();
                    let name = self.expect_ident("a state name")?;
                    if state_index.contains_key(&name) {
                        return Err(
                            self.error_at(name_at, format!("state `{name}` is declared twice"))
                        );
                    }
                    self.expect(Tok::Colon)?;
                    let rank = self.expect_int("a rank")?;
                    let class_at = self.here();
                    let class = self.expect_ident("`exists` or `forall`")?;
                    let universal = match class.as_str() {
                        "exists" => false,
                        "forall" => true,
                        other => {
                            return Err(self.error_at(
                                class_at,
                                format!("expected `exists` or `forall`, found `{other}`"),
                            ))
                        }
                    };
                    if self.at_keyword("init") {
                        self.advance();
                        if initial.is_some() {
                            return Err(self.error_at(
                                stmt_at,
                                "more than one state is marked `init`".to_string(),
                            ));
                        }
                        initial = Some(StateId(states.len() as u32));
                    }
                    self.expect(Tok::Semi)?;
                    state_index.insert(name.clone(), StateId(states.len() as u32));
                    states.push(State { name, rank, universal });
                }
                "trans" => {
                    let from_at = self.here();
                    let from = self.expect_ident("a state name")?;
                    let from = *state_index.get(&from).ok_or_else(|| {
                        self.error_at(from_at, format!("unknown state `{from}`"))
                    })?;
                    self.expect(Tok::Dash)?;
                    let graph_at = self.here();
                    let graph_name = self.expect_ident("a graph name")?;
                    let graph = match self.graph_index.get(&graph_name) {
                        Some(&g) => self.spec.graphs[g].graph.clone(),
                        None => {
                            return Err(self.error_at(
                                graph_at,
                                format!("unknown graph `{graph_name}`"),
                            ))
                        }
                    };
                    self.expect(Tok::Arrow)?;
                    let to_at = self.here();
                    let to = self.expect_ident("a state name")?;
                    let to = *state_index
                        .get(&to)
                        .ok_or_else(|| self.error_at(to_at, format!("unknown state `{to}`")))?;
                    self.expect(Tok::Semi)?;
                    transitions.push(Transition { from, graph, to });
                }
                other => {
                    return Err(self.error_at(
                        stmt_at,
                        format!("expected `state` or `trans`, found `{other}`"),
                    ))
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let initial = initial
            .ok_or_else(|| self.error_at(block_at, "no state is marked `init`".to_string()))?;
        let automaton =
            Automaton::new(self.spec.alphabet.clone(), states, transitions, initial);
        let issues = automaton.validate();
        if let Some(first) = issues.first() {
            return Err(self.error_at(block_at, first.to_string()));
        }
        self.spec.automaton = Some(automaton);
        Ok(())
    }
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<SpecFile, ParseError> {
        let tokens = lex(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            spec: SpecFile::default(),
            graph_index: HashMap::new(),
            expr_index: HashMap::new(),
            saw_alphabet_block: false,
        };
        parser.file()?;
        Ok(parser.spec)
    }

    /// A structurally canonical copy: every graph renumbered to contiguous
    /// ids, and every graph referenced by an expression, system, or automaton
    /// present as a named graph block. Files produced by [`parse`] are
    /// already normalized.
    ///
    /// [`parse`]: SpecFile::parse
    pub fn normalized(&self) -> SpecFile {
        let mut graphs: Vec<NamedGraph> = self
            .graphs
            .iter()
            .map(|ng| {
                let graph = ng.graph.renumbered();
                let node_names = if ng.node_names.len() == graph.node_count() {
                    ng.node_names.clone()
                } else {
                    (0..graph.node_count()).map(|i| format!("n{i}")).collect()
                };
                NamedGraph { name: ng.name.clone(), graph, node_names }
            })
            .collect();
        let mut by_key: HashMap<CanonicalKey, usize> = HashMap::new();
        for (i, ng) in graphs.iter().enumerate() {
            by_key.entry(ng.graph.canonical_key()).or_insert(i);
        }
        let mut used_names: std::collections::BTreeSet<String> =
            graphs.iter().map(|g| g.name.clone()).collect();
        let mut fresh = 0usize;

        let mut intern = |g: &Graph,
                          graphs: &mut Vec<NamedGraph>,
                          by_key: &mut HashMap<CanonicalKey, usize>|
         -> Graph {
            let g = g.renumbered();
            let key = g.canonical_key();
            if let std::collections::hash_map::Entry::Vacant(slot) = by_key.entry(key) {
                let name = loop {
                    fresh += 1;
                    let candidate = format!("G{fresh}");
                    if !used_names.contains(&candidate) {
                        break candidate;
                    }
                };
                used_names.insert(name.clone());
                slot.insert(graphs.len());
                graphs.push(NamedGraph {
                    name,
                    graph: g.clone(),
                    node_names: (0..g.node_count()).map(|i| format!("n{i}")).collect(),
                });
            }
            g
        };

        let exprs = self
            .exprs
            .iter()
            .map(|(name, e)| {
                (name.clone(), map_expr_graphs(e, &mut |g| intern(g, &mut graphs, &mut by_key)))
            })
            .collect();
        let system = self.system.as_ref().map(|sys| {
            let mut out = FormulaSystem::new(sys.alphabet().clone());
            for v in sys.variables() {
                out.add_variable(&v.name, v.rank).expect("unique in source system");
            }
            for x in sys.var_ids() {
                let def =
                    map_formula_graphs(sys.definition(x), &mut |g| intern(g, &mut graphs, &mut by_key));
                out.set_definition(x, def);
            }
            out
        });
        let automaton = self.automaton.as_ref().map(|a| {
            Automaton::new(
                a.alphabet().clone(),
                a.states().to_vec(),
                a.transitions()
                    .iter()
                    .map(|t| Transition {
                        from: t.from,
                        graph: intern(&t.graph, &mut graphs, &mut by_key),
                        to: t.to,
                    })
                    .collect(),
                a.initial(),
            )
        });
        SpecFile { alphabet: self.alphabet.clone(), graphs, exprs, system, automaton }
    }

    /// Serialize to the text format. The output parses back to
    /// [`normalized`](SpecFile::normalized) of this value; serialization is
    /// idempotent after one normalization pass.
    pub fn serialize(&self) -> String {
        let spec = self.normalized();
        let mut out = String::new();
        if !spec.alphabet.is_empty() {
            let _ = write!(out, "alphabet {{ {} }}\n\n", spec.alphabet);
        }
        let names: HashMap<CanonicalKey, &str> = {
            let mut m = HashMap::new();
            for ng in &spec.graphs {
                m.entry(ng.graph.canonical_key()).or_insert(ng.name.as_str());
            }
            m
        };
        for ng in &spec.graphs {
            let (front_len, rear_len) = ng.graph.graph_type();
            let _ = writeln!(out, "graph {} ({front_len},{rear_len}) {{", ng.name);
            let node_name =
                |id: NodeId| -> &str { ng.node_names[id.0 as usize].as_str() };
            let _ = write!(out, "  nodes");
            for id in ng.graph.nodes() {
                let _ = write!(out, " {}", node_name(id));
            }
            out.push_str(";\n");
            let _ = write!(out, "  front");
            for id in ng.graph.front() {
                let _ = write!(out, " {}", node_name(*id));
            }
            out.push_str(";\n");
            let _ = write!(out, "  rear");
            for id in ng.graph.rear() {
                let _ = write!(out, " {}", node_name(*id));
            }
            out.push_str(";\n");
            for (_, e) in ng.graph.edges() {
                let _ = write!(out, "  edge {}(", spec.alphabet.name(e.label));
                for (i, n) in e.attachment.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{}", node_name(*n));
                }
                out.push_str(");\n");
            }
            out.push_str("}\n\n");
        }
        for (name, expr) in &spec.exprs {
            let _ = write!(out, "expr {name} = ");
            write_expr(&mut out, expr, &names, 0);
            out.push_str(";\n\n");
        }
        if let Some(sys) = &spec.system {
            out.push_str("system {\n");
            for x in sys.var_ids() {
                let v = sys.variable(x);
                let _ = write!(out, "  let {}:{} = ", v.name, v.rank);
                write_formula(&mut out, sys, sys.definition(x), &names, 0);
                out.push_str(";\n");
            }
            out.push_str("}\n\n");
        }
        if let Some(a) = &spec.automaton {
            out.push_str("automaton {\n");
            for (i, s) in a.states().iter().enumerate() {
                let class = if s.universal { "forall" } else { "exists" };
                let init = if a.initial().index() == i { " init" } else { "" };
                let _ = writeln!(out, "  state {}:{} {class}{init};", s.name, s.rank);
            }
            for t in a.transitions() {
                let _ = writeln!(
                    out,
                    "  trans {} -{}-> {};",
                    a.states()[t.from.index()].name,
                    names[&t.graph.canonical_key()],
                    a.states()[t.to.index()].name
                );
            }
            out.push_str("}\n");
        }
        out
    }
}

fn map_expr_graphs(
    e: &GraphExpression,
    f: &mut impl FnMut(&Graph) -> Graph,
) -> GraphExpression {
    match e {
        GraphExpression::Empty { front, rear } => GraphExpression::empty(*front, *rear),
        GraphExpression::Atom(g) => GraphExpression::atom(f(g)),
        GraphExpression::Union(a, b) => {
            GraphExpression::union(map_expr_graphs(a, f), map_expr_graphs(b, f))
        }
        GraphExpression::Concat(a, b) => {
            GraphExpression::concat(map_expr_graphs(a, f), map_expr_graphs(b, f))
        }
        GraphExpression::Star(a) => GraphExpression::star(map_expr_graphs(a, f)),
    }
}

fn map_formula_graphs(fo: &Formula, f: &mut impl FnMut(&Graph) -> Graph) -> Formula {
    match fo {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Var(x) => Formula::Var(*x),
        Formula::Exists(ex, body) => {
            Formula::exists(map_expr_graphs(ex, f), map_formula_graphs(body, f))
        }
        Formula::Forall(ex, body) => {
            Formula::forall(map_expr_graphs(ex, f), map_formula_graphs(body, f))
        }
        Formula::Not(a) => Formula::not(map_formula_graphs(a, f)),
        Formula::And(a, b) => {
            Formula::and(map_formula_graphs(a, f), map_formula_graphs(b, f))
        }
        Formula::Or(a, b) => Formula::or(map_formula_graphs(a, f), map_formula_graphs(b, f)),
    }
}

/// Precedence levels: 0 = union context, 1 = concatenation, 2 = star operand.
fn write_expr(
    out: &mut String,
    e: &GraphExpression,
    names: &HashMap<CanonicalKey, &str>,
    prec: u8,
) {
    match e {
        GraphExpression::Empty { front, rear } => {
            let _ = write!(out, "empty({front},{rear})");
        }
        GraphExpression::Atom(g) => {
            out.push_str(names[&g.canonical_key()]);
        }
        GraphExpression::Union(a, b) => {
            if prec > 0 {
                out.push('(');
            }
            write_expr(out, a, names, 0);
            out.push_str(" + ");
            write_expr(out, b, names, 1);
            if prec > 0 {
                out.push(')');
            }
        }
        GraphExpression::Concat(a, b) => {
            if prec > 1 {
                out.push('(');
            }
            write_expr(out, a, names, 1);
            out.push_str(" . ");
            write_expr(out, b, names, 2);
            if prec > 1 {
                out.push(')');
            }
        }
        GraphExpression::Star(a) => {
            write_expr(out, a, names, 2);
            out.push('*');
        }
    }
}

/// Precedence levels: 0 = or context, 1 = and, 2 = unary.
fn write_formula(
    out: &mut String,
    sys: &FormulaSystem,
    fo: &Formula,
    names: &HashMap<CanonicalKey, &str>,
    prec: u8,
) {
    match fo {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Var(x) => out.push_str(&sys.variable(*x).name),
        Formula::Not(a) => {
            out.push('!');
            write_formula(out, sys, a, names, 2);
        }
        Formula::And(a, b) => {
            if prec > 1 {
                out.push('(');
            }
            write_formula(out, sys, a, names, 1);
            out.push_str(" & ");
            write_formula(out, sys, b, names, 2);
            if prec > 1 {
                out.push(')');
            }
        }
        Formula::Or(a, b) => {
            if prec > 0 {
                out.push('(');
            }
            write_formula(out, sys, a, names, 0);
            out.push_str(" | ");
            write_formula(out, sys, b, names, 1);
            if prec > 0 {
                out.push(')');
            }
        }
        Formula::Exists(ex, body) => {
            out.push_str("exists ");
            write_expr(out, ex, names, 0);
            out.push_str(" -> ");
            write_formula(out, sys, body, names, 2);
        }
        Formula::Forall(ex, body) => {
            out.push_str("forall ");
            write_expr(out, ex, names, 0);
            out.push_str(" -> ");
            write_formula(out, sys, body, names, 2);
        }
    }
}
