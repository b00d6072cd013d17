//! Constructions witnessing that automata and formula systems specify the
//! same graph languages.
//!
//! [`automaton_to_system`] turns every state into a variable: a universal
//! state becomes the conjunction of `∀(Γ, q′)` over its outgoing transitions,
//! an existential state the disjunction of `∃(Γ, q′)`; a state with no
//! transitions becomes the constant `true` or `false` accordingly. The
//! resulting system agrees with the automaton on accepted *and* rejected
//! inputs — indeterminate ones included.
//!
//! [`system_to_automaton`] goes the other way for systems in shallow normal
//! form: variables become states (universal iff the definition is
//! conjunctive), `x′ ∨ x″` and `x′ ∧ x″` become identity-labeled transitions
//! to both operands, and `Q(G, x′)` becomes a transition labeled `G`.
//! Composed with [`FormulaSystem::shallow_normal_form`], this translates any
//! system into an equivalent automaton.
//!
//! ```
//! use gfl::{samples, translate};
//!
//! // automaton -> system: states become variables
//! let ham = samples::ham_automaton();
//! let (sys, q0) = translate::automaton_to_system(&ham);
//! let input = samples::cycle_graph(4);
//! assert_eq!(sys.classify_at(q0, &input)?, ham.classify(&input)?);
//!
//! // system -> automaton, via the shallow normal form
//! let original = samples::ham_system();
//! let normal = original.shallow_normal_form()?;
//! let automaton = translate::system_to_automaton(&normal, normal.var_named("u").unwrap())?;
//! let u = original.var_named("u").unwrap();
//! assert_eq!(automaton.classify(&input)?, original.classify_at(u, &input)?);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

use thiserror::Error;

use crate::automaton::{Automaton, State, StateId, Transition};
use crate::expr::GraphExpression;
use crate::formula::{Formula, FormulaError, FormulaSystem, VarId};
use crate::graph::Graph;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("definition of `{variable}` is not in shallow normal form: {definition}")]
    NotShallow { variable: String, definition: String },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// The formula system over the automaton's states, designating the initial
/// state's variable.
pub fn automaton_to_system(automaton: &Automaton) -> (FormulaSystem, VarId) {
    let mut sys = FormulaSystem::new(automaton.alphabet().clone());
    let vars: Vec<VarId> = automaton
        .states()
        .iter()
        .map(|s| sys.add_variable(&s.name, s.rank).expect("state names are unique"))
        .collect();
    for (i, state) in automaton.states().iter().enumerate() {
        let mut parts = automaton
            .transitions()
            .iter()
            .filter(|t| t.from.index() == i)
            .map(|t| {
                let atom = GraphExpression::atom(t.graph.clone());
                let var = Formula::Var(vars[t.to.index()]);
                if state.universal {
                    Formula::forall(atom, var)
                } else {
                    Formula::exists(atom, var)
                }
            });
        let def = match parts.next() {
            // a state without transitions accepts iff it is universal
            None => {
                if state.universal {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Some(first) => parts.fold(first, |acc, part| {
                if state.universal {
                    Formula::and(acc, part)
                } else {
                    Formula::or(acc, part)
                }
            }),
        };
        sys.set_definition(vars[i], def);
    }
    let initial = vars[automaton.initial().index()];
    (sys, initial)
}

/// The automaton over the system's variables, for a system in shallow normal
/// form. Rejects other systems instead of normalizing implicitly; compose
/// with [`FormulaSystem::shallow_normal_form`] to translate arbitrary
/// systems.
pub fn system_to_automaton(
    sys: &FormulaSystem,
    initial: VarId,
) -> Result<Automaton, TranslateError> {
    let issues = sys.validate();
    if !issues.is_empty() {
        return Err(FormulaError::Invalid(issues).into());
    }
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    for x in sys.var_ids() {
        let variable = sys.variable(x);
        let def = sys.definition(x);
        if !def.is_shallow() {
            return Err(TranslateError::NotShallow {
                variable: variable.name.clone(),
                definition: sys.render_formula(def),
            });
        }
        states.push(State {
            name: variable.name.clone(),
            rank: variable.rank,
            universal: def.is_conjunctive(),
        });
        let from = StateId(x.0);
        match def {
            Formula::True | Formula::False => {}
            Formula::And(a, b) | Formula::Or(a, b) => {
                let identity = Graph::identity(variable.rank);
                for operand in [a, b] {
                    let Formula::Var(y) = **operand else { unreachable!("shallow") };
                    let t = Transition {
                        from,
                        graph: identity.clone(),
                        to: StateId(y.0),
                    };
                    // transitions form a set; x' ∧ x' needs only one
                    if !transitions.contains(&t) {
                        transitions.push(t);
                    }
                }
            }
            Formula::Exists(ex, body) | Formula::Forall(ex, body) => {
                let GraphExpression::Atom(g) = ex else { unreachable!("shallow") };
                let Formula::Var(y) = **body else { unreachable!("shallow") };
                transitions.push(Transition { from, graph: g.clone(), to: StateId(y.0) });
            }
            _ => unreachable!("shallow"),
        }
    }
    Ok(Automaton::new(
        sys.alphabet().clone(),
        states,
        transitions,
        StateId(initial.0),
    ))
}
