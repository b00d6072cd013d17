//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! The graph corpus consists of all unlabeled digraphs (loops allowed, no
//! parallel edges): every labeled digraph on up to 4 nodes, and one canonical
//! representative per isomorphism class on 5 nodes. The class enumeration is
//! cross-checked against a Burnside count, and verdict invariance under
//! relabeling is asserted explicitly, so testing representatives covers all
//! 5-node graphs.

mod common;

use rayon::prelude::*;

use gfl::eval::{EvalNodeId, Verdict};
use gfl::expr::GraphExpression;
use gfl::format::SpecFile;
use gfl::formula::Formula;
use gfl::graph::FrontalHandle;
use gfl::{dot, samples, translate};

fn report(criterion: usize, description: &str, failures: Vec<String>) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {status} - {description}");
    if !failures.is_empty() {
        let shown: Vec<&String> = failures.iter().take(5).collect();
        panic!(
            "criterion {criterion} failed on {} cases, e.g. {shown:?}",
            failures.len()
        );
    }
}

fn expected_verdict(hamiltonian: bool) -> Verdict {
    if hamiltonian {
        Verdict::Accepted
    } else {
        Verdict::Rejected
    }
}

/// Known class counts of unlabeled digraphs (loops allowed) on 0..=5 nodes.
const DIGRAPH_CLASS_COUNTS: [u64; 6] = [1, 2, 10, 104, 3044, 291968];

fn five_node_classes() -> Vec<u64> {
    let reps = common::canonical_digraph_masks(5);
    assert_eq!(reps.len() as u64, common::burnside_digraph_count(5));
    assert_eq!(reps.len() as u64, DIGRAPH_CLASS_COUNTS[5]);
    reps
}

fn small_classes(up_to: usize) -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    for (n, expected) in DIGRAPH_CLASS_COUNTS.iter().enumerate().take(up_to + 1) {
        let reps = common::canonical_digraph_masks(n);
        assert_eq!(reps.len() as u64, common::burnside_digraph_count(n));
        assert_eq!(reps.len() as u64, *expected);
        out.extend(reps.into_iter().map(move |m| (n, m)));
    }
    out
}

#[test]
fn criterion_1_hamiltonicity_via_the_automaton() {
    let ham = samples::ham_automaton();
    let mut failures: Vec<String> = Vec::new();

    // every labeled digraph on up to 4 nodes
    for n in 0..=4usize {
        let masks: Vec<u64> = (0..(1u64 << (n * n))).collect();
        failures.par_extend(masks.par_iter().filter_map(|&mask| {
            let g = samples::digraph_from_mask(n, mask);
            let got = ham.classify(&g).unwrap();
            let want = expected_verdict(samples::has_hamiltonian_cycle(n, mask));
            (got != want).then(|| format!("n={n} mask={mask:#b}: {got:?}, oracle {want:?}"))
        }));
    }

    // one representative per isomorphism class on 5 nodes
    let reps = five_node_classes();
    failures.par_extend(reps.par_iter().filter_map(|&mask| {
        let g = samples::digraph_from_mask(5, mask);
        let got = ham.classify(&g).unwrap();
        let want = expected_verdict(samples::has_hamiltonian_cycle(5, mask));
        (got != want).then(|| format!("n=5 mask={mask:#b}: {got:?}, oracle {want:?}"))
    }));

    // verdicts are invariant under relabeling, so class representatives
    // cover their whole class
    let mut rng = common::rng(0x5eed_0001);
    let perms = common::permutations(5);
    for _ in 0..200 {
        use rand::Rng as _;
        let mask = rng.random_range(0u64..(1 << 25));
        let p = &perms[rng.random_range(0..perms.len())];
        let mut permuted = 0u64;
        for i in 0..5 {
            for j in 0..5 {
                if mask & (1 << (i * 5 + j)) != 0 {
                    permuted |= 1 << (p[i] * 5 + p[j]);
                }
            }
        }
        let a = ham.classify(&samples::digraph_from_mask(5, mask)).unwrap();
        let b = ham.classify(&samples::digraph_from_mask(5, permuted)).unwrap();
        if a != b {
            failures.push(format!("relabeling changed the verdict: mask={mask:#b}"));
        }
    }

    report(
        1,
        "automaton verdicts equal the Hamiltonicity oracle on all digraphs with up to 5 nodes",
        failures,
    );
}

#[test]
fn criterion_2_hamiltonicity_via_the_formula_system() {
    let ham = samples::ham_automaton();
    let sys = samples::ham_system();
    let u = sys.var_named("u").unwrap();
    let mut failures: Vec<String> = Vec::new();

    for n in 0..=4usize {
        let masks: Vec<u64> = (0..(1u64 << (n * n))).collect();
        failures.par_extend(masks.par_iter().filter_map(|&mask| {
            let g = samples::digraph_from_mask(n, mask);
            let via_system = sys.classify_at(u, &g).unwrap();
            let via_automaton = ham.classify(&g).unwrap();
            let want = expected_verdict(samples::has_hamiltonian_cycle(n, mask));
            (via_system != want || via_system != via_automaton).then(|| {
                format!("n={n} mask={mask:#b}: system {via_system:?}, automaton {via_automaton:?}, oracle {want:?}")
            })
        }));
    }

    let reps = five_node_classes();
    failures.par_extend(reps.par_iter().filter_map(|&mask| {
        let g = samples::digraph_from_mask(5, mask);
        let via_system = sys.classify_at(u, &g).unwrap();
        let via_automaton = ham.classify(&g).unwrap();
        let want = expected_verdict(samples::has_hamiltonian_cycle(5, mask));
        (via_system != want || via_system != via_automaton).then(|| {
            format!("n=5 mask={mask:#b}: system {via_system:?}, automaton {via_automaton:?}, oracle {want:?}")
        })
    }));

    report(
        2,
        "formula-system verdicts at u match the oracle and the automaton graph for graph",
        failures,
    );
}

#[test]
fn criterion_3_automaton_to_system_translation() {
    let corpus = small_classes(4);
    let mut automata = vec![samples::ham_automaton()];
    let mut rng = common::rng(0x5eed_0003);
    while automata.len() < 26 {
        let candidate = common::random_automaton(&mut rng, 4);
        if candidate.validate().is_empty() {
            automata.push(candidate);
        }
    }

    let mut failures: Vec<String> = Vec::new();
    let mut indeterminates = 0usize;
    for (ai, automaton) in automata.iter().enumerate() {
        let (sys, initial) = translate::automaton_to_system(automaton);
        let outcomes: Vec<Result<bool, String>> = corpus
            .par_iter()
            .map(|&(n, mask)| {
                let g = samples::digraph_from_mask(n, mask);
                let direct = automaton.classify(&g).unwrap();
                let translated = sys.classify_at(initial, &g).unwrap();
                if direct != translated {
                    Err(format!(
                        "automaton #{ai}, n={n} mask={mask:#b}: {direct:?} vs {translated:?}"
                    ))
                } else {
                    Ok(direct == Verdict::Indeterminate)
                }
            })
            .collect();
        for outcome in outcomes {
            match outcome {
                Ok(indeterminate) => indeterminates += usize::from(indeterminate),
                Err(failure) => failures.push(failure),
            }
        }
    }
    // the agreement must cover all three verdicts to mean anything
    if indeterminates == 0 {
        failures.push("no indeterminate verdict occurred in the whole corpus".into());
    }

    report(
        3,
        "translated systems agree with their automata, indeterminate verdicts included",
        failures,
    );
}

#[test]
fn criterion_4_shallow_normal_form_and_system_to_automaton() {
    let sys = samples::ham_system();
    let u = sys.var_named("u").unwrap();
    let normal = sys.shallow_normal_form().unwrap();

    let mut failures: Vec<String> = Vec::new();
    for x in normal.var_ids() {
        let def = normal.definition(x);
        if !def.is_shallow() {
            failures.push(format!(
                "definition of {} is not shallow: {}",
                normal.variable(x).name,
                normal.render_formula(def)
            ));
        }
    }

    let nu = normal.var_named("u").unwrap();
    let automaton = translate::system_to_automaton(&normal, nu).unwrap();
    let issues = automaton.validate();
    if !issues.is_empty() {
        failures.push(format!("translated automaton invalid: {issues:?}"));
    }

    let corpus: Vec<(usize, u64)> = small_classes(4)
        .into_iter()
        .chain(five_node_classes().into_iter().map(|m| (5, m)))
        .collect();
    failures.par_extend(corpus.par_iter().filter_map(|&(n, mask)| {
        let g = samples::digraph_from_mask(n, mask);
        let original = sys.classify_at(u, &g).unwrap();
        let via_automaton = automaton.classify(&g).unwrap();
        (original != via_automaton)
            .then(|| format!("n={n} mask={mask:#b}: {original:?} vs {via_automaton:?}"))
    }));

    report(
        4,
        "the normalized system is shallow and its automaton agrees with the original at u",
        failures,
    );
}

#[test]
fn criterion_5_inductive_semantics_of_acyclic_systems() {
    let mut rng = common::rng(0x5eed_0005);
    let mut failures: Vec<String> = Vec::new();
    for case in 0..100 {
        let sys = common::random_acyclic_system(&mut rng, 4, 3);
        for graph_case in 0..4 {
            let x = gfl::formula::VarId(0);
            let input = common::random_graph(&mut rng, 4, sys.variable(x).rank, 2, 5);
            let fcg = sys.fcg(x, &input).unwrap();
            if !fcg.is_acyclic() {
                failures.push(format!("case {case}.{graph_case}: cyclic FCG"));
                continue;
            }
            let verdict = fcg.verdict_at(EvalNodeId(0)).unwrap();
            if verdict == Verdict::Indeterminate {
                failures.push(format!("case {case}.{graph_case}: indeterminate"));
                continue;
            }
            let sat = sys.satisfies(&input, &Formula::Var(x)).unwrap();
            if (verdict == Verdict::Accepted) != sat {
                failures.push(format!(
                    "case {case}.{graph_case}: fixed point {verdict:?} but oracle {sat}"
                ));
            }
        }
    }
    report(
        5,
        "on acyclic systems the FCG is acyclic, total, and equal to the inductive oracle",
        failures,
    );
}

#[test]
fn criterion_6_cut_compatibility() {
    let mut rng = common::rng(0x5eed_0006);
    let mut failures: Vec<String> = Vec::new();
    let mut cases = 0;
    while cases < 500 {
        use rand::Rng as _;
        let (front, rear) = (rng.random_range(0..=2), rng.random_range(0..=2));
        let host = common::random_graph(&mut rng, 4, front, rear, 5);
        let outer_rear = rng.random_range(0..=2);
        let outer: Vec<FrontalHandle> =
            host.frontal_subgraphs(outer_rear).into_iter().collect();
        if outer.is_empty() {
            continue;
        }
        let first = &outer[rng.random_range(0..outer.len())];
        let remainder = host.cut_off(first);
        let inner_rear = rng.random_range(0..=2);
        let inner: Vec<FrontalHandle> =
            remainder.frontal_subgraphs(inner_rear).into_iter().collect();
        if inner.is_empty() {
            continue;
        }
        let second = &inner[rng.random_range(0..inner.len())];
        cases += 1;

        let composed = first.compose(second);
        if let Err(e) = composed.validate(&host) {
            failures.push(format!("case {cases}: composed handle invalid: {e}"));
            continue;
        }
        if host.cut_off(&composed) != remainder.cut_off(second) {
            failures.push(format!("case {cases}: cuts differ"));
        }
        let glued = host
            .extract(first)
            .concatenate(&remainder.extract(second))
            .expect("types fit by construction");
        if !host.extract(&composed).is_isomorphic(&glued) {
            failures.push(format!("case {cases}: extraction is not the concatenation"));
        }
    }
    report(
        6,
        "cutting a composed handle equals cutting its parts in sequence (500 random cases)",
        failures,
    );
}

#[test]
fn criterion_7_least_fixed_point_of_evolution() {
    let mut rng = common::rng(0x5eed_0007);
    let mut failures: Vec<String> = Vec::new();
    for case in 0..200 {
        let g = common::random_eval_graph(&mut rng, 6);
        let chain = g.evolution_chain();
        if chain.len() > g.node_count() + 1 {
            failures.push(format!("case {case}: chain longer than |nodes| rounds"));
        }
        if !chain.windows(2).all(|w| w[0].is_below(&w[1])) {
            failures.push(format!("case {case}: chain is not monotone"));
        }
        let fixed = chain.last().unwrap();
        if &g.evolve(fixed) != fixed {
            failures.push(format!("case {case}: result is not a fixed point"));
        }
        for other in common::all_fixed_points(&g) {
            if !fixed.is_below(&other) {
                failures.push(format!("case {case}: a smaller fixed point exists"));
                break;
            }
        }
    }
    report(
        7,
        "evolution chains are monotone, short, and reach the least fixed point (200 cases)",
        failures,
    );
}

#[test]
fn criterion_8_matcher_against_the_brute_force_oracle() {
    let mut rng = common::rng(0x5eed_0008);
    let mut failures: Vec<String> = Vec::new();
    for case in 0..80 {
        use rand::Rng as _;
        let front = rng.random_range(0..=2usize);
        let rear = rng.random_range(0..=2usize);
        let ex = common::random_expression(&mut rng, 3, front, rear);
        if ex.expr_type().is_err() {
            failures.push(format!("case {case}: generator produced an ill-typed expression"));
            continue;
        }

        // matching agrees with enumerate-and-test
        for host_case in 0..2 {
            let host_rear = rng.random_range(0..=2);
            let host = common::random_graph(&mut rng, 4, front, host_rear, 5);
            let got = ex.match_expression(&host).unwrap();
            let want: std::collections::BTreeSet<FrontalHandle> = host
                .frontal_subgraphs(rear)
                .into_iter()
                .filter(|h| ex.member(&host.extract(h)).unwrap())
                .collect();
            if got != want {
                failures.push(format!(
                    "case {case}.{host_case}: {} matched, oracle {}",
                    got.len(),
                    want.len()
                ));
            }
        }

        // the non-permuting rewrite preserves membership and leaves no
        // permuting star
        let np = ex.non_permuting().unwrap();
        if !np.is_non_permuting().unwrap() {
            failures.push(format!("case {case}: rewrite left a permuting star"));
        }
        for sub in np.subexpressions() {
            if let GraphExpression::Star(operand) = sub {
                if !operand.permutation_set().unwrap().is_empty() {
                    failures.push(format!("case {case}: star operand still has permutations"));
                }
            }
        }
        for member_case in 0..3 {
            let g = common::random_graph(&mut rng, 4, front, rear, 4);
            let before = ex.member(&g).unwrap();
            let after = np.member(&g).unwrap();
            if before != after {
                failures.push(format!(
                    "case {case}.{member_case}: member changed from {before} to {after}"
                ));
            }
        }
    }
    report(
        8,
        "match_expression equals the enumeration oracle; non_permuting preserves the language",
        failures,
    );
}

#[test]
fn criterion_9_round_trips_determinism_and_dot() {
    let mut failures: Vec<String> = Vec::new();

    // corpus files: structural round trip and byte idempotence
    for file in ["ham.gfa", "ham.gfs", "cycle.gfe", "triangle.gfg", "path2.gfg", "loop1.gfg", "empty.gfg", "star3.gfg"] {
        let spec = match SpecFile::parse(&common::read_corpus(file)) {
            Ok(spec) => spec,
            Err(e) => {
                failures.push(format!("{file}: {e}"));
                continue;
            }
        };
        let once = spec.serialize();
        match SpecFile::parse(&once) {
            Ok(again) => {
                if again != spec {
                    failures.push(format!("{file}: reparse differs"));
                }
                if again.serialize() != once {
                    failures.push(format!("{file}: serialization not idempotent"));
                }
            }
            Err(e) => failures.push(format!("{file}: serialized output fails to parse: {e}")),
        }
    }

    // programmatic values survive the format
    let mut rng = common::rng(0x5eed_0009);
    for case in 0..25 {
        let automaton = common::random_automaton(&mut rng, 4);
        let system = common::random_acyclic_system(&mut rng, 3, 2);
        let spec = SpecFile {
            alphabet: automaton.alphabet().clone(),
            graphs: Vec::new(),
            exprs: vec![(
                "E".into(),
                common::random_expression(&mut rng, 2, 0, 1),
            )],
            system: Some(system),
            automaton: Some(automaton),
        };
        let text = spec.serialize();
        match SpecFile::parse(&text) {
            Ok(parsed) => {
                if parsed != spec.normalized() {
                    failures.push(format!("case {case}: parse(serialize(s)) != normalized(s)"));
                }
                if parsed.serialize() != text {
                    failures.push(format!("case {case}: second serialization differs"));
                }
            }
            Err(e) => failures.push(format!("case {case}: output failed to parse: {e}\n{text}")),
        }
    }

    // repeated in-process pipelines are byte-identical, and DOT is well-formed
    let sys = samples::ham_system();
    let u = sys.var_named("u").unwrap();
    let fcg1 = sys.fcg(u, &samples::cycle_graph(3)).unwrap();
    let fcg2 = sys.fcg(u, &samples::cycle_graph(3)).unwrap();
    let render = |fcg: gfl::eval::EvaluationGraph<gfl::formula::FormulaConfiguration>| {
        let labeled = fcg.map_payload(|c| format!("{:?}/{:?}", c.occurrence, c.sign));
        let fp = labeled.least_fixed_point();
        dot::to_dot(&labeled, &fp)
    };
    let dot1 = render(fcg1);
    let dot2 = render(fcg2);
    if dot1 != dot2 {
        failures.push("repeated FCG DOT exports differ".into());
    }
    if let Err(e) = common::check_dot(&dot1) {
        failures.push(format!("FCG DOT is not well-formed: {e}"));
    }
    let ham = samples::ham_automaton();
    let cg = ham.configuration_graph(&samples::cycle_graph(3)).unwrap();
    let labeled = cg.map_payload(|c| format!("{}", c.state.0));
    let fp = labeled.least_fixed_point();
    if let Err(e) = common::check_dot(&dot::to_dot(&labeled, &fp)) {
        failures.push(format!("configuration DOT is not well-formed: {e}"));
    }

    report(
        9,
        "parse/serialize round-trips, deterministic output, and grammar-valid DOT",
        failures,
    );
}
