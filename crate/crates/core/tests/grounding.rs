use std::collections::BTreeSet;

use htnplan::ground::{
    dump, fact_holds, parse_fact_name, state_explicit_repr, GroundError, GroundOptions,
    GroundedModel, StateBitset, TaskRef, MPREC_PREFIX,
};
use htnplan_testkit::micro::Micro;
use htnplan_testkit::{benchmarks, brute, ground_text, lifted, load};
use proptest::prelude::*;

const OPTION_SETS: [(bool, bool); 4] = [(true, true), (true, false), (false, true), (false, false)];

fn options(strip_static: bool, relaxed_pruning: bool) -> GroundOptions {
    GroundOptions {
        strip_static,
        relaxed_pruning,
        ..GroundOptions::default()
    }
}

fn ground_micro(m: &Micro, strip: bool, relaxed: bool) -> Result<GroundedModel, GroundError> {
    ground_text(
        &m.domain_text(),
        &m.problem_text(),
        &options(strip, relaxed),
    )
}

/// Compares the grounder with the brute-force instantiator on one seed.
/// Returns whether the instance grounded without error.
fn check_against_oracle(seed: u64, strip: bool, relaxed: bool) -> bool {
    let m = Micro::random(seed);
    let got = ground_micro(&m, strip, relaxed);
    let want = brute::ground(&m, strip, relaxed);
    match (got, want) {
        (Ok(model), Some(want)) => {
            let have = brute::observed(&model);
            assert_eq!(have, want, "seed {seed} strip={strip} relaxed={relaxed}\n{}{}", m.domain_text(), m.problem_text());
            assert_eq!(model.facts.len(), want.facts.len());
            assert_eq!(
                model.operators.len(),
                want.operators.len() + want.checked_methods.len(),
                "one check operator per checked method"
            );
            true
        }
        (Err(GroundError::TriviallyUnsolvable(_)), None) => false,
        (got, want) => panic!(
            "seed {seed} strip={strip} relaxed={relaxed}: grounder {got:?} vs oracle {want:?}\n{}{}",
            m.domain_text(),
            m.problem_text()
        ),
    }
}

#[test]
fn counts_match_brute_force_on_random_micro_domains() {
    let mut grounded = 0;
    for seed in 0..300 {
        for (strip, relaxed) in OPTION_SETS {
            grounded += check_against_oracle(seed, strip, relaxed) as usize;
        }
    }
    assert!(grounded >= 200, "only {grounded} instances grounded");
}

#[test]
fn grounded_models_agree_with_lifted_semantics() {
    let mut explored = 0;
    let mut plans = 0;
    for seed in 0..300 {
        let m = Micro::random(seed);
        for (strip, relaxed) in OPTION_SETS {
            let Ok(model) = ground_micro(&m, strip, relaxed) else {
                continue;
            };
            let e = lifted::explore(&m, &model, 5_000, 8)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            explored += 1;
            plans += e.plans_replayed;
        }
    }
    assert!(explored >= 200);
    assert!(plans >= 50, "only {plans} plans replayed");
}

#[test]
fn static_stripping_preserves_solvability() {
    let mut compared = 0;
    let mut solvable = 0;
    for seed in 0..300 {
        let m = Micro::random(seed);
        let verdict = |strip: bool, relaxed: bool| match ground_micro(&m, strip, relaxed) {
            Err(_) => Some(false),
            Ok(model) => lifted::explore(&m, &model, 5_000, 8).unwrap().solvable,
        };
        let reference = verdict(false, false);
        for (strip, relaxed) in OPTION_SETS {
            if let (Some(a), Some(b)) = (reference, verdict(strip, relaxed)) {
                assert_eq!(a, b, "seed {seed} strip={strip} relaxed={relaxed}");
                compared += 1;
                solvable += a as usize;
            }
        }
    }
    assert!(compared >= 400);
    assert!(solvable >= 40);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn precondition_checks_match_lifted_preconditions(seed in any::<u64>()) {
        let m = Micro::random(seed);
        if let Ok(model) = ground_micro(&m, true, true) {
            let e = lifted::explore(&m, &model, 5_000, 8);
            prop_assert!(e.is_ok(), "{:?}", e);
        }
    }

    #[test]
    fn oracle_agrees_for_any_seed(seed in any::<u64>()) {
        for (strip, relaxed) in OPTION_SETS {
            check_against_oracle(seed, strip, relaxed);
        }
    }

    #[test]
    fn model_is_well_formed(seed in any::<u64>()) {
        let m = Micro::random(seed);
        if let Ok(model) = ground_micro(&m, true, true) {
            for (i, f) in model.facts.iter().enumerate() {
                prop_assert_eq!(f.id as usize, i);
            }
            let nfacts = model.num_facts();
            for op in &model.operators {
                prop_assert!(!op.add.intersects(&op.del));
                for bits in [&op.pre, &op.add, &op.del] {
                    prop_assert!(bits.ones().all(|b| b < nfacts));
                }
            }
            prop_assert!(model.initial_state.ones().all(|b| b < nfacts));
            prop_assert!(model.goals.ones().all(|b| b < nfacts));
            for (i, t) in model.compound_tasks.iter().enumerate() {
                for &mid in &t.methods {
                    prop_assert_eq!(model.methods[mid as usize].task as usize, i);
                }
            }
            let resolves = |t: &TaskRef| match *t {
                TaskRef::Primitive(o) => (o as usize) < model.operators.len(),
                TaskRef::Compound(c) => (c as usize) < model.compound_tasks.len(),
            };
            prop_assert!(model.initial_network.iter().all(resolves));
            for gm in &model.methods {
                prop_assert!(gm.subtasks.iter().all(resolves));
                if let Some(p) = gm.precondition_op {
                    prop_assert_eq!(gm.subtasks[0], TaskRef::Primitive(p));
                }
            }
        }
    }
}

const ROUTE_DOMAIN: &str = r#"
(define (domain route)
  (:requirements :typing :hierarchy :method-preconditions)
  (:types place robot - object)
  (:predicates (adjacent ?a ?b - place) (at ?r - robot ?p - place))
  (:task go :parameters (?r - robot ?to - place))
  (:method m-step
    :parameters (?r - robot ?from ?to - place)
    :task (go ?r ?to)
    :precondition (at ?r ?from)
    :ordered-subtasks (move ?r ?from ?to))
  (:action move
    :parameters (?r - robot ?from ?to - place)
    :precondition (and (at ?r ?from) (adjacent ?from ?to))
    :effect (and (not (at ?r ?from)) (at ?r ?to))))
"#;

const ROUTE_PROBLEM: &str = r#"
(define (problem route-1)
  (:domain route)
  (:objects r - robot w1 w2 w3 - place)
  (:htn :parameters () :ordered-subtasks (and (t0 (go r w2))))
  (:init (at r w1) (adjacent w1 w2) (adjacent w2 w3)))
"#;

#[test]
fn static_predicates_leave_the_fact_table() {
    let m = ground_text(ROUTE_DOMAIN, ROUTE_PROBLEM, &GroundOptions::default()).unwrap();
    assert!(m.facts.iter().all(|f| f.predicate() != "adjacent"));
    let kept = ground_text(ROUTE_DOMAIN, ROUTE_PROBLEM, &options(false, true)).unwrap();
    assert!(kept.facts.iter().any(|f| f.predicate() == "adjacent"));
}

#[test]
fn method_preconditions_become_check_operators() {
    let m = ground_text(ROUTE_DOMAIN, ROUTE_PROBLEM, &GroundOptions::default()).unwrap();
    let method = m
        .methods
        .iter()
        .find(|x| x.name == "m-step[r,w1,w2]")
        .unwrap();
    let check = &m.operators[method.precondition_op.unwrap() as usize];
    assert_eq!(method.subtasks[0], TaskRef::Primitive(check.id));
    assert_eq!(check.name, format!("{MPREC_PREFIX}m-step[r,w1,w2]"));
    assert_eq!(check.cost, 0);
    assert!(check.synthetic);
    assert!(check.add.is_empty() && check.del.is_empty());
    let pre: Vec<String> = check.pre.ones().map(|i| m.facts[i].name.clone()).collect();
    assert_eq!(pre, ["at[r,w1]"]);
}

#[test]
fn two_objects_one_unary_action() {
    let domain = r#"
(define (domain flip)
  (:requirements :hierarchy)
  (:predicates (up ?x))
  (:task raise :parameters (?x))
  (:method m-raise :parameters (?x) :task (raise ?x) :ordered-subtasks (lift ?x))
  (:action lift :parameters (?x) :precondition () :effect (up ?x)))"#;
    let problem = r#"
(define (problem flip-2)
  (:domain flip)
  (:objects a b)
  (:htn :parameters () :ordered-subtasks (and (t0 (raise a)) (t1 (raise b))))
  (:init))"#;
    let m = ground_text(domain, problem, &GroundOptions::default()).unwrap();
    // Hand enumeration: lift[a], lift[b] and their effects up[a], up[b].
    assert_eq!(m.facts.len(), 2);
    assert_eq!(m.operators.len(), 2);
}

#[test]
fn unreachable_initial_task_is_trivially_unsolvable() {
    let problem = r#"
(define (problem route-2)
  (:domain route)
  (:objects r - robot w1 w2 w3 - place)
  (:htn :parameters () :ordered-subtasks (and (t0 (go r w3))))
  (:init (adjacent w1 w2) (adjacent w2 w3)))"#;
    let e = ground_text(ROUTE_DOMAIN, problem, &GroundOptions::default()).unwrap_err();
    assert!(matches!(e, GroundError::TriviallyUnsolvable(_)), "{e}");
}

#[test]
fn instantiation_cap_is_enforced() {
    let opts = GroundOptions {
        instantiation_cap: 3,
        ..GroundOptions::default()
    };
    let e = ground_text(ROUTE_DOMAIN, ROUTE_PROBLEM, &opts).unwrap_err();
    assert_eq!(e, GroundError::CapExceeded { cap: 3 });
}

#[test]
fn explicit_state_rendering() {
    let b = benchmarks().join("rover");
    let m = load(&b.join("domain.hddl"), &b.join("p01.hddl"));
    assert!(state_explicit_repr(&m, &m.empty_state()).is_empty());
    let id = m.fact_id("communicated_soil_data[waypoint1]").unwrap() as usize;
    let s = StateBitset::from_ids(m.num_facts(), [id]);
    assert_eq!(
        state_explicit_repr(&m, &s),
        ["+communicated_soil_data[waypoint1]"]
    );

    let three = ground_text(
        "(define (domain d) (:predicates (p) (q) (r)) (:task t :parameters ())
           (:method mt :parameters () :task (t) :ordered-subtasks (a))
           (:action a :parameters () :precondition (and (p) (q) (r)) :effect (and (not (p)) (not (q)) (not (r)))))",
        "(define (problem x) (:domain d) (:htn :parameters () :ordered-subtasks (and (t0 (t)))) (:init (p) (q) (r)))",
        &GroundOptions::default(),
    )
    .unwrap();
    let full = StateBitset::from_ids(3, 0..3);
    assert_eq!(state_explicit_repr(&three, &full), ["+p[]", "+q[]", "+r[]"]);
}

#[test]
fn fact_holds_reads_single_bits() {
    let s = StateBitset::from_ids(4, [1, 3]);
    assert!(fact_holds(&s, 1));
    assert!(!fact_holds(&s, 2));
    let t = benchmarks().join("towers");
    let m = load(&t.join("domain.hddl"), &t.join("p03.hddl"));
    let id = m.fact_id("on[r1,r2]").unwrap() as usize;
    assert!(fact_holds(&m.initial_state, id));
}

#[test]
fn fact_names_parse_like_the_reference() {
    assert_eq!(
        parse_fact_name("+at[r1,w2]"),
        (Some("at".into()), vec!["r1".into(), "w2".into()])
    );
    assert_eq!(
        parse_fact_name("-empty[s]"),
        (Some("empty".into()), vec!["s".into()])
    );
    assert_eq!(parse_fact_name("garbage"), (None, vec![]));
}

#[test]
fn dump_is_deterministic() {
    for suite in htnplan_testkit::mini_suite() {
        for p in &suite.problems {
            let a = dump(&load(&suite.domain, p));
            let b = dump(&load(&suite.domain, p));
            assert_eq!(a, b);
            let kinds: BTreeSet<&str> = a.lines().filter_map(|l| l.split(' ').next()).collect();
            for k in ["F", "O", "T", "M", "INIT", "GOAL", "TN"] {
                assert!(kinds.contains(k), "{} lacks {k} records", p.display());
            }
        }
    }
}
