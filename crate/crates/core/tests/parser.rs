use std::collections::BTreeMap;
use std::time::Instant;

use htnplan::hddl::{
    parse_domain, parse_domain_bytes, parse_problem, parse_problem_bytes, LiftedDomain,
};
use htnplan_testkit::{benchmarks, hddl_corpus};
use proptest::prelude::*;

#[test]
fn bundled_corpus_round_trips() {
    let start = Instant::now();
    let (domain_files, problem_files) = hddl_corpus();
    assert!(domain_files.len() >= 5, "{domain_files:?}");
    assert!(problem_files.len() >= 12, "{problem_files:?}");

    let mut domains: BTreeMap<String, LiftedDomain> = BTreeMap::new();
    for path in &domain_files {
        let d = parse_domain(&std::fs::read_to_string(path).unwrap())
            .unwrap_or_else(|e| panic!("{}:{e}", path.display()));
        let printed = d.to_string();
        let again = parse_domain(&printed)
            .unwrap_or_else(|e| panic!("{}: reprint: {e}\n{printed}", path.display()));
        assert_eq!(d, again, "{}", path.display());
        assert_eq!(printed, again.to_string());
        domains.insert(d.name.clone(), d);
    }
    for path in &problem_files {
        let text = std::fs::read_to_string(path).unwrap();
        let name = text
            .split("(:domain")
            .nth(1)
            .unwrap()
            .split(')')
            .next()
            .unwrap()
            .trim()
            .to_lowercase();
        let d = &domains[&name];
        let p = parse_problem(&text, d).unwrap_or_else(|e| panic!("{}:{e}", path.display()));
        let printed = p.to_string();
        let again = parse_problem(&printed, d)
            .unwrap_or_else(|e| panic!("{}: reprint: {e}\n{printed}", path.display()));
        assert_eq!(p, again, "{}", path.display());
        assert_eq!(printed, again.to_string());
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "{:?}", start.elapsed());
}

#[test]
fn towers_structure() {
    let d =
        parse_domain(&std::fs::read_to_string(benchmarks().join("towers/domain.hddl")).unwrap())
            .unwrap();
    assert_eq!(d.tasks.len(), 2);
    assert_eq!(d.methods.len(), 3);
    assert_eq!(d.actions.len(), 1);
    assert_eq!(d.predicates.len(), 5);
    assert_eq!(d.predicate("on").unwrap().params.len(), 2);
    assert!(d.is_subtype("ring", "object"));

    let p = parse_problem(
        &std::fs::read_to_string(benchmarks().join("towers/p03.hddl")).unwrap(),
        &d,
    )
    .unwrap();
    assert_eq!(p.initial_network.len(), 1);
    assert_eq!(p.initial_network[0].name, "shift-tower");
    assert_eq!(p.initial_network[0].args, ["r3", "p1", "p3", "p2"]);
}

#[test]
fn errors_point_into_the_source() {
    let text = "(define (domain d)\n  (:predicates (p))\n  (:action a\n    :precondition (q)))";
    let e = parse_domain(text).unwrap_err();
    assert_eq!((e.pos.line, e.pos.col), (4, 20), "{e}");

    let e = parse_domain("(define (domain d)\n  (:action a").unwrap_err();
    assert!(e.pos.line >= 1 && e.pos.line <= 2, "{e}");
}

fn within(text: &[u8], line: u32, col: u32) -> bool {
    let lines: Vec<&[u8]> = text.split(|&b| b == b'\n').collect();
    line >= 1
        && (line as usize) <= lines.len()
        && col >= 1
        && (col as usize) <= lines[line as usize - 1].len() + 1
}

fn hddl_fragment() -> impl Strategy<Value = Vec<u8>> {
    let tokens = prop::sample::select(vec![
        "(",
        ")",
        "(define",
        "(domain d)",
        "(problem q)",
        "(:domain d)",
        ":parameters",
        "(:action a",
        "(:task t",
        "(:method m",
        ":task",
        ":precondition",
        ":effect",
        "(and",
        "(not",
        "(p ?x)",
        "?x",
        "- object",
        "(:types",
        "(:predicates",
        ":ordered-subtasks",
        "(:objects",
        "(:htn",
        "(:init",
        "(:goal",
        "\n",
        " ",
        ";c\n",
        "é",
    ]);
    prop::collection::vec(tokens, 0..40).prop_map(|t| t.concat().into_bytes())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        if let Err(e) = parse_domain_bytes(&bytes) {
            prop_assert!(within(&bytes, e.pos.line, e.pos.col), "{e}");
        }
        let d = parse_domain("(define (domain d) (:predicates (p ?x)))").unwrap();
        if let Err(e) = parse_problem_bytes(&bytes, &d) {
            prop_assert!(within(&bytes, e.pos.line, e.pos.col), "{e}");
        }
    }

    #[test]
    fn token_soup_errors_stay_in_bounds(bytes in hddl_fragment()) {
        match parse_domain_bytes(&bytes) {
            Ok(d) => prop_assert_eq!(parse_domain(&d.to_string()).unwrap(), d),
            Err(e) => prop_assert!(within(&bytes, e.pos.line, e.pos.col), "{}", e),
        }
    }

    #[test]
    fn generated_domains_round_trip(seed in any::<u64>()) {
        let m = htnplan_testkit::micro::Micro::random(seed);
        let d = parse_domain(&m.domain_text()).unwrap();
        prop_assert_eq!(parse_domain(&d.to_string()).unwrap(), d.clone());
        let p = parse_problem(&m.problem_text(), &d).unwrap();
        prop_assert_eq!(parse_problem(&p.to_string(), &d).unwrap(), p);
    }
}
