use std::time::Duration;

use htnplan::ground::{GroundOptions, GroundedModel};
use htnplan::heuristic::HeuristicSpec;
use htnplan::search::{solve, validate, Algorithm, SearchConfig, SearchResult, SearchStatus, Step};
use htnplan_testkit::micro::Micro;
use htnplan_testkit::ucs::{reachable_nodes, uniform_cost};
use htnplan_testkit::{benchmarks, ground_text, load};

fn run(model: &GroundedModel, spec: &HeuristicSpec, config: &SearchConfig) -> SearchResult {
    let r = solve(model, spec, config).unwrap();
    if r.status == SearchStatus::Solved {
        validate(model, &r).unwrap_or_else(|e| panic!("{e}: {:?}", r.plan));
    }
    r
}

fn blind_astar(model: &GroundedModel) -> SearchResult {
    run(
        model,
        &HeuristicSpec::Blind,
        &SearchConfig::new(Algorithm::Astar),
    )
}

fn tdg() -> HeuristicSpec {
    HeuristicSpec::Tdg {
        primitive_cost: None,
    }
}

fn micro(name: &str, problem: &str) -> GroundedModel {
    let dir = benchmarks().join("micro");
    load(&dir.join(format!("{name}-domain.hddl")), &dir.join(problem))
}

fn towers_p03() -> GroundedModel {
    let dir = benchmarks().join("towers");
    load(&dir.join("domain.hddl"), &dir.join("p03.hddl"))
}

#[test]
fn blind_astar_matches_uniform_cost_search() {
    let mut models: Vec<(String, GroundedModel)> = vec![
        ("blocks-p1".into(), micro("blocks", "blocks-p1.hddl")),
        ("towers-p03".into(), towers_p03()),
    ];
    for seed in 0..400u64 {
        let m = Micro::random(seed);
        if let Ok(model) = ground_text(
            &m.domain_text(),
            &m.problem_text(),
            &GroundOptions::default(),
        ) {
            models.push((format!("seed {seed}"), model));
        }
    }
    let mut compared = 0;
    let mut solved = 0;
    for (label, model) in &models {
        if reachable_nodes(model, 10_000).is_none() {
            continue;
        }
        let oracle = uniform_cost(model);
        let r = blind_astar(model);
        assert_eq!(r.expanded, oracle.expanded, "{label}");
        assert_eq!(
            (r.status == SearchStatus::Solved).then_some(r.plan_cost),
            oracle.cost,
            "{label}"
        );
        compared += 1;
        solved += oracle.cost.is_some() as usize;
    }
    assert!(
        compared >= 20 && solved >= 20,
        "{compared} compared, {solved} solved"
    );
}

#[test]
fn blocks_fixture() {
    let r = blind_astar(&micro("blocks", "blocks-p1.hddl"));
    assert_eq!(r.status, SearchStatus::Solved);
    assert_eq!(
        r.plan,
        ["unstack[a,b]", "put-down[a]", "pick-up[b]", "stack[b,c]"]
    );
    assert_eq!(r.plan_cost, 4);
}

#[test]
fn towers_three_disks_take_seven_moves() {
    let model = towers_p03();
    for algorithm in Algorithm::ALL {
        let r = run(&model, &tdg(), &SearchConfig::new(algorithm));
        assert_eq!(r.status, SearchStatus::Solved, "{algorithm}");
        assert_eq!(r.plan_length, 7, "{algorithm}: {:?}", r.plan);
    }
}

#[test]
fn empty_network_is_solved_without_expanding() {
    let model = micro("noop", "noop-empty.hddl");
    for algorithm in Algorithm::ALL {
        let r = run(&model, &HeuristicSpec::Blind, &SearchConfig::new(algorithm));
        assert_eq!(
            (r.status, r.expanded, r.plan_length),
            (SearchStatus::Solved, 0, 0)
        );
    }
    let r = run(
        &micro("noop", "noop-idle.hddl"),
        &HeuristicSpec::Blind,
        &SearchConfig::new(Algorithm::Gbfs),
    );
    assert_eq!(r.plan, ["noop[]"]);
}

#[test]
fn node_budget_stops_exactly() {
    let model = towers_p03();
    for budget in [1, 2, 17, 40] {
        let config = SearchConfig {
            node_budget: Some(budget),
            ..SearchConfig::new(Algorithm::Astar)
        };
        let r = run(&model, &HeuristicSpec::Blind, &config);
        assert_eq!(
            (r.status, r.expanded),
            (SearchStatus::NodeBudgetExhausted, budget)
        );
    }
}

#[test]
fn time_limit_is_honored() {
    let dir = benchmarks().join("towers");
    let model = load(&dir.join("domain.hddl"), &dir.join("p05.hddl"));
    let config = SearchConfig {
        time_limit: Some(Duration::from_millis(300)),
        ..SearchConfig::new(Algorithm::Astar)
    };
    let start = std::time::Instant::now();
    let r = run(&model, &HeuristicSpec::Blind, &config);
    assert!(
        start.elapsed() < Duration::from_millis(800),
        "{:?}",
        start.elapsed()
    );
    assert!(
        matches!(r.status, SearchStatus::Timeout | SearchStatus::Solved),
        "{}",
        r.status
    );
}

#[test]
fn searches_are_deterministic() {
    for model in [towers_p03(), micro("blocks", "blocks-p1.hddl")] {
        for algorithm in Algorithm::ALL {
            let config = SearchConfig::new(algorithm);
            let a = run(&model, &tdg(), &config);
            let b = run(&model, &tdg(), &config);
            assert_eq!(
                (a.status, &a.plan, &a.derivation, a.expanded, a.generated),
                (b.status, &b.plan, &b.derivation, b.expanded, b.generated)
            );
        }
    }
}

#[test]
fn every_mini_suite_result_validates() {
    for suite in htnplan_testkit::mini_suite() {
        for problem in &suite.problems {
            let model = load(&suite.domain, problem);
            for algorithm in Algorithm::ALL {
                for spec in [HeuristicSpec::Blind, tdg()] {
                    let config = SearchConfig {
                        node_budget: Some(20_000),
                        ..SearchConfig::new(algorithm)
                    };
                    // `run` validates solved results.
                    run(&model, &spec, &config);
                }
            }
        }
    }
}

#[test]
fn validate_rejects_corrupted_derivations() {
    let model = micro("blocks", "blocks-p1.hddl");
    let good = blind_astar(&model);
    assert!(validate(&model, &good).is_ok());

    let mut r = good.clone();
    r.derivation.pop();
    assert!(validate(&model, &r).is_err());

    let mut r = good.clone();
    let first_op = r
        .derivation
        .iter()
        .position(|s| matches!(s, Step::Operator(_)))
        .unwrap();
    r.derivation.remove(first_op);
    assert!(validate(&model, &r).is_err());

    let mut r = good.clone();
    r.derivation.swap(0, 1);
    assert!(validate(&model, &r).is_err());

    let mut r = good.clone();
    r.plan.swap(0, 1);
    assert_eq!(validate(&model, &r).unwrap_err().index, r.derivation.len());

    let mut r = good.clone();
    r.plan_length += 1;
    assert!(validate(&model, &r).is_err());

    let mut r = good.clone();
    r.status = SearchStatus::Exhausted;
    assert!(validate(&model, &r).is_err());

    let mut r = good;
    r.derivation.push(Step::Method(0));
    assert!(validate(&model, &r).is_err());
}
