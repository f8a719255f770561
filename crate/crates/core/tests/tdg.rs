use std::time::Instant;

use htnplan::ground::{GroundedModel, StateBitset, TaskRef};
use htnplan::heuristic::{
    infinity_penalty, method_visits, tdg_fixpoint, Heuristic, Tdg, TdgCost, TdgTable,
    TDG_ABSTRACT_INIT,
};
use htnplan::search::{Network, SearchNode};
use htnplan_testkit::hierarchy::{decomposition_costs, hierarchy, random_acyclic};
use htnplan_testkit::ucs::uniform_cost;
use proptest::prelude::*;

use TaskRef::{Compound as C, Primitive as P};

const PRIMITIVE_COSTS: [Option<u64>; 4] = [None, Some(0), Some(1), Some(2)];

fn expected(model: &GroundedModel, primitive_cost: Option<u64>) -> Vec<TdgCost> {
    decomposition_costs(model, primitive_cost)
        .into_iter()
        .map(|s| s.first().map_or(TdgCost::Infinite, |&c| TdgCost::Finite(c)))
        .collect()
}

fn exact(model: &GroundedModel) -> TdgTable {
    tdg_fixpoint(model, None, TDG_ABSTRACT_INIT)
}

#[test]
fn matches_exhaustive_enumeration_on_random_hierarchies() {
    let start = Instant::now();
    let mut with_infinite = 0;
    let mut deep = 0;
    for seed in 0..300 {
        let model = random_acyclic(seed, 8);
        for pc in PRIMITIVE_COSTS {
            let want = expected(&model, pc);
            assert_eq!(
                tdg_fixpoint(&model, pc, TDG_ABSTRACT_INIT).costs,
                want,
                "seed {seed}, primitive cost {pc:?}"
            );
            with_infinite += want.contains(&TdgCost::Infinite) as usize;
            deep += (model.compound_tasks.len() >= 5) as usize;
        }
    }
    assert!(with_infinite > 50 && deep > 50, "{with_infinite} {deep}");
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn root_cost_equals_cheapest_plan() {
    // Without facts every decomposition is executable, so the cheapest
    // plan costs exactly the root's minimum decomposition cost.
    let mut solved = 0;
    for seed in 0..100 {
        let model = random_acyclic(seed, 5);
        let ucs = uniform_cost(&model);
        assert_eq!(
            ucs.cost,
            exact(&model).cost(&model, C(0)).finite(),
            "seed {seed}"
        );
        solved += ucs.cost.is_some() as usize;
    }
    assert!(solved > 30, "{solved}");
}

#[test]
fn self_recursion_with_an_exit() {
    // c0 -> a c0 | a
    let model = hierarchy(&[Some(1)], 1, &[(0, vec![P(0), C(0)]), (0, vec![P(0)])]);
    assert_eq!(exact(&model).cost(&model, C(0)), TdgCost::Finite(1));
}

#[test]
fn self_recursion_without_an_exit() {
    // c0 -> a c0
    let model = hierarchy(&[Some(1)], 1, &[(0, vec![P(0), C(0)])]);
    let table = exact(&model);
    assert_eq!(table.cost(&model, C(0)), TdgCost::Infinite);
    assert_eq!(table.clamped(7), vec![1, 7]);
}

#[test]
fn mutual_recursion() {
    // c0 -> a c1 | b b b ; c1 -> c0 | a c2 ; c2 -> c2 c1
    // c2 never terminates, so c1 = c0 and c0 = min(1 + c0, 3) = 3.
    let model = hierarchy(
        &[Some(1), Some(1)],
        3,
        &[
            (0, vec![P(0), C(1)]),
            (0, vec![P(1), P(1), P(1)]),
            (1, vec![C(0)]),
            (1, vec![P(0), C(2)]),
            (2, vec![C(2), C(1)]),
        ],
    );
    let table = exact(&model);
    assert_eq!(
        table.costs,
        vec![
            TdgCost::Finite(1),
            TdgCost::Finite(1),
            TdgCost::Finite(3),
            TdgCost::Finite(3),
            TdgCost::Infinite
        ]
    );
    assert_eq!(table.sweep(&model), table);
}

#[test]
fn synthetic_checks_are_free() {
    // c0 -> check a ; the check is a method-precondition operator.
    let model = hierarchy(&[None, Some(2)], 1, &[(0, vec![P(0), P(1)])]);
    assert_eq!(
        exact(&model).costs,
        vec![TdgCost::Finite(0), TdgCost::Finite(2), TdgCost::Finite(2)]
    );
    let unit = tdg_fixpoint(&model, Some(1), TDG_ABSTRACT_INIT);
    assert_eq!(
        unit.costs,
        vec![TdgCost::Finite(0), TdgCost::Finite(1), TdgCost::Finite(1)]
    );
}

#[test]
fn costs_above_the_initial_bound_stay_capped() {
    let model = hierarchy(&[Some(1)], 1, &[(0, vec![P(0); 10])]);
    assert_eq!(
        tdg_fixpoint(&model, None, 4).cost(&model, C(0)),
        TdgCost::Finite(4)
    );
    assert_eq!(
        tdg_fixpoint(&model, None, 10).cost(&model, C(0)),
        TdgCost::Finite(10)
    );
}

fn node(tasks: &[TaskRef]) -> SearchNode {
    SearchNode::new(StateBitset::new(0), Network::from_slice(tasks))
}

#[test]
fn empty_network_costs_nothing() {
    let model = random_acyclic(3, 4);
    assert_eq!(
        Tdg::new(&model, None).evaluate(&node(&[])).unwrap(),
        0.into()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fixpoint_is_stable_under_another_sweep(seed in any::<u64>(), pc in prop::sample::select(PRIMITIVE_COSTS.to_vec())) {
        let model = random_acyclic(seed, 8);
        let table = tdg_fixpoint(&model, pc, TDG_ABSTRACT_INIT);
        prop_assert_eq!(table.sweep(&model), table.clone());
        // Every method bounds its task from above.
        for m in &model.methods {
            let via = m.subtasks.iter().try_fold(0u64, |acc, &s| table.cost(&model, s).finite().map(|c| acc + c));
            if let Some(via) = via {
                prop_assert!(table.cost(&model, C(m.task)) <= TdgCost::Finite(via));
            }
        }
    }

    #[test]
    fn estimate_is_additive_and_touches_no_methods(seed in any::<u64>(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..6)) {
        let model = random_acyclic(seed, 8);
        let all: Vec<TaskRef> = (0..model.operators.len() as u32).map(P)
            .chain((0..model.compound_tasks.len() as u32).map(C)).collect();
        let tasks: Vec<TaskRef> = picks.iter().map(|i| *i.get(&all)).collect();
        let mut h = Tdg::new(&model, None);
        let clamped = exact(&model).clamped(infinity_penalty(&model));
        let before = method_visits();
        let whole = h.evaluate(&node(&tasks)).unwrap();
        let parts: i64 = tasks.iter().map(|&t| *h.evaluate(&node(&[t])).unwrap().numer()).sum();
        prop_assert_eq!(method_visits(), before);
        prop_assert_eq!(whole, parts.into());
        let direct: u64 = tasks.iter().map(|&t| clamped[model.task_index(t)]).sum();
        prop_assert_eq!(whole, (direct as i64).into());
    }
}
