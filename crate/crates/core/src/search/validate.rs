use thiserror::Error;

use super::{SearchResult, SearchStatus, Step};
use crate::ground::{GroundedModel, TaskRef};

/// First violated step of a replayed derivation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {index}: {reason}")]
pub struct ValidationError {
    pub index: usize,
    pub reason: String,
}

fn fail<T>(index: usize, reason: impl Into<String>) -> Result<T, ValidationError> {
    Err(ValidationError {
        index,
        reason: reason.into(),
    })
}

/// Replays `result.derivation` from the initial state and network.
///
/// Checks that every method decomposes the current head, every operator
/// is the head and applicable, the network ends empty with the goals
/// satisfied, and the extracted primitive sequence equals `result.plan`.
/// Errors after the last step carry `index == derivation.len()`.
pub fn validate(model: &GroundedModel, result: &SearchResult) -> Result<(), ValidationError> {
    let n = result.derivation.len();
    if result.status != SearchStatus::Solved {
        return fail(0, format!("status is {}", result.status));
    }
    let mut state = model.initial_state.clone();
    // Reversed so the head is at the end.
    let mut network: Vec<TaskRef> = model.initial_network.iter().rev().copied().collect();
    let mut plan = Vec::new();
    for (i, step) in result.derivation.iter().enumerate() {
        let Some(head) = network.pop() else {
            return fail(i, "network is already empty");
        };
        match (*step, head) {
            (Step::Method(m), TaskRef::Compound(t)) => {
                let Some(method) = model.methods.get(m as usize) else {
                    return fail(i, format!("unknown method {m}"));
                };
                if method.task != t {
                    return fail(
                        i,
                        format!(
                            "method {} does not decompose {}",
                            method.name,
                            model.task_name(head)
                        ),
                    );
                }
                network.extend(method.subtasks.iter().rev());
            }
            (Step::Operator(o), TaskRef::Primitive(p)) if o == p => {
                let op = &model.operators[o as usize];
                if !op.applicable(&state) {
                    return fail(i, format!("precondition of {} does not hold", op.name));
                }
                state = op.apply(&state);
                if !op.synthetic {
                    plan.push(op.name.clone());
                }
            }
            (s, h) => {
                return fail(
                    i,
                    format!("{s:?} does not match head {}", model.task_name(h)),
                )
            }
        }
    }
    if !network.is_empty() {
        return fail(n, format!("{} tasks remain", network.len()));
    }
    if !model.goals.is_subset(&state) {
        return fail(n, "goals do not hold in the final state");
    }
    if let Some(k) =
        (0..plan.len().max(result.plan.len())).find(|&k| plan.get(k) != result.plan.get(k))
    {
        return fail(n, format!("plan differs from the derivation at action {k}"));
    }
    if result.plan_length != result.plan.len() {
        return fail(n, "plan length does not match the plan");
    }
    Ok(())
}
