use std::fmt::Write;

use super::{GroundedModel, StateBitset, TaskRef};

fn ids(s: &StateBitset) -> String {
    s.ones()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn refs(r: &[TaskRef]) -> String {
    r.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Line-oriented text rendering of a model, stable across platforms.
///
/// Complement facts are written with a leading `-`.
pub fn dump(model: &GroundedModel) -> String {
    let mut out = String::new();
    for f in &model.facts {
        let sign = if f.negated { "-" } else { "" };
        let _ = writeln!(out, "F {} {sign}{}", f.id, f.name);
    }
    for o in &model.operators {
        let _ = writeln!(
            out,
            "O {} {} {} pre={} add={} del={}",
            o.id,
            o.name,
            o.cost,
            ids(&o.pre),
            ids(&o.add),
            ids(&o.del)
        );
    }
    for t in &model.compound_tasks {
        let _ = writeln!(out, "T {} {}", t.id, t.name);
    }
    for m in &model.methods {
        let _ = writeln!(
            out,
            "M {} {} task={} sub={}",
            m.id,
            m.name,
            m.task,
            refs(&m.subtasks)
        );
    }
    let _ = writeln!(out, "INIT {}", ids(&model.initial_state));
    let _ = writeln!(out, "GOAL {}", ids(&model.goals));
    let _ = writeln!(out, "TN {}", refs(&model.initial_network));
    out
}
