//! A small hand-checked set of run records.

use htnplan::bench::{MemoryEnforcement, RunRecord, RunStatus};
use htnplan::search::Algorithm;

/// `(expanded, plan length)` of a solved cell, `None` for a timeout.
type Cell = Option<(u64, usize)>;

fn records_for(system: &str, cells: [[Cell; 3]; 6]) -> Vec<RunRecord> {
    let mut out = Vec::new();
    for (i, row) in cells.iter().enumerate() {
        for (alg, cell) in Algorithm::ALL.into_iter().zip(row) {
            out.push(RunRecord {
                domain: if i < 3 { "d1" } else { "d2" }.into(),
                problem: format!("p{}", i + 1),
                system: system.into(),
                algorithm: alg,
                // Unsolved cells carry a tiny expansion count that must never
                // reach an aggregate.
                status: if cell.is_some() {
                    RunStatus::Solved
                } else {
                    RunStatus::Timeout
                },
                expanded: cell.map_or(1, |c| c.0),
                plan_length: cell.map_or(1, |c| c.1),
                wall_time: 0.0,
                memory_enforcement: MemoryEnforcement::None,
                diagnostic: None,
            });
        }
    }
    out
}

/// Two systems over six problems in two domains. Columns are astar,
/// gbfs, wastar.
pub fn constructed() -> Vec<RunRecord> {
    let mut r = records_for(
        "a",
        [
            [Some((50, 5)), Some((20, 6)), Some((30, 5))],
            [None, Some((40, 8)), Some((40, 7))],
            [None, None, None],
            [Some((100, 10)), None, Some((90, 12))],
            [Some((7, 3)), Some((7, 3)), Some((7, 3))],
            [None, Some((300, 20)), None],
        ],
    );
    r.extend(records_for(
        "b",
        [
            [Some((25, 5)), None, Some((25, 4))],
            [Some((40, 7)), None, None],
            [Some((500, 9)), None, None],
            [None, None, None],
            [None, Some((10, 3)), Some((12, 3))],
            [Some((200, 18)), Some((250, 19)), None],
        ],
    ));
    r
}
