use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{CandidateRecord, CandidateStatus};
use crate::bench::RunRecord;
use crate::hel::{EvalBuiltin, Expr};

/// Opening sentence of the hints section.
pub const HINTS_INTRO: &str =
    "These insights were discovered through extensive experimentation on this domain. Use them.";

const HINTS_HEADER: &str = "## 4. Domain-specific hints";

/// Advice given when the previous candidate ran out of time.
pub const ADVICE_TIMEOUT: &str = "Anti-pattern A3: the previous program does per-node work that grows with \
the model. Every fact set it scans is paid for at every node; move that work to initialize (build small, \
targeted sets in `init`) and keep `eval` to a few lookups.";

/// Advice when the previous candidate lost to TDG and never reads the state.
pub const ADVICE_STATE: &str = "Anti-pattern A1: the previous program never reads the state (no \
`count-unsatisfied`, `count-true` or `any-true`), so it cannot tell apart nodes with the same pending \
network. Add a state-aware term, for example unsatisfied goal facts of the predicate the top-level tasks \
achieve.";

/// Advice when the previous candidate lost to TDG and has no `max`.
pub const ADVICE_SECOND_BOUND: &str = "The previous program uses a single estimate. Add a second, \
independent lower bound and combine the two with `max`.";

/// Advice when the previous candidate beat TDG.
pub const ADVICE_BETTER: &str =
    "The previous program expanded fewer nodes than TDG: the improvement is \
real. Keep its structure; tighten one of the existing terms or add a third component to the `max`.";

/// Advice when the previous candidate failed to parse or evaluate.
pub const ADVICE_ERROR: &str =
    "The previous program failed with the error shown above. Fix that error \
first; the message gives the line and column or the failing builtin.";

pub const KEEP_PREVIOUS: &str =
    "**Keep the previous program as your starting point and improve it; do not rewrite it from scratch.**";

/// The three categories of per-domain guidance.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HintBlock {
    #[serde(default)]
    pub representation_caveats: String,
    #[serde(default)]
    pub bottleneck: String,
    #[serde(default)]
    pub construction_guidance: String,
}

/// Everything that varies between prompts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub domain_name: String,
    pub domain_text: String,
    pub smallest_problem_text: String,
    pub largest_problem_text: String,
    pub hint_block: Option<HintBlock>,
    pub worked_example: String,
    /// Sections 5 to 8: fact format, goal access, state reads, interface.
    pub interface_docs: String,
}

impl PromptSpec {
    /// A spec with the stock worked example and interface sections.
    pub fn new(
        domain_name: impl Into<String>,
        domain_text: impl Into<String>,
        smallest_problem_text: impl Into<String>,
        largest_problem_text: impl Into<String>,
        hint_block: Option<HintBlock>,
    ) -> Self {
        PromptSpec {
            domain_name: domain_name.into(),
            domain_text: domain_text.into(),
            smallest_problem_text: smallest_problem_text.into(),
            largest_problem_text: largest_problem_text.into(),
            hint_block,
            worked_example: WORKED_EXAMPLE.to_owned(),
            interface_docs: INTERFACE_DOCS.to_owned(),
        }
    }
}

pub const WORKED_EXAMPLE: &str = r#"; Bottleneck: recursive compound tasks whose cheapest decomposition is long.
; Bound 1: decomposition cost of the pending network (tdg-table).
; Bound 2: goal facts still false; each needs at least one more action.
; Tie-break: fewer pending tasks, at 1/100 so it never outweighs a whole action.
(heuristic "example"
  (init
    (def cost (tdg-table 1 100))
    (def everything (task-pattern ""))
    (def goals (goal-facts "at")))
  (eval
    (+ (max (network-cost cost) (count-unsatisfied goals))
       (* 1/100 (pending-count everything)))))"#;

pub const INTERFACE_DOCS: &str = r#"## 5. Grounded fact format

The planner grounds the domain before search. A grounded fact is named
`+predicate[arg1,arg2]`: a sign, the predicate, and the arguments in
brackets separated by commas with no spaces. Facts introduced for negative
preconditions are named `-predicate[args]`. HDDL syntax never appears in a
grounded name.

    WRONG: (at truck-0 city-loc-1)
    WRONG: at truck-0 city-loc-1
    RIGHT: +at[truck-0,city-loc-1]

HEL builtins select facts by predicate name only, so you never write a
grounded name yourself:

    WRONG: (facts "(at ?v ?l)")
    WRONG: (facts "+at")
    RIGHT: (facts "at")

Static facts (never changed by any action) are removed during grounding and
cannot be selected; read them from the problem text instead.

## 6. Goal facts

The goal is a set of grounded facts, not a list of HDDL literals. Select
the goal facts of one predicate in `init`:

    (def goals (goal-facts "communicated_soil_data"))

`goals` then holds e.g. `+communicated_soil_data[waypoint1]`. A predicate
with no goal facts yields an empty set; counting over it gives 0.

## 7. Reading the state

States are bitsets. `count-unsatisfied`, `count-true` and `any-true` test
one bit per member of a fact set built in `init`, so their cost is the size
of that set, fixed before search starts.

    WRONG: (eval (count-unsatisfied (goal-facts "at")))   ; rejected: init builtin in eval
    RIGHT: (init (def goals (goal-facts "at")))
           (eval (count-unsatisfied goals))

Prefer small sets. `(facts "at")` over a large problem can hold thousands of
facts, and every node pays for all of them.

## 8. Program interface

A response contains exactly one program:

    (heuristic "NAME"
      (init (def SYMBOL INIT-EXPR) ...)
      (eval EXPR))

`init` runs once, before search. Each `def` binds a new symbol to one of:

| form                                   | value                                          |
|----------------------------------------|------------------------------------------------|
| `NUMBER`                               | a number                                       |
| `(tdg-table PRIMITIVE-COST ABSTRACT-INIT)` | per-task minimum decomposition cost         |
| `(goal-facts "pred")`                  | goal facts of `pred`                           |
| `(facts "pred")`                       | all grounded positive facts of `pred`          |
| `(task-pattern "text")`                | tasks whose grounded name contains `text`; `""` matches all |

`eval` is one expression computed at every search node:

| form                              | result                                                  |
|-----------------------------------|---------------------------------------------------------|
| `(network-cost TABLE)`            | sum of TABLE over the pending tasks                     |
| `(pending-count PATTERN)`         | pending tasks matching PATTERN                          |
| `(count-unsatisfied FACTS)`       | members of FACTS false in the state                     |
| `(count-true FACTS)`              | members of FACTS true in the state                      |
| `(any-true FACTS)`                | 1 if some member is true, else 0                        |
| `(+ a b ...)` `(* a b ...)`       | sum, product                                            |
| `(- a b)` `(- a)`                 | difference, negation                                    |
| `(/ a b)`                         | quotient; division by zero fails the program            |
| `(max a b ...)` `(min a b ...)`   | maximum, minimum                                        |
| `(if c a b)`                      | `a` when `c` is nonzero, else `b`                       |

Numbers are exact: integers, decimals (`0.25`) and fractions (`1/100`).
Symbols are bound once; redefinition is an error. `;` starts a comment.
Nothing else exists: no loops, no variables in `eval`, no I/O. A negative
result is clamped to 0 and reported; a type error (e.g. arithmetic on a
fact set) or overflow fails the program during search."#;

const MODEL_DOCS: &str = r#"## 10. Value types and the grounded model

The grounded model your program sees consists of:

- facts: `+pred[args]` (and `-pred[args]` for negated conditions);
- primitive tasks: one per grounded action, named `action[args]`, cost 1;
- precondition checks: zero-cost primitive tasks named
  `__mprec_<method>[args]`, placed first in a method whose precondition is
  not static; they test the method's precondition against the state;
- compound tasks: named `task[args]`, each with one or more methods;
- methods: an ordered list of subtasks replacing one compound task;
- the goal: a set of facts that must hold once the network is empty;
- a search node: the current state and the ordered list of pending tasks.

`init` values have four types: number, fact set, cost table (from
`tdg-table`), task pattern. Each builtin takes exactly the type shown in
section 8.

`(tdg-table P A)` solves, for every task, the cheapest decomposition into
primitive tasks where each action costs P and checks cost 0; A is the
starting estimate for compound tasks during that fixpoint (use a value at
least as large as any real decomposition, e.g. 100). A task with no finite
decomposition is charged a large constant."#;

const GUIDANCE_DOCS: &str = r#"## 11. Lower bounds and tie-breaking

A lower bound never exceeds the true number of remaining actions. The max
of two lower bounds is a lower bound; their sum usually is not. A tie-breaker
is a term smaller than one action (for example `(* 1/1000 X)` with X at most
a few hundred), added on top of a bound. It keeps the bound intact for
whole-action comparisons and orders nodes the bound cannot tell apart.
Terms of weight 1 or more are not tie-breakers: they change which nodes look
closest to the goal.

## 12. Winning patterns and anti-patterns

P1. Start from `(network-cost (tdg-table 1 100))`; it is the hierarchy-aware
    baseline and rarely worth dropping.

    (def c (tdg-table 1 100))  ...  (network-cost c)

P2. Combine independent bounds with `max`.

    (max (network-cost c) (count-unsatisfied goals))

P3. Count unsatisfied goal facts per goal predicate.

    (+ (count-unsatisfied soil) (count-unsatisfied rock))

P4. Break ties toward shorter pending networks.

    (* 1/100 (pending-count (task-pattern "")))

P5. Reward intermediate facts on the way to a goal (held samples, loaded
    packages) with a sub-unit discount.

    (* 1/1000 (- (count-true wanted) (count-true delivered)))

P6. Keep fact sets small and specific; name one predicate per set.

    (def delivered (goal-facts "at"))

A1. Ignoring the state. A program that only reads the network ranks every
    node with the same pending tasks equally.

    (eval (network-cost c))        ; sees no state at all

A2. Oversized tie-breakers. A weight of 1 or more on a tie-breaking count
    swamps the bound it was meant to refine.

    (+ (network-cost c) (* 5 (pending-count all)))

A3. Per-node work proportional to the model. Scanning every fact of a
    common predicate at every node times out on large problems.

    (count-true (facts "at"))      ; thousands of bits per node

A4. Negative or undefined values. Negative results are clamped to 0 and
    lose all information; division by a count that can be 0 fails search.

    (- (count-unsatisfied goals) 10)
    (/ 1 (count-true held))"#;

const PROCEDURE_DOCS: &str = r#"## 13. Required procedure and response format

Work through these steps and record the answers as `;` comments at the top
of the program:

1. Name the bottleneck: which compound tasks decompose into the most
   primitive tasks, and where does search branch.
2. List two or three independent lower bounds on the remaining actions.
3. Write `init`: build every table, pattern and fact set the bounds need.
4. Write `eval` as `(max bound1 bound2 ...)`.
5. If the domain has interchangeable objects, add sub-unit tie-breakers.

Respond with exactly one line `NAME: <name>` followed by exactly one fenced
code block tagged `hel` that contains the program. Use the same name in the
`(heuristic "...")` form. Write nothing after the code block."#;

/// Assembles the prompt; identical specs give identical text.
pub fn build_prompt(spec: &PromptSpec) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "## 1. Task\n\n\
         You are an expert in hierarchical planning and heuristic design. Write a \
         heuristic for the total-order HTN domain `{name}`. The heuristic is a program \
         in HEL, the expression language described below, and guides greedy best-first \
         search toward plans with few expanded nodes. Give the program a short \
         lower-case name in `(heuristic \"<name>\" ...)`.\n\n\
         ## 2. Domain definition\n\n```hddl\n{domain}\n```\n\n\
         ## 3. Training problems\n\n\
         The smallest problem, on which candidate heuristics are compared:\n\n```hddl\n{small}\n```\n\n\
         The largest problem of the benchmark set:\n\n```hddl\n{large}\n```\n\n",
        name = spec.domain_name,
        domain = spec.domain_text.trim_end(),
        small = spec.smallest_problem_text.trim_end(),
        large = spec.largest_problem_text.trim_end(),
    );
    if let Some(h) = &spec.hint_block {
        let _ = write!(
            s,
            "{HINTS_HEADER}\n\n{HINTS_INTRO}\n\n\
             ### Representation caveats\n\n{}\n\n\
             ### Search bottleneck\n\n{}\n\n\
             ### Construction guidance\n\n{}\n\n",
            h.representation_caveats.trim(),
            h.bottleneck.trim(),
            h.construction_guidance.trim(),
        );
    }
    let _ = write!(
        s,
        "{}\n\n## 9. Worked example\n\n```hel\n{}\n```\n\n{MODEL_DOCS}\n\n{GUIDANCE_DOCS}\n\n{PROCEDURE_DOCS}\n",
        spec.interface_docs.trim_end(),
        spec.worked_example.trim_end(),
    );
    s
}

fn mentions(e: &Expr, pred: &dyn Fn(EvalBuiltin) -> bool) -> bool {
    match e {
        Expr::Call(b, args) => pred(*b) || args.iter().any(|a| mentions(a, pred)),
        _ => false,
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

/// The base prompt followed by the previous candidate, its results next
/// to the TDG baseline, and advice keyed to how it failed.
pub fn build_refinement_prompt(
    base: &PromptSpec,
    prev: &CandidateRecord,
    baseline: &RunRecord,
) -> String {
    let mut s = build_prompt(base);
    let _ = write!(
        s,
        "\n## 14. Previous attempt\n\n{KEEP_PREVIOUS}\n\n```hel\n{}\n```\n\n\
         | metric         | previous | TDG |\n\
         |----------------|----------|-----|\n\
         | expanded nodes | {} | {} |\n\
         | wall time (s)  | {:.3} | {:.3} |\n\
         | plan length    | {} | {} |\n\
         | status         | {} | {} |\n\n",
        prev.program_text.as_deref().unwrap_or("").trim_end(),
        cell(prev.training_expanded),
        if baseline.solved() {
            baseline.expanded.to_string()
        } else {
            "-".into()
        },
        prev.training_time,
        baseline.wall_time,
        cell(prev.training_plan_length),
        if baseline.solved() {
            baseline.plan_length.to_string()
        } else {
            "-".into()
        },
        prev.status.as_str(),
        serde_json::to_value(baseline.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
    );
    let mut advice: Vec<&str> = Vec::new();
    match prev.status {
        CandidateStatus::TimedOut => advice.push(ADVICE_TIMEOUT),
        CandidateStatus::ParseFailed
        | CandidateStatus::StaticFailed
        | CandidateStatus::RuntimeFailed => {
            let _ = write!(
                s,
                "Error:\n\n```text\n{}\n```\n\n",
                prev.diagnostic.as_deref().unwrap_or("").trim_end()
            );
            advice.push(ADVICE_ERROR);
        }
        CandidateStatus::Ok | CandidateStatus::Parsed => {
            let better = match (prev.training_expanded, baseline.solved()) {
                (Some(x), true) => x < baseline.expanded,
                (Some(_), false) => true,
                (None, _) => false,
            };
            if better {
                advice.push(ADVICE_BETTER);
            } else {
                let program = prev
                    .program_text
                    .as_deref()
                    .and_then(|t| crate::hel::parse(t).ok());
                let eval = program.as_ref().map(|p| &p.eval);
                let reads_state = eval.is_some_and(|e| {
                    mentions(e, &|b| {
                        matches!(
                            b,
                            EvalBuiltin::CountUnsatisfied
                                | EvalBuiltin::CountTrue
                                | EvalBuiltin::AnyTrue
                        )
                    })
                });
                let has_max = eval.is_some_and(|e| mentions(e, &|b| b == EvalBuiltin::Max));
                if !reads_state {
                    advice.push(ADVICE_STATE);
                }
                if !has_max {
                    advice.push(ADVICE_SECOND_BOUND);
                }
                if advice.is_empty() {
                    advice.push("The previous program expanded at least as many nodes as TDG. Aggregate \
                        decomposition costs over the whole pending network and tighten the state terms.");
                }
            }
        }
    }
    s.push_str("### Advice\n\n");
    for a in advice {
        let _ = writeln!(s, "- {a}");
    }
    s
}
