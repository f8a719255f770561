//! HDDL front end: a total-order, STRIPS-style subset of the hierarchical
//! domain definition language.
//!
//! Identifiers are folded to lower case and `;` starts a line comment.
//! Conditional or quantified effects, partial-order methods and numeric
//! features are rejected with a positioned error rather than being
//! silently dropped.

mod ast;
mod parser;
mod print;

pub use ast::*;
pub use parser::{
    decode, parse_domain, parse_domain_bytes, parse_problem, parse_problem_bytes, ParseError,
};

#[cfg(test)]
mod tests {
    use super::*;

    const NOOP: &str =
        "(define (domain d) (:action noop :parameters () :precondition () :effect ()))";

    #[test]
    fn minimal_domain() {
        let d = parse_domain(NOOP).unwrap();
        assert_eq!(d.actions.len(), 1);
        assert_eq!(d.methods.len(), 0);
        assert!(d.actions[0].precondition.is_empty());
    }

    #[test]
    fn undeclared_subtask() {
        let text = "(define (domain d)
            (:task t :parameters ())
            (:method m :parameters () :task (t) :ordered-subtasks (and (ghost))))";
        let e = parse_domain(text).unwrap_err();
        assert!(e.message.contains("undeclared task"), "{e}");
        assert_eq!(e.pos.line, 3);
    }

    #[test]
    fn method_must_decompose_compound_task() {
        let text = "(define (domain d)
            (:action a :parameters ())
            (:method m :parameters () :task (a) :ordered-subtasks ()))";
        assert!(parse_domain(text)
            .unwrap_err()
            .message
            .contains("not a compound task"));
    }

    #[test]
    fn rejected_features() {
        let cases = [
            ("(define (domain d) (:requirements :made-up))", "unknown requirement"),
            (
                "(define (domain d) (:predicates (p)) (:action a :effect (forall (?x) (p))))",
                "universally quantified",
            ),
            (
                "(define (domain d) (:predicates (p)) (:action a :effect (when (p) (p))))",
                "conditional effects",
            ),
            (
                "(define (domain d) (:action a) (:task t) (:method m :task (t) :subtasks (and (x (a)) (y (a)))))",
                "partial-order",
            ),
            ("(define (domain d) (:types a - (either b c)))", "either"),
            ("(define (domain d) (:action a :parameters (?x - nosuch)))", "undeclared type"),
            ("(define (domain d) (:predicates (p ?x)) (:action a :precondition (p)))", "expects 1"),
            ("(define (domain d) (:action a :precondition (q)))", "undeclared predicate"),
            ("(define (domain d) (:predicates (p ?x)) (:action a :precondition (p ?y)))", "undeclared variable"),
            ("(define (domain d) (:action a) (:action a))", "duplicate"),
        ];
        for (text, needle) in cases {
            let e = parse_domain(text).unwrap_err();
            assert!(e.message.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn case_and_comments_are_normalized() {
        let text = "; comment\n(DEFINE (Domain D) ; trailing\n (:ACTION Noop))";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.name, "d");
        assert_eq!(d.actions[0].name, "noop");
    }

    fn domain_with_task() -> LiftedDomain {
        parse_domain(
            "(define (domain d) (:types thing)
               (:predicates (p ?x - thing))
               (:task t :parameters (?x - thing))
               (:action a :parameters (?x - thing) :precondition (p ?x) :effect (not (p ?x)))
               (:method m :parameters (?x - thing) :task (t ?x) :ordered-subtasks (a ?x)))",
        )
        .unwrap()
    }

    #[test]
    fn empty_goal_is_legal() {
        let d = domain_with_task();
        let p = parse_problem(
            "(define (problem q) (:domain d) (:objects o - thing) (:htn :ordered-subtasks (t o)) (:init (p o)) (:goal (and)))",
            &d,
        )
        .unwrap();
        assert!(p.goal.is_empty());
        assert_eq!(p.initial_network.len(), 1);
    }

    #[test]
    fn problem_errors() {
        let d = domain_with_task();
        let cases = [
            ("(define (problem q) (:domain d) (:objects o - thing) (:init (p z)))", "undeclared object"),
            ("(define (problem q) (:domain d) (:objects o - thing) (:init (p o o)))", "expects 1"),
            ("(define (problem q) (:domain d) (:objects o - nosuch))", "undeclared type"),
            ("(define (problem q) (:domain d) (:objects o - thing) (:htn :ordered-subtasks (u o)))", "undeclared task"),
            ("(define (problem q) (:domain other))", "domain"),
        ];
        for (text, needle) in cases {
            let e = parse_problem(text, &d).unwrap_err();
            assert!(e.message.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn invalid_utf8_has_position() {
        let e = parse_domain_bytes(b"(define\n  (do\xffmain").unwrap_err();
        assert_eq!(e.pos.line, 2);
        assert_eq!(e.pos.col, 6);
    }

    #[test]
    fn print_then_parse_is_identity() {
        let d = domain_with_task();
        let again = parse_domain(&d.to_string()).unwrap();
        assert_eq!(d, again);
    }
}
