//! A planner for totally ordered hierarchical task networks.
//!
//! The pipeline runs in stages, one module each:
//!
//! * [`hddl`] parses domain and problem files,
//! * [`ground`] instantiates them into a [`ground::GroundedModel`],
//! * [`search`] runs A*, greedy best-first or weighted A* over
//!   (state, task network) nodes,
//! * [`heuristic`] provides the blind and TDG heuristics and loads
//!   [`hel`] programs,
//! * [`pipeline`] asks a language model for HEL candidates and selects one,
//! * [`bench`] runs benchmark matrices and aggregates their results.
//!
//! ```
//! use htnplan::ground::{ground, GroundOptions};
//! use htnplan::hddl::{parse_domain, parse_problem};
//! use htnplan::heuristic::HeuristicSpec;
//! use htnplan::search::{solve, Algorithm, SearchConfig};
//!
//! let domain = parse_domain(
//!     "(define (domain d) (:predicates (done))
//!        (:task t :parameters ())
//!        (:method m :parameters () :task (t) :ordered-subtasks (finish))
//!        (:action finish :parameters () :precondition () :effect (done)))",
//! )?;
//! let problem = parse_problem(
//!     "(define (problem p) (:domain d) (:htn :parameters () :ordered-subtasks (and (t0 (t)))) (:init))",
//!     &domain,
//! )?;
//! let model = ground(&domain, &problem, &GroundOptions::default())?;
//! let r = solve(&model, &HeuristicSpec::Blind, &SearchConfig::new(Algorithm::Astar))?;
//! assert_eq!(r.plan, ["finish[]"]);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bench;
pub mod ground;
pub mod hddl;
pub mod hel;
pub mod heuristic;
pub mod pipeline;
pub mod search;
pub mod sexpr;
pub mod suite;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hddl.md")]
    mod hddl {}
    #[doc = include_str!("../../../book/src/grounding.md")]
    mod grounding {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/tdg.md")]
    mod tdg {}
    #[doc = include_str!("../../../book/src/hel.md")]
    mod hel {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/bench.md")]
    mod bench {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
