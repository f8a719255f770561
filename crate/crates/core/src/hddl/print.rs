//! HDDL pretty-printer. Output reparses to a structurally equal value.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

fn params(out: &mut String, ps: &[TypedParam]) {
    out.push('(');
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{} - {}", p.name, p.ty);
    }
    out.push(')');
}

fn atom(out: &mut String, a: &Atom) {
    out.push('(');
    out.push_str(&a.predicate);
    for t in &a.args {
        out.push(' ');
        out.push_str(t.text());
    }
    out.push(')');
}

fn literal(out: &mut String, l: &Literal) {
    if l.positive {
        atom(out, &l.atom);
    } else {
        out.push_str("(not ");
        atom(out, &l.atom);
        out.push(')');
    }
}

fn conjunction<T>(out: &mut String, items: &[T], mut each: impl FnMut(&mut String, &T)) {
    out.push_str("(and");
    for i in items {
        out.push(' ');
        each(out, i);
    }
    out.push(')');
}

fn call(out: &mut String, name: &str, args: impl Iterator<Item = impl AsRef<str>>) {
    out.push('(');
    out.push_str(name);
    for a in args {
        out.push(' ');
        out.push_str(a.as_ref());
    }
    out.push(')');
}

fn typed_names(out: &mut String, items: &[(String, String)]) {
    for (n, t) in items {
        let _ = write!(out, " {n} - {t}");
    }
}

impl Display for LiftedDomain {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "(define (domain {})", self.name);
        if !self.requirements.is_empty() {
            let _ = writeln!(s, "  (:requirements {})", self.requirements.join(" "));
        }
        if !self.types.is_empty() {
            s.push_str("  (:types");
            let pairs: Vec<_> = self
                .types
                .iter()
                .map(|t| (t.name.clone(), t.parent.clone()))
                .collect();
            typed_names(&mut s, &pairs);
            s.push_str(")\n");
        }
        if !self.constants.is_empty() {
            s.push_str("  (:constants");
            typed_names(&mut s, &self.constants);
            s.push_str(")\n");
        }
        if !self.predicates.is_empty() {
            s.push_str("  (:predicates");
            for p in &self.predicates {
                s.push_str("\n    (");
                s.push_str(&p.name);
                for q in &p.params {
                    let _ = write!(s, " {} - {}", q.name, q.ty);
                }
                s.push(')');
            }
            s.push_str(")\n");
        }
        for t in &self.tasks {
            let _ = write!(s, "  (:task {} :parameters ", t.name);
            params(&mut s, &t.params);
            s.push_str(")\n");
        }
        for m in &self.methods {
            let _ = write!(s, "  (:method {}\n    :parameters ", m.name);
            params(&mut s, &m.params);
            s.push_str("\n    :task ");
            call(&mut s, &m.task.name, m.task.args.iter().map(Term::text));
            s.push_str("\n    :precondition ");
            conjunction(&mut s, &m.precondition, literal);
            s.push_str("\n    :ordered-subtasks ");
            conjunction(&mut s, &m.subtasks, |out, st| {
                if let Some(l) = &st.label {
                    let _ = write!(out, "({l} ");
                }
                call(out, &st.call.name, st.call.args.iter().map(Term::text));
                if st.label.is_some() {
                    out.push(')');
                }
            });
            s.push_str(")\n");
        }
        for a in &self.actions {
            let _ = write!(s, "  (:action {}\n    :parameters ", a.name);
            params(&mut s, &a.params);
            s.push_str("\n    :precondition ");
            conjunction(&mut s, &a.precondition, literal);
            s.push_str("\n    :effect (and");
            for x in &a.add {
                s.push(' ');
                atom(&mut s, x);
            }
            for x in &a.del {
                s.push_str(" (not ");
                atom(&mut s, x);
                s.push(')');
            }
            s.push_str("))\n");
        }
        s.push_str(")\n");
        f.write_str(&s)
    }
}

impl Display for LiftedProblem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "(define (problem {})", self.name);
        let _ = writeln!(s, "  (:domain {})", self.domain_name);
        if !self.objects.is_empty() {
            s.push_str("  (:objects");
            typed_names(&mut s, &self.objects);
            s.push_str(")\n");
        }
        s.push_str("  (:htn :parameters () :ordered-subtasks ");
        conjunction(&mut s, &self.initial_network, |out, c| {
            call(out, &c.name, c.args.iter())
        });
        s.push_str(")\n  (:init");
        for a in &self.init {
            s.push_str("\n    ");
            call(&mut s, &a.predicate, a.args.iter());
        }
        s.push_str(")\n");
        if !self.goal.is_empty() {
            s.push_str("  (:goal ");
            conjunction(&mut s, &self.goal, |out, a| {
                call(out, &a.predicate, a.args.iter())
            });
            s.push_str(")\n");
        }
        s.push_str(")\n");
        f.write_str(&s)
    }
}
