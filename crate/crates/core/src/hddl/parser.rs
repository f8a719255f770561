use std::collections::HashSet;

use super::ast::*;
use crate::sexpr::{read_all, Pos, ReaderOptions, SExpr, SyntaxError};

/// Parse failures carry the position of the offending construct.
pub type ParseError = SyntaxError;

type Result<T> = std::result::Result<T, ParseError>;

const KNOWN_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":hierarchy",
    ":method-preconditions",
    ":equality",
    ":adl",
    ":universal-preconditions",
    ":existential-preconditions",
    ":quantified-preconditions",
    ":disjunctive-preconditions",
    ":conditional-effects",
    ":action-costs",
    ":numeric-fluents",
    ":fluents",
    ":durative-actions",
];

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T> {
    Err(ParseError {
        pos,
        message: message.into(),
    })
}

const OPTS: ReaderOptions = ReaderOptions {
    lowercase: true,
    strings: false,
};

/// Decodes raw bytes, reporting the position of the first invalid UTF-8 sequence.
pub fn decode(bytes: &[u8]) -> Result<&str> {
    match std::str::from_utf8(bytes) {
        Ok(s) => Ok(s),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or("");
            let line = valid.matches('\n').count() as u32 + 1;
            let col = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            err(Pos::new(line, col), "lexical error: invalid UTF-8")
        }
    }
}

pub fn parse_domain_bytes(bytes: &[u8]) -> Result<LiftedDomain> {
    parse_domain(decode(bytes)?)
}

pub fn parse_problem_bytes(bytes: &[u8], domain: &LiftedDomain) -> Result<LiftedProblem> {
    parse_problem(decode(bytes)?, domain)
}

fn atom_of<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    match e.as_atom() {
        Some(a) => Ok(a),
        None => err(e.pos(), format!("expected {what}")),
    }
}

fn list_of<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    match e.as_list() {
        Some(l) => Ok(l),
        None => err(e.pos(), format!("expected {what}")),
    }
}

/// Splits `(define (kind name) sections...)` into its name and sections.
fn read_define<'a>(top: &'a [SExpr], kind: &str, text_end: Pos) -> Result<(String, &'a [SExpr])> {
    let Some(def) = top.first() else {
        return err(text_end, format!("expected `(define ({kind} ...) ...)`"));
    };
    if let Some(extra) = top.get(1) {
        return err(extra.pos(), "unexpected content after definition");
    }
    let items = list_of(def, "`(define ...)`")?;
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return err(def.pos(), "expected `define`");
    }
    let Some(header) = items.get(1) else {
        return err(def.pos(), format!("expected `({kind} <name>)`"));
    };
    let h = list_of(header, &format!("`({kind} <name>)`"))?;
    if h.len() != 2 || h[0].as_atom() != Some(kind) {
        return err(header.pos(), format!("expected `({kind} <name>)`"));
    }
    let name = atom_of(&h[1], "name")?.to_string();
    Ok((name, &items[2..]))
}

fn end_pos(text: &str) -> Pos {
    let line = text.matches('\n').count() as u32 + 1;
    let col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
    Pos::new(line, col)
}

/// Parses `?a ?b - t ?c` style lists. `vars` selects `?`-prefixed names.
fn parse_typed_list(items: &[SExpr], vars: bool) -> Result<Vec<(String, String, Pos)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let e = &items[i];
        match e {
            SExpr::Atom { text, pos } if text == "-" => {
                let Some(ty) = items.get(i + 1) else {
                    return err(*pos, "expected type after `-`");
                };
                if ty.head() == Some("either") {
                    return err(ty.pos(), "unsupported feature: `either` types");
                }
                let ty = atom_of(ty, "type name")?;
                if pending.is_empty() {
                    return err(*pos, "type annotation without names");
                }
                for (n, p) in pending.drain(..) {
                    out.push((n, ty.to_string(), p));
                }
                i += 2;
            }
            SExpr::Atom { text, pos } => {
                if vars != text.starts_with('?') {
                    return err(
                        *pos,
                        if vars {
                            format!("expected variable, found `{text}`")
                        } else {
                            format!("expected name, found variable `{text}`")
                        },
                    );
                }
                pending.push((text.clone(), *pos));
                i += 1;
            }
            other => return err(other.pos(), "expected name"),
        }
    }
    for (n, p) in pending {
        out.push((n, ROOT_TYPE.to_string(), p));
    }
    Ok(out)
}

/// Keyword/value pairs such as `:parameters (...) :precondition (...)`.
fn keyword_pairs<'a>(items: &'a [SExpr], allowed: &[&str]) -> Result<Vec<(&'a str, &'a SExpr)>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let k = atom_of(&items[i], "keyword")?;
        if !k.starts_with(':') {
            return err(items[i].pos(), format!("expected keyword, found `{k}`"));
        }
        if !allowed.contains(&k) {
            return err(
                items[i].pos(),
                format!("unsupported or unknown keyword `{k}`"),
            );
        }
        let Some(v) = items.get(i + 1) else {
            return err(items[i].pos(), format!("missing value for `{k}`"));
        };
        if out.iter().any(|(seen, _)| *seen == k) {
            return err(items[i].pos(), format!("duplicate `{k}`"));
        }
        out.push((k, v));
        i += 2;
    }
    Ok(out)
}

fn lookup<'a>(pairs: &[(&str, &'a SExpr)], key: &str) -> Option<&'a SExpr> {
    pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

struct Scope<'a> {
    params: &'a [TypedParam],
    constants: &'a HashSet<String>,
}

impl Scope<'_> {
    fn term(&self, e: &SExpr) -> Result<Term> {
        let t = atom_of(e, "term")?;
        if t.starts_with('?') {
            if self.params.iter().any(|p| p.name == t) {
                Ok(Term::Var(t.to_string()))
            } else {
                err(e.pos(), format!("undeclared variable `{t}`"))
            }
        } else if self.constants.contains(t) {
            Ok(Term::Const(t.to_string()))
        } else {
            err(e.pos(), format!("undeclared object `{t}`"))
        }
    }
}

struct DomainCtx<'a> {
    domain: &'a LiftedDomain,
    constants: HashSet<String>,
}

impl DomainCtx<'_> {
    fn atom(&self, e: &SExpr, scope: &Scope) -> Result<Atom> {
        let items = list_of(e, "atom")?;
        let Some(head) = items.first() else {
            return err(e.pos(), "empty atom");
        };
        let pred = atom_of(head, "predicate name")?;
        let args = items[1..]
            .iter()
            .map(|a| scope.term(a))
            .collect::<Result<Vec<_>>>()?;
        if pred == "=" {
            if args.len() != 2 {
                return err(e.pos(), "equality takes two arguments");
            }
        } else {
            match self.domain.predicate(pred) {
                None => return err(head.pos(), format!("undeclared predicate `{pred}`")),
                Some(p) if p.params.len() != args.len() => {
                    return err(
                        e.pos(),
                        format!(
                            "predicate `{pred}` expects {} arguments, found {}",
                            p.params.len(),
                            args.len()
                        ),
                    )
                }
                _ => {}
            }
        }
        Ok(Atom {
            predicate: pred.to_string(),
            args,
        })
    }

    fn literal(&self, e: &SExpr, scope: &Scope) -> Result<Literal> {
        if e.head() == Some("not") {
            let items = e.as_list().unwrap_or_default();
            if items.len() != 2 {
                return err(e.pos(), "`not` takes exactly one argument");
            }
            if let Some(h) = items[1].head() {
                if is_connective(h) {
                    return err(
                        items[1].pos(),
                        "unsupported feature: negation of a compound formula",
                    );
                }
            }
            Ok(Literal {
                positive: false,
                atom: self.atom(&items[1], scope)?,
            })
        } else {
            Ok(Literal {
                positive: true,
                atom: self.atom(e, scope)?,
            })
        }
    }

    /// Conjunction of literals; nested `and` flattens.
    fn condition(&self, e: &SExpr, scope: &Scope, out: &mut Vec<Literal>) -> Result<()> {
        let items = list_of(e, "formula")?;
        match items.first().and_then(SExpr::as_atom) {
            None if items.is_empty() => Ok(()),
            Some("and") => {
                for sub in &items[1..] {
                    self.condition(sub, scope, out)?;
                }
                Ok(())
            }
            Some(h @ ("or" | "imply" | "exists" | "forall" | "when")) => {
                err(e.pos(), format!("unsupported feature: `{h}` in condition"))
            }
            _ => {
                out.push(self.literal(e, scope)?);
                Ok(())
            }
        }
    }

    fn effect(
        &self,
        e: &SExpr,
        scope: &Scope,
        add: &mut Vec<Atom>,
        del: &mut Vec<Atom>,
    ) -> Result<()> {
        let items = list_of(e, "effect")?;
        match items.first().and_then(SExpr::as_atom) {
            None if items.is_empty() => Ok(()),
            Some("and") => {
                for sub in &items[1..] {
                    self.effect(sub, scope, add, del)?;
                }
                Ok(())
            }
            Some("forall") => err(
                e.pos(),
                "unsupported feature: universally quantified effects",
            ),
            Some("when") => err(e.pos(), "unsupported feature: conditional effects"),
            Some(h @ ("increase" | "decrease" | "assign" | "scale-up" | "scale-down")) => err(
                e.pos(),
                format!("unsupported feature: numeric effect `{h}`"),
            ),
            _ => {
                let lit = self.literal(e, scope)?;
                if lit.atom.is_equality() {
                    return err(e.pos(), "equality cannot appear in effects");
                }
                if lit.positive {
                    add.push(lit.atom);
                } else {
                    del.push(lit.atom);
                }
                Ok(())
            }
        }
    }

    fn call(&self, e: &SExpr, scope: &Scope) -> Result<TaskCall> {
        let items = list_of(e, "task")?;
        let Some(head) = items.first() else {
            return err(e.pos(), "empty task");
        };
        let name = atom_of(head, "task name")?;
        let args = items[1..]
            .iter()
            .map(|a| scope.term(a))
            .collect::<Result<Vec<_>>>()?;
        match self.domain.task_arity(name) {
            None => err(head.pos(), format!("undeclared task `{name}`")),
            Some(n) if n != args.len() => err(
                e.pos(),
                format!("task `{name}` expects {n} arguments, found {}", args.len()),
            ),
            Some(_) => Ok(TaskCall {
                name: name.to_string(),
                args,
            }),
        }
    }

    fn subtasks(&self, e: &SExpr, scope: &Scope) -> Result<Vec<Subtask>> {
        let items = list_of(e, "subtask list")?;
        let entries: Vec<&SExpr> = match items.first().and_then(SExpr::as_atom) {
            None if items.is_empty() => return Ok(Vec::new()),
            Some("and") => items[1..].iter().collect(),
            _ => vec![e],
        };
        entries
            .into_iter()
            .map(|st| {
                let parts = list_of(st, "subtask")?;
                if parts.len() == 2 && parts[1].as_list().is_some() {
                    let label = atom_of(&parts[0], "subtask label")?.to_string();
                    Ok(Subtask {
                        label: Some(label),
                        call: self.call(&parts[1], scope)?,
                    })
                } else {
                    Ok(Subtask {
                        label: None,
                        call: self.call(st, scope)?,
                    })
                }
            })
            .collect()
    }
}

fn sections_of<'a>(
    by_kind: &[(&str, &'a SExpr)],
    kind: &'static str,
) -> impl Iterator<Item = &'a [SExpr]> {
    by_kind
        .iter()
        .filter(move |(k, _)| *k == kind)
        .map(|(_, s)| s.as_list().unwrap_or_default())
        .collect::<Vec<_>>()
        .into_iter()
}

fn is_connective(h: &str) -> bool {
    matches!(
        h,
        "and" | "or" | "not" | "imply" | "exists" | "forall" | "when"
    )
}

fn params_from(items: &[SExpr], domain: &LiftedDomain) -> Result<Vec<TypedParam>> {
    let mut seen = HashSet::new();
    parse_typed_list(items, true)?
        .into_iter()
        .map(|(name, ty, pos)| {
            if !domain.has_type(&ty) {
                return err(pos, format!("undeclared type `{ty}`"));
            }
            if !seen.insert(name.clone()) {
                return err(pos, format!("duplicate parameter `{name}`"));
            }
            Ok(TypedParam { name, ty })
        })
        .collect()
}

/// Rejects ordering sections on methods/networks with more than one subtask.
fn check_total_order(
    pairs: &[(&str, &SExpr)],
    subtasks_key: Option<&str>,
    count: usize,
    pos: Pos,
) -> Result<()> {
    if let Some(c) = lookup(pairs, ":constraints") {
        if c.as_list().is_none_or(|l| !l.is_empty()) {
            return err(c.pos(), "unsupported feature: task constraints");
        }
    }
    if let Some(o) = lookup(pairs, ":ordering") {
        if o.as_list().is_none_or(|l| !l.is_empty()) {
            return err(
                o.pos(),
                "unsupported feature: partial-order subtasks (use :ordered-subtasks)",
            );
        }
    }
    if matches!(subtasks_key, Some(":subtasks" | ":tasks")) && count > 1 {
        return err(
            pos,
            "unsupported feature: partial-order subtasks (use :ordered-subtasks)",
        );
    }
    Ok(())
}

fn subtask_value<'a>(pairs: &[(&'a str, &'a SExpr)]) -> Option<(&'a str, &'a SExpr)> {
    [":ordered-subtasks", ":ordered-tasks", ":subtasks", ":tasks"]
        .into_iter()
        .find_map(|k| {
            pairs
                .iter()
                .find(|(key, _)| *key == k)
                .map(|(key, v)| (*key, *v))
        })
}

pub fn parse_domain(text: &str) -> Result<LiftedDomain> {
    let top = read_all(text, OPTS)?;
    let (name, sections) = read_define(&top, "domain", end_pos(text))?;
    let mut domain = LiftedDomain {
        name,
        ..Default::default()
    };

    let mut by_kind: Vec<(&str, &SExpr)> = Vec::new();
    for s in sections {
        let items = list_of(s, "domain section")?;
        let kind = items.first().and_then(SExpr::as_atom).unwrap_or("");
        match kind {
            ":requirements" | ":types" | ":constants" | ":predicates" | ":task" | ":action"
            | ":method" => {
                if matches!(
                    kind,
                    ":requirements" | ":types" | ":constants" | ":predicates"
                ) && by_kind.iter().any(|(k, _)| *k == kind)
                {
                    return err(s.pos(), format!("duplicate `{kind}` section"));
                }
                by_kind.push((kind, s));
            }
            ":functions" => return err(s.pos(), "unsupported feature: numeric fluents"),
            ":durative-action" => return err(s.pos(), "unsupported feature: durative actions"),
            "" => return err(s.pos(), "expected section keyword"),
            other => return err(s.pos(), format!("unknown domain section `{other}`")),
        }
    }
    let section = |k: &'static str| sections_of(&by_kind, k);

    for items in section(":requirements") {
        for r in &items[1..] {
            let flag = atom_of(r, "requirement flag")?;
            if !KNOWN_REQUIREMENTS.contains(&flag) {
                return err(r.pos(), format!("unknown requirement flag `{flag}`"));
            }
            domain.requirements.push(flag.to_string());
        }
    }

    for items in section(":types") {
        let decls = parse_typed_list(&items[1..], false)?;
        for (name, parent, pos) in &decls {
            if name == ROOT_TYPE {
                continue;
            }
            if domain.types.iter().any(|t| &t.name == name) {
                return err(*pos, format!("duplicate type `{name}`"));
            }
            domain.types.push(TypeDecl {
                name: name.clone(),
                parent: parent.clone(),
            });
        }
        // Parents used but never declared become children of the root.
        for (_, parent, _) in decls {
            if !domain.has_type(&parent) {
                domain.types.push(TypeDecl {
                    name: parent,
                    parent: ROOT_TYPE.into(),
                });
            }
        }
    }
    // Reject cycles in the hierarchy.
    for t in &domain.types {
        if !domain.is_subtype(&t.name, ROOT_TYPE) {
            let pos = section(":types")
                .next()
                .map_or(Pos::new(1, 1), |i| i[0].pos());
            return err(pos, format!("cyclic type hierarchy at `{}`", t.name));
        }
    }

    for items in section(":constants") {
        for (name, ty, pos) in parse_typed_list(&items[1..], false)? {
            if !domain.has_type(&ty) {
                return err(pos, format!("undeclared type `{ty}`"));
            }
            if domain.constants.iter().any(|(c, _)| c == &name) {
                return err(pos, format!("duplicate constant `{name}`"));
            }
            domain.constants.push((name, ty));
        }
    }

    for items in section(":predicates") {
        for p in &items[1..] {
            let parts = list_of(p, "predicate declaration")?;
            let Some(head) = parts.first() else {
                return err(p.pos(), "empty predicate declaration");
            };
            let name = atom_of(head, "predicate name")?.to_string();
            if domain.predicate(&name).is_some() {
                return err(p.pos(), format!("duplicate predicate `{name}`"));
            }
            let params = params_from(&parts[1..], &domain)?;
            domain.predicates.push(PredicateDecl { name, params });
        }
    }

    for items in section(":task") {
        let Some(n) = items.get(1) else {
            return err(items[0].pos(), "expected task name");
        };
        let name = atom_of(n, "task name")?.to_string();
        let pairs = keyword_pairs(&items[2..], &[":parameters"])?;
        let params = match lookup(&pairs, ":parameters") {
            Some(p) => params_from(list_of(p, "parameter list")?, &domain)?,
            None => Vec::new(),
        };
        if domain.task_arity(&name).is_some() {
            return err(n.pos(), format!("duplicate task `{name}`"));
        }
        domain.tasks.push(TaskSchema { name, params });
    }

    // Action headers first so methods may reference actions declared later.
    let mut action_bodies = Vec::new();
    for items in section(":action") {
        let Some(n) = items.get(1) else {
            return err(items[0].pos(), "expected action name");
        };
        let name = atom_of(n, "action name")?.to_string();
        let pairs = keyword_pairs(&items[2..], &[":parameters", ":precondition", ":effect"])?;
        let params = match lookup(&pairs, ":parameters") {
            Some(p) => params_from(list_of(p, "parameter list")?, &domain)?,
            None => Vec::new(),
        };
        if domain.task_arity(&name).is_some() {
            return err(n.pos(), format!("duplicate task `{name}`"));
        }
        domain.actions.push(ActionSchema {
            name,
            params,
            precondition: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
        });
        action_bodies.push(pairs);
    }

    let constants: HashSet<String> = domain.constants.iter().map(|(c, _)| c.clone()).collect();
    let mut actions = domain.actions.clone();
    {
        let ctx = DomainCtx {
            domain: &domain,
            constants: constants.clone(),
        };
        for (action, pairs) in actions.iter_mut().zip(&action_bodies) {
            let scope = Scope {
                params: &action.params,
                constants: &ctx.constants,
            };
            if let Some(pre) = lookup(pairs, ":precondition") {
                ctx.condition(pre, &scope, &mut action.precondition)?;
            }
            if let Some(eff) = lookup(pairs, ":effect") {
                ctx.effect(eff, &scope, &mut action.add, &mut action.del)?;
            }
        }
    }
    domain.actions = actions;

    let mut methods = Vec::new();
    {
        let ctx = DomainCtx {
            domain: &domain,
            constants,
        };
        for items in section(":method") {
            let Some(n) = items.get(1) else {
                return err(items[0].pos(), "expected method name");
            };
            let name = atom_of(n, "method name")?.to_string();
            let pairs = keyword_pairs(
                &items[2..],
                &[
                    ":parameters",
                    ":task",
                    ":precondition",
                    ":ordered-subtasks",
                    ":ordered-tasks",
                    ":subtasks",
                    ":tasks",
                    ":ordering",
                    ":constraints",
                ],
            )?;
            let params = match lookup(&pairs, ":parameters") {
                Some(p) => params_from(list_of(p, "parameter list")?, &domain)?,
                None => Vec::new(),
            };
            let scope = Scope {
                params: &params,
                constants: &ctx.constants,
            };
            let Some(task_expr) = lookup(&pairs, ":task") else {
                return err(items[0].pos(), format!("method `{name}` lacks `:task`"));
            };
            let task = ctx.call(task_expr, &scope)?;
            if domain.task(&task.name).is_none() {
                return err(
                    task_expr.pos(),
                    format!(
                        "method `{name}` decomposes `{}`, which is not a compound task",
                        task.name
                    ),
                );
            }
            let mut precondition = Vec::new();
            if let Some(pre) = lookup(&pairs, ":precondition") {
                ctx.condition(pre, &scope, &mut precondition)?;
            }
            let (key, subtasks) = match subtask_value(&pairs) {
                Some((k, v)) => (Some(k), ctx.subtasks(v, &scope)?),
                None => (None, Vec::new()),
            };
            if pairs.iter().filter(|(k, _)| k.contains("tasks")).count() > 1 {
                return err(items[0].pos(), "multiple subtask sections");
            }
            check_total_order(&pairs, key, subtasks.len(), items[0].pos())?;
            if methods.iter().any(|m: &MethodSchema| m.name == name) {
                return err(n.pos(), format!("duplicate method `{name}`"));
            }
            methods.push(MethodSchema {
                name,
                params,
                task,
                precondition,
                subtasks,
            });
        }
    }
    domain.methods = methods;
    Ok(domain)
}

pub fn parse_problem(text: &str, domain: &LiftedDomain) -> Result<LiftedProblem> {
    let top = read_all(text, OPTS)?;
    let (name, sections) = read_define(&top, "problem", end_pos(text))?;
    let mut problem = LiftedProblem {
        name,
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut htn: Option<&SExpr> = None;
    let mut init: Option<&SExpr> = None;
    let mut goal: Option<&SExpr> = None;
    for s in sections {
        let items = list_of(s, "problem section")?;
        let kind = items.first().and_then(SExpr::as_atom).unwrap_or("");
        if !seen.insert(kind.to_string()) {
            return err(s.pos(), format!("duplicate `{kind}` section"));
        }
        match kind {
            ":domain" => {
                let d = items
                    .get(1)
                    .map(|d| atom_of(d, "domain name"))
                    .transpose()?;
                let Some(d) = d else {
                    return err(s.pos(), "expected domain name");
                };
                if d != domain.name {
                    return err(
                        items[1].pos(),
                        format!(
                            "problem is for domain `{d}`, but domain `{}` was given",
                            domain.name
                        ),
                    );
                }
                problem.domain_name = d.to_string();
            }
            ":requirements" => {
                for r in &items[1..] {
                    let flag = atom_of(r, "requirement flag")?;
                    if !KNOWN_REQUIREMENTS.contains(&flag) {
                        return err(r.pos(), format!("unknown requirement flag `{flag}`"));
                    }
                }
            }
            ":objects" => {
                for (name, ty, pos) in parse_typed_list(&items[1..], false)? {
                    if !domain.has_type(&ty) {
                        return err(pos, format!("object `{name}` has undeclared type `{ty}`"));
                    }
                    if problem.objects.iter().any(|(o, _)| o == &name)
                        || domain.constants.iter().any(|(c, _)| c == &name)
                    {
                        return err(pos, format!("duplicate object `{name}`"));
                    }
                    problem.objects.push((name, ty));
                }
            }
            ":htn" => htn = Some(s),
            ":init" => init = Some(s),
            ":goal" => goal = Some(s),
            ":metric" | ":constraints" => {
                return err(s.pos(), format!("unsupported feature: `{kind}`"))
            }
            "" => return err(s.pos(), "expected section keyword"),
            other => return err(s.pos(), format!("unknown problem section `{other}`")),
        }
    }
    if problem.domain_name.is_empty() {
        return err(top[0].pos(), "missing `(:domain ...)`");
    }

    let mut objects: HashSet<String> = domain.constants.iter().map(|(c, _)| c.clone()).collect();
    objects.extend(problem.objects.iter().map(|(o, _)| o.clone()));
    let ctx = DomainCtx {
        domain,
        constants: objects,
    };
    let no_params: [TypedParam; 0] = [];
    let scope = Scope {
        params: &no_params,
        constants: &ctx.constants,
    };
    let ground = |a: Atom| GroundAtom {
        predicate: a.predicate,
        args: a.args.into_iter().map(|t| t.text().to_string()).collect(),
    };

    if let Some(s) = init {
        for a in &s.as_list().unwrap_or_default()[1..] {
            let atom = ctx.atom(a, &scope)?;
            if atom.is_equality() {
                return err(a.pos(), "equality atoms cannot appear in `:init`");
            }
            let g = ground(atom);
            if !problem.init.contains(&g) {
                problem.init.push(g);
            }
        }
    }
    if let Some(s) = goal {
        let items = s.as_list().unwrap_or_default();
        if items.len() != 2 {
            return err(s.pos(), "`:goal` takes exactly one formula");
        }
        let mut lits = Vec::new();
        ctx.condition(&items[1], &scope, &mut lits)?;
        for l in lits {
            if !l.positive || l.atom.is_equality() {
                return err(
                    items[1].pos(),
                    "unsupported feature: goals must be positive atoms",
                );
            }
            let g = ground(l.atom);
            if !problem.goal.contains(&g) {
                problem.goal.push(g);
            }
        }
    }
    if let Some(s) = htn {
        let items = s.as_list().unwrap_or_default();
        let pairs = keyword_pairs(
            &items[1..],
            &[
                ":parameters",
                ":ordered-subtasks",
                ":ordered-tasks",
                ":subtasks",
                ":tasks",
                ":ordering",
                ":constraints",
            ],
        )?;
        if let Some(p) = lookup(&pairs, ":parameters") {
            if !list_of(p, "parameter list")?.is_empty() {
                return err(
                    p.pos(),
                    "unsupported feature: parameters in the initial task network",
                );
            }
        }
        if let Some((key, v)) = subtask_value(&pairs) {
            let subtasks = ctx.subtasks(v, &scope)?;
            check_total_order(&pairs, Some(key), subtasks.len(), s.pos())?;
            problem.initial_network = subtasks
                .into_iter()
                .map(|st| GroundCall {
                    name: st.call.name,
                    args: st
                        .call
                        .args
                        .into_iter()
                        .map(|t| t.text().to_string())
                        .collect(),
                })
                .collect();
        }
    }
    Ok(problem)
}
