use num_rational::Ratio;

use super::{Def, EvalBuiltin, Expr, HelError, HelErrorKind, HelProgram, InitBuiltin, InitExpr};
use crate::sexpr::{read_all, Pos, ReaderOptions, SExpr};

fn syntax<T>(pos: Pos, message: impl Into<String>) -> Result<T, HelError> {
    Err(HelError {
        kind: HelErrorKind::Syntax,
        pos,
        message: message.into(),
    })
}

fn static_err<T>(pos: Pos, message: impl Into<String>) -> Result<T, HelError> {
    Err(HelError {
        kind: HelErrorKind::Static,
        pos,
        message: message.into(),
    })
}

/// Parses an integer, decimal (`0.25`) or fraction (`1/3`) literal.
///
/// `None` if `text` does not look like a number at all; `Some(Err)` if it
/// does but cannot be represented.
pub(crate) fn parse_number(text: &str) -> Option<Result<Ratio<i64>, String>> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() || !body.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let overflow = || format!("number {text} is out of range");
    let value = if let Some((n, d)) = body.split_once('/') {
        if !digits(n) || !digits(d) {
            return None;
        }
        let (Ok(n), Ok(d)) = (n.parse::<i64>(), d.parse::<i64>()) else {
            return Some(Err(overflow()));
        };
        if d == 0 {
            return Some(Err(format!("number {text} has a zero denominator")));
        }
        Ratio::new(n, d)
    } else if let Some((i, f)) = body.split_once('.') {
        if !digits(i) || !digits(f) {
            return None;
        }
        let scale = 10i64.checked_pow(f.len() as u32);
        let whole = format!("{i}{f}").parse::<i64>().ok();
        match (whole, scale) {
            (Some(w), Some(s)) => Ratio::new(w, s),
            _ => return Some(Err(overflow())),
        }
    } else {
        if !digits(body) {
            return None;
        }
        match body.parse::<i64>() {
            Ok(n) => Ratio::from_integer(n),
            Err(_) => return Some(Err(overflow())),
        }
    };
    Some(Ok(if neg { -value } else { value }))
}

fn is_builtin(s: &str) -> bool {
    InitBuiltin::from_name(s).is_some() || EvalBuiltin::from_name(s).is_some()
}

/// Parses and statically checks one HEL program.
pub fn parse(text: &str) -> Result<HelProgram, HelError> {
    let forms = read_all(
        text,
        ReaderOptions {
            lowercase: true,
            strings: true,
        },
    )
    .map_err(|e| HelError {
        kind: HelErrorKind::Syntax,
        pos: e.pos,
        message: e.message,
    })?;
    let form = match forms.as_slice() {
        [f] => f,
        [] => return syntax(Pos::new(1, 1), "expected a (heuristic ...) form"),
        [_, extra, ..] => return syntax(extra.pos(), "unexpected form after the heuristic"),
    };
    let Some(items) = form.as_list() else {
        return syntax(form.pos(), "expected a (heuristic ...) form");
    };
    if form.head() != Some("heuristic") {
        return syntax(form.pos(), "expected a (heuristic ...) form");
    }
    let name = match items.get(1) {
        Some(SExpr::Str { text, .. }) => text.clone(),
        Some(SExpr::Atom { text, .. }) => text.clone(),
        Some(other) => return syntax(other.pos(), "expected the heuristic name"),
        None => return syntax(form.pos(), "expected the heuristic name"),
    };
    let mut defs: Vec<Def> = Vec::new();
    let mut eval = None;
    let mut seen_init = false;
    for section in &items[2..] {
        let Some(parts) = section.as_list() else {
            return syntax(
                section.pos(),
                "expected an (init ...) or (eval ...) section",
            );
        };
        match section.head() {
            Some("init") => {
                if seen_init || eval.is_some() {
                    return syntax(section.pos(), "init must appear once, before eval");
                }
                seen_init = true;
                for d in &parts[1..] {
                    let def = parse_def(d, &defs)?;
                    defs.push(def);
                }
            }
            Some("eval") => {
                if eval.is_some() {
                    return syntax(section.pos(), "duplicate eval section");
                }
                if parts.len() != 2 {
                    return syntax(section.pos(), "eval takes exactly one expression");
                }
                eval = Some(parse_expr(&parts[1], &defs)?);
            }
            _ => {
                return syntax(
                    section.pos(),
                    "expected an (init ...) or (eval ...) section",
                )
            }
        }
    }
    let Some(eval) = eval else {
        return syntax(form.pos(), "missing eval section");
    };
    Ok(HelProgram { name, defs, eval })
}

fn name_arg(e: &SExpr, what: &str) -> Result<String, HelError> {
    match e {
        SExpr::Str { text, .. } => Ok(text.to_lowercase()),
        SExpr::Atom { text, .. } if parse_number(text).is_none() => Ok(text.clone()),
        _ => static_err(e.pos(), format!("{what} expects a name")),
    }
}

fn count_arg(e: &SExpr, what: &str) -> Result<u64, HelError> {
    let n = match e.as_atom().and_then(parse_number) {
        Some(Ok(n)) => n,
        Some(Err(m)) => return static_err(e.pos(), m),
        None => return static_err(e.pos(), format!("{what} expects non-negative integers")),
    };
    if !n.is_integer() || *n.numer() < 0 {
        return static_err(e.pos(), format!("{what} expects non-negative integers"));
    }
    Ok(*n.numer() as u64)
}

fn parse_def(d: &SExpr, defs: &[Def]) -> Result<Def, HelError> {
    let pos = d.pos();
    let parts = match d.as_list() {
        Some(p) if d.head() == Some("def") => p,
        _ => return syntax(pos, "expected (def symbol value)"),
    };
    if parts.len() != 3 {
        return syntax(pos, "def expects a symbol and one value");
    }
    let symbol = match parts[1].as_atom() {
        Some(s) if parse_number(s).is_none() => s.to_owned(),
        _ => return syntax(parts[1].pos(), "def expects a symbol"),
    };
    if is_builtin(&symbol) || matches!(symbol.as_str(), "def" | "init" | "eval" | "heuristic") {
        return static_err(parts[1].pos(), format!("{symbol} is reserved"));
    }
    if defs.iter().any(|x| x.symbol == symbol) {
        return static_err(parts[1].pos(), format!("duplicate definition of {symbol}"));
    }
    let v = &parts[2];
    let value = match v {
        SExpr::Atom { text, pos } => match parse_number(text) {
            Some(Ok(n)) => InitExpr::Number(n),
            Some(Err(m)) => return static_err(*pos, m),
            None => {
                return static_err(
                    *pos,
                    format!("def value must be a number or an init builtin, not {text}"),
                )
            }
        },
        SExpr::Str { pos, .. } => {
            return static_err(*pos, "def value must be a number or an init builtin")
        }
        SExpr::List { items, pos } => {
            let head = v.head().unwrap_or("");
            let Some(b) = InitBuiltin::from_name(head) else {
                if EvalBuiltin::from_name(head).is_some() {
                    return static_err(*pos, format!("eval builtin {head} cannot be used in init"));
                }
                return static_err(*pos, format!("unknown builtin {head:?}"));
            };
            let args = &items[1..];
            let want = if b == InitBuiltin::TdgTable { 2 } else { 1 };
            if args.len() != want {
                return static_err(
                    *pos,
                    format!("{head} expects {want} argument(s), got {}", args.len()),
                );
            }
            match b {
                InitBuiltin::TdgTable => InitExpr::TdgTable {
                    primitive_cost: count_arg(&args[0], head)?,
                    abstract_init: count_arg(&args[1], head)?,
                },
                InitBuiltin::GoalFacts => InitExpr::GoalFacts(name_arg(&args[0], head)?),
                InitBuiltin::Facts => InitExpr::Facts(name_arg(&args[0], head)?),
                InitBuiltin::TaskPattern => InitExpr::TaskPattern(name_arg(&args[0], head)?),
            }
        }
    };
    Ok(Def { symbol, value, pos })
}

fn parse_expr(e: &SExpr, defs: &[Def]) -> Result<Expr, HelError> {
    match e {
        SExpr::Atom { text, pos } => match parse_number(text) {
            Some(Ok(n)) => Ok(Expr::Number(n)),
            Some(Err(m)) => static_err(*pos, m),
            None => match defs.iter().position(|d| &d.symbol == text) {
                Some(i) => Ok(Expr::Symbol(i)),
                None if is_builtin(text) => {
                    static_err(*pos, format!("builtin {text} must be called"))
                }
                None => static_err(*pos, format!("unbound symbol {text}")),
            },
        },
        SExpr::Str { pos, .. } => static_err(*pos, "string literals are not allowed in eval"),
        SExpr::List { items, pos } => {
            let Some(head) = e.head() else {
                return syntax(*pos, "expected a builtin call");
            };
            let Some(b) = EvalBuiltin::from_name(head) else {
                if InitBuiltin::from_name(head).is_some() {
                    return static_err(
                        *pos,
                        format!("init-only builtin {head} cannot be used in eval"),
                    );
                }
                return static_err(*pos, format!("unknown builtin {head:?}"));
            };
            let args = &items[1..];
            let (lo, hi) = b.arity();
            if args.len() < lo || hi.is_some_and(|h| args.len() > h) {
                let want = match hi {
                    Some(h) if h == lo => format!("{lo}"),
                    Some(h) => format!("{lo} to {h}"),
                    None => format!("at least {lo}"),
                };
                return static_err(
                    *pos,
                    format!("{head} expects {want} argument(s), got {}", args.len()),
                );
            }
            let args = args
                .iter()
                .map(|a| parse_expr(a, defs))
                .collect::<Result<_, _>>()?;
            Ok(Expr::Call(b, args))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("42"), Some(Ok(r(42, 1))));
        assert_eq!(parse_number("-0.25"), Some(Ok(r(-1, 4))));
        assert_eq!(parse_number("1/3"), Some(Ok(r(1, 3))));
        assert_eq!(parse_number("+7"), Some(Ok(r(7, 1))));
        assert_eq!(parse_number("-"), None);
        assert_eq!(parse_number("x1"), None);
        assert_eq!(parse_number("1.2.3"), None);
        assert!(matches!(parse_number("99999999999999999999"), Some(Err(_))));
        assert!(matches!(parse_number("1/0"), Some(Err(_))));
    }

    #[test]
    fn zero_program() {
        let p = parse(r#"(heuristic "zero" (init) (eval 0))"#).unwrap();
        assert_eq!(p.name, "zero");
        assert!(p.defs.is_empty());
        assert_eq!(p.eval, Expr::Number(r(0, 1)));
    }

    #[test]
    fn tdg_program() {
        let p =
            parse(r#"(heuristic "t" (init (def c (tdg-table 1 100))) (eval (network-cost c)))"#)
                .unwrap();
        assert_eq!(
            p.defs[0].value,
            InitExpr::TdgTable {
                primitive_cost: 1,
                abstract_init: 100
            }
        );
        assert_eq!(
            p.eval,
            Expr::Call(EvalBuiltin::NetworkCost, vec![Expr::Symbol(0)])
        );
    }

    #[test]
    fn static_errors() {
        let cases = [
            (
                r#"(heuristic "x" (init (def g (goal-facts "at"))) (eval (goal-facts "at")))"#,
                "init-only",
            ),
            (
                r#"(heuristic "x" (init) (eval (frobnicate 1)))"#,
                "unknown builtin",
            ),
            (r#"(heuristic "x" (init) (eval (+ y 1)))"#, "unbound symbol"),
            (r#"(heuristic "x" (init) (eval (if 1 2)))"#, "expects 3"),
            (
                r#"(heuristic "x" (init (def c (tdg-table 1))) (eval 0))"#,
                "expects 2",
            ),
            (
                r#"(heuristic "x" (init (def c (max 1 2))) (eval 0))"#,
                "cannot be used in init",
            ),
            (
                r#"(heuristic "x" (init (def a 1) (def a 2)) (eval a))"#,
                "duplicate",
            ),
            (r#"(heuristic "x" (init (def max 1)) (eval 0))"#, "reserved"),
            (r#"(heuristic "x" (init) (eval "s"))"#, "string"),
            (
                r#"(heuristic "x" (init (def c (tdg-table -1 100))) (eval 0))"#,
                "non-negative",
            ),
        ];
        for (text, needle) in cases {
            let e = parse(text).unwrap_err();
            assert_eq!(e.kind, HelErrorKind::Static, "{text}");
            assert!(e.message.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn syntax_errors() {
        for text in [
            "",
            "(heuristic",
            r#"(heuristic "x" (init))"#,
            r#"(heuristic "x" (eval 1) (init))"#,
            r#"(heuristic "x" (eval 1 2))"#,
            r#"(heuristic "x" (eval 1)) (extra)"#,
            r#"(program "x" (eval 1))"#,
            r#"(heuristic "x" (init (let a 1)) (eval 1))"#,
        ] {
            assert_eq!(
                parse(text).unwrap_err().kind,
                HelErrorKind::Syntax,
                "{text}"
            );
        }
    }

    #[test]
    fn case_folding_and_comments() {
        let p = parse(
            "; c\n(HEURISTIC \"N\" (INIT (DEF G (GOAL-FACTS \"AT\"))) (EVAL (COUNT-TRUE G)))",
        )
        .unwrap();
        assert_eq!(p.name, "N");
        assert_eq!(p.defs[0].value, InitExpr::GoalFacts("at".into()));
    }
}
