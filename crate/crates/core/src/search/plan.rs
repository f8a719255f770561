use crate::ground::call_syntax;

/// Renders a plan as `==>`, one `<idx> (<name> <args>)` line per action, `<==`.
pub fn plan_text(plan: &[String]) -> String {
    let mut out = String::from("==>\n");
    for (i, name) in plan.iter().enumerate() {
        out.push_str(&format!("{i} {}\n", call_syntax(name)));
    }
    out.push_str("<==\n");
    out
}

/// Reads back the output of [`plan_text`] as canonical operator names.
pub fn parse_plan_text(text: &str) -> Result<Vec<String>, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("==>") {
        return Err("missing ==> header".into());
    }
    let mut plan = Vec::new();
    for line in lines {
        if line == "<==" {
            return Ok(plan);
        }
        let (idx, call) = line
            .split_once(' ')
            .ok_or_else(|| format!("malformed line {line:?}"))?;
        if idx.parse::<usize>().ok() != Some(plan.len()) {
            return Err(format!("expected index {} in {line:?}", plan.len()));
        }
        let inner = call
            .strip_prefix('(')
            .and_then(|c| c.strip_suffix(')'))
            .ok_or_else(|| format!("malformed action in {line:?}"))?;
        let mut parts = inner.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| format!("empty action in {line:?}"))?;
        plan.push(format!("{name}[{}]", parts.collect::<Vec<_>>().join(",")));
    }
    Err("missing <== footer".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let plan = vec!["move[r1,p1,p3]".to_string(), "noop[]".to_string()];
        let text = plan_text(&plan);
        assert_eq!(text, "==>\n0 (move r1 p1 p3)\n1 (noop)\n<==\n");
        assert_eq!(parse_plan_text(&text).unwrap(), plan);
    }

    #[test]
    fn empty_plan() {
        assert_eq!(plan_text(&[]), "==>\n<==\n");
        assert!(parse_plan_text("==>\n<==\n").unwrap().is_empty());
    }
}
