//! A small s-expression reader shared by the HDDL and HEL front ends.
//!
//! Every node remembers the 1-based line/column where it starts so that
//! later semantic checks can point back into the source.

use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom { text: String, pos: Pos },
    Str { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom { pos, .. } | SExpr::Str { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            _ => None,
        }
    }

    /// The leading atom of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReaderOptions {
    /// Fold atoms to lower case.
    pub lowercase: bool,
    /// Accept `"..."` string literals.
    pub strings: bool,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '"'
}

/// Lists nested deeper than this are rejected; consumers recurse over the tree.
pub const MAX_DEPTH: usize = 512;

/// Reads every top-level expression in `text`.
pub fn read_all(text: &str, opts: ReaderOptions) -> Result<Vec<SExpr>, SyntaxError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut stack: Vec<(Pos, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    loop {
        cur.skip_trivia();
        let pos = cur.pos();
        let Some(c) = cur.peek() else { break };
        let node = match c {
            '(' => {
                cur.bump();
                if stack.len() >= MAX_DEPTH {
                    return Err(SyntaxError {
                        pos,
                        message: format!("nesting deeper than {MAX_DEPTH} levels"),
                    });
                }
                stack.push((pos, Vec::new()));
                continue;
            }
            ')' => {
                cur.bump();
                match stack.pop() {
                    Some((open, items)) => SExpr::List { items, pos: open },
                    None => {
                        return Err(SyntaxError {
                            pos,
                            message: "unbalanced parentheses: unexpected ')'".into(),
                        })
                    }
                }
            }
            '"' => {
                if !opts.strings {
                    return Err(SyntaxError {
                        pos,
                        message: "lexical error: unexpected '\"'".into(),
                    });
                }
                cur.bump();
                let mut text = String::new();
                loop {
                    match cur.bump() {
                        Some('"') => break,
                        Some('\\') => match cur.bump() {
                            Some('n') => text.push('\n'),
                            Some(c) => text.push(c),
                            None => {
                                return Err(SyntaxError {
                                    pos,
                                    message: "unterminated string literal".into(),
                                })
                            }
                        },
                        Some(c) => text.push(c),
                        None => {
                            return Err(SyntaxError {
                                pos,
                                message: "unterminated string literal".into(),
                            })
                        }
                    }
                }
                SExpr::Str { text, pos }
            }
            _ => {
                let mut text = String::new();
                while let Some(c) = cur.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    if c.is_control() {
                        return Err(SyntaxError {
                            pos: cur.pos(),
                            message: format!("lexical error: unexpected character {:?}", c),
                        });
                    }
                    text.push(c);
                    cur.bump();
                }
                if opts.lowercase {
                    text = text.to_lowercase();
                }
                SExpr::Atom { text, pos }
            }
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(node),
            None => top.push(node),
        }
    }
    if let Some((open, _)) = stack.pop() {
        return Err(SyntaxError {
            pos: open,
            message: "unbalanced parentheses: '(' is never closed".into(),
        });
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let e = read_all(
            "(a (b c))\n ; note\n(D)",
            ReaderOptions {
                lowercase: true,
                strings: false,
            },
        )
        .unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].pos(), Pos::new(1, 1));
        assert_eq!(e[1].pos(), Pos::new(3, 1));
        assert_eq!(e[1].head(), Some("d"));
        let inner = &e[0].as_list().unwrap()[1];
        assert_eq!(inner.pos(), Pos::new(1, 4));
    }

    #[test]
    fn reports_unbalanced() {
        let err = read_all("(a (b)", ReaderOptions::default()).unwrap_err();
        assert_eq!(err.pos, Pos::new(1, 1));
        let err = read_all("a)", ReaderOptions::default()).unwrap_err();
        assert_eq!(err.pos, Pos::new(1, 2));
    }

    #[test]
    fn strings_only_when_enabled() {
        assert!(read_all("\"x\"", ReaderOptions::default()).is_err());
        let e = read_all(
            "(h \"a b\")",
            ReaderOptions {
                lowercase: false,
                strings: true,
            },
        )
        .unwrap();
        assert!(matches!(&e[0].as_list().unwrap()[1], SExpr::Str { text, .. } if text == "a b"));
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let text = "(".repeat(200_000) + &")".repeat(200_000);
        let err = read_all(&text, ReaderOptions::default()).unwrap_err();
        assert!(err.message.contains("nesting"));
        let ok = "(".repeat(MAX_DEPTH) + &")".repeat(MAX_DEPTH);
        assert!(read_all(&ok, ReaderOptions::default()).is_ok());
    }
}
