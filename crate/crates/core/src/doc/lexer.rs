//! Tokens of the document format.
//!
//! A symbol is a run of name characters with bracket groups attached
//! directly to it, so `r[1-2]r[3-4]`, `h(1 3)~h(2 4)` and
//! `H(ID(a), ID(b))` are single tokens. A bracket group preceded by
//! whitespace stands alone. Newlines only separate declarations outside
//! braces.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Sym(String),
    /// A free-standing `(..)` or `[..]`; `inner` excludes the brackets.
    Group { open: char, inner: String },
    LBrace,
    RBrace,
    Semi,
    Colon,
    Plus,
    Eq,
    Newline,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Group { open: '(', inner } => write!(f, "`({inner})`"),
            Tok::Group { inner, .. } => write!(f, "`[{inner}]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Newline => f.write_str("end of line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

pub fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || "_'~.*@-".contains(c)
}

/// Tokenizes `text`, whose first character sits at `origin`.
pub fn lex(text: &str, origin: Loc) -> Result<Vec<Token>, (Loc, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (origin.line, origin.col);
    let mut i = 0;
    let mut depth = 0usize;
    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let loc = Loc { line, col };
        match c {
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance!();
                }
            }
            '\n' => {
                if depth == 0 && !matches!(out.last(), None | Some(Token { tok: Tok::Newline, .. })) {
                    out.push(Token { tok: Tok::Newline, loc });
                }
                advance!();
            }
            c if c.is_whitespace() => advance!(),
            '{' | '}' | ';' | ':' | '+' | '=' => {
                let tok = match c {
                    '{' => {
                        depth += 1;
                        Tok::LBrace
                    }
                    '}' => {
                        if depth == 0 {
                            return Err((loc, "unmatched `}`".into()));
                        }
                        depth -= 1;
                        Tok::RBrace
                    }
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    '+' => Tok::Plus,
                    _ => Tok::Eq,
                };
                out.push(Token { tok, loc });
                advance!();
            }
            '(' | '[' => {
                let start = i + 1;
                let end = group_end(&chars, i).ok_or((loc, format!("unclosed `{c}`")))?;
                let inner: String = chars[start..end].iter().collect();
                while i <= end {
                    advance!();
                }
                out.push(Token {
                    tok: Tok::Group { open: c, inner },
                    loc,
                });
            }
            c if is_name_char(c) => {
                let mut s = String::new();
                while i < chars.len() {
                    let d = chars[i];
                    if is_name_char(d) {
                        s.push(d);
                        advance!();
                    } else if d == '(' || d == '[' {
                        let end = group_end(&chars, i).ok_or((Loc { line, col }, format!("unclosed `{d}`")))?;
                        while i <= end {
                            s.push(chars[i]);
                            advance!();
                        }
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Sym(s), loc });
            }
            _ => return Err((loc, format!("unexpected character `{c}`"))),
        }
    }
    if depth != 0 {
        return Err((Loc { line, col }, "unclosed `{`".into()));
    }
    out.push(Token {
        tok: Tok::Newline,
        loc: Loc { line, col },
    });
    Ok(out)
}

/// Index of the bracket closing the one at `open`, respecting nesting.
fn group_end(chars: &[char], open: usize) -> Option<usize> {
    let mut stack = Vec::new();
    for (j, &c) in chars.iter().enumerate().skip(open) {
        match c {
            '(' => stack.push(')'),
            '[' => stack.push(']'),
            ')' | ']' => {
                if stack.pop() != Some(c) {
                    return None;
                }
                if stack.is_empty() {
                    return Some(j);
                }
            }
            '\n' => return None,
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, Loc { line: 1, col: 1 }).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn attached_groups() {
        assert_eq!(
            toks("D1 h(1 3)~h(2 4) [r[1-2] h()] = r[1-2]r[3-4] : x'"),
            vec![
                Tok::Sym("D1".into()),
                Tok::Sym("h(1 3)~h(2 4)".into()),
                Tok::Group {
                    open: '[',
                    inner: "r[1-2] h()".into()
                },
                Tok::Eq,
                Tok::Sym("r[1-2]r[3-4]".into()),
                Tok::Colon,
                Tok::Sym("x'".into()),
                Tok::Newline,
            ]
        );
        assert_eq!(
            toks("PAIRS (1 3) (2 4)"),
            vec![
                Tok::Sym("PAIRS".into()),
                Tok::Group { open: '(', inner: "1 3".into() },
                Tok::Group { open: '(', inner: "2 4".into() },
                Tok::Newline,
            ]
        );
    }

    #[test]
    fn newlines_inside_braces_are_dropped() {
        let t = toks("A {\n x;\n}\n# note\n\nB");
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 2);
    }

    #[test]
    fn errors_carry_locations() {
        let e = lex("PMC T\n  PAIRS (1 3", Loc { line: 1, col: 1 }).unwrap_err();
        assert_eq!(e.0, Loc { line: 2, col: 9 });
        assert!(lex("a ] b", Loc { line: 1, col: 1 }).is_err());
    }
}
