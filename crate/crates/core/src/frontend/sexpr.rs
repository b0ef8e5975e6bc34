//! S-expression reader with source positions. Symbols are lowercased;
//! `;` starts a comment running to the end of the line.

use super::FrontendError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(SExpr::atom)
    }
}

pub fn parse_error(pos: Pos, msg: impl Into<String>) -> FrontendError {
    FrontendError::Parse { line: pos.line, col: pos.col, message: msg.into() }
}

/// Reads exactly one top-level expression.
pub fn read(text: &str) -> Result<SExpr, FrontendError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut done: Option<SExpr> = None;
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let here = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == ';' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
            continue;
        }
        if done.is_some() {
            return Err(parse_error(here, "unexpected text after the closing parenthesis"));
        }
        match c {
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                col += 1;
                let Some((items, start)) = stack.pop() else {
                    return Err(parse_error(here, "unbalanced ')'"));
                };
                let e = SExpr::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(e),
                    None => done = Some(e),
                }
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                let e = SExpr::Atom(s, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(e),
                    None => return Err(parse_error(here, "expected '('")),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(parse_error(*start, "unclosed '('"));
    }
    done.ok_or_else(|| parse_error(Pos { line, col }, "empty input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let e = read("; comment\n(Define (x ?A)\n  :y)").unwrap();
        let items = e.list().unwrap();
        assert_eq!(items[0].atom(), Some("define"));
        assert_eq!(items[1].head(), Some("x"));
        assert_eq!(items[2].pos(), Pos { line: 3, col: 3 });
    }

    #[test]
    fn reports_unbalanced_input() {
        assert!(matches!(read("(a (b)"), Err(FrontendError::Parse { line: 1, col: 1, .. })));
        assert!(matches!(read("(a))"), Err(FrontendError::Parse { line: 1, col: 4, .. })));
        assert!(read("").is_err());
    }
}
