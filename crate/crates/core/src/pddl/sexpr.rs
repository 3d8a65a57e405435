//! Minimal s-expression reader with source positions.

use std::fmt;

use super::PddlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Symbol(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Symbol(..) => None,
        }
    }

    /// The leading symbol of a list, lower-cased.
    pub fn head(&self) -> Option<String> {
        self.as_list()?.first()?.as_symbol().map(str::to_ascii_lowercase)
    }
}

pub fn syntax(pos: Pos, message: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

/// Parses every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, PddlError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let here = Pos { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
            continue;
        }
        col += 1;
        match c {
            ';' => {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => stack.push((Vec::new(), here)),
            ')' => {
                let (items, start) = stack.pop().ok_or_else(|| syntax(here, "unbalanced `)`"))?;
                let list = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            c if c.is_whitespace() => {}
            c => {
                let mut word = String::new();
                word.push(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    word.push(n);
                    chars.next();
                    col += 1;
                }
                if word.chars().any(|ch| ch.is_control()) {
                    return Err(syntax(here, "control character in symbol"));
                }
                let sym = Sexp::Symbol(word, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(sym),
                    None => top.push(sym),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed `(`"));
    }
    Ok(top)
}
