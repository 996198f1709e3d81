use crate::syntax::Span;

use super::{ErrorKind, LangError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    DotDot,
    Colon,
    And,
    Or,
    Tilde,
    Implies,
    Equiv,
    Bang,
    Question,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Colon => ":",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Tilde => "~",
            Tok::Implies => "=>",
            Tok::Equiv => "<=>",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Eq => "=",
            Tok::Ne => "~=",
            Tok::Lt => "<",
            Tok::Le => "=<",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Arrow => "->",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// longest first
const PUNCT: &[(&str, Tok)] = &[
    ("<=>", Tok::Equiv),
    ("..", Tok::DotDot),
    ("=>", Tok::Implies),
    ("=<", Tok::Le),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("~=", Tok::Ne),
    ("!=", Tok::Ne),
    ("->", Tok::Arrow),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (",", Tok::Comma),
    (";", Tok::Semi),
    (".", Tok::Dot),
    (":", Tok::Colon),
    ("&", Tok::And),
    ("|", Tok::Or),
    ("~", Tok::Tilde),
    ("!", Tok::Bang),
    ("?", Tok::Question),
    ("=", Tok::Eq),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
];

/// Splits `src` into tokens. Comments run from `//` or `%` to end of line.
pub fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = src;
    while let Some(c) = rest.chars().next() {
        let span = Span { line, column: col };
        if c == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if rest.starts_with("//") || c == '%' {
            let end = rest.find('\n').unwrap_or(rest.len());
            col += rest[..end].chars().count();
            rest = &rest[end..];
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '\''))
                .unwrap_or(rest.len());
            out.push(Token {
                tok: Tok::Ident(rest[..end].to_string()),
                span,
            });
            col += end;
            rest = &rest[end..];
            continue;
        }
        if c.is_ascii_digit() {
            let end = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let n: i64 = rest[..end].parse().map_err(|_| LangError {
                kind: ErrorKind::Syntax,
                span,
                message: format!("integer literal `{}` out of range", &rest[..end]),
            })?;
            out.push(Token { tok: Tok::Int(n), span });
            col += end;
            rest = &rest[end..];
            continue;
        }
        match PUNCT.iter().find(|(p, _)| rest.starts_with(p)) {
            Some((p, tok)) => {
                out.push(Token { tok: tok.clone(), span });
                col += p.len();
                rest = &rest[p.len()..];
            }
            None => {
                return Err(LangError {
                    kind: ErrorKind::Syntax,
                    span,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, column: col },
    });
    Ok(out)
}
