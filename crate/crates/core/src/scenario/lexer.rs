// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

use super::ast::Span;
use super::error::{ErrorCode, Result, ScenarioError};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number { value: f64, imaginary: bool },
    Semi,
    Comma,
    Colon,
    Eq,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Slash,
    At,
    Tilde,
    Bar,
    Arrow,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number { .. } => "number".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::At => "@",
            Tok::Tilde => "~",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::Ident(_) | Tok::Number { .. } => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&chars, &mut i, span)?
        } else {
            i += 1;
            match c {
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '=' => Tok::Eq,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '+' => Tok::Plus,
                '-' if chars.get(i) == Some(&'>') => {
                    i += 1;
                    Tok::Arrow
                }
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '@' => Tok::At,
                '~' => Tok::Tilde,
                '|' => Tok::Bar,
                _ => return Err(ScenarioError::new(ErrorCode::UnexpectedChar, span, format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push(Token { tok, span });
    }
    Ok(out)
}

fn lex_number(chars: &[char], i: &mut usize, span: Span) -> Result<Tok> {
    let start = *i;
    let digits = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
    };
    digits(i);
    if *i < chars.len() && chars[*i] == '.' {
        *i += 1;
        digits(i);
    }
    if *i < chars.len() && (chars[*i] == 'e' || chars[*i] == 'E') {
        let save = *i;
        *i += 1;
        if *i < chars.len() && (chars[*i] == '+' || chars[*i] == '-') {
            *i += 1;
        }
        let before = *i;
        digits(i);
        if before == *i {
            *i = save;
        }
    }
    let text: String = chars[start..*i].iter().collect();
    let mut imaginary = false;
    if *i < chars.len() && chars[*i] == 'i' && !chars.get(*i + 1).is_some_and(|&c| is_ident_char(c)) {
        imaginary = true;
        *i += 1;
    }
    if *i < chars.len() && (is_ident_char(chars[*i]) || chars[*i] == '.') {
        let mut end = *i;
        while end < chars.len() && (is_ident_char(chars[end]) || chars[end] == '.') {
            end += 1;
        }
        let bad: String = chars[start..end].iter().collect();
        return Err(ScenarioError::new(ErrorCode::BadNumber, span, format!("malformed number `{bad}`")));
    }
    let value: f64 = text
        .parse()
        .map_err(|_| ScenarioError::new(ErrorCode::BadNumber, span, format!("malformed number `{text}`")))?;
    if !value.is_finite() {
        return Err(ScenarioError::new(ErrorCode::BadNumber, span, format!("number `{text}` is out of range")));
    }
    Ok(Tok::Number { value, imaginary })
}

/// Checks bracket nesting before parsing so that delimiter errors point at
/// the offending bracket rather than at a later token.
pub fn check_delimiters(tokens: &[Token]) -> Result<()> {
    let mut stack: Vec<&Token> = Vec::new();
    for t in tokens {
        match t.tok {
            Tok::LParen | Tok::LBracket | Tok::LBrace => stack.push(t),
            Tok::RParen | Tok::RBracket | Tok::RBrace => {
                let want = match t.tok {
                    Tok::RParen => Tok::LParen,
                    Tok::RBracket => Tok::LBracket,
                    _ => Tok::LBrace,
                };
                match stack.pop() {
                    Some(open) if open.tok == want => {}
                    Some(open) => {
                        return Err(ScenarioError::new(
                            ErrorCode::UnmatchedCloser,
                            t.span,
                            format!("{} does not close {} from line {}", t.tok.describe(), open.tok.describe(), open.span.line),
                        ))
                    }
                    None => {
                        return Err(ScenarioError::new(
                            ErrorCode::UnmatchedCloser,
                            t.span,
                            format!("{} has no matching opener", t.tok.describe()),
                        ))
                    }
                }
            }
            _ => {}
        }
    }
    match stack.pop() {
        Some(open) => Err(ScenarioError::new(
            ErrorCode::UnclosedDelimiter,
            open.span,
            format!("{} is never closed", open.tok.describe()),
        )),
        None => Ok(()),
    }
}
