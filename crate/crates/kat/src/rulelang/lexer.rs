//! Hand-rolled lexer for the dialect.

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase identifier, optionally `*`-suffixed (coarse predicates).
    Ident(String),
    /// Capitalized identifier.
    Var(String),
    Num(i64),
    Dot,
    DotDot,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Neq,
    Plus,
    Minus,
    /// The `cr-rule` keyword (hyphen prevents lexing it as an identifier).
    CrRule,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::CrRule => "`cr-rule`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(ch) = c {
                if ch == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '%' => {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            'a'..='z' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        s.push(c2);
                        bump!();
                    } else {
                        break;
                    }
                }
                if chars.peek() == Some(&'*') {
                    s.push('*');
                    bump!();
                }
                // `cr` immediately followed by `-rule` is the keyword.
                if s == "cr" && chars.peek() == Some(&'-') {
                    let save: String = chars.clone().take(5).collect();
                    if save == "-rule" {
                        for _ in 0..5 {
                            bump!();
                        }
                        out.push(Token { tok: Tok::CrRule, span: Span::new(tl, tc, 7) });
                        continue;
                    }
                }
                let len = s.chars().count() as u32;
                out.push(Token { tok: Tok::Ident(s), span: Span::new(tl, tc, len) });
            }
            'A'..='Z' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        s.push(c2);
                        bump!();
                    } else {
                        break;
                    }
                }
                let len = s.chars().count() as u32;
                out.push(Token { tok: Tok::Var(s), span: Span::new(tl, tc, len) });
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        s.push(c2);
                        bump!();
                    } else {
                        break;
                    }
                }
                let n: i64 = s.parse().map_err(|_| ParseError {
                    span: Span::new(tl, tc, s.len() as u32),
                    message: format!("number `{s}` out of range"),
                })?;
                out.push(Token { tok: Tok::Num(n), span: Span::new(tl, tc, s.len() as u32) });
            }
            '.' => {
                bump!();
                if chars.peek() == Some(&'.') {
                    bump!();
                    out.push(Token { tok: Tok::DotDot, span: Span::new(tl, tc, 2) });
                } else {
                    out.push(Token { tok: Tok::Dot, span: Span::new(tl, tc, 1) });
                }
            }
            ',' => {
                bump!();
                out.push(Token { tok: Tok::Comma, span: Span::new(tl, tc, 1) });
            }
            '(' => {
                bump!();
                out.push(Token { tok: Tok::LParen, span: Span::new(tl, tc, 1) });
            }
            ')' => {
                bump!();
                out.push(Token { tok: Tok::RParen, span: Span::new(tl, tc, 1) });
            }
            '{' => {
                bump!();
                out.push(Token { tok: Tok::LBrace, span: Span::new(tl, tc, 1) });
            }
            '}' => {
                bump!();
                out.push(Token { tok: Tok::RBrace, span: Span::new(tl, tc, 1) });
            }
            '=' => {
                bump!();
                out.push(Token { tok: Tok::Eq, span: Span::new(tl, tc, 1) });
            }
            '!' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    out.push(Token { tok: Tok::Neq, span: Span::new(tl, tc, 2) });
                } else {
                    return Err(ParseError {
                        span: Span::new(tl, tc, 1),
                        message: "expected `!=`".into(),
                    });
                }
            }
            '+' => {
                bump!();
                out.push(Token { tok: Tok::Plus, span: Span::new(tl, tc, 1) });
            }
            '-' => {
                bump!();
                out.push(Token { tok: Tok::Minus, span: Span::new(tl, tc, 1) });
            }
            other => {
                return Err(ParseError {
                    span: Span::new(tl, tc, 1),
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_starred_idents_and_ranges() {
        let toks = lex("loc*(G, 0..9).").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("loc*".into()));
        assert_eq!(toks[4].tok, Tok::Num(0));
        assert_eq!(toks[5].tok, Tok::DotDot);
        assert_eq!(toks[6].tok, Tok::Num(9));
        assert_eq!(toks.last().unwrap().tok, Tok::Dot);
    }

    #[test]
    fn lexes_cr_rule_keyword() {
        let toks = lex("cr-rule -p(A).").unwrap();
        assert_eq!(toks[0].tok, Tok::CrRule);
        assert_eq!(toks[1].tok, Tok::Minus);
    }

    #[test]
    fn comment_runs_to_end_of_line() {
        let toks = lex("a. % b c d\nb.").unwrap();
        assert_eq!(toks.len(), 4);
    }

    #[test]
    fn error_positions_point_at_offender() {
        let err = lex("ok.\n  @").unwrap_err();
        assert_eq!(err.span.line, 2);
        assert_eq!(err.span.col, 3);
    }
}
