use std::fmt;

use crate::logic::{parse_rat, Rat};

/// A 1-based source position. All spans compare equal so that values
/// carrying them compare structurally.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(Rat),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Prec,
    Iff,
    Implies,
    LArrow,
    FatArrow,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Bang,
    Amp,
    Pipe,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Num(r) => return write!(f, "number {r}"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Prec => "<<=",
            Tok::Iff => "<->",
            Tok::Implies => "->",
            Tok::LArrow => "<-",
            Tok::FatArrow => "=>",
            Tok::Assign => ":=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::At => "@",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    macro_rules! bump {
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
        let span = Span { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                bump!();
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), span));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            let text: String = chars[start..i].iter().collect();
            let r = parse_rat(&text).ok_or_else(|| LexError {
                message: format!("bad number {text}"),
                span,
            })?;
            out.push((Tok::Num(r), span));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("<<=") {
            (Tok::Prec, 3)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if rest.starts_with("<-") {
            (Tok::LArrow, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else if rest.starts_with("->") {
            (Tok::Implies, 2)
        } else if rest.starts_with("=>") {
            (Tok::FatArrow, 2)
        } else if rest.starts_with("!=") {
            (Tok::Ne, 2)
        } else if rest.starts_with(":=") {
            (Tok::Assign, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '@' => Tok::At,
                other => {
                    return Err(LexError {
                        message: format!("unexpected character `{other}`"),
                        span,
                    });
                }
            };
            (t, 1)
        };
        for _ in 0..len {
            bump!();
        }
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_and_numbers() {
        let toks: Vec<Tok> = lex("a <-> b <= 0.5 <<= c -> d // tail\n7/2 := x'")
            .unwrap()
            .into_iter()
            .map(|t| t.0)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("a".into()),
                Tok::Iff,
                Tok::Ident("b".into()),
                Tok::Le,
                Tok::Num(crate::logic::ratio(1, 2)),
                Tok::Prec,
                Tok::Ident("c".into()),
                Tok::Implies,
                Tok::Ident("d".into()),
                Tok::Num(crate::logic::rat(7)),
                Tok::Slash,
                Tok::Num(crate::logic::rat(2)),
                Tok::Assign,
                Tok::Ident("x'".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn reports_position() {
        let err = lex("a\n  #").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (2, 3));
    }
}
