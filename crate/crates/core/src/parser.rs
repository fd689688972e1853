//! Concrete syntax for expressions and probability files.
//!
//! Expressions:
//!
//! ```text
//! or   := and ('|' and)*
//! and  := not ('&' not)*
//! not  := '!' not | atom
//! atom := IDENT | '0' | '1' | '(' or ')'
//! IDENT = [A-Za-z_][A-Za-z0-9_']*
//! ```
//!
//! A chain `a & b & c` becomes one `And` node with three children; a
//! parenthesized group stays a separate node. Juxtaposition is not
//! conjunction: `x1x3` is a single identifier.
//!
//! Probability files hold one `name = value` per line, where the value is a
//! decimal (`0.25`) or a rational (`1/4`), and `#` starts a comment.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::prob::{Prob, ProbAssignment};

/// Byte range `start..end` in the parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(n) => format!("identifier `{n}`"),
            Tok::Const(b) => format!("constant `{}`", *b as u8),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// True if `name` is in the identifier lexical class.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_continue)
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(start, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let single = match c {
            '!' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            it.next();
            out.push((tok, SourceSpan::new(start, start + 1)));
            continue;
        }
        if is_ident_start(c) || c.is_ascii_digit() {
            let mut end = start;
            while let Some(&(i, d)) = it.peek() {
                if is_ident_continue(d) {
                    end = i + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            let word = &text[start..end];
            let span = SourceSpan::new(start, end);
            let tok = if is_ident_start(c) {
                Tok::Ident(word.to_string())
            } else {
                match word {
                    "0" => Tok::Const(false),
                    "1" => Tok::Const(true),
                    _ => {
                        return Err(Error::Syntax {
                            span,
                            message: format!("`{word}` is neither a constant (0, 1) nor an identifier"),
                        })
                    }
                }
            };
            out.push((tok, span));
            continue;
        }
        return Err(Error::Syntax {
            span: SourceSpan::new(start, start + c.len_utf8()),
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::Eof, SourceSpan::new(text.len(), text.len())));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> Error {
        Error::Syntax {
            span: self.span(),
            message,
        }
    }

    fn parse_or(&mut self) -> Result<Expr> {
        let mut items = vec![self.parse_and()?];
        while *self.peek() == Tok::Or {
            self.bump();
            items.push(self.parse_and()?);
        }
        Ok(Expr::or(items))
    }

    fn parse_and(&mut self) -> Result<Expr> {
        let mut items = vec![self.parse_not()?];
        while *self.peek() == Tok::And {
            self.bump();
            items.push(self.parse_not()?);
        }
        Ok(Expr::and(items))
    }

    fn parse_not(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Expr::not(self.parse_not()?));
        }
        self.parse_atom()
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::Var(name))
            }
            Tok::Const(b) => {
                self.bump();
                Ok(Expr::Const(b))
            }
            Tok::LParen => {
                let open = self.span();
                self.bump();
                let inner = self.parse_or()?;
                if *self.peek() != Tok::RParen {
                    return Err(Error::Syntax {
                        span: SourceSpan::new(open.start, self.span().end),
                        message: format!("expected `)`, found {}", self.peek().describe()),
                    });
                }
                self.bump();
                Ok(inner)
            }
            other => Err(self.error(format!("expected an operand, found {}", other.describe()))),
        }
    }
}

/// Parses an expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.parse_or()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(e)
}

/// Formats an expression as re-parseable text with minimal parentheses.
///
/// Generated names `v#k` are escaped as `v'k`.
pub fn format_expr(expr: &Expr) -> String {
    render(expr, true)
}

pub(crate) fn render(expr: &Expr, escape: bool) -> String {
    let mut out = String::new();
    write_expr(expr, escape, &mut out);
    out
}

fn write_expr(expr: &Expr, escape: bool, out: &mut String) {
    match expr {
        Expr::Var(n) if escape => out.push_str(&n.replace('#', "'")),
        Expr::Var(n) => out.push_str(n),
        Expr::Const(b) => out.push(if *b { '1' } else { '0' }),
        Expr::Not(c) => {
            out.push('!');
            write_child(c, matches!(**c, Expr::And(_) | Expr::Or(_)), escape, out);
        }
        Expr::And(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push('&');
                }
                write_child(c, matches!(c, Expr::And(_) | Expr::Or(_)), escape, out);
            }
        }
        Expr::Or(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_child(c, matches!(c, Expr::Or(_)), escape, out);
            }
        }
    }
}

fn write_child(child: &Expr, parens: bool, escape: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(child, escape, out);
        out.push(')');
    } else {
        write_expr(child, escape, out);
    }
}

/// Parses a probability file. Accepts LF and CRLF line endings.
pub fn parse_probs(text: &str) -> Result<ProbAssignment> {
    let mut out = ProbAssignment::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| Error::ProbSyntax {
            line: line_no,
            message,
        };
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| syntax("expected `name = value`".into()))?;
        let (name, value) = (name.trim(), value.trim());
        if !is_identifier(name) {
            return Err(syntax(format!("`{name}` is not a valid variable name")));
        }
        let prob: Prob = value.parse().map_err(|e| syntax(format!("{e}")))?;
        if !prob.in_unit_interval() {
            return Err(Error::OutOfRange {
                name: name.into(),
                value: value.into(),
            });
        }
        if out.contains(name) {
            return Err(Error::DuplicateName(name.into()));
        }
        out.set(name, prob)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    #[test]
    fn parses_example_dnf() {
        let e = parse_expr("x1&x3 | x1&x4 | x2&x4").unwrap();
        assert_eq!(
            e,
            Expr::Or(vec![
                Expr::And(vec![v("x1"), v("x3")]),
                Expr::And(vec![v("x1"), v("x4")]),
                Expr::And(vec![v("x2"), v("x4")]),
            ])
        );
    }

    #[test]
    fn parses_negated_group() {
        assert_eq!(
            parse_expr("!(a|b)").unwrap(),
            Expr::not(Expr::Or(vec![v("a"), v("b")]))
        );
    }

    #[test]
    fn dangling_operator_is_error() {
        let err = parse_expr("a &").unwrap_err();
        match err {
            Error::Syntax { span, .. } => assert_eq!(span, SourceSpan::new(3, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_syntax_errors() {
        assert!(parse_expr("").is_err());
        assert!(parse_expr("(a | b").is_err());
        assert!(parse_expr("a b").is_err());
        assert!(parse_expr("2").is_err());
        assert!(parse_expr("a ^ b").is_err());
        assert!(parse_expr("x#1").is_err());
    }

    #[test]
    fn juxtaposition_is_one_identifier() {
        assert_eq!(parse_expr("x1x3").unwrap(), v("x1x3"));
        assert_eq!(parse_expr("x4''").unwrap(), v("x4''"));
    }

    #[test]
    fn precedence_and_grouping() {
        assert_eq!(
            parse_expr("!a & b | c").unwrap(),
            Expr::Or(vec![Expr::And(vec![Expr::not(v("a")), v("b")]), v("c")])
        );
        assert_eq!(
            parse_expr("a & (b & c)").unwrap(),
            Expr::And(vec![v("a"), Expr::And(vec![v("b"), v("c")])])
        );
    }

    #[test]
    fn format_examples() {
        let e = Expr::Or(vec![Expr::And(vec![v("x1"), v("x3")]), v("x2")]);
        assert_eq!(format_expr(&e), "x1&x3 | x2");
        assert_eq!(format_expr(&Expr::not(v("a"))), "!a");
        assert_eq!(format_expr(&Expr::Const(true)), "1");
        assert_eq!(format_expr(&parse_expr("(a|b)&!(c&d)").unwrap()), "(a | b)&!(c&d)");
        assert_eq!(format_expr(&v("x4#1")), "x4'1");
        assert_eq!(v("x4#1").to_string(), "x4#1");
    }

    #[test]
    fn probs_mixed_demotes() {
        let p = parse_probs("x = 1/2\ny = 0.25").unwrap();
        assert!(!p.is_exact());
        assert_eq!(p.get("x").unwrap(), &Prob::half());
        assert!(p.get("x").unwrap().is_exact());
    }

    #[test]
    fn probs_out_of_range_and_duplicate() {
        assert!(matches!(parse_probs("x = 3/2"), Err(Error::OutOfRange { .. })));
        assert!(matches!(parse_probs("x = -0.1"), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            parse_probs("x = 1/2\nx = 1/3"),
            Err(Error::DuplicateName(_))
        ));
        assert!(matches!(
            parse_probs("x 1/2"),
            Err(Error::ProbSyntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_probs("\n\nx = abc"),
            Err(Error::ProbSyntax { line: 3, .. })
        ));
    }

    #[test]
    fn probs_exact_example() {
        let p = parse_probs("# chain\r\ny1 = 1/5\r\ny2 = 5/8  # second\r\ny3 = 2/3\r\n").unwrap();
        assert!(p.is_exact());
        assert_eq!(p.get("y1").unwrap(), &Prob::ratio(1, 5));
        assert_eq!(p.get("y2").unwrap(), &Prob::ratio(5, 8));
        assert_eq!(p.get("y3").unwrap(), &Prob::ratio(2, 3));
    }
}
