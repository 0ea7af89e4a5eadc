//! Infix parser for the expression grammar used in config files and on the
//! command line: `+ - * /`, `^` with integer exponents, function calls
//! (`sqrt`, `exp`, `log`, `sin`, `cos`), parentheses, and the chart's declared
//! coordinate names. Errors carry line/column positions.

use crate::error::{CoreError, Result};
use crate::expr::ScalarExpression as E;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> CoreError {
    CoreError::Parse {
        line,
        col,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let token = match c {
            '+' => {
                bump(&mut chars);
                Token::Plus
            }
            '-' => {
                bump(&mut chars);
                Token::Minus
            }
            '*' => {
                bump(&mut chars);
                Token::Star
            }
            '/' => {
                bump(&mut chars);
                Token::Slash
            }
            '^' => {
                bump(&mut chars);
                Token::Caret
            }
            '(' => {
                bump(&mut chars);
                Token::LParen
            }
            ')' => {
                bump(&mut chars);
                Token::RParen
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        s.push(bump(&mut chars));
                    } else if d == 'e' || d == 'E' {
                        // exponent part: allow e, e+, e- followed by digits
                        let mut probe = chars.clone();
                        probe.next();
                        match probe.peek() {
                            Some(&p) if p.is_ascii_digit() || p == '+' || p == '-' => {
                                s.push(bump(&mut chars));
                                if let Some(&p2) = chars.peek() {
                                    if p2 == '+' || p2 == '-' {
                                        s.push(bump(&mut chars));
                                    }
                                }
                            }
                            _ => break,
                        }
                    } else {
                        break;
                    }
                }
                let value: f64 = s
                    .parse()
                    .map_err(|_| err(tline, tcol, format!("malformed number `{s}`")))?;
                Token::Number(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Token::Ident(s)
            }
            other => return Err(err(tline, tcol, format!("unexpected character `{other}`"))),
        };
        tokens.push(Spanned {
            token,
            line: tline,
            col: tcol,
        });
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    coords: &'a [String],
    src_end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.col))
            .unwrap_or(self.src_end)
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if t.token == token => Ok(()),
            Some(t) => Err(err(t.line, t.col, format!("expected {what}"))),
            None => {
                let (l, c) = self.src_end;
                Err(err(l, c, format!("expected {what}, found end of input")))
            }
        }
    }

    // expr := term (('+'|'-') term)*
    fn expression(&mut self) -> Result<E> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t.token {
                Token::Plus => {
                    self.next();
                    acc = E::Add(acc.into(), self.term()?.into());
                }
                Token::Minus => {
                    self.next();
                    acc = E::Sub(acc.into(), self.term()?.into());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<E> {
        let mut acc = self.factor()?;
        while let Some(t) = self.peek() {
            match t.token {
                Token::Star => {
                    self.next();
                    acc = E::Mul(acc.into(), self.factor()?.into());
                }
                Token::Slash => {
                    self.next();
                    acc = E::Div(acc.into(), self.factor()?.into());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // factor := ('-')* power
    fn factor(&mut self) -> Result<E> {
        if let Some(t) = self.peek() {
            if t.token == Token::Minus {
                self.next();
                return Ok(E::Neg(self.factor()?.into()));
            }
        }
        self.power()
    }

    // power := atom ('^' int_exponent)*
    fn power(&mut self) -> Result<E> {
        let base = self.atom()?;
        if let Some(t) = self.peek() {
            if t.token == Token::Caret {
                self.next();
                let exponent = self.integer_exponent()?;
                // right-associative: parse the rest of the chain first
                return Ok(E::PowInt(base.into(), exponent));
            }
        }
        Ok(base)
    }

    /// Exponents are integers: `2`, `-3`, or a parenthesized signed integer.
    fn integer_exponent(&mut self) -> Result<i32> {
        let (l, c) = self.here();
        match self.next() {
            Some(Spanned {
                token: Token::Number(v),
                line,
                col,
            }) => int_value(v, line, col),
            Some(Spanned {
                token: Token::Minus,
                ..
            }) => Ok(-self.integer_exponent()?),
            Some(Spanned {
                token: Token::LParen,
                ..
            }) => {
                let v = self.integer_exponent()?;
                self.expect(Token::RParen, "`)` closing the exponent")?;
                Ok(v)
            }
            _ => Err(err(l, c, "expected an integer exponent after `^`")),
        }
    }

    fn atom(&mut self) -> Result<E> {
        let (l, c) = self.here();
        match self.next() {
            Some(Spanned {
                token: Token::Number(v),
                ..
            }) => Ok(E::Constant(v)),
            Some(Spanned {
                token: Token::LParen,
                ..
            }) => {
                let inner = self.expression()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Spanned {
                token: Token::Ident(name),
                line,
                col,
            }) => {
                let is_call = matches!(
                    self.peek(),
                    Some(Spanned {
                        token: Token::LParen,
                        ..
                    })
                );
                if is_call {
                    self.next();
                    let arg = self.expression()?;
                    self.expect(Token::RParen, "`)` closing the call")?;
                    let arg = Box::new(arg);
                    return match name.as_str() {
                        "sqrt" => Ok(E::Sqrt(arg)),
                        "exp" => Ok(E::Exp(arg)),
                        "log" | "ln" => Ok(E::Log(arg)),
                        "sin" => Ok(E::Sin(arg)),
                        "cos" => Ok(E::Cos(arg)),
                        _ => Err(err(line, col, format!("unknown function `{name}`"))),
                    };
                }
                match self.coords.iter().position(|n| n == &name) {
                    Some(i) => Ok(E::Var(i)),
                    None => Err(err(
                        line,
                        col,
                        format!(
                            "unknown identifier `{name}` (declared coordinates: {})",
                            self.coords.join(", ")
                        ),
                    )),
                }
            }
            Some(t) => Err(err(t.line, t.col, "expected a value")),
            None => Err(err(l, c, "unexpected end of input")),
        }
    }
}

fn int_value(v: f64, line: usize, col: usize) -> Result<i32> {
    if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 {
        Ok(v as i32)
    } else {
        Err(err(line, col, format!("exponent must be an integer, got {v}")))
    }
}

/// Parse an infix expression over the named coordinates.
pub fn parse_expression(src: &str, coords: &[String]) -> Result<E> {
    let tokens = tokenize(src)?;
    let lines = src.lines().count().max(1);
    let last_len = src.lines().last().map(|l| l.len()).unwrap_or(0);
    let mut parser = Parser {
        tokens,
        pos: 0,
        coords,
        src_end: (lines, last_len + 1),
    };
    let expr = parser.expression()?;
    if let Some(t) = parser.peek() {
        return Err(err(t.line, t.col, "trailing input after expression"));
    }
    Ok(expr)
}
