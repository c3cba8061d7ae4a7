//! Complex-valued expressions in one variable `x`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          (right-associative)
//! primary := number | 'x' | 'pi' | 'e' | 'i'
//!          | func '(' expr ')' | '(' expr ')'
//! func    := exp | log | sqrt | sin | cos | sinh | cosh
//! ```
//!
//! So `-x^2 = -(x^2)`, `2^-1 = 0.5` and `2^3^2 = 2^9`. `log`, `sqrt` and
//! non-integer powers use principal branches and refuse to evaluate on
//! their cut (the closed negative real axis).

use std::fmt;

use crate::complexmath::Complex;
use crate::error::{Error, Result};

pub const MAX_SOURCE_LEN: usize = 64 * 1024;
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        if src.len() > MAX_SOURCE_LEN {
            return Err(Error::Parse {
                offset: MAX_SOURCE_LEN,
                message: format!("expression longer than {MAX_SOURCE_LEN} bytes"),
            });
        }
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            depth: 0,
            end: src.len(),
        };
        if p.tokens.is_empty() {
            return Err(Error::Parse {
                offset: 0,
                message: "expected an expression, found end of input".into(),
            });
        }
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(Error::Parse {
                offset: t.offset,
                message: format!("expected operator or end of input, found {}", t.kind),
            }),
        }
    }

    /// Whether the imaginary unit appears anywhere in the tree.
    pub fn uses_imaginary_unit(&self) -> bool {
        match self {
            Expr::Const(Constant::I) => true,
            Expr::Num(_) | Expr::Const(_) | Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_imaginary_unit(),
            Expr::Binary(_, a, b) => a.uses_imaginary_unit() || b.uses_imaginary_unit(),
        }
    }

    pub fn eval(&self, x: Complex) -> Result<Complex> {
        let v = self.eval_inner(x)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!("expression value at x = {x}")))
        }
    }

    fn eval_inner(&self, x: Complex) -> Result<Complex> {
        Ok(match self {
            Expr::Num(v) => Complex::new(*v, 0.0),
            Expr::Const(Constant::Pi) => Complex::new(std::f64::consts::PI, 0.0),
            Expr::Const(Constant::E) => Complex::new(std::f64::consts::E, 0.0),
            Expr::Const(Constant::I) => Complex::new(0.0, 1.0),
            Expr::Var => x,
            Expr::Neg(a) => -a.eval_inner(x)?,
            Expr::Binary(op, a, b) => {
                let l = a.eval_inner(x)?;
                let r = b.eval_inner(x)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r.re == 0.0 && r.im == 0.0 {
                            return Err(Error::Eval(format!("division by zero at x = {x}")));
                        }
                        l / r
                    }
                    BinOp::Pow => power(l, r, x)?,
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval_inner(x)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => {
                        on_cut(v, "log", x)?;
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v.re == 0.0 && v.im == 0.0 {
                            Complex::new(0.0, 0.0)
                        } else {
                            on_cut(v, "sqrt", x)?;
                            v.sqrt()
                        }
                    }
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                }
            }
        })
    }
}

fn on_cut(v: Complex, name: &str, x: Complex) -> Result<()> {
    if v.im == 0.0 && v.re <= 0.0 {
        Err(Error::Eval(format!(
            "{name} evaluated on its branch cut (argument {v}) at x = {x}"
        )))
    } else {
        Ok(())
    }
}

fn power(base: Complex, exponent: Complex, x: Complex) -> Result<Complex> {
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= 1024.0 {
        let n = exponent.re as i32;
        if n < 0 && base.re == 0.0 && base.im == 0.0 {
            return Err(Error::Eval(format!("division by zero at x = {x}")));
        }
        return Ok(base.powi(n));
    }
    if base.re == 0.0 && base.im == 0.0 {
        return if exponent.re > 0.0 {
            Ok(Complex::new(0.0, 0.0))
        } else {
            Err(Error::Eval(format!("0 raised to {exponent} at x = {x}")))
        };
    }
    on_cut(base, "non-integer power", x)?;
    Ok((exponent * base.ln()).exp())
}

impl fmt::Display for Expr {
    /// Fully parenthesised; parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Const(Constant::I) => f.write_str("i"),
            Expr::Var => f.write_str("x"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "number {v}"),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Plus => f.write_str("`+`"),
            TokenKind::Minus => f.write_str("`-`"),
            TokenKind::Star => f.write_str("`*`"),
            TokenKind::Slash => f.write_str("`/`"),
            TokenKind::Caret => f.write_str("`^`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => TokenKind::Plus,
            b'-' => TokenKind::Minus,
            b'*' => TokenKind::Star,
            b'/' => TokenKind::Slash,
            b'^' => TokenKind::Caret,
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("number `{text}` is out of range"),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Num(v),
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(src[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        tokens.push(Token {
            kind,
            offset: start,
        });
        i += 1;
    }
    Ok(tokens)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        // only an exponent if digits follow; otherwise `2e` is `2` then `e`
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = j;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    i
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> Error {
        match self.peek() {
            Some(t) => Error::Parse {
                offset: t.offset,
                message: format!("expected {expected}, found {}", t.kind),
            },
            None => Error::Parse {
                offset: self.end,
                message: format!("expected {expected}, found end of input"),
            },
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let offset = self.peek().map_or(self.end, |t| t.offset);
            return Err(Error::Parse {
                offset,
                message: format!("expression nested deeper than {MAX_DEPTH} levels"),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => break,
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        self.enter()?;
        let e = match self.peek_kind() {
            Some(TokenKind::Minus) => {
                self.next();
                Expr::Neg(Box::new(self.unary()?))
            }
            Some(TokenKind::Plus) => {
                self.next();
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if let Some(TokenKind::Caret) = self.peek_kind() {
            self.next();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("a number, `x`, a constant, a function or `(`"));
        };
        match tok.kind {
            TokenKind::Num(v) => {
                self.next();
                Ok(Expr::Num(v))
            }
            TokenKind::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            TokenKind::Ident(ref name) => {
                self.next();
                match name.as_str() {
                    "x" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    "i" => Ok(Expr::Const(Constant::I)),
                    other => match Func::from_name(other) {
                        Some(func) => {
                            if self.peek_kind() != Some(&TokenKind::LParen) {
                                return Err(self.error_here(&format!("`(` after `{other}`")));
                            }
                            self.next();
                            let arg = self.expr()?;
                            self.expect_rparen()?;
                            Ok(Expr::Call(func, Box::new(arg)))
                        }
                        None => Err(Error::UnknownIdentifier {
                            name: other.to_string(),
                            offset: tok.offset,
                        }),
                    },
                }
            }
            _ => Err(self.error_here("a number, `x`, a constant, a function or `(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek_kind() == Some(&TokenKind::RParen) {
            self.next();
            Ok(())
        } else {
            Err(self.error_here("`)`"))
        }
    }
}
