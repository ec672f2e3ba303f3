//! Expression mini-language for exponent functions.
//!
//! Grammar:
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := unary ('^' factor)?          -- '^' is right-associative
//! unary  := '-' unary | atom
//! atom   := number | 'x' | 'y' | 'pi' | 'inf'
//!         | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//! The base of '^' is a full unary, so `-2^2` parses as `(-2)^2`; write
//! `-(2^2)` for the other reading. Functions: sin, cos, exp, log, abs, sqrt,
//! min, max, clamp. Every error carries the byte offset it occurred at.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
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
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Min,
    Max,
    Clamp,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "log" => (Func::Log, 1),
            "abs" => (Func::Abs, 1),
            "sqrt" => (Func::Sqrt, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "clamp" => (Func::Clamp, 3),
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
            Func::Clamp => "clamp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Var(Axis),
    Pi,
    Inf,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Parsed expression node; `offset` points at its source position.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub offset: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// The parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentExpression {
    pub source: String,
    pub root: Expr,
}

impl fmt::Display for ExponentExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print_expr(&self.root, f)
    }
}

fn print_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match &e.kind {
        ExprKind::Number(v) => write!(f, "{v}"),
        ExprKind::Var(Axis::X) => write!(f, "x"),
        ExprKind::Var(Axis::Y) => write!(f, "y"),
        ExprKind::Pi => write!(f, "pi"),
        ExprKind::Inf => write!(f, "inf"),
        ExprKind::Neg(inner) => {
            write!(f, "(-")?;
            print_expr(inner, f)?;
            write!(f, ")")
        }
        ExprKind::Binary(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            };
            write!(f, "(")?;
            print_expr(a, f)?;
            write!(f, "{sym}")?;
            print_expr(b, f)?;
            write!(f, ")")
        }
        ExprKind::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                print_expr(a, f)?;
            }
            write!(f, ")")
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { offset, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let offset = self.pos;
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), offset };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let offset = self.pos;
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), offset };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            let offset = self.pos;
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expr {
                kind: ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                offset,
            });
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            let offset = self.pos;
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), offset });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let c = match self.peek() {
            Some(c) => c,
            None => return self.err(self.pos, "unexpected end of expression"),
        };
        let offset = self.pos;
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return self.err(self.pos, "expected ')'");
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            return self.ident();
        }
        self.err(offset, format!("unexpected character '{}'", c as char))
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // 'e' belongs to something else
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr { kind: ExprKind::Number(v), offset: start }),
            Err(_) => self.err(start, format!("bad number literal '{text}'")),
        }
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        match name.as_str() {
            "x" => return Ok(Expr { kind: ExprKind::Var(Axis::X), offset: start }),
            "y" => return Ok(Expr { kind: ExprKind::Var(Axis::Y), offset: start }),
            "pi" => return Ok(Expr { kind: ExprKind::Pi, offset: start }),
            "inf" => return Ok(Expr { kind: ExprKind::Inf, offset: start }),
            _ => {}
        }
        let (func, arity) = match Func::lookup(&name) {
            Some(f) => f,
            None => return self.err(start, format!("unknown identifier '{name}'")),
        };
        if !self.eat(b'(') {
            return self.err(self.pos, format!("expected '(' after '{name}'"));
        }
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        if !self.eat(b')') {
            return self.err(self.pos, "expected ')'");
        }
        if args.len() != arity {
            return self.err(
                start,
                format!("'{name}' takes {arity} argument(s), got {}", args.len()),
            );
        }
        Ok(Expr { kind: ExprKind::Call(func, args), offset: start })
    }
}

/// Parse an expression; errors carry byte offsets.
pub fn parse_expression(text: &str) -> Result<ExponentExpression, ExprError> {
    if text.len() > 64 * 1024 {
        return Err(ExprError { offset: 0, message: "expression exceeds 64 KiB".into() });
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ExprError { offset: p.pos, message: "trailing input after expression".into() });
    }
    Ok(ExponentExpression { source: text.to_string(), root })
}

fn eval_node(e: &Expr, x: f64, y: Option<f64>) -> Result<f64, ExprError> {
    let v = match &e.kind {
        ExprKind::Number(v) => *v,
        ExprKind::Pi => std::f64::consts::PI,
        ExprKind::Inf => f64::INFINITY,
        ExprKind::Var(Axis::X) => x,
        ExprKind::Var(Axis::Y) => match y {
            Some(v) => v,
            None => {
                return Err(ExprError {
                    offset: e.offset,
                    message: "variable 'y' is not available on a 1-dimensional grid".into(),
                })
            }
        },
        ExprKind::Neg(inner) => -eval_node(inner, x, y)?,
        ExprKind::Binary(op, a, b) => {
            let av = eval_node(a, x, y)?;
            let bv = eval_node(b, x, y)?;
            match op {
                BinOp::Add => av + bv,
                BinOp::Sub => av - bv,
                BinOp::Mul => av * bv,
                BinOp::Div => av / bv,
                BinOp::Pow => av.powf(bv),
            }
        }
        ExprKind::Call(func, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_node(a, x, y)?);
            }
            match func {
                Func::Sin => vals[0].sin(),
                Func::Cos => vals[0].cos(),
                Func::Exp => vals[0].exp(),
                Func::Log => {
                    if vals[0] <= 0.0 {
                        return Err(ExprError {
                            offset: e.offset,
                            message: format!("log of non-positive value {}", vals[0]),
                        });
                    }
                    vals[0].ln()
                }
                Func::Abs => vals[0].abs(),
                Func::Sqrt => {
                    if vals[0] < 0.0 {
                        return Err(ExprError {
                            offset: e.offset,
                            message: format!("sqrt of negative value {}", vals[0]),
                        });
                    }
                    vals[0].sqrt()
                }
                Func::Min => vals[0].min(vals[1]),
                Func::Max => vals[0].max(vals[1]),
                Func::Clamp => vals[0].clamp(vals[1].min(vals[2]), vals[2]),
            }
        }
    };
    if v.is_nan() {
        return Err(ExprError { offset: e.offset, message: "expression produced NaN".into() });
    }
    Ok(v)
}

impl ExponentExpression {
    /// Evaluate at a point; `y` is `None` on 1-dimensional grids.
    pub fn eval(&self, x: f64, y: Option<f64>) -> Result<f64, ExprError> {
        eval_node(&self.root, x, y)
    }

    /// Pointwise evaluation on a grid; domain errors name the grid location.
    pub fn evaluate_on_grid(&self, grid: &varspace::Grid) -> Result<Vec<f64>, ExprError> {
        let mut out = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let c = grid.coord(i);
            let y = if grid.dim() == 2 { Some(c[1]) } else { None };
            let v = self.eval(c[0], y).map_err(|e| ExprError {
                offset: e.offset,
                message: format!("{} (at grid point {i}, x = {})", e.message, c[0]),
            })?;
            if v == f64::NEG_INFINITY {
                return Err(ExprError {
                    offset: self.root.offset,
                    message: format!("expression is -inf at grid point {i}"),
                });
            }
            out.push(v);
        }
        Ok(out)
    }
}
