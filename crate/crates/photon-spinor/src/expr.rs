//! Scalar expressions in (t, x1, x2, x3) with exact symbolic derivatives.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, the constants `pi`, `e`, `i`,
//! and `exp ln log sqrt sin cos tan sinh cosh`. Variables default to `t, x1, x2, x3`
//! (aliases `x, y, z`); other charts pass their own names.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{Mat6, Spinor};

use crate::error::{Error, Result};

pub const DEFAULT_VARS: [&str; 4] = ["t", "x1", "x2", "x3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Exp => z.exp(),
            Func::Ln => z.ln(),
            Func::Sqrt => z.sqrt(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
        }
    }
}

// Integer and positive-real cases go through the exact real routines.
fn cpow(base: Complex64, ex: Complex64) -> Complex64 {
    if ex.im == 0.0 && ex.re.fract() == 0.0 && ex.re.abs() <= 64.0 {
        base.powi(ex.re as i32)
    } else if base.im == 0.0 && base.re > 0.0 && ex.im == 0.0 {
        Complex64::new(base.re.powf(ex.re), 0.0)
    } else {
        base.powc(ex)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(Complex64),
    Var(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn num(x: f64) -> Self {
        Expr::node(Node::Num(Complex64::new(x, 0.0)))
    }

    pub fn complex(z: Complex64) -> Self {
        Expr::node(Node::Num(z))
    }

    pub fn var(i: usize) -> Self {
        Expr::node(Node::Var(i))
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        if let Some(z) = arg.as_const() {
            return Expr::complex(f.apply(z));
        }
        Expr::node(Node::Call(f, arg))
    }

    pub fn sqrt(self) -> Self {
        Expr::call(Func::Sqrt, self)
    }

    pub fn ln(self) -> Self {
        Expr::call(Func::Ln, self)
    }

    pub fn sin(self) -> Self {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(self) -> Self {
        Expr::call(Func::Cos, self)
    }

    pub fn powf(self, p: f64) -> Self {
        self.pow(Expr::num(p))
    }

    pub fn pow(self, p: Expr) -> Self {
        match (self.as_const(), p.as_const()) {
            (Some(a), Some(b)) => Expr::complex(cpow(a, b)),
            (_, Some(b)) if b == Complex64::new(1.0, 0.0) => self,
            (_, Some(b)) if b == Complex64::new(0.0, 0.0) => Expr::num(1.0),
            _ => Expr::node(Node::Pow(self, p)),
        }
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match &*self.0 {
            Node::Num(z) => Some(*z),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const() == Some(Complex64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(Complex64::new(1.0, 0.0))
    }

    /// True when the expression does not mention variable `v`.
    pub fn independent_of(&self, v: usize) -> bool {
        match &*self.0 {
            Node::Num(_) => true,
            Node::Var(i) => *i != v,
            Node::Neg(a) | Node::Call(_, a) => a.independent_of(v),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.independent_of(v) && b.independent_of(v)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        (0..8).all(|v| self.independent_of(v))
    }

    pub fn eval(&self, vars: &[f64]) -> Complex64 {
        match &*self.0 {
            Node::Num(z) => *z,
            Node::Var(i) => Complex64::new(vars.get(*i).copied().unwrap_or(0.0), 0.0),
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::Pow(a, b) => cpow(a.eval(vars), b.eval(vars)),
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    pub fn eval_real(&self, vars: &[f64]) -> f64 {
        self.eval(vars).re
    }

    /// ∂/∂(variable v).
    pub fn diff(&self, v: usize) -> Expr {
        if self.independent_of(v) {
            return Expr::num(0.0);
        }
        match &*self.0 {
            Node::Num(_) => Expr::num(0.0),
            Node::Var(i) => Expr::num(if *i == v { 1.0 } else { 0.0 }),
            Node::Neg(a) => -a.diff(v),
            Node::Add(a, b) => a.diff(v) + b.diff(v),
            Node::Sub(a, b) => a.diff(v) - b.diff(v),
            Node::Mul(a, b) => a.diff(v) * b.clone() + a.clone() * b.diff(v),
            Node::Div(a, b) => (a.diff(v) * b.clone() - a.clone() * b.diff(v)) / (b.clone() * b.clone()),
            Node::Pow(a, b) => {
                if b.independent_of(v) {
                    b.clone() * a.clone().pow(b.clone() - Expr::num(1.0)) * a.diff(v)
                } else {
                    self.clone() * (b.diff(v) * a.clone().ln() + b.clone() * a.diff(v) / a.clone())
                }
            }
            Node::Call(f, a) => {
                let da = a.diff(v);
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Ln => Expr::num(1.0) / a.clone(),
                    Func::Sqrt => Expr::num(0.5) / self.clone(),
                    Func::Sin => Expr::call(Func::Cos, a.clone()),
                    Func::Cos => -Expr::call(Func::Sin, a.clone()),
                    Func::Tan => Expr::num(1.0) / Expr::call(Func::Cos, a.clone()).powf(2.0),
                    Func::Sinh => Expr::call(Func::Cosh, a.clone()),
                    Func::Cosh => Expr::call(Func::Sinh, a.clone()),
                };
                outer * da
            }
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        Expr::parse_with(src, &DEFAULT_VARS)
    }

    /// Parse with a custom variable table; `x, y, z` stay aliases of slots 1..3.
    pub fn parse_with(src: &str, vars: &[&str]) -> Result<Expr> {
        let toks = tokenize(src)?;
        let mut p = Parser { toks, pos: 0, vars, src };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }
}

/// Six-component spinor of expressions, acted on by constant 6×6 matrices.
pub type SpinorExpr = [Expr; 6];

pub fn zero6() -> SpinorExpr {
    std::array::from_fn(|_| Expr::num(0.0))
}

pub fn add6(a: &SpinorExpr, b: &SpinorExpr) -> SpinorExpr {
    std::array::from_fn(|r| a[r].clone() + b[r].clone())
}

pub fn sub6(a: &SpinorExpr, b: &SpinorExpr) -> SpinorExpr {
    std::array::from_fn(|r| a[r].clone() - b[r].clone())
}

pub fn scale6(s: &Expr, a: &SpinorExpr) -> SpinorExpr {
    std::array::from_fn(|r| s.clone() * a[r].clone())
}

pub fn sum6(items: impl IntoIterator<Item = SpinorExpr>) -> SpinorExpr {
    items.into_iter().fold(zero6(), |acc, v| add6(&acc, &v))
}

pub fn apply(m: &Mat6, v: &SpinorExpr) -> SpinorExpr {
    std::array::from_fn(|r| {
        (0..6).fold(Expr::num(0.0), |acc, c| {
            let z = m[(r, c)];
            if z == Complex64::default() {
                acc
            } else {
                acc + Expr::complex(z) * v[c].clone()
            }
        })
    })
}

pub fn eval6(v: &SpinorExpr, at: &[f64]) -> Spinor {
    Spinor::from_fn(|r, _| v[r].eval(at))
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match (&*self.0, self.as_const()) {
            (_, Some(z)) => Expr::complex(-z),
            (Node::Neg(a), _) => a.clone(),
            _ => Expr::node(Node::Neg(self)),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::complex(a + b),
            _ if self.is_zero() => rhs,
            _ if rhs.is_zero() => self,
            _ => Expr::node(Node::Add(self, rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::complex(a - b),
            _ if rhs.is_zero() => self,
            _ if self.is_zero() => -rhs,
            _ => Expr::node(Node::Sub(self, rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::complex(a * b),
            _ if self.is_zero() || rhs.is_zero() => Expr::num(0.0),
            _ if self.is_one() => rhs,
            _ if rhs.is_one() => self,
            _ => Expr::node(Node::Mul(self, rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::complex(a / b),
            _ if self.is_zero() => Expr::num(0.0),
            _ if rhs.is_one() => self,
            _ => Expr::node(Node::Div(self, rhs)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Num(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Node::Num(z) => write!(f, "({}+{}*i)", z.re, z.im),
            Node::Var(i) => write!(f, "{}", DEFAULT_VARS.get(*i).unwrap_or(&"?")),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Pow(a, b) => write!(f, "({a}^{b})"),
            Node::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && (b[j] as char).is_ascii_digit() {
                    i = j;
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &src[start..i];
            let v: f64 = s.parse().map_err(|_| Error::Parse(format!("bad number '{s}' at column {}", start + 1)))?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' at column {}", i + 1)));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        let col = self.toks.get(self.pos).map(|t| t.1 + 1).unwrap_or(self.src.len() + 1);
        Error::Parse(format!("{msg} at column {col} in '{}'", self.src))
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // right-associative; binds tighter than unary minus on its left: -x^2 = -(x^2)
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let ex = self.unary()?;
            return Ok(base.pow(ex));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some((tok, _)) = self.toks.get(self.pos).cloned() else {
            return Err(self.err("unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if self.peek_op() != Some('(') {
                        return Err(self.err(&format!("expected '(' after {name}")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek_op() != Some(')') {
                        return Err(self.err("expected ')'"));
                    }
                    self.pos += 1;
                    return Ok(Expr::call(f, arg));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::var(i));
                }
                match name.as_str() {
                    "x" => Ok(Expr::var(1)),
                    "y" => Ok(Expr::var(2)),
                    "z" => Ok(Expr::var(3)),
                    "pi" => Ok(Expr::num(std::f64::consts::PI)),
                    "e" => Ok(Expr::num(std::f64::consts::E)),
                    "i" => Ok(Expr::complex(Complex64::new(0.0, 1.0))),
                    _ => {
                        self.pos -= 1;
                        Err(self.err(&format!("unknown identifier '{name}'")))
                    }
                }
            }
            Tok::Op(c) => {
                self.pos -= 1;
                Err(self.err(&format!("unexpected '{c}'")))
            }
        }
    }
}
