//! Scalar field expressions over chart coordinates.
//!
//! Expressions form a shared DAG. Evaluation at a point produces a truncated
//! Taylor expansion of any requested order; partial derivatives are lazy
//! nodes that evaluate their operand one order higher and differentiate the
//! expansion, so every derivative is exact up to rounding.

use crate::jet::{Taylor, C64};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply_c(self, z: C64) -> C64 {
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Exp => z.exp(),
            Func::Log => z.ln(),
            Func::Sqrt => z.sqrt(),
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Const(C64),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, Expr),
    Func(Func, Expr),
    /// Partial derivative of the operand in the given coordinate.
    Deriv(usize, Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    /// Bit i set when the expression may depend on coordinate i.
    deps: u64,
}

/// Shared, immutable scalar expression.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Inner>);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl Expr {
    fn make(node: Node) -> Expr {
        let deps = match &node {
            Node::Const(_) => 0,
            Node::Var(i) => 1u64 << i,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.deps() | b.deps()
            }
            Node::Neg(a) | Node::Func(_, a) | Node::Deriv(_, a) => a.deps(),
        };
        Expr(Arc::new(Inner { node, deps }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn deps(&self) -> u64 {
        self.0.deps
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.0.deps & (1u64 << var) != 0
    }

    pub fn constant(z: C64) -> Expr {
        Expr::make(Node::Const(z))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(c(x))
    }

    pub fn zero() -> Expr {
        Expr::real(0.0)
    }

    pub fn one() -> Expr {
        Expr::real(1.0)
    }

    pub fn imag_unit() -> Expr {
        Expr::constant(C64::new(0.0, 1.0))
    }

    pub fn var(i: usize) -> Expr {
        assert!(i < 64, "at most 64 coordinates are supported");
        Expr::make(Node::Var(i))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node() {
            Node::Const(z) => Some(*z),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(c(0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(c(1.0))
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn add(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            _ if self.is_zero() => o.clone(),
            _ if o.is_zero() => self.clone(),
            _ => Expr::make(Node::Add(self.clone(), o.clone())),
        }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            _ if o.is_zero() => self.clone(),
            _ if self.is_zero() => o.neg(),
            _ => Expr::make(Node::Sub(self.clone(), o.clone())),
        }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            _ if self.is_zero() || o.is_zero() => Expr::zero(),
            _ if self.is_one() => o.clone(),
            _ if o.is_one() => self.clone(),
            (Some(a), _) if a == c(-1.0) => o.neg(),
            (_, Some(b)) if b == c(-1.0) => self.neg(),
            _ => Expr::make(Node::Mul(self.clone(), o.clone())),
        }
    }

    pub fn div(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) if b != c(0.0) => Expr::constant(a / b),
            _ if self.is_zero() => Expr::zero(),
            _ if o.is_one() => self.clone(),
            _ => Expr::make(Node::Div(self.clone(), o.clone())),
        }
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(a) => Expr::constant(-*a),
            Node::Neg(a) => a.clone(),
            _ => Expr::make(Node::Neg(self.clone())),
        }
    }

    pub fn pow(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (_, Some(b)) if b == c(0.0) => Expr::one(),
            (_, Some(b)) if b == c(1.0) => self.clone(),
            (Some(a), Some(b)) if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() < 1e6 => {
                Expr::constant(a.powi(b.re as i32))
            }
            (Some(a), Some(b)) => Expr::constant(a.powc(b)),
            _ => Expr::make(Node::Pow(self.clone(), o.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.pow(&Expr::real(n as f64))
    }

    pub fn func(f: Func, a: &Expr) -> Expr {
        match a.as_const() {
            Some(z) => Expr::constant(f.apply_c(z)),
            None => Expr::make(Node::Func(f, a.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        Expr::func(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::func(Func::Cos, self)
    }

    pub fn exp(&self) -> Expr {
        Expr::func(Func::Exp, self)
    }

    pub fn ln(&self) -> Expr {
        Expr::func(Func::Log, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::func(Func::Sqrt, self)
    }

    pub fn scale(&self, z: C64) -> Expr {
        Expr::constant(z).mul(self)
    }

    /// Lazy partial derivative in coordinate `var`.
    pub fn partial(&self, var: usize) -> Expr {
        if !self.depends_on(var) {
            return Expr::zero();
        }
        match self.node() {
            Node::Var(_) => Expr::one(),
            Node::Neg(a) => a.partial(var).neg(),
            Node::Mul(a, b) if a.as_const().is_some() => a.mul(&b.partial(var)),
            _ => Expr::make(Node::Deriv(var, self.clone())),
        }
    }

    /// Replace coordinate `var` by `value` everywhere (lazy derivatives in
    /// that coordinate are expanded first).
    pub fn subst(&self, var: usize, value: &Expr) -> Expr {
        let mut memo = HashMap::new();
        self.subst_with(var, value, &mut memo)
    }

    fn subst_with(&self, var: usize, value: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
        if !self.depends_on(var) {
            return self.clone();
        }
        if let Some(e) = memo.get(&self.ptr_id()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(_) => value.clone(),
            Node::Add(a, b) => a.subst_with(var, value, memo).add(&b.subst_with(var, value, memo)),
            Node::Sub(a, b) => a.subst_with(var, value, memo).sub(&b.subst_with(var, value, memo)),
            Node::Mul(a, b) => a.subst_with(var, value, memo).mul(&b.subst_with(var, value, memo)),
            Node::Div(a, b) => a.subst_with(var, value, memo).div(&b.subst_with(var, value, memo)),
            Node::Pow(a, b) => a.subst_with(var, value, memo).pow(&b.subst_with(var, value, memo)),
            Node::Neg(a) => a.subst_with(var, value, memo).neg(),
            Node::Func(f, a) => Expr::func(*f, &a.subst_with(var, value, memo)),
            Node::Deriv(v, a) => {
                if *v == var || value.depends_on(*v) {
                    let ex = self.expand();
                    let mut fresh = HashMap::new();
                    ex.subst_with(var, value, &mut fresh)
                } else {
                    a.subst_with(var, value, memo).partial(*v)
                }
            }
        };
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// Sum of a list, folded left.
    pub fn sum<'a, I: IntoIterator<Item = &'a Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::zero(), |acc, e| acc.add(e))
    }

    /// Symbolic partial derivative; the result contains no lazy derivative nodes.
    pub fn diff(&self, var: usize) -> Expr {
        let mut memo = HashMap::new();
        let e = self.expand_with(&mut memo);
        let mut dmemo = HashMap::new();
        e.diff_expanded(var, &mut dmemo)
    }

    /// Replace every lazy derivative node by its symbolic expansion.
    pub fn expand(&self) -> Expr {
        let mut memo = HashMap::new();
        self.expand_with(&mut memo)
    }

    fn expand_with(&self, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.ptr_id()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Add(a, b) => a.expand_with(memo).add(&b.expand_with(memo)),
            Node::Sub(a, b) => a.expand_with(memo).sub(&b.expand_with(memo)),
            Node::Mul(a, b) => a.expand_with(memo).mul(&b.expand_with(memo)),
            Node::Div(a, b) => a.expand_with(memo).div(&b.expand_with(memo)),
            Node::Pow(a, b) => a.expand_with(memo).pow(&b.expand_with(memo)),
            Node::Neg(a) => a.expand_with(memo).neg(),
            Node::Func(f, a) => Expr::func(*f, &a.expand_with(memo)),
            Node::Deriv(v, a) => {
                let inner = a.expand_with(memo);
                let mut dmemo = HashMap::new();
                inner.diff_expanded(*v, &mut dmemo)
            }
        };
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    fn diff_expanded(&self, var: usize, memo: &mut HashMap<usize, Expr>) -> Expr {
        if !self.depends_on(var) {
            return Expr::zero();
        }
        if let Some(e) = memo.get(&self.ptr_id()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff_expanded(var, memo).add(&b.diff_expanded(var, memo)),
            Node::Sub(a, b) => a.diff_expanded(var, memo).sub(&b.diff_expanded(var, memo)),
            Node::Neg(a) => a.diff_expanded(var, memo).neg(),
            Node::Mul(a, b) => {
                let da = a.diff_expanded(var, memo);
                let db = b.diff_expanded(var, memo);
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = a.diff_expanded(var, memo);
                let db = b.diff_expanded(var, memo);
                da.div(b).sub(&a.mul(&db).div(&b.mul(b)))
            }
            Node::Pow(a, b) => {
                let da = a.diff_expanded(var, memo);
                if b.as_const().is_some() {
                    b.mul(&a.pow(&b.sub(&Expr::one()))).mul(&da)
                } else {
                    let db = b.diff_expanded(var, memo);
                    self.mul(&db.mul(&a.ln()).add(&b.mul(&da).div(a)))
                }
            }
            Node::Func(f, a) => {
                let da = a.diff_expanded(var, memo);
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Exp => self.clone(),
                    Func::Log => Expr::one().div(a),
                    Func::Sqrt => Expr::one().div(&Expr::real(2.0).mul(self)),
                };
                outer.mul(&da)
            }
            Node::Deriv(..) => unreachable!("expanded expressions hold no lazy derivatives"),
        };
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// Render in the infix grammar accepted by [`parse`].
    pub fn to_infix(&self, names: &[String]) -> Result<String, PrintError> {
        let e = self.expand();
        let mut s = String::new();
        e.write_infix(names, &mut s)?;
        Ok(s)
    }

    fn prec(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::Const(z) if z.re < 0.0 || (z.re == 0.0 && z.re.is_sign_negative()) => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_child(&self, names: &[String], out: &mut String, min_prec: u8) -> Result<(), PrintError> {
        if self.prec() < min_prec {
            out.push('(');
            self.write_infix(names, out)?;
            out.push(')');
            Ok(())
        } else {
            self.write_infix(names, out)
        }
    }

    fn write_infix(&self, names: &[String], out: &mut String) -> Result<(), PrintError> {
        match self.node() {
            Node::Const(z) => {
                if z.im != 0.0 {
                    return Err(PrintError::Complex(*z));
                }
                if !z.re.is_finite() {
                    return Err(PrintError::NonFinite);
                }
                out.push_str(&format!("{:?}", z.re));
            }
            Node::Var(i) => match names.get(*i) {
                Some(n) => out.push_str(n),
                None => return Err(PrintError::UnknownVar(*i)),
            },
            Node::Add(a, b) => {
                a.write_child(names, out, 1)?;
                out.push_str(" + ");
                b.write_child(names, out, 1)?;
            }
            Node::Sub(a, b) => {
                a.write_child(names, out, 1)?;
                out.push_str(" - ");
                b.write_child(names, out, 2)?;
            }
            Node::Mul(a, b) => {
                a.write_child(names, out, 2)?;
                out.push('*');
                b.write_child(names, out, 3)?;
            }
            Node::Div(a, b) => {
                a.write_child(names, out, 2)?;
                out.push('/');
                b.write_child(names, out, 3)?;
            }
            Node::Neg(a) => {
                out.push('-');
                a.write_child(names, out, 3)?;
            }
            Node::Pow(a, b) => {
                a.write_child(names, out, 5)?;
                out.push('^');
                b.write_child(names, out, 3)?;
            }
            Node::Func(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write_infix(names, out)?;
                out.push(')');
            }
            Node::Deriv(..) => unreachable!("printing expands derivatives first"),
        }
        Ok(())
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Expr {
        Expr::real(x)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$m(&self, &o)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$m(self, o)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$m(&self, o)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$m(self, &o)
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PrintError {
    #[error("complex constant {0} has no infix form")]
    Complex(C64),
    #[error("non-finite constant has no infix form")]
    NonFinite,
    #[error("coordinate index {0} has no name")]
    UnknownVar(usize),
}

/// Memoizing evaluator at a single chart point.
pub struct Evaluator<'p> {
    point: &'p [f64],
    /// Keyed by node address; the stored clone keeps the node alive so the
    /// address cannot be reused while the evaluator exists.
    memo: HashMap<(usize, usize), (Expr, Taylor)>,
}

impl<'p> Evaluator<'p> {
    pub fn new(point: &'p [f64]) -> Self {
        Evaluator { point, memo: HashMap::new() }
    }

    pub fn point(&self) -> &[f64] {
        self.point
    }

    /// Taylor expansion of `e` to the given order around the point.
    pub fn eval(&mut self, e: &Expr, order: usize) -> Taylor {
        let key = (e.ptr_id(), order);
        if let Some((_, t)) = self.memo.get(&key) {
            return t.clone();
        }
        let n = self.point.len();
        let t = match e.node() {
            Node::Const(z) => Taylor::constant(n, order, *z),
            Node::Var(i) => {
                assert!(*i < n, "coordinate {} outside a {}-dimensional chart", i, n);
                Taylor::variable(n, order, *i, self.point[*i])
            }
            Node::Add(a, b) => self.eval(a, order).add(&self.eval(b, order)),
            Node::Sub(a, b) => self.eval(a, order).sub(&self.eval(b, order)),
            Node::Mul(a, b) => {
                if let Some(z) = a.as_const() {
                    self.eval(b, order).scale(z)
                } else if let Some(z) = b.as_const() {
                    self.eval(a, order).scale(z)
                } else {
                    self.eval(a, order).mul(&self.eval(b, order))
                }
            }
            Node::Div(a, b) => {
                let num = self.eval(a, order);
                match b.as_const() {
                    Some(z) => num.scale(c(1.0) / z),
                    None => num.div(&self.eval(b, order)),
                }
            }
            Node::Neg(a) => self.eval(a, order).neg(),
            Node::Pow(a, b) => {
                let base = self.eval(a, order);
                match b.as_const() {
                    Some(z) if z.im == 0.0 && z.re.fract() == 0.0 && z.re.abs() < 1e6 => {
                        base.powi(z.re as i32)
                    }
                    Some(z) => base.powc(z),
                    None => base.ln().mul(&self.eval(b, order)).exp(),
                }
            }
            Node::Func(f, a) => {
                let u = self.eval(a, order);
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Log => u.ln(),
                    Func::Sqrt => u.sqrt(),
                }
            }
            Node::Deriv(v, a) => self.eval(a, order + 1).deriv(*v),
        };
        self.memo.insert(key, (e.clone(), t.clone()));
        t
    }

    pub fn value(&mut self, e: &Expr) -> C64 {
        if let Some(z) = e.as_const() {
            return z;
        }
        self.eval(e, 0).value()
    }
}

/// Value of `e` at `point`.
pub fn eval_at(e: &Expr, point: &[f64]) -> C64 {
    Evaluator::new(point).value(e)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("parse error at offset {offset}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {}", x),
            Tok::Ident(s) => write!(f, "identifier '{}'", s),
            Tok::Op(ch) => write!(f, "'{}'", ch),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || (ch == '.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let x: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number '{}'", text),
                expected: vec![],
            })?;
            out.push((Tok::Num(x), start));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(ch) {
            out.push((Tok::Op(ch), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: i,
                message: format!("unexpected character '{}'", ch),
                expected: vec![],
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [String],
}

const OPERAND: &[&str] = &["number", "identifier", "'('", "'-'"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Tok::Op('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Op('/') => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if let Tok::Op('+') = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(base.pow(&exp));
        }
        Ok(base)
    }

    fn resolve(&self, name: &str) -> Option<Expr> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Some(Expr::var(i));
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(k) = rest.parse::<usize>() {
                if k >= 1 && k <= self.names.len() && !rest.starts_with('0') {
                    return Some(Expr::var(k - 1));
                }
            }
        }
        if name == "pi" {
            return Some(Expr::real(std::f64::consts::PI));
        }
        None
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.pos += 1;
                Ok(Expr::real(x))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != &Tok::Op(')') {
                    return Err(self.fail(&["')'", "operator"]));
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(f) = Func::from_name(&name) {
                    if self.peek() != &Tok::Op('(') {
                        return Err(self.fail(&["'('"]));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != &Tok::Op(')') {
                        return Err(self.fail(&["')'", "operator"]));
                    }
                    self.pos += 1;
                    return Ok(Expr::func(f, &arg));
                }
                match self.resolve(&name) {
                    Some(e) => Ok(e),
                    None => {
                        let mut expected: Vec<String> = self.names.to_vec();
                        expected.extend(["sin", "cos", "exp", "log", "sqrt", "pi"].iter().map(|s| s.to_string()));
                        Err(ParseError {
                            offset: off,
                            message: format!("unknown identifier '{}'", name),
                            expected,
                        })
                    }
                }
            }
            _ => Err(self.fail(OPERAND)),
        }
    }
}

/// Parse an infix expression whose identifiers are the given coordinate
/// names (or `x1..xn` positionally).
pub fn parse(src: &str, names: &[String]) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, names };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.fail(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    #[test]
    fn folding() {
        let x = Expr::var(0);
        assert!((x.mul(&Expr::zero())).is_zero());
        assert_eq!(x.add(&Expr::zero()).ptr_id(), x.ptr_id());
        assert_eq!(Expr::real(2.0).mul(&Expr::real(3.0)).as_const(), Some(c(6.0)));
        assert!(x.partial(1).is_zero());
        assert!(x.partial(0).is_one());
    }

    #[test]
    fn lazy_derivatives_are_exact() {
        let p = [0.3, -0.7, 1.1];
        let n = names();
        let f = parse("sin(x*y)*exp(z) + x^3/y", &n).unwrap();
        let fxy = f.partial(0).partial(1);
        let sym = f.diff(0).diff(1);
        let a = eval_at(&fxy, &p);
        let b = eval_at(&sym, &p);
        assert!((a - b).norm() < 1e-12, "{} vs {}", a, b);
        // closed form: d/dy d/dx [sin(xy) e^z + x^3/y]
        let (x, y, z) = (p[0], p[1], p[2]);
        let exact = ((x * y).cos() - x * y * (x * y).sin()) * z.exp() - 3.0 * x * x / (y * y);
        assert!((a.re - exact).abs() < 1e-12);
    }

    #[test]
    fn power_with_variable_exponent() {
        let n = names();
        let f = parse("x^y", &n).unwrap();
        let p = [1.5, 2.5, 0.0];
        let d = eval_at(&f.partial(1), &p);
        assert!((d.re - 1.5f64.powf(2.5) * 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn parse_precedence() {
        let n = names();
        let p = [2.0, 3.0, 0.5];
        let v = |s: &str| eval_at(&parse(s, &n).unwrap(), &p).re;
        assert_eq!(v("-x^2"), -4.0);
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("x - y - z"), -1.5);
        assert_eq!(v("x / y * 3"), 2.0);
        assert_eq!(v("x1 + x3"), 2.5);
        assert_eq!(v(" 2 * pi "), 2.0 * std::f64::consts::PI);
        assert_eq!(v("1.5e-1*x"), 0.3);
        assert_eq!(v("2^-1"), 0.5);
    }

    #[test]
    fn unknown_identifier_is_named() {
        let err = parse("sin(2*w)", &names()).unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(err.to_string().contains("'w'"));
    }

    #[test]
    fn reports_expected_tokens() {
        let err = parse("x + ", &names()).unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.expected.iter().any(|e| e == "number"));
        let err = parse("(x + y", &names()).unwrap_err();
        assert!(err.expected.iter().any(|e| e == "')'"));
        let err = parse("sin x", &names()).unwrap_err();
        assert_eq!(err.expected, vec!["'('".to_string()]);
        assert!(parse("x $ y", &names()).is_err());
    }

    #[test]
    fn print_round_trip() {
        let n = names();
        let srcs = [
            "-x^2 + y*(z - x)",
            "x - (y - z)",
            "2^(x^2)",
            "(-2)*x/(y*z)",
            "sin(x)^2 - -y",
            "1e-7*x - 0.1",
            "-(x + y)^3",
        ];
        let p = [0.4, 1.3, -0.6];
        for s in srcs {
            let e = parse(s, &n).unwrap();
            let printed = e.to_infix(&n).unwrap();
            let back = parse(&printed, &n).unwrap();
            assert!((eval_at(&e, &p) - eval_at(&back, &p)).norm() < 1e-14, "{} -> {}", s, printed);
        }
        let d = parse("x*y^2", &n).unwrap().partial(1);
        let printed = d.to_infix(&n).unwrap();
        assert!((eval_at(&parse(&printed, &n).unwrap(), &p) - eval_at(&d, &p)).norm() < 1e-14);
        assert!(Expr::imag_unit().to_infix(&n).is_err());
    }
}
