//! Meromorphic expressions in one (or a few) complex variables.
//!
//! Expressions are parsed from a small infix grammar into an immutable tree.
//! Every tree can be differentiated symbolically, so derivatives are exact up
//! to floating-point evaluation. Zero and pole orders at user-declared points
//! are probed numerically with a log-log slope fit.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ComplexValue = Complex64;

/// What the user asserts about a declared point; orders are always measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Zero,
    Pole,
    #[default]
    Unknown,
}

/// A user-declared zero, pole, or puncture location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialPoint {
    pub location: Complex64,
    pub kind: PointKind,
}

impl SpecialPoint {
    pub fn new(location: Complex64, kind: PointKind) -> Self {
        Self { location, kind }
    }

    pub fn at(location: Complex64) -> Self {
        Self::new(location, PointKind::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("pole hit while evaluating at {at}")]
    PoleHit { at: String },
    #[error("expected {expected} variable values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("not meromorphic-like at {at}: log-log slope {slope:.4} is not within 0.1 of an integer")]
    NotMeromorphic { at: String, slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Log => "log",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Expression tree node. Variables are referenced by index into the owning
/// [`ComplexExpr`]'s variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(usize),
    Const(Complex64),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

impl Node {
    fn is_zero(&self) -> bool {
        matches!(self, Node::Const(c) if *c == Complex64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        matches!(self, Node::Const(c) if *c == Complex64::new(1.0, 0.0))
    }

    /// Collapse an arithmetic node whose operands are all constants, so that
    /// complex literals such as `2*i` print and re-parse as a single constant.
    fn folded(self) -> Node {
        let is_const = |n: &Node| matches!(n, Node::Const(_));
        let foldable = match &self {
            Node::Neg(a) | Node::Pow(a, _) => is_const(a),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => is_const(a) && is_const(b),
            _ => false,
        };
        match foldable.then(|| self.eval(&[])) {
            Some(Ok(c)) if c.is_finite() => Node::Const(c),
            _ => self,
        }
    }

    fn add(a: Node, b: Node) -> Node {
        match (a.is_zero(), b.is_zero()) {
            (true, _) => b,
            (_, true) => a,
            _ => Node::Add(Box::new(a), Box::new(b)),
        }
    }

    fn sub(a: Node, b: Node) -> Node {
        if b.is_zero() {
            a
        } else if a.is_zero() {
            Node::Neg(Box::new(b))
        } else {
            Node::Sub(Box::new(a), Box::new(b))
        }
    }

    fn mul(a: Node, b: Node) -> Node {
        if a.is_zero() || b.is_zero() {
            Node::Const(Complex64::new(0.0, 0.0))
        } else if a.is_one() {
            b
        } else if b.is_one() {
            a
        } else {
            Node::Mul(Box::new(a), Box::new(b))
        }
    }

    fn div(a: Node, b: Node) -> Node {
        if a.is_zero() || b.is_one() {
            a
        } else {
            Node::Div(Box::new(a), Box::new(b))
        }
    }

    fn derivative(&self, var: usize) -> Node {
        let zero = || Node::Const(Complex64::new(0.0, 0.0));
        match self {
            Node::Var(k) => {
                if *k == var {
                    Node::Const(Complex64::new(1.0, 0.0))
                } else {
                    zero()
                }
            }
            Node::Const(_) => zero(),
            Node::Neg(a) => {
                let da = a.derivative(var);
                if da.is_zero() {
                    da
                } else {
                    Node::Neg(Box::new(da))
                }
            }
            Node::Add(a, b) => Node::add(a.derivative(var), b.derivative(var)),
            Node::Sub(a, b) => Node::sub(a.derivative(var), b.derivative(var)),
            Node::Mul(a, b) => Node::add(
                Node::mul(a.derivative(var), (**b).clone()),
                Node::mul((**a).clone(), b.derivative(var)),
            ),
            Node::Div(a, b) => {
                // (a/b)' = a'/b - a b' / b^2
                let first = Node::div(a.derivative(var), (**b).clone());
                let db = b.derivative(var);
                if db.is_zero() {
                    first
                } else {
                    let second = Node::div(
                        Node::mul((**a).clone(), db),
                        Node::Pow(b.clone(), 2),
                    );
                    Node::sub(first, second)
                }
            }
            Node::Pow(a, n) => {
                let da = a.derivative(var);
                if da.is_zero() || *n == 0 {
                    return zero();
                }
                let base = if *n - 1 == 1 {
                    (**a).clone()
                } else if *n - 1 == 0 {
                    Node::Const(Complex64::new(1.0, 0.0))
                } else {
                    Node::Pow(a.clone(), n - 1)
                };
                Node::mul(
                    Node::mul(Node::Const(Complex64::new(*n as f64, 0.0)), base),
                    da,
                )
            }
            Node::Call(f, a) => {
                let da = a.derivative(var);
                if da.is_zero() {
                    return zero();
                }
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Sin => Node::Call(Func::Cos, a.clone()),
                    Func::Cos => Node::Neg(Box::new(Node::Call(Func::Sin, a.clone()))),
                    Func::Log => {
                        return Node::div(da, (**a).clone());
                    }
                };
                Node::mul(outer, da)
            }
        }
    }

    fn eval(&self, vars: &[Complex64]) -> Result<Complex64, ()> {
        let v = match self {
            Node::Var(k) => vars[*k],
            Node::Const(c) => *c,
            Node::Neg(a) => -a.eval(vars)?,
            Node::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Node::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Node::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Node::Div(a, b) => {
                let den = b.eval(vars)?;
                if den.norm_sqr() == 0.0 {
                    return Err(());
                }
                a.eval(vars)? / den
            }
            Node::Pow(a, n) => {
                let base = a.eval(vars)?;
                if *n < 0 && base.norm_sqr() == 0.0 {
                    return Err(());
                }
                base.powi(*n)
            }
            Node::Call(f, a) => {
                let x = a.eval(vars)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Log => {
                        if x.norm_sqr() == 0.0 {
                            return Err(());
                        }
                        x.ln()
                    }
                }
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(())
        }
    }

    fn fmt_with(&self, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(k) => write!(f, "{}", names[*k]),
            Node::Const(c) => {
                // `{:?}` on f64 prints the shortest representation that round-trips.
                if c.im == 0.0 {
                    if c.re < 0.0 {
                        write!(f, "(-{:?})", -c.re)
                    } else {
                        write!(f, "{:?}", c.re)
                    }
                } else if c.re == 0.0 {
                    write!(f, "({:?}*i)", c.im)
                } else {
                    write!(f, "({:?}+{:?}*i)", c.re, c.im)
                }
            }
            Node::Neg(a) => {
                write!(f, "(-")?;
                a.fmt_with(names, f)?;
                write!(f, ")")
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let op = match self {
                    Node::Add(..) => "+",
                    Node::Sub(..) => "-",
                    Node::Mul(..) => "*",
                    _ => "/",
                };
                write!(f, "(")?;
                a.fmt_with(names, f)?;
                write!(f, "{op}")?;
                b.fmt_with(names, f)?;
                write!(f, ")")
            }
            Node::Pow(a, n) => {
                write!(f, "(")?;
                a.fmt_with(names, f)?;
                write!(f, ")^{n}")
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_with(names, f)?;
                write!(f, ")")
            }
        }
    }
}

/// A parsed expression together with its variable names and a lazily built
/// derivative tree with respect to the first variable.
#[derive(Debug)]
pub struct ComplexExpr {
    source: String,
    vars: Vec<String>,
    root: Node,
    derivative: OnceLock<Node>,
}

impl Clone for ComplexExpr {
    fn clone(&self) -> Self {
        Self {
            source: self.source.clone(),
            vars: self.vars.clone(),
            root: self.root.clone(),
            derivative: OnceLock::new(),
        }
    }
}

impl PartialEq for ComplexExpr {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.root == other.root
    }
}

impl ComplexExpr {
    /// Parse an expression in the single variable `z`.
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        Self::parse_with_vars(text, &["z"])
    }

    pub fn parse_with_vars(text: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let mut parser = Parser {
            src: text,
            pos: 0,
            vars,
        };
        let root = parser.expr()?;
        parser.skip_ws();
        if parser.pos != text.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Self {
            source: text.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root,
            derivative: OnceLock::new(),
        })
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            source: format!("{c}"),
            vars: vec!["z".into()],
            root: Node::Const(c),
            derivative: OnceLock::new(),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// True when the tree does not reference any variable.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Var(_) => false,
                Node::Const(_) => true,
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => walk(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    walk(a) && walk(b)
                }
            }
        }
        walk(&self.root)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, ExprError> {
        self.eval_at(&[z])
    }

    pub fn eval_at(&self, vals: &[Complex64]) -> Result<Complex64, ExprError> {
        if vals.len() != self.vars.len() {
            return Err(ExprError::Arity {
                expected: self.vars.len(),
                got: vals.len(),
            });
        }
        self.root.eval(vals).map_err(|_| ExprError::PoleHit {
            at: fmt_point(vals),
        })
    }

    /// Evaluate with real inputs and return the real part.
    pub fn eval_real(&self, vals: &[f64]) -> Result<f64, ExprError> {
        let c: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval_at(&c).map(|v| v.re)
    }

    pub fn derivative_tree(&self) -> &Node {
        self.derivative.get_or_init(|| self.root.derivative(0))
    }

    /// The derivative with respect to variable `var`, as a new expression.
    pub fn partial(&self, var: usize) -> ComplexExpr {
        let root = self.root.derivative(var);
        let mut out = ComplexExpr {
            source: String::new(),
            vars: self.vars.clone(),
            root,
            derivative: OnceLock::new(),
        };
        out.source = out.to_string();
        out
    }

    pub fn eval_derivative(&self, z: Complex64) -> Result<Complex64, ExprError> {
        self.derivative_tree()
            .eval(&[z])
            .map_err(|_| ExprError::PoleHit { at: fmt_point(&[z]) })
    }

    /// Signed order of a zero (positive) or pole (negative) at `p`.
    ///
    /// At each radius of a geometric ladder from 1e-2 down to 1e-5 the mean of
    /// `log|f|` over eight directions is taken; the slope of that mean against
    /// `log r` is fit by least squares and rounded.
    pub fn local_order(&self, p: Complex64) -> Result<i32, ExprError> {
        let slope = self.order_slope(p)?;
        let rounded = slope.round();
        if (slope - rounded).abs() > ORDER_TOLERANCE {
            return Err(ExprError::NotMeromorphic {
                at: fmt_point(&[p]),
                slope,
            });
        }
        Ok(rounded as i32)
    }

    /// The unrounded log-log slope used by [`Self::local_order`].
    pub fn order_slope(&self, p: Complex64) -> Result<f64, ExprError> {
        const RUNGS: usize = 16;
        const DIRECTIONS: usize = 8;
        let mut xs = Vec::with_capacity(RUNGS);
        let mut ys = Vec::with_capacity(RUNGS);
        for k in 0..RUNGS {
            let log_r = (1e-2f64).ln() + (k as f64) / ((RUNGS - 1) as f64) * (1e-3f64).ln();
            let r = log_r.exp();
            let mut acc = 0.0;
            for d in 0..DIRECTIONS {
                // offset the directions so an axis-aligned zero line is never sampled
                let ang = (d as f64 + 0.37) * std::f64::consts::TAU / DIRECTIONS as f64;
                let z = p + Complex64::from_polar(r, ang);
                let v = self.eval(z)?;
                let m = v.norm();
                if m == 0.0 {
                    return Err(ExprError::NotMeromorphic {
                        at: fmt_point(&[p]),
                        slope: f64::NAN,
                    });
                }
                acc += m.ln();
            }
            xs.push(log_r);
            ys.push(acc / DIRECTIONS as f64);
        }
        Ok(least_squares_slope(&xs, &ys))
    }
}

/// Maximum distance between the fitted slope and the nearest integer.
pub const ORDER_TOLERANCE: f64 = 0.1;

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

fn fmt_point(vals: &[Complex64]) -> String {
    let parts: Vec<String> = vals
        .iter()
        .map(|c| format!("{}{:+}i", c.re, c.im))
        .collect();
    parts.join(", ")
}

impl fmt::Display for ComplexExpr {
    /// Fully parenthesized form that reparses to an equivalent tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt_with(&self.vars, f)
    }
}

impl Serialize for ComplexExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for ComplexExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        ComplexExpr::parse(&text).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?)).folded();
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?)).folded();
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?)).folded();
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?)).folded();
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        // unary minus binds looser than `^`: -z^2 == -(z^2)
        if self.eat('-') {
            let inner = self.factor()?;
            return Ok(Node::Neg(Box::new(inner)).folded());
        }
        let atom = self.atom()?;
        if self.eat('^') {
            let n = self.integer()?;
            return Ok(Node::Pow(Box::new(atom), n).folded());
        }
        Ok(atom)
    }

    fn integer(&mut self) -> Result<i32, ExprError> {
        self.skip_ws();
        if self.eat('(') {
            let n = self.integer()?;
            if !self.eat(')') {
                return Err(self.error("expected `)` after exponent"));
            }
            return Ok(n);
        }
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') || self.peek() == Some('+') {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = &self.src[start..self.pos];
        text.parse::<i32>().map_err(|_| ExprError::Syntax {
            offset: start,
            message: "expected integer exponent".into(),
        })
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                match name {
                    "i" => return Ok(Node::Const(Complex64::new(0.0, 1.0))),
                    "pi" => return Ok(Node::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                    _ => {}
                }
                if let Some(func) = Func::from_name(name) {
                    if !self.eat('(') {
                        return Err(self.error("expected `(` after function name"));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.error("expected `)`"));
                    }
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                Err(ExprError::UnknownIdentifier {
                    name: name.to_string(),
                    offset: start,
                })
            }
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        // optional exponent, only if followed by digits
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(|v| Node::Const(Complex64::new(v, 0.0)))
            .map_err(|_| ExprError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })
    }
}
