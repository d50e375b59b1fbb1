//! Scalar expression trees with exact symbolic differentiation.
//!
//! Trees are immutable and share subtrees through `Arc`; the smart
//! constructors fold constants and drop algebraic identities so repeated
//! differentiation stays compact. [`Tape`] interns a set of trees into a
//! hash-consed instruction list for fast repeated evaluation.

mod dsl;
mod tape;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::scalar::Scalar;

pub use dsl::{parse_expr, parse_expr_vars, parse_metric_dsl, MetricGrid};
pub use tape::Tape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    #[inline]
    pub fn apply<S: Scalar>(self, v: S) -> S {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Powi(Expr, i32),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression handle.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    fn wrap(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: f64) -> Self {
        Self::wrap(Node::Const(value))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(index: usize) -> Self {
        Self::wrap(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn powi(&self, k: i32) -> Self {
        match (self.as_const(), k) {
            (Some(c), _) => Self::constant(c.powi(k)),
            (_, 0) => Self::one(),
            (_, 1) => self.clone(),
            _ => match self.node() {
                Node::Powi(base, j) => base.powi(j * k),
                _ => Self::wrap(Node::Powi(self.clone(), k)),
            },
        }
    }

    pub fn call(func: Func, arg: &Expr) -> Self {
        if let Some(c) = arg.as_const() {
            let v = func.apply(c);
            if v.is_finite() {
                return Self::constant(v);
            }
        }
        Self::wrap(Node::Call(func, arg.clone()))
    }

    pub fn sin(&self) -> Self {
        Self::call(Func::Sin, self)
    }
    pub fn cos(&self) -> Self {
        Self::call(Func::Cos, self)
    }
    pub fn exp(&self) -> Self {
        Self::call(Func::Exp, self)
    }
    pub fn ln(&self) -> Self {
        Self::call(Func::Log, self)
    }
    pub fn sqrt(&self) -> Self {
        Self::call(Func::Sqrt, self)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Powi(a, _) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Direct recursive evaluation.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> S {
        match self.node() {
            Node::Const(c) => S::lit(*c),
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::Powi(a, k) => a.eval(vars).powi(*k),
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    /// Replaces every variable `i` by `replacements[i]`.
    pub fn substitute(&self, replacements: &[Expr]) -> Expr {
        let mut memo = HashMap::new();
        self.substitute_memo(replacements, &mut memo)
    }

    fn substitute_memo(&self, rep: &[Expr], memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.ptr()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => rep[*i].clone(),
            Node::Neg(a) => -&a.substitute_memo(rep, memo),
            Node::Add(a, b) => &a.substitute_memo(rep, memo) + &b.substitute_memo(rep, memo),
            Node::Sub(a, b) => &a.substitute_memo(rep, memo) - &b.substitute_memo(rep, memo),
            Node::Mul(a, b) => &a.substitute_memo(rep, memo) * &b.substitute_memo(rep, memo),
            Node::Div(a, b) => &a.substitute_memo(rep, memo) / &b.substitute_memo(rep, memo),
            Node::Powi(a, k) => a.substitute_memo(rep, memo).powi(*k),
            Node::Call(f, a) => Expr::call(*f, &a.substitute_memo(rep, memo)),
        };
        memo.insert(self.ptr(), out.clone());
        out
    }

    /// Partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Expr {
        Differentiator::default().diff(self, var)
    }
}

/// Memoizing differentiator; shared subtrees are differentiated once and
/// their derivatives stay shared.
#[derive(Default)]
pub struct Differentiator {
    memo: HashMap<(usize, usize), Expr>,
    // keeps memo keys alive so pointer identity stays valid
    pinned: Vec<Expr>,
}

impl Differentiator {
    pub fn diff(&mut self, e: &Expr, var: usize) -> Expr {
        if let Some(d) = self.memo.get(&(e.ptr(), var)) {
            return d.clone();
        }
        let d = match e.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => -&self.diff(a, var),
            Node::Add(a, b) => &self.diff(a, var) + &self.diff(b, var),
            Node::Sub(a, b) => &self.diff(a, var) - &self.diff(b, var),
            Node::Mul(a, b) => {
                let da = self.diff(a, var);
                let db = self.diff(b, var);
                &(&da * b) + &(a * &db)
            }
            Node::Div(a, b) => {
                // (a/b)' = (a' - (a/b) b') / b
                let da = self.diff(a, var);
                let db = self.diff(b, var);
                &(&da - &(e * &db)) / b
            }
            Node::Powi(a, k) => {
                let da = self.diff(a, var);
                &(&Expr::constant(*k as f64) * &a.powi(k - 1)) * &da
            }
            Node::Call(f, a) => {
                let da = self.diff(a, var);
                if da.is_const(0.0) {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Sin => a.cos(),
                        Func::Cos => -&a.sin(),
                        Func::Exp => e.clone(),
                        Func::Log => &Expr::one() / a,
                        Func::Sqrt => &Expr::constant(0.5) / e,
                    };
                    &outer * &da
                }
            }
        };
        self.pinned.push(e.clone());
        self.memo.insert((e.ptr(), var), d.clone());
        d
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(0.0), _) => rhs.clone(),
            (_, Some(0.0)) => self.clone(),
            _ => match rhs.node() {
                Node::Neg(r) => self - r,
                _ => Expr::wrap(Node::Add(self.clone(), rhs.clone())),
            },
        }
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(0.0), _) => -rhs,
            (_, Some(0.0)) => self.clone(),
            _ => {
                if Arc::ptr_eq(&self.0, &rhs.0) {
                    return Expr::zero();
                }
                match rhs.node() {
                    Node::Neg(r) => self + r,
                    _ => Expr::wrap(Node::Sub(self.clone(), rhs.clone())),
                }
            }
        }
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::zero(),
            (Some(1.0), _) => rhs.clone(),
            (_, Some(1.0)) => self.clone(),
            (Some(-1.0), _) => -rhs,
            (_, Some(-1.0)) => -self,
            (None, Some(_)) => Expr::wrap(Node::Mul(rhs.clone(), self.clone())),
            _ => Expr::wrap(Node::Mul(self.clone(), rhs.clone())),
        }
    }
}

impl Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            (Some(0.0), _) => Expr::zero(),
            (_, Some(1.0)) => self.clone(),
            _ => Expr::wrap(Node::Div(self.clone(), rhs.clone())),
        }
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Expr::wrap(Node::Neg(self.clone())),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { (&self).$m(&rhs) }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr { (&self).$m(rhs) }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr { (&self).$m(&Expr::constant(rhs)) }
        }
        impl $tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr { self.$m(&Expr::constant(rhs)) }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { (&Expr::constant(self)).$m(&rhs) }
        }
        impl $tr<&Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr { (&Expr::constant(self)).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::constant(v)
    }
}

// Printing in DSL syntax. Precedence: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atoms.
fn precedence(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Powi(..) => 4,
        Node::Const(c) if *c < 0.0 => 3,
        _ => 5,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        write!(f, "{c:?}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(child.node()) < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_const(f, *c),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 4)
            }
            Node::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Node::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Node::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 4)
            }
            Node::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 4)
            }
            Node::Powi(a, k) => {
                write_child(f, a, 5)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
