use std::collections::HashMap;

use super::{Expr, Func, Node};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    Const(u64),
    Var(usize),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Powi(u32, i32),
    Call(Func, u32),
}

/// Hash-consed straight-line program evaluating many expressions at once.
///
/// Structurally identical subexpressions share one slot; slots are in
/// topological order so a single forward sweep evaluates everything.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    ops: Vec<Op>,
    interned: HashMap<Op, u32>,
}

/// Handle to an interned expression inside a [`Tape`].
pub type Slot = u32;

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn intern(&mut self, op: Op) -> Slot {
        let op = match op {
            Op::Add(a, b) if b < a => Op::Add(b, a),
            Op::Mul(a, b) if b < a => Op::Mul(b, a),
            other => other,
        };
        if let Some(&slot) = self.interned.get(&op) {
            return slot;
        }
        let slot = self.ops.len() as Slot;
        self.ops.push(op);
        self.interned.insert(op, slot);
        slot
    }

    /// Interns an expression tree, returning its slot.
    pub fn push(&mut self, expr: &Expr) -> Slot {
        let mut seen = HashMap::new();
        self.push_memo(expr, &mut seen)
    }

    /// Interns several trees, sharing the pointer memo across them.
    pub fn push_all<'a>(&mut self, exprs: impl IntoIterator<Item = &'a Expr>) -> Vec<Slot> {
        let mut seen = HashMap::new();
        exprs.into_iter().map(|e| self.push_memo(e, &mut seen)).collect()
    }

    fn push_memo(&mut self, expr: &Expr, seen: &mut HashMap<usize, Slot>) -> Slot {
        let key = expr.ptr();
        if let Some(&s) = seen.get(&key) {
            return s;
        }
        let op = match expr.node() {
            Node::Const(c) => Op::Const(c.to_bits()),
            Node::Var(i) => Op::Var(*i),
            Node::Neg(a) => Op::Neg(self.push_memo(a, seen)),
            Node::Add(a, b) => Op::Add(self.push_memo(a, seen), self.push_memo(b, seen)),
            Node::Sub(a, b) => Op::Sub(self.push_memo(a, seen), self.push_memo(b, seen)),
            Node::Mul(a, b) => Op::Mul(self.push_memo(a, seen), self.push_memo(b, seen)),
            Node::Div(a, b) => Op::Div(self.push_memo(a, seen), self.push_memo(b, seen)),
            Node::Powi(a, k) => Op::Powi(self.push_memo(a, seen), *k),
            Node::Call(f, a) => Op::Call(*f, self.push_memo(a, seen)),
        };
        let slot = self.intern(op);
        seen.insert(key, slot);
        slot
    }

    /// Evaluates slots `0..upto` (all slots when `upto` is `None`).
    pub fn eval<S: Scalar>(&self, vars: &[S], upto: Option<usize>) -> Vec<S> {
        let end = upto.unwrap_or(self.ops.len()).min(self.ops.len());
        let mut out: Vec<S> = Vec::with_capacity(end);
        for op in &self.ops[..end] {
            let v = match *op {
                Op::Const(bits) => S::lit(f64::from_bits(bits)),
                Op::Var(i) => vars[i],
                Op::Neg(a) => -out[a as usize],
                Op::Add(a, b) => out[a as usize] + out[b as usize],
                Op::Sub(a, b) => out[a as usize] - out[b as usize],
                Op::Mul(a, b) => out[a as usize] * out[b as usize],
                Op::Div(a, b) => out[a as usize] / out[b as usize],
                Op::Powi(a, k) => out[a as usize].powi(k),
                Op::Call(f, a) => f.apply(out[a as usize]),
            };
            out.push(v);
        }
        out
    }
}
