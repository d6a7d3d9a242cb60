use super::jet::{FirstOrderJet, Number, SecondOrderJet};
use super::{pow_f64, BinaryOp, Expr, Params, UnaryOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Slot(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    PowConst(Box<Node>, f64),
}

/// An expression with names resolved to input slots and parameters folded.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    root: Node,
    arity: usize,
}

impl Compiled {
    pub(crate) fn new(expr: &Expr, vars: &[&str], params: &Params) -> Result<Self> {
        Ok(Compiled {
            root: lower(expr, vars, params)?,
            arity: vars.len(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// True when the expression does not depend on any input slot.
    pub fn is_constant(&self) -> bool {
        matches!(self.root, Node::Const(_))
    }

    fn check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.arity {
            return Err(Error::dim("point", point.len(), self.arity));
        }
        Ok(())
    }

    /// Plain evaluation; never fails on numeric domain problems.
    pub fn value(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.arity);
        eval_f64(&self.root, point)
    }

    pub fn gradient(&self, point: &[f64]) -> Result<FirstOrderJet> {
        self.check(point)?;
        let n = point.len();
        let inputs: Vec<_> = (0..n).map(|i| FirstOrderJet::seed(n, i, point[i])).collect();
        eval(&self.root, &inputs, &FirstOrderJet { value: 0.0, gradient: vec![0.0; n] })
    }

    /// Gradient restricted to the slots in `active`; other slots are held fixed.
    pub fn partial_gradient(&self, point: &[f64], active: &[usize]) -> Result<FirstOrderJet> {
        self.check(point)?;
        let m = active.len();
        let zero = FirstOrderJet { value: 0.0, gradient: vec![0.0; m] };
        let mut inputs: Vec<_> = point.iter().map(|&v| zero.lift(v)).collect();
        for (k, &slot) in active.iter().enumerate() {
            inputs[slot] = FirstOrderJet::seed(m, k, point[slot]);
        }
        eval(&self.root, &inputs, &zero)
    }

    pub fn jet2(&self, point: &[f64]) -> Result<SecondOrderJet> {
        let all: Vec<usize> = (0..point.len()).collect();
        self.partial_jet2(point, &all)
    }

    /// Second-order jet over the slots in `active`.
    pub fn partial_jet2(&self, point: &[f64], active: &[usize]) -> Result<SecondOrderJet> {
        self.check(point)?;
        let m = active.len();
        let zero = SecondOrderJet::from_parts(0.0, vec![0.0; m], &vec![vec![0.0; m]; m]);
        let mut inputs: Vec<_> = point.iter().map(|&v| zero.lift(v)).collect();
        for (k, &slot) in active.iter().enumerate() {
            inputs[slot] = SecondOrderJet::seed(m, k, point[slot]);
        }
        eval(&self.root, &inputs, &zero)
    }
}

fn lower(expr: &Expr, vars: &[&str], params: &Params) -> Result<Node> {
    let node = match expr {
        Expr::Num(v) => Node::Const(*v),
        Expr::Var(n) | Expr::Param(n) => {
            if let Some(i) = vars.iter().position(|v| v == n) {
                Node::Slot(i)
            } else if let Some(v) = params.get(n) {
                Node::Const(*v)
            } else {
                return Err(Error::Unbound(n.clone()));
            }
        }
        Expr::Unary(op, a) => match lower(a, vars, params)? {
            Node::Const(c) => Node::Const(op.apply(c)),
            a => Node::Unary(*op, Box::new(a)),
        },
        Expr::Binary(op, a, b) => {
            let (a, b) = (lower(a, vars, params)?, lower(b, vars, params)?);
            match (a, b) {
                (Node::Const(x), Node::Const(y)) => Node::Const(op.apply(x, y)),
                (a, Node::Const(c)) if *op == BinaryOp::Pow => Node::PowConst(Box::new(a), c),
                (a, b) => Node::Binary(*op, Box::new(a), Box::new(b)),
            }
        }
    };
    Ok(node)
}

fn eval_f64(node: &Node, x: &[f64]) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Slot(i) => x[*i],
        Node::Unary(op, a) => op.apply(eval_f64(a, x)),
        Node::Binary(op, a, b) => op.apply(eval_f64(a, x), eval_f64(b, x)),
        Node::PowConst(a, c) => pow_f64(eval_f64(a, x), *c),
    }
}

fn non_smooth(primitive: &'static str, at: f64) -> Error {
    Error::NonSmooth { primitive, at }
}

fn eval<N: Number>(node: &Node, x: &[N], zero: &N) -> Result<N> {
    Ok(match node {
        Node::Const(c) => zero.lift(*c),
        Node::Slot(i) => x[*i].clone(),
        Node::Unary(op, a) => {
            let a = eval(a, x, zero)?;
            unary(*op, &a)?
        }
        Node::Binary(op, a, b) => {
            let (a, b) = (eval(a, x, zero)?, eval(b, x, zero)?);
            match op {
                BinaryOp::Add => a.add(&b),
                BinaryOp::Sub => a.sub(&b),
                BinaryOp::Mul => a.mul(&b),
                BinaryOp::Div => {
                    let v = b.value();
                    a.mul(&b.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
                }
                BinaryOp::Pow => {
                    // a^b = exp(b ln a) for a non-constant exponent
                    let av = a.value();
                    if N::DIFFERENTIATED && av <= 0.0 {
                        return Err(non_smooth("^", av));
                    }
                    let ln_a = a.chain(av.ln(), 1.0 / av, -1.0 / (av * av));
                    let e = b.mul(&ln_a);
                    let ev = e.value().exp();
                    e.chain(ev, ev, ev)
                }
            }
        }
        Node::PowConst(a, c) => {
            let a = eval(a, x, zero)?;
            pow_const(&a, *c)?
        }
    })
}

fn unary<N: Number>(op: UnaryOp, a: &N) -> Result<N> {
    let v = a.value();
    Ok(match op {
        UnaryOp::Neg => a.scale(-1.0),
        UnaryOp::Sin => a.chain(v.sin(), v.cos(), -v.sin()),
        UnaryOp::Cos => a.chain(v.cos(), -v.sin(), -v.cos()),
        UnaryOp::Sinh => a.chain(v.sinh(), v.cosh(), v.sinh()),
        UnaryOp::Cosh => a.chain(v.cosh(), v.sinh(), v.cosh()),
        UnaryOp::Exp => {
            let e = v.exp();
            a.chain(e, e, e)
        }
        UnaryOp::Log => a.chain(v.ln(), 1.0 / v, -1.0 / (v * v)),
        UnaryOp::Sqrt => {
            if N::DIFFERENTIATED && v == 0.0 {
                return Err(non_smooth("sqrt", v));
            }
            let s = v.sqrt();
            a.chain(s, 0.5 / s, -0.25 / (s * v))
        }
        UnaryOp::Abs => {
            if N::DIFFERENTIATED && v == 0.0 {
                return Err(non_smooth("abs", v));
            }
            a.chain(v.abs(), v.signum(), 0.0)
        }
    })
}

fn pow_const<N: Number>(a: &N, c: f64) -> Result<N> {
    let v = a.value();
    if c == 0.0 {
        return Ok(a.lift(1.0));
    }
    if c == 1.0 {
        return Ok(a.clone());
    }
    if c.fract() == 0.0 && c.abs() <= 64.0 {
        let n = c as i32;
        let f0 = v.powi(n);
        let f1 = c * v.powi(n - 1);
        let f2 = c * (c - 1.0) * if n == 1 { 0.0 } else { v.powi(n - 2) };
        return Ok(a.chain(f0, f1, f2));
    }
    // real exponent: C^2 at zero only when c >= 2
    if N::DIFFERENTIATED && v == 0.0 && c < 2.0 {
        return Err(non_smooth("^", v));
    }
    Ok(a.chain(v.powf(c), c * v.powf(c - 1.0), c * (c - 1.0) * v.powf(c - 2.0)))
}
