//! Scalar expressions over coordinates and parameters.
//!
//! An [`Expr`] is an immutable syntax tree. Coordinates are [`Expr::Var`]
//! nodes and late-bound constants are [`Expr::Param`] nodes, so one parsed
//! potential can be re-evaluated for many parameter values. Hot paths go
//! through [`Compiled`], which resolves names to slots once and then
//! evaluates values, gradients and Hessians by forward-mode jets.

mod compile;
mod jet;
mod parse;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub use compile::Compiled;
pub use jet::{FirstOrderJet, SecondOrderJet};
pub use parse::{parse_expression, NameSet, ParseDiagnostic};

use crate::error::{Error, Result};

/// Parameter values keyed by name.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }

    pub(crate) fn from_function_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    pub(crate) fn apply(self, a: f64) -> f64 {
        match self {
            UnaryOp::Neg => -a,
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Sinh => a.sinh(),
            UnaryOp::Cosh => a.cosh(),
            UnaryOp::Exp => a.exp(),
            UnaryOp::Log => a.ln(),
            UnaryOp::Sqrt => a.sqrt(),
            UnaryOp::Abs => a.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    pub(crate) fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
            BinaryOp::Pow => pow_f64(a, b),
        }
    }
}

pub(crate) fn pow_f64(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Param(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

// Builders used when systems assemble Lagrangians from metric entries.
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, a, b)
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, a, b)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::unary(UnaryOp::Neg, a)
    }

    /// Sum of terms; the empty sum is `0`.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .reduce(Expr::add)
            .unwrap_or(Expr::Num(0.0))
    }
}

impl Expr {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, &mut BTreeSet::new());
        out
    }

    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect(&self, vars: &mut BTreeSet<String>, params: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n) => {
                vars.insert(n.clone());
            }
            Expr::Param(n) => {
                params.insert(n.clone());
            }
            Expr::Unary(_, a) => a.collect(vars, params),
            Expr::Binary(_, a, b) => {
                a.collect(vars, params);
                b.collect(vars, params);
            }
        }
    }

    /// Evaluate with every free variable and parameter looked up by name.
    ///
    /// Poles and domain violations come back as non-finite values; check
    /// them with [`is_valid`].
    pub fn eval(&self, binding: &HashMap<String, f64>) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(n) | Expr::Param(n) => *binding
                .get(n)
                .ok_or_else(|| Error::Unbound(n.clone()))?,
            Expr::Unary(op, a) => op.apply(a.eval(binding)?),
            Expr::Binary(op, a, b) => op.apply(a.eval(binding)?, b.eval(binding)?),
        })
    }

    /// Substitute parameters by numbers, leaving variables alone.
    pub fn bind_params(&self, params: &Params) -> Expr {
        match self {
            Expr::Param(n) => match params.get(n) {
                Some(v) => Expr::Num(*v),
                None => self.clone(),
            },
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.bind_params(params)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.bind_params(params), b.bind_params(params)),
        }
    }

    /// Compile against an ordered variable list; parameters become constants.
    pub fn compile(&self, vars: &[&str], params: &Params) -> Result<Compiled> {
        Compiled::new(self, vars, params)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

/// Finite results are valid; NaN and infinities are not.
pub fn is_valid(value: f64) -> bool {
    value.is_finite()
}

/// One-shot evaluation of value, gradient and Hessian at `point`.
pub fn jet2(expr: &Expr, vars: &[&str], point: &[f64], params: &Params) -> Result<SecondOrderJet> {
    expr.compile(vars, params)?.jet2(point)
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(n) | Expr::Param(n) => f.write_str(n),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_child(f, a, a.precedence() < 3)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(BinaryOp::Pow, a, b) => {
                write_child(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                write_child(f, b, b.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                write_child(f, a, a.precedence() < p)?;
                f.write_str(op.symbol())?;
                write_child(f, b, b.precedence() <= p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(vars: &[&str], params: &[&str]) -> NameSet {
        NameSet::new(vars.iter().copied(), params.iter().copied())
    }

    #[test]
    fn hooke_free_names() {
        let e = parse_expression("0.5*k*x^2", &names(&["x"], &["k"])).unwrap();
        assert_eq!(e.free_vars().into_iter().collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(e.free_params().into_iter().collect::<Vec<_>>(), vec!["k"]);
    }

    #[test]
    fn eval_examples() {
        let e = parse_expression("0.5*k*x^2", &names(&["x"], &["k"])).unwrap();
        let b: HashMap<String, f64> = [("k".into(), 1.0), ("x".into(), 3.0)].into();
        assert_eq!(e.eval(&b).unwrap(), 4.5);

        let newton = parse_expression("-M/sqrt(x^2+y^2+z^2)", &names(&["x", "y", "z"], &["M"])).unwrap();
        assert_eq!(newton.free_vars().len(), 3);
        let b: HashMap<String, f64> = [("M", 1.0), ("x", 1.0), ("y", 0.0), ("z", 0.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(newton.eval(&b).unwrap(), -1.0);

        let pole = parse_expression("1/x", &names(&["x"], &[])).unwrap();
        let v = pole.eval(&[("x".to_string(), 0.0)].into()).unwrap();
        assert_eq!(v, f64::INFINITY);
        assert!(!is_valid(v));
    }

    #[test]
    fn missing_binding_names_first_unbound() {
        let e = parse_expression("a*x + y", &names(&["x", "y"], &["a"])).unwrap();
        let err = e.eval(&[("x".to_string(), 1.0)].into()).unwrap_err();
        assert_eq!(err, Error::Unbound("a".into()));
    }

    #[test]
    fn printing_is_reparsable() {
        let ns = names(&["x", "y"], &["k"]);
        for src in [
            "-x^2",
            "(-x)^2",
            "x^-2",
            "x^y^2",
            "(x^y)^2",
            "x - (y - k)*x",
            "x - y - k",
            "x - (y - k)",
            "x/(y*k)",
            "-(x + y)*k",
            "--x",
            "x*-y",
            "sin(x)^2 + cos(y)/-k",
            "2^-x^2",
            "1e-12*x + 3.25e5",
        ] {
            let e = parse_expression(src, &ns).unwrap();
            let printed = e.to_string();
            let again = parse_expression(&printed, &ns).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn sum_builder() {
        assert_eq!(Expr::sum([]), Expr::Num(0.0));
        let s = Expr::sum([Expr::var("x"), Expr::var("y")]);
        assert_eq!(s.to_string(), "x + y");
    }
}
