//! Numerical Legendre transform of strictly convex functions.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr, Params, SecondOrderJet};

const MAX_ITER: usize = 50;
const RESIDUAL_TOL: f64 = 1e-10;
const ARMIJO_C: f64 = 1e-4;

/// Anything that can report value, gradient and Hessian at a point.
pub trait SmoothFunction {
    fn dim(&self) -> usize;
    fn jet(&self, x: &[f64]) -> Result<SecondOrderJet>;
}

/// A compiled expression viewed as a smooth function of its variables.
#[derive(Debug, Clone)]
pub struct ExprFunction {
    compiled: Compiled,
}

impl ExprFunction {
    pub fn new(expr: &Expr, vars: &[&str], params: &Params) -> Result<Self> {
        Ok(ExprFunction {
            compiled: expr.compile(vars, params)?,
        })
    }
}

impl SmoothFunction for ExprFunction {
    fn dim(&self) -> usize {
        self.compiled.arity()
    }

    fn jet(&self, x: &[f64]) -> Result<SecondOrderJet> {
        self.compiled.jet2(x)
    }
}

/// Result of `f̃(y) = sup_x (⟨y, x⟩ − f(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendrePoint {
    pub x_star: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Solve `∇f(x*) = y` by damped Newton on `f(x) − ⟨y, x⟩`.
///
/// Fails with [`Error::Domain`] when the Hessian at an iterate is not
/// positive definite.
pub fn legendre_transform(f: &dyn SmoothFunction, y: &[f64], x0: &[f64]) -> Result<LegendrePoint> {
    let n = f.dim();
    if y.len() != n {
        return Err(Error::dim("y", y.len(), n));
    }
    if x0.len() != n {
        return Err(Error::dim("initial guess", x0.len(), n));
    }
    let yv = DVector::from_column_slice(y);
    let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let objective = |jet: &SecondOrderJet, x: &DVector<f64>| jet.value - yv.dot(x);

    let mut x = DVector::from_column_slice(x0);
    let mut jet = f.jet(x.as_slice())?;
    let mut residual = f64::INFINITY;
    for it in 0..MAX_ITER {
        let grad = DVector::from_column_slice(&jet.gradient) - &yv;
        residual = grad.amax();
        if residual <= RESIDUAL_TOL * scale {
            return Ok(LegendrePoint {
                value: -objective(&jet, &x),
                x_star: x.as_slice().to_vec(),
                iterations: it,
            });
        }
        let h = jet.hessian_matrix();
        let chol = h.clone().cholesky().ok_or_else(|| {
            Error::Domain(format!(
                "Hessian is not positive definite at {:?}",
                x.as_slice()
            ))
        })?;
        let step = -chol.solve(&grad);
        let slope = grad.dot(&step);
        let phi0 = objective(&jet, &x);
        let mut alpha = 1.0;
        loop {
            let trial = &x + &step * alpha;
            let tj = f.jet(trial.as_slice());
            if let Ok(tj) = tj {
                let phi = objective(&tj, &trial);
                let tres = (DVector::from_column_slice(&tj.gradient) - &yv).amax();
                // near the optimum φ stalls at round-off, so a smaller
                // gradient also counts as progress
                if phi.is_finite() && (phi <= phi0 + ARMIJO_C * alpha * slope || tres < residual) {
                    x = trial;
                    jet = tj;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                return Err(Error::NoConvergence {
                    iterations: it + 1,
                    residual,
                });
            }
        }
    }
    let grad = DVector::from_column_slice(&jet.gradient) - &yv;
    let last = grad.amax();
    if last <= RESIDUAL_TOL * scale {
        return Ok(LegendrePoint {
            value: -objective(&jet, &x),
            x_star: x.as_slice().to_vec(),
            iterations: MAX_ITER,
        });
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        residual: residual.min(last),
    })
}

/// `f̃` as a smooth function: `∇f̃(y) = x*`, `∇²f̃(y) = (∇²f(x*))⁻¹`.
///
/// Each evaluation solves from `guess`, so the double transform is
/// available by wrapping twice.
pub struct LegendreTransform<'a> {
    inner: &'a dyn SmoothFunction,
    guess: Vec<f64>,
}

impl<'a> LegendreTransform<'a> {
    pub fn new(inner: &'a dyn SmoothFunction, guess: Vec<f64>) -> Self {
        LegendreTransform { inner, guess }
    }
}

impl SmoothFunction for LegendreTransform<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, y: &[f64]) -> Result<SecondOrderJet> {
        let pt = legendre_transform(self.inner, y, &self.guess)?;
        let h = self.inner.jet(&pt.x_star)?.hessian_matrix();
        let n = h.nrows();
        let inv = h
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::Domain("Hessian lost definiteness at the optimum".into()))?;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect();
        Ok(SecondOrderJet::from_parts(pt.value, pt.x_star, &rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, NameSet};

    fn func(text: &str, vars: &[&str]) -> ExprFunction {
        let e = parse_expression(text, &NameSet::new(vars.iter().copied(), Vec::<String>::new())).unwrap();
        ExprFunction::new(&e, vars, &Params::new()).unwrap()
    }

    #[test]
    fn quadratic_form() {
        // f = ½ xᵀAx with A = [[2,0],[0,1]] gives f̃ = ½ yᵀA⁻¹y
        let f = func("x^2 + 0.5*y^2", &["x", "y"]);
        let pt = legendre_transform(&f, &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!((pt.value - 0.75).abs() < 1e-10);
        assert!((pt.x_star[0] - 0.5).abs() < 1e-10);
        assert!((pt.x_star[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exp_conjugate() {
        // (e^x)~(y) = y ln y − y
        let f = func("exp(x)", &["x"]);
        let pt = legendre_transform(&f, &[2.0], &[0.0]).unwrap();
        let want = 2.0 * 2f64.ln() - 2.0;
        assert!((pt.value - want).abs() < 1e-10);
    }

    #[test]
    fn concave_is_a_domain_error() {
        let f = func("-x^2", &["x"]);
        assert!(matches!(
            legendre_transform(&f, &[1.0], &[0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn double_transform_is_identity() {
        let f = func("cosh(x) + 0.5*y^2 + 0.1*x*y", &["x", "y"]);
        let once = LegendreTransform::new(&f, vec![0.0, 0.0]);
        let twice = LegendreTransform::new(&once, vec![0.0, 0.0]);
        let x = [0.3, -0.4];
        let back = twice.jet(&x).unwrap();
        let direct = f.jet(&x).unwrap();
        assert!((back.value - direct.value).abs() < 1e-8, "{} vs {}", back.value, direct.value);
    }
}
