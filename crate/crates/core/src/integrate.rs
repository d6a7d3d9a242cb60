//! Fixed-step integration of Hamilton's and the Euler-Lagrange equations.

use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::Compiled;
use crate::mechsys::{Guard, LagrangianSystem, PhaseState, VelocityState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    /// Störmer-Verlet (kick-drift-kick); constant metric only.
    Verlet,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Verlet => "verlet",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rk4" => Ok(Method::Rk4),
            "verlet" => Ok(Method::Verlet),
            other => Err(Error::Invalid(format!("unknown integrator `{other}`"))),
        }
    }
}

/// Which first-order system RK4 advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// `(q, p)` with Hamilton's equations.
    #[default]
    Hamilton,
    /// `(q, q̂)` with the Euler-Lagrange equations; samples are stored as momenta.
    Lagrange,
}

#[derive(Debug, Clone)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    pub steps: usize,
    /// Integration stops before storing a state where this predicate holds.
    pub stop: Option<Guard>,
    pub formulation: Formulation,
}

impl IntegratorSpec {
    pub fn new(method: Method, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Invalid(format!("dt must be positive and finite, got {dt}")));
        }
        if steps == 0 {
            return Err(Error::Invalid("steps must be positive".into()));
        }
        if !(dt * steps as f64).is_finite() {
            return Err(Error::Invalid("dt·steps overflows".into()));
        }
        Ok(IntegratorSpec {
            method,
            dt,
            steps,
            stop: None,
            formulation: Formulation::Hamilton,
        })
    }

    pub fn rk4(dt: f64, steps: usize) -> Result<Self> {
        Self::new(Method::Rk4, dt, steps)
    }

    pub fn verlet(dt: f64, steps: usize) -> Result<Self> {
        Self::new(Method::Verlet, dt, steps)
    }

    pub fn with_stop(mut self, stop: Guard) -> Self {
        self.stop = Some(stop);
        self
    }

    pub fn with_formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = formulation;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub method: Method,
    pub dt: f64,
    pub fingerprint: u64,
}

/// Why a run ended before `steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub meta: TrajectoryMeta,
    pub truncated: Option<Truncation>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn velocity_states(&self, sys: &LagrangianSystem) -> Result<Vec<VelocityState>> {
        self.states.iter().map(|s| sys.to_velocities(s)).collect()
    }

    /// `t,q1..qn,p1..pn,E` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, sys: &LagrangianSystem, mut w: W) -> io::Result<()> {
        let n = sys.dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("q{i}")));
        header.extend((1..=n).map(|i| format!("p{i}")));
        header.push("E".into());
        writeln!(w, "{}", header.join(","))?;
        for (t, s) in self.t.iter().zip(&self.states) {
            let e = sys.hamiltonian(s).unwrap_or(f64::NAN);
            write!(w, "{}", fmt17(*t))?;
            for v in s.q.iter().chain(&s.p) {
                write!(w, ",{}", fmt17(*v))?;
            }
            writeln!(w, ",{}", fmt17(e))?;
        }
        Ok(())
    }
}

/// Round-trippable decimal with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `q̈` from the Euler-Lagrange equations at `(q, q̂)`.
///
/// Metric systems use `−Γ(q̂, q̂) − g⁻¹dV`; general Lagrangians solve
/// `∂²L/∂q̂∂q̂ · q̈ = ∂L/∂q − ∂²L/∂q̂∂q · q̂`.
pub fn el_rhs(sys: &LagrangianSystem, s: &VelocityState) -> Result<Vec<f64>> {
    let n = sys.dim();
    if sys.is_metric() {
        let dv = sys.potential_gradient(&s.q)?;
        let g = sys.metric_at(&s.q)?;
        let grad_v = solve(&g, &dv)?;
        if sys.has_constant_metric() {
            return Ok(grad_v.iter().map(|v| -v).collect());
        }
        let gamma = sys.christoffel(&s.q)?.contract(&s.qdot);
        return Ok((0..n).map(|l| -gamma[l] - grad_v[l]).collect());
    }
    let jet = sys.lagrangian_jet(s)?;
    let hvv = DMatrix::from_fn(n, n, |i, j| jet.hessian(n + i, n + j));
    let rhs: Vec<f64> = (0..n)
        .map(|i| {
            let mixed: f64 = (0..n).map(|j| jet.hessian(n + i, j) * s.qdot[j]).sum();
            jet.gradient[i] - mixed
        })
        .collect();
    solve(&hvv, &rhs)
}

fn solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let det = a.determinant();
    let tol = crate::mechsys::det_tol(a);
    if det == 0.0 || !(det.abs() >= tol) {
        return Err(Error::Degenerate { det, tol });
    }
    a.clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .map(|v| v.as_slice().to_vec())
        .ok_or(Error::Degenerate { det, tol })
}

/// `(q̇, ṗ) = (∂H/∂p, −∂H/∂q)`, with `−∂H/∂q = ∂L/∂q` at the matching velocity.
pub fn hamilton_rhs(sys: &LagrangianSystem, s: &PhaseState) -> Result<(Vec<f64>, Vec<f64>)> {
    let v = sys.to_velocities(s)?;
    let pdot = if sys.has_constant_metric() {
        sys.potential_gradient(&s.q)?.iter().map(|g| -g).collect()
    } else {
        sys.generalized_force(&v)?
    };
    Ok((v.qdot, pdot))
}

struct Stepper<'a> {
    sys: &'a LagrangianSystem,
    stop: Option<(Guard, Compiled)>,
}

impl Stepper<'_> {
    fn reject(&self, q: &[f64], p: &[f64]) -> Option<String> {
        if !q.iter().chain(p).all(|v| v.is_finite()) {
            return Some("non-finite state".into());
        }
        if let Err(e) = self.sys.check_admissible(q) {
            return Some(e.to_string());
        }
        if let Some((g, c)) = &self.stop {
            if g.holds(c.value(q)) {
                return Some(format!("stop condition `{g}` reached"));
            }
        }
        None
    }
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| yi + a * xi).collect()
}

fn rk4_combine(y: &[f64], k: [&[f64]; 4], dt: f64) -> Vec<f64> {
    (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]))
        .collect()
}

fn rk4_hamilton(sys: &LagrangianSystem, s: &PhaseState, dt: f64) -> Result<PhaseState> {
    let (a1, b1) = hamilton_rhs(sys, s)?;
    let s2 = PhaseState::new(axpy(0.5 * dt, &a1, &s.q), axpy(0.5 * dt, &b1, &s.p));
    let (a2, b2) = hamilton_rhs(sys, &s2)?;
    let s3 = PhaseState::new(axpy(0.5 * dt, &a2, &s.q), axpy(0.5 * dt, &b2, &s.p));
    let (a3, b3) = hamilton_rhs(sys, &s3)?;
    let s4 = PhaseState::new(axpy(dt, &a3, &s.q), axpy(dt, &b3, &s.p));
    let (a4, b4) = hamilton_rhs(sys, &s4)?;
    Ok(PhaseState::new(
        rk4_combine(&s.q, [&a1, &a2, &a3, &a4], dt),
        rk4_combine(&s.p, [&b1, &b2, &b3, &b4], dt),
    ))
}

fn rk4_lagrange(sys: &LagrangianSystem, s: &VelocityState, dt: f64) -> Result<VelocityState> {
    let a1 = el_rhs(sys, s)?;
    let s2 = VelocityState::new(axpy(0.5 * dt, &s.qdot, &s.q), axpy(0.5 * dt, &a1, &s.qdot));
    let a2 = el_rhs(sys, &s2)?;
    let s3 = VelocityState::new(axpy(0.5 * dt, &s2.qdot, &s.q), axpy(0.5 * dt, &a2, &s.qdot));
    let a3 = el_rhs(sys, &s3)?;
    let s4 = VelocityState::new(axpy(dt, &s3.qdot, &s.q), axpy(dt, &a3, &s.qdot));
    let a4 = el_rhs(sys, &s4)?;
    Ok(VelocityState::new(
        rk4_combine(&s.q, [&s.qdot, &s2.qdot, &s3.qdot, &s4.qdot], dt),
        rk4_combine(&s.qdot, [&a1, &a2, &a3, &a4], dt),
    ))
}

/// Integrate from `s0`; every step is stored.
///
/// A run that leaves the admissible set, produces a non-finite state, meets
/// the stop predicate or hits a degenerate metric ends early with
/// [`Trajectory::truncated`] set; the offending state is not stored.
pub fn run(sys: &LagrangianSystem, s0: &PhaseState, spec: &IntegratorSpec) -> Result<Trajectory> {
    sys.check_admissible(&s0.q)?;
    if s0.p.len() != sys.dim() {
        return Err(Error::dim("p", s0.p.len(), sys.dim()));
    }
    if spec.method == Method::Verlet && !sys.has_constant_metric() {
        return Err(Error::Invalid(
            "verlet requires a constant metric; use rk4".into(),
        ));
    }
    let stop = match &spec.stop {
        Some(g) => Some((g.clone(), sys.compile(&g.expr)?)),
        None => None,
    };
    let stepper = Stepper { sys, stop };
    if let Some(reason) = stepper.reject(&s0.q, &s0.p) {
        return Err(Error::Inadmissible(reason));
    }

    let dt = spec.dt;
    let mut t = Vec::with_capacity(spec.steps + 1);
    let mut states = Vec::with_capacity(spec.steps + 1);
    t.push(0.0);
    states.push(s0.clone());
    let mut truncated = None;

    let minv = if spec.method == Method::Verlet {
        let m = sys.metric_at(&s0.q)?;
        Some(
            m.clone()
                .try_inverse()
                .ok_or(Error::Degenerate { det: m.determinant(), tol: crate::mechsys::det_tol(&m) })?,
        )
    } else {
        None
    };
    let mut vel = if spec.formulation == Formulation::Lagrange && spec.method == Method::Rk4 {
        Some(sys.to_velocities(s0)?)
    } else {
        None
    };

    for k in 1..=spec.steps {
        let cur = states.last().expect("non-empty");
        let next = match spec.method {
            Method::Rk4 => match &vel {
                Some(v) => rk4_lagrange(sys, v, dt).and_then(|nv| {
                    let ps = sys.to_momenta(&nv)?;
                    vel = Some(nv);
                    Ok(ps)
                }),
                None => rk4_hamilton(sys, cur, dt),
            },
            Method::Verlet => verlet_step(sys, cur, dt, minv.as_ref().expect("set for verlet")),
        };
        let tk = k as f64 * dt;
        match next {
            Ok(s) => {
                if let Some(reason) = stepper.reject(&s.q, &s.p) {
                    truncated = Some(Truncation { t: tk, reason });
                    break;
                }
                t.push(tk);
                states.push(s);
            }
            Err(e) => {
                truncated = Some(Truncation {
                    t: tk,
                    reason: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(Trajectory {
        t,
        states,
        meta: TrajectoryMeta {
            method: spec.method,
            dt,
            fingerprint: sys.fingerprint(),
        },
        truncated,
    })
}

fn verlet_step(sys: &LagrangianSystem, s: &PhaseState, dt: f64, minv: &DMatrix<f64>) -> Result<PhaseState> {
    let g0 = sys.potential_gradient(&s.q)?;
    let p_half = axpy(-0.5 * dt, &g0, &s.p);
    let v = minv * DVector::from_column_slice(&p_half);
    let q = axpy(dt, v.as_slice(), &s.q);
    let g1 = sys.potential_gradient(&q)?;
    let p = axpy(-0.5 * dt, &g1, &p_half);
    Ok(PhaseState::new(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> LagrangianSystem {
        LagrangianSystem::builder(["x"]).param("k", 1.0).potential("0.5*k*x^2").build().unwrap()
    }

    fn kepler() -> LagrangianSystem {
        LagrangianSystem::builder(["x", "y", "z"])
            .param("M", 1.0)
            .potential("-M/r")
            .guard("r > 1e-6")
            .build()
            .unwrap()
    }

    #[test]
    fn el_rhs_examples() {
        let free = LagrangianSystem::builder(["a", "b"]).build().unwrap();
        assert_eq!(el_rhs(&free, &VelocityState::new([1.0, 2.0], [3.0, 4.0])).unwrap(), vec![0.0, 0.0]);
        let a = el_rhs(&oscillator(), &VelocityState::new([2.0], [0.0])).unwrap();
        assert_eq!(a, vec![-2.0]);
        let a = el_rhs(&kepler(), &VelocityState::new([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])).unwrap();
        assert!((a[0] + 1.0).abs() < 1e-15 && a[1] == 0.0 && a[2] == 0.0);
    }

    #[test]
    fn el_rhs_metric_and_general_agree() {
        let metric = LagrangianSystem::builder(["r", "phi"])
            .param("M", 1.0)
            .metric([["1", "0"], ["0", "r^2"]])
            .potential("-M/r")
            .build()
            .unwrap();
        let general = LagrangianSystem::builder(["r", "phi"])
            .param("M", 1.0)
            .lagrangian("0.5*r_dot^2 + 0.5*r^2*phi_dot^2 + M/r")
            .build()
            .unwrap();
        let s = VelocityState::new([1.3, 0.4], [0.2, 0.9]);
        let a = el_rhs(&metric, &s).unwrap();
        let b = el_rhs(&general, &s).unwrap();
        // oracle: r̈ = rφ̇² − M/r², φ̈ = −2ṙφ̇/r
        let want = [1.3 * 0.81 - 1.0 / 1.69, -2.0 * 0.2 * 0.9 / 1.3];
        for i in 0..2 {
            assert!((a[i] - want[i]).abs() < 1e-14);
            assert!((b[i] - want[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn hamilton_rhs_examples() {
        let free = LagrangianSystem::builder(["a", "b"]).build().unwrap();
        let (v, f) = hamilton_rhs(&free, &PhaseState::new([0.0, 0.0], [1.0, 0.0])).unwrap();
        assert_eq!((v, f), (vec![1.0, 0.0], vec![0.0, 0.0]));
        let (v, f) = hamilton_rhs(&oscillator(), &PhaseState::new([0.0], [1.0])).unwrap();
        assert_eq!((v, f), (vec![1.0], vec![0.0]));
        let (v, f) = hamilton_rhs(&kepler(), &PhaseState::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
        assert!((f[0] + 1.0).abs() < 1e-15 && f[1] == 0.0 && f[2] == 0.0);
    }

    #[test]
    fn oscillator_period() {
        let steps = (2.0 * std::f64::consts::PI / 1e-3).round() as usize;
        let dt = 2.0 * std::f64::consts::PI / steps as f64;
        let tr = run(&oscillator(), &PhaseState::new([1.0], [0.0]), &IntegratorSpec::rk4(dt, steps).unwrap()).unwrap();
        let end = tr.last();
        assert!((end.q[0] - 1.0).abs() < 1e-9 && end.p[0].abs() < 1e-9);
        assert_eq!(tr.len(), steps + 1);
        assert!(tr.truncated.is_none());
    }

    #[test]
    fn free_particle_is_exact() {
        let free = LagrangianSystem::builder(["a", "b"]).euclidean(2.0).build().unwrap();
        let tr = run(&free, &PhaseState::new([1.0, -1.0], [0.5, 3.0]), &IntegratorSpec::rk4(0.125, 64).unwrap()).unwrap();
        for (t, s) in tr.t.iter().zip(&tr.states) {
            assert!((s.q[0] - (1.0 + t * 0.25)).abs() < 1e-13);
            assert!((s.q[1] - (-1.0 + t * 1.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn guard_truncates_cleanly() {
        // radial infall from rest; a fixed step can jump across r = 0, so the
        // guard radius is well above the step length
        let sys = LagrangianSystem::builder(["x", "y", "z"])
            .param("M", 1.0)
            .potential("-M/r")
            .guard("r > 0.05")
            .build()
            .unwrap();
        let tr = run(
            &sys,
            &PhaseState::new([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
            &IntegratorSpec::rk4(1e-3, 5000).unwrap(),
        )
        .unwrap();
        assert!(tr.truncated.is_some());
        assert!(tr.states.iter().all(|s| s.q.iter().all(|v| v.is_finite())));
        assert!(tr.t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn stop_predicate() {
        let sys = oscillator();
        let stop = Guard::parse("x < 0", &sys.names()).unwrap();
        let spec = IntegratorSpec::rk4(1e-2, 1000).unwrap().with_stop(stop);
        let tr = run(&sys, &PhaseState::new([1.0], [0.0]), &spec).unwrap();
        let t = tr.truncated.unwrap().t;
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-2);
    }

    #[test]
    fn inadmissible_start_is_an_error() {
        let r = run(&kepler(), &PhaseState::new([0.0; 3], [0.0; 3]), &IntegratorSpec::rk4(1e-3, 1).unwrap());
        assert!(matches!(r, Err(Error::Inadmissible(_))));
    }

    #[test]
    fn verlet_needs_constant_metric() {
        let polar = LagrangianSystem::builder(["r", "phi"]).metric([["1", "0"], ["0", "r^2"]]).build().unwrap();
        let r = run(&polar, &PhaseState::new([1.0, 0.0], [0.0, 1.0]), &IntegratorSpec::verlet(1e-3, 10).unwrap());
        assert!(matches!(r, Err(Error::Invalid(_))));
        assert!(IntegratorSpec::rk4(0.0, 1).is_err());
        assert!(IntegratorSpec::rk4(1e-3, 0).is_err());
    }

    #[test]
    fn lagrange_formulation_matches_hamilton() {
        let polar = LagrangianSystem::builder(["r", "phi"])
            .param("M", 1.0)
            .metric([["1", "0"], ["0", "r^2"]])
            .potential("-M/r")
            .guard("r > 1e-6")
            .build()
            .unwrap();
        let s0 = PhaseState::new([1.0, 0.0], [0.1, 1.1]);
        let a = run(&polar, &s0, &IntegratorSpec::rk4(1e-3, 2000).unwrap()).unwrap();
        let spec = IntegratorSpec::rk4(1e-3, 2000).unwrap().with_formulation(Formulation::Lagrange);
        let b = run(&polar, &s0, &spec).unwrap();
        for i in 0..2 {
            assert!((a.last().q[i] - b.last().q[i]).abs() < 1e-10);
            assert!((a.last().p[i] - b.last().p[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let tr = run(&oscillator(), &PhaseState::new([1.0], [0.0]), &IntegratorSpec::rk4(0.1, 3).unwrap()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&oscillator(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,q1,p1,E");
        assert_eq!(lines.len(), 5);
        let e: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(e, 0.5);
        let q: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(q, tr.states[1].q[0]);
    }
}
