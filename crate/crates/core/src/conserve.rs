//! Noether charges, Killing checks and drift audits along trajectories.

use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Compiled, Expr};
use crate::integrate::{fmt17, Trajectory};
use crate::mechsys::{LagrangianSystem, PhaseState, VelocityState};

/// Step for central differences of the metric.
pub const METRIC_FD_STEP: f64 = 1e-5;
/// Verdict threshold for "is Killing".
pub const KILLING_TOL: f64 = 1e-7;

/// A vector field `X = Xⁱ ∂/∂qⁱ` on the coordinate domain.
#[derive(Debug, Clone)]
pub struct SymmetryField {
    pub label: String,
    pub components: Vec<Expr>,
    compiled: Vec<Compiled>,
}

impl SymmetryField {
    pub fn new(sys: &LagrangianSystem, label: &str, components: Vec<Expr>) -> Result<Self> {
        if components.len() != sys.dim() {
            return Err(Error::dim("field components", components.len(), sys.dim()));
        }
        let compiled = components.iter().map(|c| sys.compile(c)).collect::<Result<_>>()?;
        Ok(SymmetryField {
            label: label.to_string(),
            components,
            compiled,
        })
    }

    /// Parse one component per coordinate.
    pub fn parse(sys: &LagrangianSystem, label: &str, components: &[&str]) -> Result<Self> {
        let names = sys.names();
        let exprs = components
            .iter()
            .map(|c| parse_expression(c, &names).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sys, label, exprs)
    }

    /// `∂/∂q^axis`.
    pub fn translation(sys: &LagrangianSystem, axis: usize) -> Result<Self> {
        let comps = (0..sys.dim())
            .map(|i| Expr::num(if i == axis { 1.0 } else { 0.0 }))
            .collect();
        Self::new(sys, &format!("translation_{}", axis + 1), comps)
    }

    /// Rotation about coordinate axis `axis` of a 3D Cartesian system.
    pub fn rotation(sys: &LagrangianSystem, axis: usize) -> Result<Self> {
        if sys.dim() != 3 || axis > 2 {
            return Err(Error::Invalid("rotations need three Cartesian coordinates".into()));
        }
        let c = sys.coords();
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut comps = vec![Expr::num(0.0); 3];
        comps[a] = Expr::neg(Expr::var(c[b].as_str()));
        comps[b] = Expr::var(c[a].as_str());
        Self::new(sys, &format!("rotation_{}", axis + 1), comps)
    }

    pub fn dim(&self) -> usize {
        self.compiled.len()
    }

    pub fn at(&self, q: &[f64]) -> Vec<f64> {
        self.compiled.iter().map(|c| c.value(q)).collect()
    }

    /// `∂Xⁱ/∂qʲ` as a matrix with rows `i`.
    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut j = DMatrix::zeros(n, n);
        for (i, c) in self.compiled.iter().enumerate() {
            let g = c.gradient(q)?;
            for (k, d) in g.gradient.iter().enumerate() {
                j[(i, k)] = *d;
            }
        }
        Ok(j)
    }
}

/// `Σ Xⁱ(q) ∂L/∂q̂ⁱ`.
pub fn noether_charge(sys: &LagrangianSystem, x: &SymmetryField, s: &VelocityState) -> Result<f64> {
    sys.check_admissible(&s.q)?;
    let p = sys.momenta_of(s)?;
    Ok(x.at(&s.q).iter().zip(&p).map(|(a, b)| a * b).sum())
}

/// Killing defect of `X`: `max ‖L_X g‖` (entrywise) and `max |X(V)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingResidual {
    pub metric: f64,
    pub potential: f64,
}

impl KillingResidual {
    pub fn is_killing(&self) -> bool {
        self.metric <= KILLING_TOL
    }

    pub fn is_symmetry(&self) -> bool {
        self.metric <= KILLING_TOL && self.potential <= KILLING_TOL
    }
}

/// `(L_X g)_jk = Xᵐ ∂ₘg_jk + g_mk ∂ⱼXᵐ + g_jm ∂ₖXᵐ`, with `∂g` from central
/// differences and `∂X` from jets.
pub fn killing_residual(sys: &LagrangianSystem, x: &SymmetryField, points: &[Vec<f64>]) -> Result<KillingResidual> {
    let n = sys.dim();
    if x.dim() != n {
        return Err(Error::dim("field components", x.dim(), n));
    }
    let h = METRIC_FD_STEP;
    let mut out = KillingResidual {
        metric: 0.0,
        potential: 0.0,
    };
    for q in points {
        sys.check_admissible(q)?;
        let g = sys.metric_at(q)?;
        let xv = x.at(q);
        let dx = x.jacobian(q)?;
        let mut lie = DMatrix::zeros(n, n);
        for m in 0..n {
            if xv[m] == 0.0 {
                continue;
            }
            let mut a = q.clone();
            let mut b = q.clone();
            a[m] += h;
            b[m] -= h;
            let dg = (sys.metric_at(&a)? - sys.metric_at(&b)?) / (2.0 * h);
            lie += dg * xv[m];
        }
        // g_mk ∂_j X^m  is (Jᵀ g)_jk
        let t = dx.transpose() * &g;
        lie += &t + t.transpose();
        out.metric = out.metric.max(lie.amax());
        let dv = sys.potential_gradient(q)?;
        let xv_v: f64 = xv.iter().zip(&dv).map(|(a, b)| a * b).sum();
        out.potential = out.potential.max(xv_v.abs());
    }
    Ok(out)
}

/// A scalar watched along a trajectory.
#[derive(Debug, Clone)]
pub enum Monitor {
    Energy,
    /// Canonical momentum `pᵢ`.
    Momentum(usize),
    /// Component of `q × p` in three dimensions.
    AngularMomentum(usize),
    /// Component of `v × (x × v) − M x/r`, unit mass.
    RungeLenz { axis: usize, m: f64 },
    Charge(SymmetryField),
}

impl Monitor {
    pub fn label(&self) -> String {
        const AXES: [&str; 3] = ["x", "y", "z"];
        match self {
            Monitor::Energy => "energy".into(),
            Monitor::Momentum(i) => format!("p{}", i + 1),
            Monitor::AngularMomentum(a) => format!("L{}", AXES.get(*a).unwrap_or(&"?")),
            Monitor::RungeLenz { axis, .. } => format!("R{}", AXES.get(*axis).unwrap_or(&"?")),
            Monitor::Charge(x) => x.label.clone(),
        }
    }

    pub fn evaluate(&self, sys: &LagrangianSystem, s: &PhaseState) -> Result<f64> {
        match self {
            Monitor::Energy => sys.hamiltonian(s),
            Monitor::Momentum(i) => s
                .p
                .get(*i)
                .copied()
                .ok_or_else(|| Error::dim("momentum index", *i + 1, s.p.len())),
            Monitor::AngularMomentum(a) => {
                three(s)?;
                Ok(cross(&s.q, &s.p)[*a % 3])
            }
            Monitor::RungeLenz { axis, m } => {
                three(s)?;
                let v = sys.to_velocities(s)?.qdot;
                let r = s.q.iter().map(|x| x * x).sum::<f64>().sqrt();
                let l = cross(&s.q, &v);
                let vl = cross(&v, &l);
                Ok(vl[*axis % 3] - m * s.q[*axis % 3] / r)
            }
            Monitor::Charge(x) => noether_charge(sys, x, &sys.to_velocities(s)?),
        }
    }
}

fn three(s: &PhaseState) -> Result<()> {
    if s.q.len() != 3 {
        return Err(Error::dim("coordinates", s.q.len(), 3));
    }
    Ok(())
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Energy and every `pᵢ`; for 3D Euclidean systems also angular momentum,
/// and Runge-Lenz when a parameter `M` is present.
pub fn builtin_monitors(sys: &LagrangianSystem) -> Vec<Monitor> {
    let n = sys.dim();
    let mut out = vec![Monitor::Energy];
    out.extend((0..n).map(Monitor::Momentum));
    let euclid3 = n == 3 && sys.has_constant_metric() && sys.is_metric();
    if euclid3 {
        out.extend((0..3).map(Monitor::AngularMomentum));
        if let Some(m) = sys.params().get("M") {
            out.extend((0..3).map(|axis| Monitor::RungeLenz { axis, m: *m }));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub label: String,
    pub initial: f64,
    pub max_drift: f64,
    pub t_at_max: f64,
    /// `max_drift / max(|initial|, 1)`.
    pub relative: f64,
    /// `None` when every sample evaluated; otherwise the first failure.
    pub error: Option<String>,
}

impl DriftReport {
    pub fn valid(&self) -> bool {
        self.error.is_none()
    }
}

pub fn audit(sys: &LagrangianSystem, traj: &Trajectory, monitors: &[Monitor]) -> Result<Vec<DriftReport>> {
    if traj.is_empty() {
        return Err(Error::Invalid("empty trajectory".into()));
    }
    Ok(monitors.iter().map(|m| audit_one(sys, traj, m)).collect())
}

fn audit_one(sys: &LagrangianSystem, traj: &Trajectory, m: &Monitor) -> DriftReport {
    let mut rep = DriftReport {
        label: m.label(),
        initial: f64::NAN,
        max_drift: 0.0,
        t_at_max: traj.t[0],
        relative: f64::NAN,
        error: None,
    };
    for (t, s) in traj.t.iter().zip(&traj.states) {
        match m.evaluate(sys, s) {
            Ok(v) if v.is_finite() => {
                if rep.initial.is_nan() {
                    rep.initial = v;
                }
                let d = (v - rep.initial).abs();
                if d > rep.max_drift {
                    rep.max_drift = d;
                    rep.t_at_max = *t;
                }
            }
            Ok(v) => {
                rep.error = Some(format!("non-finite value {v} at t={t}"));
                break;
            }
            Err(e) => {
                rep.error = Some(format!("{e} at t={t}"));
                break;
            }
        }
    }
    rep.relative = rep.max_drift / rep.initial.abs().max(1.0);
    rep
}

/// `charge,initial,max_drift,t_at_max,relative_drift`.
pub fn write_audit_csv<W: Write>(reports: &[DriftReport], mut w: W) -> io::Result<()> {
    writeln!(w, "charge,initial,max_drift,t_at_max,relative_drift")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.label,
            fmt17(r.initial),
            fmt17(r.max_drift),
            fmt17(r.t_at_max),
            fmt17(r.relative)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{run, IntegratorSpec};

    fn euclid3(mass: f64, potential: &str) -> LagrangianSystem {
        LagrangianSystem::builder(["x", "y", "z"])
            .param("M", 1.0)
            .euclidean(mass)
            .potential(potential)
            .guard("r > 1e-6")
            .build()
            .unwrap()
    }

    #[test]
    fn charge_examples() {
        let sys = euclid3(2.0, "0");
        let s = VelocityState::new([0.3, -1.2, 0.5], [1.5, 0.7, -0.2]);
        let x = SymmetryField::translation(&sys, 0).unwrap();
        assert_eq!(noether_charge(&sys, &x, &s).unwrap(), 3.0);
        let rot = SymmetryField::rotation(&sys, 2).unwrap();
        let want = 2.0 * (0.3 * 0.7 - (-1.2) * 1.5);
        assert!((noether_charge(&sys, &rot, &s).unwrap() - want).abs() < 1e-14);
        let zero = SymmetryField::parse(&sys, "zero", &["0", "0", "0"]).unwrap();
        assert_eq!(noether_charge(&sys, &zero, &s).unwrap(), 0.0);
    }

    #[test]
    fn charge_equals_metric_pairing() {
        let sys = LagrangianSystem::builder(["r", "phi"])
            .metric([["1", "0"], ["0", "r^2"]])
            .build()
            .unwrap();
        let x = SymmetryField::parse(&sys, "rot", &["0", "1"]).unwrap();
        let s = VelocityState::new([1.7, 0.2], [0.4, -0.9]);
        let g = sys.metric_at(&s.q).unwrap();
        let want = g[(1, 1)] * -0.9;
        assert!((noether_charge(&sys, &x, &s).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn killing_examples() {
        let sys = euclid3(1.0, "-M/r");
        let pts = vec![vec![1.0, 0.5, -0.2], vec![-0.3, 2.0, 1.1]];
        let t = killing_residual(&sys, &SymmetryField::translation(&sys, 1).unwrap(), &pts).unwrap();
        assert!(t.metric <= 1e-9);
        assert!(t.potential > 1e-3);
        for axis in 0..3 {
            let r = killing_residual(&sys, &SymmetryField::rotation(&sys, axis).unwrap(), &pts).unwrap();
            assert!(r.metric <= 1e-9 && r.potential <= 1e-9, "{r:?}");
            assert!(r.is_symmetry());
        }
        let dil = SymmetryField::parse(&sys, "dil", &["x", "0", "0"]).unwrap();
        let r = killing_residual(&sys, &dil, &pts).unwrap();
        assert!((r.metric - 2.0).abs() < 1e-9);
    }

    #[test]
    fn killing_in_polar_metric() {
        let sys = LagrangianSystem::builder(["r", "phi"])
            .metric([["1", "0"], ["0", "r^2"]])
            .build()
            .unwrap();
        let pts = vec![vec![1.5, 0.3], vec![0.7, 2.0]];
        let rot = SymmetryField::parse(&sys, "rot", &["0", "1"]).unwrap();
        assert!(killing_residual(&sys, &rot, &pts).unwrap().metric <= 1e-9);
        let radial = SymmetryField::parse(&sys, "radial", &["1", "0"]).unwrap();
        // L_X g = diag(0, 2r)
        assert!((killing_residual(&sys, &radial, &pts).unwrap().metric - 3.0).abs() < 1e-8);
    }

    #[test]
    fn oscillator_momentum_varies() {
        let sys = LagrangianSystem::builder(["x"]).potential("0.5*x^2").build().unwrap();
        let tr = run(&sys, &PhaseState::new([1.0], [0.0]), &IntegratorSpec::rk4(1e-2, 700).unwrap()).unwrap();
        let reps = audit(&sys, &tr, &builtin_monitors(&sys)).unwrap();
        assert_eq!(reps[1].label, "p1");
        assert!(reps[1].max_drift > 0.9);
        assert!(reps[0].max_drift < 1e-8);
    }

    #[test]
    fn failing_monitor_is_marked_invalid() {
        let sys = LagrangianSystem::builder(["x"]).potential("0.5*x^2").build().unwrap();
        let tr = run(&sys, &PhaseState::new([1.0], [0.0]), &IntegratorSpec::rk4(1e-2, 10).unwrap()).unwrap();
        let reps = audit(&sys, &tr, &[Monitor::AngularMomentum(2), Monitor::Energy]).unwrap();
        assert!(!reps[0].valid());
        assert!(reps[1].valid());
    }

    #[test]
    fn builtins_for_kepler() {
        let sys = euclid3(1.0, "-M/r");
        let labels: Vec<String> = builtin_monitors(&sys).iter().map(Monitor::label).collect();
        assert_eq!(labels, ["energy", "p1", "p2", "p3", "Lx", "Ly", "Lz", "Rx", "Ry", "Rz"]);
    }

    #[test]
    fn audit_csv_shape() {
        let rep = DriftReport {
            label: "energy".into(),
            initial: -0.5,
            max_drift: 1e-9,
            t_at_max: 2.0,
            relative: 1e-9,
            error: None,
        };
        let mut buf = Vec::new();
        write_audit_csv(&[rep], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("charge,initial,max_drift,t_at_max,relative_drift\nenergy,"));
    }
}
