//! Hamilton-Jacobi families, confocal elliptic coordinates and the planar
//! two-center problem.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Compiled, Expr, NameSet, Params};
use crate::integrate::{fmt17, Trajectory};
use crate::mechsys::{LagrangianSystem, PhaseState};
use crate::numeric::integrate;
use crate::radial::{phi_of_r, t_of_r, RadialPotential};

/// Residual threshold, scaled by `max(1, |H|)`.
pub const HJ_TOL: f64 = 1e-8;
/// Central-difference step in the family parameters.
pub const MIXED_STEP: f64 = 1e-6;
/// Distance kept from the foci by the elliptic chart.
pub const FOCUS_MARGIN: f64 = 1e-8;
/// Relative tolerance of the action quadratures.
pub const ACTION_QUAD_TOL: f64 = 1e-12;

/// An `n`-parameter family `S(x, u)` of functions on an `n`-dimensional chart.
pub trait ActionFamily {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64], u: &[f64]) -> Result<f64>;

    /// `∂S/∂xⁱ`, the covector `dSᵘ` at `x`.
    fn grad_x(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>>;

    /// `∂S/∂uʲ`; central differences of the value by default.
    fn grad_u(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(u.len());
        let mut up = u.to_vec();
        for j in 0..u.len() {
            let h = MIXED_STEP * u[j].abs().max(1.0);
            up[j] = u[j] + h;
            let plus = self.value(x, &up)?;
            up[j] = u[j] - h;
            let minus = self.value(x, &up)?;
            up[j] = u[j];
            out.push((plus - minus) / (2.0 * h));
        }
        Ok(out)
    }

    /// Matrix of `∂²S/∂xⁱ∂uʲ` (row `i`, column `j`); central differences of
    /// `grad_x` in `u` by default.
    fn mixed(&self, x: &[f64], u: &[f64]) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut m = DMatrix::zeros(n, u.len());
        let mut up = u.to_vec();
        for j in 0..u.len() {
            let h = MIXED_STEP * u[j].abs().max(1.0);
            up[j] = u[j] + h;
            let plus = self.grad_x(x, &up)?;
            up[j] = u[j] - h;
            let minus = self.grad_x(x, &up)?;
            up[j] = u[j];
            for i in 0..n {
                m[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        Ok(m)
    }
}

/// A family given by an expression in `x` and `u`, differentiated exactly.
#[derive(Debug, Clone)]
pub struct ExprFamily {
    pub expr: Expr,
    compiled: Compiled,
    n: usize,
}

impl ExprFamily {
    pub fn new(expr: Expr, x_vars: &[&str], u_vars: &[&str], params: &Params) -> Result<Self> {
        if x_vars.len() != u_vars.len() {
            return Err(Error::dim("family parameters", u_vars.len(), x_vars.len()));
        }
        let vars: Vec<&str> = x_vars.iter().chain(u_vars).copied().collect();
        let compiled = expr.compile(&vars, params)?;
        Ok(ExprFamily {
            expr,
            compiled,
            n: x_vars.len(),
        })
    }

    pub fn parse(text: &str, x_vars: &[&str], u_vars: &[&str], params: &Params) -> Result<Self> {
        let names = NameSet::new(
            x_vars.iter().chain(u_vars).map(|s| s.to_string()),
            params.keys().cloned(),
        );
        let expr = parse_expression(text, &names)?;
        Self::new(expr, x_vars, u_vars, params)
    }

    fn point(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::dim("x", x.len(), self.n));
        }
        if u.len() != self.n {
            return Err(Error::dim("u", u.len(), self.n));
        }
        Ok(x.iter().chain(u).copied().collect())
    }
}

impl ActionFamily for ExprFamily {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64], u: &[f64]) -> Result<f64> {
        let p = self.point(x, u)?;
        let v = self.compiled.value(&p);
        if !v.is_finite() {
            return Err(Error::Domain(format!("S is not finite at x = {x:?}, u = {u:?}")));
        }
        Ok(v)
    }

    fn grad_x(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let p = self.point(x, u)?;
        let active: Vec<usize> = (0..self.n).collect();
        Ok(self.compiled.partial_gradient(&p, &active)?.gradient)
    }

    fn grad_u(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let p = self.point(x, u)?;
        let active: Vec<usize> = (self.n..2 * self.n).collect();
        Ok(self.compiled.partial_gradient(&p, &active)?.gradient)
    }

    fn mixed(&self, x: &[f64], u: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.point(x, u)?;
        let jet = self.compiled.jet2(&p)?;
        let n = self.n;
        Ok(DMatrix::from_fn(n, n, |i, j| jet.hessian(i, n + j)))
    }
}

/// Spread of `H ∘ dSᵘ` over an `x` grid, worst case over the `u` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HjResidual {
    pub max: f64,
    pub mean: f64,
    /// Largest `|H|` seen.
    pub scale: f64,
    /// One spread per `u` grid point (`NaN` when every `x` was skipped).
    pub per_u: Vec<f64>,
    pub evaluated: usize,
    pub skipped: usize,
}

impl HjResidual {
    pub fn tolerance(&self) -> f64 {
        HJ_TOL * self.scale.max(1.0)
    }

    pub fn passes(&self) -> bool {
        self.evaluated > 0 && self.max <= self.tolerance()
    }
}

/// Check that `x ↦ H(x, dSᵘ|ₓ)` is constant for every `u` on the grid.
///
/// Points where the family or the Hamiltonian cannot be evaluated are skipped
/// and counted.
pub fn hj_residual(
    sys: &LagrangianSystem,
    family: &dyn ActionFamily,
    x_grid: &[Vec<f64>],
    u_grid: &[Vec<f64>],
) -> Result<HjResidual> {
    if family.dim() != sys.dim() {
        return Err(Error::dim("family", family.dim(), sys.dim()));
    }
    let mut per_u = Vec::with_capacity(u_grid.len());
    let (mut evaluated, mut skipped, mut scale) = (0, 0, 0.0f64);
    for u in u_grid {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in x_grid {
            let h = family
                .grad_x(x, u)
                .and_then(|p| sys.hamiltonian(&PhaseState::new(x.clone(), p)));
            match h {
                Ok(h) if h.is_finite() => {
                    evaluated += 1;
                    lo = lo.min(h);
                    hi = hi.max(h);
                    scale = scale.max(h.abs());
                }
                _ => skipped += 1,
            }
        }
        per_u.push(if hi >= lo { hi - lo } else { f64::NAN });
    }
    let valid: Vec<f64> = per_u.iter().copied().filter(|v| !v.is_nan()).collect();
    let max = valid.iter().copied().fold(0.0, f64::max);
    let mean = if valid.is_empty() {
        f64::NAN
    } else {
        valid.iter().sum::<f64>() / valid.len() as f64
    };
    Ok(HjResidual {
        max,
        mean,
        scale,
        per_u,
        evaluated,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyScan {
    pub min_abs_det: f64,
    /// Index of the point attaining the minimum.
    pub argmin: Option<usize>,
    pub skipped: usize,
}

/// Smallest `|det ∂²S/∂x∂u|` over the given `(x, u)` points.
pub fn family_nondegeneracy(family: &dyn ActionFamily, points: &[(Vec<f64>, Vec<f64>)]) -> NondegeneracyScan {
    let mut scan = NondegeneracyScan {
        min_abs_det: f64::INFINITY,
        argmin: None,
        skipped: 0,
    };
    for (k, (x, u)) in points.iter().enumerate() {
        match family.mixed(x, u) {
            Ok(m) => {
                let d = m.determinant().abs();
                if d < scan.min_abs_det {
                    scan.min_abs_det = d;
                    scan.argmin = Some(k);
                }
            }
            Err(_) => scan.skipped += 1,
        }
    }
    scan
}

/// Motion through `x0` with parameters `u`, reconstructed from the family
/// alone: `ũ = u` stays fixed, `p̃ = −∂S/∂u` moves linearly with slope
/// `−∂H̃/∂u`, and `x(t)` is recovered by solving `∂S/∂u(x, u) = −p̃(t)`.
pub fn reduced_motion(
    sys: &LagrangianSystem,
    family: &dyn ActionFamily,
    x0: &[f64],
    u: &[f64],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = family.dim();
    if sys.dim() != n {
        return Err(Error::dim("family", n, sys.dim()));
    }
    let p = family.grad_x(x0, u)?;
    let v = sys.to_velocities(&PhaseState::new(x0.to_vec(), p))?;
    // ∂H̃/∂uʲ = Σᵢ ∂H/∂pᵢ ∂²S/∂xⁱ∂uʲ, and ∂H/∂p is the velocity
    let mix0 = family.mixed(x0, u)?;
    let dh = mix0.transpose() * DVector::from_column_slice(&v.qdot);
    let g0 = family.grad_u(x0, u)?;
    let mut x = x0.to_vec();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let target: Vec<f64> = (0..n).map(|j| g0[j] + t * dh[j]).collect();
        for it in 0.. {
            let g = family.grad_u(&x, u)?;
            let r = DVector::from_iterator(n, (0..n).map(|j| g[j] - target[j]));
            let rn = r.amax();
            if rn <= 1e-13 * target.iter().fold(1.0f64, |a, b| a.max(b.abs())) {
                break;
            }
            if it == 60 {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: rn,
                });
            }
            let jac = family.mixed(&x, u)?.transpose();
            let dx = jac
                .lu()
                .solve(&r)
                .ok_or_else(|| Error::Degenerate { det: 0.0, tol: 0.0 })?;
            for i in 0..n {
                x[i] -= dx[i];
            }
            if dx.amax() <= 1e-15 * x.iter().fold(1.0f64, |a, b| a.max(b.abs())) {
                break;
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Kepler problem in polar coordinates

/// `L²/2r² − M/r` with unit mass.
fn kepler_veff(m: f64, l: f64, r: f64) -> f64 {
    -m / r + l * l / (2.0 * r * r)
}

/// Polar-coordinate Kepler system with coordinates `(r, phi)`.
pub fn kepler_polar_system(m: f64) -> Result<LagrangianSystem> {
    LagrangianSystem::builder(["r", "phi"])
        .param("M", m)
        .metric([["1", "0"], ["0", "r^2"]])
        .potential("-M/r")
        .guard("r > 0")
        .build()
}

/// `S(r, φ; E, L) = Lφ + ∫_{r_anchor}^{r} √(2(E − V_eff)) dr`.
#[derive(Debug, Clone)]
pub struct KeplerRadialFamily {
    pub m: f64,
    pub r_anchor: f64,
}

impl KeplerRadialFamily {
    pub fn new(m: f64, r_anchor: f64) -> Result<Self> {
        if !(m > 0.0) || !(r_anchor > 0.0) {
            return Err(Error::Invalid("M and the anchor radius must be positive".into()));
        }
        Ok(KeplerRadialFamily { m, r_anchor })
    }

    fn unpack<'a>(&self, x: &'a [f64], u: &'a [f64]) -> Result<(f64, f64, f64, f64)> {
        if x.len() != 2 || u.len() != 2 {
            return Err(Error::dim("Kepler family point", x.len().max(u.len()), 2));
        }
        if !(x[0] > 0.0) {
            return Err(Error::Domain(format!("r must be positive, got {}", x[0])));
        }
        Ok((x[0], x[1], u[0], u[1]))
    }
}

impl ActionFamily for KeplerRadialFamily {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64], u: &[f64]) -> Result<f64> {
        let (r, phi, e, l) = self.unpack(x, u)?;
        let (lo, hi) = (r.min(self.r_anchor), r.max(self.r_anchor));
        let m = self.m;
        let radial = integrate(
            |s| {
                let q = 2.0 * (e - kepler_veff(m, l, s));
                if q < -1e-14 * e.abs().max(1.0) {
                    return Err(Error::Forbidden { from: lo, to: hi });
                }
                Ok(q.max(0.0).sqrt())
            },
            lo,
            hi,
            ACTION_QUAD_TOL,
            0.0,
        )?;
        let sign = if r >= self.r_anchor { 1.0 } else { -1.0 };
        Ok(l * phi + sign * radial)
    }

    fn grad_x(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let (r, _, e, l) = self.unpack(x, u)?;
        let q = 2.0 * (e - kepler_veff(self.m, l, r));
        if q < 0.0 {
            return Err(Error::Forbidden { from: r, to: r });
        }
        Ok(vec![q.sqrt(), l])
    }

    /// `(±t(r_anchor → r), φ ∓ Δφ(r_anchor → r))` from the radial quadratures.
    fn grad_u(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let (r, phi, e, l) = self.unpack(x, u)?;
        let v = RadialPotential::newton(self.m);
        let sign = if r >= self.r_anchor { 1.0 } else { -1.0 };
        let dt = t_of_r(&v, l, e, self.r_anchor, r)?;
        let dphi = phi_of_r(&v, l, e, self.r_anchor, r)?;
        Ok(vec![sign * dt, phi - sign * dphi])
    }
}

// ---------------------------------------------------------------------------
// Confocal elliptic coordinates

/// Which side of the `x` axis the inverse map lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Invalid(format!("half-separation must be positive, got {c}")));
    }
    Ok(())
}

fn check_elliptic(xi: f64, eta: f64, c: f64) -> Result<()> {
    check_c(c)?;
    if !(xi > 2.0 * c) || !(eta.abs() < 2.0 * c) {
        return Err(Error::Domain(format!(
            "elliptic coordinates need ξ > 2c and |η| < 2c, got ξ = {xi}, η = {eta}, c = {c}"
        )));
    }
    Ok(())
}

/// `(ξ, η) = (r₁ + r₂, r₁ − r₂)` with foci `f₁ = (c, 0)` and `f₂ = (−c, 0)`.
pub fn elliptic_coords(x: f64, y: f64, c: f64) -> Result<(f64, f64)> {
    check_c(c)?;
    let r1 = (x - c).hypot(y);
    let r2 = (x + c).hypot(y);
    if r1 <= FOCUS_MARGIN || r2 <= FOCUS_MARGIN {
        return Err(Error::Domain(format!("({x}, {y}) is at a focus")));
    }
    Ok((r1 + r2, r1 - r2))
}

/// Inverse of [`elliptic_coords`] on one side of the `x` axis.
pub fn elliptic_inverse(xi: f64, eta: f64, c: f64, side: HalfPlane) -> Result<(f64, f64)> {
    check_elliptic(xi, eta, c)?;
    let x = -xi * eta / (4.0 * c);
    let y = ((xi * xi - 4.0 * c * c) * (4.0 * c * c - eta * eta)).sqrt() / (4.0 * c);
    Ok((x, if side == HalfPlane::Upper { y } else { -y }))
}

/// Diagonal Euclidean metric `(g_ξξ, g_ηη)` in elliptic coordinates.
pub fn elliptic_metric(xi: f64, eta: f64, c: f64) -> Result<(f64, f64)> {
    check_elliptic(xi, eta, c)?;
    let num = xi * xi - eta * eta;
    Ok((num / (4.0 * (xi * xi - 4.0 * c * c)), num / (4.0 * (4.0 * c * c - eta * eta))))
}

/// Two-center Hamiltonian at `(ξ, η, p_ξ, p_η)` for unit mass.
pub fn two_center_hamiltonian(state: &PhaseState, c: f64, k: f64) -> Result<f64> {
    if state.q.len() != 2 || state.p.len() != 2 {
        return Err(Error::dim("two-center state", state.q.len(), 2));
    }
    let (xi, eta, pxi, peta) = (state.q[0], state.q[1], state.p[0], state.p[1]);
    check_elliptic(xi, eta, c)?;
    let d = xi * xi - eta * eta;
    Ok((2.0 * pxi * pxi * (xi * xi - 4.0 * c * c) + 2.0 * peta * peta * (4.0 * c * c - eta * eta) - 4.0 * k * xi) / d)
}

/// The two-center problem in coordinates `(xi, eta)`.
pub fn two_center_system(c: f64, k: f64) -> Result<LagrangianSystem> {
    check_c(c)?;
    LagrangianSystem::builder(["xi", "eta"])
        .param("c", c)
        .param("k", k)
        .metric([
            ["(xi^2-eta^2)/(4*(xi^2-4*c^2))", "0"],
            ["0", "(xi^2-eta^2)/(4*(4*c^2-eta^2))"],
        ])
        .potential("-4*k*xi/(xi^2-eta^2)")
        .guard("(xi^2-4*c^2)*(4*c^2-eta^2) > 0")
        .build()
}

/// The two-center problem in Cartesian `(x, y)`.
pub fn two_center_cartesian(c: f64, k: f64) -> Result<LagrangianSystem> {
    check_c(c)?;
    LagrangianSystem::builder(["x", "y"])
        .param("c", c)
        .param("k", k)
        .euclidean(1.0)
        .potential("-k/sqrt((x-c)^2+y^2) - k/sqrt((x+c)^2+y^2)")
        .guard("((x-c)^2+y^2)*((x+c)^2+y^2) > 1e-16")
        .build()
}

/// Separated action for the two-center problem, `u = (C, c₁)`:
///
/// `S = ∫_{ξ_a}^{ξ} √((c₁ + Cξ² + 4kξ)/(2(ξ² − 4c²))) dξ + ∫_0^{|η|} √((−c₁ − Cη²)/(2(4c² − η²))) dη`.
///
/// The `η` leg runs over `|η|` so it is even in `η`.
#[derive(Debug, Clone)]
pub struct TwoCenterFamily {
    pub c: f64,
    pub k: f64,
    pub xi_anchor: f64,
}

impl TwoCenterFamily {
    /// Anchored at `ξ = 2c`.
    pub fn new(c: f64, k: f64) -> Result<Self> {
        Self::with_anchor(c, k, 2.0 * c)
    }

    pub fn with_anchor(c: f64, k: f64, xi_anchor: f64) -> Result<Self> {
        check_c(c)?;
        if !(xi_anchor >= 2.0 * c) {
            return Err(Error::Domain(format!("ξ anchor {xi_anchor} is below 2c")));
        }
        Ok(TwoCenterFamily { c, k, xi_anchor })
    }

    fn unpack(&self, x: &[f64], u: &[f64]) -> Result<(f64, f64, f64, f64)> {
        if x.len() != 2 || u.len() != 2 {
            return Err(Error::dim("two-center family point", x.len().max(u.len()), 2));
        }
        check_elliptic(x[0], x[1], self.c)?;
        Ok((x[0], x[1], u[0], u[1]))
    }

    fn xi_numerator(&self, big_c: f64, c1: f64, xi: f64) -> f64 {
        c1 + big_c * xi * xi + 4.0 * self.k * xi
    }

    fn eta_numerator(&self, big_c: f64, c1: f64, eta: f64) -> f64 {
        -c1 - big_c * eta * eta
    }

    /// `ξ` leg with `ξ = 2c cosh τ`, which removes the `ξ = 2c` singularity.
    pub fn xi_leg(&self, xi: f64, big_c: f64, c1: f64) -> Result<f64> {
        let two_c = 2.0 * self.c;
        let (ta, tb) = ((self.xi_anchor / two_c).acosh(), (xi / two_c).acosh());
        let (lo, hi) = (self.xi_anchor.min(xi), self.xi_anchor.max(xi));
        let scale = big_c.abs() * hi * hi + c1.abs() + 4.0 * self.k.abs() * hi;
        let v = integrate(
            |t| {
                let n = self.xi_numerator(big_c, c1, two_c * t.cosh());
                if n < -1e-13 * scale {
                    return Err(Error::Forbidden { from: lo, to: hi });
                }
                Ok((0.5 * n.max(0.0)).sqrt())
            },
            ta.min(tb),
            ta.max(tb),
            ACTION_QUAD_TOL,
            1e-15,
        )?;
        Ok(if xi >= self.xi_anchor { v } else { -v })
    }

    /// `η` leg over `[0, |η|]` with `η = 2c sin θ`.
    pub fn eta_leg(&self, eta: f64, big_c: f64, c1: f64) -> Result<f64> {
        let two_c = 2.0 * self.c;
        let top = (eta.abs() / two_c).asin();
        let scale = big_c.abs() * two_c * two_c + c1.abs();
        integrate(
            |t| {
                let n = self.eta_numerator(big_c, c1, two_c * t.sin());
                if n < -1e-13 * scale {
                    return Err(Error::Forbidden { from: 0.0, to: eta.abs() });
                }
                Ok((0.5 * n.max(0.0)).sqrt())
            },
            0.0,
            top,
            ACTION_QUAD_TOL,
            1e-15,
        )
    }
}

impl ActionFamily for TwoCenterFamily {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64], u: &[f64]) -> Result<f64> {
        let (xi, eta, big_c, c1) = self.unpack(x, u)?;
        Ok(self.xi_leg(xi, big_c, c1)? + self.eta_leg(eta, big_c, c1)?)
    }

    fn grad_x(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let (xi, eta, big_c, c1) = self.unpack(x, u)?;
        let c2 = 4.0 * self.c * self.c;
        let nx = self.xi_numerator(big_c, c1, xi);
        let ne = self.eta_numerator(big_c, c1, eta);
        if nx < 0.0 {
            return Err(Error::Forbidden { from: xi, to: xi });
        }
        if ne < 0.0 {
            return Err(Error::Forbidden { from: eta, to: eta });
        }
        let pxi = (nx / (2.0 * (xi * xi - c2))).sqrt();
        let peta = (ne / (2.0 * (c2 - eta * eta))).sqrt();
        Ok(vec![pxi, if eta < 0.0 { -peta } else { peta }])
    }
}

/// Value of the two-center action anchored at `ξ = 2c`.
pub fn two_center_action(xi: f64, eta: f64, big_c: f64, c1: f64, c: f64, k: f64) -> Result<f64> {
    TwoCenterFamily::new(c, k)?.value(&[xi, eta], &[big_c, c1])
}

/// `(C, c₁)` sampled along a Cartesian trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationTrace {
    pub t: Vec<f64>,
    pub big_c: Vec<f64>,
    pub c1: Vec<f64>,
    /// Time of the first state outside the elliptic chart, if any.
    pub truncated_at: Option<f64>,
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

impl SeparationTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.t.first(), self.t.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Standard deviations of `(C, c₁)`.
    pub fn std(&self) -> (f64, f64) {
        (std_dev(&self.big_c), std_dev(&self.c1))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,C,c1")?;
        for i in 0..self.t.len() {
            writeln!(w, "{},{},{}", fmt17(self.t[i]), fmt17(self.big_c[i]), fmt17(self.c1[i]))?;
        }
        Ok(())
    }
}

/// `C = H` and `c₁ = 2p_ξ²(ξ² − 4c²) − 4kξ − Cξ²` along a unit-mass planar
/// trajectory in Cartesian coordinates.
///
/// The trace stops at the first state at a focus or on the segment between
/// the foci, where `ξ = 2c` and `p_ξ` is undefined.
pub fn separation_constants(traj: &Trajectory, c: f64, k: f64) -> Result<SeparationTrace> {
    check_c(c)?;
    let mut out = SeparationTrace {
        t: Vec::new(),
        big_c: Vec::new(),
        c1: Vec::new(),
        truncated_at: None,
    };
    for (t, s) in traj.t.iter().zip(&traj.states) {
        if s.q.len() != 2 || s.p.len() != 2 {
            return Err(Error::dim("planar state", s.q.len(), 2));
        }
        let (x, y, vx, vy) = (s.q[0], s.q[1], s.p[0], s.p[1]);
        let r1 = (x - c).hypot(y);
        let r2 = (x + c).hypot(y);
        let xi = r1 + r2;
        if r1 <= FOCUS_MARGIN || r2 <= FOCUS_MARGIN || xi - 2.0 * c <= FOCUS_MARGIN {
            out.truncated_at = Some(*t);
            break;
        }
        let eta = r1 - r2;
        let big_c = 0.5 * (vx * vx + vy * vy) - k / r1 - k / r2;
        let xi_dot = ((x - c) * vx + y * vy) / r1 + ((x + c) * vx + y * vy) / r2;
        let g_xixi = (xi * xi - eta * eta) / (4.0 * (xi * xi - 4.0 * c * c));
        let pxi = g_xixi * xi_dot;
        let c1 = 2.0 * pxi * pxi * (xi * xi - 4.0 * c * c) - 4.0 * k * xi - big_c * xi * xi;
        out.t.push(*t);
        out.big_c.push(big_c);
        out.c1.push(c1);
    }
    Ok(out)
}
