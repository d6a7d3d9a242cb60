//! Unit-mass motion in a radial potential `V(r)`, with Newton's potential
//! `−M/r` worked out in closed form.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Compiled, Expr, NameSet, Params};
use crate::integrate::{fmt17, Trajectory};
use crate::numeric::{bisect, golden_min, integrate};

/// Relative accuracy of the radial quadratures.
pub const QUAD_TOL: f64 = 1e-9;
const SCAN_POINTS: usize = 4000;

/// A potential expressed in the single variable `r`.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    expr: Expr,
    compiled: Compiled,
}

impl RadialPotential {
    pub fn from_expr(expr: Expr, params: &Params) -> Result<Self> {
        let compiled = expr.compile(&["r"], params)?;
        Ok(RadialPotential { expr, compiled })
    }

    pub fn parse(text: &str, params: &Params) -> Result<Self> {
        let names = NameSet::new(["r"], params.keys().cloned());
        Self::from_expr(parse_expression(text, &names)?, params)
    }

    /// `−M/r`.
    pub fn newton(m: f64) -> Self {
        let expr = Expr::div(Expr::num(-m), Expr::var("r"));
        Self::from_expr(expr, &Params::new()).expect("closed expression")
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn value(&self, r: f64) -> f64 {
        self.compiled.value(&[r])
    }

    /// `(V, V′, V″)` at `r`.
    pub fn derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        let j = self.compiled.jet2(&[r])?;
        Ok((j.value, j.gradient[0], j.hessian(0, 0)))
    }
}

fn centrifugal(l: f64, r: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else {
        l * l / (2.0 * r * r)
    }
}

fn veff_raw(v: &RadialPotential, l: f64, r: f64) -> f64 {
    v.value(r) + centrifugal(l, r)
}

/// `V(r) + L²/2r²`.
pub fn v_eff(v: &RadialPotential, l: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("effective potential needs r > 0, got {r}")));
    }
    Ok(veff_raw(v, l, r))
}

/// `(V_eff′, V_eff″)` at `r`.
fn veff_derivatives(v: &RadialPotential, l: f64, r: f64) -> Result<(f64, f64)> {
    let (_, d1, d2) = v.derivatives(r)?;
    Ok((d1 - l * l / (r * r * r), d2 + 3.0 * l * l / (r * r * r * r)))
}

/// Landmarks of `f(r) = −M/r + L²/2r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerProfile {
    /// Unique zero `L²/2M`.
    pub r0: f64,
    /// Unique critical point `L²/M`.
    pub r_min: f64,
    /// Global minimum `−M²/2L²`.
    pub f_min: f64,
}

pub fn kepler_profile(m: f64, l: f64) -> Result<KeplerProfile> {
    positive("M", m)?;
    positive("L", l)?;
    Ok(KeplerProfile {
        r0: l * l / (2.0 * m),
        r_min: l * l / m,
        f_min: -m * m / (2.0 * l * l),
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Minimizer of `V_eff` on `bracket`: golden section in `ln r`, then Newton
/// on `V_eff′ = 0`.
pub fn v_eff_minimum(v: &RadialPotential, l: f64, bracket: (f64, f64)) -> Result<f64> {
    check_bracket(bracket)?;
    let (lo, hi) = (bracket.0.ln(), bracket.1.ln());
    let s = golden_min(|s| veff_raw(v, l, s.exp()), lo, hi, 1e-10);
    let mut r = s.exp();
    for _ in 0..50 {
        let (d1, d2) = veff_derivatives(v, l, r)?;
        if !(d2 > 0.0) {
            break;
        }
        let step = d1 / d2;
        let next = r - step;
        if !(next > 0.0) {
            break;
        }
        r = next;
        if step.abs() <= 1e-16 * r {
            break;
        }
    }
    Ok(r)
}

fn check_bracket(b: (f64, f64)) -> Result<()> {
    if b.0 > 0.0 && b.1 > b.0 && b.1.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("bracket must satisfy 0 < lo < hi, got {b:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Root {
    r: f64,
    tangent: bool,
}

fn scan_roots(v: &RadialPotential, l: f64, e: f64, bracket: (f64, f64)) -> Result<Vec<Root>> {
    check_bracket(bracket)?;
    let g = |r: f64| e - veff_raw(v, l, r);
    let (lo, hi) = (bracket.0.ln(), bracket.1.ln());
    let rs: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| (lo + (hi - lo) * i as f64 / SCAN_POINTS as f64).exp())
        .collect();
    let gs: Vec<f64> = rs.iter().map(|&r| g(r)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS {
        let (a, b) = (gs[i], gs[i + 1]);
        if !a.is_finite() || !b.is_finite() {
            continue;
        }
        if a == 0.0 {
            roots.push(Root { r: rs[i], tangent: false });
        } else if a.signum() != b.signum() && b != 0.0 {
            roots.push(Root {
                r: bisect(g, rs[i], rs[i + 1])?,
                tangent: false,
            });
        }
    }
    if gs[SCAN_POINTS] == 0.0 {
        roots.push(Root { r: rs[SCAN_POINTS], tangent: false });
    }
    // local maxima of g that stay non-positive on the grid: a tangency, or a
    // narrow allowed band the grid stepped over
    for i in 1..SCAN_POINTS {
        let (a, b, c) = (gs[i - 1], gs[i], gs[i + 1]);
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || !(b >= a && b >= c && b <= 0.0 && a < 0.0 && c < 0.0) {
            continue;
        }
        let s = golden_min(|s| -g(s.exp()), rs[i - 1].ln(), rs[i + 1].ln(), 1e-12);
        let mut r_star = s.exp();
        // Newton polish on V_eff′ = 0 for an accurate tangent location
        for _ in 0..30 {
            let Ok((d1, d2)) = veff_derivatives(v, l, r_star) else { break };
            if !(d2.abs() > 0.0) {
                break;
            }
            let next = r_star - d1 / d2;
            if !(next > rs[i - 1] && next < rs[i + 1]) {
                break;
            }
            let done = (next - r_star).abs() <= 1e-16 * r_star;
            r_star = next;
            if done {
                break;
            }
        }
        let peak = g(r_star);
        let scale = e.abs().max(veff_raw(v, l, r_star).abs()).max(f64::MIN_POSITIVE);
        if peak.abs() <= 1e-10 * scale {
            roots.push(Root { r: r_star, tangent: true });
        } else if peak > 0.0 {
            roots.push(Root { r: bisect(g, rs[i - 1], r_star)?, tangent: false });
            roots.push(Root { r: bisect(g, r_star, rs[i + 1])?, tangent: false });
        }
    }
    roots.sort_by(|a, b| a.r.total_cmp(&b.r));
    roots.dedup_by(|a, b| {
        let same = (a.r - b.r).abs() <= 1e-12 * b.r;
        if same && a.tangent {
            *b = *a;
        }
        same
    });
    Ok(roots)
}

/// Sorted radii in `bracket` where `V_eff(r) = E`.
///
/// Sign changes on a log-spaced scan are bisected to machine resolution;
/// grid-level local maxima of `E − V_eff` are refined to catch tangent
/// (circular) roots and narrow allowed bands. An empty list is valid.
pub fn turning_points(v: &RadialPotential, l: f64, e: f64, bracket: (f64, f64)) -> Result<Vec<f64>> {
    Ok(scan_roots(v, l, e, bracket)?.into_iter().map(|r| r.r).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    Bounded,
    Unbounded,
    Circular,
    Collision,
}

#[derive(Debug, Clone)]
pub struct EffectiveProfile {
    pub potential: RadialPotential,
    pub l: f64,
    pub e: f64,
    pub turning_points: Vec<f64>,
    pub classification: OrbitClass,
}

pub fn effective_profile(v: &RadialPotential, l: f64, e: f64, bracket: (f64, f64)) -> Result<EffectiveProfile> {
    let roots = scan_roots(v, l, e, bracket)?;
    let allowed_far = e - veff_raw(v, l, bracket.1) > 0.0;
    let classification = if l == 0.0 {
        OrbitClass::Collision
    } else if roots.len() == 1 && roots[0].tangent {
        OrbitClass::Circular
    } else if allowed_far {
        OrbitClass::Unbounded
    } else if roots.len() >= 2 {
        OrbitClass::Bounded
    } else {
        return Err(Error::Infeasible(format!(
            "no allowed region for E = {e} in {bracket:?}"
        )));
    };
    Ok(EffectiveProfile {
        potential: v.clone(),
        l,
        e,
        turning_points: roots.into_iter().map(|r| r.r).collect(),
        classification,
    })
}

/// Orbit constants of unit-mass motion in `−M/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerElements {
    pub m: f64,
    pub l: f64,
    pub e: f64,
    /// `L²/M`.
    pub p: f64,
    pub eps: f64,
    pub r_per: f64,
    pub r_aph: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub period: Option<f64>,
}

/// `2π a^{3/2} / √M`.
pub fn kepler_period(m: f64, a: f64) -> f64 {
    2.0 * PI * a.powf(1.5) / m.sqrt()
}

/// Elements from `(M, L, E)`.
///
/// `r_per` is the positive root of `r² + (M/E) r − L²/2E = 0`, written as
/// `L²/(M(1+s))` with `s = √(1 + 2L²E/M²)` so that `E = 0` is the regular
/// limit `L²/2M`; `ε` is then read off from `r_per = p/(1+ε)`.
pub fn kepler_elements(m: f64, l: f64, e: f64) -> Result<KeplerElements> {
    positive("M", m)?;
    positive("L", l)?;
    if !e.is_finite() {
        return Err(Error::Invalid(format!("E must be finite, got {e}")));
    }
    let prof = kepler_profile(m, l)?;
    let disc = 1.0 + 2.0 * l * l * e / (m * m);
    if disc < -1e-12 {
        return Err(Error::Infeasible(format!(
            "E = {e} lies below the minimum {} of the effective potential",
            prof.f_min
        )));
    }
    let s = disc.max(0.0).sqrt();
    let p = l * l / m;
    let r_per = p / (1.0 + s);
    let eps = (p / r_per - 1.0).max(0.0);
    let mut el = KeplerElements {
        m,
        l,
        e,
        p,
        eps,
        r_per,
        r_aph: None,
        a: None,
        b: None,
        period: None,
    };
    if e < 0.0 && eps < 1.0 {
        let one = 1.0 - eps * eps;
        let a = p / one;
        el.r_aph = Some(p / (1.0 - eps));
        el.a = Some(a);
        el.b = Some(p / one.sqrt());
        el.period = Some(kepler_period(m, a));
    }
    Ok(el)
}

impl KeplerElements {
    /// Focal distance `c = εa` for ellipses.
    pub fn c(&self) -> Option<f64> {
        self.a.map(|a| self.eps * a)
    }

    /// `key=value` lines; ellipse-only entries are omitted otherwise.
    pub fn write_block<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut kv = vec![
            ("M", Some(self.m)),
            ("L", Some(self.l)),
            ("E", Some(self.e)),
            ("p", Some(self.p)),
            ("eps", Some(self.eps)),
            ("r_per", Some(self.r_per)),
            ("r_aph", self.r_aph),
            ("a", self.a),
            ("b", self.b),
        ];
        kv.push(("c", self.c()));
        kv.push(("T", self.period));
        for (k, v) in kv {
            if let Some(v) = v {
                writeln!(w, "{k}={}", fmt17(v))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub phi: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrbitTrace {
    pub points: Vec<TracePoint>,
    /// Angles where `1 + ε cos φ ≤ 0`.
    pub skipped: Vec<f64>,
}

/// `r(φ) = p / (1 + ε cos φ)` on the given angles.
pub fn orbit_trace(el: &KeplerElements, phis: &[f64]) -> OrbitTrace {
    let mut out = OrbitTrace::default();
    for &phi in phis {
        let den = 1.0 + el.eps * phi.cos();
        let r = el.p / den;
        if den > 0.0 && r.is_finite() {
            out.points.push(TracePoint { phi, r });
        } else {
            out.skipped.push(phi);
        }
    }
    out
}

impl OrbitTrace {
    /// `phi,r,x,y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "phi,r,x,y")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{}",
                fmt17(p.phi),
                fmt17(p.r),
                fmt17(p.r * p.phi.cos()),
                fmt17(p.r * p.phi.sin())
            )?;
        }
        Ok(())
    }
}

/// `r,V_eff` on the given radii.
pub fn write_profile_csv<W: Write>(v: &RadialPotential, l: f64, rs: &[f64], mut w: W) -> io::Result<()> {
    writeln!(w, "r,V_eff")?;
    for &r in rs {
        writeln!(w, "{},{}", fmt17(r), fmt17(veff_raw(v, l, r)))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum End {
    /// `r = 0`; never evaluated.
    Origin,
    Interior,
    /// `E = V_eff` here; `slope` is `d(E − V_eff)/dr`.
    Turning { residual: f64, slope: f64 },
}

/// `∫ w(r) dr / √(2(E − V_eff))` over one monotone leg.
fn leg<W>(v: &RadialPotential, l: f64, e: f64, ra: f64, rb: f64, weight: W) -> Result<f64>
where
    W: Fn(f64) -> f64,
{
    if !(ra >= 0.0 && rb >= 0.0) || !ra.is_finite() || !rb.is_finite() {
        return Err(Error::Domain(format!("radii must be finite and non-negative, got {ra}, {rb}")));
    }
    if ra == rb {
        return Ok(0.0);
    }
    let (lo, hi) = (ra.min(rb), ra.max(rb));
    let g = |r: f64| e - veff_raw(v, l, r);
    let classify = |r: f64| -> Result<End> {
        if r == 0.0 {
            return Ok(End::Origin);
        }
        let gv = g(r);
        let scale = e.abs().max(v.value(r).abs()).max(centrifugal(l, r)).max(f64::MIN_POSITIVE);
        if !gv.is_finite() {
            return Err(Error::Domain(format!("effective potential is not finite at r = {r}")));
        }
        if gv.abs() <= 1e-9 * scale {
            let (d1, _) = veff_derivatives(v, l, r)?;
            Ok(End::Turning { residual: gv, slope: -d1 })
        } else if gv > 0.0 {
            Ok(End::Interior)
        } else {
            Err(Error::Domain(format!("E < V_eff at the endpoint r = {r}")))
        }
    };
    let (ea, eb) = (classify(lo)?, classify(hi)?);
    let res = |end: End| match end {
        End::Turning { residual, .. } => residual,
        _ => 0.0,
    };
    let (ga, gb) = (res(ea), res(eb));
    let width = hi - lo;
    let radicand = |r: f64| g(r) - (ga * (hi - r) + gb * (r - lo)) / width;
    let near = 1e-8 * width;

    // r = end ± u²; the 2u Jacobian cancels the inverse square root at a
    // simple turning point
    let half = |end: f64, dir: f64, kind: End| {
        let radicand = &radicand;
        let weight = &weight;
        move |u: f64| -> Result<f64> {
            let u2 = u * u;
            let r = end + dir * u2;
            if let End::Turning { slope, .. } = kind {
                let s = slope * dir;
                if u2 < near && s > 0.0 {
                    return Ok(2.0 * weight(r) / (2.0 * s).sqrt());
                }
            }
            let q = radicand(r);
            if !(q > 0.0) {
                return Err(Error::Domain(format!("E ≤ V_eff inside the interval at r = {r}")));
            }
            Ok(2.0 * u * weight(r) / (2.0 * q).sqrt())
        }
    };
    let mid = 0.5 * (lo + hi);
    let tol = QUAD_TOL * 0.1;
    let left = integrate(half(lo, 1.0, ea), 0.0, (mid - lo).sqrt(), tol, 0.0)?;
    let right = integrate(half(hi, -1.0, eb), 0.0, (hi - mid).sqrt(), tol, 0.0)?;
    Ok(left + right)
}

/// Time to move between `r_a` and `r_b` on one monotone leg.
pub fn t_of_r(v: &RadialPotential, l: f64, e: f64, ra: f64, rb: f64) -> Result<f64> {
    leg(v, l, e, ra, rb, |_| 1.0)
}

/// Angle swept between `r_a` and `r_b` on one monotone leg.
pub fn phi_of_r(v: &RadialPotential, l: f64, e: f64, ra: f64, rb: f64) -> Result<f64> {
    if l == 0.0 {
        return Ok(0.0);
    }
    leg(v, l, e, ra, rb, |r| l / (r * r))
}

/// Cumulative shoelace area `Σ ½|q_k × q_{k+1}|` along a trajectory in the
/// plane (or in ℝ³).
#[derive(Debug, Clone, PartialEq)]
pub struct SweptArea {
    pub t: Vec<f64>,
    pub cumulative: Vec<f64>,
}

pub fn swept_area(traj: &Trajectory) -> Result<SweptArea> {
    let n = traj.states[0].q.len();
    if n != 2 && n != 3 {
        return Err(Error::Invalid(format!("swept area needs 2 or 3 coordinates, got {n}")));
    }
    let mut cumulative = Vec::with_capacity(traj.len());
    let mut acc = 0.0;
    for (k, s) in traj.states.iter().enumerate() {
        if s.q.iter().all(|v| *v == 0.0) {
            return Err(Error::Domain(format!("trajectory passes the origin at t = {}", traj.t[k])));
        }
        if k > 0 {
            let a = &traj.states[k - 1].q;
            let b = &s.q;
            let tri = if n == 2 {
                (a[0] * b[1] - a[1] * b[0]).abs()
            } else {
                let c = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
            };
            acc += 0.5 * tri;
        }
        cumulative.push(acc);
    }
    Ok(SweptArea {
        t: traj.t.clone(),
        cumulative,
    })
}

impl SweptArea {
    fn at(&self, t: f64) -> f64 {
        let i = self.t.partition_point(|x| *x <= t);
        if i == 0 {
            return self.cumulative[0];
        }
        if i >= self.t.len() {
            return *self.cumulative.last().expect("non-empty");
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let w = (t - t0) / (t1 - t0);
        self.cumulative[i - 1] * (1.0 - w) + self.cumulative[i] * w
    }

    /// `A(t₀, t₁)`, linearly interpolated between samples.
    pub fn between(&self, t0: f64, t1: f64) -> f64 {
        self.at(t1) - self.at(t0)
    }
}

/// Period from successive upward crossings of the mid radius.
///
/// Returns `None` unless the trajectory contains at least two crossings.
pub fn return_period(traj: &Trajectory) -> Option<f64> {
    let r: Vec<f64> = traj
        .states
        .iter()
        .map(|s| s.q.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), v| (a.min(*v), b.max(*v)));
    let level = 0.5 * (lo + hi);
    let mut crossings = Vec::new();
    for k in 1..r.len() {
        if r[k - 1] < level && r[k] >= level {
            let w = (level - r[k - 1]) / (r[k] - r[k - 1]);
            crossings.push(traj.t[k - 1] + w * (traj.t[k] - traj.t[k - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}
