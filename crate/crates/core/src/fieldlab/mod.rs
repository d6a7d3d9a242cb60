//! Lattice field theory: a 1+1D scalar field with leapfrog stepping, discrete
//! Euler-Lagrange residuals and Noether charges, plus a Yee-grid vacuum
//! Maxwell stepper.
//!
//! Time stepping is staggered. A [`ScalarField`] holds `φ` at `t` and `π` at
//! `t − dt/2`, and the charges are written in the time-centered form that the
//! leapfrog update conserves exactly.

mod maxwell;

pub use maxwell::{maxwell_cfl_limit, maxwell_step, maxwell_run, EmGrid, EmTrace};

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Compiled, Expr, NameSet, Params};
use crate::integrate::fmt17;

/// Boundary condition of a 1D lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// `φ = 0` on ghost sites at `−1` and `N`.
    FixedZero,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "fixed" | "fixed-zero" | "dirichlet" => Ok(Boundary::FixedZero),
            _ => Err(Error::Invalid(format!("unknown boundary `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice1D {
    pub n: usize,
    pub dx: f64,
    pub boundary: Boundary,
}

impl Lattice1D {
    pub fn new(n: usize, dx: f64, boundary: Boundary) -> Result<Self> {
        if n < 8 {
            return Err(Error::Invalid(format!("lattice needs at least 8 sites, got {n}")));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Invalid(format!("dx must be positive, got {dx}")));
        }
        Ok(Lattice1D { n, dx, boundary })
    }

    pub fn periodic(n: usize, dx: f64) -> Result<Self> {
        Self::new(n, dx, Boundary::Periodic)
    }

    pub fn length(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Neighbour values `(φ_{j−1}, φ_{j+1})`.
    fn neighbours(&self, phi: &[f64], j: usize) -> (f64, f64) {
        let n = self.n;
        match self.boundary {
            Boundary::Periodic => (phi[(j + n - 1) % n], phi[(j + 1) % n]),
            Boundary::FixedZero => (
                if j == 0 { 0.0 } else { phi[j - 1] },
                if j + 1 == n { 0.0 } else { phi[j + 1] },
            ),
        }
    }

    /// Second difference `(φ_{j+1} − 2φ_j + φ_{j−1})/dx²`.
    pub fn laplacian(&self, phi: &[f64]) -> Vec<f64> {
        let h2 = self.dx * self.dx;
        (0..self.n)
            .map(|j| {
                let (l, r) = self.neighbours(phi, j);
                (r - 2.0 * phi[j] + l) / h2
            })
            .collect()
    }

    /// Centered first difference `(φ_{j+1} − φ_{j−1})/2dx`.
    pub fn centered_diff(&self, phi: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                let (l, r) = self.neighbours(phi, j);
                (r - l) / (2.0 * self.dx)
            })
            .collect()
    }

    fn check(&self, what: &str, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::dim(what, v.len(), self.n));
        }
        Ok(())
    }
}

/// Sum by recursive halving; keeps round-off at `O(log N)` ulps.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub phi: Vec<f64>,
    /// `∂φ/∂t` half a step behind `phi`.
    pub pi: Vec<f64>,
    pub t: f64,
}

impl ScalarField {
    pub fn zeros(lattice: &Lattice1D) -> Self {
        ScalarField {
            phi: vec![0.0; lattice.n],
            pi: vec![0.0; lattice.n],
            t: 0.0,
        }
    }

    pub fn new(lattice: &Lattice1D, phi: Vec<f64>, pi: Vec<f64>, t: f64) -> Result<Self> {
        lattice.check("phi", &phi)?;
        lattice.check("pi", &pi)?;
        if phi.iter().chain(&pi).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("field values must be finite".into()));
        }
        Ok(ScalarField { phi, pi, t })
    }

    /// Staggered field from continuum data `φ(x, 0)` and `φ_t(x, 0)`, with
    /// `π(−dt/2) = φ_t − (dt/2) φ_tt` and `φ_tt` from the lattice equation.
    pub fn from_continuum(lattice: &Lattice1D, phi: Vec<f64>, phi_t: Vec<f64>, m: f64, dt: f64) -> Result<Self> {
        lattice.check("phi", &phi)?;
        lattice.check("phi_t", &phi_t)?;
        let lap = lattice.laplacian(&phi);
        let pi = (0..lattice.n)
            .map(|j| phi_t[j] - 0.5 * dt * (lap[j] - m * m * phi[j]))
            .collect();
        Self::new(lattice, phi, pi, 0.0)
    }

    /// `φ` one step back, `φ − dt·π`.
    pub fn previous_phi(&self, dt: f64) -> Vec<f64> {
        self.phi.iter().zip(&self.pi).map(|(f, p)| f - dt * p).collect()
    }

    pub fn write_csv<W: Write>(&self, lattice: &Lattice1D, mut w: W) -> io::Result<()> {
        writeln!(w, "x,phi,pi")?;
        for j in 0..self.phi.len() {
            writeln!(w, "{},{},{}", fmt17(lattice.x(j)), fmt17(self.phi[j]), fmt17(self.pi[j]))?;
        }
        Ok(())
    }
}

/// Largest stable Klein-Gordon step, `2/√(m² + 4/dx²)` (equal to `dx` at `m = 0`).
pub fn kg_cfl_limit(lattice: &Lattice1D, m: f64) -> f64 {
    2.0 / (m * m + 4.0 / (lattice.dx * lattice.dx)).sqrt()
}

fn check_kg_dt(lattice: &Lattice1D, m: f64, dt: f64) -> Result<()> {
    let limit = kg_cfl_limit(lattice, m);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    Ok(())
}

/// One leapfrog step of `φ_tt = φ_xx − m²φ`: kick `π`, then drift `φ`.
pub fn kg_step(lattice: &Lattice1D, field: &ScalarField, m: f64, dt: f64) -> Result<ScalarField> {
    check_kg_dt(lattice, m, dt)?;
    lattice.check("phi", &field.phi)?;
    let lap = lattice.laplacian(&field.phi);
    let m2 = m * m;
    let pi: Vec<f64> = (0..lattice.n)
        .map(|j| field.pi[j] + dt * (lap[j] - m2 * field.phi[j]))
        .collect();
    let phi = (0..lattice.n).map(|j| field.phi[j] + dt * pi[j]).collect();
    Ok(ScalarField {
        phi,
        pi,
        t: field.t + dt,
    })
}

/// Energy and momentum of the lattice Klein-Gordon field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Charges {
    pub energy: f64,
    /// `Σ dx π D⁰φ`, the `T⁰₁` component; a right-moving wave has `P < 0`.
    pub momentum: f64,
}

/// Time-centered charges, exactly conserved by [`kg_step`] on periodic lattices:
///
/// `E = dx (½ Σ π² + ½ ⟨φ⁻, Kφ⟩)` and `P = dx ½ ⟨π, D⁰(φ⁻ + φ)⟩`,
///
/// where `φ⁻ = φ − dt·π`, `K = −Δ + m²` and `D⁰` is the centered difference.
pub fn noether_charges(lattice: &Lattice1D, field: &ScalarField, m: f64, dt: f64) -> Result<Charges> {
    lattice.check("phi", &field.phi)?;
    lattice.check("pi", &field.pi)?;
    let prev = field.previous_phi(dt);
    let lap = lattice.laplacian(&field.phi);
    let k_phi: Vec<f64> = (0..lattice.n).map(|j| m * m * field.phi[j] - lap[j]).collect();
    let energy = lattice.dx * (0.5 * dot(&field.pi, &field.pi) + 0.5 * dot(&prev, &k_phi));
    let mid: Vec<f64> = prev.iter().zip(&field.phi).map(|(a, b)| a + b).collect();
    let d = lattice.centered_diff(&mid);
    let momentum = lattice.dx * 0.5 * dot(&field.pi, &d);
    Ok(Charges { energy, momentum })
}

/// Local energy density `½π̄² + ½(D⁰φ)² + ½m²φ²` at the time of `phi`,
/// with `π̄` the average of the two half-step momenta.
fn energy_density(lattice: &Lattice1D, phi: &[f64], pi_bar: &[f64], m: f64) -> Vec<f64> {
    let d = lattice.centered_diff(phi);
    (0..lattice.n)
        .map(|j| 0.5 * pi_bar[j] * pi_bar[j] + 0.5 * d[j] * d[j] + 0.5 * m * m * phi[j] * phi[j])
        .collect()
}

/// Time series of the charges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChargeTrace {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub momentum: Vec<f64>,
}

/// Largest deviation of each charge from its initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeDrift {
    pub energy_initial: f64,
    pub energy_abs: f64,
    pub energy_rel: f64,
    pub momentum_initial: f64,
    pub momentum_abs: f64,
}

impl ChargeTrace {
    pub fn push(&mut self, t: f64, c: Charges) {
        self.t.push(t);
        self.energy.push(c.energy);
        self.momentum.push(c.momentum);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,E,P")?;
        for i in 0..self.t.len() {
            writeln!(w, "{},{},{}", fmt17(self.t[i]), fmt17(self.energy[i]), fmt17(self.momentum[i]))?;
        }
        Ok(())
    }
}

/// Drift of each recorded charge against the first sample.
pub fn charge_conservation_audit(trace: &ChargeTrace) -> Result<ChargeDrift> {
    if trace.len() < 2 {
        return Err(Error::Invalid("a drift audit needs at least two samples".into()));
    }
    let (e0, p0) = (trace.energy[0], trace.momentum[0]);
    let energy_abs = trace.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    let momentum_abs = trace.momentum.iter().map(|p| (p - p0).abs()).fold(0.0, f64::max);
    Ok(ChargeDrift {
        energy_initial: e0,
        energy_abs,
        energy_rel: if e0 != 0.0 { energy_abs / e0.abs() } else { energy_abs },
        momentum_initial: p0,
        momentum_abs,
    })
}

/// Step `steps` times, recording the charges every `every` steps (and at both ends).
pub fn kg_run(
    lattice: &Lattice1D,
    field: &ScalarField,
    m: f64,
    dt: f64,
    steps: usize,
    every: usize,
) -> Result<(ScalarField, ChargeTrace)> {
    check_kg_dt(lattice, m, dt)?;
    let every = every.max(1);
    let mut f = field.clone();
    let mut trace = ChargeTrace::default();
    trace.push(f.t, noether_charges(lattice, &f, m, dt)?);
    for s in 1..=steps {
        f = kg_step(lattice, &f, m, dt)?;
        if s % every == 0 || s == steps {
            trace.push(f.t, noether_charges(lattice, &f, m, dt)?);
        }
    }
    Ok((f, trace))
}

/// Energy balance on a window of sites: `Q′(t) = −(J(b) − J(a))` with the
/// flux `J = −φ_t φ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxReport {
    pub window: (usize, usize),
    pub t: Vec<f64>,
    /// Window energy `Σ dx e_j` with trapezoid weights at the ends.
    pub charge: Vec<f64>,
    /// `J(a) − J(b)` at the same times.
    pub inflow: Vec<f64>,
    /// `max |Q′ − inflow|` with `Q′` from centered time differences.
    pub max_residual: f64,
    /// `max |Q′|`, for scale.
    pub max_rate: f64,
}

/// Run the field and track the energy inside sites `a..=b`.
pub fn window_flux_check(
    lattice: &Lattice1D,
    field: &ScalarField,
    m: f64,
    dt: f64,
    steps: usize,
    window: (usize, usize),
) -> Result<FluxReport> {
    check_kg_dt(lattice, m, dt)?;
    let (a, b) = window;
    if !(a < b && b < lattice.n) {
        return Err(Error::Invalid(format!("window {a}..={b} is not inside the lattice")));
    }
    let mut f = field.clone();
    let mut next = kg_step(lattice, &f, m, dt)?;
    let mut report = FluxReport {
        window,
        t: Vec::with_capacity(steps + 1),
        charge: Vec::with_capacity(steps + 1),
        inflow: Vec::with_capacity(steps + 1),
        max_residual: 0.0,
        max_rate: 0.0,
    };
    for _ in 0..=steps {
        let pi_bar: Vec<f64> = f.pi.iter().zip(&next.pi).map(|(p, q)| 0.5 * (p + q)).collect();
        let e = energy_density(lattice, &f.phi, &pi_bar, m);
        let mut q = pairwise_sum(&e[a..=b]) - 0.5 * (e[a] + e[b]);
        q *= lattice.dx;
        let d = lattice.centered_diff(&f.phi);
        let flux = |j: usize| -pi_bar[j] * d[j];
        report.t.push(f.t);
        report.charge.push(q);
        report.inflow.push(flux(a) - flux(b));
        f = next;
        next = kg_step(lattice, &f, m, dt)?;
    }
    for i in 1..report.t.len() - 1 {
        let rate = (report.charge[i + 1] - report.charge[i - 1]) / (2.0 * dt);
        report.max_rate = report.max_rate.max(rate.abs());
        report.max_residual = report.max_residual.max((rate - report.inflow[i]).abs());
    }
    Ok(report)
}

/// Frequency of a sampled single-mode oscillation, from the least-squares
/// fit of `a_{n+1} + a_{n−1} = 2 cos(ω dt) a_n`.
pub fn measure_frequency(samples: &[f64], dt: f64) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::Invalid("need at least three samples".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for n in 1..samples.len() - 1 {
        num += samples[n] * (samples[n + 1] + samples[n - 1]);
        den += samples[n] * samples[n];
    }
    if den == 0.0 {
        return Err(Error::Degenerate { det: 0.0, tol: 0.0 });
    }
    let c = (num / (2.0 * den)).clamp(-1.0, 1.0);
    Ok(c.acos() / dt)
}

/// `Ω² = m² + (4/dx²) sin²(k dx/2)`, the lattice dispersion in continuous time.
pub fn lattice_dispersion(m: f64, k: f64, dx: f64) -> f64 {
    (m * m + 4.0 / (dx * dx) * (0.5 * k * dx).sin().powi(2)).sqrt()
}

/// Leapfrog dispersion, `sin²(ω dt/2) = (dt²/4) Ω²`.
pub fn leapfrog_dispersion(m: f64, k: f64, dx: f64, dt: f64) -> f64 {
    let omega = lattice_dispersion(m, k, dx);
    2.0 * (0.5 * dt * omega).min(1.0).asin() / dt
}

/// Projection `Σ φ_j cos(k x_j)` of a field onto a lattice mode.
pub fn mode_amplitude(lattice: &Lattice1D, phi: &[f64], k: f64) -> f64 {
    let p: Vec<f64> = (0..lattice.n).map(|j| phi[j] * (k * lattice.x(j)).cos()).collect();
    pairwise_sum(&p)
}

/// A first-order Lagrangian density in `u`, `u_t` and `u_x`.
#[derive(Debug, Clone)]
pub struct FieldLagrangian {
    pub expr: Expr,
    compiled: Compiled,
}

const JET_VARS: [&str; 3] = ["u", "u_t", "u_x"];

fn higher_jet(text: &str) -> Option<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .find(|w| {
            w.strip_prefix("u_")
                .is_some_and(|rest| rest.len() >= 2 && rest.chars().all(|c| c == 't' || c == 'x'))
        })
        .map(str::to_string)
}

impl FieldLagrangian {
    pub fn new(expr: Expr, params: &Params) -> Result<Self> {
        for v in expr.free_vars() {
            if !JET_VARS.contains(&v.as_str()) {
                return Err(Error::UnsupportedJet(v));
            }
        }
        let compiled = expr.compile(&JET_VARS, params)?;
        Ok(FieldLagrangian { expr, compiled })
    }

    pub fn parse(text: &str, params: &Params) -> Result<Self> {
        if let Some(name) = higher_jet(text) {
            return Err(Error::UnsupportedJet(name));
        }
        let names = NameSet::new(JET_VARS, params.keys().cloned());
        let expr = parse_expression(text, &names)?;
        Self::new(expr, params)
    }

    /// `½u_t² − ½u_x² − ½m²u²`.
    pub fn klein_gordon(m: f64) -> Self {
        let mut p = Params::new();
        p.insert("m".into(), m);
        Self::parse("0.5*u_t^2 - 0.5*u_x^2 - 0.5*m^2*u^2", &p).expect("built-in Lagrangian parses")
    }

    /// `(∂L/∂u, ∂L/∂u_t, ∂L/∂u_x)`.
    fn partials(&self, u: f64, ut: f64, ux: f64) -> Result<[f64; 3]> {
        let g = self.compiled.gradient(&[u, ut, ux])?.gradient;
        Ok([g[0], g[1], g[2]])
    }
}

/// Discrete Euler-Lagrange residual `∂L/∂u − D_t(∂L/∂u_t) − D_x(∂L/∂u_x)` at
/// time level `cur`, given the neighbouring levels `prev` and `next`.
///
/// `∂L/∂u` uses centered jets at the node; the momenta `∂L/∂u_t` and
/// `∂L/∂u_x` are evaluated at half steps and half sites and differenced
/// across the node. For `½u_t² − ½u_x² − ½m²u²` this is exactly the leapfrog
/// stencil.
pub fn el_residual(
    lag: &FieldLagrangian,
    lattice: &Lattice1D,
    prev: &[f64],
    cur: &[f64],
    next: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    lattice.check("prev", prev)?;
    lattice.check("cur", cur)?;
    lattice.check("next", next)?;
    let (n, dx) = (lattice.n, lattice.dx);
    let d_prev = lattice.centered_diff(prev);
    let d_cur = lattice.centered_diff(cur);
    let d_next = lattice.centered_diff(next);
    // value to the right of site j, honouring the boundary
    let right = |v: &[f64], j: usize| lattice.neighbours(v, j).1;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let ut = (next[j] - prev[j]) / (2.0 * dt);
        let node = lag.partials(cur[j], ut, d_cur[j])?;

        // time half steps at j
        let fwd = lag.partials(
            0.5 * (cur[j] + next[j]),
            (next[j] - cur[j]) / dt,
            0.5 * (d_cur[j] + d_next[j]),
        )?;
        let bwd = lag.partials(
            0.5 * (prev[j] + cur[j]),
            (cur[j] - prev[j]) / dt,
            0.5 * (d_prev[j] + d_cur[j]),
        )?;
        let dt_term = (fwd[1] - bwd[1]) / dt;

        // space half sites j ± ½
        let (l, _) = lattice.neighbours(cur, j);
        let at_half = |va: f64, vb: f64, ut_a: f64, ut_b: f64| {
            lag.partials(0.5 * (va + vb), 0.5 * (ut_a + ut_b), (vb - va) / dx).map(|p| p[2])
        };
        let ut_of = |k: usize| (next[k] - prev[k]) / (2.0 * dt);
        let (ut_l, ut_r) = match lattice.boundary {
            Boundary::Periodic => (ut_of((j + n - 1) % n), ut_of((j + 1) % n)),
            Boundary::FixedZero => (
                if j == 0 { 0.0 } else { ut_of(j - 1) },
                if j + 1 == n { 0.0 } else { ut_of(j + 1) },
            ),
        };
        let east = at_half(cur[j], right(cur, j), ut, ut_r)?;
        let west = at_half(l, cur[j], ut_l, ut)?;
        let dx_term = (east - west) / dx;

        out.push(node[0] - dt_term - dx_term);
    }
    Ok(out)
}
