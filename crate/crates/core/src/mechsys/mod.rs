//! Mechanical systems `L(q, q̂) = ½ q̂ᵀ g(q) q̂ − V(q)` on one chart of ℝⁿ.
//!
//! A system is either metric (kinetic metric plus potential) or a general
//! Lagrangian entered directly in `q` and `q̂`. Both are compiled into a
//! single Lagrangian expression over `(q, q̂)`, and momenta, energies and
//! the velocity Hessian are always taken from jets of that expression. The
//! metric form additionally supports Christoffel symbols and the closed-form
//! Hamiltonian `½ pᵀ g⁻¹ p + V`, which serve as cross-checks.

mod legendre;

use std::fmt;

use nalgebra::{DMatrix, DVector};

pub use legendre::{legendre_transform, ExprFunction, LegendrePoint, LegendreTransform, SmoothFunction};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Compiled, Expr, NameSet, Params, SecondOrderJet};

/// Relative degeneracy threshold: `|det| < DET_TOL_REL · ‖A‖∞ⁿ` is singular.
pub const DET_TOL_REL: f64 = 1e-10;

/// Scale-aware determinant tolerance for an `n × n` matrix.
pub fn det_tol(m: &DMatrix<f64>) -> f64 {
    let norm = m
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    DET_TOL_REL * norm.powi(m.nrows() as i32)
}

/// Velocity coordinate name paired with a position coordinate.
pub fn velocity_name(coord: &str) -> String {
    format!("{coord}_dot")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `m · δ_ij`
    Euclidean { mass: f64 },
    /// Row-major symmetric `n × n` entries in the coordinates.
    Entries(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    Metric { metric: Metric, potential: Expr },
    General { lagrangian: Expr },
}

/// `q̂` at a configuration `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

/// Canonical coordinates `(q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl VelocityState {
    pub fn new(q: impl Into<Vec<f64>>, qdot: impl Into<Vec<f64>>) -> Self {
        VelocityState {
            q: q.into(),
            qdot: qdot.into(),
        }
    }
}

impl PhaseState {
    pub fn new(q: impl Into<Vec<f64>>, p: impl Into<Vec<f64>>) -> Self {
        PhaseState { q: q.into(), p: p.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Greater,
    Less,
}

/// Admissible set `{ q : f(q) > bound }` or `{ q : f(q) < bound }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub expr: Expr,
    pub comparison: Comparison,
    pub bound: f64,
}

impl Guard {
    pub fn new(expr: Expr, comparison: Comparison, bound: f64) -> Self {
        Guard {
            expr,
            comparison,
            bound,
        }
    }

    pub fn holds(&self, value: f64) -> bool {
        match self.comparison {
            Comparison::Greater => value > self.bound,
            Comparison::Less => value < self.bound,
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.comparison {
            Comparison::Greater => ">",
            Comparison::Less => "<",
        };
        write!(f, "{} {op} {}", self.expr, self.bound)
    }
}

/// Christoffel symbols `Γ^ℓ_jk`, stored once per unordered lower pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn index(&self, l: usize, j: usize, k: usize) -> usize {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        let n = self.n;
        l * n * (n + 1) / 2 + j * n - (j * j.saturating_sub(1)) / 2 + (k - j)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, l: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(l, j, k)]
    }

    /// `Σ_jk Γ^ℓ_jk v^j v^k` for each ℓ.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|l| {
                let mut s = 0.0;
                for j in 0..self.n {
                    for k in 0..self.n {
                        s += self.get(l, j, k) * v[j] * v[k];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondegeneracyReport {
    pub invertible: bool,
    pub det: f64,
    pub condition: f64,
}

/// A Lagrangian system with compiled evaluators.
#[derive(Debug, Clone)]
pub struct LagrangianSystem {
    coords: Vec<String>,
    params: Params,
    kind: SystemKind,
    guard: Option<Guard>,
    guard_c: Option<Compiled>,
    lagrangian: Expr,
    lagrangian_c: Compiled,
    potential_c: Option<Compiled>,
    metric_c: Vec<Compiled>,
}

/// Incremental construction of a [`LagrangianSystem`] from text.
#[derive(Debug, Clone, Default)]
pub struct SystemBuilder {
    coords: Vec<String>,
    params: Params,
    mass: Option<f64>,
    metric: Option<Vec<Vec<String>>>,
    potential: Option<String>,
    lagrangian: Option<String>,
    guard: Option<String>,
}

impl SystemBuilder {
    pub fn new<I, S>(coords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SystemBuilder {
            coords: coords.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn params(mut self, params: &Params) -> Self {
        self.params.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }

    pub fn euclidean(mut self, mass: f64) -> Self {
        self.mass = Some(mass);
        self
    }

    /// Full row-major metric; must be symmetric entry by entry.
    pub fn metric<R, S>(mut self, rows: impl IntoIterator<Item = R>) -> Self
    where
        R: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.metric = Some(
            rows.into_iter()
                .map(|r| r.into_iter().map(Into::into).collect())
                .collect(),
        );
        self
    }

    pub fn potential(mut self, text: &str) -> Self {
        self.potential = Some(text.to_string());
        self
    }

    /// General Lagrangian in the coordinates and `<coord>_dot` velocities.
    pub fn lagrangian(mut self, text: &str) -> Self {
        self.lagrangian = Some(text.to_string());
        self
    }

    /// Admissible-set predicate such as `r > 1e-6`.
    pub fn guard(mut self, text: &str) -> Self {
        self.guard = Some(text.to_string());
        self
    }

    pub fn build(self) -> Result<LagrangianSystem> {
        let n = self.coords.len();
        let coord_names = NameSet::new(self.coords.iter().cloned(), self.params.keys().cloned());
        let kind = if let Some(l) = &self.lagrangian {
            if self.mass.is_some() || self.metric.is_some() || self.potential.is_some() {
                return Err(Error::Invalid(
                    "a general Lagrangian excludes metric and potential".into(),
                ));
            }
            let names = NameSet::new(
                self.coords
                    .iter()
                    .cloned()
                    .chain(self.coords.iter().map(|c| velocity_name(c))),
                self.params.keys().cloned(),
            );
            SystemKind::General {
                lagrangian: parse_expression(l, &names)?,
            }
        } else {
            let potential = match &self.potential {
                Some(text) => parse_expression(text, &coord_names)?,
                None => Expr::Num(0.0),
            };
            let metric = match (&self.metric, self.mass) {
                (Some(_), Some(_)) => {
                    return Err(Error::Invalid("give either a metric or a mass, not both".into()))
                }
                (Some(rows), None) => {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(Error::dim("metric rows", rows.len(), n));
                    }
                    let mut entries = Vec::with_capacity(n * n);
                    for row in rows {
                        for e in row {
                            entries.push(parse_expression(e, &coord_names)?);
                        }
                    }
                    Metric::Entries(entries)
                }
                (None, mass) => Metric::Euclidean {
                    mass: mass.unwrap_or(1.0),
                },
            };
            SystemKind::Metric { metric, potential }
        };
        let guard = match &self.guard {
            Some(text) => Some(parse_guard(text, &coord_names)?),
            None => None,
        };
        LagrangianSystem::new(self.coords, self.params, kind, guard)
    }
}

impl Guard {
    /// Parse `<expr> > <number>` or `<expr> < <number>`.
    pub fn parse(text: &str, names: &NameSet) -> Result<Guard> {
        parse_guard(text, names)
    }
}

fn parse_guard(text: &str, names: &NameSet) -> Result<Guard> {
    let (pos, comparison) = match (text.find('>'), text.find('<')) {
        (Some(p), None) => (p, Comparison::Greater),
        (None, Some(p)) => (p, Comparison::Less),
        _ => {
            return Err(Error::Invalid(format!(
                "guard `{text}` must have the form `<expr> > <number>` or `<expr> < <number>`"
            )))
        }
    };
    let expr = parse_expression(&text[..pos], names)?;
    let bound_text = text[pos + 1..].trim();
    let bound: f64 = bound_text
        .parse()
        .map_err(|_| Error::Invalid(format!("guard bound `{bound_text}` is not a number")))?;
    Ok(Guard::new(expr, comparison, bound))
}

impl LagrangianSystem {
    pub fn builder<I, S>(coords: I) -> SystemBuilder
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SystemBuilder::new(coords)
    }

    pub fn new(coords: Vec<String>, params: Params, kind: SystemKind, guard: Option<Guard>) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::Invalid("a system needs at least one coordinate".into()));
        }
        let velocities: Vec<String> = coords.iter().map(|c| velocity_name(c)).collect();
        let coord_refs: Vec<&str> = coords.iter().map(String::as_str).collect();
        let all: Vec<&str> = coord_refs
            .iter()
            .copied()
            .chain(velocities.iter().map(String::as_str))
            .collect();

        let (lagrangian, potential_c, metric_c) = match &kind {
            SystemKind::General { lagrangian } => (lagrangian.clone(), None, Vec::new()),
            SystemKind::Metric { metric, potential } => {
                let kinetic = match metric {
                    Metric::Euclidean { mass } => {
                        if !(*mass > 0.0) {
                            return Err(Error::Invalid(format!("mass must be positive, got {mass}")));
                        }
                        Expr::mul(
                            Expr::num(0.5 * mass),
                            Expr::sum(
                                velocities
                                    .iter()
                                    .map(|v| Expr::pow(Expr::var(v.as_str()), Expr::num(2.0))),
                            ),
                        )
                    }
                    Metric::Entries(entries) => {
                        if entries.len() != n * n {
                            return Err(Error::dim("metric entries", entries.len(), n * n));
                        }
                        for i in 0..n {
                            for j in i + 1..n {
                                if entries[i * n + j] != entries[j * n + i] {
                                    return Err(Error::Invalid(format!(
                                        "metric is not symmetric at ({}, {})",
                                        i + 1,
                                        j + 1
                                    )));
                                }
                            }
                        }
                        let mut terms = Vec::new();
                        for i in 0..n {
                            for j in i..n {
                                let c = if i == j { 0.5 } else { 1.0 };
                                let g = &entries[i * n + j];
                                if *g == Expr::Num(0.0) {
                                    continue;
                                }
                                terms.push(Expr::mul(
                                    Expr::mul(Expr::num(c), g.clone()),
                                    Expr::mul(
                                        Expr::var(velocities[i].as_str()),
                                        Expr::var(velocities[j].as_str()),
                                    ),
                                ));
                            }
                        }
                        Expr::sum(terms)
                    }
                };
                let lagrangian = Expr::sub(kinetic, potential.clone());
                let potential_c = potential.compile(&coord_refs, &params)?;
                let metric_c = match metric {
                    Metric::Euclidean { .. } => Vec::new(),
                    Metric::Entries(entries) => entries
                        .iter()
                        .map(|e| e.compile(&coord_refs, &params))
                        .collect::<Result<_>>()?,
                };
                (lagrangian, Some(potential_c), metric_c)
            }
        };
        let lagrangian_c = lagrangian.compile(&all, &params)?;
        let guard_c = match &guard {
            Some(g) => Some(g.expr.compile(&coord_refs, &params)?),
            None => None,
        };
        Ok(LagrangianSystem {
            coords,
            params,
            kind,
            guard,
            guard_c,
            lagrangian,
            lagrangian_c,
            potential_c,
            metric_c,
        })
    }

    /// Same system with some parameters replaced; nothing is re-parsed.
    pub fn with_params(&self, updates: &Params) -> Result<Self> {
        let mut params = self.params.clone();
        for (k, v) in updates {
            params.insert(k.clone(), *v);
        }
        LagrangianSystem::new(self.coords.clone(), params, self.kind.clone(), self.guard.clone())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn guard(&self) -> Option<&Guard> {
        self.guard.as_ref()
    }

    /// Names usable in expressions over this system's coordinates.
    pub fn names(&self) -> NameSet {
        NameSet::new(self.coords.iter().cloned(), self.params.keys().cloned())
    }

    /// Compile an expression over the coordinates with this system's parameters.
    pub fn compile(&self, expr: &Expr) -> Result<Compiled> {
        let refs: Vec<&str> = self.coords.iter().map(String::as_str).collect();
        expr.compile(&refs, &self.params)
    }

    /// Parse and compile an expression over the coordinates.
    pub fn compile_text(&self, text: &str) -> Result<(Expr, Compiled)> {
        let e = parse_expression(text, &self.names())?;
        let c = self.compile(&e)?;
        Ok((e, c))
    }

    /// The Lagrangian as an expression over coordinates and `_dot` velocities.
    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    pub fn is_metric(&self) -> bool {
        matches!(self.kind, SystemKind::Metric { .. })
    }

    /// Constant metric: builtin Euclidean or entries free of coordinates.
    pub fn has_constant_metric(&self) -> bool {
        match &self.kind {
            SystemKind::Metric { metric: Metric::Euclidean { .. }, .. } => true,
            SystemKind::Metric { .. } => self.metric_c.iter().all(Compiled::is_constant),
            SystemKind::General { .. } => false,
        }
    }

    /// Short stable description used to tag trajectories.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.coords.hash(&mut h);
        self.lagrangian.to_string().hash(&mut h);
        for (k, v) in &self.params {
            k.hash(&mut h);
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }

    fn check_len(&self, what: &str, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::dim(what, v.len(), self.dim()));
        }
        Ok(())
    }

    /// Finite coordinates inside the guard, if any.
    pub fn is_admissible(&self, q: &[f64]) -> bool {
        q.len() == self.dim()
            && q.iter().all(|v| v.is_finite())
            && self.guard_holds(q)
    }

    pub fn check_admissible(&self, q: &[f64]) -> Result<()> {
        self.check_len("q", q)?;
        if !q.iter().all(|v| v.is_finite()) {
            return Err(Error::Inadmissible(format!("non-finite coordinates {q:?}")));
        }
        if !self.guard_holds(q) {
            let g = self.guard.as_ref().map(|g| g.to_string()).unwrap_or_default();
            return Err(Error::Inadmissible(format!("guard `{g}` fails at {q:?}")));
        }
        Ok(())
    }

    fn guard_holds(&self, q: &[f64]) -> bool {
        match (&self.guard, &self.guard_c) {
            (Some(g), Some(c)) => g.holds(c.value(q)),
            _ => true,
        }
    }

    fn point(&self, s: &VelocityState) -> Result<Vec<f64>> {
        self.check_len("q", &s.q)?;
        self.check_len("qdot", &s.qdot)?;
        let mut x = s.q.clone();
        x.extend_from_slice(&s.qdot);
        Ok(x)
    }

    fn velocity_slots(&self) -> Vec<usize> {
        let n = self.dim();
        (n..2 * n).collect()
    }

    fn position_slots(&self) -> Vec<usize> {
        (0..self.dim()).collect()
    }

    /// Potential value; for general Lagrangians `−L(q, 0)`.
    pub fn potential_value(&self, q: &[f64]) -> Result<f64> {
        self.check_len("q", q)?;
        Ok(match &self.potential_c {
            Some(v) => v.value(q),
            None => {
                let mut x = q.to_vec();
                x.resize(2 * self.dim(), 0.0);
                -self.lagrangian_c.value(&x)
            }
        })
    }

    /// Second-order jet of the potential in the coordinates.
    pub fn potential_jet(&self, q: &[f64]) -> Result<SecondOrderJet> {
        self.check_len("q", q)?;
        match &self.potential_c {
            Some(v) => v.jet2(q),
            None => {
                let mut x = q.to_vec();
                x.resize(2 * self.dim(), 0.0);
                let j = self.lagrangian_c.partial_jet2(&x, &self.position_slots())?;
                let n = self.dim();
                let h: Vec<Vec<f64>> = (0..n)
                    .map(|i| (0..n).map(|k| -j.hessian(i, k)).collect())
                    .collect();
                Ok(SecondOrderJet::from_parts(
                    -j.value,
                    j.gradient.iter().map(|g| -g).collect(),
                    &h,
                ))
            }
        }
    }

    /// Gradient of the potential (first-order jet only).
    pub fn potential_gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        match &self.potential_c {
            Some(v) => Ok(v.gradient(q)?.gradient),
            None => Ok(self.potential_jet(q)?.gradient),
        }
    }

    /// Metric `g(q)`; for general Lagrangians the velocity Hessian at `q̂ = 0`.
    pub fn metric_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len("q", q)?;
        let n = self.dim();
        match &self.kind {
            SystemKind::Metric { metric: Metric::Euclidean { mass }, .. } => {
                Ok(DMatrix::identity(n, n) * *mass)
            }
            SystemKind::Metric { .. } => Ok(DMatrix::from_fn(n, n, |i, j| self.metric_c[i * n + j].value(q))),
            SystemKind::General { .. } => {
                let s = VelocityState::new(q.to_vec(), vec![0.0; n]);
                self.velocity_hessian(&s)
            }
        }
    }

    /// `∂g/∂q^k` for each k (exact jets of the metric entries).
    pub fn metric_derivatives(&self, q: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_len("q", q)?;
        let n = self.dim();
        match &self.kind {
            SystemKind::Metric { metric: Metric::Euclidean { .. }, .. } => Ok(vec![DMatrix::zeros(n, n); n]),
            SystemKind::Metric { .. } => {
                let mut out = vec![DMatrix::zeros(n, n); n];
                for i in 0..n {
                    for j in i..n {
                        let g = self.metric_c[i * n + j].gradient(q)?;
                        for (k, d) in g.gradient.iter().enumerate() {
                            out[k][(i, j)] = *d;
                            out[k][(j, i)] = *d;
                        }
                    }
                }
                Ok(out)
            }
            SystemKind::General { .. } => Err(Error::NotMetric),
        }
    }

    fn invertible_metric(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(q)?;
        let det = g.determinant();
        let tol = det_tol(&g);
        if !(det.abs() >= tol) || det == 0.0 {
            return Err(Error::Degenerate { det, tol });
        }
        Ok(g)
    }

    pub fn christoffel(&self, q: &[f64]) -> Result<Christoffel> {
        if !self.is_metric() {
            return Err(Error::NotMetric);
        }
        let n = self.dim();
        let g = self.invertible_metric(q)?;
        let ginv = g.try_inverse().ok_or(Error::Degenerate { det: 0.0, tol: 0.0 })?;
        let dg = self.metric_derivatives(q)?;
        let mut c = Christoffel {
            n,
            data: vec![0.0; n * n * (n + 1) / 2],
        };
        for l in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += ginv[(l, m)] * (dg[j][(m, k)] + dg[k][(m, j)] - dg[m][(j, k)]);
                    }
                    let idx = c.index(l, j, k);
                    c.data[idx] = 0.5 * s;
                }
            }
        }
        Ok(c)
    }

    pub fn lagrangian_value(&self, s: &VelocityState) -> Result<f64> {
        Ok(self.lagrangian_c.value(&self.point(s)?))
    }

    /// `∂L/∂q̂` at the state.
    pub fn momenta_of(&self, s: &VelocityState) -> Result<Vec<f64>> {
        let x = self.point(s)?;
        Ok(self.lagrangian_c.partial_gradient(&x, &self.velocity_slots())?.gradient)
    }

    /// `∂L/∂q` at the state.
    pub fn generalized_force(&self, s: &VelocityState) -> Result<Vec<f64>> {
        let x = self.point(s)?;
        Ok(self.lagrangian_c.partial_gradient(&x, &self.position_slots())?.gradient)
    }

    /// Full second-order jet of `L` over `(q, q̂)`.
    pub fn lagrangian_jet(&self, s: &VelocityState) -> Result<SecondOrderJet> {
        self.lagrangian_c.jet2(&self.point(s)?)
    }

    /// `∂²L/∂q̂ⁱ∂q̂ʲ`.
    pub fn velocity_hessian(&self, s: &VelocityState) -> Result<DMatrix<f64>> {
        let x = self.point(s)?;
        let j = self.lagrangian_c.partial_jet2(&x, &self.velocity_slots())?;
        Ok(j.hessian_matrix())
    }

    /// `Σ q̂ⁱ ∂L/∂q̂ⁱ − L`.
    pub fn energy(&self, s: &VelocityState) -> Result<f64> {
        let x = self.point(s)?;
        let j = self.lagrangian_c.partial_gradient(&x, &self.velocity_slots())?;
        let pv: f64 = j.gradient.iter().zip(&s.qdot).map(|(p, v)| p * v).sum();
        Ok(pv - j.value)
    }

    pub fn to_momenta(&self, s: &VelocityState) -> Result<PhaseState> {
        Ok(PhaseState {
            q: s.q.clone(),
            p: self.momenta_of(s)?,
        })
    }

    pub fn to_velocities(&self, s: &PhaseState) -> Result<VelocityState> {
        self.check_len("q", &s.q)?;
        self.check_len("p", &s.p)?;
        if self.is_metric() {
            let g = self.invertible_metric(&s.q)?;
            let lu = g.lu();
            let v = lu
                .solve(&DVector::from_column_slice(&s.p))
                .ok_or(Error::Degenerate { det: 0.0, tol: 0.0 })?;
            return Ok(VelocityState::new(s.q.clone(), v.as_slice().to_vec()));
        }
        self.invert_momenta(s)
    }

    /// Newton solve of `∂L/∂q̂ (q, q̂) = p` for a general Lagrangian.
    fn invert_momenta(&self, s: &PhaseState) -> Result<VelocityState> {
        const MAX_ITER: usize = 50;
        let n = self.dim();
        let mut v = VelocityState::new(s.q.clone(), vec![0.0; n]);
        let scale = s.p.iter().fold(1.0_f64, |m, p| m.max(p.abs()));
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let x = self.point(&v)?;
            let j = self.lagrangian_c.partial_jet2(&x, &self.velocity_slots())?;
            let r = DVector::from_iterator(n, j.gradient.iter().zip(&s.p).map(|(a, b)| a - b));
            residual = r.amax();
            if residual <= 1e-14 * scale {
                return Ok(v);
            }
            let h = j.hessian_matrix();
            let det = h.determinant();
            let tol = det_tol(&h);
            if !(det.abs() >= tol) || det == 0.0 {
                return Err(Error::Degenerate { det, tol });
            }
            let step = h.lu().solve(&r).ok_or(Error::Degenerate { det, tol })?;
            for i in 0..n {
                v.qdot[i] -= step[i];
            }
        }
        if residual <= 1e-10 * scale {
            return Ok(v);
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITER,
            residual,
        })
    }

    /// `H(q, p)`; metric systems use `½ pᵀ g⁻¹ p + V`.
    pub fn hamiltonian(&self, s: &PhaseState) -> Result<f64> {
        if self.is_metric() {
            let v = self.to_velocities(s)?;
            let kinetic: f64 = 0.5 * v.qdot.iter().zip(&s.p).map(|(a, b)| a * b).sum::<f64>();
            return Ok(kinetic + self.potential_value(&s.q)?);
        }
        let v = self.to_velocities(s)?;
        let pv: f64 = v.qdot.iter().zip(&s.p).map(|(a, b)| a * b).sum();
        Ok(pv - self.lagrangian_value(&v)?)
    }

    pub fn nondegeneracy_report(&self, s: &VelocityState) -> Result<NondegeneracyReport> {
        let h = self.velocity_hessian(s)?;
        Ok(nondegeneracy_of(&h))
    }
}

/// Determinant, condition number and invertibility verdict for a square matrix.
pub fn nondegeneracy_of(h: &DMatrix<f64>) -> NondegeneracyReport {
    let det = h.determinant();
    let tol = det_tol(h);
    let sv = h.clone().singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0_f64, f64::INFINITY), |(a, b), s| (a.max(*s), b.min(*s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    NondegeneracyReport {
        invertible: det != 0.0 && det.abs() >= tol,
        det,
        condition,
    }
}
