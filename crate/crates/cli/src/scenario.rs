//! Scenario files: the INI sections turned into core objects.

use std::path::{Path, PathBuf};

use noetherlab::conserve::SymmetryField;
use noetherlab::expr::{parse_expression, NameSet, Params};
use noetherlab::integrate::{Formulation, IntegratorSpec, Method};
use noetherlab::mechsys::{velocity_name, Guard, LagrangianSystem, PhaseState, VelocityState};

use crate::failure::Failure;
use crate::ini::{self, split_list, Entry, Section};

pub const SECTIONS: [&str; 8] = ["system", "initial", "run", "symmetries", "radial", "modes", "hj", "field"];

#[derive(Debug, Clone, Copy)]
pub enum InitialKind {
    Momenta,
    Velocities,
}

#[derive(Debug, Clone)]
pub struct Initial {
    pub q: Vec<f64>,
    pub second: Vec<f64>,
    pub kind: InitialKind,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RadialCfg {
    pub potential: Option<String>,
    pub m: Option<f64>,
    pub l: Option<f64>,
    pub e: Option<f64>,
    pub rmin: Option<f64>,
    pub rmax: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ModesCfg {
    pub guess: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct HjCfg {
    pub family: Option<String>,
    pub c: Option<f64>,
    pub k: Option<f64>,
    pub m: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct FieldCfg {
    pub kind: Option<String>,
    pub n: Option<usize>,
    pub dx: Option<f64>,
    pub m: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub every: Option<usize>,
    pub boundary: Option<String>,
    pub width: Option<f64>,
    pub speed: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub path: PathBuf,
    pub system: Option<LagrangianSystem>,
    pub initial: Option<Initial>,
    pub run: Option<IntegratorSpec>,
    pub symmetries: Vec<SymmetryField>,
    pub radial: Option<RadialCfg>,
    pub modes: Option<ModesCfg>,
    pub hj: Option<HjCfg>,
    pub field: Option<FieldCfg>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("{}: cannot read scenario: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text, path)
    }

    pub fn parse(file: &str, text: &str, path: &Path) -> Result<Self, Failure> {
        let mut doc = ini::parse(file, text)?;
        let mut sc = Scenario {
            path: path.to_path_buf(),
            system: None,
            initial: None,
            run: None,
            symmetries: Vec::new(),
            radial: None,
            modes: None,
            hj: None,
            field: None,
        };
        if let Some(sec) = doc.take("system") {
            sc.system = Some(system(sec)?);
        }
        if let Some(sec) = doc.take("initial") {
            let sys = sc
                .system
                .as_ref()
                .ok_or_else(|| sec.fail(sec.line, "[initial] needs a [system] section"))?;
            sc.initial = Some(initial(sec, sys)?);
        }
        if let Some(sec) = doc.take("run") {
            let sys = sc
                .system
                .as_ref()
                .ok_or_else(|| sec.fail(sec.line, "[run] needs a [system] section"))?;
            sc.run = Some(run(sec, sys)?);
        }
        if let Some(sec) = doc.take("symmetries") {
            let sys = sc
                .system
                .as_ref()
                .ok_or_else(|| sec.fail(sec.line, "[symmetries] needs a [system] section"))?;
            sc.symmetries = symmetries(sec, sys)?;
        }
        if let Some(sec) = doc.take("radial") {
            sc.radial = Some(radial(sec)?);
        }
        if let Some(mut sec) = doc.take("modes") {
            let guess = sec.numbers("guess")?;
            if let (Some((g, line)), Some(sys)) = (&guess, &sc.system) {
                if g.len() != sys.dim() {
                    return Err(sec.fail(*line, format!("[modes].guess has length {}, expected {}", g.len(), sys.dim())));
                }
            }
            sec.finish()?;
            sc.modes = Some(ModesCfg { guess: guess.map(|g| g.0) });
        }
        if let Some(sec) = doc.take("hj") {
            sc.hj = Some(hj(sec)?);
        }
        if let Some(sec) = doc.take("field") {
            sc.field = Some(field(sec)?);
        }
        doc.finish(&SECTIONS)?;
        Ok(sc)
    }

    pub fn stem(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into())
    }

    fn file(&self) -> String {
        self.path.display().to_string()
    }

    /// System, phase-space start and integrator, all required.
    pub fn dynamics(&self) -> Result<(&LagrangianSystem, PhaseState, &IntegratorSpec), Failure> {
        let need = |what: &str| Failure::validation(&self.file(), 1, format!("scenario needs a [{what}] section"));
        let sys = self.system.as_ref().ok_or_else(|| need("system"))?;
        let init = self.initial.as_ref().ok_or_else(|| need("initial"))?;
        let spec = self.run.as_ref().ok_or_else(|| need("run"))?;
        let s0 = match init.kind {
            InitialKind::Momenta => PhaseState::new(init.q.clone(), init.second.clone()),
            InitialKind::Velocities => sys
                .to_momenta(&VelocityState::new(init.q.clone(), init.second.clone()))
                .map_err(|e| Failure::runtime(format!("{}:{}: [initial]: {e}", self.file(), init.line)))?,
        };
        sys.check_admissible(&s0.q)
            .map_err(|e| Failure::runtime(format!("{}:{}: [initial].q: {e}", self.file(), init.line)))?;
        Ok((sys, s0, spec))
    }

    pub fn require_system(&self) -> Result<&LagrangianSystem, Failure> {
        self.system
            .as_ref()
            .ok_or_else(|| Failure::validation(&self.file(), 1, "scenario needs a [system] section"))
    }
}

fn parse_params(sec: &Section, e: &Entry) -> Result<Params, Failure> {
    let mut out = Params::new();
    for item in split_list(&e.value) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| sec.fail(e.line, format!("[system].params: expected `name=value`, got `{item}`")))?;
        let k = k.trim();
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| sec.fail(e.line, format!("[system].params: `{}` is not a number", v.trim())))?;
        if out.insert(k.to_string(), v).is_some() {
            return Err(sec.fail(e.line, format!("[system].params: `{k}` given twice")));
        }
    }
    Ok(out)
}

fn check_expr(sec: &Section, key: &str, e: &Entry, names: &NameSet) -> Result<(), Failure> {
    parse_expression(&e.value, names)
        .map(|_| ())
        .map_err(|d| sec.fail(e.line, format!("[system].{key}: {d}")))
}

fn system(mut sec: Section) -> Result<LagrangianSystem, Failure> {
    let coords: Vec<String> = match (sec.take("coords"), sec.take("dim")) {
        (Some(c), None) => {
            let names = split_list(&c.value);
            if names.is_empty() {
                return Err(sec.fail(c.line, "[system].coords is empty"));
            }
            names
        }
        (None, Some(d)) => {
            let n: usize = d
                .value
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| sec.fail(d.line, format!("[system].dim: `{}` is not a positive integer", d.value)))?;
            (1..=n).map(|i| format!("q{i}")).collect()
        }
        (Some(_), Some(d)) => return Err(sec.fail(d.line, "[system] takes `coords` or `dim`, not both")),
        (None, None) => return Err(sec.missing("coords")),
    };
    let params = match sec.take("params") {
        Some(e) => parse_params(&sec, &e)?,
        None => Params::new(),
    };
    let names = NameSet::new(coords.iter().cloned(), params.keys().cloned());
    let mut b = LagrangianSystem::builder(coords.clone()).params(&params);

    if let Some(m) = sec.take("mass") {
        let v: f64 = m
            .value
            .parse()
            .map_err(|_| sec.fail(m.line, format!("[system].mass: `{}` is not a number", m.value)))?;
        b = b.euclidean(v);
    }
    if let Some(e) = sec.take("metric") {
        let rows: Vec<Vec<String>> = e.value.split(';').map(split_list).collect();
        let n = coords.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(sec.fail(e.line, format!("[system].metric must be {n}x{n}, rows separated by `;`")));
        }
        for entry in rows.iter().flatten() {
            check_expr(&sec, "metric", &Entry { value: entry.clone(), line: e.line }, &names)?;
        }
        b = b.metric(rows);
    }
    if let Some(e) = sec.take("potential") {
        check_expr(&sec, "potential", &e, &names)?;
        b = b.potential(&e.value);
    }
    if let Some(e) = sec.take("lagrangian") {
        let with_vel = NameSet::new(
            coords.iter().cloned().chain(coords.iter().map(|c| velocity_name(c))),
            params.keys().cloned(),
        );
        check_expr(&sec, "lagrangian", &e, &with_vel)?;
        b = b.lagrangian(&e.value);
    }
    if let Some(e) = sec.take("guard") {
        Guard::parse(&e.value, &names).map_err(|d| sec.fail(e.line, format!("[system].guard: {d}")))?;
        b = b.guard(&e.value);
    }
    let (file, line) = (sec.file().to_string(), sec.line);
    sec.finish()?;
    b.build().map_err(|e| Failure::validation(&file, line, format!("[system]: {e}")))
}

fn initial(mut sec: Section, sys: &LagrangianSystem) -> Result<Initial, Failure> {
    let n = sys.dim();
    let (q, line) = sec.numbers("q")?.ok_or_else(|| sec.missing("q"))?;
    let check = |sec: &Section, key: &str, v: &[f64], line: usize| {
        if v.len() != n {
            return Err(sec.fail(line, format!("[initial].{key} has length {}, expected {n}", v.len())));
        }
        Ok(())
    };
    check(&sec, "q", &q, line)?;
    let (second, kind) = match (sec.numbers("p")?, sec.numbers("qdot")?) {
        (Some((p, l)), None) => {
            check(&sec, "p", &p, l)?;
            (p, InitialKind::Momenta)
        }
        (None, Some((v, l))) => {
            check(&sec, "qdot", &v, l)?;
            (v, InitialKind::Velocities)
        }
        (Some(_), Some((_, l))) => return Err(sec.fail(l, "[initial] takes `p` or `qdot`, not both")),
        (None, None) => return Err(sec.missing("p` or `qdot")),
    };
    sec.finish()?;
    Ok(Initial { q, second, kind, line })
}

fn run(mut sec: Section, sys: &LagrangianSystem) -> Result<IntegratorSpec, Failure> {
    let method: Method = match sec.take("method") {
        Some(e) => e.value.parse().map_err(|err| sec.fail(e.line, format!("[run].method: {err}")))?,
        None => Method::Rk4,
    };
    let dt = sec.number("dt")?.ok_or_else(|| sec.missing("dt"))?;
    let steps = sec.count("steps")?.ok_or_else(|| sec.missing("steps"))?;
    let mut spec = IntegratorSpec::new(method, dt, steps).map_err(|e| sec.fail(sec.line, format!("[run]: {e}")))?;
    if let Some(e) = sec.take("formulation") {
        let f = match e.value.as_str() {
            "hamilton" => Formulation::Hamilton,
            "lagrange" => Formulation::Lagrange,
            other => {
                return Err(sec.fail(e.line, format!("[run].formulation: `{other}` is not hamilton or lagrange")))
            }
        };
        spec = spec.with_formulation(f);
    }
    if let Some(e) = sec.take("stop") {
        let g = Guard::parse(&e.value, &sys.names()).map_err(|err| sec.fail(e.line, format!("[run].stop: {err}")))?;
        spec = spec.with_stop(g);
    }
    sec.finish()?;
    Ok(spec)
}

fn symmetries(mut sec: Section, sys: &LagrangianSystem) -> Result<Vec<SymmetryField>, Failure> {
    let mut keys = Vec::new();
    // BTreeMap order is alphabetical; report in file order instead.
    while let Some((k, e)) = next_entry(&mut sec) {
        keys.push((k, e));
    }
    keys.sort_by_key(|(_, e)| e.line);
    keys.into_iter()
        .map(|(k, e)| {
            let comps = split_list(&e.value);
            let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
            SymmetryField::parse(sys, &k, &refs).map_err(|err| sec.fail(e.line, format!("[symmetries].{k}: {err}")))
        })
        .collect()
}

fn next_entry(sec: &mut Section) -> Option<(String, Entry)> {
    let k = sec.keys().next()?.to_string();
    let e = sec.take(&k)?;
    Some((k, e))
}

fn radial(mut sec: Section) -> Result<RadialCfg, Failure> {
    let cfg = RadialCfg {
        potential: sec.take("potential").map(|e| e.value),
        m: sec.number("M")?,
        l: sec.number("L")?,
        e: sec.number("E")?,
        rmin: sec.number("rmin")?,
        rmax: sec.number("rmax")?,
        points: sec.count("points")?,
    };
    sec.finish()?;
    Ok(cfg)
}

fn hj(mut sec: Section) -> Result<HjCfg, Failure> {
    let cfg = HjCfg {
        family: sec.take("family").map(|e| e.value),
        c: sec.number("c")?,
        k: sec.number("k")?,
        m: sec.number("M")?,
        x0: sec.numbers("x0")?.map(|v| v.0),
        v0: sec.numbers("v0")?.map(|v| v.0),
        dt: sec.number("dt")?,
        steps: sec.count("steps")?,
    };
    sec.finish()?;
    Ok(cfg)
}

fn field(mut sec: Section) -> Result<FieldCfg, Failure> {
    let cfg = FieldCfg {
        kind: sec.take("kind").map(|e| e.value),
        n: sec.count("n")?,
        dx: sec.number("dx")?,
        m: sec.number("m")?,
        dt: sec.number("dt")?,
        steps: sec.count("steps")?,
        every: sec.count("every")?,
        boundary: sec.take("boundary").map(|e| e.value),
        width: sec.number("width")?,
        speed: sec.number("speed")?,
        seed: sec.count("seed")?.map(|s| s as u64),
    };
    sec.finish()?;
    Ok(cfg)
}
