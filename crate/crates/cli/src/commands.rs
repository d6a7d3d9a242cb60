use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use noetherlab::conserve::{audit, builtin_monitors, killing_residual, write_audit_csv, Monitor};
use noetherlab::expr::Params;
use noetherlab::fieldlab::{
    charge_conservation_audit, kg_run, maxwell_cfl_limit, maxwell_run, Boundary, EmGrid, Lattice1D, ScalarField,
};
use noetherlab::hamjac::{
    hj_residual, kepler_polar_system, separation_constants, two_center_cartesian, two_center_system,
    KeplerRadialFamily, TwoCenterFamily,
};
use noetherlab::integrate::{fmt17, run, IntegratorSpec};
use noetherlab::linmodes::{find_equilibrium, normal_modes, quadratic_approx};
use noetherlab::mechsys::PhaseState;
use noetherlab::radial::{
    effective_profile, kepler_elements, orbit_trace, write_profile_csv, OrbitClass, RadialPotential,
};

use crate::failure::{io_at, Failure};
use crate::ini::split_list;
use crate::scenario::{FieldCfg, HjCfg, RadialCfg, Scenario};
use crate::{HjArgs, KgArgs, MaxwellArgs, ModesArgs, RadialArgs, SimulateArgs};

const DEFAULT_SEED: u64 = 2024;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(io_at(path))
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(io_at(&path))
}

fn make_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io_at(dir))
}

fn runtime(e: noetherlab::Error) -> Failure {
    Failure::runtime(e)
}

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure::Validation(msg.to_string())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(", ")
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn load_optional(path: &Option<PathBuf>) -> Result<Option<Scenario>, Failure> {
    path.as_deref().map(Scenario::load).transpose()
}

// ---------------------------------------------------------------------------
// simulate

struct Outcome {
    summary: String,
    truncated: Option<String>,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    if args.jobs == 0 {
        return Err(invalid("--jobs must be at least 1"));
    }
    // validate everything before running anything
    let scenarios = args
        .scenarios
        .iter()
        .map(|p| Scenario::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let dirs: Vec<PathBuf> = if scenarios.len() == 1 {
        vec![args.out.clone()]
    } else {
        let mut stems: Vec<String> = scenarios.iter().map(Scenario::stem).collect();
        stems.sort();
        if let Some(w) = stems.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("two scenarios share the name `{}`", w[0])));
        }
        scenarios.iter().map(|s| args.out.join(s.stem())).collect()
    };

    let results: Vec<Mutex<Option<Result<Outcome, Failure>>>> = scenarios.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.min(scenarios.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= scenarios.len() {
                    break;
                }
                let r = simulate_one(&scenarios[i], &dirs[i], args.killing_tol);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });

    let mut worst: Option<Failure> = None;
    let mut stdout = std::io::stdout().lock();
    for (sc, slot) in scenarios.iter().zip(results) {
        match slot.into_inner().unwrap().expect("every scenario ran") {
            Ok(out) => {
                stdout.write_all(out.summary.as_bytes())?;
                if let Some(reason) = out.truncated {
                    eprintln!("noetherlab: {}: {reason}", sc.path.display());
                    worst.get_or_insert(Failure::runtime("run truncated; partial outputs written"));
                }
            }
            Err(f) => {
                eprintln!("noetherlab: {f}");
                if worst.as_ref().is_none_or(|w| w.exit_code() < f.exit_code()) {
                    worst = Some(f);
                }
            }
        }
    }
    stdout.flush()?;
    match worst {
        None => Ok(()),
        Some(f) if scenarios.len() == 1 => Err(f),
        Some(f) => Err(match f {
            Failure::Validation(_) => Failure::Validation("at least one scenario failed validation".into()),
            _ => Failure::runtime("at least one scenario did not complete"),
        }),
    }
}

fn simulate_one(sc: &Scenario, dir: &Path, killing_tol: f64) -> Result<Outcome, Failure> {
    let (sys, s0, spec) = sc.dynamics()?;
    let traj = run(sys, &s0, spec).map_err(runtime)?;
    make_dir(dir)?;
    write_file(dir, "trajectory.csv", |w| traj.write_csv(sys, w))?;

    let mut monitors = builtin_monitors(sys);
    monitors.extend(sc.symmetries.iter().cloned().map(Monitor::Charge));
    let reports = audit(sys, &traj, &monitors).map_err(runtime)?;
    write_file(dir, "audit.csv", |w| write_audit_csv(&reports, w))?;

    let mut s = String::new();
    let _ = writeln!(s, "scenario={}", sc.stem());
    let _ = writeln!(s, "fingerprint={:016x}", traj.meta.fingerprint);
    let _ = writeln!(s, "method={}", spec.method);
    let _ = writeln!(s, "dt={}", fmt17(spec.dt));
    let _ = writeln!(s, "steps={}", spec.steps);
    let _ = writeln!(s, "samples={}", traj.len());
    let _ = writeln!(s, "t_final={}", fmt17(*traj.t.last().unwrap_or(&0.0)));
    let truncated = traj.truncated.as_ref().map(|t| format!("truncated at t={}: {}", fmt17(t.t), t.reason));
    let _ = writeln!(s, "status={}", truncated.as_deref().unwrap_or("complete"));
    for r in &reports {
        let _ = write!(
            s,
            "drift {} initial={} max={} relative={} t_at_max={}",
            r.label,
            fmt17(r.initial),
            fmt17(r.max_drift),
            fmt17(r.relative),
            fmt17(r.t_at_max)
        );
        if let Some(e) = &r.error {
            let _ = write!(s, " error=\"{e}\"");
        }
        s.push('\n');
    }
    if !sc.symmetries.is_empty() {
        let stride = (traj.len() / 16).max(1);
        let points: Vec<Vec<f64>> = traj.states.iter().step_by(stride).map(|st| st.q.clone()).collect();
        for x in &sc.symmetries {
            let k = killing_residual(sys, x, &points).map_err(runtime)?;
            let verdict = k.metric <= killing_tol && k.potential <= killing_tol;
            let _ = writeln!(
                s,
                "symmetry {} metric_residual={} potential_residual={} symmetric={}",
                x.label,
                fmt17(k.metric),
                fmt17(k.potential),
                if verdict { "yes" } else { "no" }
            );
        }
    }
    write_file(dir, "summary.txt", |w| w.write_all(s.as_bytes()))?;
    Ok(Outcome { summary: s, truncated })
}

// ---------------------------------------------------------------------------
// radial

pub fn radial(args: &RadialArgs) -> Result<(), Failure> {
    let sc = load_optional(&args.scenario)?;
    let cfg = sc.as_ref().and_then(|s| s.radial.clone()).unwrap_or_default();
    let RadialCfg { potential, m, l, e, rmin, rmax, points } = cfg;
    let m = positive("M", args.m.or(m).unwrap_or(1.0))?;
    let l = args.l.or(l).ok_or_else(|| invalid("radial needs L (--L or [radial].L)"))?;
    let e = args.e.or(e).ok_or_else(|| invalid("radial needs E (--E or [radial].E)"))?;
    let rmin = positive("rmin", args.rmin.or(rmin).unwrap_or(0.05))?;
    let rmax = positive("rmax", args.rmax.or(rmax).unwrap_or(50.0))?;
    if rmin >= rmax {
        return Err(invalid(format!("rmin {rmin} must be below rmax {rmax}")));
    }
    let points = args.points.or(points).unwrap_or(400).max(2);
    let text = args.potential.clone().or(potential);
    let v = match &text {
        Some(t) => {
            let params = Params::from([("M".to_string(), m)]);
            RadialPotential::parse(t, &params).map_err(|err| invalid(format!("radial potential: {err}")))?
        }
        None => RadialPotential::newton(m),
    };

    let profile = effective_profile(&v, l, e, (rmin, rmax)).map_err(runtime)?;
    let mut out = String::new();
    let class = match profile.classification {
        OrbitClass::Bounded => "bounded",
        OrbitClass::Unbounded => "unbounded",
        OrbitClass::Circular => "circular",
        OrbitClass::Collision => "collision",
    };
    let _ = writeln!(out, "classification={class}");
    for (i, r) in profile.turning_points.iter().enumerate() {
        let _ = writeln!(out, "r_turn_{}={}", i + 1, fmt17(*r));
    }
    let elements = if text.is_none() {
        Some(kepler_elements(m, l, e).map_err(runtime)?)
    } else {
        None
    };
    let mut block = Vec::new();
    if let Some(el) = &elements {
        el.write_block(&mut block)?;
    }
    out.push_str(&String::from_utf8_lossy(&block));
    print!("{out}");

    if let Some(dir) = &args.out {
        make_dir(dir)?;
        let rs: Vec<f64> = (0..points)
            .map(|i| rmin + (rmax - rmin) * i as f64 / (points - 1) as f64)
            .collect();
        write_file(dir, "profile.csv", |w| write_profile_csv(&v, l, &rs, w))?;
        write_file(dir, "elements.txt", |w| w.write_all(out.as_bytes()))?;
        if let Some(el) = &elements {
            let phis: Vec<f64> = (0..points).map(|i| 2.0 * PI * i as f64 / (points - 1) as f64).collect();
            write_file(dir, "trace.csv", |w| orbit_trace(el, &phis).write_csv(w))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// modes

pub fn modes(args: &ModesArgs) -> Result<(), Failure> {
    let sc = Scenario::load(&args.scenario)?;
    let sys = sc.require_system()?;
    let guess = match &args.guess {
        Some(text) => split_list(text)
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| invalid(format!("--guess: `{text}` is not a list of numbers")))?,
        None => sc
            .modes
            .as_ref()
            .and_then(|m| m.guess.clone())
            .unwrap_or_else(|| vec![0.0; sys.dim()]),
    };
    if guess.len() != sys.dim() {
        return Err(invalid(format!("--guess has length {}, expected {}", guess.len(), sys.dim())));
    }
    let eq = find_equilibrium(sys, &guess).map_err(runtime)?;
    let qa = quadratic_approx(sys, &eq.q0).map_err(runtime)?;
    let set = normal_modes(&qa.alpha, &qa.omega).map_err(runtime)?;
    let mut csv = Vec::new();
    set.write_csv(&mut csv)?;
    println!(
        "classification={} q0=({}) grad_norm={} iterations={}",
        eq.classification,
        fmt_list(&eq.q0),
        fmt17(eq.grad_norm),
        eq.iterations
    );
    print!("{}", String::from_utf8_lossy(&csv));
    if let Some(dir) = &args.out {
        make_dir(dir)?;
        write_file(dir, "modes.csv", |w| w.write_all(&csv))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// hj

pub fn hj(args: &HjArgs) -> Result<(), Failure> {
    let sc = load_optional(&args.scenario)?;
    let cfg = sc.as_ref().and_then(|s| s.hj.clone()).unwrap_or_default();
    let HjCfg { family, c, k, m, x0, v0, dt, steps } = cfg;
    let family = args.family.clone().or(family).unwrap_or_else(|| "two_center".into());
    let dt = positive("dt", args.dt.or(dt).unwrap_or(1e-4))?;
    let steps = args.steps.or(steps).unwrap_or(20_000);
    let spec = IntegratorSpec::rk4(dt, steps).map_err(|e| invalid(format!("hj run: {e}")))?;

    let two = |v: Option<Vec<f64>>, default: [f64; 2], what: &str| -> Result<Vec<f64>, Failure> {
        let v = v.unwrap_or_else(|| default.to_vec());
        if v.len() != 2 {
            return Err(invalid(format!("[hj].{what} must have 2 entries")));
        }
        Ok(v)
    };

    let (res, csv) = match family.as_str() {
        "two_center" => {
            let c = positive("c", args.c.or(c).unwrap_or(1.0))?;
            let k = args.k.or(k).unwrap_or(1.0);
            let sys = two_center_system(c, k).map_err(runtime)?;
            let fam = TwoCenterFamily::new(c, k).map_err(runtime)?;
            let xs: Vec<Vec<f64>> = (0..8)
                .flat_map(|i| {
                    let xi = c * (2.2 + 4.3 * i as f64 / 7.0);
                    [-1.8, -0.9, -0.2, 0.3, 1.1, 1.9].map(move |eta| vec![xi, c * eta])
                })
                .collect();
            let us: Vec<Vec<f64>> = [-0.5, -0.3]
                .iter()
                .flat_map(|&bc| [-1.0, -0.4].map(move |c1| vec![bc, c1]))
                .collect();
            let res = hj_residual(&sys, &fam, &xs, &us).map_err(runtime)?;
            let s0 = PhaseState::new(two(x0, [0.3, 1.2], "x0")?, two(v0, [0.5, 0.1], "v0")?);
            let traj = run(&two_center_cartesian(c, k).map_err(runtime)?, &s0, &spec).map_err(runtime)?;
            let trace = separation_constants(&traj, c, k).map_err(runtime)?;
            let (sc_, s1) = trace.std();
            let per_t = trace.duration().max(1.0);
            println!(
                "std_C_per_time={} std_c1_per_time={} samples={}",
                fmt17(sc_ / per_t),
                fmt17(s1 / per_t),
                trace.len()
            );
            let mut csv = Vec::new();
            trace.write_csv(&mut csv)?;
            (res, csv)
        }
        "kepler" => {
            let m = positive("M", args.m.or(m).unwrap_or(1.0))?;
            let sys = kepler_polar_system(m).map_err(runtime)?;
            let fam = KeplerRadialFamily::new(m, 1.0).map_err(runtime)?;
            let xs: Vec<Vec<f64>> = (0..8)
                .flat_map(|i| {
                    let r = 1.0 + i as f64 / 7.0;
                    [0.0, 1.0, 2.5].map(move |phi| vec![r, phi])
                })
                .collect();
            let us: Vec<Vec<f64>> = [(-0.3 * m, 0.8 * m.sqrt()), (-0.2 * m, m.sqrt())]
                .iter()
                .map(|&(e, l)| vec![e, l])
                .collect();
            let res = hj_residual(&sys, &fam, &xs, &us).map_err(runtime)?;
            let s0 = PhaseState::new(two(x0, [1.0, 0.0], "x0")?, two(v0, [0.0, 1.1], "v0")?);
            let s0 = sys
                .to_momenta(&noetherlab::mechsys::VelocityState::new(s0.q, s0.p))
                .map_err(runtime)?;
            let traj = run(&sys, &s0, &spec).map_err(runtime)?;
            let mut csv = b"t,E,L\n".to_vec();
            for (t, s) in traj.t.iter().zip(&traj.states) {
                let e = sys.hamiltonian(s).map_err(runtime)?;
                writeln!(csv, "{},{},{}", fmt17(*t), fmt17(e), fmt17(s.p[1]))?;
            }
            (res, csv)
        }
        other => return Err(invalid(format!("unknown family `{other}`; expected two_center or kepler"))),
    };
    let pass = match args.tol {
        Some(tol) => res.evaluated > 0 && res.max <= tol,
        None => res.passes(),
    };
    println!(
        "family={family} residual_max={} residual_mean={} evaluated={} skipped={}",
        fmt17(res.max),
        fmt17(res.mean),
        res.evaluated,
        res.skipped
    );
    println!("verdict={}", if pass { "pass" } else { "fail" });
    if let Some(dir) = &args.out {
        make_dir(dir)?;
        write_file(dir, "constants.csv", |w| w.write_all(&csv))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// field

fn field_cfg(sc: &Option<Scenario>, kind: &str) -> Result<FieldCfg, Failure> {
    let cfg = sc.as_ref().and_then(|s| s.field.clone()).unwrap_or_default();
    if let Some(k) = &cfg.kind {
        if k != kind {
            return Err(invalid(format!("scenario [field].kind is `{k}`, not `{kind}`")));
        }
    }
    Ok(cfg)
}

pub fn kg(args: &KgArgs) -> Result<(), Failure> {
    let sc = load_optional(&args.scenario)?;
    let cfg = field_cfg(&sc, "kg")?;
    let n = args.n.or(cfg.n).unwrap_or(256);
    let dx = positive("dx", args.dx.or(cfg.dx).unwrap_or(0.1))?;
    let m = args.m.or(cfg.m).unwrap_or(1.0);
    let dt = positive("dt", args.dt.or(cfg.dt).unwrap_or(0.05))?;
    let steps = args.steps.or(cfg.steps).unwrap_or(1000);
    let every = args.every.or(cfg.every).unwrap_or(10);
    let width = positive("width", args.width.or(cfg.width).unwrap_or(1.0))?;
    let speed = args.speed.or(cfg.speed).unwrap_or(0.0);
    let boundary: Boundary = args
        .boundary
        .clone()
        .or(cfg.boundary)
        .unwrap_or_else(|| "periodic".into())
        .parse()
        .map_err(|e| invalid(format!("boundary: {e}")))?;

    let lat = Lattice1D::new(n, dx, boundary).map_err(|e| invalid(format!("lattice: {e}")))?;
    let x0 = lat.length() / 2.0;
    let bump = |x: f64| (-((x - x0) / width).powi(2)).exp();
    let xs = lat.positions();
    let phi: Vec<f64> = xs.iter().map(|&x| bump(x)).collect();
    // travelling profile: φ_t = −v φ_x
    let phi_t: Vec<f64> = xs
        .iter()
        .map(|&x| speed * 2.0 * (x - x0) / (width * width) * bump(x))
        .collect();
    let f0 = ScalarField::from_continuum(&lat, phi, phi_t, m, dt).map_err(runtime)?;
    let (f, trace) = kg_run(&lat, &f0, m, dt, steps, every).map_err(runtime)?;
    let drift = charge_conservation_audit(&trace).map_err(runtime)?;
    println!(
        "energy_initial={} energy_drift_abs={} energy_drift_rel={}",
        fmt17(drift.energy_initial),
        fmt17(drift.energy_abs),
        fmt17(drift.energy_rel)
    );
    println!(
        "momentum_initial={} momentum_drift_abs={}",
        fmt17(drift.momentum_initial),
        fmt17(drift.momentum_abs)
    );
    if let Some(dir) = &args.out {
        make_dir(dir)?;
        write_file(dir, "charges.csv", |w| trace.write_csv(w))?;
        write_file(dir, "snapshot.csv", |w| f.write_csv(&lat, w))?;
    }
    Ok(())
}

pub fn maxwell(args: &MaxwellArgs) -> Result<(), Failure> {
    let sc = load_optional(&args.scenario)?;
    let cfg = field_cfg(&sc, "maxwell")?;
    let env_seed = match std::env::var("NOETHERLAB_SEED") {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| invalid(format!("NOETHERLAB_SEED `{s}` is not an unsigned integer")))?,
        ),
        Err(_) => None,
    };
    let n = args.n.or(cfg.n).unwrap_or(16);
    let dx = positive("dx", args.dx.or(cfg.dx).unwrap_or(0.1))?;
    let dt = positive("dt", args.dt.or(cfg.dt).unwrap_or(0.9 * maxwell_cfl_limit(dx)))?;
    let steps = args.steps.or(cfg.steps).unwrap_or(1000);
    let every = args.every.or(cfg.every).unwrap_or(10);
    let seed = args.seed.or(env_seed).or(cfg.seed).unwrap_or(DEFAULT_SEED);

    let mut g = EmGrid::random_divergence_free([n, n, n], dx, seed).map_err(|e| invalid(format!("grid: {e}")))?;
    let trace = maxwell_run(&mut g, dt, steps, every).map_err(runtime)?;
    let (de, db) = trace.worst_div();
    println!("max_div_E={} max_div_B={}", fmt17(de), fmt17(db));
    println!("energy_drift={} seed={seed}", fmt17(trace.energy_drift()));
    if let Some(dir) = &args.out {
        make_dir(dir)?;
        write_file(dir, "em.csv", |w| trace.write_csv(w))?;
    }
    Ok(())
}
