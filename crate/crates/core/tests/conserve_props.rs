use noetherlab::conserve::{killing_residual, noether_charge, SymmetryField};
use noetherlab::integrate::{run, IntegratorSpec};
use noetherlab::mechsys::{LagrangianSystem, PhaseState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seed() -> u64 {
    std::env::var("NOETHERLAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20)
}

struct Case {
    sys: LagrangianSystem,
    field: SymmetryField,
    s0: PhaseState,
    label: String,
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.2 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

fn radial_case(rng: &mut ChaCha8Rng) -> Case {
    const POTENTIALS: [&str; 4] = ["-M/r", "0.5*k*r^2", "-M/r + 0.1*k*r^2", "0.25*k*r^4 - 0.5*r^2"];
    let v = POTENTIALS[rng.random_range(0..POTENTIALS.len())];
    let sys = LagrangianSystem::builder(["x", "y", "z"])
        .param("M", rng.random_range(0.5..2.0))
        .param("k", rng.random_range(0.5..2.0))
        .potential(v)
        .guard("r > 1e-6")
        .build()
        .unwrap();
    let w = unit(rng);
    let comps: Vec<String> = [
        format!("({})*z - ({})*y", w[1], w[2]),
        format!("({})*x - ({})*z", w[2], w[0]),
        format!("({})*y - ({})*x", w[0], w[1]),
    ]
    .into();
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    let field = SymmetryField::parse(&sys, "rotation", &refs).unwrap();
    let r = rng.random_range(0.8..1.5);
    let q = unit(rng).map(|x| r * x);
    let t = cross(&q, &unit(rng));
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    let speed = rng.random_range(0.7..1.1);
    let p: Vec<f64> = t.iter().zip(&q).map(|(a, b)| speed * a / tn + 0.1 * b).collect();
    Case {
        sys,
        field,
        s0: PhaseState::new(q.to_vec(), p),
        label: format!("V = {v}, ω = {w:?}"),
    }
}

fn translation_case(rng: &mut ChaCha8Rng) -> Case {
    let sys = LagrangianSystem::builder(["x", "y", "z"])
        .param("a", rng.random_range(0.5..2.0))
        .param("b", rng.random_range(0.1..1.0))
        .potential("a*cos(x - y) + b*(x - y)^2 + 0.5*z^2")
        .build()
        .unwrap();
    let s = rng.random_range(0.5..2.0);
    let comps = [format!("{s}"), format!("{s}"), "0".to_string()];
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    let field = SymmetryField::parse(&sys, "translation", &refs).unwrap();
    let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
    let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
    Case {
        sys,
        field,
        s0: PhaseState::new(q, p),
        label: "V(x − y, z), X = s(∂x + ∂y)".into(),
    }
}

fn charge_drift(c: &Case, dt: f64, t_end: f64) -> (f64, f64) {
    let steps = (t_end / dt).round() as usize;
    let traj = run(&c.sys, &c.s0, &IntegratorSpec::rk4(dt, steps).unwrap()).unwrap();
    assert!(traj.truncated.is_none(), "{}: {:?}", c.label, traj.truncated);
    let vs = traj.velocity_states(&c.sys).unwrap();
    let q0 = noether_charge(&c.sys, &c.field, &vs[0]).unwrap();
    let drift = vs
        .iter()
        .map(|s| (noether_charge(&c.sys, &c.field, s).unwrap() - q0).abs())
        .fold(0.0, f64::max);
    (drift, q0.abs().max(1.0))
}

#[test]
fn noether_charges_converge_at_fourth_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    for i in 0..20 {
        let case = if i % 4 == 3 {
            translation_case(&mut rng)
        } else {
            radial_case(&mut rng)
        };
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let k = killing_residual(&case.sys, &case.field, &pts).unwrap();
        assert!(k.is_symmetry(), "{}: {k:?}", case.label);

        let (coarse, scale) = charge_drift(&case, 0.02, 5.0);
        let (fine, _) = charge_drift(&case, 0.01, 5.0);
        // rk4 carries linear invariants exactly, so translations sit at round-off
        let floor = 1e-12 * scale;
        if coarse <= floor && fine <= floor {
            continue;
        }
        let ratio = coarse / fine;
        assert!(ratio >= 12.0, "{}: drift {coarse:e} → {fine:e}, ratio {ratio}", case.label);
    }
}

#[test]
fn killing_defect_is_linear_in_perturbation() {
    let sys = LagrangianSystem::builder(["x", "y", "z"])
        .param("M", 1.0)
        .potential("-M/r")
        .guard("r > 1e-6")
        .build()
        .unwrap();
    let pts = vec![vec![1.0, 0.5, -0.3], vec![-0.7, 1.2, 0.4], vec![0.2, -0.9, 1.1]];
    let base = killing_residual(&sys, &SymmetryField::rotation(&sys, 2).unwrap(), &pts).unwrap();
    assert!(base.metric <= 1e-9 && base.potential <= 1e-9, "{base:?}");
    let mut ratios = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let comps = [format!("-y + {eps}*x"), "x".to_string(), "0".to_string()];
        let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
        let field = SymmetryField::parse(&sys, "perturbed", &refs).unwrap();
        let k = killing_residual(&sys, &field, &pts).unwrap();
        assert!(!k.is_killing());
        ratios.push(k.metric / eps);
        assert!(k.potential > 0.0);
    }
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() < 1e-6, "{ratios:?}");
    }
    // L_X g for X = x∂x is 2 dx²
    assert!((ratios[0] - 2.0).abs() < 1e-6, "{ratios:?}");
}

fn direction(q: &[f64]) -> [f64; 3] {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    [q[0] / n, q[1] / n, q[2] / n]
}

#[test]
fn zero_angular_momentum_means_radial_motion() {
    let sys = LagrangianSystem::builder(["x", "y", "z"])
        .param("M", 1.0)
        .potential("-M/r")
        .guard("r > 1e-6")
        .build()
        .unwrap();
    let q = [1.0, 2.0, 0.5];
    let s0 = PhaseState::new(q, q.map(|x| 0.3 * x));
    let l = cross(&s0.q, &s0.p);
    assert!(l.iter().all(|c| c.abs() < 1e-12));
    let traj = run(&sys, &s0, &IntegratorSpec::rk4(1e-3, 3000).unwrap()).unwrap();
    let d0 = direction(&s0.q);
    let worst = traj
        .states
        .iter()
        .map(|s| {
            let d = direction(&s.q);
            (0..3).map(|i| (d[i] - d0[i]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "direction moved by {worst:e}");

    let tilted = PhaseState::new(q, [0.3, 0.6, 0.2]);
    let traj = run(&sys, &tilted, &IntegratorSpec::rk4(1e-3, 3000).unwrap()).unwrap();
    let d = direction(&traj.last().q);
    assert!((0..3).any(|i| (d[i] - d0[i]).abs() > 1e-3));
}
