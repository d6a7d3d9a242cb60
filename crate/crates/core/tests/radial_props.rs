use std::f64::consts::PI;

use noetherlab::integrate::{run, IntegratorSpec, Trajectory};
use noetherlab::mechsys::{LagrangianSystem, PhaseState};
use noetherlab::radial::{
    kepler_elements, return_period, swept_area, turning_points, v_eff_minimum, RadialPotential,
};

fn planar_kepler(m: f64) -> LagrangianSystem {
    LagrangianSystem::builder(["x", "y"])
        .param("M", m)
        .potential("-M/sqrt(x^2 + y^2)")
        .guard("x^2 + y^2 > 1e-12")
        .build()
        .unwrap()
}

/// Start at perihelion on the x axis with tangential speed `L / r_per`.
fn orbit(m: f64, l: f64, e: f64, dt: f64, periods: f64) -> Trajectory {
    let el = kepler_elements(m, l, e).unwrap();
    let s0 = PhaseState::new([el.r_per, 0.0], [0.0, l / el.r_per]);
    let steps = (periods * el.period.unwrap() / dt).ceil() as usize;
    let traj = run(&planar_kepler(m), &s0, &IntegratorSpec::rk4(dt, steps).unwrap()).unwrap();
    assert!(traj.truncated.is_none());
    traj
}

fn radii(traj: &Trajectory) -> Vec<f64> {
    traj.states.iter().map(|s| s.q[0].hypot(s.q[1])).collect()
}

#[test]
fn turning_points_elements_and_orbits_agree() {
    for &(m, l) in &[(1.0, 1.0), (2.0, 1.0), (1.0, 1.5)] {
        let f_min = -m * m / (2.0 * l * l);
        for frac in [0.8, 0.5, 0.2] {
            let e = frac * f_min;
            let v = RadialPotential::newton(m);
            let roots = turning_points(&v, l, e, (1e-3, 1e3)).unwrap();
            assert_eq!(roots.len(), 2, "M={m} L={l} E={e}: {roots:?}");
            let el = kepler_elements(m, l, e).unwrap();
            let traj = orbit(m, l, e, 1e-3, 1.05);
            let r = radii(&traj);
            let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
            let tol = 1e-6;
            assert!((roots[0] - el.r_per).abs() <= tol, "roots vs elements");
            assert!((roots[1] - el.r_aph.unwrap()).abs() <= tol, "roots vs elements");
            assert!((lo - el.r_per).abs() <= tol, "orbit min {lo} vs {}", el.r_per);
            assert!((hi - el.r_aph.unwrap()).abs() <= tol, "orbit max {hi} vs {:?}", el.r_aph);
        }
    }
}

#[test]
fn equal_areas_in_equal_times() {
    let (m, l) = (1.0, 1.0);
    let dt = 1e-3;
    let traj = orbit(m, l, -0.25, dt, 1.0);
    let area = swept_area(&traj).unwrap();
    // dA/dt over ten-step windows
    let mut worst = 0.0f64;
    for k in (0..traj.len() - 10).step_by(10) {
        let rate = (area.cumulative[k + 10] - area.cumulative[k]) / (traj.t[k + 10] - traj.t[k]);
        worst = worst.max((rate - 0.5 * l).abs());
    }
    assert!(worst <= 1e-6, "max |dA/dt − L/2| = {worst:e}");
}

#[test]
fn measured_periods_follow_three_halves_law() {
    let m = 1.0;
    for a in [1.0, 2.0, 4.0] {
        // E = −M/2a; take L for ε = 0.5
        let e = -m / (2.0 * a);
        let l = (m * a * (1.0 - 0.25f64)).sqrt();
        let t_expect = 2.0 * PI * a.powf(1.5) / m.sqrt();
        let traj = orbit(m, l, e, t_expect / 1e5, 2.2);
        let t = return_period(&traj).unwrap();
        let rel = (t - t_expect).abs() / t_expect;
        assert!(rel <= 1e-4, "a={a}: {t} vs {t_expect} ({rel:e})");
    }
}

#[test]
fn effective_potential_minimum_at_l_squared_over_m() {
    for &(m, l) in &[(1.0, 1.0), (2.0, 0.5), (0.3, 2.0), (5.0, 3.0)] {
        let v = RadialPotential::newton(m);
        let r = v_eff_minimum(&v, l, (1e-3, 1e3)).unwrap();
        let want = l * l / m;
        assert!((r - want).abs() <= 1e-10 * want.max(1.0), "M={m} L={l}: {r} vs {want}");
    }
}
