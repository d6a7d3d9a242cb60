//! Browser bindings for three noetherlab operations: a Kepler orbit against
//! its conic, coupled-pendula normal modes, and a Klein-Gordon lattice that
//! steps on demand. Errors cross the boundary as strings.

use noetherlab::fieldlab::{kg_cfl_limit, kg_step, noether_charges, Boundary, Lattice1D, ScalarField};
use noetherlab::integrate::{run, IntegratorSpec};
use noetherlab::linmodes::{find_equilibrium, mode_solution, normal_modes, quadratic_approx, ModeSet};
use noetherlab::mechsys::{LagrangianSystem, PhaseState};
use noetherlab::radial::{kepler_elements, orbit_trace};
use wasm_bindgen::prelude::*;

fn text(e: noetherlab::Error) -> String {
    e.to_string()
}

/// Integrated orbit plus the exact conic it should lie on.
#[wasm_bindgen]
pub struct KeplerOrbit {
    xy: Vec<f64>,
    conic: Vec<f64>,
    eps: f64,
    period: f64,
    energy_drift: f64,
    truncated: bool,
}

#[wasm_bindgen]
impl KeplerOrbit {
    /// Start at perihelion and run rk4 for one period (or `horizon` time
    /// units when the orbit is open).
    #[wasm_bindgen(constructor)]
    pub fn new(m: f64, l: f64, e: f64, dt: f64, horizon: f64) -> Result<KeplerOrbit, String> {
        let el = kepler_elements(m, l, e).map_err(text)?;
        let t_end = el.period.unwrap_or(horizon);
        if !(dt > 0.0) || !(t_end > 0.0) {
            return Err("dt and the horizon must be positive".into());
        }
        let steps = (t_end / dt).ceil() as usize;
        let sys = LagrangianSystem::builder(["x", "y"])
            .param("M", m)
            .potential("-M/sqrt(x^2 + y^2)")
            .guard("x^2 + y^2 > 1e-12")
            .build()
            .map_err(text)?;
        let s0 = PhaseState::new([el.r_per, 0.0], [0.0, l / el.r_per]);
        let spec = IntegratorSpec::rk4(t_end / steps as f64, steps).map_err(text)?;
        let traj = run(&sys, &s0, &spec).map_err(text)?;
        let e0 = sys.hamiltonian(&s0).map_err(text)?;
        let mut energy_drift = 0.0f64;
        let mut xy = Vec::with_capacity(2 * traj.len());
        for s in &traj.states {
            energy_drift = energy_drift.max((sys.hamiltonian(s).map_err(text)? - e0).abs());
            xy.extend_from_slice(&s.q);
        }
        let phis: Vec<f64> = (0..=360).map(|i| (i as f64).to_radians()).collect();
        let conic = orbit_trace(&el, &phis)
            .points
            .iter()
            .flat_map(|p| [p.r * p.phi.cos(), p.r * p.phi.sin()])
            .collect();
        Ok(KeplerOrbit {
            xy,
            conic,
            eps: el.eps,
            period: el.period.unwrap_or(f64::NAN),
            energy_drift,
            truncated: traj.truncated.is_some(),
        })
    }

    /// Interleaved `x, y` samples of the integrated orbit.
    pub fn xy(&self) -> Vec<f64> {
        self.xy.clone()
    }

    /// Interleaved `x, y` samples of `r = p/(1 + ε cos φ)`.
    pub fn conic(&self) -> Vec<f64> {
        self.conic.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// NaN for open orbits.
    #[wasm_bindgen(getter)]
    pub fn period(&self) -> f64 {
        self.period
    }

    #[wasm_bindgen(getter)]
    pub fn energy_drift(&self) -> f64 {
        self.energy_drift
    }

    #[wasm_bindgen(getter)]
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Largest distance from an integrated sample to the conic `r(φ)`.
    pub fn conic_error(&self, m: f64, l: f64, e: f64) -> Result<f64, String> {
        let el = kepler_elements(m, l, e).map_err(text)?;
        Ok(self
            .xy
            .chunks(2)
            .map(|p| {
                let (r, phi) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
                (r - el.p / (1.0 + el.eps * phi.cos())).abs()
            })
            .fold(0.0, f64::max))
    }
}

/// Two unit pendula coupled by a spring of stiffness `k`.
#[wasm_bindgen]
pub struct Pendula {
    modes: ModeSet,
}

#[wasm_bindgen]
impl Pendula {
    #[wasm_bindgen(constructor)]
    pub fn new(k: f64) -> Result<Pendula, String> {
        let sys = LagrangianSystem::builder(["q1", "q2"])
            .param("k", k)
            .potential("2 - cos(q1) - cos(q2) + k/2*(q1 - q2)^2")
            .build()
            .map_err(text)?;
        let eq = find_equilibrium(&sys, &[0.1, -0.1]).map_err(text)?;
        let qa = quadratic_approx(&sys, &eq.q0).map_err(text)?;
        let modes = normal_modes(&qa.alpha, &qa.omega).map_err(text)?;
        Ok(Pendula { modes })
    }

    /// Mode frequencies, ascending; NaN for non-oscillatory modes.
    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.frequencies.iter().map(|w| w.unwrap_or(f64::NAN)).collect()
    }

    /// Column `k` of the mode matrix.
    pub fn shape(&self, k: usize) -> Vec<f64> {
        if k >= self.modes.dim() {
            return Vec::new();
        }
        self.modes.mode(k).iter().copied().collect()
    }

    /// Linearized motion from rest at `(q1, q2)`: interleaved `t, q1, q2`.
    pub fn motion(&self, q1: f64, q2: f64, t_end: f64, samples: usize) -> Result<Vec<f64>, String> {
        let samples = samples.max(2);
        let mut out = Vec::with_capacity(3 * samples);
        for i in 0..samples {
            let t = t_end * i as f64 / (samples - 1) as f64;
            let q = mode_solution(&self.modes, &[q1, q2], &[0.0, 0.0], t).map_err(text)?;
            out.extend_from_slice(&[t, q[0], q[1]]);
        }
        Ok(out)
    }
}

/// Periodic Klein-Gordon lattice seeded with a Gaussian packet.
#[wasm_bindgen]
pub struct KgLattice {
    lattice: Lattice1D,
    field: ScalarField,
    m: f64,
    dt: f64,
    e0: f64,
}

#[wasm_bindgen]
impl KgLattice {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, dx: f64, m: f64, dt: f64, width: f64, speed: f64) -> Result<KgLattice, String> {
        let lattice = Lattice1D::new(n, dx, Boundary::Periodic).map_err(text)?;
        let limit = kg_cfl_limit(&lattice, m);
        if !(dt > 0.0 && dt <= limit) {
            return Err(format!("dt = {dt} must lie in (0, {limit}]"));
        }
        let x0 = lattice.length() / 2.0;
        let bump = |x: f64| (-((x - x0) / width).powi(2)).exp();
        let xs = lattice.positions();
        let phi = xs.iter().map(|&x| bump(x)).collect();
        let phi_t = xs
            .iter()
            .map(|&x| speed * 2.0 * (x - x0) / (width * width) * bump(x))
            .collect();
        let field = ScalarField::from_continuum(&lattice, phi, phi_t, m, dt).map_err(text)?;
        let e0 = noether_charges(&lattice, &field, m, dt).map_err(text)?.energy;
        Ok(KgLattice { lattice, field, m, dt, e0 })
    }

    pub fn step(&mut self, k: usize) -> Result<(), String> {
        for _ in 0..k {
            self.field = kg_step(&self.lattice, &self.field, self.m, self.dt).map_err(text)?;
        }
        Ok(())
    }

    pub fn phi(&self) -> Vec<f64> {
        self.field.phi.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn time(&self) -> f64 {
        self.field.t
    }

    pub fn energy(&self) -> Result<f64, String> {
        Ok(noether_charges(&self.lattice, &self.field, self.m, self.dt).map_err(text)?.energy)
    }

    pub fn momentum(&self) -> Result<f64, String> {
        Ok(noether_charges(&self.lattice, &self.field, self.m, self.dt).map_err(text)?.momentum)
    }

    /// `|E(t) − E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> Result<f64, String> {
        Ok((self.energy()? - self.e0).abs() / self.e0.abs().max(f64::MIN_POSITIVE))
    }
}
