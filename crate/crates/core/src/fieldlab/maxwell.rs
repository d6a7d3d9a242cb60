//! Vacuum Maxwell equations `∂ₜE = rot B`, `∂ₜB = −rot E` on a periodic Yee grid.
//!
//! Staggering, in units of the cell size:
//!
//! | component | offset |
//! |-----------|--------|
//! | `Ex` | `(½, 0, 0)` |
//! | `Ey` | `(0, ½, 0)` |
//! | `Ez` | `(0, 0, ½)` |
//! | `Bx` | `(0, ½, ½)` |
//! | `By` | `(½, 0, ½)` |
//! | `Bz` | `(½, ½, 0)` |
//!
//! `E` lives at integer times and `B` half a step behind, so `div E` sits on
//! nodes and `div B` on cell centres.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pairwise_sum;
use crate::error::{Error, Result};
use crate::integrate::fmt17;

#[derive(Debug, Clone, PartialEq)]
pub struct EmGrid {
    pub n: [usize; 3],
    pub dx: f64,
    pub e: [Vec<f64>; 3],
    /// `B` at `t − dt/2`.
    pub b: [Vec<f64>; 3],
    pub t: f64,
}

/// `dx/√3`.
pub fn maxwell_cfl_limit(dx: f64) -> f64 {
    dx / 3f64.sqrt()
}

fn check_dt(dx: f64, dt: f64) -> Result<()> {
    let limit = maxwell_cfl_limit(dx);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    Ok(())
}

/// Forward (`+1`) or backward (`−1`) difference of `f` along `axis`.
fn diff(n: [usize; 3], dx: f64, f: &[f64], axis: usize, dir: i32, out: &mut [f64]) {
    let [nx, ny, nz] = n;
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let mut c = [i, j, k];
                let here = (i * ny + j) * nz + k;
                c[axis] = if dir > 0 {
                    (c[axis] + 1) % n[axis]
                } else {
                    (c[axis] + n[axis] - 1) % n[axis]
                };
                let there = (c[0] * ny + c[1]) * nz + c[2];
                out[here] = if dir > 0 {
                    (f[there] - f[here]) / dx
                } else {
                    (f[here] - f[there]) / dx
                };
            }
        }
    }
}

/// `rot` with one-sided differences in direction `dir`.
fn curl(n: [usize; 3], dx: f64, f: &[Vec<f64>; 3], dir: i32) -> [Vec<f64>; 3] {
    let len = f[0].len();
    let d = |comp: usize, axis: usize| {
        let mut out = vec![0.0; len];
        diff(n, dx, &f[comp], axis, dir, &mut out);
        out
    };
    let (dzy, dyz) = (d(2, 1), d(1, 2));
    let (dxz, dzx) = (d(0, 2), d(2, 0));
    let (dyx, dxy) = (d(1, 0), d(0, 1));
    [
        dzy.iter().zip(&dyz).map(|(a, b)| a - b).collect(),
        dxz.iter().zip(&dzx).map(|(a, b)| a - b).collect(),
        dyx.iter().zip(&dxy).map(|(a, b)| a - b).collect(),
    ]
}

fn div(n: [usize; 3], dx: f64, f: &[Vec<f64>; 3], dir: i32) -> Vec<f64> {
    let len = f[0].len();
    let mut total = vec![0.0; len];
    let mut tmp = vec![0.0; len];
    for axis in 0..3 {
        diff(n, dx, &f[axis], axis, dir, &mut tmp);
        for (t, v) in total.iter_mut().zip(&tmp) {
            *t += v;
        }
    }
    total
}

fn sq_norm(f: &[Vec<f64>; 3]) -> f64 {
    f.iter()
        .map(|c| pairwise_sum(&c.iter().map(|v| v * v).collect::<Vec<_>>()))
        .sum()
}

impl EmGrid {
    pub fn zeros(n: [usize; 3], dx: f64) -> Result<Self> {
        if n.iter().any(|&m| m < 2) {
            return Err(Error::Invalid(format!("grid needs at least 2 cells per axis, got {n:?}")));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Invalid(format!("dx must be positive, got {dx}")));
        }
        let len = n[0] * n[1] * n[2];
        Ok(EmGrid {
            n,
            dx,
            e: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            b: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            t: 0.0,
        })
    }

    pub fn cubic(n: usize, dx: f64) -> Result<Self> {
        Self::zeros([n, n, n], dx)
    }

    pub fn len(&self) -> usize {
        self.e[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    /// Plane wave `E = (0, f(x − t), 0)`, `B = (0, 0, f(x − t))`, with `B`
    /// sampled at `t = −dt/2`.
    pub fn plane_wave<F>(n: [usize; 3], dx: f64, dt: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let mut g = Self::zeros(n, dx)?;
        for i in 0..n[0] {
            for j in 0..n[1] {
                for k in 0..n[2] {
                    let idx = g.index(i, j, k);
                    let x = i as f64 * dx;
                    g.e[1][idx] = f(x);
                    g.b[2][idx] = f(x + 0.5 * dx + 0.5 * dt);
                }
            }
        }
        Ok(g)
    }

    /// Random data with zero discrete divergence: `E = rot⁻A` and `B = rot⁺A′`
    /// for random staggered potentials `A`, `A′`.
    pub fn random_divergence_free(n: [usize; 3], dx: f64, seed: u64) -> Result<Self> {
        let mut g = Self::zeros(n, dx)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = g.len();
        let mut draw = || -> [Vec<f64>; 3] {
            [0, 1, 2].map(|_| (0..len).map(|_| rng.random_range(-1.0..1.0) * dx).collect())
        };
        let a = draw();
        let a2 = draw();
        g.e = curl(n, dx, &a, -1);
        g.b = curl(n, dx, &a2, 1);
        Ok(g)
    }

    /// `div E` on nodes (backward differences).
    pub fn div_e(&self) -> Vec<f64> {
        div(self.n, self.dx, &self.e, -1)
    }

    /// `div B` on cell centres (forward differences).
    pub fn div_b(&self) -> Vec<f64> {
        div(self.n, self.dx, &self.b, 1)
    }

    pub fn max_div(&self) -> (f64, f64) {
        let m = |v: Vec<f64>| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (m(self.div_e()), m(self.div_b()))
    }

    /// `dx³ (½|E|² + ½ B⁻·B⁺)` with `B⁺ = B − dt rot E`; exactly conserved
    /// by [`maxwell_step`].
    pub fn energy(&self, dt: f64) -> f64 {
        let ce = curl(self.n, self.dx, &self.e, 1);
        let mut cross = 0.0;
        for c in 0..3 {
            let p: Vec<f64> = self.b[c]
                .iter()
                .zip(&ce[c])
                .map(|(b, r)| b * (b - dt * r))
                .collect();
            cross += pairwise_sum(&p);
        }
        self.dx.powi(3) * 0.5 * (sq_norm(&self.e) + cross)
    }

    /// Plain `dx³ Σ (|E|² + |B|²)/2` with the stored, staggered `B`.
    pub fn naive_energy(&self) -> f64 {
        self.dx.powi(3) * 0.5 * (sq_norm(&self.e) + sq_norm(&self.b))
    }
}

/// Yee update: `B ← B − dt rot⁺E`, then `E ← E + dt rot⁻B`.
pub fn maxwell_step(grid: &mut EmGrid, dt: f64) -> Result<()> {
    check_dt(grid.dx, dt)?;
    let ce = curl(grid.n, grid.dx, &grid.e, 1);
    for c in 0..3 {
        for (b, r) in grid.b[c].iter_mut().zip(&ce[c]) {
            *b -= dt * r;
        }
    }
    let cb = curl(grid.n, grid.dx, &grid.b, -1);
    for c in 0..3 {
        for (e, r) in grid.e[c].iter_mut().zip(&cb[c]) {
            *e += dt * r;
        }
    }
    grid.t += dt;
    Ok(())
}

/// Constraint and energy monitor samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmTrace {
    pub t: Vec<f64>,
    pub max_div_e: Vec<f64>,
    pub max_div_b: Vec<f64>,
    pub energy: Vec<f64>,
}

impl EmTrace {
    fn record(&mut self, g: &EmGrid, dt: f64) {
        let (de, db) = g.max_div();
        self.t.push(g.t);
        self.max_div_e.push(de);
        self.max_div_b.push(db);
        self.energy.push(g.energy(dt));
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn worst_div(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(*b));
        (m(&self.max_div_e), m(&self.max_div_b))
    }

    /// `max |W(t) − W(0)| / |W(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let Some(&w0) = self.energy.first() else {
            return 0.0;
        };
        let d = self.energy.iter().map(|w| (w - w0).abs()).fold(0.0, f64::max);
        if w0 != 0.0 {
            d / w0.abs()
        } else {
            d
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,maxdivE,maxdivB,energy")?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt17(self.t[i]),
                fmt17(self.max_div_e[i]),
                fmt17(self.max_div_b[i]),
                fmt17(self.energy[i])
            )?;
        }
        Ok(())
    }
}

/// Step `steps` times, sampling the monitors every `every` steps and at both ends.
pub fn maxwell_run(grid: &mut EmGrid, dt: f64, steps: usize, every: usize) -> Result<EmTrace> {
    check_dt(grid.dx, dt)?;
    let every = every.max(1);
    let mut trace = EmTrace::default();
    trace.record(grid, dt);
    for s in 1..=steps {
        maxwell_step(grid, dt)?;
        if s % every == 0 || s == steps {
            trace.record(grid, dt);
        }
    }
    Ok(trace)
}
