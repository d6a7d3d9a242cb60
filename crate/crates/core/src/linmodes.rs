//! Equilibria, the quadratic approximation `L₂ = ½ q̂ᵀαq̂ − ½ qᵀΩq`, and
//! characteristic oscillations.

use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::integrate::fmt17;
use crate::mechsys::{det_tol, LagrangianSystem, VelocityState};

/// `‖∇V‖∞` accepted as an equilibrium.
pub const NEWTON_TOL: f64 = 1e-10;
/// Eigenvalues with `|λ| ≤ EIG_TOL_REL · ‖Ω‖` count as zero.
pub const EIG_TOL_REL: f64 = 1e-8;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// Ω positive definite.
    Stable,
    /// Ω negative definite.
    Unstable,
    /// Ω singular.
    Degenerate,
    /// Ω non-singular and indefinite.
    Saddle,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Degenerate => "degenerate",
            Stability::Saddle => "saddle",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub q0: Vec<f64>,
    pub grad_norm: f64,
    pub classification: Stability,
    pub iterations: usize,
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.amax()
}

/// Sign pattern of a symmetric matrix with the scale-aware zero test.
pub fn classify(omega: &DMatrix<f64>) -> Stability {
    let eig = SymmetricEigen::new(omega.clone()).eigenvalues;
    let tol = EIG_TOL_REL * eig.amax();
    if eig.iter().any(|l| l.abs() <= tol) {
        Stability::Degenerate
    } else if eig.iter().all(|l| *l > 0.0) {
        Stability::Stable
    } else if eig.iter().all(|l| *l < 0.0) {
        Stability::Unstable
    } else {
        Stability::Saddle
    }
}

/// Newton on `∇V = 0` from `guess`, falling back to backtracking gradient
/// steps where the Hessian is singular. Iteration continues past the
/// gradient tolerance while Newton still moves the point, so flat
/// (degenerate) minima are approached closely before classification.
pub fn find_equilibrium(sys: &LagrangianSystem, guess: &[f64]) -> Result<Equilibrium> {
    sys.check_admissible(guess)?;
    let mut q = DVector::from_column_slice(guess);
    let mut jet = sys.potential_jet(q.as_slice())?;
    let gnorm = |g: &[f64]| g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let g = DVector::from_column_slice(&jet.gradient);
        let gn = g.amax();
        let h = jet.hessian_matrix();
        let det = h.determinant();
        let newton = if det != 0.0 && det.abs() >= det_tol(&h) {
            h.lu().solve(&g)
        } else {
            None
        };
        let step = match newton {
            Some(s) => s,
            None => {
                if gn <= NEWTON_TOL {
                    break;
                }
                // steepest descent on |∇V| with halving
                let mut alpha = 1.0;
                let mut accepted = None;
                while alpha > 1e-12 {
                    for dir in [1.0, -1.0] {
                        let trial = &q - &g * (alpha * dir);
                        if sys.is_admissible(trial.as_slice()) {
                            if let Ok(j) = sys.potential_jet(trial.as_slice()) {
                                if gnorm(&j.gradient) < gn {
                                    accepted = Some(&g * (alpha * dir));
                                    break;
                                }
                            }
                        }
                    }
                    if accepted.is_some() {
                        break;
                    }
                    alpha *= 0.5;
                }
                match accepted {
                    Some(s) => s,
                    None => break,
                }
            }
        };
        let scale = q.amax().max(1.0);
        if gn <= NEWTON_TOL && step.amax() <= 1e-13 * scale {
            break;
        }
        let next = &q - &step;
        if !sys.is_admissible(next.as_slice()) {
            break;
        }
        let nj = sys.potential_jet(next.as_slice())?;
        if gn <= NEWTON_TOL && gnorm(&nj.gradient) > gn {
            break;
        }
        q = next;
        jet = nj;
        iterations += 1;
    }
    let grad_norm = gnorm(&jet.gradient);
    if !(grad_norm <= NEWTON_TOL) {
        return Err(Error::NoConvergence {
            iterations,
            residual: grad_norm,
        });
    }
    Ok(Equilibrium {
        classification: classify(&jet.hessian_matrix()),
        q0: q.as_slice().to_vec(),
        grad_norm,
        iterations,
    })
}

/// `α` (velocity Hessian of L at `(q0, 0)`) and `Ω` (Hessian of V at `q0`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticApprox {
    pub alpha: DMatrix<f64>,
    pub omega: DMatrix<f64>,
}

pub fn quadratic_approx(sys: &LagrangianSystem, q0: &[f64]) -> Result<QuadraticApprox> {
    sys.check_admissible(q0)?;
    let alpha = sys.velocity_hessian(&VelocityState::new(q0.to_vec(), vec![0.0; sys.dim()]))?;
    if alpha.clone().cholesky().is_none() {
        return Err(Error::Domain(
            "kinetic matrix α is not positive definite at the equilibrium".into(),
        ));
    }
    let omega = sys.potential_jet(q0)?.hessian_matrix();
    Ok(QuadraticApprox { alpha, omega })
}

/// Solutions of `Ωξ = λαξ`, ascending in `λ`, with `ξᵢᵀαξⱼ = δᵢⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub alpha: DMatrix<f64>,
    pub omega_mat: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Columns are the modes `ξₖ`.
    pub eigenvectors: DMatrix<f64>,
    /// `√λₖ` for positive eigenvalues.
    pub frequencies: Vec<Option<f64>>,
    /// `|λ|` at or below this is treated as zero.
    pub zero_tol: f64,
}

impl ModeSet {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn mode(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `max_k ‖Ωξₖ − λₖαξₖ‖∞`.
    pub fn residual(&self) -> f64 {
        (0..self.dim())
            .map(|k| {
                let x = self.mode(k);
                (&self.omega_mat * &x - &self.alpha * &x * self.eigenvalues[k]).amax()
            })
            .fold(0.0, f64::max)
    }

    /// `max |ξᵀαξ − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.alpha * &self.eigenvectors;
        (g - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// `mode,lambda,omega,xi_1..xi_n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.dim();
        let mut header = vec!["mode".to_string(), "lambda".into(), "omega".into()];
        header.extend((1..=n).map(|i| format!("xi_{i}")));
        writeln!(w, "{}", header.join(","))?;
        for k in 0..n {
            write!(
                w,
                "{},{},{}",
                k + 1,
                fmt17(self.eigenvalues[k]),
                fmt17(self.frequencies[k].unwrap_or(f64::NAN))
            )?;
            for i in 0..n {
                write!(w, ",{}", fmt17(self.eigenvectors[(i, k)]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn normal_modes(alpha: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<ModeSet> {
    let n = alpha.nrows();
    if alpha.ncols() != n || omega.nrows() != n || omega.ncols() != n {
        return Err(Error::dim("matrix size", omega.nrows(), n));
    }
    let chol = alpha
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("α is not symmetric positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("α is numerically singular".into()))?;
    let mut w = &linv * omega * linv.transpose();
    w = (&w + w.transpose()) * 0.5;
    let eig = SymmetricEigen::new(w);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let back = linv.transpose();
    let mut vecs = DMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let mut x = &back * eig.eigenvectors.column(j);
        let big = x.amax();
        if let Some(i) = x.iter().position(|v| v.abs() >= big * (1.0 - 1e-9)) {
            if x[i] < 0.0 {
                x = -x;
            }
        }
        vecs.set_column(k, &x);
        vals.push(eig.eigenvalues[j]);
    }
    let zero_tol = EIG_TOL_REL * spectral_norm(omega);
    let frequencies = vals
        .iter()
        .map(|l| if *l > zero_tol { Some(l.sqrt()) } else { None })
        .collect();
    Ok(ModeSet {
        alpha: alpha.clone(),
        omega_mat: omega.clone(),
        eigenvalues: vals,
        eigenvectors: vecs,
        frequencies,
        zero_tol,
    })
}

/// Exact solution of `αq̈ = −Ωq` by superposition of modes.
pub fn mode_solution(modes: &ModeSet, q_init: &[f64], qdot_init: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = modes.dim();
    if q_init.len() != n {
        return Err(Error::dim("q_init", q_init.len(), n));
    }
    if qdot_init.len() != n {
        return Err(Error::dim("qdot_init", qdot_init.len(), n));
    }
    let proj = modes.eigenvectors.transpose() * &modes.alpha;
    let a = &proj * DVector::from_column_slice(q_init);
    let b = &proj * DVector::from_column_slice(qdot_init);
    let mut q = DVector::zeros(n);
    for k in 0..n {
        let l = modes.eigenvalues[k];
        let c = if l > modes.zero_tol {
            let w = l.sqrt();
            a[k] * (w * t).cos() + b[k] / w * (w * t).sin()
        } else if l < -modes.zero_tol {
            let w = (-l).sqrt();
            a[k] * (w * t).cosh() + b[k] / w * (w * t).sinh()
        } else {
            a[k] + b[k] * t
        };
        q += modes.eigenvectors.column(k) * c;
    }
    Ok(q.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(coords: &[&str], v: &str) -> LagrangianSystem {
        LagrangianSystem::builder(coords.iter().copied()).param("k", 0.5).potential(v).build().unwrap()
    }

    #[test]
    fn equilibrium_examples() {
        let e = find_equilibrium(&sys(&["x"], "0.5*x^2"), &[0.7]).unwrap();
        assert!(e.q0[0].abs() < 1e-12);
        assert_eq!(e.classification, Stability::Stable);
        let e = find_equilibrium(&sys(&["x"], "-0.5*x^2"), &[0.7]).unwrap();
        assert_eq!(e.classification, Stability::Unstable);
        let e = find_equilibrium(&sys(&["x", "y"], "x^2 - y^2"), &[0.3, -0.2]).unwrap();
        assert_eq!(e.classification, Stability::Saddle);
    }

    #[test]
    fn stability_zoo() {
        let cases = [
            (vec!["x", "y"], "x^2 + 2*y^2 + 0.5*x*y", Stability::Stable),
            (vec!["x", "y"], "-(x^2 + y^2)", Stability::Unstable),
            (vec!["x", "y"], "x^2 - 3*y^2", Stability::Saddle),
            (vec!["x", "y"], "x^4 + y^2", Stability::Degenerate),
            (vec!["x"], "1 - cos(x)", Stability::Stable),
            (vec!["x"], "cos(x)", Stability::Unstable),
        ];
        for (coords, v, want) in cases {
            let s = sys(&coords, v);
            let guess = vec![0.2; coords.len()];
            let e = find_equilibrium(&s, &guess).unwrap();
            assert_eq!(e.classification, want, "{v}: {e:?}");
            assert!(e.grad_norm <= NEWTON_TOL);
        }
    }

    #[test]
    fn pendula_quadratic_form() {
        let s = sys(&["q1", "q2"], "0.5*q1^2 + 0.5*q2^2 + k/2*(q1 - q2)^2");
        let qa = quadratic_approx(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(qa.alpha, DMatrix::identity(2, 2));
        assert_eq!(qa.omega, DMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, 1.5]));
        let m = normal_modes(&qa.alpha, &qa.omega).unwrap();
        assert!((m.frequencies[0].unwrap() - 1.0).abs() < 1e-14);
        assert!((m.frequencies[1].unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        assert!((m.mode(0) - DVector::from_column_slice(&[h, h])).amax() < 1e-14);
        assert!((m.mode(1) - DVector::from_column_slice(&[h, -h])).amax() < 1e-14);
    }

    #[test]
    fn one_dimensional_frequency() {
        let s = LagrangianSystem::builder(["x"]).euclidean(2.0).potential("0.5*8*x^2").build().unwrap();
        let qa = quadratic_approx(&s, &[0.0]).unwrap();
        assert_eq!((qa.alpha[(0, 0)], qa.omega[(0, 0)]), (2.0, 8.0));
        let m = normal_modes(&qa.alpha, &qa.omega).unwrap();
        assert!((m.frequencies[0].unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn free_particle_is_degenerate() {
        let s = LagrangianSystem::builder(["x", "y"]).build().unwrap();
        let qa = quadratic_approx(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(classify(&qa.omega), Stability::Degenerate);
    }

    #[test]
    fn mode_examples() {
        let m = normal_modes(&DMatrix::identity(2, 2), &DMatrix::from_diagonal(&DVector::from_column_slice(&[4.0, 9.0]))).unwrap();
        assert_eq!(m.frequencies, vec![Some(2.0), Some(3.0)]);
        assert_eq!(m.eigenvectors, DMatrix::identity(2, 2));
        let alpha = DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 2.0]));
        let omega = DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 8.0]));
        let m = normal_modes(&alpha, &omega).unwrap();
        assert!((m.eigenvalues[0] - 1.0).abs() < 1e-14 && (m.eigenvalues[1] - 4.0).abs() < 1e-14);
        assert!(m.residual() <= 1e-10 * 8.0);
        assert!(m.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn non_spd_alpha_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(normal_modes(&a, &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn in_phase_pendula() {
        let omega = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, 1.5]);
        let m = normal_modes(&DMatrix::identity(2, 2), &omega).unwrap();
        for &t in &[0.0, 0.7, 3.0, 11.5] {
            let q = mode_solution(&m, &[1.0, 1.0], &[0.0, 0.0], t).unwrap();
            assert!((q[0] - t.cos()).abs() < 1e-13 && (q[1] - t.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn unstable_and_free_branches() {
        let omega = DMatrix::from_diagonal(&DVector::from_column_slice(&[-4.0, 0.0]));
        let m = normal_modes(&DMatrix::identity(2, 2), &omega).unwrap();
        let q = mode_solution(&m, &[1.0, 1.0], &[0.0, 2.0], 0.5).unwrap();
        assert!((q[0] - 1f64.cosh()).abs() < 1e-13);
        assert!((q[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn mode_csv() {
        let m = normal_modes(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2)).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("mode,lambda,omega,xi_1,xi_2\n1,"));
    }
}
