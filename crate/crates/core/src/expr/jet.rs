//! Forward-mode number types carried through compiled expressions.

/// Value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderJet {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Value, gradient and symmetric Hessian (packed upper triangle).
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderJet {
    pub value: f64,
    pub gradient: Vec<f64>,
    upper: Vec<f64>,
}

impl SecondOrderJet {
    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        let n = self.dim();
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.upper[upper_index(n, i, j)]
    }

    /// Dense row-major copy of the Hessian.
    pub fn hessian_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.hessian(i, j)).collect())
            .collect()
    }

    pub fn hessian_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.hessian(i, j))
    }

    /// Build from parts; `hessian` must be square of the gradient's size and
    /// is symmetrised.
    pub fn from_parts(value: f64, gradient: Vec<f64>, hessian: &[Vec<f64>]) -> Self {
        let n = gradient.len();
        let mut upper = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in i..n {
                upper[upper_index(n, i, j)] = 0.5 * (hessian[i][j] + hessian[j][i]);
            }
        }
        SecondOrderJet {
            value,
            gradient,
            upper,
        }
    }
}

#[inline]
pub(crate) fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    // row i starts after sum_{r<i} (n - r) entries
    i * n - (i * i.saturating_sub(1)) / 2 + (j - i)
}

/// Arithmetic needed to push a number type through a compiled tree.
pub(crate) trait Number: Clone {
    /// Whether derivatives are tracked; non-smooth primitives are rejected then.
    const DIFFERENTIATED: bool;

    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
    /// Compose with a scalar function whose value and first two derivatives
    /// at `self.value()` are given.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
}

impl Number for f64 {
    const DIFFERENTIATED: bool = false;

    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
}

impl FirstOrderJet {
    pub(crate) fn seed(n: usize, i: usize, value: f64) -> Self {
        let mut gradient = vec![0.0; n];
        gradient[i] = 1.0;
        FirstOrderJet { value, gradient }
    }
}

impl Number for FirstOrderJet {
    const DIFFERENTIATED: bool = true;

    fn lift(&self, c: f64) -> Self {
        FirstOrderJet {
            value: c,
            gradient: vec![0.0; self.gradient.len()],
        }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, o: &Self) -> Self {
        FirstOrderJet {
            value: self.value + o.value,
            gradient: self.gradient.iter().zip(&o.gradient).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        FirstOrderJet {
            value: self.value - o.value,
            gradient: self.gradient.iter().zip(&o.gradient).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self.value, o.value);
        FirstOrderJet {
            value: a * b,
            gradient: self
                .gradient
                .iter()
                .zip(&o.gradient)
                .map(|(ga, gb)| a * gb + b * ga)
                .collect(),
        }
    }
    fn scale(&self, c: f64) -> Self {
        FirstOrderJet {
            value: self.value * c,
            gradient: self.gradient.iter().map(|g| g * c).collect(),
        }
    }
    fn chain(&self, f0: f64, f1: f64, _f2: f64) -> Self {
        FirstOrderJet {
            value: f0,
            gradient: self.gradient.iter().map(|g| g * f1).collect(),
        }
    }
}

impl SecondOrderJet {
    pub(crate) fn seed(n: usize, i: usize, value: f64) -> Self {
        let mut gradient = vec![0.0; n];
        gradient[i] = 1.0;
        SecondOrderJet {
            value,
            gradient,
            upper: vec![0.0; n * (n + 1) / 2],
        }
    }

    fn zip_upper(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.upper.iter().zip(&o.upper).map(|(a, b)| f(*a, *b)).collect()
    }
}

impl Number for SecondOrderJet {
    const DIFFERENTIATED: bool = true;

    fn lift(&self, c: f64) -> Self {
        SecondOrderJet {
            value: c,
            gradient: vec![0.0; self.gradient.len()],
            upper: vec![0.0; self.upper.len()],
        }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, o: &Self) -> Self {
        SecondOrderJet {
            value: self.value + o.value,
            gradient: self.gradient.iter().zip(&o.gradient).map(|(a, b)| a + b).collect(),
            upper: self.zip_upper(o, |a, b| a + b),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        SecondOrderJet {
            value: self.value - o.value,
            gradient: self.gradient.iter().zip(&o.gradient).map(|(a, b)| a - b).collect(),
            upper: self.zip_upper(o, |a, b| a - b),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let n = self.gradient.len();
        let (a, b) = (self.value, o.value);
        let (ga, gb) = (&self.gradient, &o.gradient);
        let mut upper = self.zip_upper(o, |ha, hb| a * hb + b * ha);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                upper[k] += ga[i] * gb[j] + gb[i] * ga[j];
                k += 1;
            }
        }
        SecondOrderJet {
            value: a * b,
            gradient: ga.iter().zip(gb).map(|(x, y)| a * y + b * x).collect(),
            upper,
        }
    }
    fn scale(&self, c: f64) -> Self {
        SecondOrderJet {
            value: self.value * c,
            gradient: self.gradient.iter().map(|g| g * c).collect(),
            upper: self.upper.iter().map(|h| h * c).collect(),
        }
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.gradient.len();
        let g = &self.gradient;
        let mut upper: Vec<f64> = self.upper.iter().map(|h| f1 * h).collect();
        if f2 != 0.0 {
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    upper[k] += f2 * g[i] * g[j];
                    k += 1;
                }
            }
        }
        SecondOrderJet {
            value: f0,
            gradient: g.iter().map(|x| f1 * x).collect(),
            upper,
        }
    }
}
