//! Complex error function, Chebyshev series and Gauss quadrature rules.

use errorfunctions::ComplexErrorFunctions;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_finite(what: &'static str, z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, format!("non-finite argument {z}")))
    }
}

/// Complementary error function of a complex argument.
pub fn erfc_complex(z: Complex64) -> Result<Complex64> {
    check_finite("erfc_complex", z)?;
    Ok(z.erfc())
}

/// `exp(a) * erfc(z)` evaluated without forming either factor separately.
///
/// For `Re z >= 0` this is `exp(a - z^2) erfcx(z)` with a bounded scaled
/// function; otherwise the reflection `erfc(z) = 2 - erfc(-z)` is applied
/// first.
pub fn exp_erfc(a: Complex64, z: Complex64) -> Result<Complex64> {
    check_finite("exp_erfc", z)?;
    check_finite("exp_erfc", a)?;
    Ok(exp_erfc_unchecked(a, z))
}

pub(crate) fn exp_erfc_unchecked(a: Complex64, z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        (a - z * z).exp() * z.erfcx()
    } else {
        2.0 * a.exp() - (a - z * z).exp() * (-z).erfcx()
    }
}

/// Chebyshev-Lobatto points `cos(pi j / n)` on `[-1, 1]`, `j = 0..=n`, in
/// increasing order.
pub fn lobatto_points(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    (0..=n)
        .map(|j| -(PI * j as f64 / n as f64).cos())
        .map(|x| if x.abs() < 1e-17 { 0.0 } else { x })
        .collect()
}

/// Chebyshev expansion `sum_n c_n T_n(y)` of a complex function on `[a, b]`,
/// with `y` the affine image of the argument on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSeries {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<Complex64>,
}

/// Points whose distance from the interval is below this fraction of its
/// length are clamped rather than refused.
const EXTRAPOLATION_SLACK: f64 = 1e-12;

impl ChebyshevSeries {
    /// Nodes of [`ChebyshevSeries::fit`] for degree `n` on `[a, b]`.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        lobatto_points(n).into_iter().map(|y| mid + half * y).collect()
    }

    /// Interpolates samples taken at [`ChebyshevSeries::nodes`] (increasing
    /// order); the degree is `samples.len() - 1`.
    pub fn fit(a: f64, b: f64, samples: &[Complex64]) -> Result<Self> {
        if !(a < b) {
            return Err(Error::validation("interval", format!("need a < b, got [{a}, {b}]")));
        }
        if samples.is_empty() {
            return Err(Error::validation("samples", "at least one sample required"));
        }
        Ok(ChebyshevSeries {
            a,
            b,
            coeffs: lobatto_transform(samples),
        })
    }

    /// Fits a function sampled at the degree-`n` nodes.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples: Vec<Complex64> = Self::nodes(a, b, n).into_iter().map(f).collect();
        Self::fit(a, b, &samples)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn to_unit(&self, t: f64) -> Result<f64> {
        let y = (2.0 * t - self.a - self.b) / (self.b - self.a);
        if y.abs() <= 1.0 {
            Ok(y)
        } else if y.abs() <= 1.0 + EXTRAPOLATION_SLACK {
            Ok(y.signum())
        } else {
            Err(Error::domain(
                "cheb_eval",
                format!("t = {t} outside [{}, {}]", self.a, self.b),
            ))
        }
    }

    /// Evaluates the series; arguments outside the interval are refused.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        Ok(clenshaw(&self.coeffs, self.to_unit(t)?))
    }

    /// Evaluates at a point already mapped to `[-1, 1]`.
    pub fn eval_unit(&self, y: f64) -> Complex64 {
        clenshaw(&self.coeffs, y)
    }

    /// Series of the derivative with respect to the original variable.
    pub fn derivative(&self) -> ChebyshevSeries {
        let n = self.coeffs.len();
        let scale = 2.0 / (self.b - self.a);
        if n == 1 {
            return ChebyshevSeries {
                a: self.a,
                b: self.b,
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
        for k in (0..n - 1).rev() {
            d[k] = d[k + 2] + 2.0 * (k + 1) as f64 * self.coeffs[k + 1];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        for c in &mut d {
            *c *= scale;
        }
        ChebyshevSeries {
            a: self.a,
            b: self.b,
            coeffs: d,
        }
    }

    /// Largest coefficient magnitude among the top `count` degrees, relative
    /// to the largest coefficient overall.
    pub fn tail_ratio(&self, count: usize) -> f64 {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let start = self.coeffs.len().saturating_sub(count);
        self.coeffs[start..].iter().map(|c| c.norm()).fold(0.0, f64::max) / max
    }
}

/// Chebyshev coefficients of the interpolant through Lobatto samples in
/// increasing order (a direct type-I cosine transform).
pub fn lobatto_transform(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len() - 1;
    if n == 0 {
        return vec![samples[0]];
    }
    // samples[i] sits at -cos(pi i / n) = cos(pi (n - i) / n).
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &s) in samples.iter().enumerate() {
                let j = n - i;
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                let arg = PI * ((k * j) % (2 * n)) as f64 / nf;
                acc += w * arg.cos() * s;
            }
            let scale = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
            acc * scale
        })
        .collect()
}

/// Clenshaw summation of `sum c_n T_n(y)`.
pub fn clenshaw(coeffs: &[Complex64], y: f64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * y * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + y * b1 - b2
}

/// Clenshaw summation at a complex argument.
pub fn clenshaw_complex(coeffs: &[Complex64], y: Complex64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * y * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + y * b1 - b2
}

/// Values `T_0(y), ..., T_n(y)`.
pub fn chebyshev_values(n: usize, y: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(1.0);
    if n >= 1 {
        t.push(y);
    }
    for k in 2..=n {
        let next = 2.0 * y * t[k - 1] - t[k - 2];
        t.push(next);
    }
    t
}

/// Weight family of a Gauss rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    /// Weight 1 on `[-1, 1]`.
    Legendre,
    /// Weight `(1 - x)^alpha (1 + x)^beta` on `[-1, 1]`.
    Jacobi { alpha: f64, beta: f64 },
    /// Weight `exp(-x)` on `[0, inf)`.
    Laguerre,
}

/// Gauss rule on the reference interval of its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `w(x) f(x)` over the reference interval.
    pub fn integrate<T>(&self, f: impl Fn(f64) -> T) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
    }

    /// Nodes and weights of a Legendre rule mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn half_integer_gamma(x: f64) -> f64 {
    // Gamma on positive multiples of 1/2: recurse down to 1/2 or 1.
    let mut g = if (x.fract() - 0.5).abs() < 1e-12 { PI.sqrt() } else { 1.0 };
    let mut y = if (x.fract() - 0.5).abs() < 1e-12 { 0.5 } else { 1.0 };
    while y < x - 1e-12 {
        g *= y;
        y += 1.0;
    }
    g
}

/// Three-term recurrence of the monic orthogonal polynomials:
/// diagonal `a_j`, squared off-diagonal `b_j` (`j >= 1`) and total mass.
fn recurrence(kind: RuleKind, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let mut diag = vec![0.0; n];
    let mut off2 = vec![0.0; n];
    let mass;
    match kind {
        RuleKind::Legendre => {
            for j in 1..n {
                let jf = j as f64;
                off2[j] = jf * jf / (4.0 * jf * jf - 1.0);
            }
            mass = 2.0;
        }
        RuleKind::Laguerre => {
            for j in 0..n {
                diag[j] = 2.0 * j as f64 + 1.0;
                if j >= 1 {
                    off2[j] = (j * j) as f64;
                }
            }
            mass = 1.0;
        }
        RuleKind::Jacobi { alpha, beta } => {
            let ab = alpha + beta;
            diag[0] = (beta - alpha) / (ab + 2.0);
            for j in 1..n {
                let jf = j as f64;
                let s = 2.0 * jf + ab;
                diag[j] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
                off2[j] = if j == 1 {
                    4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
                } else {
                    4.0 * jf * (jf + alpha) * (jf + beta) * (jf + ab)
                        / (s * s * (s + 1.0) * (s - 1.0))
                };
            }
            mass = 2f64.powf(ab + 1.0) * half_integer_gamma(alpha + 1.0)
                * half_integer_gamma(beta + 1.0)
                / half_integer_gamma(ab + 2.0);
        }
    }
    (diag, off2, mass)
}

/// Orthonormal polynomial values `p_0(x) .. p_n(x)`.
fn orthonormal_values(diag: &[f64], off: &[f64], mass: f64, x: f64, n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0 / mass.sqrt());
    if n >= 1 {
        p.push((x - diag[0]) * p[0] / off[1]);
    }
    for j in 1..n {
        let next = ((x - diag[j]) * p[j] - off[j] * p[j - 1]) / off[j + 1];
        p.push(next);
    }
    p
}

/// Builds an `n`-point Gauss rule.
///
/// Nodes come from the symmetric Jacobi matrix, are polished by Newton steps
/// on the orthonormal recurrence, and the weights use the Christoffel sum,
/// which keeps small weights accurate in relative terms.
pub fn gauss_rule(kind: RuleKind, n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::validation("n", "quadrature order must be at least 1"));
    }
    if let RuleKind::Jacobi { alpha, beta } = kind {
        let ok = |v: f64| [-0.5, 0.0, 0.5].iter().any(|&s| (v - s).abs() < 1e-15);
        if !ok(alpha) || !ok(beta) {
            return Err(Error::validation(
                "jacobi exponents",
                format!("unsupported (alpha, beta) = ({alpha}, {beta})"),
            ));
        }
    }
    // One extra recurrence row so p_n can be evaluated for Newton steps.
    let (diag, off2, mass) = recurrence(kind, n + 1);
    let off: Vec<f64> = off2.iter().map(|b| b.sqrt()).collect();
    let jm = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[j]
        } else if j + 1 == i {
            off[i]
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut weights = Vec::with_capacity(n);
    for x in &mut nodes {
        for _ in 0..3 {
            let p = orthonormal_values(&diag, &off, mass, *x, n);
            // p_n' via the derivative of the recurrence.
            let mut dp = vec![0.0; n + 1];
            if n >= 1 {
                dp[1] = p[0] / off[1];
            }
            for j in 1..n {
                dp[j + 1] = ((*x - diag[j]) * dp[j] + p[j] - off[j] * dp[j - 1]) / off[j + 1];
            }
            if dp[n] == 0.0 {
                break;
            }
            let step = p[n] / dp[n];
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let p = orthonormal_values(&diag, &off, mass, *x, n - 1);
        weights.push(1.0 / p.iter().map(|v| v * v).sum::<f64>());
    }
    Ok(QuadratureRule {
        kind,
        nodes,
        weights,
    })
}

/// Legendre rule; panics only on `n == 0`, which callers never pass.
pub(crate) fn legendre(n: usize) -> QuadratureRule {
    gauss_rule(RuleKind::Legendre, n).expect("positive order")
}
