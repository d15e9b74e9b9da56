//! Composite quadrature for integrals with an inverse square-root endpoint,
//! `int_0^t f(s) (t - s)^{-1/2} ds`, where `f` may behave like a power
//! series in `sqrt(s)` near the origin.
//!
//! The origin panel uses `s = t sin^2(phi)`, every other panel uses
//! `s = t - rho^2`; both remove the singular factor exactly, so plain
//! Gauss-Legendre converges spectrally on each panel.

use num_complex::Complex64;

use crate::specfun::{legendre, ChebyshevSeries, QuadratureRule};

/// Panel layout shared by the nested integrals: fixed breakpoints (for
/// example the edges of a piecewise representation of `f`) subdivided so
/// that no panel exceeds `max_len`.
#[derive(Debug, Clone)]
pub struct Panels {
    breaks: Vec<f64>,
    rule: QuadratureRule,
}

impl Panels {
    /// `breaks` must start at 0 and increase; `order` is the Gauss-Legendre
    /// order per panel.
    pub fn new(breaks: &[f64], max_len: f64, order: usize) -> Self {
        let mut out = vec![0.0];
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let pieces = ((hi - lo) / max_len).ceil().max(1.0) as usize;
            for j in 1..=pieces {
                out.push(if j == pieces { hi } else { lo + (hi - lo) * j as f64 / pieces as f64 });
            }
        }
        Panels {
            breaks: out,
            rule: legendre(order),
        }
    }

    /// Uniform panels of length at most `max_len` on `[0, t_max]`.
    pub fn uniform(t_max: f64, max_len: f64, order: usize) -> Self {
        Panels::new(&[0.0, t_max], max_len, order)
    }

    pub fn end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Breakpoints strictly inside `(0, t)`, with `t` appended.
    fn cut(&self, t: f64) -> Vec<f64> {
        let mut v: Vec<f64> = vec![0.0];
        for &b in &self.breaks[1..] {
            if b < t * (1.0 - 1e-14) {
                v.push(b);
            }
        }
        v.push(t);
        v
    }

    /// `int_0^t f(s) (t - s)^{-1/2} ds`.
    pub fn end_singular(&self, t: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
        if t <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let cuts = self.cut(t);
        let rt = t.sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        // Origin panel: s = t sin^2 phi, ds / sqrt(t - s) = 2 sqrt(t) sin phi dphi.
        let phi_hi = cuts[1].sqrt().atan2((t - cuts[1]).max(0.0).sqrt());
        for (phi, w) in self.rule.mapped(0.0, phi_hi) {
            let sp = phi.sin();
            acc += f(t * sp * sp) * (2.0 * rt * sp * w);
        }
        // Remaining panels: s = t - rho^2, ds / sqrt(t - s) = 2 drho.
        for pair in cuts[1..].windows(2) {
            let r_lo = (t - pair[1]).max(0.0).sqrt();
            let r_hi = (t - pair[0]).sqrt();
            for (rho, w) in self.rule.mapped(r_lo, r_hi) {
                acc += f(t - rho * rho) * (2.0 * w);
            }
        }
        acc
    }
}

/// Piecewise Chebyshev table of the Abel transform
/// `Phi_v(s) = int_0^s v(u) (s - u)^{-1/2} du` on the panels of `panels`.
/// The origin panel is fitted in `sqrt(s)`.
#[derive(Debug, Clone)]
pub struct AbelTable {
    pieces: Vec<ChebyshevSeries>,
    breaks: Vec<f64>,
}

impl AbelTable {
    pub fn new(panels: &Panels, degree: usize, v: impl Fn(f64) -> Complex64 + Sync) -> Self {
        use rayon::prelude::*;
        let breaks = panels.breaks.clone();
        let pieces = breaks
            .par_windows(2)
            .enumerate()
            .map(|(j, pair)| {
                if j == 0 {
                    let hi = pair[1].sqrt();
                    ChebyshevSeries::from_fn(0.0, hi, degree, |sig| panels.end_singular(sig * sig, &v))
                        .expect("valid panel")
                } else {
                    ChebyshevSeries::from_fn(pair[0], pair[1], degree, |s| panels.end_singular(s, &v))
                        .expect("valid panel")
                }
            })
            .collect();
        AbelTable { pieces, breaks }
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        let j = match self.breaks[1..].iter().position(|&b| s <= b) {
            Some(j) => j,
            None => self.pieces.len() - 1,
        };
        let piece = &self.pieces[j];
        let arg = if j == 0 { s.max(0.0).sqrt() } else { s };
        let y = ((2.0 * arg - piece.a - piece.b) / (piece.b - piece.a)).clamp(-1.0, 1.0);
        piece.eval_unit(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn abel_of_constant_and_sqrt() {
        let p = Panels::uniform(10.0, 1.0, 20);
        // int_0^t (t - s)^{-1/2} ds = 2 sqrt(t).
        let v = p.end_singular(7.3, |_| Complex64::new(1.0, 0.0));
        assert!((v.re - 2.0 * 7.3f64.sqrt()).abs() < 1e-13);
        // int_0^t sqrt(s) (t - s)^{-1/2} ds = pi t / 2.
        let v = p.end_singular(4.0, |s| Complex64::new(s.sqrt(), 0.0));
        assert!((v.re - PI * 2.0).abs() < 1e-13);
    }

    #[test]
    fn abel_table_matches_closed_form() {
        let p = Panels::uniform(5.0, 0.5, 20);
        let table = AbelTable::new(&p, 20, |u| Complex64::new(u, 0.0));
        // Phi(s) = (4/3) s^{3/2} for v(u) = u.
        for &s in &[0.0, 1e-6, 0.01, 0.3, 2.2, 5.0] {
            let exact = 4.0 / 3.0 * s * f64::sqrt(s);
            assert!((table.eval(s).re - exact).abs() < 1e-13, "{s}");
        }
    }

    #[test]
    fn oscillatory_integrand() {
        // int_0^t e^{i a s} (t-s)^{-1/2} ds versus a fine brute-force sum in rho.
        let a = 2.5;
        let t = 30.0;
        let p = Panels::uniform(t, 2.0, 24);
        let v = p.end_singular(t, |s| Complex64::from_polar(1.0, a * s));
        let n = 200_000;
        let h = t.sqrt() / n as f64;
        let mut brute = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let rho = (j as f64 + 0.5) * h;
            brute += 2.0 * h * Complex64::from_polar(1.0, a * (t - rho * rho));
        }
        assert!((v - brute).norm() < 1e-8);
    }
}
