//! Wavefunction and current away from the interface, rebuilt from the
//! boundary trace.
//!
//! Both half-lines are written as `h_±` plus a memory integral over the
//! trace whose integrand carries `e^{i x^2 / (2 (t - s))}`. The integral is
//! split at `s = t - delta`: the part `[0, t - delta]` uses panels graded in
//! `t - s` and in that phase, and the part `[t - delta, t]` is mapped to
//! `v = 1/(t - s)` and rotated onto `v = 1/delta + i y`, where the phase
//! becomes a decaying exponential and Gauss-Laguerre applies. The rotated
//! path needs the trace at complex times within `delta / 2` of the real
//! axis, which the windowed Chebyshev series provide.
//!
//! At `x = 0` the trace itself is returned. Very close to the interface the
//! two parts grow like `|x|^{-1}` and cancel, so below about `1e-3` bohr the
//! derivative loses digits in proportion.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;

use crate::error::{Error, Result};
use crate::kernels::KernelContext;
use crate::specfun::{gauss_rule, legendre, QuadratureRule, RuleKind};
use crate::units::{bohr_to_nm, nm_to_bohr};
use crate::volterra::BoundaryTrace;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default number of x points for a sampled range.
pub const DEFAULT_X_POINTS: usize = 512;

/// `psi`, `d_x psi` and the current at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefieldSample {
    pub x: f64,
    pub t: f64,
    pub psi: Complex64,
    pub dpsi: Complex64,
    /// `Im(conj(psi) d_x psi)`.
    pub j: f64,
}

impl WavefieldSample {
    pub fn new(x: f64, t: f64, psi: Complex64, dpsi: Complex64) -> Self {
        WavefieldSample {
            x,
            t,
            psi,
            dpsi,
            j: (psi.conj() * dpsi).im,
        }
    }
}

/// Quadrature settings of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    /// Gauss-Legendre order per real panel.
    pub panel_order: usize,
    /// Gauss-Laguerre order on the rotated path.
    pub laguerre_order: usize,
    /// Lower bound of the phase `x^2 / (2 delta)` at the split point.
    pub split_phase: f64,
    /// Tolerance of the internal error estimate.
    pub tolerance: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions {
            panel_order: 20,
            laguerre_order: 48,
            split_phase: 8.0,
            tolerance: 1e-8,
        }
    }
}

/// Kernel terms at a complex source time.
struct ComplexPair {
    dcos: Complex64,
    alpha: Complex64,
    f: Complex64,
}

fn sinc_c(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let z2 = z * z;
        1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0)))
    } else {
        z.sin() / z
    }
}

fn complex_pair(ctx: &KernelContext, s: Complex64, tau: Complex64, t: f64) -> ComplexPair {
    let w = ctx.omega;
    let sum = t + s;
    let dcos = -w * (0.5 * w * sum).sin() * sinc_c(0.5 * w * tau);
    let e2 = ctx.field * ctx.field;
    let f_over_tau = e2 / (2.0 * w.powi(4)) * dcos * dcos - ctx.veff
        + 2.0 * ctx.c8 * w * (w * sum).cos() * sinc_c(w * tau);
    ComplexPair {
        dcos,
        alpha: (w * s).sin() + dcos / w,
        f: f_over_tau * tau,
    }
}

/// Reconstruction of the wavefield from a solved trace.
pub struct Wavefield<'a> {
    trace: &'a BoundaryTrace,
    options: FieldOptions,
    ctx: KernelContext,
    panel: QuadratureRule,
    laguerre: QuadratureRule,
    laguerre_check: QuadratureRule,
    breaks: Vec<f64>,
}

/// Memory integral value and x-derivative.
type Pair = [Complex64; 2];

impl<'a> Wavefield<'a> {
    pub fn new(trace: &'a BoundaryTrace) -> Result<Self> {
        Wavefield::with_options(trace, FieldOptions::default())
    }

    pub fn with_options(trace: &'a BoundaryTrace, options: FieldOptions) -> Result<Self> {
        if options.panel_order < 2 || options.laguerre_order < 8 {
            return Err(Error::validation("field options", "quadrature orders too small"));
        }
        if !(options.split_phase > 0.0) {
            return Err(Error::validation("split_phase", "must be positive"));
        }
        if trace.windows.is_empty() {
            return Err(Error::validation("trace", "no solved windows"));
        }
        let lag = options.laguerre_order;
        Ok(Wavefield {
            trace,
            options,
            ctx: trace.ctx,
            panel: legendre(options.panel_order),
            laguerre: gauss_rule(RuleKind::Laguerre, lag)?,
            laguerre_check: gauss_rule(RuleKind::Laguerre, lag - lag / 4)?,
            breaks: trace.breaks(),
        })
    }

    fn check_time(&self, what: &'static str, x: f64, t: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::domain(what, format!("x = {x} is not finite")));
        }
        let end = self.trace.t_end();
        if !(t >= 0.0) || t > end * (1.0 + 1e-13) {
            return Err(Error::domain(what, format!("t = {t} outside the solved range [0, {end}]")));
        }
        Ok(())
    }

    /// Split point of the memory integral.
    fn split(&self, c: f64, t: f64) -> Result<f64> {
        let here = self.trace.window_length(t)?;
        let before = self.trace.window_length((t - here).max(0.0))?;
        Ok((c / self.options.split_phase).min(0.5 * t).min(here.min(before) / 8.0))
    }

    /// Panel edges in `tau = t - s` on `[delta, t]`, kept in `tau` so that
    /// short lags stay exact.
    fn panels(&self, c: f64, t: f64, delta: f64) -> Vec<f64> {
        let lref = self.ctx.reference_panel();
        let mut taus = vec![delta];
        let mut tau = delta;
        while tau < t {
            let mut next = (2.0 * tau).min(tau + lref);
            let inv = 1.0 / tau - PI / c;
            if inv > 0.0 {
                next = next.min(1.0 / inv);
            }
            tau = next.min(t);
            taus.push(tau);
        }
        taus.extend(self.breaks.iter().map(|&b| t - b).filter(|&tb| tb > delta && tb < t));
        taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        taus.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * *b);
        *taus.last_mut().unwrap() = t;
        taus
    }

    /// `int_0^t G(s, t - s) e^{i c / (t-s)} ds` for both components of `G`.
    fn memory(&self, x: f64, t: f64, g: impl Fn(Complex64, Complex64) -> Pair) -> Result<Pair> {
        let c = 0.5 * x * x;
        let delta = self.split(c, t)?;
        let mut acc = [ZERO; 2];
        let taus = self.panels(c, t, delta);
        let add = |acc: &mut Pair, tau: f64, w: f64| {
            let v = g(Complex64::new(t - tau, 0.0), Complex64::new(tau, 0.0));
            let e = Complex64::from_polar(w, c / tau);
            acc[0] += v[0] * e;
            acc[1] += v[1] * e;
        };
        for pair in taus.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi == t {
                // The trace is a series in sqrt(s) at the origin.
                for (sig, w) in self.panel.mapped(0.0, (t - lo).sqrt()) {
                    add(&mut acc, t - sig * sig, 2.0 * sig * w);
                }
            } else {
                for (tau, w) in self.panel.mapped(lo, hi) {
                    add(&mut acc, tau, w);
                }
            }
        }
        let v0 = 1.0 / delta;
        let rotated = |rule: &QuadratureRule| {
            let mut out = [ZERO; 2];
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let v = Complex64::new(v0, u / c);
                let tau = 1.0 / v;
                let val = g(t - tau, tau);
                let scale = w / (v * v);
                out[0] += val[0] * scale;
                out[1] += val[1] * scale;
            }
            let factor = I / c * Complex64::from_polar(1.0, c * v0);
            [out[0] * factor, out[1] * factor]
        };
        let tail = rotated(&self.laguerre);
        let check = rotated(&self.laguerre_check);
        // Relative to the tail itself: for small |x| the tail and the real part
        // cancel to O(1) and only their rounding matters.
        let rel = |k: usize| (tail[k] - check[k]).norm() / tail[k].norm().max(1.0);
        let estimate = rel(0).max(rel(1));
        if !(estimate <= self.options.tolerance) {
            return Err(Error::Accuracy {
                what: format!("memory integral at x = {x}, t = {t}"),
                estimate,
                tolerance: self.options.tolerance,
            });
        }
        Ok([acc[0] + tail[0], acc[1] + tail[1]])
    }

    /// Metal side, `x <= 0`: value and x-derivative.
    fn minus_pair(&self, x: f64, t: f64) -> Result<Pair> {
        let ctx = &self.ctx;
        let tr = self.trace;
        let pref = Complex64::from_polar(1.0 / (2.0 * (2.0 * PI).sqrt()), FRAC_PI_4);
        let m = self.memory(x, t, |s, tau| {
            let p = tr.psi0_complex(s);
            let d = tr.dx_psi0_complex(s);
            let r = tau.sqrt();
            let value = (d + I * x * p / tau) / r;
            let deriv = ((I * p + I * x * d) / tau - x * x * p / (tau * tau)) / r;
            [value, deriv]
        })?;
        Ok([ctx.h_minus(x, t) + pref * m[0], ctx.h_minus_dx(x, t) + pref * m[1]])
    }

    /// Vacuum side, `x >= 0`, in the frame without the gauge phase
    /// `e^{i A x}`: returns `e^{-iAx} psi` and its x-derivative.
    fn plus_pair_stripped(&self, x: f64, t: f64) -> Result<Pair> {
        let ctx = self.ctx;
        let tr = self.trace;
        let a_t = ctx.vector_potential(t);
        let pref = Complex64::from_polar(1.0 / (2.0 * (2.0 * PI).sqrt()), 3.0 * FRAC_PI_4);
        let m = self.memory(x, t, |s, tau| {
            let p = tr.psi0_complex(s);
            let d = tr.dx_psi0_complex(s);
            let k = complex_pair(&ctx, s, tau, t);
            let b = ctx.e_over_omega2 * k.dcos;
            let e = (I * (k.f + x * b)).exp() / tau.sqrt();
            let g0 = -I * d + ctx.e_over_omega * k.alpha * p;
            let value = e * (g0 + x * p / tau);
            let deriv = e * (I * b * g0 + (p + I * x * (g0 + b * p)) / tau + I * x * x * p / (tau * tau));
            [value, deriv]
        })?;
        let gauge = Complex64::from_polar(1.0, -a_t * x);
        let hp = ctx.h_plus(x, t);
        let hpd = ctx.h_plus_dx(x, t);
        Ok([
            gauge * hp - pref * m[0],
            gauge * (hpd - I * a_t * hp) - pref * m[1],
        ])
    }

    /// `psi(x, t)` for `x <= 0`.
    pub fn psi_minus(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.minus(x, t)?[0])
    }

    /// `psi(x, t)` for `x >= 0`.
    pub fn psi_plus(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.plus(x, t)?[0])
    }

    fn minus(&self, x: f64, t: f64) -> Result<Pair> {
        self.check_time("psi_minus", x, t)?;
        if x > 0.0 {
            return Err(Error::domain("psi_minus", format!("x = {x} is on the vacuum side")));
        }
        if t == 0.0 {
            return Ok([self.ctx.phi0(x), self.ctx.dphi0(x)]);
        }
        if x == 0.0 {
            return Ok([self.trace.psi0(t)?, self.trace.dx_psi0(t)?]);
        }
        self.minus_pair(x, t)
    }

    fn plus(&self, x: f64, t: f64) -> Result<Pair> {
        self.check_time("psi_plus", x, t)?;
        if x < 0.0 {
            return Err(Error::domain("psi_plus", format!("x = {x} is on the metal side")));
        }
        if t == 0.0 {
            return Ok([self.ctx.phi0(x), self.ctx.dphi0(x)]);
        }
        if x == 0.0 {
            return Ok([self.trace.psi0(t)?, self.trace.dx_psi0(t)?]);
        }
        let [v, d] = self.plus_pair_stripped(x, t)?;
        let a_t = self.ctx.vector_potential(t);
        let gauge = Complex64::from_polar(1.0, a_t * x);
        Ok([gauge * v, gauge * (d + I * a_t * v)])
    }

    /// `psi(x, t)` on either side.
    pub fn psi(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.sample(x, t)?.psi)
    }

    /// `d_x psi(x, t)`, by differentiation under the integral sign.
    pub fn dpsi_dx(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.sample(x, t)?.dpsi)
    }

    pub fn sample(&self, x: f64, t: f64) -> Result<WavefieldSample> {
        let [psi, dpsi] = if x < 0.0 { self.minus(x, t)? } else { self.plus(x, t)? };
        Ok(WavefieldSample::new(x, t, psi, dpsi))
    }

    /// `j(x, t) = Im(conj(psi) d_x psi)`.
    pub fn current(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.sample(x, t)?.j)
    }

    /// Vacuum-side current computed without the gauge phase:
    /// `Im(conj(phi) d_x phi) + A |phi|^2` with `phi = e^{-iAx} psi`.
    pub fn current_stripped_gauge(&self, x: f64, t: f64) -> Result<f64> {
        self.check_time("current", x, t)?;
        if x <= 0.0 || t == 0.0 {
            return self.current(x, t);
        }
        let [v, d] = self.plus_pair_stripped(x, t)?;
        Ok((v.conj() * d).im + self.ctx.vector_potential(t) * v.norm_sqr())
    }

    /// Samples at every `(x, t)` pair, evaluated in parallel.
    pub fn samples(&self, points: &[(f64, f64)]) -> Result<Vec<WavefieldSample>> {
        points.par_iter().map(|&(x, t)| self.sample(x, t)).collect()
    }

    /// Current at a fixed `x` on a set of times.
    pub fn current_series(&self, x: f64, times: &[f64]) -> Result<Vec<f64>> {
        times.par_iter().map(|&t| self.current(x, t)).collect()
    }
}

/// `psi(x, t)` for `x <= 0` with default quadrature.
pub fn psi_minus(x: f64, t: f64, trace: &BoundaryTrace) -> Result<Complex64> {
    Wavefield::new(trace)?.psi_minus(x, t)
}

/// `psi(x, t)` for `x >= 0` with default quadrature.
pub fn psi_plus(x: f64, t: f64, trace: &BoundaryTrace) -> Result<Complex64> {
    Wavefield::new(trace)?.psi_plus(x, t)
}

pub fn dpsi_dx(x: f64, t: f64, trace: &BoundaryTrace) -> Result<Complex64> {
    Wavefield::new(trace)?.dpsi_dx(x, t)
}

pub fn current(x: f64, t: f64, trace: &BoundaryTrace) -> Result<f64> {
    Wavefield::new(trace)?.current(x, t)
}

/// `n` equispaced points on `[lo, hi]` (nm, converted to bohr).
pub fn x_grid_nm(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| nm_to_bohr(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Writes `x_au, x_nm, t_au, t_over_period, re_psi, im_psi, j_over_k`.
pub fn write_csv(out: &mut impl Write, samples: &[WavefieldSample], ctx: &KernelContext) -> std::io::Result<()> {
    writeln!(out, "x_au,x_nm,t_au,t_over_period,re_psi,im_psi,j_over_k")?;
    let period = ctx.period();
    for s in samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.x,
            bohr_to_nm(s.x),
            s.t,
            s.t / period,
            s.psi.re,
            s.psi.im,
            s.j / ctx.k
        )?;
    }
    Ok(())
}
