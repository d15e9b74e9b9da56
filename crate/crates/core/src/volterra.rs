//! Windowed Chebyshev collocation for the boundary integral equation
//! `psi0 = h + L psi0` on the interface `x = 0`.
//!
//! With `w = psi0 - 2 h_-(0, .)` and `Phi_w = w * t^{-1/2}` the equation
//! reads
//!
//! ```text
//! psi0(t) = h_+(0,t) + h_-(0,t) + C1 int_0^t psi0 alpha e^{if} (t-s)^{-1/2} ds
//!           + (1/2pi) int_0^t g(s,t) Phi_w(s) ds
//! ```
//!
//! and the interface derivative is `sqrt(2/(i pi)) d/dt Phi_w`. Time is split
//! into windows; the first window is represented in `sqrt(t)` to capture the
//! half-integer powers of the short-time expansion, followed by geometrically
//! growing windows up to the uniform length.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;

use crate::error::{Error, Result};
use crate::kernels::{apply_alpha, apply_g, field_coefficient, KernelContext, SourceTerm};
use crate::singular::{AbelTable, Panels};
use crate::specfun::{
    clenshaw_complex, gauss_rule, legendre, lobatto_transform, ChebyshevSeries, QuadratureRule, RuleKind,
};
use crate::units::PhysicalConfig;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Resolution of the boundary solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Uniform windows per laser period.
    pub windows_per_period: usize,
    /// Chebyshev degree per window.
    pub degree: usize,
    /// The first window has length `period / (windows_per_period * origin_divisions)`.
    pub origin_divisions: usize,
    /// Gauss-Legendre order of the stored history of each window.
    pub history_order: usize,
    /// Quadrature order of the in-window singular integrals.
    pub local_order: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            windows_per_period: 16,
            degree: 32,
            origin_divisions: 16,
            history_order: 40,
            local_order: 64,
        }
    }
}

impl SolverOptions {
    /// Doubles every resolution parameter.
    pub fn refined(&self) -> Self {
        SolverOptions {
            windows_per_period: self.windows_per_period,
            degree: 2 * self.degree,
            origin_divisions: self.origin_divisions,
            history_order: 2 * self.history_order,
            local_order: 2 * self.local_order,
        }
    }

    fn validate(&self) -> Result<()> {
        let checks = [
            ("windows_per_period", self.windows_per_period),
            ("degree", self.degree),
            ("origin_divisions", self.origin_divisions),
            ("history_order", self.history_order),
            ("local_order", self.local_order),
        ];
        for (name, v) in checks {
            if v == 0 {
                return Err(Error::validation(name, "must be positive"));
            }
        }
        if self.degree < 4 {
            return Err(Error::validation("degree", "must be at least 4"));
        }
        Ok(())
    }
}

/// Variable in which a window's Chebyshev series is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Series in `sqrt(t)`; used for the window starting at `t = 0`.
    Sqrt,
    /// Series in `t`.
    Linear,
}

#[derive(Debug, Clone, Copy)]
struct HistNode {
    s: f64,
    weight: f64,
    psi: Complex64,
    w: Complex64,
    abel: Complex64,
    half_sin: f64,
    half_cos: f64,
}

/// One solved window `[a, b]`.
#[derive(Debug, Clone)]
pub struct Window {
    pub a: f64,
    pub b: f64,
    pub basis: Basis,
    /// Boundary value `psi0`.
    pub psi: ChebyshevSeries,
    /// `h_-(0, t)` fitted on the same nodes.
    pub h_minus: ChebyshevSeries,
    /// Abel transform of `psi0 - 2 h_-(0, .)`.
    pub abel: ChebyshevSeries,
    abel_d1: ChebyshevSeries,
    abel_d2: ChebyshevSeries,
    hist: Vec<HistNode>,
}

impl Window {
    fn var(&self, t: f64) -> f64 {
        match self.basis {
            Basis::Sqrt => t.max(0.0).sqrt(),
            Basis::Linear => t,
        }
    }

    fn unit(&self, t: f64) -> f64 {
        let s = &self.psi;
        ((2.0 * self.var(t) - s.a - s.b) / (s.b - s.a)).clamp(-1.0, 1.0)
    }

    pub fn psi_at(&self, t: f64) -> Complex64 {
        self.psi.eval_unit(self.unit(t))
    }

    fn w_at(&self, t: f64) -> Complex64 {
        let y = self.unit(t);
        self.psi.eval_unit(y) - 2.0 * self.h_minus.eval_unit(y)
    }

    fn abel_at(&self, t: f64) -> Complex64 {
        self.abel.eval_unit(self.unit(t))
    }

    fn unit_complex(&self, s: Complex64) -> Complex64 {
        let v = match self.basis {
            Basis::Sqrt => s.sqrt(),
            Basis::Linear => s,
        };
        (2.0 * v - self.psi.a - self.psi.b) / (self.psi.b - self.psi.a)
    }

    /// Polynomial continuation of `psi0` to a complex time near the window.
    pub(crate) fn psi_complex(&self, s: Complex64) -> Complex64 {
        clenshaw_complex(&self.psi.coeffs, self.unit_complex(s))
    }

    /// Polynomial continuation of `d Phi_w / dt`.
    pub(crate) fn abel_dt_complex(&self, s: Complex64) -> Complex64 {
        let y = self.unit_complex(s);
        match self.basis {
            Basis::Linear => clenshaw_complex(&self.abel_d1.coeffs, y),
            Basis::Sqrt => {
                let sigma = s.sqrt();
                if sigma.norm() < 1e-7 * self.psi.b {
                    0.5 * clenshaw_complex(&self.abel_d2.coeffs, y)
                } else {
                    clenshaw_complex(&self.abel_d1.coeffs, y) / (2.0 * sigma)
                }
            }
        }
    }

    /// `d Phi_w / dt`.
    fn abel_dt(&self, t: f64) -> Complex64 {
        let y = self.unit(t);
        match self.basis {
            Basis::Linear => self.abel_d1.eval_unit(y),
            Basis::Sqrt => {
                let sigma = t.max(0.0).sqrt();
                if sigma < 1e-7 * self.psi.b {
                    // Phi_w vanishes to second order in sigma at the origin.
                    0.5 * self.abel_d2.eval_unit(y)
                } else {
                    self.abel_d1.eval_unit(y) / (2.0 * sigma)
                }
            }
        }
    }
}

/// Per-window solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostic {
    pub index: usize,
    pub a: f64,
    pub b: f64,
    /// Max-norm residual of the collocation system after the solve.
    pub collocation_residual: f64,
    /// Largest of the top four Chebyshev coefficients relative to the largest.
    pub tail_ratio: f64,
    /// Jump of `psi0` against the previous window at the shared endpoint.
    pub continuity_jump: f64,
}

/// Boundary values `psi(0, t)` and `d_x psi(0, t)` on `[0, T]`.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub ctx: KernelContext,
    pub options: SolverOptions,
    pub windows: Vec<Window>,
    pub diagnostics: Vec<WindowDiagnostic>,
}

/// `sqrt(2 / (i pi))`.
fn dx_coefficient() -> Complex64 {
    Complex64::from_polar((2.0 / PI).sqrt(), -FRAC_PI_4)
}

/// Window edges for a run to `t_final`. The lattice depends only on the
/// options and the period, so extending a run reuses every earlier window.
pub fn window_breaks(period: f64, options: &SolverOptions, t_final: f64) -> Vec<f64> {
    let len = period / options.windows_per_period as f64;
    let first = len / options.origin_divisions as f64;
    let mut breaks = vec![0.0];
    let mut b = first;
    while b < len * (1.0 - 1e-12) {
        breaks.push(b);
        b = (2.0 * b).min(len);
    }
    let mut n = 1usize;
    loop {
        let b = n as f64 * len;
        breaks.push(b);
        if b >= t_final * (1.0 - 1e-12) {
            break;
        }
        n += 1;
    }
    // Clip to t_final.
    while breaks.len() > 2 && breaks[breaks.len() - 2] >= t_final * (1.0 - 1e-12) {
        breaks.pop();
    }
    let last = breaks.len() - 1;
    if breaks[last] > t_final {
        breaks[last] = t_final;
    }
    breaks
}

fn cheb_into(buf: &mut [f64], y: f64) {
    buf[0] = 1.0;
    if buf.len() > 1 {
        buf[1] = y;
    }
    for k in 2..buf.len() {
        buf[k] = 2.0 * y * buf[k - 1] - buf[k - 2];
    }
}

struct Rules {
    history: QuadratureRule,
    local: QuadratureRule,
    jacobi: QuadratureRule,
    angle: QuadratureRule,
}

/// Geometry of the window being solved.
#[derive(Clone, Copy)]
struct Geometry {
    a: f64,
    b: f64,
    basis: Basis,
    va: f64,
    vb: f64,
}

impl Geometry {
    fn new(a: f64, b: f64, basis: Basis) -> Self {
        let (va, vb) = match basis {
            Basis::Sqrt => (a.sqrt(), b.sqrt()),
            Basis::Linear => (a, b),
        };
        Geometry { a, b, basis, va, vb }
    }

    fn unit_of_var(&self, v: f64) -> f64 {
        ((2.0 * v - self.va - self.vb) / (self.vb - self.va)).clamp(-1.0, 1.0)
    }

    fn unit(&self, t: f64) -> f64 {
        match self.basis {
            Basis::Sqrt => self.unit_of_var(t.max(0.0).sqrt()),
            Basis::Linear => self.unit_of_var(t),
        }
    }

    /// Abel transforms `int_a^s T_n(y(u)) (s-u)^{-1/2} du` of every basis
    /// function, written into `out`.
    fn abel_basis(&self, rules: &Rules, s: f64, out: &mut [f64], tbuf: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if s <= self.a {
            return;
        }
        match self.basis {
            Basis::Linear => {
                // u = a + (s-a)(1+x)/2 against (1-x)^{-1/2} is exact for polynomials.
                let scale = ((s - self.a) / 2.0).sqrt();
                for (&x, &w) in rules.jacobi.nodes.iter().zip(&rules.jacobi.weights) {
                    let u = self.a + (s - self.a) * 0.5 * (1.0 + x);
                    cheb_into(tbuf, self.unit_of_var(u));
                    for (o, t) in out.iter_mut().zip(tbuf.iter()) {
                        *o += scale * w * t;
                    }
                }
            }
            Basis::Sqrt => {
                // u = s sin^2 phi: 2 sqrt(s) int_0^{pi/2} T_n(y(sqrt(s) sin phi)) sin phi dphi.
                let rs = s.sqrt();
                for (phi, w) in rules.angle.mapped(0.0, FRAC_PI_2) {
                    let sp = phi.sin();
                    cheb_into(tbuf, self.unit_of_var(rs * sp));
                    let f = 2.0 * rs * sp * w;
                    for (o, t) in out.iter_mut().zip(tbuf.iter()) {
                        *o += f * t;
                    }
                }
            }
        }
    }
}

/// `int_{p.a}^{p.b} f(s) (t - s)^{-1/2} ds` for `t >= p.b`, with the
/// substitution matched to the window basis.
fn near_integral(p: &Window, t: f64, rule: &QuadratureRule, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let mut acc = ZERO;
    match p.basis {
        Basis::Sqrt => {
            let hi = p.b.sqrt().atan2((t - p.b).max(0.0).sqrt());
            let rt = t.sqrt();
            for (phi, w) in rule.mapped(0.0, hi) {
                let sp = phi.sin();
                acc += f(t * sp * sp) * (2.0 * rt * sp * w);
            }
        }
        Basis::Linear => {
            let lo = (t - p.b).max(0.0).sqrt();
            let hi = (t - p.a).sqrt();
            for (rho, w) in rule.mapped(lo, hi) {
                acc += f(t - rho * rho) * (2.0 * w);
            }
        }
    }
    acc
}

impl KernelContext {
    /// Kernel terms for a pair well separated from the diagonal, using
    /// precomputed half-angle values of both times.
    #[inline]
    fn far_terms(&self, hs: (f64, f64), ht: (f64, f64), tau: f64) -> (f64, f64, f64) {
        let w = self.omega;
        let (ss, cs) = hs;
        let (st, ct) = ht;
        let sin_h = st * cs + ct * ss;
        let sy = st * cs - ct * ss;
        let cy = ct * cs + st * ss;
        let y = 0.5 * w * tau;
        let sc = if y < 0.1 { crate::kernels::sinc(y) } else { sy / y };
        let sin_ws = 2.0 * ss * cs;
        let dcos = -w * sin_h * sc;
        let dsin2 = 2.0 * w * (1.0 - 2.0 * sin_h * sin_h) * sc * cy;
        let e2 = self.field * self.field;
        let w2 = w * w;
        let f = (e2 * dcos * dcos / (2.0 * w2 * w2) - self.veff + self.c8 * dsin2) * tau;
        let ds_f = e2 / (w2 * w) * dcos * sin_ws + e2 / (2.0 * w2 * w2) * dcos * dcos + self.veff
            - self.ponderomotive * (1.0 - 2.0 * sin_ws * sin_ws);
        (sin_ws + dcos / w, f, ds_f)
    }
}

fn half_angles(omega: f64, s: f64) -> (f64, f64) {
    (0.5 * omega * s).sin_cos()
}

impl BoundaryTrace {
    /// Empty trace ready to be extended.
    pub fn new(config: &PhysicalConfig, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        Ok(BoundaryTrace {
            ctx: KernelContext::new(config),
            options,
            windows: Vec::new(),
            diagnostics: Vec::new(),
        })
    }

    /// End of the solved interval.
    pub fn t_end(&self) -> f64 {
        self.windows.last().map_or(0.0, |w| w.b)
    }

    fn rules(&self) -> Result<Rules> {
        let o = &self.options;
        Ok(Rules {
            history: legendre(o.history_order),
            local: legendre(o.local_order),
            jacobi: gauss_rule(RuleKind::Jacobi { alpha: -0.5, beta: 0.0 }, o.degree / 2 + 2)?,
            angle: legendre(o.degree + 16),
        })
    }

    /// Marches forward until `t_final`.
    pub fn extend(&mut self, t_final: f64) -> Result<()> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::validation("t_final", format!("{t_final} must be positive and finite")));
        }
        let breaks = window_breaks(self.ctx.period(), &self.options, t_final);
        let rules = self.rules()?;
        // A last window clipped by an earlier, shorter run is solved again
        // on its full lattice interval.
        if let Some(last) = self.windows.last() {
            let idx = self.windows.len();
            if idx < breaks.len() && last.b < breaks[idx] * (1.0 - 1e-14) {
                self.windows.pop();
                self.diagnostics.pop();
            }
        }
        for idx in self.windows.len()..breaks.len() - 1 {
            let (a, b) = (breaks[idx], breaks[idx + 1]);
            let basis = if idx == 0 { Basis::Sqrt } else { Basis::Linear };
            self.solve_window(idx, Geometry::new(a, b, basis), &rules)?;
        }
        Ok(())
    }

    fn solve_window(&mut self, idx: usize, geo: Geometry, rules: &Rules) -> Result<()> {
        let ctx = self.ctx;
        let n = self.options.degree;
        let c1 = field_coefficient(&ctx);
        let mut vnodes = ChebyshevSeries::nodes(geo.va, geo.vb, n);
        vnodes[0] = geo.va;
        vnodes[n] = geo.vb;
        let mut tnodes: Vec<f64> = vnodes
            .iter()
            .map(|&v| match geo.basis {
                Basis::Sqrt => v * v,
                Basis::Linear => v,
            })
            .collect();
        // Endpoints exactly on the window edges: the in-window integrals must
        // vanish identically at the first node.
        tnodes[0] = geo.a;
        tnodes[n] = geo.b;
        let hm: Vec<Complex64> = tnodes.iter().map(|&t| ctx.h_minus(0.0, t)).collect();
        let d = lobatto_transform(&hm);
        let free: Vec<Complex64> = tnodes
            .iter()
            .zip(&hm)
            .map(|(&t, &h)| h + ctx.h_plus(0.0, t))
            .collect();

        let (far_windows, near): (&[Window], Option<&Window>) = match idx {
            0 => (&[], None),
            _ => (&self.windows[..idx - 1], Some(&self.windows[idx - 1])),
        };
        let far_hist: Vec<HistNode> = far_windows.iter().flat_map(|w| w.hist.iter().copied()).collect();
        let omega = ctx.omega;
        let use_field = ctx.field != 0.0;

        // History at the collocation nodes: (T1, M, Phi) from far and near windows.
        let history: Vec<(Complex64, Complex64, Complex64, Complex64)> = tnodes
            .par_iter()
            .map(|&t| {
                let ht = half_angles(omega, t);
                let (mut t1, mut m, mut phi, mut phi_near) = (ZERO, ZERO, ZERO, ZERO);
                for h in &far_hist {
                    let tau = t - h.s;
                    let (alpha, f, ds_f) = ctx.far_terms((h.half_sin, h.half_cos), ht, tau);
                    let e = Complex64::from_polar(1.0, f);
                    let rt = tau.sqrt();
                    let wr = h.weight / rt;
                    if use_field {
                        t1 += h.psi * (alpha * wr) * e;
                    }
                    let gs = (e - 1.0) / (2.0 * tau) + Complex64::new(0.0, ds_f) * e;
                    m += gs * h.abel * wr;
                    phi += h.w * wr;
                }
                if let Some(p) = near {
                    if use_field {
                        t1 += near_integral(p, t, &rules.history, |s| {
                            let k = ctx.pair_unchecked(s, t);
                            p.psi_at(s) * k.alpha * k.phase()
                        });
                    }
                    m += near_integral(p, t, &rules.history, |s| {
                        ctx.pair_unchecked(s, t).g_scaled() * p.abel_at(s)
                    });
                    phi_near = near_integral(p, t, &rules.history, |u| p.w_at(u));
                }
                (t1, m, phi, phi_near)
            })
            .collect();

        // Abel transform of the far part is smooth on this window.
        let phi_far_vals: Vec<Complex64> = history.iter().map(|h| h.2).collect();
        let phi_far = lobatto_transform(&phi_far_vals);
        let phi_known = |s: f64| -> Complex64 {
            let mut v = crate::specfun::clenshaw(&phi_far, geo.unit(s));
            if let Some(p) = near {
                v += near_integral(p, s, &rules.history, |u| p.w_at(u));
            }
            v
        };

        // In-window singular integrals per collocation node.
        struct Local {
            a1: Vec<Complex64>,
            a2: Vec<Complex64>,
            mk: Complex64,
        }
        let locals: Vec<Local> = tnodes
            .par_iter()
            .map(|&t| {
                let mut a1 = vec![ZERO; n + 1];
                let mut a2 = vec![ZERO; n + 1];
                let mut mk = ZERO;
                if t > geo.a {
                    let mut tb = vec![0.0; n + 1];
                    let mut bb = vec![0.0; n + 1];
                    let mut tmp = vec![0.0; n + 1];
                    let span = t - geo.a;
                    let rs = span.sqrt();
                    for (theta, wq) in rules.local.mapped(0.0, FRAC_PI_2) {
                        let st = theta.sin();
                        let s = geo.a + span * st * st;
                        let fac = 2.0 * rs * st * wq;
                        let k = ctx.pair_unchecked(s, t);
                        let y = match geo.basis {
                            Basis::Sqrt => geo.unit_of_var(rs * st),
                            Basis::Linear => geo.unit(s),
                        };
                        cheb_into(&mut tb, y);
                        geo.abel_basis(rules, s, &mut bb, &mut tmp);
                        let gs = k.g_scaled() * fac;
                        if use_field {
                            let ka = k.phase() * (k.alpha * fac);
                            for j in 0..=n {
                                a1[j] += ka * tb[j];
                            }
                        }
                        for j in 0..=n {
                            a2[j] += gs * bb[j];
                        }
                        mk += gs * phi_known(s);
                    }
                }
                Local { a1, a2, mk }
            })
            .collect();

        let inv2pi = 1.0 / (2.0 * PI);
        let mut mat = DMatrix::<Complex64>::zeros(n + 1, n + 1);
        let mut rhs = DVector::<Complex64>::zeros(n + 1);
        let mut tb = vec![0.0; n + 1];
        for i in 0..=n {
            cheb_into(&mut tb, geo.unit_of_var(vnodes[i]));
            let loc = &locals[i];
            let mut dpart = ZERO;
            for j in 0..=n {
                mat[(i, j)] = Complex64::new(tb[j], 0.0) - c1 * loc.a1[j] - inv2pi * loc.a2[j];
                dpart += d[j] * loc.a2[j];
            }
            let (t1, m, _, _) = history[i];
            rhs[i] = free[i] + c1 * t1 + inv2pi * (m + loc.mk - 2.0 * dpart);
        }
        let lu = mat.clone().lu();
        let coeffs = lu.solve(&rhs).ok_or(Error::Solver { window: idx, residual: f64::INFINITY })?;
        let resid = (&mat * &coeffs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !resid.is_finite() || resid > 1e-9 * rhs.iter().map(|z| z.norm()).fold(1.0, f64::max) {
            return Err(Error::Solver { window: idx, residual: resid });
        }
        let c: Vec<Complex64> = coeffs.iter().copied().collect();
        let wser: Vec<Complex64> = c.iter().zip(&d).map(|(&ci, &di)| ci - 2.0 * di).collect();

        // Abel transform of w at the nodes.
        let phi_vals: Vec<Complex64> = tnodes
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut bb = vec![0.0; n + 1];
                let mut tmp = vec![0.0; n + 1];
                geo.abel_basis(rules, t, &mut bb, &mut tmp);
                let local: Complex64 = wser.iter().zip(&bb).map(|(&w, &b)| w * b).sum();
                history[i].2 + history[i].3 + local
            })
            .collect();
        let abel = ChebyshevSeries {
            a: geo.va,
            b: geo.vb,
            coeffs: lobatto_transform(&phi_vals),
        };
        let abel_d1 = abel.derivative();
        let abel_d2 = abel_d1.derivative();
        let mut window = Window {
            a: geo.a,
            b: geo.b,
            basis: geo.basis,
            psi: ChebyshevSeries { a: geo.va, b: geo.vb, coeffs: c },
            h_minus: ChebyshevSeries { a: geo.va, b: geo.vb, coeffs: d },
            abel,
            abel_d1,
            abel_d2,
            hist: Vec::new(),
        };
        let half = 0.5 * (geo.vb - geo.va);
        let mid = 0.5 * (geo.vb + geo.va);
        window.hist = rules
            .history
            .nodes
            .iter()
            .zip(&rules.history.weights)
            .map(|(&x, &wq)| {
                let v = mid + half * x;
                let (s, weight) = match geo.basis {
                    Basis::Sqrt => (v * v, wq * half * 2.0 * v),
                    Basis::Linear => (v, wq * half),
                };
                let (hs, hc) = half_angles(omega, s);
                HistNode {
                    s,
                    weight,
                    psi: window.psi_at(s),
                    w: window.w_at(s),
                    abel: window.abel_at(s),
                    half_sin: hs,
                    half_cos: hc,
                }
            })
            .collect();
        let jump = match self.windows.last() {
            Some(prev) => (prev.psi_at(prev.b) - window.psi_at(geo.a)).norm(),
            None => (window.psi_at(0.0) - ctx.t0).norm(),
        };
        self.diagnostics.push(WindowDiagnostic {
            index: idx,
            a: geo.a,
            b: geo.b,
            collocation_residual: resid,
            tail_ratio: window.psi.tail_ratio(4),
            continuity_jump: jump,
        });
        self.windows.push(window);
        Ok(())
    }

    fn window_of(&self, t: f64) -> Result<&Window> {
        let end = self.t_end();
        if !(t >= 0.0) || t > end * (1.0 + 1e-13) {
            return Err(Error::domain("boundary trace", format!("t = {t} outside [0, {end}]")));
        }
        let idx = self.windows.partition_point(|w| w.b < t).min(self.windows.len() - 1);
        Ok(&self.windows[idx])
    }

    /// `psi(0, t)`.
    pub fn psi0(&self, t: f64) -> Result<Complex64> {
        Ok(self.window_of(t)?.psi_at(t))
    }

    /// `d_x psi(0, t)`.
    pub fn dx_psi0(&self, t: f64) -> Result<Complex64> {
        Ok(dx_coefficient() * self.window_of(t)?.abel_dt(t))
    }

    fn window_near(&self, s: Complex64) -> &Window {
        let idx = self.windows.partition_point(|w| w.b < s.re).min(self.windows.len() - 1);
        &self.windows[idx]
    }

    /// `psi0` continued to a complex time close to the solved interval.
    pub(crate) fn psi0_complex(&self, s: Complex64) -> Complex64 {
        self.window_near(s).psi_complex(s)
    }

    /// `d_x psi0` continued to a complex time close to the solved interval.
    pub(crate) fn dx_psi0_complex(&self, s: Complex64) -> Complex64 {
        dx_coefficient() * self.window_near(s).abel_dt_complex(s)
    }

    /// Length of the window containing `t`.
    pub(crate) fn window_length(&self, t: f64) -> Result<f64> {
        let w = self.window_of(t)?;
        Ok(w.b - w.a)
    }

    /// Interface current `Im(psi0* d_x psi0)`.
    pub fn current(&self, t: f64) -> Result<f64> {
        let p = self.psi0(t)?;
        let d = self.dx_psi0(t)?;
        Ok((p.conj() * d).im)
    }

    /// Edges of the solved windows.
    pub fn breaks(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(self.windows.iter().map(|w| w.b));
        v
    }

    /// Largest collocation residual, tail ratio and continuity jump.
    pub fn worst_diagnostics(&self) -> (f64, f64, f64) {
        self.diagnostics.iter().fold((0.0, 0.0, 0.0), |acc, d| {
            (
                acc.0.max(d.collocation_residual),
                acc.1.max(d.tail_ratio),
                acc.2.max(d.continuity_jump),
            )
        })
    }

    /// Writes `t_au, t_over_period, re_psi0, im_psi0, re_dxpsi0, im_dxpsi0`
    /// at `samples` equispaced times on `[0, T]`.
    pub fn write_csv(&self, mut out: impl Write, samples: usize) -> std::io::Result<()> {
        writeln!(out, "t_au,t_over_period,re_psi0,im_psi0,re_dxpsi0,im_dxpsi0")?;
        let end = self.t_end();
        let period = self.ctx.period();
        for i in 0..=samples {
            let t = end * i as f64 / samples as f64;
            let p = self.psi0(t).map_err(std::io::Error::other)?;
            let d = self.dx_psi0(t).map_err(std::io::Error::other)?;
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t,
                t / period,
                p.re,
                p.im,
                d.re,
                d.im
            )?;
        }
        Ok(())
    }
}

/// Solves the boundary equation on `[0, t_final]`.
pub fn solve(config: &PhysicalConfig, t_final: f64, options: &SolverOptions) -> Result<BoundaryTrace> {
    let mut trace = BoundaryTrace::new(config, *options)?;
    trace.extend(t_final)?;
    Ok(trace)
}

/// Independent evaluation of the operator and source term by nested
/// reference quadrature on panels aligned with the trace windows.
pub struct IntegralCheck {
    ctx: KernelContext,
    panels: Panels,
    source: SourceTerm,
}

impl IntegralCheck {
    pub fn new(ctx: &KernelContext, breaks: &[f64]) -> Self {
        let panels = Panels::new(breaks, ctx.reference_panel(), 24);
        IntegralCheck {
            ctx: *ctx,
            source: SourceTerm::new(ctx, panels.clone()),
            panels,
        }
    }

    pub fn for_trace(trace: &BoundaryTrace) -> Self {
        IntegralCheck::new(&trace.ctx, &trace.breaks())
    }

    pub fn panels(&self) -> &Panels {
        &self.panels
    }

    /// Abel transform table of an arbitrary boundary function.
    pub fn abel(&self, v: impl Fn(f64) -> Complex64 + Sync) -> AbelTable {
        AbelTable::new(&self.panels, 24, v)
    }

    /// `(L v)(t)` given `v` and its Abel table.
    pub fn apply_l(&self, v: impl Fn(f64) -> Complex64, abel_v: &AbelTable, t: f64) -> Complex64 {
        let first = if self.ctx.field == 0.0 {
            ZERO
        } else {
            field_coefficient(&self.ctx) * apply_alpha(&self.ctx, &self.panels, v, t)
        };
        first + apply_g(&self.ctx, &self.panels, abel_v, t) / (2.0 * PI)
    }

    pub fn source(&self, t: f64) -> Result<Complex64> {
        self.source.eval(t)
    }

    /// `max_t |v(t) - h(t) - (L v)(t)|` over `times`.
    pub fn residual(&self, v: impl Fn(f64) -> Complex64 + Sync, times: &[f64]) -> Result<f64> {
        let table = self.abel(&v);
        let vals: Vec<Result<f64>> = times
            .par_iter()
            .map(|&t| Ok((v(t) - self.source(t)? - self.apply_l(&v, &table, t)).norm()))
            .collect();
        vals.into_iter().try_fold(0.0, |m, r| Ok(f64::max(m, r?)))
    }
}

/// `(L psi0)(t)` for a solved trace.
pub fn apply_l(trace: &BoundaryTrace, t: f64) -> Result<Complex64> {
    trace.psi0(t)?;
    let check = IntegralCheck::for_trace(trace);
    let v = |s: f64| trace.psi0(s).unwrap_or(ZERO);
    let table = check.abel(v);
    Ok(check.apply_l(v, &table, t))
}

/// Max residual of the integral equation at `times`. Only the history up to
/// the latest time is tabulated.
pub fn residual(trace: &BoundaryTrace, times: &[f64]) -> Result<f64> {
    let mut latest = 0.0f64;
    for &t in times {
        trace.psi0(t)?;
        latest = latest.max(t);
    }
    let breaks = trace.breaks();
    let keep = breaks.iter().position(|&b| b >= latest).unwrap_or(breaks.len() - 1).max(1);
    let check = IntegralCheck::new(&trace.ctx, &breaks[..=keep]);
    check.residual(|s| trace.psi0(s).unwrap_or(ZERO), times)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breaks_are_graded_then_uniform() {
        let o = SolverOptions::default();
        let b = window_breaks(16.0, &o, 3.5);
        assert_eq!(b[0], 0.0);
        assert!((b[1] - 1.0 / 16.0).abs() < 1e-15);
        assert!((b[2] - 2.0 / 16.0).abs() < 1e-15);
        assert!(b.contains(&1.0) && b.contains(&2.0) && b.contains(&3.0));
        assert_eq!(*b.last().unwrap(), 3.5);
        let b2 = window_breaks(16.0, &o, 3.0);
        assert_eq!(*b2.last().unwrap(), 3.0);
        assert_eq!(b2.len(), b.len() - 1);
    }
}
