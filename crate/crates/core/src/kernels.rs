//! Closed-form kernels of the boundary integral equation and the explicit
//! free evolutions of the initial state on each half-line.
//!
//! All difference quotients such as `(cos wt - cos ws)/(t - s)` are written
//! through half-angle products and `sinc`, so they stay accurate down to
//! `s = t` without a separate Taylor branch.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::singular::{AbelTable, Panels};
use crate::specfun::{exp_erfc_unchecked, erfc_complex};
use crate::units::PhysicalConfig;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `sin(y) / y` with its series near zero.
pub fn sinc(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let y2 = y * y;
        1.0 - y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0)))
    } else {
        y.sin() / y
    }
}

/// `(e^{iz} - 1) / z` for real `z`.
pub fn expm1i_over(z: f64) -> Complex64 {
    I * Complex64::from_polar(1.0, 0.5 * z) * sinc(0.5 * z)
}

/// Constants of the driven step problem, precomputed from a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelContext {
    pub config: PhysicalConfig,
    pub k: f64,
    pub u: f64,
    pub field: f64,
    pub omega: f64,
    /// `E / omega`.
    pub e_over_omega: f64,
    /// `E / omega^2`.
    pub e_over_omega2: f64,
    /// `E^2 / (4 omega^2)`.
    pub ponderomotive: f64,
    /// `E^2 / (8 omega^3)`.
    pub c8: f64,
    /// `U + E^2 / (4 omega^2)`; the step height of the vacuum side in the
    /// accelerated frame.
    pub veff: f64,
    /// `sqrt(2U - k^2)`.
    pub kappa0: f64,
    /// Reflection amplitude of the initial stationary state.
    pub r0: Complex64,
    /// Transmission amplitude, equal to the boundary value of the initial state.
    pub t0: Complex64,
}

/// Everything the kernels need at one pair `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPair {
    pub tau: f64,
    /// `(cos wt - cos ws) / (t - s)`.
    pub dcos: f64,
    pub alpha: f64,
    pub f: f64,
    /// `f / (t - s)`, finite on the diagonal.
    pub f_over_tau: f64,
    pub ds_f: f64,
    pub sin_ws: f64,
}

impl KernelPair {
    /// `sqrt(t - s) g(s, t)`, bounded on the diagonal where it tends to
    /// `iU/2`.
    pub fn g_scaled(&self) -> Complex64 {
        let e = Complex64::from_polar(1.0, self.f);
        0.5 * self.f_over_tau * expm1i_over(self.f) + I * self.ds_f * e
    }

    /// `e^{i f}`.
    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.f)
    }
}

fn order(what: &'static str, s: f64, t: f64, strict: bool) -> Result<()> {
    if !(s.is_finite() && t.is_finite()) {
        return Err(Error::domain(what, format!("non-finite times ({s}, {t})")));
    }
    if s < 0.0 || s > t || (strict && s == t) {
        let rel = if strict { "s < t" } else { "s <= t" };
        return Err(Error::domain(what, format!("need 0 <= {rel}, got s = {s}, t = {t}")));
    }
    Ok(())
}

impl KernelContext {
    pub fn new(config: &PhysicalConfig) -> Self {
        let k = config.k;
        let u = config.u;
        let e = config.field;
        let w = config.omega;
        let kappa0 = (2.0 * u - k * k).sqrt();
        let ik = Complex64::new(0.0, k);
        let ponderomotive = e * e / (4.0 * w * w);
        KernelContext {
            config: *config,
            k,
            u,
            field: e,
            omega: w,
            e_over_omega: e / w,
            e_over_omega2: e / (w * w),
            ponderomotive,
            c8: e * e / (8.0 * w * w * w),
            veff: u + ponderomotive,
            kappa0,
            r0: (ik + kappa0) / (ik - kappa0),
            t0: 2.0 * ik / (ik - kappa0),
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Vector potential `(E/w) sin wt`; the gauge phase is `e^{i A x}`.
    pub fn vector_potential(&self, t: f64) -> f64 {
        self.e_over_omega * (self.omega * t).sin()
    }

    /// Classical excursion `(E/w^2)(1 - cos wt)` of a free electron.
    pub fn excursion(&self, t: f64) -> f64 {
        let h = (0.5 * self.omega * t).sin();
        2.0 * self.e_over_omega2 * h * h
    }

    /// Kernel quantities at `(s, t)` without argument checks.
    pub fn pair_unchecked(&self, s: f64, t: f64) -> KernelPair {
        let w = self.omega;
        let tau = t - s;
        let y = 0.5 * w * tau;
        let (sy, cy) = y.sin_cos();
        let sc = if y.abs() < 0.1 { sinc(y) } else { sy / y };
        let sin_h = (0.5 * w * (t + s)).sin();
        let sin_ws = (w * s).sin();
        // cos wt - cos ws = -2 sin(w(t+s)/2) sin(w tau/2).
        let dcos = -w * sin_h * sc;
        // (sin 2wt - sin 2ws)/tau = 2w cos(w(t+s)) sinc(w tau).
        let dsin2 = 2.0 * w * (1.0 - 2.0 * sin_h * sin_h) * sc * cy;
        let e2 = self.field * self.field;
        let f_over_tau =
            e2 * dcos * dcos / (2.0 * w.powi(4)) - self.veff + self.c8 * dsin2;
        let cos2ws = 1.0 - 2.0 * sin_ws * sin_ws;
        let ds_f = e2 / w.powi(3) * dcos * sin_ws + e2 / (2.0 * w.powi(4)) * dcos * dcos
            + self.veff
            - self.ponderomotive * cos2ws;
        KernelPair {
            tau,
            dcos,
            alpha: sin_ws + dcos / w,
            f: f_over_tau * tau,
            f_over_tau,
            ds_f,
            sin_ws,
        }
    }

    pub fn pair(&self, s: f64, t: f64) -> Result<KernelPair> {
        order("kernel", s, t, false)?;
        Ok(self.pair_unchecked(s, t))
    }

    /// `sin ws + (cos wt - cos ws)/(w (t - s))`.
    pub fn alpha(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.pair(s, t)?.alpha)
    }

    /// Phase `f(s, t)` of the vacuum-side propagator.
    pub fn f_phase(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.pair(s, t)?.f)
    }

    /// Analytic `d f / d s`.
    pub fn ds_f(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.pair(s, t)?.ds_f)
    }

    /// `g(s, t) = (e^{if} - 1)/(2 (t-s)^{3/2}) + i f_s e^{if} / sqrt(t-s)`.
    pub fn g_kernel(&self, s: f64, t: f64) -> Result<Complex64> {
        order("g_kernel", s, t, true)?;
        let p = self.pair_unchecked(s, t);
        Ok(p.g_scaled() / p.tau.sqrt())
    }

    /// `sqrt(t - s) g(s, t)`, defined also at `s = t`.
    pub fn g_scaled(&self, s: f64, t: f64) -> Result<Complex64> {
        Ok(self.pair(s, t)?.g_scaled())
    }

    /// Real phase `F(x, s, t) = f + x (E/w^2) dcos + x^2 / (2 (t-s))`.
    pub fn capital_f(&self, x: f64, s: f64, t: f64) -> Result<f64> {
        order("capital_F", s, t, true)?;
        let p = self.pair_unchecked(s, t);
        Ok(p.f + x * self.e_over_omega2 * p.dcos + x * x / (2.0 * p.tau))
    }

    /// `Gamma_+ = -i dpsi0 + ((E/w) alpha + x/(t-s)) psi0`.
    pub fn gamma_plus(
        &self,
        s: f64,
        x: f64,
        t: f64,
        psi0: Complex64,
        dpsi0: Complex64,
    ) -> Result<Complex64> {
        order("Gamma_plus", s, t, true)?;
        let p = self.pair_unchecked(s, t);
        Ok(-I * dpsi0 + (self.e_over_omega * p.alpha + x / p.tau) * psi0)
    }

    /// Initial stationary state.
    pub fn phi0(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            Complex64::from_polar(1.0, self.k * x) + self.r0 * Complex64::from_polar(1.0, -self.k * x)
        } else {
            self.t0 * (-self.kappa0 * x).exp()
        }
    }

    /// x-derivative of the initial state (one-sided at the origin: the
    /// vacuum side is used for `x >= 0`).
    pub fn dphi0(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            I * self.k
                * (Complex64::from_polar(1.0, self.k * x)
                    - self.r0 * Complex64::from_polar(1.0, -self.k * x))
        } else {
            -self.kappa0 * self.t0 * (-self.kappa0 * x).exp()
        }
    }

    fn h_minus_parts(&self, x: f64, t: f64) -> (Complex64, Complex64) {
        let rot = Complex64::from_polar(1.0, -FRAC_PI_4);
        let rt = (0.5 * t).sqrt();
        let q = x / (2.0 * t).sqrt();
        let z1 = rot * (q - rt * self.k);
        let z2 = rot * (q + rt * self.k);
        let time = 0.5 * Complex64::from_polar(1.0, -0.5 * self.k * self.k * t);
        let e1 = Complex64::from_polar(1.0, self.k * x);
        let e2 = self.r0 * Complex64::from_polar(1.0, -self.k * x);
        let erfc = |z| erfc_complex(z).expect("finite argument");
        let value = time * (e1 * erfc(z1) + e2 * erfc(z2));
        let c = rot / (2.0 * t).sqrt() * (-2.0 / PI.sqrt());
        let deriv = time
            * (I * self.k * e1 * erfc(z1) + e1 * c * (-z1 * z1).exp()
                - I * self.k * e2 * erfc(z2)
                + e2 * c * (-z2 * z2).exp());
        (value, deriv)
    }

    /// Free evolution of the metal-side part of the initial state,
    /// evaluated at `x` (meaningful for `x <= 0`).
    pub fn h_minus(&self, x: f64, t: f64) -> Complex64 {
        if t <= 0.0 {
            return if x < 0.0 { self.phi0(x) } else if x == 0.0 { 0.5 * self.t0 } else { Complex64::new(0.0, 0.0) };
        }
        self.h_minus_parts(x, t).0
    }

    /// `d/dx h_minus`; diverges like `t^{-1/2}` at `x = 0`, `t -> 0`.
    pub fn h_minus_dx(&self, x: f64, t: f64) -> Complex64 {
        if t <= 0.0 {
            return if x < 0.0 { self.dphi0(x) } else { Complex64::new(0.0, 0.0) };
        }
        self.h_minus_parts(x, t).1
    }

    fn h_plus_parts(&self, x: f64, t: f64) -> (Complex64, Complex64) {
        let rot = Complex64::from_polar(1.0, -FRAC_PI_4);
        let b = self.excursion(t);
        let a_vec = self.vector_potential(t);
        let beta = (0.5 * t).sqrt() * self.kappa0;
        let gamma = (b - x) / (2.0 * t).sqrt();
        let z = rot * Complex64::new(gamma, beta);
        let theta = (0.5 * self.k * self.k + self.ponderomotive) * t
            - self.c8 * (2.0 * self.omega * t).sin();
        let a = Complex64::new(self.kappa0 * (b - x), a_vec * x - theta);
        let half_t0 = 0.5 * self.t0;
        let value = half_t0 * exp_erfc_unchecked(a, z);
        let jump = half_t0 * (2.0 / PI.sqrt()) * rot / (2.0 * t).sqrt() * (a - z * z).exp();
        let deriv = Complex64::new(-self.kappa0, a_vec) * value + jump;
        (value, deriv)
    }

    /// Vacuum-side evolution of the initial evanescent tail in the driven
    /// problem, including the gauge phase (meaningful for `x >= 0`).
    pub fn h_plus(&self, x: f64, t: f64) -> Complex64 {
        if t <= 0.0 {
            return if x > 0.0 { self.phi0(x) } else if x == 0.0 { 0.5 * self.t0 } else { Complex64::new(0.0, 0.0) };
        }
        self.h_plus_parts(x, t).0
    }

    pub fn h_plus_dx(&self, x: f64, t: f64) -> Complex64 {
        if t <= 0.0 {
            return if x > 0.0 { self.dphi0(x) } else { Complex64::new(0.0, 0.0) };
        }
        self.h_plus_parts(x, t).1
    }
}

/// Coefficient `E / (2 w sqrt(2 i pi))` of the field term of the operator.
pub fn field_coefficient(ctx: &KernelContext) -> Complex64 {
    Complex64::from_polar(
        ctx.field / (2.0 * ctx.omega * (2.0 * PI).sqrt()),
        -FRAC_PI_4,
    )
}

impl KernelContext {
    /// Upper bound on the phase velocity of every integrand in `s`; panel
    /// lengths of the reference quadratures are chosen from it.
    pub fn max_rate(&self) -> f64 {
        self.veff + 1.5 * self.field * self.field / (self.omega * self.omega) + self.k * self.k
    }

    /// Default panel length of the reference quadratures.
    pub fn reference_panel(&self) -> f64 {
        (self.period() / 16.0).min(6.0 / self.max_rate())
    }
}

/// `int_0^t g(s, t) Phi(s) ds` with `Phi` tabulated as an Abel transform.
pub fn apply_g(ctx: &KernelContext, panels: &Panels, abel: &AbelTable, t: f64) -> Complex64 {
    panels.end_singular(t, |s| ctx.pair_unchecked(s.min(t), t).g_scaled() * abel.eval(s))
}

/// `int_0^t v(s) alpha(s, t) e^{i f(s, t)} (t - s)^{-1/2} ds`.
pub fn apply_alpha(
    ctx: &KernelContext,
    panels: &Panels,
    v: impl Fn(f64) -> Complex64,
    t: f64,
) -> Complex64 {
    panels.end_singular(t, |s| {
        let p = ctx.pair_unchecked(s.min(t), t);
        v(s) * p.alpha * p.phase()
    })
}

/// Source term of the boundary equation,
/// `h(t) = h_+(0,t) + h_-(0,t) - (1/pi) int_0^t du h_-(0,u) int_u^t ds g(s,t)/sqrt(s-u)`,
/// evaluated by nested reference quadrature on a fixed panel layout.
#[derive(Debug, Clone)]
pub struct SourceTerm {
    ctx: KernelContext,
    panels: Panels,
    abel: AbelTable,
}

impl SourceTerm {
    /// Tabulates the Abel transform of `h_-(0, .)` on `panels`.
    pub fn new(ctx: &KernelContext, panels: Panels) -> Self {
        let c = *ctx;
        let abel = AbelTable::new(&panels, 24, move |u| c.h_minus(0.0, u));
        SourceTerm {
            ctx: *ctx,
            panels,
            abel,
        }
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) || t > self.panels.end() * (1.0 + 1e-14) {
            return Err(Error::domain(
                "h_source",
                format!("t = {t} outside [0, {}]", self.panels.end()),
            ));
        }
        if t == 0.0 {
            return Ok(self.ctx.t0);
        }
        let m = apply_g(&self.ctx, &self.panels, &self.abel, t);
        Ok(self.ctx.h_plus(0.0, t) + self.ctx.h_minus(0.0, t) - m / PI)
    }
}

/// One-off evaluation of the source term at `t`.
pub fn h_source(ctx: &KernelContext, t: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(ctx.t0);
    }
    let panels = Panels::uniform(t, ctx.reference_panel(), 24);
    SourceTerm::new(ctx, panels).eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(field: f64) -> KernelContext {
        KernelContext::new(&PhysicalConfig::new(4.5, 5.5, field, 1.55).unwrap())
    }

    #[test]
    fn diagonal_limits() {
        let c = ctx(15.0);
        let t = 0.37 * c.period();
        let p = c.pair(t, t).unwrap();
        assert!(p.alpha.abs() < 1e-16);
        assert_eq!(p.f, 0.0);
        assert!((p.f_over_tau + c.u).abs() < 1e-14);
        assert!((p.ds_f - c.u).abs() < 1e-14);
        let g = p.g_scaled();
        assert!((g - 0.5 * I * c.u).norm() < 1e-14);
        assert!(c.g_kernel(t, t).is_err());
        assert!(c.alpha(t + 1.0, t).is_err());
    }

    #[test]
    fn origin_and_field_free_forms() {
        let c = ctx(15.0);
        let t = 1.3 * c.period();
        let expect = ((c.omega * t).cos() - 1.0) / (c.omega * t);
        assert!((c.alpha(0.0, t).unwrap() - expect).abs() < 1e-15);
        let c0 = ctx(0.0);
        for &(s, t) in &[(0.0, 3.0), (1.0, 50.0), (7.0, 7.5)] {
            assert!((c0.f_phase(s, t).unwrap() + c0.u * (t - s)).abs() < 1e-13);
            let tau: f64 = t - s;
            let e = Complex64::from_polar(1.0, -c0.u * tau);
            let g = (e - 1.0) / (2.0 * tau.powf(1.5)) + I * c0.u * e / tau.sqrt();
            assert!((c0.g_kernel(s, t).unwrap() - g).norm() < 1e-13);
        }
    }

    #[test]
    fn ds_f_matches_finite_differences() {
        let c = ctx(30.0);
        let t = 2.1 * c.period();
        for &s in &[0.0, 0.3 * t, 0.77 * t, t - 1.0] {
            let h = 1e-4;
            let s0 = if s < h { h } else { s };
            let fd = (c.f_phase(s0 + h, t).unwrap() - c.f_phase(s0 - h, t).unwrap()) / (2.0 * h);
            assert!((fd - c.ds_f(s0, t).unwrap()).abs() < 1e-8, "{fd}");
        }
    }

    #[test]
    fn f_linear_near_diagonal() {
        let c = ctx(15.0);
        let t = 0.61 * c.period();
        for &d in &[1e-3, 1e-6, 1e-9, 1e-12] {
            let ratio = c.f_phase(t - d, t).unwrap() / d;
            assert!((ratio + c.u).abs() < 1e-2, "{ratio}");
        }
    }

    #[test]
    fn capital_f_and_gamma_plus() {
        let c = ctx(15.0);
        assert_eq!(c.capital_f(0.0, 1.0, 2.0).unwrap(), c.f_phase(1.0, 2.0).unwrap());
        let c0 = ctx(0.0);
        let d = Complex64::new(0.3, -0.2);
        let g = c0.gamma_plus(1.0, 0.0, 2.0, Complex64::new(1.0, 1.0), d).unwrap();
        assert!((g + I * d).norm() < 1e-16);
    }

    #[test]
    fn initial_state_boundary_values() {
        let c = ctx(15.0);
        assert!((c.t0.norm_sqr() - 4.0 * 4.5 / 10.0).abs() < 1e-12);
        assert!((1.0 + c.r0 - c.t0).norm() < 1e-15);
        assert!((c.h_minus(0.0, 0.0) + c.h_plus(0.0, 0.0) - c.t0).norm() < 1e-15);
        let t = 1e-12;
        assert!((c.h_minus(0.0, t) + c.h_plus(0.0, t) - c.t0).norm() < 1e-5);
    }

    #[test]
    fn x_derivatives_match_finite_differences() {
        let c = ctx(15.0);
        for &(x, t) in &[(-3.0, 10.0), (-0.5, 0.3), (0.0, 4.0)] {
            let h = 1e-5;
            let fd = (c.h_minus(x + h, t) - c.h_minus(x - h, t)) / (2.0 * h);
            assert!((fd - c.h_minus_dx(x, t)).norm() < 1e-7);
        }
        for &(x, t) in &[(3.0, 10.0), (0.5, 0.3), (0.0, 400.0), (40.0, 80.0)] {
            let h = 1e-5;
            let fd = (c.h_plus(x + h, t) - c.h_plus(x - h, t)) / (2.0 * h);
            assert!((fd - c.h_plus_dx(x, t)).norm() < 1e-7 * c.h_plus_dx(x, t).norm().max(1.0));
        }
    }

    #[test]
    fn h_plus_stays_finite_at_long_times() {
        let c = ctx(30.0);
        for n in [10.0, 48.0, 200.0] {
            let v = c.h_plus(0.0, n * c.period());
            assert!(v.norm().is_finite() && v.norm() < 10.0);
        }
    }
}
