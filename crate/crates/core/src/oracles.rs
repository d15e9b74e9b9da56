//! Independent reference values for the test suite.
//!
//! Everything here is computed in double-double arithmetic (`twofloat` for
//! the basic operations, elementary functions written out below) or by
//! step-halved quadrature, from the defining formulas rather than from the
//! rearranged forms used in production. Production code is only called to
//! obtain the value under test.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use twofloat::{consts, TwoFloat};

use crate::floquet::{self, Convention, FloquetOptions};
use crate::kernels::KernelContext;
use crate::specfun::{self, ChebyshevSeries, RuleKind};
use crate::units::{self, PhysicalConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: Complex64,
    pub production: Complex64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub measure: Measure,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, oracle: Complex64, production: Complex64, tolerance: f64, measure: Measure) -> Self {
        let abs_error = (oracle - production).norm();
        let rel_error = if oracle.norm() > 0.0 { abs_error / oracle.norm() } else { abs_error };
        let err = match measure {
            Measure::Absolute => abs_error,
            Measure::Relative => rel_error,
        };
        OracleReport {
            quantity: quantity.into(),
            oracle,
            production,
            abs_error,
            rel_error,
            tolerance,
            measure,
            pass: err <= tolerance,
        }
    }

    fn real(quantity: impl Into<String>, oracle: f64, production: f64, tolerance: f64, measure: Measure) -> Self {
        Self::new(quantity, Complex64::new(oracle, 0.0), Complex64::new(production, 0.0), tolerance, measure)
    }

    /// A production quantity that failed to evaluate is recorded as a failure.
    fn failed(quantity: impl Into<String>, oracle: Complex64, tolerance: f64, measure: Measure) -> Self {
        let mut r = Self::new(quantity, oracle, Complex64::new(f64::NAN, f64::NAN), tolerance, measure);
        r.pass = false;
        r
    }
}

// ---------------------------------------------------------------------------
// Double-double scalars.

/// Double-double number. Addition and multiplication come from `twofloat`;
/// division is done here by residual correction, since the crate's
/// reciprocal loses the low word (`1/3` comes back with `lo = 0`).
#[derive(Debug, Clone, Copy)]
struct Dd(TwoFloat);

const TAU: Dd = Dd(consts::TAU);
const LN_2: Dd = Dd(consts::LN_2);
const FRAC_2_SQRT_PI: Dd = Dd(consts::FRAC_2_SQRT_PI);
const FRAC_1_SQRT_2: Dd = Dd(consts::FRAC_1_SQRT_2);

fn dd(x: f64) -> Dd {
    Dd(TwoFloat::from(x))
}

fn to_f64(x: Dd) -> f64 {
    x.0.hi() + x.0.lo()
}

impl Dd {
    fn hi(self) -> f64 {
        self.0.hi()
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        Dd(self.0 + o.0)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        Dd(self.0 - o.0)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        Dd(self.0 * o.0)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi() / o.hi();
        let r = self - o * dd(q1);
        let q2 = r.hi() / o.hi();
        let r = r - o * dd(q2);
        let q3 = r.hi() / o.hi();
        dd(q1) + dd(q2) + dd(q3)
    }
}

fn dd_sqrt(x: Dd) -> Dd {
    let y = dd(to_f64(x).sqrt());
    y + (x - y * y) / (dd(2.0) * y)
}

fn dd_sin_cos(x: Dd) -> (Dd, Dd) {
    let n = (to_f64(x) / (2.0 * PI)).round();
    let r = x - TAU * dd(n);
    let r2 = r * r;
    let (mut s, mut c) = (r, dd(1.0));
    let (mut ts, mut tc) = (r, dd(1.0));
    for j in 1..60 {
        let j = j as f64;
        ts = -(ts * r2) / dd((2.0 * j) * (2.0 * j + 1.0));
        tc = -(tc * r2) / dd((2.0 * j - 1.0) * (2.0 * j));
        s = s + ts;
        c = c + tc;
        if to_f64(ts).abs() < 1e-36 && to_f64(tc).abs() < 1e-36 {
            break;
        }
    }
    (s, c)
}

fn dd_exp(x: Dd) -> Dd {
    let n = (to_f64(x) / std::f64::consts::LN_2).round();
    let r = x - LN_2 * dd(n);
    let (mut sum, mut term) = (dd(1.0), dd(1.0));
    for j in 1..60 {
        term = term * r / dd(j as f64);
        sum = sum + term;
        if to_f64(term).abs() < 1e-36 {
            break;
        }
    }
    sum * dd(2f64.powi(n as i32))
}

// ---------------------------------------------------------------------------
// Double-double complex numbers.

#[derive(Debug, Clone, Copy)]
struct Cd {
    re: Dd,
    im: Dd,
}

impl Cd {
    fn new(re: Dd, im: Dd) -> Self {
        Cd { re, im }
    }
    fn real(re: Dd) -> Self {
        Cd { re, im: dd(0.0) }
    }
    fn from_c(z: Complex64) -> Self {
        Cd::new(dd(z.re), dd(z.im))
    }
    fn to_c(self) -> Complex64 {
        Complex64::new(to_f64(self.re), to_f64(self.im))
    }
    fn norm(self) -> f64 {
        self.to_c().norm()
    }
    fn i() -> Self {
        Cd::new(dd(0.0), dd(1.0))
    }
    fn scale(self, a: Dd) -> Self {
        Cd::new(self.re * a, self.im * a)
    }
    fn exp(self) -> Self {
        let m = dd_exp(self.re);
        let (s, c) = dd_sin_cos(self.im);
        Cd::new(m * c, m * s)
    }
}

impl Add for Cd {
    type Output = Cd;
    fn add(self, o: Cd) -> Cd {
        Cd::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cd {
    type Output = Cd;
    fn sub(self, o: Cd) -> Cd {
        Cd::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cd {
    type Output = Cd;
    fn mul(self, o: Cd) -> Cd {
        Cd::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Div for Cd {
    type Output = Cd;
    fn div(self, o: Cd) -> Cd {
        let d = o.re * o.re + o.im * o.im;
        Cd::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
}

impl Neg for Cd {
    type Output = Cd;
    fn neg(self) -> Cd {
        Cd::new(-self.re, -self.im)
    }
}

// ---------------------------------------------------------------------------
// Reference functions.

/// `erfc z` by the Maclaurin series of `erf` for `|z| <= 3` and by the
/// Laplace continued fraction for `Re z > 0` beyond that.
pub fn erfc_reference(z: Complex64) -> Complex64 {
    let zd = Cd::from_c(z);
    let two_over_sqrt_pi = FRAC_2_SQRT_PI;
    if z.norm() <= 3.0 {
        let mz2 = -(zd * zd);
        let mut term = zd;
        let mut sum = zd;
        for n in 1..400 {
            term = (term * mz2).scale(dd(1.0) / dd(n as f64));
            let add = term.scale(dd(1.0) / dd((2 * n + 1) as f64));
            sum = sum + add;
            if n as f64 > z.norm_sqr() && add.norm() < 1e-34 {
                break;
            }
        }
        return (Cd::real(dd(1.0)) - sum.scale(two_over_sqrt_pi)).to_c();
    }
    assert!(z.re > 0.0, "continued fraction oracle needs Re z > 0");
    let fraction = |depth: usize| {
        let mut t = zd;
        for n in (1..=depth).rev() {
            t = zd + Cd::real(dd(0.5 * n as f64)) / t;
        }
        Cd::real(dd(1.0)) / t
    };
    let k = fraction(4000);
    ((-(zd * zd)).exp() * k).scale(two_over_sqrt_pi * dd(0.5)).to_c()
}

/// `J_n(x)` by its power series.
pub fn bessel_reference(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs();
    let half = dd(0.5 * x);
    let mut term = dd(1.0);
    for j in 1..=m {
        term = term * half / dd(j as f64);
    }
    let mut sum = term;
    let h2 = half * half;
    for j in 1..200u64 {
        term = -(term * h2) / dd((j * (j + m)) as f64);
        sum = sum + term;
        if to_f64(term).abs() < 1e-36 {
            break;
        }
    }
    let v = to_f64(sum);
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Kernel quantities at `(s, t)` straight from their definitions.
#[derive(Debug, Clone, Copy)]
pub struct KernelReference {
    pub alpha: f64,
    pub f: f64,
    pub ds_f: f64,
    /// `sqrt(t - s) g(s, t)`.
    pub g_scaled: Complex64,
    pub g: Complex64,
}

pub fn kernel_reference(config: &PhysicalConfig, s: f64, t: f64) -> KernelReference {
    let (e, w, u) = (dd(config.field), dd(config.omega), dd(config.u));
    let (sd, td) = (dd(s), dd(t));
    let tau = td - sd;
    let (sin_ws, cos_ws) = dd_sin_cos(w * sd);
    let (_, cos_wt) = dd_sin_cos(w * td);
    let (sin_2ws, cos_2ws) = dd_sin_cos(dd(2.0) * w * sd);
    let (sin_2wt, _) = dd_sin_cos(dd(2.0) * w * td);
    let c = cos_wt - cos_ws;
    let e2 = e * e;
    let w2 = w * w;
    let up = e2 / (dd(4.0) * w2);
    let c8 = e2 / (dd(8.0) * w2 * w);
    let alpha = sin_ws + c / (w * tau);
    let f = e2 * c * c / (dd(2.0) * w2 * w2 * tau) - (u + up) * tau + c8 * (sin_2wt - sin_2ws);
    let ds_f = e2 * c * sin_ws / (w2 * w * tau) + e2 * c * c / (dd(2.0) * w2 * w2 * tau * tau) + u + up
        - up * cos_2ws;
    let phase = (Cd::i().scale(f)).exp();
    let one = Cd::real(dd(1.0));
    let g_scaled = (phase - one).scale(dd(1.0) / (dd(2.0) * tau)) + (Cd::i() * phase).scale(ds_f);
    let g = g_scaled.scale(dd(1.0) / dd_sqrt(tau));
    KernelReference {
        alpha: to_f64(alpha),
        f: to_f64(f),
        ds_f: to_f64(ds_f),
        g_scaled: g_scaled.to_c(),
        g: g.to_c(),
    }
}

/// Field-free evolution of the evanescent tail `T0 e^{-kappa0 x}`, `x > 0`,
/// under `-1/2 d_x^2 + U` on the whole line, by its Fourier integral on the
/// rotated contour `p = e^{-i pi/4} r` (Gaussian in `r`), trapezoid rule with
/// step halving.
pub fn free_tail_reference(config: &PhysicalConfig, x: f64, t: f64) -> Complex64 {
    let (k, u) = (dd(config.k), dd(config.u));
    let kappa0 = dd_sqrt(dd(2.0) * u - k * k);
    let ik = Cd::new(dd(0.0), k);
    let t0 = ik.scale(dd(2.0)) / (ik - Cd::real(kappa0));
    let rot = Cd::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    let td = dd(t);
    let xd = dd(x);
    let integrand = |r: f64| {
        let rd = dd(r);
        let p = rot.scale(rd);
        // i p x - r^2 t / 2
        let arg = (Cd::i() * p).scale(xd) - Cd::real(rd * rd * td * dd(0.5));
        arg.exp() * rot / (Cd::real(kappa0) + Cd::i() * p)
    };
    // Cut where the Gaussian has fallen below e^{-90}.
    let c = x / std::f64::consts::SQRT_2;
    let reach = (c + (c * c + 180.0 * t).sqrt()) / t;
    let trapezoid = |h: f64| {
        let n = (reach / h).ceil() as i64;
        let mut sum = Cd::real(dd(0.0));
        for j in -n..=n {
            sum = sum + integrand(j as f64 * h);
        }
        sum.scale(dd(h))
    };
    let mut h = 0.05;
    let mut prev = trapezoid(h);
    loop {
        h *= 0.5;
        let next = trapezoid(h);
        let change = (next - prev).norm();
        prev = next;
        if change < 1e-24 || h < 1e-4 {
            break;
        }
    }
    let (s, c) = dd_sin_cos(-(u * td));
    let time = Cd::new(c, s);
    (time * t0 * prev).scale(dd(1.0) / TAU).to_c()
}

/// Atomic-unit conversions rebuilt from the SI defining constants and the
/// CODATA 2018 table (`E_h`, `a_0`; `e` and `h` are exact).
pub struct ConversionTable {
    pub hartree_ev: f64,
    pub field_v_per_nm: f64,
    pub time_as: f64,
    pub bohr_nm: f64,
}

pub fn conversion_table() -> ConversionTable {
    let e = dd(1.602176634e-19);
    let hbar = dd(6.62607015e-34) / TAU;
    let eh = dd(4.3597447222071e-18);
    let a0 = dd(5.29177210903e-11);
    ConversionTable {
        hartree_ev: to_f64(eh / e),
        field_v_per_nm: to_f64(eh / (e * a0) / dd(1e9)),
        time_as: to_f64(hbar / eh * dd(1e18)),
        bohr_nm: to_f64(a0 * dd(1e9)),
    }
}

// ---------------------------------------------------------------------------
// The report.

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn push_result(out: &mut Vec<OracleReport>, name: String, oracle: Complex64, prod: crate::Result<Complex64>, tol: f64, m: Measure) {
    match prod {
        Ok(p) => out.push(OracleReport::new(name, oracle, p, tol, m)),
        Err(_) => out.push(OracleReport::failed(name, oracle, tol, m)),
    }
}

pub fn units_reports(out: &mut Vec<OracleReport>) {
    use Measure::Relative;
    let table = conversion_table();
    out.push(OracleReport::real("hartree in eV", table.hartree_ev, units::HARTREE_EV, 1e-10, Relative));
    out.push(OracleReport::real("field unit in V/nm", table.field_v_per_nm, units::FIELD_AU_V_PER_NM, 1e-10, Relative));
    out.push(OracleReport::real("time unit in as", table.time_as, units::TIME_AU_AS, 1e-10, Relative));
    out.push(OracleReport::real("bohr in nm", table.bohr_nm, units::BOHR_NM, 1e-10, Relative));
    let one = to_f64(dd(1.0) / dd(table.field_v_per_nm));
    out.push(OracleReport::real("1 V/nm in a.u.", one, units::v_per_nm_to_au(1.0), 1e-10, Relative));
    out.push(OracleReport::real("1 V/nm in a.u. (quoted 0.0019447)", 0.0019447, one, 1e-7, Measure::Absolute));

    let cfg = PhysicalConfig::new(4.5, 5.5, 10.0, 6.0).expect("valid parameters");
    let e = dd(10.0) / dd(table.field_v_per_nm);
    let w = dd(6.0) / dd(table.hartree_ev);
    let up = e * e / (dd(4.0) * w * w);
    let wc = dd(5.5) / dd(table.hartree_ev) + up;
    let th = cfg.thresholds();
    out.push(OracleReport::real("U_p at 10 V/nm, 6 eV (Ha)", to_f64(up), th.ponderomotive, 1e-10, Relative));
    out.push(OracleReport::real("omega_c at 10 V/nm, 6 eV (Ha)", to_f64(wc), th.omega_c, 1e-10, Relative));
    let up_ev = to_f64(up * dd(table.hartree_ev));
    let wc_ev = to_f64(wc * dd(table.hartree_ev));
    out.push(OracleReport::real("U_p in eV (quoted 0.0529)", 0.0529, up_ev, 5e-5, Measure::Absolute));
    out.push(OracleReport::real("omega_c in eV (quoted 5.553)", 5.553, wc_ev, 5e-4, Measure::Absolute));

    let cfg = PhysicalConfig::new(4.5, 5.5, 15.0, 1.55).expect("valid parameters");
    let k = dd_sqrt(dd(2.0) * dd(4.5) / dd(table.hartree_ev));
    let u = dd(10.0) / dd(table.hartree_ev);
    let e = dd(15.0) / dd(table.field_v_per_nm);
    let w = dd(1.55) / dd(table.hartree_ev);
    let kappa = dd_sqrt(dd(2.0) * (u + e * e / (dd(4.0) * w * w)) - k * k);
    out.push(OracleReport::real("kappa_0 at 15 V/nm, 1.55 eV", to_f64(kappa), floquet::kappa(0, &cfg).re, 1e-10, Relative));
    out.push(OracleReport::real("kappa_0 (quoted 0.7317)", 0.7317, to_f64(kappa), 5e-5, Measure::Absolute));
    let ctx = KernelContext::new(&cfg);
    out.push(OracleReport::real("|phi0(0)|^2 = 4 E_F / U", to_f64(dd(4.0) * dd(4.5) / dd(10.0)), ctx.t0.norm_sqr(), 1e-10, Measure::Absolute));
}

pub fn erfc_reports(out: &mut Vec<OracleReport>) {
    let one = erfc_reference(c(1.0, 0.0));
    out.push(OracleReport::new("erfc(1) (quoted 0.15729920705)", c(0.15729920705, 0.0), one, 1e-11, Measure::Absolute));
    let rot = Complex64::from_polar(2.0, -0.25 * PI);
    let points = [
        (c(1.0, 0.0), 1e-12),
        (rot, 1e-13),
        (c(0.5, 0.5), 1e-13),
        (c(-1.5, 2.0), 1e-12),
        (c(0.1, -2.9), 1e-12),
        (c(5.0, -4.0), 1e-12),
        (c(6.0, 1.0), 1e-12),
        (c(3.5, -3.5), 1e-12),
        (c(12.0, -11.0), 1e-12),
    ];
    for (z, tol) in points {
        let oracle = erfc_reference(z);
        push_result(out, format!("erfc({z})"), oracle, specfun::erfc_complex(z), tol, Measure::Relative);
    }
}

pub fn kernel_reports(out: &mut Vec<OracleReport>) {
    use Measure::Absolute;
    for field in [15.0, 30.0] {
        let cfg = PhysicalConfig::new(4.5, 5.5, field, 1.55).expect("valid parameters");
        let ctx = KernelContext::new(&cfg);
        let tau = cfg.period;
        let mut pts = vec![(0.3 * tau, 0.7 * tau), (0.1 * tau, 0.9 * tau), (0.0, 2.3 * tau)];
        let t = 0.61 * tau;
        for d in [1e-3, 1e-6, 1e-9] {
            pts.push((t - d, t));
        }
        for (s, t) in pts {
            let r = kernel_reference(&cfg, s, t);
            let at = format!("E={field}, t={:.2} tau, t-s={:.1e}", t / tau, t - s);
            let scale = |v: f64| v.abs().max(1.0);
            let mut push = |name: &str, o: f64, p: crate::Result<f64>| {
                let p = p.map(|v| c(v / scale(o), 0.0));
                push_result(out, format!("{name} at {at}"), c(o / scale(o), 0.0), p, 1e-12, Absolute);
            };
            push("alpha", r.alpha, ctx.alpha(s, t));
            push("f", r.f, ctx.f_phase(s, t));
            push("d_s f", r.ds_f, ctx.ds_f(s, t));
            let gs = r.g_scaled.norm().max(1.0);
            push_result(
                out,
                format!("sqrt(t-s) g at {at}"),
                r.g_scaled / gs,
                ctx.g_scaled(s, t).map(|v| v / gs),
                1e-12,
                Absolute,
            );
            if t - s > 1e-3 {
                let gn = r.g.norm().max(1.0);
                push_result(out, format!("g at {at}"), r.g / gn, ctx.g_kernel(s, t).map(|v| v / gn), 1e-12, Absolute);
            }
        }
        // Diagonal limit i U / 2 of sqrt(t-s) g.
        let diag = c(0.0, 0.5 * cfg.u);
        push_result(out, format!("sqrt(t-s) g on the diagonal, E={field}"), diag, ctx.g_scaled(t, t), 1e-12, Absolute);
    }
}

pub fn free_tail_reports(out: &mut Vec<OracleReport>) {
    let cfg = PhysicalConfig::new(4.5, 5.5, 0.0, 1.55).expect("valid parameters");
    let ctx = KernelContext::new(&cfg);
    for (x, t) in [(0.0, 3.0), (0.5, 3.0), (2.0, 10.0), (0.3, 40.0), (5.0, 1.0)] {
        let oracle = free_tail_reference(&cfg, x, t);
        out.push(OracleReport::new(
            format!("field-free h_+ at x={x}, t={t}"),
            oracle,
            ctx.h_plus(x, t),
            1e-12,
            Measure::Absolute,
        ));
    }
}

pub fn floquet_reports(out: &mut Vec<OracleReport>) {
    use Measure::Absolute;
    for (field, photon) in [(10.0, 6.0), (30.0, 1.55)] {
        let cfg = PhysicalConfig::new(4.5, 5.5, field, photon).expect("valid parameters");
        let c8 = {
            let (e, w) = (dd(cfg.field), dd(cfg.omega));
            to_f64(e * e / (dd(8.0) * w * w * w))
        };
        let zero = c(0.0, 0.0);
        for n in -3i64..=3 {
            let oracle = c(bessel_reference(-n, c8), 0.0);
            let prod = floquet::g_coeff(2 * n, zero, &cfg, Convention::Derived);
            push_result(out, format!("g_{} at kappa=0, E={field}, w={photon}", 2 * n), oracle, prod, 1e-12, Absolute);
            let odd = floquet::g_coeff(2 * n + 1, zero, &cfg, Convention::Derived);
            push_result(out, format!("g_{} at kappa=0, E={field}, w={photon}", 2 * n + 1), zero, odd, 1e-12, Absolute);
        }
        let kappa = c(0.8, 0.0);
        for q in 1..=3i64 {
            let a = floquet::g_coeff(q, kappa, &cfg, Convention::Derived);
            let b = floquet::g_coeff(q, -kappa, &cfg, Convention::Derived);
            if let (Ok(a), Ok(b)) = (a, b) {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let scale = a.norm().max(1.0);
                out.push(OracleReport::new(format!("g_{q} parity under kappa -> -kappa, E={field}"), sign * a / scale, b / scale, 1e-12, Absolute));
                out.push(OracleReport::new(format!("g_{q} realness at real kappa, E={field}"), c(a.re, 0.0) / scale, a / scale, 1e-12, Absolute));
            } else {
                out.push(OracleReport::failed(format!("g_{q} parity, E={field}"), zero, 1e-12, Absolute));
            }
        }
    }
    let cfg = PhysicalConfig::new(4.5, 5.5, 10.0, 6.0).expect("valid parameters");
    let opts = FloquetOptions::default();
    match (floquet::match_amplitudes(&cfg, 12, &opts), floquet::match_amplitudes(&cfg, 16, &opts)) {
        (Ok(a), Ok(b)) => {
            let zero = c(0.0, 0.0);
            out.push(OracleReport::new("flux defect, 10 V/nm, 6 eV, N=12", zero, c(a.flux_defect(), 0.0), 1e-8, Absolute));
            out.push(OracleReport::new("R_0 change N=12 -> 16", b.reflection[16], a.reflection[12], 1e-8, Absolute));
            out.push(OracleReport::new("T_0 change N=12 -> 16", b.transmission(0), a.transmission(0), 1e-8, Absolute));
        }
        _ => out.push(OracleReport::failed("flux defect, 10 V/nm, 6 eV, N=12", c(0.0, 0.0), 1e-8, Absolute)),
    }
}

pub fn spectral_reports(out: &mut Vec<OracleReport>) {
    use Measure::Absolute;
    let f = |x: f64| {
        let (s, c) = dd_sin_cos(dd(x));
        Complex64::new(to_f64(c), to_f64(s))
    };
    match ChebyshevSeries::from_fn(0.0, 1.0, 20, |x| Complex64::from_polar(1.0, x)) {
        Ok(series) => {
            let err = (0..=1000)
                .map(|i| i as f64 / 1000.0)
                .map(|x| series.eval(x).map(|v| (v - f(x)).norm()).unwrap_or(f64::NAN))
                .fold(0.0, f64::max);
            out.push(OracleReport::real("Chebyshev fit of e^{ix}, N=20, max error", 0.0, err, 1e-14, Absolute));
        }
        Err(_) => out.push(OracleReport::failed("Chebyshev fit of e^{ix}, N=20", c(0.0, 0.0), 1e-14, Absolute)),
    }
    let exact = to_f64(dd(2.0) / dd(15.0));
    push_result(
        out,
        "Gauss-Legendre n=8 on x^14".into(),
        c(exact, 0.0),
        specfun::gauss_rule(RuleKind::Legendre, 8).map(|r| c(r.integrate(|x| x.powi(14)), 0.0)),
        1e-15,
        Absolute,
    );
}

/// Every reference check, in a fixed order.
pub fn run_oracles() -> Vec<OracleReport> {
    let mut out = Vec::new();
    units_reports(&mut out);
    erfc_reports(&mut out);
    spectral_reports(&mut out);
    kernel_reports(&mut out);
    free_tail_reports(&mut out);
    floquet_reports(&mut out);
    out
}

pub fn write_report_csv(out: &mut impl Write, reports: &[OracleReport]) -> std::io::Result<()> {
    writeln!(
        out,
        "quantity,oracle_re,oracle_im,production_re,production_im,abs_error,rel_error,tolerance,measure,pass"
    )?;
    for r in reports {
        let m = match r.measure {
            Measure::Absolute => "abs",
            Measure::Relative => "rel",
        };
        writeln!(
            out,
            "\"{}\",{:.17e},{:.17e},{:.17e},{:.17e},{:.3e},{:.3e},{:.1e},{},{}",
            r.quantity.replace('"', "'"),
            r.oracle.re,
            r.oracle.im,
            r.production.re,
            r.production.im,
            r.abs_error,
            r.rel_error,
            r.tolerance,
            m,
            r.pass
        )?;
    }
    Ok(())
}
