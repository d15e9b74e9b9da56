//! The long-time periodic state: photon channels, their Fourier
//! coefficients and the amplitudes fixed by matching at the interface.
//!
//! For `x < 0` the state is `e^{ikx} + sum_m e^{-i m w t} e^{-i p_m x} R_m`
//! and for `x > 0` it is
//! `e^{iAx} sum_m T_m e^{-kappa_m x} e^{-i m w t} P_m(t)` with a periodic
//! factor `P_m = sum_q g_q e^{-i q w t}`. Each vacuum term solves the driven
//! equation exactly when
//! `P_m(t) = exp(i (E^2/8w^3) sin 2wt - kappa_m (E/w^2) cos wt)`.
//! Matching `psi` and `d_x psi` harmonic by harmonic at `x = 0` gives a
//! linear system in the `T_m`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::units::{hartree_to_ev, PhysicalConfig};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which exponent is used for the periodic factor of the vacuum channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Convention {
    /// `i (E^2/8w^3) sin 2wt - kappa (E/w^2) cos wt`, the form that solves the
    /// driven equation.
    #[default]
    Derived,
    /// `i (E^2/4w^3) sin 2wt + kappa (2E/w^2) cos wt` with `e^{-iqwt}`
    /// projection, literally as printed.
    Printed,
}

/// Truncation and tolerance settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetOptions {
    pub convention: Convention,
    /// Upper bound of the automatic truncation search.
    pub max_channels: usize,
    /// Edge amplitude below which the automatic truncation stops.
    pub edge_tolerance: f64,
    /// Change of the low-order amplitudes between successive truncations
    /// below which the automatic truncation stops.
    pub convergence: f64,
    /// Harmonic rows matched beyond the channel range on each side;
    /// `None` takes as many as there are channels.
    pub extra_rows: Option<usize>,
    /// Largest accepted relative least-squares residual.
    pub residual_limit: f64,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        FloquetOptions {
            convention: Convention::Derived,
            max_channels: 64,
            edge_tolerance: 1e-12,
            convergence: 1e-8,
            extra_rows: None,
            residual_limit: 1e-6,
        }
    }
}

/// `U + U_p - k^2/2`.
pub fn omega_c(config: &PhysicalConfig) -> f64 {
    config.thresholds().omega_c_channel
}

/// Decay exponent of vacuum channel `m`; `-i` times the outgoing momentum
/// for open channels.
pub fn kappa(m: i64, config: &PhysicalConfig) -> Complex64 {
    let gap = omega_c(config) - m as f64 * config.omega;
    if gap >= 0.0 {
        Complex64::new((2.0 * gap).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-2.0 * gap).sqrt())
    }
}

/// Momentum `sqrt(k^2 + 2 m w)` of reflected channel `m`, on the root that
/// decays as `x -> -infinity` when the channel is closed.
pub fn left_momentum(m: i64, config: &PhysicalConfig) -> Complex64 {
    let p2 = config.k * config.k + 2.0 * m as f64 * config.omega;
    if p2 >= 0.0 {
        Complex64::new(p2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-p2).sqrt())
    }
}

/// Periodic factor of a vacuum channel split into `e^{scale}` times a part of
/// modulus at most one.
#[derive(Debug, Clone, Copy)]
struct Periodic {
    convention: Convention,
    kappa: Complex64,
    beta: f64,
    c8: f64,
    omega: f64,
}

impl Periodic {
    fn new(convention: Convention, kappa: Complex64, config: &PhysicalConfig) -> Self {
        let w = config.omega;
        Periodic {
            convention,
            kappa,
            beta: config.field / (w * w),
            c8: config.field * config.field / (8.0 * w * w * w),
            omega: w,
        }
    }

    fn log_scale(&self) -> Complex64 {
        match self.convention {
            Convention::Derived => self.kappa * self.beta,
            Convention::Printed => 2.0 * self.kappa * self.beta,
        }
    }

    /// `P(t) e^{-scale}`.
    fn scaled(&self, t: f64) -> Complex64 {
        let (s2, c1) = ((2.0 * self.omega * t).sin(), (self.omega * t).cos());
        match self.convention {
            Convention::Derived => (I * self.c8 * s2 - self.kappa * self.beta * (c1 + 1.0)).exp(),
            // Projection with e^{-iqwt} is the e^{+iqwt} projection of P(-t).
            Convention::Printed => (-I * 2.0 * self.c8 * s2 + 2.0 * self.kappa * self.beta * (c1 - 1.0)).exp(),
        }
    }

    /// Trapezoid points that resolve harmonics up to `qmax`.
    fn samples(&self, qmax: usize) -> usize {
        let width = self.log_scale().norm() + 4.0 * self.c8;
        2 * (qmax + 2 * width.ceil() as usize + 48)
    }

    /// Scaled coefficients `g_q e^{-scale}` of `P = sum_q g_q e^{-iqwt}` for
    /// `q` in `[-qmax, qmax]`.
    fn coefficients(&self, qmax: usize) -> Vec<Complex64> {
        let n = self.samples(qmax);
        let period = 2.0 * PI / self.omega;
        let vals: Vec<Complex64> = (0..n).map(|j| self.scaled(period * j as f64 / n as f64)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * qmax + 1];
        for (j, &v) in vals.iter().enumerate() {
            let step = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let mut e = step.powi(-(qmax as i32));
            for o in out.iter_mut() {
                *o += v * e;
                e *= step;
            }
        }
        out.iter_mut().for_each(|o| *o /= n as f64);
        out
    }
}

/// Fourier coefficient `g_q` of the periodic factor for decay exponent
/// `kappa`, by the trapezoid rule over one period.
pub fn g_coeff(q: i64, kappa: Complex64, config: &PhysicalConfig, convention: Convention) -> Result<Complex64> {
    let p = Periodic::new(convention, kappa, config);
    let qmax = q.unsigned_abs() as usize;
    let scaled = p.coefficients(qmax)[(q + qmax as i64) as usize];
    let ls = p.log_scale();
    if ls.re > 700.0 {
        return Err(Error::Overflow { channel: q });
    }
    Ok(scaled * ls.exp())
}

/// Amplitudes of the periodic state for channels `-N..=N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloquetSolution {
    pub config: PhysicalConfig,
    pub convention: Convention,
    pub n: usize,
    pub kappa: Vec<Complex64>,
    pub left_momentum: Vec<Complex64>,
    pub reflection: Vec<Complex64>,
    /// `T_m e^{scale_m}`; equal in modulus to `T_m` for open channels.
    pub transmission_scaled: Vec<Complex64>,
    /// Logarithm of the scale factor of each channel.
    pub log_scale: Vec<Complex64>,
    pub open_right: Vec<bool>,
    pub open_left: Vec<bool>,
    pub omega_c: f64,
    /// Condition estimate of the matching matrix.
    pub condition: f64,
    /// Relative least-squares residual of the matching system.
    pub residual: f64,
}

impl FloquetSolution {
    pub fn channels(&self) -> impl Iterator<Item = i64> + '_ {
        (-(self.n as i64))..=(self.n as i64)
    }

    fn index(&self, m: i64) -> usize {
        (m + self.n as i64) as usize
    }

    /// Unscaled `T_m`, possibly zero or infinite for deep closed channels.
    pub fn transmission(&self, m: i64) -> Complex64 {
        let i = self.index(m);
        let t = self.transmission_scaled[i];
        if t == Complex64::new(0.0, 0.0) {
            return t;
        }
        (t.ln() - self.log_scale[i]).exp()
    }

    /// Outgoing momentum of open vacuum channel `m`, zero for closed ones.
    pub fn right_momentum(&self, m: i64) -> f64 {
        let i = self.index(m);
        if self.open_right[i] {
            -self.kappa[i].im
        } else {
            0.0
        }
    }

    /// Period-averaged current carried by vacuum channel `m`.
    pub fn channel_current(&self, m: i64) -> f64 {
        self.right_momentum(m) * self.transmission_scaled[self.index(m)].norm_sqr()
    }

    /// Period-averaged reflected current of channel `m`.
    pub fn reflected_current(&self, m: i64) -> f64 {
        let i = self.index(m);
        if self.open_left[i] {
            self.left_momentum[i].re * self.reflection[i].norm_sqr()
        } else {
            0.0
        }
    }

    /// `|sum reflected + sum transmitted - k| / k`.
    pub fn flux_defect(&self) -> f64 {
        let total: f64 = self.channels().map(|m| self.reflected_current(m) + self.channel_current(m)).sum();
        (total - self.config.k).abs() / self.config.k
    }

    /// Transmitted current of the periodic state; independent of `x`.
    pub fn asymptotic_current(&self) -> f64 {
        self.channels().map(|m| self.channel_current(m)).sum()
    }

    fn periodic(&self, i: usize) -> Periodic {
        Periodic::new(self.convention, self.kappa[i], &self.config)
    }

    /// Periodic part `psi_bar(x, t)` and its x-derivative.
    pub fn periodic_part(&self, x: f64, t: f64) -> (Complex64, Complex64) {
        self.side(x, t, x < 0.0)
    }

    fn side(&self, x: f64, t: f64, metal: bool) -> (Complex64, Complex64) {
        let w = self.config.omega;
        if metal {
            let k = self.config.k;
            let mut v = Complex64::from_polar(1.0, k * x);
            let mut d = I * k * v;
            for m in self.channels() {
                let i = self.index(m);
                let p = self.left_momentum[i];
                let e = (-I * p * x - I * m as f64 * w * t).exp() * self.reflection[i];
                v += e;
                d += -I * p * e;
            }
            (v, d)
        } else {
            let a = self.config.field / w * (w * t).sin();
            let mut v = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for m in self.channels() {
                let i = self.index(m);
                let kap = self.kappa[i];
                let term = self.transmission_scaled[i]
                    * (-kap * x - I * m as f64 * w * t).exp()
                    * self.periodic(i).scaled(t);
                v += term;
                d += -kap * term;
            }
            let gauge = Complex64::from_polar(1.0, a * x);
            (gauge * v, gauge * (d + I * a * v))
        }
    }

    /// Full asymptotic wavefunction `e^{-i k^2 t / 2} psi_bar(x, t)`.
    pub fn asymptotic_wave(&self, x: f64, t: f64) -> Complex64 {
        let k = self.config.k;
        Complex64::from_polar(1.0, -0.5 * k * k * t) * self.periodic_part(x, t).0
    }

    /// Current of the asymptotic state at `(x, t)`.
    pub fn current(&self, x: f64, t: f64) -> f64 {
        let (v, d) = self.periodic_part(x, t);
        (v.conj() * d).im
    }

    /// Period average of `current(x, .)` by the trapezoid rule.
    pub fn averaged_current(&self, x: f64, samples: usize) -> f64 {
        let period = self.config.period;
        (0..samples)
            .map(|j| self.current(x, period * j as f64 / samples as f64))
            .sum::<f64>()
            / samples as f64
    }

    /// Largest mismatch of `psi` and `d_x psi` across `x = 0` over one period.
    pub fn matching_residual(&self, samples: usize) -> f64 {
        let period = self.config.period;
        (0..samples)
            .map(|j| {
                let t = period * j as f64 / samples as f64;
                let (vl, dl) = self.side(0.0, t, true);
                let (vr, dr) = self.side(0.0, t, false);
                (vl - vr).norm().max((dl - dr).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Max of `|i psi_t + psi_xx / 2 - V psi|` at the given points, with
    /// eighth-order central differences of step `h`.
    pub fn pde_residual(&self, points: &[(f64, f64)], h: f64) -> f64 {
        const C: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        const D: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let cfg = &self.config;
        points
            .iter()
            .map(|&(x, t)| {
                let psi = self.asymptotic_wave(x, t);
                let mut xx = C[0] * psi;
                for (j, c) in C.iter().enumerate().skip(1) {
                    let jh = j as f64 * h;
                    xx += *c * (self.asymptotic_wave(x + jh, t) + self.asymptotic_wave(x - jh, t));
                }
                xx /= h * h;
                let mut tt = Complex64::new(0.0, 0.0);
                for (j, c) in D.iter().enumerate() {
                    let jh = (j + 1) as f64 * h;
                    tt += *c * (self.asymptotic_wave(x, t + jh) - self.asymptotic_wave(x, t - jh));
                }
                tt /= h;
                let v = if x > 0.0 { cfg.u - cfg.field * x * (cfg.omega * t).cos() } else { 0.0 };
                (I * tt + 0.5 * xx - v * psi).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Writes `m, re_kappa, im_kappa, re_R, im_R, re_T, im_T, open_flag,
    /// channel_current`. `T` is the scaled amplitude.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "m,re_kappa,im_kappa,re_R,im_R,re_T,im_T,open_flag,channel_current")?;
        for m in self.channels() {
            let i = self.index(m);
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
                m,
                self.kappa[i].re,
                self.kappa[i].im,
                self.reflection[i].re,
                self.reflection[i].im,
                self.transmission_scaled[i].re,
                self.transmission_scaled[i].im,
                u8::from(self.open_right[i]),
                self.channel_current(m)
            )?;
        }
        Ok(())
    }
}

/// Builds and solves the matching system with channels `-n..=n`.
pub fn match_amplitudes(config: &PhysicalConfig, n: usize, options: &FloquetOptions) -> Result<FloquetSolution> {
    if n == 0 {
        return Err(Error::validation("channels", "need at least one channel on each side"));
    }
    let ni = n as i64;
    let size = 2 * n + 1;
    let extra = options.extra_rows.unwrap_or(n);
    let nh = n + extra;
    let nhi = nh as i64;
    let rows = 2 * nh + 1;
    let wc = omega_c(config);
    let kap: Vec<Complex64> = (-ni..=ni).map(|m| kappa(m, config)).collect();
    let pl: Vec<Complex64> = (-nhi..=nhi).map(|m| left_momentum(m, config)).collect();
    let qmax = n + nh + 1;
    // Scaled coefficient families, one per channel.
    let families: Vec<Vec<Complex64>> = kap
        .par_iter()
        .map(|&k| Periodic::new(options.convention, k, config).coefficients(qmax))
        .collect();
    let g = |m: usize, q: i64| families[m][(q + qmax as i64) as usize];
    let half = config.field / (2.0 * config.omega);
    let mut a = DMatrix::<Complex64>::zeros(rows, size);
    for (r, nn) in (-nhi..=nhi).enumerate() {
        for (c, mm) in (-ni..=ni).enumerate() {
            let q = nn - mm;
            a[(r, c)] = (kap[c] - I * pl[r]) * g(c, q) - half * (g(c, q + 1) - g(c, q - 1));
        }
    }
    let mut rhs = DVector::<Complex64>::zeros(rows);
    rhs[nh] = -2.0 * I * config.k;
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    // Deep closed channels are nearly dependent on each other; the extra rows
    // and the singular-value cutoff pick the bounded representative.
    let t = svd
        .solve(&rhs, smax * 1e-15)
        .map_err(|_| Error::Conditioning { condition, residual: f64::INFINITY })?;
    let residual = (&a * &t - &rhs).norm() / rhs.norm();
    if !(residual <= options.residual_limit) {
        return Err(Error::Conditioning { condition, residual });
    }
    let mut reflection = Vec::with_capacity(size);
    for (r, nn) in (-ni..=ni).enumerate() {
        let cn: Complex64 = (0..size).map(|c| g(c, nn - (c as i64 - ni)) * t[c]).sum();
        reflection.push(if r == n { cn - 1.0 } else { cn });
    }
    let pl: Vec<Complex64> = (-ni..=ni).map(|m| left_momentum(m, config)).collect();
    let log_scale = kap
        .iter()
        .map(|&k| Periodic::new(options.convention, k, config).log_scale())
        .collect();
    Ok(FloquetSolution {
        config: *config,
        convention: options.convention,
        n,
        open_right: kap.iter().map(|k| k.re == 0.0).collect(),
        open_left: pl.iter().map(|p| p.im == 0.0).collect(),
        kappa: kap,
        left_momentum: pl,
        reflection,
        transmission_scaled: t.iter().copied().collect(),
        log_scale,
        omega_c: wc,
        condition,
        residual,
    })
}

/// Smallest truncation, in steps of four channels, whose outermost
/// amplitudes fall below the edge tolerance or whose low-order amplitudes
/// stop changing.
pub fn solve_auto(config: &PhysicalConfig, options: &FloquetOptions) -> Result<FloquetSolution> {
    let mut n = (first_open(config) as usize + 4).max(8).min(options.max_channels);
    let mut previous: Option<FloquetSolution> = None;
    loop {
        let sol = match match_amplitudes(config, n, options) {
            Err(Error::Conditioning { .. }) if n < options.max_channels => {
                n = (n + 4).min(options.max_channels);
                continue;
            }
            other => other?,
        };
        let edge = [0, 2 * n]
            .iter()
            .map(|&i| sol.reflection[i].norm().max(sol.transmission_scaled[i].norm()))
            .fold(0.0, f64::max);
        let settled = previous.as_ref().is_some_and(|p| amplitude_change(p, &sol) < options.convergence);
        if edge < options.edge_tolerance || settled || n >= options.max_channels {
            return Ok(sol);
        }
        previous = Some(sol);
        n = (n + 4).min(options.max_channels);
    }
}

/// Largest change of `R_m` and of the open `|T_m|` over the channels both
/// truncations share, below the first open channel plus four.
pub fn amplitude_change(a: &FloquetSolution, b: &FloquetSolution) -> f64 {
    let reach = (a.n.min(b.n) as i64).min(first_open(&a.config) + 4);
    (-reach..=reach)
        .map(|m| {
            let (ia, ib) = (a.index(m), b.index(m));
            let dr = (a.reflection[ia] - b.reflection[ib]).norm();
            let dt = if a.open_right[ia] {
                (a.transmission_scaled[ia] - b.transmission_scaled[ib]).norm()
            } else {
                0.0
            };
            dr.max(dt)
        })
        .fold(0.0, f64::max)
}

fn first_open(config: &PhysicalConfig) -> i64 {
    (omega_c(config) / config.omega).floor().max(0.0) as i64 + 1
}

/// Short human summary of the open channels.
pub fn describe(sol: &FloquetSolution) -> String {
    let open: Vec<String> = sol
        .channels()
        .filter(|&m| sol.right_momentum(m) > 0.0 && sol.channel_current(m) > 1e-30)
        .take(4)
        .map(|m| format!("m={m}: {:.3e}", sol.channel_current(m)))
        .collect();
    format!(
        "N={} omega_c={:.4} eV j_inf={:.6e} flux defect={:.2e} [{}]",
        sol.n,
        hartree_to_ev(sol.omega_c),
        sol.asymptotic_current(),
        sol.flux_defect(),
        open.join(", ")
    )
}
