//! Time averages of the current and the quantities read off them: running
//! and double averages, the per-period spread of the running average and
//! its power-law fit, oscillation counts and frequency scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::units::{ev_to_hartree, hartree_to_ev, PhysicalConfig};
use crate::volterra::{solve, SolverOptions};

/// Default samples per laser period.
pub const SAMPLES_PER_PERIOD: usize = 1024;

/// Uniformly sampled current `j(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentSeries {
    pub x: f64,
    pub t0: f64,
    pub dt: f64,
    pub j: Vec<f64>,
}

impl CurrentSeries {
    pub fn new(x: f64, t0: f64, dt: f64, j: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation("dt", format!("{dt} must be positive")));
        }
        if j.len() < 2 {
            return Err(Error::validation("j", "need at least two samples"));
        }
        if let Some(bad) = j.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation("j", format!("sample {bad} is not finite")));
        }
        Ok(CurrentSeries { x, t0, dt, j })
    }

    /// Samples `f` on `[0, t_end]` with step `dt`, in parallel.
    pub fn sample(x: f64, t_end: f64, dt: f64, f: impl Fn(f64) -> Result<f64> + Sync) -> Result<Self> {
        let n = (t_end / dt).round() as usize;
        let j = (0..=n)
            .into_par_iter()
            .map(|i| f((i as f64 * dt).min(t_end)))
            .collect::<Result<Vec<f64>>>()?;
        CurrentSeries::new(x, 0.0, dt, j)
    }

    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.t(self.len() - 1)
    }

    /// Index of the sample nearest to `t`.
    fn index(&self, t: f64) -> usize {
        (((t - self.t0) / self.dt).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// Number of steps spanning `tau`, which must be a whole number.
    fn steps(&self, tau: f64) -> Result<usize> {
        let m = tau / self.dt;
        if !(tau > 0.0) || (m - m.round()).abs() > 1e-6 * m.max(1.0) {
            return Err(Error::validation(
                "tau",
                format!("averaging window {tau} is not a multiple of the step {}", self.dt),
            ));
        }
        Ok(m.round() as usize)
    }

    pub fn write_csv(&self, out: &mut impl Write, config: &PhysicalConfig) -> std::io::Result<()> {
        writeln!(out, "t_au,t_over_period,j_over_k")?;
        for (i, j) in self.j.iter().enumerate() {
            let t = self.t(i);
            writeln!(out, "{:.16e},{:.16e},{:.16e}", t, t / config.period, j / config.k)?;
        }
        Ok(())
    }
}

/// `<j>_t = (1/tau) int_{t-tau}^t j ds` by the trapezoid rule, on `[t0+tau, end]`.
pub fn running_average(series: &CurrentSeries, tau: f64) -> Result<CurrentSeries> {
    let m = series.steps(tau)?;
    if m >= series.len() {
        return Err(Error::domain(
            "running_average",
            format!("series of length {} is shorter than tau = {tau}", series.end() - series.t0),
        ));
    }
    let j = &series.j;
    // Cumulative trapezoid sums make every window O(1).
    let mut cum = vec![0.0; j.len()];
    for i in 1..j.len() {
        cum[i] = cum[i - 1] + 0.5 * (j[i - 1] + j[i]);
    }
    let out = (m..j.len()).map(|i| (cum[i] - cum[i - m]) / m as f64).collect();
    CurrentSeries::new(series.x, series.t(m), series.dt, out)
}

/// `<<j>> = (1/tau) int_{T-tau}^T <j>_t dt`.
pub fn double_average(series: &CurrentSeries, t_final: f64, tau: f64) -> Result<f64> {
    if t_final < series.t0 + 2.0 * tau - 0.5 * series.dt {
        return Err(Error::domain(
            "double_average",
            format!("T = {t_final} is shorter than two windows of {tau}"),
        ));
    }
    if t_final > series.end() + 0.5 * series.dt {
        return Err(Error::domain(
            "double_average",
            format!("T = {t_final} is past the end of the series"),
        ));
    }
    let avg = running_average(series, tau)?;
    let m = avg.steps(tau)?;
    let hi = avg.index(t_final);
    let lo = hi - m;
    let sum: f64 = (lo..hi).map(|i| 0.5 * (avg.j[i] + avg.j[i + 1])).sum();
    Ok(sum / m as f64)
}

/// Maximum and minimum of a running average over one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodSpread {
    /// Period number `n`; the period is `((n-1) tau, n tau]`.
    pub n: usize,
    pub max: f64,
    pub min: f64,
}

impl PeriodSpread {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// `M_n` and `mu_n` of `avg` for every complete period it covers.
pub fn period_extrema(avg: &CurrentSeries, tau: f64) -> Result<Vec<PeriodSpread>> {
    avg.steps(tau)?;
    let first = ((avg.t0 / tau) - 1e-9).ceil() as usize + 1;
    let mut out = Vec::new();
    let mut n = first.max(1);
    loop {
        let (a, b) = ((n - 1) as f64 * tau, n as f64 * tau);
        if b > avg.end() + 0.5 * avg.dt {
            break;
        }
        let lo = avg.index(a) + 1;
        let hi = avg.index(b);
        if hi < lo {
            break;
        }
        let slice = &avg.j[lo..=hi];
        out.push(PeriodSpread {
            n,
            max: slice.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: slice.iter().copied().fold(f64::INFINITY, f64::min),
        });
        n += 1;
    }
    Ok(out)
}

/// Power law `spread ~ prefactor * n^slope` fitted in log-log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub prefactor: f64,
    /// Prefactor with the slope held at `-3/2` (geometric mean of
    /// `n^{3/2} (M_n - mu_n)`).
    pub prefactor_three_halves: f64,
    /// `(n, M_n - mu_n)` of the periods used.
    pub points: Vec<(f64, f64)>,
    /// Periods dropped because the spread was not positive.
    pub excluded: usize,
}

/// Least-squares fit of `log(M_n - mu_n)` against `log n` over the periods
/// `n >= first_period`. Spreads are divided by `scale` first (use `k` for
/// the normalized current).
pub fn decay_fit(avg: &CurrentSeries, tau: f64, first_period: usize, scale: f64) -> Result<DecayFit> {
    let spreads = period_extrema(avg, tau)?;
    if spreads.len() < 8 {
        return Err(Error::domain(
            "decay_fit",
            format!("need at least 8 periods of the average, got {}", spreads.len()),
        ));
    }
    let mut points = Vec::new();
    let mut excluded = 0;
    for s in spreads.iter().filter(|s| s.n >= first_period) {
        let d = s.spread() / scale;
        if d > 0.0 && d.is_finite() {
            points.push((s.n as f64, d));
        } else {
            excluded += 1;
        }
    }
    if points.len() < 2 {
        return Err(Error::domain("decay_fit", "fewer than two usable periods"));
    }
    let (slope, intercept) = line_fit(points.iter().map(|&(n, d)| (n.ln(), d.ln())));
    let fixed = points.iter().map(|&(n, d)| d.ln() + 1.5 * n.ln()).sum::<f64>() / points.len() as f64;
    Ok(DecayFit {
        slope,
        prefactor: intercept.exp(),
        prefactor_three_halves: fixed.exp(),
        points,
        excluded,
    })
}

/// Ordinary least squares `y = slope x + intercept`.
fn line_fit(data: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = data.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Asymptote of `<j>_t` from `<<j>>` at the ends of periods `n`, fitted to
/// `a + b n^{-3/2} + c n^{-5/2}`.
pub fn extrapolate_average(series: &CurrentSeries, tau: f64, periods: std::ops::RangeInclusive<usize>) -> Result<f64> {
    let mut rows = Vec::new();
    for n in periods {
        let t = n as f64 * tau;
        rows.push((n as f64, double_average(series, t, tau)?));
    }
    if rows.len() < 4 {
        return Err(Error::domain("extrapolate_average", "need at least four periods"));
    }
    let a = nalgebra::DMatrix::from_fn(rows.len(), 3, |i, c| match c {
        0 => 1.0,
        1 => rows[i].0.powf(-1.5),
        _ => rows[i].0.powf(-2.5),
    });
    let b = nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::domain("extrapolate_average", e.to_string()))?;
    Ok(sol[0])
}

/// Strict local maxima of `values` above `floor`.
pub fn count_maxima(values: &[f64], floor: f64) -> usize {
    values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2] && w[1] > floor)
        .count()
}

/// Maxima of the raw current in period `index` (1-based), counted with a
/// floor of `1e-6 max |j|` over that period. Samples `[start, end)` of the
/// period are candidates, so a peak on a shared edge is counted once.
pub fn count_maxima_per_period(series: &CurrentSeries, tau: f64, index: usize) -> Result<usize> {
    let (lo, hi) = period_slice(series, tau, index)?;
    let j = &series.j;
    let peak = j[lo..=hi].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-6 * peak;
    Ok((lo.max(1)..hi.min(j.len() - 1))
        .filter(|&i| j[i] > j[i - 1] && j[i] > j[i + 1] && j[i] > floor)
        .count())
}

fn period_slice(series: &CurrentSeries, tau: f64, index: usize) -> Result<(usize, usize)> {
    if index == 0 {
        return Err(Error::validation("index", "periods are numbered from 1"));
    }
    let (a, b) = ((index - 1) as f64 * tau, index as f64 * tau);
    if a < series.t0 - 0.5 * series.dt || b > series.end() + 0.5 * series.dt {
        return Err(Error::domain(
            "period",
            format!("period {index} is not covered by the series"),
        ));
    }
    Ok((series.index(a), series.index(b)))
}

/// Largest deviation of `j` over period `index` from its Fourier partial
/// sum through harmonic `keep` of the laser frequency; measures the fast
/// structure inside one period.
pub fn subperiod_amplitude(series: &CurrentSeries, tau: f64, index: usize, keep: usize) -> Result<f64> {
    let (lo, hi) = period_slice(series, tau, index)?;
    let vals = &series.j[lo..hi];
    let n = vals.len() as f64;
    let mut smooth = vec![0.0; vals.len()];
    for h in 0..=keep {
        let (mut c, mut s) = (0.0, 0.0);
        for (i, v) in vals.iter().enumerate() {
            let ph = 2.0 * PI * (h * i) as f64 / n;
            c += v * ph.cos();
            s += v * ph.sin();
        }
        let w = if h == 0 { 1.0 } else { 2.0 } / n;
        for (i, out) in smooth.iter_mut().enumerate() {
            let ph = 2.0 * PI * (h * i) as f64 / n;
            *out += w * (c * ph.cos() + s * ph.sin());
        }
    }
    Ok(vals.iter().zip(&smooth).map(|(v, s)| (v - s).abs()).fold(0.0, f64::max))
}

/// Photon energy (eV) with `w - w_c(w) = offset`, where
/// `w_c = W + E^2/(4 w^2)`; the larger root of the fixed point.
pub fn threshold_photon_energy(config: &PhysicalConfig, offset_ev: f64) -> Result<f64> {
    let w0 = config.work_function() + ev_to_hartree(offset_ev);
    let e2 = 0.25 * config.field * config.field;
    // w^3 - w0 w^2 - E^2/4 = 0 has exactly one positive root when w0 > 0.
    let mut w = w0.max(0.0) + e2.cbrt();
    for _ in 0..100 {
        let f = w * w * w - w0 * w * w - e2;
        let df = 3.0 * w * w - 2.0 * w0 * w;
        let next = w - f / df;
        if (next - w).abs() < 1e-15 * w {
            w = next;
            break;
        }
        w = next;
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::domain("threshold_photon_energy", format!("no root for offset {offset_ev} eV")));
    }
    Ok(hartree_to_ev(w))
}

/// One frequency of a threshold scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub photon_energy_ev: f64,
    /// `w - w_c` in eV with `w_c = W + E^2/(4 w^2)`.
    pub detuning_ev: f64,
    pub double_average: f64,
    /// `<<j>> / E^2`, field in atomic units.
    pub normalized: f64,
    pub error: Option<String>,
}

/// Runs the boundary solver for each photon energy, `periods` periods,
/// and records `<<j>>` at `x = 0`. Failures are kept per point.
pub fn omega_scan(
    template: &PhysicalConfig,
    photon_energies_ev: &[f64],
    periods: usize,
    options: &SolverOptions,
) -> Vec<ScanPoint> {
    photon_energies_ev
        .par_iter()
        .map(|&w| {
            let run = || -> Result<(f64, f64)> {
                let cfg = template.with_photon_energy(w)?;
                let t_final = periods as f64 * cfg.period;
                let trace = solve(&cfg, t_final, options)?;
                let dt = cfg.period / SAMPLES_PER_PERIOD as f64;
                let series = CurrentSeries::sample(0.0, t_final, dt, |t| trace.current(t))?;
                let d = double_average(&series, t_final, cfg.period)?;
                Ok((hartree_to_ev(cfg.thresholds().omega_c), d))
            };
            match run() {
                Ok((wc, d)) => ScanPoint {
                    photon_energy_ev: w,
                    detuning_ev: w - wc,
                    double_average: d,
                    normalized: d / (template.field * template.field),
                    error: None,
                },
                Err(e) => {
                    let wc = template
                        .with_photon_energy(w)
                        .map(|c| hartree_to_ev(c.thresholds().omega_c))
                        .unwrap_or(f64::NAN);
                    ScanPoint {
                        photon_energy_ev: w,
                        detuning_ev: w - wc,
                        double_average: f64::NAN,
                        normalized: f64::NAN,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect()
}

pub fn write_scan_csv(out: &mut impl Write, points: &[ScanPoint]) -> std::io::Result<()> {
    writeln!(out, "photon_energy_ev,detuning_ev,double_average,normalized,error")?;
    for p in points {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            p.photon_energy_ev,
            p.detuning_ev,
            p.double_average,
            p.normalized,
            p.error.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}
