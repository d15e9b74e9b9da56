//! One function per subcommand. Each writes its tables into the sink and
//! records the solver diagnostics that go into the manifest.

use photoemission::floquet::{match_amplitudes, solve_auto};
use photoemission::observables::{
    decay_fit, double_average, extrapolate_average, omega_scan, period_extrema, running_average,
    threshold_photon_energy, CurrentSeries,
};
use photoemission::reference_cn::cn_evolve;
use photoemission::units::nm_to_bohr;
use photoemission::volterra::{residual, solve as solve_trace, BoundaryTrace};
use photoemission::wavefield::Wavefield;
use photoemission::PhysicalConfig;
use rayon::prelude::*;
use serde_json::json;

use crate::config::Config;
use crate::error::CliError;
use crate::output::{Sink, Table};

type Result<T> = std::result::Result<T, CliError>;

/// The residual check tabulates the whole history before each probe, so
/// the probes stay within the first few periods.
const RESIDUAL_PERIODS: f64 = 6.0;

/// Boundary solve to the end of `cfg.periods` periods, with its diagnostics.
pub fn trace_for(cfg: &Config, phys: &PhysicalConfig, sink: &mut Sink, label: &str) -> Result<BoundaryTrace> {
    let t_final = cfg.periods as f64 * phys.period;
    let trace = solve_trace(phys, t_final, &cfg.solver())?;
    let (colloc, tail, jump) = trace.worst_diagnostics();
    let n = cfg.residual_probes;
    let span = t_final.min(RESIDUAL_PERIODS * phys.period);
    let probes: Vec<f64> = (0..n).map(|i| span * (i as f64 + 0.37) / n as f64).collect();
    let res = if n > 0 { Some(residual(&trace, &probes)?) } else { None };
    sink.note(
        format!("{label}trace"),
        json!({
            "windows": trace.windows.len(),
            "collocation_residual": colloc,
            "tail_ratio": tail,
            "continuity_jump": jump,
            "integral_residual": res,
        }),
    );
    Ok(trace)
}

fn grid(t_final: f64, period: f64, per_period: usize) -> Vec<f64> {
    let n = (t_final / period).round() as usize * per_period;
    (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

pub fn solve(cfg: &Config, sink: &mut Sink) -> Result<()> {
    let phys = cfg.physical()?;
    let trace = trace_for(cfg, &phys, sink, "")?;
    let times = grid(trace.t_end(), phys.period, cfg.samples_per_period);
    let rows: Vec<[f64; 9]> = times
        .par_iter()
        .map(|&t| {
            let p = trace.psi0(t)?;
            let d = trace.dx_psi0(t)?;
            let j = (p.conj() * d).im;
            Ok([t, t / phys.period, p.re, p.im, p.norm_sqr(), d.re, d.im, j / phys.k, (phys.omega * t).cos()])
        })
        .collect::<std::result::Result<_, photoemission::Error>>()?;
    let mut table = Table::new(&[
        "t_au",
        "t_over_period",
        "re_psi0",
        "im_psi0",
        "abs_psi0_sq",
        "re_dxpsi0",
        "im_dxpsi0",
        "j_over_k",
        "cos_wt",
    ]);
    rows.iter().for_each(|r| table.row(r));
    sink.write("solve.csv", &table)
}

/// `j(x, t)` on the output grid; boundary data at `x = 0`, the
/// reconstruction elsewhere.
pub fn current_series(cfg: &Config, trace: &BoundaryTrace, x_nm: f64) -> Result<CurrentSeries> {
    let period = trace.ctx.period();
    let t_final = trace.t_end();
    if x_nm == 0.0 {
        let dt = period / cfg.samples_per_period as f64;
        return Ok(CurrentSeries::sample(0.0, t_final, dt, |t| trace.current(t))?);
    }
    let wf = Wavefield::with_options(trace, cfg.field_options())?;
    let x = nm_to_bohr(x_nm);
    let dt = period / cfg.field_samples_per_period as f64;
    Ok(CurrentSeries::sample(x, t_final, dt, |t| wf.current(x, t))?)
}

pub fn field(cfg: &Config, sink: &mut Sink) -> Result<()> {
    let phys = cfg.physical()?;
    let trace = trace_for(cfg, &phys, sink, "")?;
    let wf = Wavefield::with_options(&trace, cfg.field_options())?;
    let times = grid(trace.t_end(), phys.period, cfg.field_samples_per_period);
    let mut points = Vec::new();
    for &x in &cfg.x_nm {
        points.extend(times.iter().map(|&t| (nm_to_bohr(x), t)));
    }
    let samples = wf.samples(&points)?;
    let mut table = Table::new(&[
        "x_nm",
        "t_au",
        "t_over_period",
        "re_psi",
        "im_psi",
        "abs_psi_sq",
        "j_over_k",
    ]);
    for (i, s) in samples.iter().enumerate() {
        let x_nm = cfg.x_nm[i / times.len()];
        table.row(&[x_nm, s.t, s.t / phys.period, s.psi.re, s.psi.im, s.psi.norm_sqr(), s.j / phys.k]);
    }
    sink.write("field.csv", &table)
}

pub fn floquet(cfg: &Config, sink: &mut Sink) -> Result<()> {
    let phys = cfg.physical()?;
    let options = cfg.floquet_options();
    let sol = match cfg.channels() {
        Some(n) => match_amplitudes(&phys, n, &options)?,
        None => solve_auto(&phys, &options)?,
    };
    let mut table = Table::new(&[
        "m",
        "re_kappa",
        "im_kappa",
        "re_r",
        "im_r",
        "abs_t",
        "open",
        "right_momentum",
        "transmitted_current",
        "reflected_current",
    ]);
    for m in sol.channels() {
        let i = (m + sol.n as i64) as usize;
        let (kappa, r) = (sol.kappa[i], sol.reflection[i]);
        table.row(&[
            m as f64,
            kappa.re,
            kappa.im,
            r.re,
            r.im,
            sol.transmission(m).norm(),
            if sol.open_right[i] { 1.0 } else { 0.0 },
            sol.right_momentum(m),
            sol.channel_current(m),
            sol.reflected_current(m),
        ]);
    }
    sink.note(
        "floquet",
        json!({
            "channels": sol.n,
            "flux_defect": sol.flux_defect(),
            "asymptotic_current": sol.asymptotic_current(),
            "asymptotic_current_over_k": sol.asymptotic_current() / phys.k,
            "condition": sol.condition,
            "least_squares_residual": sol.residual,
            "matching_residual": sol.matching_residual(64),
            "omega_c_ev": photoemission::units::hartree_to_ev(sol.omega_c),
        }),
    );
    sink.write("floquet.csv", &table)
}

/// Exact and Crank-Nicolson surface currents on the CN sample times.
pub fn compare_cn_table(cfg: &Config, phys: &PhysicalConfig, sink: &mut Sink) -> Result<Table> {
    let t_end = cfg.periods as f64 * phys.period;
    let (grid, options) = cfg.cn()?;
    let grid = grid.aligned(phys, options.initial, options.surface)?;
    if !grid.admits(phys, t_end) {
        return Err(CliError::Invalid(format!(
            "cn_half_width {} too small for {} periods: need at least {:.1}",
            grid.half_width,
            cfg.periods,
            2.0 * phys.k * t_end + photoemission::reference_cn::BOX_MARGIN
        )));
    }
    let trace = trace_for(cfg, phys, sink, "")?;
    let run = cn_evolve(phys, &grid, t_end, &options)?;
    let exact: Vec<f64> = run
        .times
        .par_iter()
        .map(|&t| trace.current(t.min(t_end)))
        .collect::<std::result::Result<_, _>>()?;
    let mut table = Table::new(&["t_au", "t_over_period", "j_over_k_exact", "j_over_k_cn"]);
    let (mut dev, mut peak, mut dip) = (0.0f64, 0.0f64, 0.0f64);
    for ((t, cn), ex) in run.times.iter().zip(&run.current).zip(&exact) {
        table.row(&[*t, t / phys.period, ex / phys.k, cn / phys.k]);
        if *t >= 0.5 * phys.period {
            dev = dev.max((cn - ex).abs());
            peak = peak.max(ex.abs());
        }
        dip = dip.min(*cn);
    }
    sink.note(
        "crank_nicolson",
        json!({
            "half_width": run.grid.half_width,
            "dx": run.grid.dx,
            "dt": run.grid.dt,
            "norm_drift": run.norm_drift(),
            "relative_deviation_after_half_period": dev / peak,
            "minimum_j_over_k": dip / phys.k,
            "warning": run.warning,
        }),
    );
    Ok(table)
}

pub fn compare_cn(cfg: &Config, sink: &mut Sink) -> Result<()> {
    let phys = cfg.physical()?;
    let table = compare_cn_table(cfg, &phys, sink)?;
    sink.write("compare_cn.csv", &table)
}

/// Photon energies `w` with `w - w_c(w)` on the configured detuning grid.
pub fn scan_energies(cfg: &Config, phys: &PhysicalConfig) -> Result<Vec<f64>> {
    let n = cfg.scan_points;
    let (lo, hi) = (cfg.scan_detuning_min_ev, cfg.scan_detuning_max_ev);
    (0..n)
        .map(|i| {
            let d = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            Ok(threshold_photon_energy(phys, d)?)
        })
        .collect()
}

pub fn scan_header() -> Table {
    Table::new(&[
        "field_v_per_nm",
        "photon_energy_ev",
        "detuning_ev",
        "double_average",
        "normalized",
    ])
}

pub fn scan_rows(cfg: &Config, table: &mut Table, sink: &mut Sink) -> Result<()> {
    let phys = cfg.physical()?;
    let energies = scan_energies(cfg, &phys)?;
    let points = omega_scan(&phys, &energies, cfg.periods, &cfg.solver());
    let mut failures = Vec::new();
    for p in &points {
        table.row(&[cfg.field_v_per_nm, p.photon_energy_ev, p.detuning_ev, p.double_average, p.normalized]);
        if let Some(e) = &p.error {
            failures.push(json!({"photon_energy_ev": p.photon_energy_ev, "error": e}));
        }
    }
    sink.note(format!("scan_failures_E{}", cfg.field_v_per_nm), failures);
    Ok(())
}

pub fn scan(cfg: &Config, sink: &mut Sink) -> Result<()> {
    let mut table = scan_header();
    scan_rows(cfg, &mut table, sink)?;
    sink.write("scan.csv", &table)
}

/// Running averages and per-period spreads at every `x` of the config.
pub struct Averages {
    pub average: Table,
    pub spreads: Table,
}

pub fn averages(cfg: &Config, sink: &mut Sink) -> Result<Averages> {
    let phys = cfg.physical()?;
    let trace = trace_for(cfg, &phys, sink, "")?;
    let tau = phys.period;
    let mut average = Table::new(&["x_nm", "t_au", "t_over_period", "avg_j_over_k"]);
    let mut spreads = Table::new(&[
        "x_nm",
        "n",
        "max_over_k",
        "min_over_k",
        "spread_over_k",
        "reference_line",
    ]);
    for &x in &cfg.x_nm {
        let series = current_series(cfg, &trace, x)?;
        let avg = running_average(&series, tau)?;
        for (i, v) in avg.j.iter().enumerate() {
            let t = avg.t(i);
            average.row(&[x, t, t / tau, v / phys.k]);
        }
        for s in period_extrema(&avg, tau)? {
            let n = s.n as f64;
            spreads.row(&[x, n, s.max / phys.k, s.min / phys.k, s.spread() / phys.k, 0.0030 * n.powf(-1.5)]);
        }
        let mut note = serde_json::Map::new();
        let t_final = trace.t_end();
        note.insert("double_average".into(), json!(double_average(&series, t_final, tau)?));
        match decay_fit(&avg, tau, cfg.decay_first_period, phys.k) {
            Ok(fit) => {
                note.insert("slope".into(), json!(fit.slope));
                note.insert("prefactor".into(), json!(fit.prefactor));
                note.insert("prefactor_three_halves".into(), json!(fit.prefactor_three_halves));
            }
            Err(e) => {
                note.insert("fit_error".into(), json!(e.to_string()));
            }
        }
        match extrapolate_average(&series, tau, cfg.decay_first_period..=cfg.periods) {
            Ok(v) => note.insert("extrapolated_average".into(), json!(v)),
            Err(e) => note.insert("extrapolation_error".into(), json!(e.to_string())),
        };
        sink.note(format!("x_nm={x}"), note);
    }
    Ok(Averages { average, spreads })
}

pub fn decay(cfg: &Config, sink: &mut Sink) -> Result<()> {
    let a = averages(cfg, sink)?;
    sink.write("average.csv", &a.average)?;
    sink.write("decay.csv", &a.spreads)
}
