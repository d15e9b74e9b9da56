//! Parameter sets of the published figures. Each entry restates the caption
//! it reproduces; the values here are the only place they are written down.

use crate::commands::{self, current_series, trace_for};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{Sink, Table};

/// Fermi energy and work function used throughout.
pub const FERMI_EV: f64 = 4.5;
pub const WORK_FUNCTION_EV: f64 = 5.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// `|psi(0, t)|^2`.
    Density,
    /// `j(0, t)/k` for each run.
    SurfaceCurrent,
    /// `j(x, t)/k` at each `x`.
    CurrentAtX,
    /// Exact against Crank-Nicolson at `x = 0`.
    CrankNicolson,
    /// `<j>_t / k` at each `x`.
    RunningAverage,
    /// `M_n - mu_n` of `<j>_t / k` at each `x`.
    Decay,
    /// `<<j>> / E^2` against `w - w_c` after the given periods.
    ThresholdScan,
}

#[derive(Debug, Clone, Copy)]
pub struct Figure {
    pub id: u8,
    pub caption: &'static str,
    pub kind: Kind,
    /// `(E in V/nm, w in eV)` of each curve.
    pub runs: &'static [(f64, f64)],
    pub periods: usize,
    pub x_nm: &'static [f64],
}

pub const FIGURES: [Figure; 8] = [
    Figure {
        id: 1,
        caption: "|psi_0|^2 against t w / 2pi for 3 periods, E = 15 V/nm, w = 1.55 eV",
        kind: Kind::Density,
        runs: &[(15.0, 1.55)],
        periods: 3,
        x_nm: &[0.0],
    },
    Figure {
        id: 2,
        caption: "j/k at the interface against t w / 2pi for w = 1.55 eV and E = 1, 15, 30 V/nm",
        kind: Kind::SurfaceCurrent,
        runs: &[(1.0, 1.55), (15.0, 1.55), (30.0, 1.55)],
        periods: 3,
        x_nm: &[0.0],
    },
    Figure {
        id: 3,
        caption: "j/k at the interface for two Keldysh parameters: (a) E = 30 V/nm, w = 1.55 eV and \
                  E = 15 V/nm, w = 0.755 eV; (b) E = 15 V/nm, w = 1.55 eV and E = 7.5 V/nm, w = 0.755 eV",
        kind: Kind::SurfaceCurrent,
        runs: &[(30.0, 1.55), (15.0, 0.755), (15.0, 1.55), (7.5, 0.755)],
        periods: 3,
        x_nm: &[0.0],
    },
    Figure {
        id: 4,
        caption: "j/k at positive x for E = 30 V/nm, w = 1.55 eV and x = 0.12, 0.24, 0.37 nm",
        kind: Kind::CurrentAtX,
        runs: &[(30.0, 1.55)],
        periods: 3,
        x_nm: &[0.12, 0.24, 0.37],
    },
    Figure {
        id: 5,
        caption: "current of the exact method against Crank-Nicolson for w = 1.55 eV, E = 15 V/nm",
        kind: Kind::CrankNicolson,
        runs: &[(15.0, 1.55)],
        periods: 1,
        x_nm: &[0.0],
    },
    Figure {
        id: 6,
        caption: "<j>_t / k at x = 0 and x = 0.37 nm for w = 6 eV, E = 10 V/nm over 48 periods",
        kind: Kind::RunningAverage,
        runs: &[(10.0, 6.0)],
        periods: 48,
        x_nm: &[0.0, 0.37],
    },
    Figure {
        id: 7,
        caption: "M_n - mu_n of <j>_t / k over the period before t_n, w = 6 eV, E = 10 V/nm, \
                  with the line 0.0030 (t w / 2pi)^(-3/2)",
        kind: Kind::Decay,
        runs: &[(10.0, 6.0)],
        periods: 48,
        x_nm: &[0.0, 0.37],
    },
    Figure {
        id: 8,
        caption: "<<j>> / eps^2 after 12 periods against w - w_c for E = 3, 10, 30 V/nm",
        kind: Kind::ThresholdScan,
        runs: &[(3.0, 6.0), (10.0, 6.0), (30.0, 6.0)],
        periods: 12,
        x_nm: &[0.0],
    },
];

pub fn figure(id: u8) -> Option<&'static Figure> {
    FIGURES.iter().find(|f| f.id == id)
}

impl Figure {
    /// Resolved configuration of run `i`; solver keys come from `base`.
    pub fn config(&self, base: &Config, i: usize) -> Config {
        let (field, photon) = self.runs[i];
        Config {
            fermi_energy_ev: FERMI_EV,
            work_function_ev: WORK_FUNCTION_EV,
            field_v_per_nm: field,
            photon_energy_ev: photon,
            momentum_au: None,
            periods: self.periods,
            x_nm: self.x_nm.to_vec(),
            ..base.clone()
        }
    }

    pub fn configs(&self, base: &Config) -> Vec<Config> {
        (0..self.runs.len()).map(|i| self.config(base, i)).collect()
    }

    pub fn file_name(&self) -> String {
        format!("fig{}.csv", self.id)
    }

    /// Runs every curve and writes `figN.csv`.
    pub fn reproduce(&self, base: &Config, sink: &mut Sink) -> Result<(), CliError> {
        let configs = self.configs(base);
        let table = match self.kind {
            Kind::Density => {
                let cfg = &configs[0];
                let phys = cfg.physical()?;
                let trace = trace_for(cfg, &phys, sink, "")?;
                let n = cfg.periods * cfg.samples_per_period;
                let mut table = Table::new(&["t_au", "t_over_period", "abs_psi0_sq", "cos_wt"]);
                for i in 0..=n {
                    let t = trace.t_end() * i as f64 / n as f64;
                    let p = trace.psi0(t)?;
                    table.row(&[t, t / phys.period, p.norm_sqr(), (phys.omega * t).cos()]);
                }
                table
            }
            Kind::SurfaceCurrent => {
                let mut table = Table::new(&[
                    "field_v_per_nm",
                    "photon_energy_ev",
                    "t_au",
                    "t_fs",
                    "t_over_period",
                    "j_over_k",
                    "cos_wt",
                ]);
                for (i, cfg) in configs.iter().enumerate() {
                    let phys = cfg.physical()?;
                    let trace = trace_for(cfg, &phys, sink, &format!("run{i}_"))?;
                    let s = current_series(cfg, &trace, 0.0)?;
                    for (n, j) in s.j.iter().enumerate() {
                        let t = s.t(n);
                        table.row(&[
                            cfg.field_v_per_nm,
                            cfg.photon_energy_ev,
                            t,
                            photoemission::units::au_to_fs(t),
                            t / phys.period,
                            j / phys.k,
                            (phys.omega * t).cos(),
                        ]);
                    }
                }
                table
            }
            Kind::CurrentAtX => {
                let cfg = &configs[0];
                let phys = cfg.physical()?;
                let trace = trace_for(cfg, &phys, sink, "")?;
                let mut table = Table::new(&["x_nm", "t_au", "t_over_period", "j_over_k"]);
                for &x in &cfg.x_nm {
                    let s = current_series(cfg, &trace, x)?;
                    for (n, j) in s.j.iter().enumerate() {
                        let t = s.t(n);
                        table.row(&[x, t, t / phys.period, j / phys.k]);
                    }
                }
                table
            }
            Kind::CrankNicolson => {
                let cfg = &configs[0];
                commands::compare_cn_table(cfg, &cfg.physical()?, sink)?
            }
            Kind::RunningAverage => commands::averages(&configs[0], sink)?.average,
            Kind::Decay => commands::averages(&configs[0], sink)?.spreads,
            Kind::ThresholdScan => {
                let mut table = commands::scan_header();
                for cfg in &configs {
                    commands::scan_rows(cfg, &mut table, sink)?;
                }
                table
            }
        };
        sink.write(&self.file_name(), &table)
    }
}
