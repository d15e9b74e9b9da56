//! Flat run configuration. The four physical keys are required; every other
//! key has a default, and the resolved form (all defaults filled in) is what
//! ends up in the manifest.

use std::path::Path;

use photoemission::floquet::{Convention, FloquetOptions};
use photoemission::reference_cn::{CnGrid, CnOptions, InitialState, SurfaceNode};
use photoemission::volterra::SolverOptions;
use photoemission::wavefield::FieldOptions;
use photoemission::PhysicalConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionKey {
    Derived,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKey {
    Vacuum,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKey {
    Sampled,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub fermi_energy_ev: f64,
    pub work_function_ev: f64,
    pub field_v_per_nm: f64,
    pub photon_energy_ev: f64,
    /// Incoming momentum in atomic units; `sqrt(2 E_F)` when absent.
    #[serde(default)]
    pub momentum_au: Option<f64>,

    #[serde(default = "defaults::periods")]
    pub periods: usize,
    /// Output rows per period for boundary quantities.
    #[serde(default = "defaults::samples_per_period")]
    pub samples_per_period: usize,
    /// Output rows per period for the wavefield at `x > 0`.
    #[serde(default = "defaults::field_samples_per_period")]
    pub field_samples_per_period: usize,
    #[serde(default = "defaults::x_nm")]
    pub x_nm: Vec<f64>,
    #[serde(default)]
    pub refine: bool,

    #[serde(default = "defaults::windows_per_period")]
    pub windows_per_period: usize,
    #[serde(default = "defaults::degree")]
    pub degree: usize,
    #[serde(default = "defaults::origin_divisions")]
    pub origin_divisions: usize,
    #[serde(default = "defaults::history_order")]
    pub history_order: usize,
    #[serde(default = "defaults::local_order")]
    pub local_order: usize,

    /// Times within the first six periods at which the integral-equation
    /// residual is evaluated for the manifest.
    #[serde(default = "defaults::residual_probes")]
    pub residual_probes: usize,

    #[serde(default = "defaults::panel_order")]
    pub field_panel_order: usize,
    #[serde(default = "defaults::laguerre_order")]
    pub field_laguerre_order: usize,

    /// Fixed truncation `-N..=N`; automatic when absent.
    #[serde(default)]
    pub channels: Option<usize>,
    #[serde(default = "defaults::convention")]
    pub floquet_convention: ConventionKey,
    #[serde(default = "defaults::max_channels")]
    pub floquet_max_channels: usize,

    #[serde(default = "defaults::cn_half_width")]
    pub cn_half_width: f64,
    #[serde(default = "defaults::cn_dx")]
    pub cn_dx: f64,
    #[serde(default = "defaults::cn_dt")]
    pub cn_dt: f64,
    #[serde(default = "defaults::cn_surface")]
    pub cn_surface: SurfaceKey,
    #[serde(default = "defaults::cn_initial")]
    pub cn_initial: InitialKey,
    #[serde(default = "defaults::cn_sample_every")]
    pub cn_sample_every: usize,

    #[serde(default = "defaults::scan_min")]
    pub scan_detuning_min_ev: f64,
    #[serde(default = "defaults::scan_max")]
    pub scan_detuning_max_ev: f64,
    #[serde(default = "defaults::scan_points")]
    pub scan_points: usize,

    #[serde(default = "defaults::decay_first_period")]
    pub decay_first_period: usize,
}

mod defaults {
    use super::*;

    pub fn periods() -> usize {
        3
    }
    pub fn samples_per_period() -> usize {
        photoemission::observables::SAMPLES_PER_PERIOD
    }
    pub fn field_samples_per_period() -> usize {
        256
    }
    pub fn x_nm() -> Vec<f64> {
        vec![0.0]
    }
    pub fn windows_per_period() -> usize {
        SolverOptions::default().windows_per_period
    }
    pub fn degree() -> usize {
        SolverOptions::default().degree
    }
    pub fn origin_divisions() -> usize {
        SolverOptions::default().origin_divisions
    }
    pub fn history_order() -> usize {
        SolverOptions::default().history_order
    }
    pub fn local_order() -> usize {
        SolverOptions::default().local_order
    }
    pub fn residual_probes() -> usize {
        4
    }
    pub fn panel_order() -> usize {
        FieldOptions::default().panel_order
    }
    pub fn laguerre_order() -> usize {
        FieldOptions::default().laguerre_order
    }
    pub fn convention() -> ConventionKey {
        ConventionKey::Derived
    }
    pub fn max_channels() -> usize {
        FloquetOptions::default().max_channels
    }
    pub fn cn_half_width() -> f64 {
        CnGrid::default().half_width
    }
    pub fn cn_dx() -> f64 {
        CnGrid::default().dx
    }
    pub fn cn_dt() -> f64 {
        CnGrid::default().dt
    }
    pub fn cn_surface() -> SurfaceKey {
        SurfaceKey::Vacuum
    }
    pub fn cn_initial() -> InitialKey {
        InitialKey::Sampled
    }
    pub fn cn_sample_every() -> usize {
        CnOptions::default().sample_every
    }
    pub fn scan_min() -> f64 {
        -0.5
    }
    pub fn scan_max() -> f64 {
        0.5
    }
    pub fn scan_points() -> usize {
        11
    }
    pub fn decay_first_period() -> usize {
        12
    }
}

/// A manifest stores the resolved configuration under this key, so either
/// file can be passed to `--config`.
#[derive(Deserialize)]
struct ManifestConfig {
    config: Config,
}

impl Config {
    /// Configuration for the given physical parameters with every other key
    /// at its default.
    pub fn with_physics(fermi: f64, work: f64, field: f64, photon: f64) -> Config {
        let text = format!(
            "fermi_energy_ev = {fermi:?}\nwork_function_ev = {work:?}\nfield_v_per_nm = {field:?}\nphoton_energy_ev = {photon:?}\n"
        );
        toml::from_str(&text).expect("defaults deserialize")
    }

    pub fn parse_toml(text: &str) -> Result<Config, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    /// Reads a TOML configuration, or the `config` table of a JSON manifest.
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: ManifestConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            return Ok(m.config);
        }
        Config::parse_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn physical(&self) -> Result<PhysicalConfig, CliError> {
        let cfg = PhysicalConfig::new(
            self.fermi_energy_ev,
            self.work_function_ev,
            self.field_v_per_nm,
            self.photon_energy_ev,
        )?;
        Ok(match self.momentum_au {
            Some(k) => cfg.with_momentum(k)?,
            None => cfg,
        })
    }

    pub fn solver(&self) -> SolverOptions {
        let base = SolverOptions {
            windows_per_period: self.windows_per_period,
            degree: self.degree,
            origin_divisions: self.origin_divisions,
            history_order: self.history_order,
            local_order: self.local_order,
        };
        if self.refine {
            base.refined()
        } else {
            base
        }
    }

    pub fn field_options(&self) -> FieldOptions {
        let scale = if self.refine { 2 } else { 1 };
        FieldOptions {
            panel_order: scale * self.field_panel_order,
            laguerre_order: scale * self.field_laguerre_order,
            ..FieldOptions::default()
        }
    }

    pub fn floquet_options(&self) -> FloquetOptions {
        FloquetOptions {
            convention: match self.floquet_convention {
                ConventionKey::Derived => Convention::Derived,
                ConventionKey::Printed => Convention::Printed,
            },
            max_channels: self.floquet_max_channels,
            ..FloquetOptions::default()
        }
    }

    /// Fixed truncation, doubled under `refine`.
    pub fn channels(&self) -> Option<usize> {
        self.channels.map(|n| if self.refine { 2 * n } else { n })
    }

    pub fn cn(&self) -> Result<(CnGrid, CnOptions), CliError> {
        let scale = if self.refine { 0.5 } else { 1.0 };
        let options = CnOptions {
            initial: match self.cn_initial {
                InitialKey::Sampled => InitialState::Sampled,
                InitialKey::Discrete => InitialState::DiscreteStationary,
            },
            surface: match self.cn_surface {
                SurfaceKey::Vacuum => SurfaceNode::Vacuum,
                SurfaceKey::Midpoint => SurfaceNode::Midpoint,
            },
            sample_every: self.cn_sample_every,
            ..CnOptions::default()
        };
        let grid = CnGrid::new(self.cn_half_width, scale * self.cn_dx, scale * self.cn_dt)?;
        Ok((grid, options))
    }

    /// Checks the keys that the solvers do not validate themselves.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("periods", self.periods),
            ("samples_per_period", self.samples_per_period),
            ("field_samples_per_period", self.field_samples_per_period),
            ("scan_points", self.scan_points),
            ("cn_sample_every", self.cn_sample_every),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(CliError::Invalid(format!("`{name}` must be positive")));
            }
        }
        if self.x_nm.is_empty() || self.x_nm.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(CliError::Invalid("`x_nm` must be a non-empty list of x >= 0".into()));
        }
        if !(self.scan_detuning_max_ev >= self.scan_detuning_min_ev) {
            return Err(CliError::Invalid("scan detuning range is empty".into()));
        }
        self.physical()?;
        Ok(())
    }
}
