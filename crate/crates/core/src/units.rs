//! Physical parameters of the emission model and their conversion to atomic
//! units (hbar = m = e = 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hartree energy in eV (CODATA 2018).
pub const HARTREE_EV: f64 = 27.211386245988;
/// Atomic unit of electric field in V/nm (CODATA 2018).
pub const FIELD_AU_V_PER_NM: f64 = 514.220674763;
/// Atomic unit of time in attoseconds (CODATA 2018).
pub const TIME_AU_AS: f64 = 24.188843265857;
/// Bohr radius in nm (CODATA 2018).
pub const BOHR_NM: f64 = 0.0529177210903;

pub fn ev_to_hartree(ev: f64) -> f64 {
    ev / HARTREE_EV
}

pub fn hartree_to_ev(ha: f64) -> f64 {
    ha * HARTREE_EV
}

pub fn v_per_nm_to_au(field: f64) -> f64 {
    field / FIELD_AU_V_PER_NM
}

pub fn au_to_v_per_nm(field: f64) -> f64 {
    field * FIELD_AU_V_PER_NM
}

pub fn nm_to_bohr(nm: f64) -> f64 {
    nm / BOHR_NM
}

pub fn bohr_to_nm(bohr: f64) -> f64 {
    bohr * BOHR_NM
}

pub fn au_to_fs(t: f64) -> f64 {
    t * TIME_AU_AS * 1e-3
}

/// Model parameters in laboratory units together with every derived
/// atomic-unit quantity the solvers consume.
///
/// The incoming momentum defaults to `sqrt(2 E_F)`; it can be overridden with
/// [`PhysicalConfig::with_momentum`] as long as the electron stays below the
/// barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    pub fermi_energy_ev: f64,
    pub work_function_ev: f64,
    pub field_v_per_nm: f64,
    pub photon_energy_ev: f64,
    /// Incoming momentum.
    pub k: f64,
    /// Step height `E_F + W`.
    pub u: f64,
    /// Field amplitude.
    pub field: f64,
    /// Angular frequency of the field.
    pub omega: f64,
    /// Laser period `2 pi / omega`.
    pub period: f64,
}

fn check(name: &'static str, value: f64, allow_zero: bool) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::validation(name, format!("{value} is not finite")));
    }
    if value < 0.0 || (!allow_zero && value == 0.0) {
        let bound = if allow_zero { "non-negative" } else { "positive" };
        return Err(Error::validation(name, format!("{value} must be {bound}")));
    }
    Ok(())
}

impl PhysicalConfig {
    /// Builds a configuration from Fermi energy, work function and photon
    /// energy in eV and the field amplitude in V/nm.
    pub fn new(
        fermi_energy_ev: f64,
        work_function_ev: f64,
        field_v_per_nm: f64,
        photon_energy_ev: f64,
    ) -> Result<Self> {
        check("fermi_energy_ev", fermi_energy_ev, false)?;
        check("work_function_ev", work_function_ev, false)?;
        check("field_v_per_nm", field_v_per_nm, true)?;
        check("photon_energy_ev", photon_energy_ev, false)?;
        let fermi = ev_to_hartree(fermi_energy_ev);
        let omega = ev_to_hartree(photon_energy_ev);
        Ok(PhysicalConfig {
            fermi_energy_ev,
            work_function_ev,
            field_v_per_nm,
            photon_energy_ev,
            k: (2.0 * fermi).sqrt(),
            u: fermi + ev_to_hartree(work_function_ev),
            field: v_per_nm_to_au(field_v_per_nm),
            omega,
            period: 2.0 * std::f64::consts::PI / omega,
        })
    }

    /// Replaces the incoming momentum; `k^2 / 2` must stay below the step.
    pub fn with_momentum(mut self, k: f64) -> Result<Self> {
        check("k", k, false)?;
        if k * k >= 2.0 * self.u {
            return Err(Error::validation(
                "k",
                format!("k^2/2 = {} is not below the barrier U = {}", 0.5 * k * k, self.u),
            ));
        }
        self.k = k;
        Ok(self)
    }

    /// Same material and field, different photon energy.
    pub fn with_photon_energy(&self, photon_energy_ev: f64) -> Result<Self> {
        let k = self.k;
        PhysicalConfig::new(
            self.fermi_energy_ev,
            self.work_function_ev,
            self.field_v_per_nm,
            photon_energy_ev,
        )?
        .with_momentum(k)
    }

    /// Same material and photon energy, different field amplitude.
    pub fn with_field(&self, field_v_per_nm: f64) -> Result<Self> {
        let k = self.k;
        PhysicalConfig::new(
            self.fermi_energy_ev,
            self.work_function_ev,
            field_v_per_nm,
            self.photon_energy_ev,
        )?
        .with_momentum(k)
    }

    /// Work function in hartree.
    pub fn work_function(&self) -> f64 {
        ev_to_hartree(self.work_function_ev)
    }

    /// Decay rate `sqrt(2U - k^2)` of the field-free evanescent tail.
    pub fn kappa0(&self) -> f64 {
        (2.0 * self.u - self.k * self.k).sqrt()
    }

    /// Keldysh parameter `omega sqrt(2W) / E`.
    pub fn keldysh(&self) -> Result<f64> {
        if self.field == 0.0 {
            return Err(Error::domain(
                "keldysh",
                "undefined Keldysh parameter at zero field",
            ));
        }
        Ok(self.omega * (2.0 * self.work_function()).sqrt() / self.field)
    }

    /// Ponderomotive energy and one-photon threshold, both in hartree.
    pub fn thresholds(&self) -> Thresholds {
        let ponderomotive = self.field * self.field / (4.0 * self.omega * self.omega);
        Thresholds {
            ponderomotive,
            omega_c: self.work_function() + ponderomotive,
            omega_c_channel: self.u + ponderomotive - 0.5 * self.k * self.k,
        }
    }
}

/// Energy scales of the driven problem, in hartree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// `E^2 / (4 omega^2)`.
    pub ponderomotive: f64,
    /// `W + U_p`.
    pub omega_c: f64,
    /// `U + U_p - k^2/2`, which equals `omega_c` when `k^2/2 = E_F`.
    pub omega_c_channel: f64,
}
