//! All tunable defaults in one serializable place.

use serde::{Deserialize, Serialize};

use crate::cgf::{QuadratureSpec, DEFAULT_TAU_MARGIN};
use crate::montecarlo::default_xi_offsets;
use crate::saddlepoint::SearchOptions;
use crate::{Error, Result};

/// Monte-Carlo defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
    /// Reuse one sample stream across all points of a sweep.
    pub crn: bool,
    /// Offsets `ln ξ − LTR` tried by the meta-converse estimate.
    pub xi_offsets: Vec<f64>,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 42,
            crn: true,
            xi_offsets: default_xi_offsets(),
        }
    }
}

/// Accepted parameter ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub s_min: f64,
    pub s_max: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            s_min: 0.05,
            s_max: 2.0,
            rho_min: 0.1,
            rho_max: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub quadrature: QuadratureSpec,
    /// CGF evaluations stop at `(1 − tau_margin)·τ_max`.
    pub tau_margin: f64,
    pub search: SearchOptions,
    pub montecarlo: McSettings,
    pub limits: Limits,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            tau_margin: DEFAULT_TAU_MARGIN,
            search: SearchOptions::default(),
            montecarlo: McSettings::default(),
            limits: Limits::default(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.search.validate()?;
        if !(self.tau_margin > 0.0 && self.tau_margin < 1.0) {
            return Err(Error::domain("Settings", format!("tau_margin = {} must lie in (0, 1)", self.tau_margin)));
        }
        let l = &self.limits;
        if !(0.0 < l.s_min && l.s_min < l.s_max && 0.0 < l.rho_min && l.rho_min < l.rho_max) {
            return Err(Error::domain("Settings", format!("inconsistent limits {l:?}")));
        }
        if let Some(s) = self.search.s_grid.iter().find(|&&s| s < l.s_min || s > l.s_max) {
            return Err(Error::domain("Settings", format!("s grid point {s} outside [{}, {}]", l.s_min, l.s_max)));
        }
        if self.montecarlo.samples < crate::montecarlo::MIN_SAMPLES {
            return Err(Error::domain("Settings", "montecarlo.samples below the minimum"));
        }
        Ok(())
    }

    /// Rejects SNRs outside the configured range.
    pub fn check_rho(&self, rho: f64) -> Result<()> {
        let l = &self.limits;
        if !(rho >= l.rho_min && rho <= l.rho_max) {
            return Err(Error::domain("Settings", format!("rho = {rho} outside [{}, {}]", l.rho_min, l.rho_max)));
        }
        Ok(())
    }
}
