//! Ohmic bosonic baths and the correlation weight g(ω) entering the rates.

use serde::{Deserialize, Serialize};

use crate::error::{LzsError, Result};

pub const DEFAULT_OMEGA_C: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OhmicBath {
    pub tag: String,
    pub gamma: f64,
    pub omega_c: f64,
    pub temperature: f64,
}

impl OhmicBath {
    pub fn new(tag: impl Into<String>, gamma: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        let bath = OhmicBath { tag: tag.into(), gamma, omega_c, temperature };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(LzsError::InvalidParameter("gamma must be ≥ 0".into()));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(LzsError::InvalidParameter("omega_c must be > 0".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(LzsError::InvalidParameter("temperature must be > 0".into()));
        }
        Ok(())
    }

    /// J(ω) = γω·e^(−|ω|/ω_c), odd in ω.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        self.gamma * omega * (-omega.abs() / self.omega_c).exp()
    }

    /// g(ω) = J(ω)/(e^(ω/T) − 1), with g(0) = γT.
    ///
    /// Positive ω means energy taken from the bath (absorption); g(−ω) = J(ω)(n_th + 1).
    pub fn g(&self, omega: f64) -> f64 {
        let x = omega / self.temperature;
        let cutoff = (-omega.abs() / self.omega_c).exp();
        if x.abs() < 1e-6 {
            // x/(e^x − 1) = 1 − x/2 + x²/12 − ...
            self.gamma * self.temperature * cutoff * (1.0 - x / 2.0 + x * x / 12.0)
        } else if x > 700.0 {
            0.0
        } else {
            self.spectral_density(omega) / x.exp_m1()
        }
    }
}
