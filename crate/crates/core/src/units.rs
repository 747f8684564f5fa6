//! Model units `ħ = m = ω = 1`.

use crate::math::sqrt;
use crate::{Error, Result};

/// Unit system fixed by `ħ = m = ω = 1` and the relativistic parameter
/// `ε = ħω/mc²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelUnits {
    epsilon: f64,
}

impl ModelUnits {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::invalid("epsilon", "must be finite and > 0"));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `c = 1/√ε`
    pub fn speed_of_light(&self) -> f64 {
        1.0 / sqrt(self.epsilon)
    }

    /// `mc² = 1/ε`, in units of `ħω`.
    pub fn rest_energy(&self) -> f64 {
        1.0 / self.epsilon
    }

    /// Zero-point width `√(ħ/2mω)`.
    pub fn x_zpt(&self) -> f64 {
        core::f64::consts::FRAC_1_SQRT_2
    }

    /// Reduced Compton wavelength `ħ/mc = √ε`.
    pub fn compton_wavelength(&self) -> f64 {
        sqrt(self.epsilon)
    }

    /// Leading-order Zitterbewegung angular frequency `2mc²/ħ = 2/ε`.
    pub fn zitterbewegung_frequency(&self) -> f64 {
        2.0 / self.epsilon
    }

    /// True when `ε ≪ 1`; the threshold is conventional.
    pub fn is_nonrelativistic(&self) -> bool {
        self.epsilon < 1e-2
    }
}
