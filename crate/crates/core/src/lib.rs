//! Truncated Fock-space simulator for measurement backaction in the
//! one-dimensional Dirac oscillator.
//!
//! Everything works in model units `ħ = m = ω = 1`. The single physics knob is
//! the relativistic parameter `ε = ħω/mc²`, so `c = 1/√ε` and `mc² = 1/ε`.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled; file formats, the command-line front end and parallel sweeps live
//! in the companion `dirac-backaction-lab` crate.
//!
//! Basis ordering is shared by every module: the state `|n, s⟩` lives at index
//! `2n + s` with `s = 0` for spin up and `s = 1` for spin down.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(missing_debug_implementations)]
#![deny(unsafe_code)]

extern crate alloc;

mod error;
mod math;

pub mod backaction;
pub mod fit;
pub mod foldy_wouthuysen;
pub mod hilbert;
pub mod oscillator;
pub mod propagate;
pub mod soc;
pub mod spectral;
pub mod units;

pub use error::{Error, ErrorClass, Result};
pub use nalgebra::Complex;

/// Complex scalar used for every operator and state.
pub type C64 = Complex<f64>;

/// `count` logarithmically spaced values from `start` to `stop` inclusive.
///
/// ```
/// let eps = dirac_backaction_core::log_spaced(1e-5, 1e-3, 3).unwrap();
/// assert_eq!(eps, vec![1e-5, 1e-4, 1e-3]);
/// ```
pub fn log_spaced(start: f64, stop: f64, count: usize) -> Result<alloc::vec::Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Error::invalid("log_spaced", "bounds must be finite and > 0"));
    }
    Ok(match count {
        0 => alloc::vec::Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let (a, b) = (math::ln(start), math::ln(stop));
            (0..count)
                .map(|k| match k {
                    0 => start,
                    k if k == count - 1 => stop,
                    k => {
                        let v = libm::exp(a + (b - a) * k as f64 / (count - 1) as f64);
                        // Snap to the shortest decimal so 1e-4 prints as 1e-4.
                        format_snap(v)
                    }
                })
                .collect()
        }
    })
}

fn format_snap(v: f64) -> f64 {
    let inv_scale = libm::pow(10.0, 12.0 - libm::floor(libm::log10(v)));
    libm::round(v * inv_scale) / inv_scale
}

pub mod prelude {
    //! Commonly used types.
    #[doc(no_inline)]
    pub use crate::backaction::{
        ApparatusState, Dynamics, MeasurementConfig, SmearingEstimate, Trajectory,
        TrajectoryPoint,
    };
    #[doc(no_inline)]
    pub use crate::hilbert::{BasisSpec, Operator, Pauli, QuantumState, Spin};
    #[doc(no_inline)]
    pub use crate::oscillator::{Branch, DiracParams};
    #[doc(no_inline)]
    pub use crate::propagate::Propagator;
    #[doc(no_inline)]
    pub use crate::units::ModelUnits;
    #[doc(no_inline)]
    pub use crate::{Error, Result, C64};
}
