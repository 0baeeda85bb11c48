//! Per-polarization wavenumber laws.
//!
//! The default model is the first-order expansion of k(ω) about the
//! degenerate signal/idler carrier, `k = n0·ω0/c + k'·(ω − ω0)`, with
//! type-II KTP constants at 800 nm. Signal and pump are extraordinary
//! waves, the idler is ordinary. A vacuum model (n = 1, k' = 1/c) is
//! provided for bare-grating demonstrations.

use std::f64::consts::PI;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Light speed used by the default models. Mapping the 800 nm carrier with
/// this value puts the grating stop bands at the centre of the
/// {2.3552, 2.3572}×10¹⁵ rad/s simulation window.
pub const MODEL_SPEED_OF_LIGHT: f64 = 3.0e8;

pub const SPEED_OF_LIGHT_SI: f64 = 299_792_458.0;

/// Degenerate signal/idler vacuum wavelength of the KTP design.
pub const KTP_WAVELENGTH: f64 = 800e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Signal,
    Idler,
    Pump,
}

impl Polarization {
    pub const ALL: [Polarization; 3] = [
        Polarization::Signal,
        Polarization::Idler,
        Polarization::Pump,
    ];

    /// Signal and pump travel as extraordinary waves; the idler is ordinary.
    pub fn is_extraordinary(self) -> bool {
        !matches!(self, Polarization::Idler)
    }
}

/// A wavenumber law k(ω) for each polarization.
///
/// Implementations must be monotonic (dk/dω > 0) over the band they are
/// used in.
pub trait Dispersion: Send + Sync + Debug {
    /// Propagation constant in rad/m.
    fn wavenumber(&self, pol: Polarization, omega: f64) -> Result<f64>;

    /// Vacuum light speed the model uses, also for the air gap.
    fn speed_of_light(&self) -> f64;

    /// Carrier frequency of the given polarization in rad/s.
    fn reference_frequency(&self, pol: Polarization) -> f64;

    /// Grating detuning Δ = K − 2k(ω).
    fn detuning(&self, pol: Polarization, omega: f64, grating: f64) -> Result<f64> {
        if !(grating > 0.0) {
            return Err(Error::domain(format!(
                "grating spatial frequency must be positive, got {grating}"
            )));
        }
        Ok(grating - 2.0 * self.wavenumber(pol, omega)?)
    }

    /// Grating frequency that is Bragg-matched at the carrier, K = 2k(ω0).
    fn bragg_grating(&self, pol: Polarization) -> f64 {
        let omega0 = self.reference_frequency(pol);
        2.0 * self
            .wavenumber(pol, omega0)
            .expect("reference frequency is positive")
    }
}

/// Affine k(ω) for one polarization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearBranch {
    /// Refractive index at `omega0`.
    pub n0: f64,
    /// Group delay per unit length dk/dω in s/m.
    pub kprime: f64,
    /// Expansion point in rad/s.
    pub omega0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    pub signal: LinearBranch,
    pub idler: LinearBranch,
    pub pump: LinearBranch,
    pub speed_of_light: f64,
}

impl DispersionModel {
    pub fn new(
        signal: LinearBranch,
        idler: LinearBranch,
        pump: LinearBranch,
        speed_of_light: f64,
    ) -> Result<Self> {
        if !(speed_of_light > 0.0) {
            return Err(Error::domain(format!(
                "speed of light must be positive, got {speed_of_light}"
            )));
        }
        for (pol, b) in [
            (Polarization::Signal, &signal),
            (Polarization::Idler, &idler),
            (Polarization::Pump, &pump),
        ] {
            if !(b.n0 >= 1.0) || !b.n0.is_finite() {
                return Err(Error::domain(format!(
                    "{pol:?} index must be >= 1, got {}",
                    b.n0
                )));
            }
            if !(b.kprime > 0.0) || !b.kprime.is_finite() {
                return Err(Error::domain(format!(
                    "{pol:?} dk/dω must be positive, got {}",
                    b.kprime
                )));
            }
            if !(b.omega0 > 0.0) || !b.omega0.is_finite() {
                return Err(Error::domain(format!(
                    "{pol:?} reference frequency must be positive, got {}",
                    b.omega0
                )));
            }
        }
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !rel(signal.omega0, idler.omega0) {
            return Err(Error::domain(
                "signal and idler must share a degenerate reference frequency",
            ));
        }
        if !rel(pump.omega0, 2.0 * signal.omega0) {
            return Err(Error::domain(
                "pump reference frequency must be twice the signal's",
            ));
        }
        Ok(Self {
            signal,
            idler,
            pump,
            speed_of_light,
        })
    }

    /// Type-II KTP at a degenerate 800 nm, linearized.
    pub fn ktp() -> Self {
        Self::ktp_at(KTP_WAVELENGTH, MODEL_SPEED_OF_LIGHT)
    }

    pub fn ktp_at(wavelength: f64, speed_of_light: f64) -> Self {
        let omega0 = 2.0 * PI * speed_of_light / wavelength;
        Self {
            signal: LinearBranch {
                n0: 1.6047,
                kprime: 5.4212e-9,
                omega0,
            },
            idler: LinearBranch {
                n0: 1.6605,
                kprime: 5.6149e-9,
                omega0,
            },
            pump: LinearBranch {
                n0: 1.6326,
                kprime: 5.6949e-9,
                omega0: 2.0 * omega0,
            },
            speed_of_light,
        }
    }

    /// Free space for all polarizations; exact for any `omega0`.
    pub fn vacuum(omega0: f64, speed_of_light: f64) -> Self {
        let branch = |w0| LinearBranch {
            n0: 1.0,
            kprime: 1.0 / speed_of_light,
            omega0: w0,
        };
        Self {
            signal: branch(omega0),
            idler: branch(omega0),
            pump: branch(2.0 * omega0),
            speed_of_light,
        }
    }

    pub fn branch(&self, pol: Polarization) -> &LinearBranch {
        match pol {
            Polarization::Signal => &self.signal,
            Polarization::Idler => &self.idler,
            Polarization::Pump => &self.pump,
        }
    }
}

impl Dispersion for DispersionModel {
    fn wavenumber(&self, pol: Polarization, omega: f64) -> Result<f64> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::domain(format!(
                "angular frequency must be positive, got {omega}"
            )));
        }
        let b = self.branch(pol);
        Ok(b.n0 * b.omega0 / self.speed_of_light + b.kprime * (omega - b.omega0))
    }

    fn speed_of_light(&self) -> f64 {
        self.speed_of_light
    }

    fn reference_frequency(&self, pol: Polarization) -> f64 {
        self.branch(pol).omega0
    }
}
