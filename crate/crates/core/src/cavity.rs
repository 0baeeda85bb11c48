//! Thin mirror at x = −d, air gap, Bragg grating on [0, L].
//!
//! The mirror reflects +ρ for light arriving from the gap side and −ρ from
//! outside, and transmits τ both ways. With input A₃ from the left only and
//! no input from the right of the grating:
//!
//! ```text
//! f  = 1 − ρ r e^{2ik d}
//! A₂ = (τ/f) A₃
//! R  = −ρ + e^{2ik d} r τ² / f
//! ```
//!
//! and the field inside the grating is
//! `u(x) = N (τ/f) e^{ikd} [Q(x) e^{ikx} − iκ W(x) e^{−ikx}]`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dbr::{CoupledModeSolution, DbrCoefficients, DbrParams};
use crate::dispersion::{Dispersion, Polarization};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

const RESONANCE_FLOOR: f64 = 1e-200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorParams {
    pub rho: f64,
    pub tau: f64,
}

impl MirrorParams {
    /// From the amplitude reflectivity; τ = √(1 − ρ²).
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!(
                "mirror reflectivity must satisfy 0 <= ρ < 1, got {rho}"
            )));
        }
        Ok(Self {
            rho,
            tau: (1.0 - rho * rho).sqrt(),
        })
    }

    /// From the power reflectivity ρ².
    pub fn from_power_reflectivity(rho2: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho2) {
            return Err(Error::domain(format!(
                "mirror power reflectivity must satisfy 0 <= ρ² < 1, got {rho2}"
            )));
        }
        Ok(Self {
            rho: rho2.sqrt(),
            tau: (1.0 - rho2).sqrt(),
        })
    }

    pub fn none() -> Self {
        Self { rho: 0.0, tau: 1.0 }
    }
}

/// Constant multiplying every mode function.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeNormalization {
    /// (2πc)^{−1/2}, the free-field amplitude outside the structure.
    #[default]
    FreeField,
    Unit,
}

impl ModeNormalization {
    pub fn constant(self, speed_of_light: f64) -> f64 {
        match self {
            ModeNormalization::FreeField => (2.0 * PI * speed_of_light).powf(-0.5),
            ModeNormalization::Unit => 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CavityAssembly {
    pub dbr: DbrParams,
    pub mirror: MirrorParams,
    /// Air-gap length d in m.
    pub gap: f64,
    pub pol: Polarization,
    pub dispersion: Arc<dyn Dispersion>,
    pub normalization: ModeNormalization,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityResponse {
    /// Resonance denominator f.
    pub f: Complex64,
    /// Overall reflection R = B₃/A₃.
    pub reflection: Complex64,
    /// Intracavity amplitude ratio A₂/A₃ = τ/f.
    pub a2: Complex64,
    /// Field leaving the far end of the grating, A(L)/A₃.
    pub transmission: Complex64,
    pub dbr: DbrCoefficients,
}

/// Response to light incident from the right of the grating only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RightIncidenceResponse {
    /// B(0)/B(L) = t/f.
    pub b0: Complex64,
    /// A(L)/B(L) = r e^{iΔL} + e^{2ikd} ρ t² / f.
    pub reflection: Complex64,
    /// B₃/B(L) = τ e^{ikd} t / f.
    pub transmission: Complex64,
}

/// One row of a reflectivity scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumRow {
    pub omega: f64,
    /// Wavenumber in the grating medium.
    pub k: f64,
    /// |r|² of the bare grating.
    pub dbr_reflectivity: f64,
    /// |t|² of the bare grating.
    pub dbr_transmissivity: f64,
    /// |R|² of the cavity.
    pub cavity_reflectivity: f64,
    /// |A₂|².
    pub intracavity: f64,
}

/// Frequency-dependent data of the cavity mode at one ω, reusable across
/// positions.
#[derive(Clone, Copy, Debug)]
pub struct CavityMode {
    pub omega: f64,
    /// Wavenumber in the grating medium.
    pub k: f64,
    /// Wavenumber in the air gap.
    pub k_gap: f64,
    pub delta: f64,
    pub kappa: f64,
    pub length: f64,
    /// N·(τ/f)·e^{ik_gap·d}.
    pub amplitude: Complex64,
    pub response: CavityResponse,
    pub solution: CoupledModeSolution,
}

impl CavityMode {
    /// u(x) for x in [0, L].
    pub fn at(&self, x: f64) -> Result<Complex64> {
        if !(0.0..=self.length).contains(&x) {
            return Err(Error::domain(format!(
                "position {x} outside nonlinear medium [0, {}]",
                self.length
            )));
        }
        Ok(self.at_unchecked(x))
    }

    pub(crate) fn at_unchecked(&self, x: f64) -> Complex64 {
        let (q, w) = self.solution.qw_unchecked(x);
        let phase = Complex64::from_polar(1.0, self.k * x);
        self.amplitude * (q * phase - I * self.kappa * w * phase.conj())
    }
}

impl CavityAssembly {
    pub fn new(
        dbr: DbrParams,
        mirror: MirrorParams,
        gap: f64,
        pol: Polarization,
        dispersion: Arc<dyn Dispersion>,
        normalization: ModeNormalization,
    ) -> Result<Self> {
        dbr.validate()?;
        if !(gap > 0.0) || !gap.is_finite() {
            return Err(Error::domain(format!("gap length must be > 0, got {gap}")));
        }
        if !(0.0..1.0).contains(&mirror.rho)
            || ((mirror.rho.powi(2) + mirror.tau.powi(2)) - 1.0).abs() > 1e-12
        {
            return Err(Error::domain(format!(
                "mirror must satisfy 0 <= ρ < 1 and ρ² + τ² = 1, got ρ = {}, τ = {}",
                mirror.rho, mirror.tau
            )));
        }
        Ok(Self {
            dbr,
            mirror,
            gap,
            pol,
            dispersion,
            normalization,
        })
    }

    pub fn gap_wavenumber(&self, omega: f64) -> f64 {
        omega / self.dispersion.speed_of_light()
    }

    pub fn detuning(&self, omega: f64) -> Result<f64> {
        self.dispersion.detuning(self.pol, omega, self.dbr.grating)
    }

    /// Whether ω lies in the grating stop band |Δ| < 2κ.
    pub fn in_stop_band(&self, omega: f64) -> Result<bool> {
        Ok(self.detuning(omega)?.abs() < 2.0 * self.dbr.kappa)
    }

    fn solve(&self, omega: f64) -> Result<(f64, f64, f64, CoupledModeSolution, CavityResponse)> {
        let k = self.dispersion.wavenumber(self.pol, omega)?;
        let delta = self.dbr.grating - 2.0 * k;
        let solution = CoupledModeSolution::new(&self.dbr, delta)?;
        let dbr = solution.coefficients();
        let k_gap = self.gap_wavenumber(omega);
        let round_trip = Complex64::from_polar(1.0, 2.0 * k_gap * self.gap);
        let (rho, tau) = (self.mirror.rho, self.mirror.tau);
        let f = 1.0 - rho * dbr.r * round_trip;
        if !(f.norm() > RESONANCE_FLOOR) {
            return Err(Error::Singular {
                context: "cavity resonance denominator",
                magnitude: f.norm(),
            });
        }
        let a2 = tau / f;
        let response = CavityResponse {
            f,
            reflection: -rho + round_trip * dbr.r * tau * tau / f,
            a2,
            transmission: dbr.t * Complex64::from_polar(1.0, k_gap * self.gap) * a2,
            dbr,
        };
        Ok((k, k_gap, delta, solution, response))
    }

    pub fn response(&self, omega: f64) -> Result<CavityResponse> {
        Ok(self.solve(omega)?.4)
    }

    pub fn mode(&self, omega: f64) -> Result<CavityMode> {
        let (k, k_gap, delta, solution, response) = self.solve(omega)?;
        let norm = self
            .normalization
            .constant(self.dispersion.speed_of_light());
        Ok(CavityMode {
            omega,
            k,
            k_gap,
            delta,
            kappa: self.dbr.kappa,
            length: self.dbr.length,
            amplitude: norm * response.a2 * Complex64::from_polar(1.0, k_gap * self.gap),
            response,
            solution,
        })
    }

    /// Spatial mode function u(x, ω) inside the nonlinear medium.
    pub fn mode_function(&self, x: f64, omega: f64) -> Result<Complex64> {
        self.mode(omega)?.at(x)
    }

    pub fn right_incidence_response(&self, omega: f64) -> Result<RightIncidenceResponse> {
        let (_, k_gap, delta, _, resp) = self.solve(omega)?;
        let t = resp.dbr.t;
        let round_trip = Complex64::from_polar(1.0, 2.0 * k_gap * self.gap);
        let b0 = t / resp.f;
        Ok(RightIncidenceResponse {
            b0,
            reflection: resp.dbr.r * Complex64::from_polar(1.0, delta * self.dbr.length)
                + round_trip * self.mirror.rho * t * t / resp.f,
            transmission: self.mirror.tau * Complex64::from_polar(1.0, k_gap * self.gap) * b0,
        })
    }

    pub fn reflectivity_spectrum(&self, grid: &FrequencyGrid) -> Result<Vec<SpectrumRow>> {
        grid.values()
            .into_iter()
            .map(|omega| {
                let (k, _, _, _, resp) = self.solve(omega)?;
                Ok(SpectrumRow {
                    omega,
                    k,
                    dbr_reflectivity: resp.dbr.r.norm_sqr(),
                    dbr_transmissivity: resp.dbr.t.norm_sqr(),
                    cavity_reflectivity: resp.reflection.norm_sqr(),
                    intracavity: resp.a2.norm_sqr(),
                })
            })
            .collect()
    }
}
