//! Parametric down-conversion in a distributed-Bragg-reflector microcavity.
//!
//! The crate computes grating and cavity responses from coupled-mode theory,
//! builds the two-photon joint spectral amplitude from the cavity mode
//! functions, and quantifies its spectral entanglement by Schmidt
//! decomposition.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod dbr;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod jsa;
pub mod linalg;
pub mod quadrature;
pub mod schmidt;

pub use cavity::{
    CavityAssembly, CavityMode, CavityResponse, MirrorParams, ModeNormalization, SpectrumRow,
};
pub use dbr::{
    coupled_mode_fields, dbr_coefficients, CoupledModeFields, CoupledModeSolution, DbrCoefficients,
    DbrParams,
};
pub use dispersion::{Dispersion, DispersionModel, Polarization, MODEL_SPEED_OF_LIGHT};
pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use jsa::{
    build_jsa, phase_matching_integral, phase_matching_integral_analytic, Integrator, JsaMatrix,
    JsaSettings, PumpMode, PumpSpectrum, QuadratureSettings,
};
pub use schmidt::{
    metrics, reduced_density, schmidt_decompose, schmidt_decompose_with, temporal_mode,
    EntanglementMetrics, ReducedDensity, SchmidtSpectrum,
};
