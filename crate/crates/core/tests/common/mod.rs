#![allow(dead_code)]

use std::sync::Arc;

use microcavity_core::{
    CavityAssembly, DbrParams, Dispersion, DispersionModel, FrequencyGrid, MirrorParams,
    ModeNormalization, Polarization, PumpMode, PumpSpectrum,
};

pub const KAPPA: f64 = 2e3;
pub const LENGTH: f64 = 4e-3;
pub const GAP: f64 = 0.1999e-3;
pub const SIGMA: f64 = 0.3e12;

pub struct Setup {
    pub signal: CavityAssembly,
    pub idler: CavityAssembly,
    pub pump: PumpMode,
    pub spectrum: PumpSpectrum,
    pub dispersion: Arc<dyn Dispersion>,
}

pub fn setup(rho2: f64, kappa: f64) -> Setup {
    let dispersion: Arc<dyn Dispersion> = Arc::new(DispersionModel::ktp());
    let arm = |pol: Polarization| {
        let grating = dispersion.bragg_grating(pol);
        CavityAssembly::new(
            DbrParams::new(kappa, LENGTH, grating).unwrap(),
            MirrorParams::from_power_reflectivity(rho2).unwrap(),
            GAP,
            pol,
            dispersion.clone(),
            ModeNormalization::FreeField,
        )
        .unwrap()
    };
    let centre = dispersion.reference_frequency(Polarization::Pump);
    Setup {
        signal: arm(Polarization::Signal),
        idler: arm(Polarization::Idler),
        pump: PumpMode::new(dispersion.clone()),
        spectrum: PumpSpectrum::new(SIGMA, centre, 1.0).unwrap(),
        dispersion,
    }
}

pub fn grid(n: usize) -> FrequencyGrid {
    FrequencyGrid::default_band(n).unwrap()
}
