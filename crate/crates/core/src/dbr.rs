//! Coupled-mode solution inside a uniform Bragg grating occupying [0, L].
//!
//! Forward and backward envelopes obey
//!
//! ```text
//! A'(x) =  iκ B(x) e^{iΔx}
//! B'(x) = −iκ A(x) e^{−iΔx}
//! ```
//!
//! with the boundary data A(0) and B(L). The solution is written as
//! `A = Q·A(0) + iκP·B(L)e^{iΔL}` and `B = −iκW·A(0) + V·B(L)`, where Q, P,
//! V, W are closed-form combinations of e^{±Sx/2}, S = √(4κ² − Δ²).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this |S|·L the exponential form is replaced by its series in S.
pub const BAND_EDGE_SERIES_THRESHOLD: f64 = 1e-6;

/// Denominators this small relative to their terms are treated as zero.
const SINGULAR_RELATIVE: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Grating strength, length and spatial frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbrParams {
    /// Coupling constant κ in 1/m, taken frequency independent.
    pub kappa: f64,
    /// Grating length in m.
    pub length: f64,
    /// Grating spatial frequency K in rad/m.
    pub grating: f64,
}

impl DbrParams {
    pub fn new(kappa: f64, length: f64, grating: f64) -> Result<Self> {
        let p = Self {
            kappa,
            length,
            grating,
        };
        p.validate()?;
        Ok(p)
    }

    /// Coupling constant of an index modulation Δn at wavenumber k, κ = (Δn/2)·k.
    pub fn kappa_from_index_modulation(delta_n: f64, k: f64) -> f64 {
        0.5 * delta_n * k
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::domain(format!("κ must be >= 0, got {}", self.kappa)));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::domain(format!(
                "grating length must be > 0, got {}",
                self.length
            )));
        }
        if !(self.grating > 0.0) || !self.grating.is_finite() {
            return Err(Error::domain(format!(
                "grating spatial frequency must be > 0, got {}",
                self.grating
            )));
        }
        Ok(())
    }
}

/// Q, P, V, W at one position, with the auxiliaries S and D.
///
/// `d` is the unscaled denominator `iΔ(e^{SL} − 1) + S(e^{SL} + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledModeFields {
    pub q: Complex64,
    pub p: Complex64,
    pub v: Complex64,
    pub w: Complex64,
    pub s: Complex64,
    pub d: Complex64,
}

/// Amplitude reflection and transmission of the grating.
///
/// Unprimed coefficients are for light incident from the left (x < 0),
/// primed ones for light incident from the right.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbrCoefficients {
    pub r: Complex64,
    pub t: Complex64,
    pub rprime: Complex64,
    pub tprime: Complex64,
}

impl DbrCoefficients {
    /// `r·t* + r'*·t'`, zero for a lossless element.
    pub fn stokes_residual(&self) -> Complex64 {
        self.r * self.t.conj() + self.rprime.conj() * self.tprime
    }
}

/// Frequency-dependent part of the solution, evaluated once per detuning
/// and then sampled at any position.
#[derive(Clone, Copy, Debug)]
pub struct CoupledModeSolution {
    kappa: f64,
    length: f64,
    delta: f64,
    s: Complex64,
    form: Form,
}

#[derive(Clone, Copy, Debug)]
enum Form {
    /// `e^{−SL}` and `D·e^{−SL}`.
    Exponential { decay: Complex64, denom: Complex64 },
    /// `D·e^{−SL/2}/(2S)` truncated at second order in S.
    Series { denom: Complex64 },
}

// cosh(z) and sinh(z)/z to second order.
fn cosh2(z: Complex64) -> Complex64 {
    1.0 + z * z / 2.0
}

fn sinhc2(z: Complex64) -> Complex64 {
    1.0 + z * z / 6.0
}

impl CoupledModeSolution {
    /// Uses the principal branch of S.
    pub fn new(params: &DbrParams, delta: f64) -> Result<Self> {
        let s = Complex64::new(4.0 * params.kappa * params.kappa - delta * delta, 0.0).sqrt();
        Self::with_root(params, delta, s)
    }

    /// Evaluates with a caller-chosen root `s`; both roots of S² = 4κ² − Δ²
    /// give the same fields.
    pub fn with_root(params: &DbrParams, delta: f64, s: Complex64) -> Result<Self> {
        params.validate()?;
        if !delta.is_finite() {
            return Err(Error::domain(format!(
                "detuning must be finite, got {delta}"
            )));
        }
        let l = params.length;
        let form = if s.norm() * l < BAND_EDGE_SERIES_THRESHOLD {
            let half = s * (l / 2.0);
            let denom = cosh2(half) + I * delta * (l / 2.0) * sinhc2(half);
            if !(denom.norm() > SINGULAR_RELATIVE * (1.0 + delta.abs() * l / 2.0)) {
                return Err(Error::Singular {
                    context: "coupled-mode denominator",
                    magnitude: denom.norm(),
                });
            }
            Form::Series { denom }
        } else {
            let decay = (-s * l).exp();
            let denom = I * delta * (1.0 - decay) + s * (1.0 + decay);
            if !(denom.norm()
                > SINGULAR_RELATIVE * (s.norm() + delta.abs()) * decay.norm().max(1.0))
            {
                return Err(Error::Singular {
                    context: "coupled-mode denominator",
                    magnitude: denom.norm(),
                });
            }
            Form::Exponential { decay, denom }
        };
        Ok(Self {
            kappa: params.kappa,
            length: l,
            delta,
            s,
            form,
        })
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_series(&self) -> bool {
        matches!(self.form, Form::Series { .. })
    }

    /// Q, P, V, W at position `x` in [0, L].
    pub fn at(&self, x: f64) -> Result<CoupledModeFields> {
        let l = self.length;
        if !(0.0..=l).contains(&x) {
            return Err(Error::domain(format!(
                "position {x} outside grating [0, {l}]"
            )));
        }
        Ok(self.at_unchecked(x))
    }

    pub(crate) fn at_unchecked(&self, x: f64) -> CoupledModeFields {
        let l = self.length;
        let s = self.s;
        let id = I * self.delta;
        match self.form {
            Form::Exponential { decay, denom } => {
                let e_xl = (s * (x - l)).exp();
                let q =
                    ((id - s) * (x / 2.0)).exp() * (s * (e_xl + 1.0) - id * (e_xl - 1.0)) / denom;
                let p = 2.0 * ((id - s) * ((x - l) / 2.0)).exp() * (e_xl - decay) / denom;
                let v = (-(id + s) * ((x - l) / 2.0)).exp()
                    * (s * (e_xl + decay) + id * (e_xl - decay))
                    / denom;
                let w = 2.0 * (-(id + s) * (x / 2.0)).exp() * (e_xl - 1.0) / denom;
                CoupledModeFields {
                    q,
                    p,
                    v,
                    w,
                    s,
                    d: denom / decay,
                }
            }
            Form::Series { denom } => {
                let a = (l - x) / 2.0;
                let q = (id * (x / 2.0)).exp() * (cosh2(s * a) + id * a * sinhc2(s * a)) / denom;
                let p = (id * ((x - l) / 2.0)).exp() * x * sinhc2(s * (x / 2.0)) / denom;
                let v = (-id * ((x - l) / 2.0)).exp()
                    * (cosh2(s * (x / 2.0)) + id * (x / 2.0) * sinhc2(s * (x / 2.0)))
                    / denom;
                let w = -(-id * (x / 2.0)).exp() * (l - x) * sinhc2(s * a) / denom;
                CoupledModeFields {
                    q,
                    p,
                    v,
                    w,
                    s,
                    d: 2.0 * s * (s * (l / 2.0)).exp() * denom,
                }
            }
        }
    }

    /// Only Q and W, the pair that shapes the cavity mode.
    pub(crate) fn qw_unchecked(&self, x: f64) -> (Complex64, Complex64) {
        let l = self.length;
        let s = self.s;
        let id = I * self.delta;
        match self.form {
            Form::Exponential { denom, .. } => {
                let e_xl = (s * (x - l)).exp();
                let q =
                    ((id - s) * (x / 2.0)).exp() * (s * (e_xl + 1.0) - id * (e_xl - 1.0)) / denom;
                let w = 2.0 * (-(id + s) * (x / 2.0)).exp() * (e_xl - 1.0) / denom;
                (q, w)
            }
            Form::Series { .. } => {
                let f = self.at_unchecked(x);
                (f.q, f.w)
            }
        }
    }

    pub fn coefficients(&self) -> DbrCoefficients {
        let t = self.at_unchecked(self.length).q;
        let r = -I * self.kappa * self.at_unchecked(0.0).w;
        DbrCoefficients {
            r,
            t,
            rprime: r * (I * self.delta * self.length).exp(),
            tprime: t,
        }
    }

    /// `| |κP(L)|² + |V(0)|² − 1 |`.
    pub fn energy_defect(&self) -> f64 {
        let p_l = self.at_unchecked(self.length).p;
        let v_0 = self.at_unchecked(0.0).v;
        ((self.kappa * p_l).norm_sqr() + v_0.norm_sqr() - 1.0).abs()
    }

    /// Envelopes A(x), B(x) for boundary data A(0) and B(L).
    pub fn envelopes(
        &self,
        x: f64,
        a0: Complex64,
        b_l: Complex64,
    ) -> Result<(Complex64, Complex64)> {
        let f = self.at(x)?;
        let k = self.kappa;
        let a = f.q * a0 + I * k * f.p * b_l * (I * self.delta * self.length).exp();
        let b = -I * k * f.w * a0 + f.v * b_l;
        Ok((a, b))
    }
}

pub fn coupled_mode_fields(params: &DbrParams, delta: f64, x: f64) -> Result<CoupledModeFields> {
    CoupledModeSolution::new(params, delta)?.at(x)
}

pub fn dbr_coefficients(params: &DbrParams, delta: f64) -> Result<DbrCoefficients> {
    Ok(CoupledModeSolution::new(params, delta)?.coefficients())
}

pub fn energy_defect(params: &DbrParams, delta: f64) -> Result<f64> {
    Ok(CoupledModeSolution::new(params, delta)?.energy_defect())
}
