//! Joint spectral amplitude of the photon pair.
//!
//! ```text
//! B(ωs, ωi) = √(ωi/ωs)/ωs · E_p(ωs + ωi) · ∫₀ᴸ w(x, ωs+ωi) u_S*(x, ωs) u_I*(x, ωi) dx
//! ```
//!
//! with the pump mode `w = e^{i k_p x}` (no reflection at the grating) and
//! a Gaussian pump spectrum about the pump carrier. Overall constants are
//! dropped; the Schmidt analysis normalizes afterwards.
//!
//! Two integrators are provided. [`Integrator::Analytic`] expands both mode
//! functions into exponential terms and integrates each in closed form.
//! [`Integrator::Quadrature`] samples the mode functions on a composite
//! Gauss–Legendre rule resolving the fastest term; it is the independent
//! check and is practical only on small grids.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityAssembly, CavityMode};
use crate::dispersion::{Dispersion, Polarization};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::quadrature::CompositeRule;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this |S|·L the analytic expansion switches to the band-edge limit.
const ANALYTIC_EDGE_THRESHOLD: f64 = 1e-5;

/// Transform-limited Gaussian pump, `E_p = A·exp(−(ω − ω_c)²/σ²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpSpectrum {
    pub sigma: f64,
    pub center: f64,
    pub amplitude: f64,
}

impl PumpSpectrum {
    pub fn new(sigma: f64, center: f64, amplitude: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!(
                "pump width must be > 0, got {sigma}"
            )));
        }
        if !(center > 0.0) || !center.is_finite() {
            return Err(Error::domain(format!(
                "pump carrier must be > 0, got {center}"
            )));
        }
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::domain(format!(
                "pump amplitude must be > 0, got {amplitude}"
            )));
        }
        Ok(Self {
            sigma,
            center,
            amplitude,
        })
    }

    pub fn at(&self, omega_sum: f64) -> f64 {
        let z = (omega_sum - self.center) / self.sigma;
        self.amplitude * (-z * z).exp()
    }
}

/// Forward-only pump plane wave.
#[derive(Clone, Debug)]
pub struct PumpMode {
    pub dispersion: Arc<dyn Dispersion>,
}

impl PumpMode {
    pub fn new(dispersion: Arc<dyn Dispersion>) -> Self {
        Self { dispersion }
    }

    pub fn wavenumber(&self, omega: f64) -> Result<f64> {
        self.dispersion.wavenumber(Polarization::Pump, omega)
    }

    pub fn at(&self, x: f64, omega: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(1.0, self.wavenumber(omega)? * x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Nodes per period of the fastest exponential term.
    pub points_per_period: f64,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Allowed change under panel doubling, relative to ∫|integrand|.
    pub tolerance: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            points_per_period: 20.0,
            order: 8,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Integrator {
    #[default]
    Analytic,
    Quadrature(QuadratureSettings),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JsaSettings {
    pub integrator: Integrator,
    /// Worker threads for the matrix build; `None` uses the global pool.
    pub workers: Option<usize>,
}

/// B(ωs[m], ωi[n]) stored row-major, rows indexed by signal frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct JsaMatrix {
    pub grid_s: FrequencyGrid,
    pub grid_i: FrequencyGrid,
    values: Vec<Complex64>,
}

impl JsaMatrix {
    pub fn from_values(
        grid_s: FrequencyGrid,
        grid_i: FrequencyGrid,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != grid_s.len() * grid_i.len() {
            return Err(Error::domain(format!(
                "matrix has {} entries, grids need {}x{}",
                values.len(),
                grid_s.len(),
                grid_i.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Self {
            grid_s,
            grid_i,
            values,
        })
    }

    pub fn n_signal(&self) -> usize {
        self.grid_s.len()
    }

    pub fn n_idler(&self) -> usize {
        self.grid_i.len()
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.values[m * self.n_idler() + n]
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        let n = self.n_idler();
        &self.values[m * n..(m + 1) * n]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid_s: self.grid_s,
            grid_i: self.grid_i,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// (row, column) of the entry with the largest modulus.
    pub fn argmax_abs(&self) -> (usize, usize) {
        let idx = (0..self.values.len())
            .max_by(|&a, &b| self.values[a].norm().total_cmp(&self.values[b].norm()))
            .unwrap_or(0);
        (idx / self.n_idler(), idx % self.n_idler())
    }
}

/// √(ωi/ωs)/ωs, the frequency-dependent part of the field-mode prefactor.
pub fn prefactor(omega_s: f64, omega_i: f64) -> f64 {
    (omega_i / omega_s).sqrt() / omega_s
}

fn check_pair(signal: &CavityAssembly, idler: &CavityAssembly) -> Result<()> {
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !same(signal.dbr.length, idler.dbr.length) || !same(signal.gap, idler.gap) {
        return Err(Error::domain(
            "signal and idler cavities must share the grating length and gap",
        ));
    }
    Ok(())
}

/// `coef · x^degree · e^{rate·x}`.
#[derive(Clone, Copy, Debug)]
struct ExpTerm {
    coef: Complex64,
    rate: Complex64,
    degree: u8,
}

/// ∫₀¹ t^p e^{zt} dt.
fn unit_moment(p: u8, z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        // Σ zⁿ / (n! (n + p + 1))
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..40 {
            let contrib = term / (n as f64 + p as f64 + 1.0);
            sum += contrib;
            if contrib.norm() < 1e-18 * sum.norm() {
                break;
            }
            term = term * z / (n as f64 + 1.0);
        }
        sum
    } else {
        let ez = z.exp();
        let mut m = (ez - 1.0) / z;
        for k in 1..=p {
            m = (ez - k as f64 * m) / z;
        }
        m
    }
}

/// ∫₀ᴸ x^p e^{bx} dx.
fn integrate_term(t: &ExpTerm, length: f64) -> Complex64 {
    t.coef * length.powi(t.degree as i32 + 1) * unit_moment(t.degree, t.rate * length)
}

/// u(x) of a cavity mode as a sum of exponential terms, from the hyperbolic
/// form of the grating solution:
///
/// ```text
/// Q = e^{iΔx/2} [S cosh(S(L−x)/2) + iΔ sinh(S(L−x)/2)] / Γ
/// W = −2 e^{−iΔx/2} sinh(S(L−x)/2) / Γ
/// Γ = S cosh(SL/2) + iΔ sinh(SL/2)
/// ```
fn mode_terms(mode: &CavityMode) -> Vec<ExpTerm> {
    let (l, k, kappa, delta) = (mode.length, mode.k, mode.kappa, mode.delta);
    let s = Complex64::new(4.0 * kappa * kappa - delta * delta, 0.0).sqrt();
    let id = I * delta;
    let amp = mode.amplitude;
    let back = amp * (-I * kappa);
    let mut terms = Vec::with_capacity(6);
    if s.norm() * l < ANALYTIC_EDGE_THRESHOLD {
        // S → 0: Q = e^{iΔx/2}(1 + iΔ(L−x)/2)/g, W = −e^{−iΔx/2}(L−x)/g.
        let g = 1.0 + id * (l / 2.0);
        let fwd = id / 2.0 + I * k;
        let bwd = -id / 2.0 - I * k;
        terms.push(ExpTerm {
            coef: amp * (1.0 + id * l / 2.0) / g,
            rate: fwd,
            degree: 0,
        });
        terms.push(ExpTerm {
            coef: amp * (-id / 2.0) / g,
            rate: fwd,
            degree: 1,
        });
        terms.push(ExpTerm {
            coef: back * (-l) / g,
            rate: bwd,
            degree: 0,
        });
        terms.push(ExpTerm {
            coef: back / g,
            rate: bwd,
            degree: 1,
        });
    } else {
        let half = s * (l / 2.0);
        let gamma = s * half.cosh() + id * half.sinh();
        let (ep, em) = (half.exp(), (-half).exp());
        terms.push(ExpTerm {
            coef: amp * (s + id) * ep / (2.0 * gamma),
            rate: (id - s) / 2.0 + I * k,
            degree: 0,
        });
        terms.push(ExpTerm {
            coef: amp * (s - id) * em / (2.0 * gamma),
            rate: (id + s) / 2.0 + I * k,
            degree: 0,
        });
        terms.push(ExpTerm {
            coef: back * (-ep / gamma),
            rate: -(id + s) / 2.0 - I * k,
            degree: 0,
        });
        terms.push(ExpTerm {
            coef: back * (em / gamma),
            rate: (s - id) / 2.0 - I * k,
            degree: 0,
        });
    }
    terms
}

fn conj_terms(terms: &[ExpTerm]) -> Vec<ExpTerm> {
    terms
        .iter()
        .map(|t| ExpTerm {
            coef: t.coef.conj(),
            rate: t.rate.conj(),
            degree: t.degree,
        })
        .collect()
}

fn analytic_entry(
    sig_conj: &[ExpTerm],
    idl_conj: &[ExpTerm],
    k_pump: f64,
    length: f64,
) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for a in sig_conj {
        for b in idl_conj {
            let t = ExpTerm {
                coef: a.coef * b.coef,
                rate: I * k_pump + a.rate + b.rate,
                degree: a.degree + b.degree,
            };
            sum += integrate_term(&t, length);
        }
    }
    sum
}

/// Closed-form phase-matching integral.
pub fn phase_matching_integral_analytic(
    signal: &CavityAssembly,
    idler: &CavityAssembly,
    pump: &PumpMode,
    omega_s: f64,
    omega_i: f64,
) -> Result<Complex64> {
    check_pair(signal, idler)?;
    let sm = signal.mode(omega_s)?;
    let im = idler.mode(omega_i)?;
    let kp = pump.wavenumber(omega_s + omega_i)?;
    Ok(analytic_entry(
        &conj_terms(&mode_terms(&sm)),
        &conj_terms(&mode_terms(&im)),
        kp,
        sm.length,
    ))
}

/// Rates of the exponential terms of u(x): forward ±S/2 + iK/2 and, if the
/// grating couples, backward ±S/2 − iK/2.
fn mode_rates(mode: &CavityMode) -> Vec<Complex64> {
    let s = mode.solution.s();
    let half_k = Complex64::new(0.0, mode.k + mode.delta / 2.0);
    let mut rates = vec![half_k + s / 2.0, half_k - s / 2.0];
    if mode.kappa != 0.0 {
        rates.extend([-half_k + s / 2.0, -half_k - s / 2.0]);
    }
    rates
}

/// Largest |b| over the integrand's exponential terms.
fn max_rate(sm: &CavityMode, im: &CavityMode, k_pump: f64) -> f64 {
    let mut best = 0.0f64;
    for a in mode_rates(sm) {
        for b in mode_rates(im) {
            best = best.max((I * k_pump + a.conj() + b.conj()).norm());
        }
    }
    best
}

fn quadrature_rules(
    length: f64,
    rate: f64,
    settings: &QuadratureSettings,
) -> Result<(CompositeRule, CompositeRule)> {
    if !(settings.points_per_period > 0.0) || settings.order == 0 || !(settings.tolerance > 0.0) {
        return Err(Error::domain(format!(
            "invalid quadrature settings {settings:?}"
        )));
    }
    // At least a handful of panels so the refinement check is meaningful for slow integrands.
    let panels =
        CompositeRule::panels_for(length, rate, settings.points_per_period, settings.order).max(4);
    Ok((
        CompositeRule::new(0.0, length, panels, settings.order),
        CompositeRule::new(0.0, length, 2 * panels, settings.order),
    ))
}

fn converged(
    coarse: Complex64,
    fine: Complex64,
    l1: f64,
    panels: usize,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let scale = l1.max(fine.norm());
    let change = if scale > 0.0 {
        (fine - coarse).norm() / scale
    } else {
        0.0
    };
    if !(change <= settings.tolerance) {
        return Err(Error::QuadratureNotConverged {
            panels,
            refined_panels: 2 * panels,
            relative_change: change,
            tolerance: settings.tolerance,
        });
    }
    Ok(fine)
}

/// Phase-matching integral by composite Gauss–Legendre quadrature of the
/// sampled mode functions. The result on the doubled rule is returned after
/// checking it against the base rule.
pub fn phase_matching_integral(
    signal: &CavityAssembly,
    idler: &CavityAssembly,
    pump: &PumpMode,
    omega_s: f64,
    omega_i: f64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    check_pair(signal, idler)?;
    let sm = signal.mode(omega_s)?;
    let im = idler.mode(omega_i)?;
    let kp = pump.wavenumber(omega_s + omega_i)?;
    let (coarse, fine) = quadrature_rules(sm.length, max_rate(&sm, &im, kp), settings)?;
    let integrand = |x: f64| {
        Complex64::from_polar(1.0, kp * x) * sm.at_unchecked(x).conj() * im.at_unchecked(x).conj()
    };
    let a = coarse.integrate(integrand);
    let mut l1 = 0.0;
    let b = fine.integrate(|x| {
        let v = integrand(x);
        l1 += v.norm();
        v
    });
    // l1 accumulated unweighted; rescale by the mean weight.
    let l1 = l1 * sm.length / fine.len() as f64;
    converged(a, b, l1, coarse.panels, settings)
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::domain(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Assembles B on the product of two grids.
pub fn build_jsa(
    signal: &CavityAssembly,
    idler: &CavityAssembly,
    pump_spectrum: &PumpSpectrum,
    pump: &PumpMode,
    grid_s: &FrequencyGrid,
    grid_i: &FrequencyGrid,
    settings: &JsaSettings,
) -> Result<JsaMatrix> {
    check_pair(signal, idler)?;
    let ws = grid_s.values();
    let wi = grid_i.values();
    let idler_modes: Vec<CavityMode> = wi.iter().map(|&w| idler.mode(w)).collect::<Result<_>>()?;
    let length = signal.dbr.length;

    let rows: Vec<Vec<Complex64>> = match settings.integrator {
        Integrator::Analytic => {
            let idler_terms: Vec<Vec<ExpTerm>> = idler_modes
                .iter()
                .map(|m| conj_terms(&mode_terms(m)))
                .collect();
            with_workers(settings.workers, || {
                ws.par_iter()
                    .map(|&omega_s| -> Result<Vec<Complex64>> {
                        let sm = signal.mode(omega_s)?;
                        let sig_terms = conj_terms(&mode_terms(&sm));
                        wi.iter()
                            .zip(&idler_terms)
                            .map(|(&omega_i, it)| {
                                let kp = pump.wavenumber(omega_s + omega_i)?;
                                let weight = prefactor(omega_s, omega_i)
                                    * pump_spectrum.at(omega_s + omega_i);
                                Ok(weight * analytic_entry(&sig_terms, it, kp, length))
                            })
                            .collect()
                    })
                    .collect::<Result<Vec<_>>>()
            })??
        }
        Integrator::Quadrature(q) => {
            let signal_modes: Vec<CavityMode> =
                ws.iter().map(|&w| signal.mode(w)).collect::<Result<_>>()?;
            let mut rate = 0.0f64;
            for sm in &signal_modes {
                for im in &idler_modes {
                    let kp = pump.wavenumber(sm.omega + im.omega)?;
                    rate = rate.max(max_rate(sm, im, kp));
                }
            }
            let (coarse, fine) = quadrature_rules(length, rate, &q)?;
            // Idler samples are shared by every row; weights folded in.
            let sample = |m: &CavityMode, rule: &CompositeRule| -> Vec<Complex64> {
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| w * m.at_unchecked(x).conj())
                    .collect()
            };
            let idl_coarse: Vec<Vec<Complex64>> =
                idler_modes.iter().map(|m| sample(m, &coarse)).collect();
            let idl_fine: Vec<Vec<Complex64>> =
                idler_modes.iter().map(|m| sample(m, &fine)).collect();
            with_workers(settings.workers, || {
                signal_modes
                    .par_iter()
                    .map(|sm| -> Result<Vec<Complex64>> {
                        let sc: Vec<Complex64> = coarse
                            .nodes
                            .iter()
                            .map(|&x| sm.at_unchecked(x).conj())
                            .collect();
                        let sf: Vec<Complex64> = fine
                            .nodes
                            .iter()
                            .map(|&x| sm.at_unchecked(x).conj())
                            .collect();
                        idler_modes
                            .iter()
                            .enumerate()
                            .map(|(n, im)| {
                                let omega_sum = sm.omega + im.omega;
                                let kp = pump.wavenumber(omega_sum)?;
                                let product =
                                    |s: &[Complex64], i: &[Complex64]| -> Vec<Complex64> {
                                        s.iter().zip(i).map(|(a, b)| a * b).collect()
                                    };
                                let (a, _) =
                                    coarse.oscillatory_sum(kp, &product(&sc, &idl_coarse[n]));
                                let (b, l1) = fine.oscillatory_sum(kp, &product(&sf, &idl_fine[n]));
                                let value = converged(a, b, l1, coarse.panels, &q)?;
                                let weight =
                                    prefactor(sm.omega, im.omega) * pump_spectrum.at(omega_sum);
                                Ok(weight * value)
                            })
                            .collect()
                    })
                    .collect::<Result<Vec<_>>>()
            })??
        }
    };
    JsaMatrix::from_values(*grid_s, *grid_i, rows.into_iter().flatten().collect())
}
