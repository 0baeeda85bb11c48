//! Schmidt decomposition of the joint spectral amplitude.
//!
//! On a uniform grid the continuous expansion
//! `B(ω, ω') = Σ √λ_j ψ_j(ω) φ_j(ω')` becomes the singular value
//! decomposition of the sampled matrix. Mode functions are stored with the
//! discrete normalization `Σ_m |ψ_j(ω_m)|² Δω = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::Polarization;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::jsa::JsaMatrix;
use crate::linalg::{hermitian_eigenvalues, thin_svd};

/// Modes with λ at or below this weight are dropped by default.
pub const DEFAULT_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    /// Schmidt weights λ_j, descending; λ_j = s_j²/Σ_k s_k² over all modes.
    pub lambdas: Vec<f64>,
    /// Signal modes ψ_j sampled on `grid_s`.
    pub psi: Vec<Vec<Complex64>>,
    /// Idler modes φ_j sampled on `grid_i`.
    pub phi: Vec<Vec<Complex64>>,
    pub grid_s: FrequencyGrid,
    pub grid_i: FrequencyGrid,
    /// Total weight of the modes removed by the threshold.
    pub discarded_weight: f64,
}

impl SchmidtSpectrum {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Σ_j √λ_j ψ_j(ω_m) φ_j(ω_n) √(Δω_s Δω_i), which equals B/‖B‖_F
    /// when every mode is retained.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (ns, ni) = (self.grid_s.len(), self.grid_i.len());
        let w = (self.grid_s.step() * self.grid_i.step()).sqrt();
        let mut out = vec![Complex64::new(0.0, 0.0); ns * ni];
        for ((l, psi), phi) in self.lambdas.iter().zip(&self.psi).zip(&self.phi) {
            let a = l.sqrt() * w;
            for m in 0..ns {
                let pm = a * psi[m];
                for n in 0..ni {
                    out[m * ni + n] += pm * phi[n];
                }
            }
        }
        out
    }

    /// Fraction of Σ|ψ_j|² carried by grid points where `inside` holds.
    pub fn signal_weight_where(&self, index: usize, inside: impl Fn(f64) -> bool) -> Result<f64> {
        let psi = self.psi.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.len(),
        })?;
        let total: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let part: f64 = psi
            .iter()
            .enumerate()
            .filter(|(m, _)| inside(self.grid_s.value(*m)))
            .map(|(_, z)| z.norm_sqr())
            .sum();
        Ok(part / total)
    }
}

/// Schmidt decomposition keeping modes with λ > [`DEFAULT_THRESHOLD`].
pub fn schmidt_decompose(jsa: &JsaMatrix) -> Result<SchmidtSpectrum> {
    schmidt_decompose_with(jsa, DEFAULT_THRESHOLD)
}

pub fn schmidt_decompose_with(jsa: &JsaMatrix, threshold: f64) -> Result<SchmidtSpectrum> {
    if !(threshold >= 0.0) {
        return Err(Error::domain(format!(
            "mode threshold must be >= 0, got {threshold}"
        )));
    }
    let (ns, ni) = (jsa.n_signal(), jsa.n_idler());
    if jsa.frobenius_norm() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    // Remove the global phase first so e^{iθ}B decomposes identically to B.
    let (m0, n0) = jsa.argmax_abs();
    let reference = jsa.get(m0, n0);
    let canonical = reference.conj() / reference.norm();
    let rotated: Vec<Complex64> = jsa.values().iter().map(|v| v * canonical).collect();
    let svd = thin_svd(&rotated, ns, ni)?;
    let restore = canonical.conj();
    let total: f64 = svd.s.iter().map(|s| s * s).sum();
    let (ds, di) = (jsa.grid_s.step().sqrt(), jsa.grid_i.step().sqrt());

    let mut spectrum = SchmidtSpectrum {
        lambdas: Vec::new(),
        psi: Vec::new(),
        phi: Vec::new(),
        grid_s: jsa.grid_s,
        grid_i: jsa.grid_i,
        discarded_weight: 0.0,
    };
    for j in 0..svd.rank {
        let lambda = svd.s[j] * svd.s[j] / total;
        if !(lambda > threshold) {
            spectrum.discarded_weight += lambda;
            continue;
        }
        // Make the largest component of ψ_j real and positive.
        let peak = (0..ns)
            .max_by(|&a, &b| svd.u(a, j).norm().total_cmp(&svd.u(b, j).norm()))
            .unwrap_or(0);
        let u_peak = svd.u(peak, j);
        let phase = if u_peak.norm() > 0.0 {
            u_peak.conj() / u_peak.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        spectrum.lambdas.push(lambda);
        spectrum
            .psi
            .push((0..ns).map(|m| svd.u(m, j) * phase / ds).collect());
        let phi_phase = phase.conj() * restore;
        spectrum.phi.push(
            (0..ni)
                .map(|n| svd.v(n, j).conj() * phi_phase / di)
                .collect(),
        );
    }
    Ok(spectrum)
}

/// Discretized reduced density operator of one photon.
///
/// Stored as the kernel matrix `ρ(ω_m, ω_n)·Δω` normalized to unit trace,
/// so its eigenvalues are the Schmidt weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity {
    pub dim: usize,
    pub values: Vec<Complex64>,
}

impl ReducedDensity {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.values, self.dim)
    }
}

/// ρ_S = B·B† or ρ_I = Bᵀ·B*, normalized to unit trace. `side` must be
/// the signal or the idler.
pub fn reduced_density(jsa: &JsaMatrix, side: Polarization) -> Result<ReducedDensity> {
    let (ns, ni) = (jsa.n_signal(), jsa.n_idler());
    let (dim, inner) = match side {
        Polarization::Signal => (ns, ni),
        Polarization::Idler => (ni, ns),
        Polarization::Pump => {
            return Err(Error::domain(
                "reduced density is defined for signal or idler only",
            ))
        }
    };
    let b = |outer: usize, k: usize| match side {
        Polarization::Signal => jsa.get(outer, k),
        _ => jsa.get(k, outer),
    };
    let mut values = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let v: Complex64 = (0..inner).map(|k| b(i, k) * b(j, k).conj()).sum();
            values[i * dim + j] = v;
            values[j * dim + i] = v.conj();
        }
    }
    let trace: f64 = (0..dim).map(|i| values[i * dim + i].re).sum();
    if trace == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    values.iter_mut().for_each(|v| *v /= trace);
    Ok(ReducedDensity { dim, values })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementMetrics {
    /// Entropy of entanglement in bits.
    pub entropy: f64,
    pub purity: f64,
    pub cooperativity: f64,
}

impl EntanglementMetrics {
    /// S = −Σλ log₂λ (with 0·log 0 = 0), p = Σλ², K = 1/p.
    ///
    /// p and K are each within two ulps of their defining values and are
    /// chosen so that `purity * cooperativity` evaluates to exactly 1.
    pub fn from_lambdas(lambdas: &[f64]) -> Self {
        let entropy: f64 = lambdas
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l * -l.log2())
            .sum();
        let purity: f64 = lambdas.iter().map(|l| l * l).sum();
        // Rounding can leave p·(1/p) one ulp off 1; nudge within a few ulps.
        let (purity, cooperativity) = exact_reciprocal_pair(purity);
        Self {
            entropy,
            purity,
            cooperativity,
        }
    }
}

/// (p', K) with p' within 2 ulps of p, K within 2 ulps of 1/p', and
/// p'·K == 1 in floating point when such a pair exists nearby.
fn exact_reciprocal_pair(p: f64) -> (f64, f64) {
    if !(p > 0.0) || !p.is_finite() {
        return (p, 1.0 / p);
    }
    let nudge = |x: f64, steps: i32| {
        let mut y = x;
        for _ in 0..steps.abs() {
            y = if steps > 0 {
                y.next_up()
            } else {
                y.next_down()
            };
        }
        y
    };
    for dp in [0, -1, 1, -2, 2] {
        let pp = nudge(p, dp);
        let k0 = 1.0 / pp;
        for dk in [0, -1, 1, -2, 2] {
            let k = nudge(k0, dk);
            if pp * k == 1.0 {
                return (pp, k);
            }
        }
    }
    (p, 1.0 / p)
}

pub fn metrics(spectrum: &SchmidtSpectrum) -> EntanglementMetrics {
    EntanglementMetrics::from_lambdas(&spectrum.lambdas)
}

/// Times `t0 + k·Δt`, k = 0..N, with Δt = 2π/(N·Δω): the grid conjugate
/// to `grid` under the discrete Fourier transform.
pub fn conjugate_time_grid(grid: &FrequencyGrid, t0: f64) -> Vec<f64> {
    let n = grid.len();
    let dt = 2.0 * std::f64::consts::PI / (n as f64 * grid.step());
    (0..n).map(|k| t0 + k as f64 * dt).collect()
}

/// v(t) = (2π)^{−1/2} Σ_m ψ(ω_m) e^{−iω_m t} Δω. On the conjugate time grid
/// this is unitary: Σ|v|²Δt = Σ|ψ|²Δω.
pub fn synthesize(psi: &[Complex64], grid: &FrequencyGrid, times: &[f64]) -> Vec<Complex64> {
    let dw = grid.step();
    let norm = dw / (2.0 * std::f64::consts::PI).sqrt();
    let omegas = grid.values();
    times
        .iter()
        .map(|&t| {
            // Carrier phase factored out so the inner sum stays well scaled.
            let carrier = Complex64::from_polar(1.0, -omegas[0] * t);
            let step = Complex64::from_polar(1.0, -dw * t);
            let mut rot = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, z) in psi.iter().enumerate() {
                if m % 64 == 0 {
                    rot = Complex64::from_polar(1.0, -(omegas[m] - omegas[0]) * t);
                }
                acc += z * rot;
                rot *= step;
            }
            carrier * acc * norm
        })
        .collect()
}

/// Temporal wave packet of signal mode `index` at x = 0, normalized so
/// Σ|v|²Δt = 1 on the given uniform time grid.
pub fn temporal_mode(
    spectrum: &SchmidtSpectrum,
    index: usize,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    let psi = spectrum.psi.get(index).ok_or(Error::IndexOutOfRange {
        index,
        len: spectrum.len(),
    })?;
    if times.len() < 2 {
        return Err(Error::domain("time grid needs at least 2 points"));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::domain("time grid must be ascending"));
    }
    let mut v = synthesize(psi, &spectrum.grid_s, times);
    let energy: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt;
    if energy == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let scale = energy.sqrt().recip();
    v.iter_mut().for_each(|z| *z *= scale);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outer(psi: &[Complex64], phi: &[Complex64]) -> JsaMatrix {
        let gs = FrequencyGrid::new(1.0, 2.0, psi.len()).unwrap();
        let gi = FrequencyGrid::new(3.0, 5.0, phi.len()).unwrap();
        let v = psi
            .iter()
            .flat_map(|a| phi.iter().map(move |b| a * b))
            .collect();
        JsaMatrix::from_values(gs, gi, v).unwrap()
    }

    #[test]
    fn rank_one_gives_single_mode() {
        let psi: Vec<Complex64> = (0..6)
            .map(|k| Complex64::new(k as f64 + 1.0, 0.5 * k as f64))
            .collect();
        let phi: Vec<Complex64> = (0..4).map(|k| Complex64::new(0.3, -(k as f64))).collect();
        let sp = schmidt_decompose(&outer(&psi, &phi)).unwrap();
        assert_eq!(sp.len(), 1);
        assert!((sp.lambdas[0] - 1.0).abs() < 1e-14);
        let m = metrics(&sp);
        assert_eq!(m.entropy, 0.0);
        let rho = reduced_density(&outer(&psi, &phi), Polarization::Signal).unwrap();
        assert!((rho.trace() - 1.0).norm() < 1e-14);
        let ev = rho.eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-13 && ev[1].abs() < 1e-13);
    }

    #[test]
    fn phase_convention() {
        let psi: Vec<Complex64> = (0..5)
            .map(|k| Complex64::from_polar(1.0 + k as f64, 0.7 * k as f64))
            .collect();
        let phi: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(1.0, -(k as f64)))
            .collect();
        let sp = schmidt_decompose(&outer(&psi, &phi)).unwrap();
        let peak = sp.psi[0][4];
        assert!(peak.im == 0.0 && peak.re > 0.0);
        let dw = sp.grid_s.step();
        let norm: f64 = sp.psi[0].iter().map(|z| z.norm_sqr()).sum::<f64>() * dw;
        assert!((norm - 1.0).abs() < 1e-13);
    }

    #[test]
    fn metric_examples() {
        let m = EntanglementMetrics::from_lambdas(&[1.0]);
        assert_eq!((m.entropy, m.purity, m.cooperativity), (0.0, 1.0, 1.0));
        let m = EntanglementMetrics::from_lambdas(&[0.5, 0.5]);
        assert_eq!(m.entropy, 1.0);
        assert_eq!(m.cooperativity, 2.0);
        let m = EntanglementMetrics::from_lambdas(&[0.951, 0.0196, 0.0196, 0.0044, 0.0044]);
        assert!((m.purity - 0.9052).abs() < 1e-3);
        assert!((m.cooperativity - 1.105).abs() < 1e-3);
        assert!((m.entropy - 0.360).abs() < 1e-3);
        assert_eq!(m.purity * m.cooperativity, 1.0);
    }

    #[test]
    fn reciprocal_pair_is_exact() {
        let mut x = 0.123987654321f64;
        for _ in 0..100_000 {
            // Deterministic sweep of purities in (0, 1].
            x = (x * 997.0 + 0.123456789).fract();
            let p = x.max(1e-6);
            let (pp, k) = exact_reciprocal_pair(p);
            assert_eq!(pp * k, 1.0, "p = {p:e}");
            assert!((pp - p).abs() <= 4.0 * f64::EPSILON * p);
        }
    }

    #[test]
    fn zero_matrix_rejected() {
        let g = FrequencyGrid::new(1.0, 2.0, 2).unwrap();
        let z = JsaMatrix::from_values(g, g, vec![Complex64::new(0.0, 0.0); 4]).unwrap();
        assert!(matches!(schmidt_decompose(&z), Err(Error::ZeroMatrix)));
        assert!(reduced_density(&z, Polarization::Pump).is_err());
    }

    #[test]
    fn spike_gives_flat_envelope() {
        let grid = FrequencyGrid::new(100.0, 110.0, 11).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); 11];
        psi[4] = Complex64::new(1.0, 0.0);
        let times = conjugate_time_grid(&grid, 0.0);
        let v = synthesize(&psi, &grid, &times);
        let wc = grid.value(4);
        for (t, z) in times.iter().zip(&v) {
            assert!((z.norm() - v[0].norm()).abs() < 1e-14);
            let expected = Complex64::from_polar(1.0, -wc * t) * v[0];
            assert!((z - expected).norm() < 1e-12, "{t}");
        }
    }
}
