use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform ascending angular-frequency grid, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
}

impl FrequencyGrid {
    /// Band around the 800 nm carrier, {2.3552, 2.3572}×10¹⁵ rad/s.
    pub const DEFAULT_BAND: (f64, f64) = (2.3552e15, 2.3572e15);

    pub fn new(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::domain(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(omega_min > 0.0) || !omega_max.is_finite() || !(omega_max > omega_min) {
            return Err(Error::domain(format!(
                "grid band must satisfy 0 < min < max, got [{omega_min}, {omega_max}]"
            )));
        }
        Ok(Self {
            omega_min,
            omega_max,
            n_points,
        })
    }

    pub fn default_band(n_points: usize) -> Result<Self> {
        Self::new(Self::DEFAULT_BAND.0, Self::DEFAULT_BAND.1, n_points)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            return self.omega_max;
        }
        self.omega_min + (self.omega_max - self.omega_min) * (i as f64 / (self.n_points - 1) as f64)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.value(i)).collect()
    }

    /// Index of the grid point nearest to `omega` (clamped to the grid).
    pub fn nearest_index(&self, omega: f64) -> usize {
        let t = ((omega - self.omega_min) / self.step()).round();
        t.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.omega_min + self.omega_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_spacing() {
        let g = FrequencyGrid::default_band(297).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 297);
        assert_eq!(v[0], 2.3552e15);
        assert_eq!(v[296], 2.3572e15);
        let h = g.step();
        for w in v.windows(2) {
            assert!(((w[1] - w[0]) - h).abs() < 1e-6 * h);
        }
        assert_eq!(g.nearest_index(g.centre()), 148);
        assert_eq!(g.nearest_index(0.0), 0);
    }

    #[test]
    fn refinements_share_band() {
        for n in [297, 595, 1191] {
            let g = FrequencyGrid::default_band(n).unwrap();
            assert_eq!(g.value(0), FrequencyGrid::DEFAULT_BAND.0);
            assert_eq!(g.value(n - 1), FrequencyGrid::DEFAULT_BAND.1);
            assert!((g.step() * (n - 1) as f64 - 2e12).abs() < 1e-3);
        }
    }

    #[test]
    fn invalid() {
        assert!(FrequencyGrid::new(1.0, 2.0, 1).is_err());
        assert!(FrequencyGrid::new(2.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 10).is_err());
    }
}
