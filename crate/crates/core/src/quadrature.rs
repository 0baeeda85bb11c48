//! Composite Gauss–Legendre quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a composite rule on [a, b] with `panels` equal
/// panels of an `order`-point Gauss–Legendre rule each.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
    pub order: usize,
    /// Left end of the interval.
    pub start: f64,
    /// Panel width.
    pub width: f64,
    /// Node offsets from the panel midpoint, shared by every panel.
    pub offsets: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        assert!(panels >= 1);
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Self {
            nodes,
            weights,
            panels,
            order,
            start: a,
            width: h,
            offsets: x.iter().map(|xi| 0.5 * h * xi).collect(),
        }
    }

    /// Panel count giving at least `points_per_period` nodes per period of
    /// an oscillation with angular rate `max_rate` over [a, b].
    pub fn panels_for(length: f64, max_rate: f64, points_per_period: f64, order: usize) -> usize {
        let periods = length * max_rate / (2.0 * PI);
        ((periods * points_per_period / order as f64).ceil() as usize).max(1)
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Σ_j e^{i·rate·x_j}·g_j for samples `g` already multiplied by the
    /// weights, together with Σ_j |g_j|. The phase is advanced panel by
    /// panel and re-seeded periodically to bound rounding drift.
    pub fn oscillatory_sum(&self, rate: f64, g: &[Complex64]) -> (Complex64, f64) {
        const RESEED: usize = 32;
        let local: Vec<Complex64> = self
            .offsets
            .iter()
            .map(|&o| Complex64::from_polar(1.0, rate * o))
            .collect();
        let step = Complex64::from_polar(1.0, rate * self.width);
        let mut mid = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut l1 = 0.0;
        for (p, chunk) in g.chunks_exact(self.order).enumerate() {
            if p % RESEED == 0 {
                mid =
                    Complex64::from_polar(1.0, rate * (self.start + self.width * (p as f64 + 0.5)));
            }
            let mut panel = Complex64::new(0.0, 0.0);
            for (z, e) in chunk.iter().zip(&local) {
                panel += z * e;
                l1 += z.norm();
            }
            acc += mid * panel;
            mid *= step;
        }
        (acc, l1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
