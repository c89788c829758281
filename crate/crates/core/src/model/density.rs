use crate::error::{Error, Result};

/// Piecewise-constant probability density on `[edges[0], edges[k]]`.
///
/// Covers both the uniform descriptor (one bin) and tabulated PDFs. For
/// non-negative supports it also provides the double integral of the
/// survival function, which gives the expectation of the blocked width
/// over random obstacle lengths in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    edges: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
    surv_int: Vec<f64>,
    surv_int2: Vec<f64>,
    mean: f64,
}

/// Allowed deviation of the total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-6;

impl PiecewiseDensity {
    pub fn new(edges: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || density.len() + 1 != edges.len() {
            return Err(Error::invalid("density", "need k+1 edges for k bins"));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "density",
                "edges must be finite and strictly increasing",
            ));
        }
        if density.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("density", "bin densities must be finite and >= 0"));
        }
        let mut cdf = Vec::with_capacity(edges.len());
        cdf.push(0.0);
        for (i, p) in density.iter().enumerate() {
            let prev = cdf[i];
            cdf.push(prev + p * (edges[i + 1] - edges[i]));
        }
        let mass = *cdf.last().unwrap();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid("density", format!("integrates to {mass}, expected 1")));
        }

        // Survival integrals from 0; only meaningful for non-negative supports.
        let e0 = edges[0].max(0.0);
        let mut surv_int = Vec::with_capacity(edges.len());
        let mut surv_int2 = Vec::with_capacity(edges.len());
        surv_int.push(e0);
        surv_int2.push(0.5 * e0 * e0);
        for i in 0..density.len() {
            let t = edges[i + 1] - edges[i];
            let s = 1.0 - cdf[i];
            let p = density[i];
            let i1 = surv_int[i];
            surv_int2.push(surv_int2[i] + i1 * t + 0.5 * s * t * t - p * t * t * t / 6.0);
            surv_int.push(i1 + s * t - 0.5 * p * t * t);
        }
        let mean = density
            .iter()
            .enumerate()
            .map(|(i, p)| p * 0.5 * (edges[i + 1] * edges[i + 1] - edges[i] * edges[i]))
            .sum();
        Ok(Self {
            edges,
            density,
            cdf,
            surv_int,
            surv_int2,
            mean,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid(
                "density",
                format!("uniform needs lo < hi, got ({lo}, {hi})"),
            ));
        }
        Self::new(vec![lo, hi], vec![1.0 / (hi - lo)])
    }

    /// Builds a density from bin edges and unnormalized non-negative weights.
    pub fn from_weights(edges: Vec<f64>, weights: &[f64]) -> Result<Self> {
        if edges.len() != weights.len() + 1 {
            return Err(Error::invalid("density", "need k+1 edges for k weights"));
        }
        let mass: f64 = weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * (edges[i + 1] - edges[i]))
            .sum();
        if !(mass > 0.0) {
            return Err(Error::invalid("density", "weights must have positive mass"));
        }
        Self::new(edges, weights.iter().map(|w| w / mass).collect())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn support(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    pub fn is_uniform(&self) -> bool {
        self.density.len() == 1
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    fn bin(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return None;
        }
        let i = self.edges.partition_point(|&e| e <= x);
        Some(i.saturating_sub(1).min(self.density.len() - 1))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.bin(x).map_or(0.0, |i| self.density[i])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let i = self.bin(x).unwrap();
        self.cdf[i] + self.density[i] * (x - self.edges[i])
    }

    /// Inverse CDF for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.density.len();
        let mut i = self.cdf.partition_point(|&c| c <= u).saturating_sub(1).min(k - 1);
        while i + 1 < k && self.density[i] == 0.0 {
            i += 1;
        }
        if self.density[i] == 0.0 {
            return self.edges[i];
        }
        let x = self.edges[i] + (u - self.cdf[i]) / self.density[i];
        x.clamp(self.edges[i], self.edges[i + 1])
    }

    /// `Ψ(x) = ∫_0^x ∫_0^c P(L > l) dl dc` for `x ≥ 0`.
    pub fn survival_double_integral(&self, x: f64) -> f64 {
        let e0 = self.edges[0].max(0.0);
        if x <= e0 {
            return 0.5 * x * x;
        }
        let last = self.edges.len() - 1;
        if x >= self.edges[last] {
            return self.surv_int2[last] + self.surv_int[last] * (x - self.edges[last]);
        }
        let i = self.bin(x).unwrap();
        let t = x - self.edges[i];
        let s = 1.0 - self.cdf[i];
        let p = self.density[i];
        self.surv_int2[i] + self.surv_int[i] * t + 0.5 * s * t * t - p * t * t * t / 6.0
    }

    /// `Ψ(y) − Ψ(x)`, avoiding cancellation once both lie past the support.
    pub fn survival_double_integral_diff(&self, x: f64, y: f64) -> f64 {
        let end = *self.edges.last().unwrap();
        if x >= end {
            self.mean * (y - x)
        } else if y >= end {
            (self.surv_int2[self.edges.len() - 1] - self.survival_double_integral(x)) + self.mean * (y - end)
        } else {
            self.survival_double_integral(y) - self.survival_double_integral(x)
        }
    }
}
