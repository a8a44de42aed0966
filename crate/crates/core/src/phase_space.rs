//! Minkowski metric and points of the cotangent bundle `T*R^4 \ 0`.
//!
//! Covectors are always stored with lower indices. Raising goes through
//! [`Metric`] explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat metric with signature (+, -, -, -).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    diagonal: [f64; 4],
}

pub const MINKOWSKI: Metric = Metric {
    diagonal: [1.0, -1.0, -1.0, -1.0],
};

impl Default for Metric {
    fn default() -> Self {
        MINKOWSKI
    }
}

impl Metric {
    pub fn diagonal(&self) -> [f64; 4] {
        self.diagonal
    }

    /// `eta^{mu mu}` (equal to `eta_{mu mu}` for this diagonal metric).
    pub fn component(&self, mu: usize) -> f64 {
        self.diagonal[mu]
    }

    pub fn raise(&self, k: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|mu| self.diagonal[mu] * k[mu])
    }

    pub fn lower(&self, v: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|mu| self.diagonal[mu] * v[mu])
    }

    /// `eta^{mu nu} a_mu b_nu`
    pub fn dot(&self, a: [f64; 4], b: [f64; 4]) -> f64 {
        (0..4).map(|mu| self.diagonal[mu] * a[mu] * b[mu]).sum()
    }
}

/// Event `(t, x1, x2, x3)` in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint(pub [f64; 4]);

impl SpacetimePoint {
    pub const ORIGIN: SpacetimePoint = SpacetimePoint([0.0; 4]);

    pub fn new(t: f64, x1: f64, x2: f64, x3: f64) -> Self {
        SpacetimePoint([t, x1, x2, x3])
    }

    pub fn t(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

/// Covariant wave covector `k_mu`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveCovector(pub [f64; 4]);

impl WaveCovector {
    pub fn new(k0: f64, k1: f64, k2: f64, k3: f64) -> Self {
        WaveCovector([k0, k1, k2, k3])
    }

    pub fn raised(&self) -> [f64; 4] {
        MINKOWSKI.raise(self.0)
    }

    /// `eta^{mu nu} k_mu k_nu`
    pub fn square(&self) -> f64 {
        MINKOWSKI.dot(self.0, self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        WaveCovector(self.0.map(|c| s * c))
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Contravariant spatial part `(k^1, k^2, k^3)`, the physical wave vector.
    pub fn wave_vector(&self) -> [f64; 3] {
        [-self.0[1], -self.0[2], -self.0[3]]
    }

    pub fn spatial_norm(&self) -> f64 {
        (self.0[1] * self.0[1] + self.0[2] * self.0[2] + self.0[3] * self.0[3]).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

/// Point `(x, k)` of `T*R^4` with `k != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub x: SpacetimePoint,
    pub k: WaveCovector,
}

impl PhaseSpacePoint {
    pub fn new(x: SpacetimePoint, k: WaveCovector) -> Result<Self> {
        if !x.is_finite() || !k.is_finite() {
            return Err(Error::NonFinite("phase-space point".into()));
        }
        if k.is_zero() {
            return Err(Error::ZeroCovector);
        }
        Ok(PhaseSpacePoint { x, k })
    }

    pub fn from_arrays(x: [f64; 4], k: [f64; 4]) -> Result<Self> {
        Self::new(SpacetimePoint(x), WaveCovector(k))
    }

    pub fn with_k(&self, k: WaveCovector) -> Result<Self> {
        Self::new(self.x, k)
    }
}
