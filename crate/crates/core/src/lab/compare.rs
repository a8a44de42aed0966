use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::estimate::PolarizationEstimate;
use crate::error::{Error, Result};
use crate::gauge::{minkowski_pairing, standard_basis, CVec4};
use crate::linalg::hermitian_overlap;
use crate::phase_space::{WaveCovector, MINKOWSKI};
use crate::transport::HamiltonOrbit;

/// Floor applied to amplitudes before taking decibels.
pub const DB_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Spacetime distance from the orbit, length units.
    pub position: f64,
    pub angle_deg: f64,
    pub overlap: f64,
    /// Upper bound on the time-like and longitudinal content, in dB.
    pub suppression_db: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            position: 1.0,
            angle_deg: 3.0,
            overlap: 0.99,
            suppression_db: -20.0,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = self.position > 0.0 && self.angle_deg > 0.0 && self.overlap > 0.0 && self.overlap <= 1.0;
        if !ok || !self.suppression_db.is_finite() {
            return Err(Error::InvalidParameter(
                "tolerances must be positive and overlap at most 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareEntry {
    pub index: usize,
    pub distance: f64,
    pub angle_deg: f64,
    pub overlap: f64,
    pub timelike_db: f64,
    pub longitudinal_db: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub tolerances: Tolerances,
    pub entries: Vec<CompareEntry>,
    pub passed: bool,
}

pub fn decibels(ratio: f64) -> f64 {
    20.0 * ratio.max(DB_FLOOR).log10()
}

/// Time-like and longitudinal content of `w` in the standard basis at `k`, in dB
/// relative to the Hermitian norm of `w`.
pub fn suppression(k: WaveCovector, w: &CVec4) -> Result<(f64, f64)> {
    let basis = standard_basis(k)?;
    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok((decibels(0.0), decibels(0.0)));
    }
    let coeff = |l: usize| (minkowski_pairing(&basis.eps[l], w) * MINKOWSKI.component(l)).norm() / norm;
    Ok((decibels(coeff(0)), decibels(coeff(3))))
}

fn angle_deg(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let na = a.iter().map(|c| c * c).sum::<f64>().sqrt();
    let nb = b.iter().map(|c| c * c).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 180.0;
    }
    let cos = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = cross.iter().map(|c| c * c).sum::<f64>().sqrt() / (na * nb);
    sin.atan2(cos).to_degrees()
}

/// Closest point of the orbit polyline to `p`: distance, segment, fraction.
fn nearest(orbit: &HamiltonOrbit, p: &[f64; 4]) -> (f64, usize, f64) {
    let s = orbit.ray().samples();
    let dist = |a: &[f64; 4]| a.iter().zip(p).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut best = (dist(&s[0].x.0), 0, 0.0);
    for i in 0..s.len().saturating_sub(1) {
        let (a, b) = (&s[i].x.0, &s[i + 1].x.0);
        let d: [f64; 4] = std::array::from_fn(|m| b[m] - a[m]);
        let dd: f64 = d.iter().map(|c| c * c).sum();
        let f = if dd > 0.0 {
            ((0..4).map(|m| (p[m] - a[m]) * d[m]).sum::<f64>() / dd).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q: [f64; 4] = std::array::from_fn(|m| a[m] + f * d[m]);
        let dq = dist(&q);
        if dq < best.0 {
            best = (dq, i, f);
        }
    }
    best
}

/// Checks estimates against the orbit they should lie on.
pub fn compare(estimates: &[PolarizationEstimate], orbit: &HamiltonOrbit, tol: Tolerances) -> Result<CompareReport> {
    if orbit.is_empty() {
        return Err(Error::EmptyOrbit);
    }
    if orbit.fiber_dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "orbit fibers have {} components, need 4",
            orbit.fiber_dim()
        )));
    }
    let samples = orbit.ray().samples();
    let mut entries = Vec::with_capacity(estimates.len());
    for (index, e) in estimates.iter().enumerate() {
        let (distance, i, f) = nearest(orbit, &e.x.0);
        let j = (i + 1).min(samples.len() - 1);
        let k = WaveCovector(std::array::from_fn(|m| {
            samples[i].k.0[m] * (1.0 - f) + samples[j].k.0[m] * f
        }));
        let w: CVec4 = std::array::from_fn(|m| {
            orbit.omega()[i][m] * Complex64::new(1.0 - f, 0.0) + orbit.omega()[j][m] * Complex64::new(f, 0.0)
        });
        let angle = angle_deg(&e.k_hat, &k.wave_vector());
        let overlap = hermitian_overlap(&e.omega_hat, &w);
        let (timelike_db, longitudinal_db) = suppression(k, &e.omega_hat)?;
        let pass = distance <= tol.position
            && angle <= tol.angle_deg
            && overlap >= tol.overlap
            && timelike_db <= tol.suppression_db
            && longitudinal_db <= tol.suppression_db;
        entries.push(CompareEntry {
            index,
            distance,
            angle_deg: angle,
            overlap,
            timelike_db,
            longitudinal_db,
            pass,
        });
    }
    let passed = entries.iter().all(|e| e.pass);
    Ok(CompareReport {
        tolerances: tol,
        entries,
        passed,
    })
}
