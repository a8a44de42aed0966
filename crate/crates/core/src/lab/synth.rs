use num_complex::Complex64;

use super::grid::{GridField, GridSpec};
use crate::error::{Error, Result};
use crate::gauge::FourierMode;
use crate::phase_space::SpacetimePoint;

/// Single-mode Gaussian wave packet.
#[derive(Clone, Debug, PartialEq)]
pub struct WavePacketSpec {
    pub mode: FourierMode,
    /// Envelope center `(t_c, x_c)`.
    pub center: SpacetimePoint,
    /// Isotropic envelope width in length units.
    pub sigma: f64,
    /// Also add the complex conjugate, making the field real.
    pub conjugate: bool,
}

impl WavePacketSpec {
    pub fn new(mode: FourierMode, center: SpacetimePoint, sigma: f64) -> Self {
        WavePacketSpec {
            mode,
            center,
            sigma,
            conjugate: false,
        }
    }

    pub fn frequency(&self) -> f64 {
        self.mode.k.0[0]
    }

    /// Group velocity `k / omega` (unit length for a null carrier).
    pub fn velocity(&self) -> [f64; 3] {
        let w = self.mode.k.wave_vector();
        let omega = self.frequency();
        w.map(|c| c / omega)
    }

    /// Envelope center at time `t`.
    pub fn center_at(&self, t: f64) -> [f64; 3] {
        let v = self.velocity();
        let c = self.center.spatial();
        std::array::from_fn(|a| c[a] + v[a] * (t - self.center.t()))
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.frequency() == 0.0 {
            return Err(Error::ZeroFrequency);
        }
        if !self.center.is_finite() || !self.sigma.is_finite() {
            return Err(Error::NonFinite("packet".into()));
        }
        let lo = 4.0 * grid.max_spacing();
        let hi = grid.min_extent() / 8.0;
        if !(self.sigma >= lo && self.sigma <= hi) {
            return Err(Error::InvalidParameter(format!(
                "envelope width {} outside [{lo}, {hi}]",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Samples `eps a / sqrt(2|omega|) exp(i(k.x - omega t)) G(x - x_c(t))` in
/// closed form. The envelope is carried rigidly at the group velocity, so
/// the result solves the wave equation only up to `O(1/(sigma omega))`.
pub fn synthesize(spec: &WavePacketSpec, grid: &GridSpec) -> Result<GridField> {
    grid.validate()?;
    spec.validate(grid)?;
    let mut field = GridField::zeros(grid.clone());
    add_packet(&mut field, spec);
    Ok(field)
}

/// Sum of several packets on one grid.
pub fn synthesize_all(specs: &[WavePacketSpec], grid: &GridSpec) -> Result<GridField> {
    grid.validate()?;
    let mut field = GridField::zeros(grid.clone());
    for s in specs {
        s.validate(grid)?;
        add_packet(&mut field, s);
    }
    Ok(field)
}

fn add_packet(field: &mut GridField, spec: &WavePacketSpec) {
    let grid = field.grid().clone();
    let omega = spec.frequency();
    let kv = spec.mode.k.wave_vector();
    let norm = spec.mode.amplitude / (2.0 * omega.abs()).sqrt();
    let inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
    let [n0, n1, n2] = grid.samples;
    for s in 0..grid.slices {
        let t = grid.time(s);
        let c = spec.center_at(t);
        // both the carrier and the envelope factor over the axes
        let axis: Vec<Vec<Complex64>> = (0..3)
            .map(|a| {
                grid.axis_coordinates(a)
                    .iter()
                    .map(|&x| Complex64::from_polar((-(x - c[a]).powi(2) * inv).exp(), kv[a] * x))
                    .collect()
            })
            .collect();
        let time = Complex64::from_polar(1.0, -omega * t) * norm;
        let mut profile = vec![Complex64::new(0.0, 0.0); grid.points()];
        for i in 0..n0 {
            for j in 0..n1 {
                let ij = axis[0][i] * axis[1][j] * time;
                let row = &mut profile[(i * n1 + j) * n2..(i * n1 + j + 1) * n2];
                for (p, z) in row.iter_mut().zip(&axis[2]) {
                    *p = ij * z;
                }
            }
        }
        for mu in 0..4 {
            let e = spec.mode.eps[mu];
            if e == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (a, p) in field.component_mut(s, mu).iter_mut().zip(&profile) {
                let v = e * p;
                *a += v;
                if spec.conjugate {
                    *a += v.conj();
                }
            }
        }
    }
}

/// `|A|^2`-weighted centroid of one slice, `None` when the slice is empty.
pub fn energy_centroid(field: &GridField, slice: usize) -> Option<([f64; 3], f64)> {
    let grid = field.grid();
    let e = field.energy_density(slice);
    let total: f64 = e.iter().sum();
    if !(total > 1e-300) {
        return None;
    }
    let coords: Vec<Vec<f64>> = (0..3).map(|a| grid.axis_coordinates(a)).collect();
    let [n0, n1, n2] = grid.samples;
    let mut m = [0.0; 3];
    for i in 0..n0 {
        for j in 0..n1 {
            for l in 0..n2 {
                let w = e[(i * n1 + j) * n2 + l];
                m[0] += w * coords[0][i];
                m[1] += w * coords[1][j];
                m[2] += w * coords[2][l];
            }
        }
    }
    Some((m.map(|v| v / total), total))
}
