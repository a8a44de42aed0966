use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 8;

/// Periodic spatial grid `x_i = origin + i * extent / samples` with
/// `slices` time levels `t0 + s * dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub extent: [f64; 3],
    pub samples: [usize; 3],
    pub t0: f64,
    pub dt: f64,
    pub slices: usize,
}

impl GridSpec {
    /// Cube of `n^3` unit cells starting at the origin, `slices` levels at `dt`.
    pub fn cube(n: usize, dx: f64, slices: usize, dt: f64) -> Self {
        GridSpec {
            origin: [0.0; 3],
            extent: [n as f64 * dx; 3],
            samples: [n; 3],
            t0: 0.0,
            dt,
            slices,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .origin
            .iter()
            .chain(&self.extent)
            .chain([&self.t0, &self.dt])
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("grid".into()));
        }
        if self.samples.iter().any(|&n| n < MIN_SAMPLES) {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_SAMPLES} samples per axis"
            )));
        }
        if self.extent.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidParameter("extents must be positive".into()));
        }
        if self.slices == 0 {
            return Err(Error::InvalidParameter("need at least one time slice".into()));
        }
        if self.slices > 1 && !(self.dt > 0.0 && self.dt <= self.min_spacing()) {
            return Err(Error::InvalidParameter(format!(
                "time step {} must lie in (0, {}]",
                self.dt,
                self.min_spacing()
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> [f64; 3] {
        std::array::from_fn(|a| self.extent[a] / self.samples[a] as f64)
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing().into_iter().fold(0.0, f64::max)
    }

    pub fn min_extent(&self) -> f64 {
        self.extent.into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn points(&self) -> usize {
        self.samples.iter().product()
    }

    pub fn time(&self, slice: usize) -> f64 {
        self.t0 + slice as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.slices).map(|s| self.time(s)).collect()
    }

    /// Slice whose time matches `t` to rounding.
    pub fn slice_at(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        (0..self.slices).find(|&s| (self.time(s) - t).abs() <= tol)
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing()[axis]
    }

    pub fn axis_coordinates(&self, axis: usize) -> Vec<f64> {
        (0..self.samples[axis]).map(|i| self.coordinate(axis, i)).collect()
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.samples[1] + i[1]) * self.samples[2] + i[2]
    }
}

/// Complex samples of `A_mu`, stored slice-major, then component, then
/// row-major over the spatial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: GridSpec,
    data: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.slices * 4 * grid.points();
        GridField {
            grid,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_data(grid: GridSpec, data: Vec<Complex64>) -> Result<Self> {
        let expected = grid.slices * 4 * grid.points();
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} samples, grid needs {expected}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("field sample".into()));
        }
        Ok(GridField { grid, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn component(&self, slice: usize, mu: usize) -> &[Complex64] {
        let n = self.grid.points();
        let start = (slice * 4 + mu) * n;
        &self.data[start..start + n]
    }

    pub fn component_mut(&mut self, slice: usize, mu: usize) -> &mut [Complex64] {
        let n = self.grid.points();
        let start = (slice * 4 + mu) * n;
        &mut self.data[start..start + n]
    }

    /// Pointwise sum; both fields must share the grid.
    pub fn add(&mut self, other: &GridField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch("fields live on different grids".into()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// `sum_mu |A_mu|^2` at every grid point of a slice.
    pub fn energy_density(&self, slice: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.grid.points()];
        for mu in 0..4 {
            for (acc, z) in e.iter_mut().zip(self.component(slice, mu)) {
                *acc += z.norm_sqr();
            }
        }
        e
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
