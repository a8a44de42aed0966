use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{GridField, GridSpec};
use crate::error::{Error, Result};
use crate::gauge::CVec4;
use crate::phase_space::SpacetimePoint;

/// Forward 3D transform over a row-major grid, one 1D pass per axis.
pub struct Fft3 {
    dims: [usize; 3],
    plans: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            dims,
            plans: dims.map(|n| planner.plan_fft_forward(n)),
        }
    }

    pub fn process(&self, buf: &mut [Complex64]) {
        let [n0, n1, n2] = self.dims;
        debug_assert_eq!(buf.len(), n0 * n1 * n2);
        self.plans[2].process(buf);
        let mut line = vec![Complex64::new(0.0, 0.0); n0.max(n1)];
        for i in 0..n0 {
            for l in 0..n2 {
                let base = i * n1 * n2 + l;
                for j in 0..n1 {
                    line[j] = buf[base + j * n2];
                }
                self.plans[1].process(&mut line[..n1]);
                for j in 0..n1 {
                    buf[base + j * n2] = line[j];
                }
            }
        }
        let stride = n1 * n2;
        for jl in 0..stride {
            for i in 0..n0 {
                line[i] = buf[jl + i * stride];
            }
            self.plans[0].process(&mut line[..n0]);
            for i in 0..n0 {
                buf[jl + i * stride] = line[i];
            }
        }
    }
}

/// Signed frequency index of FFT bin `j` out of `n`.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Gaussian window `exp(-|x - c|^2 / (2 w^2))` placed on one time slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub slice: usize,
    pub center: SpacetimePoint,
    pub width: f64,
    factors: [Vec<f64>; 3],
    weight: f64,
}

impl Window {
    /// The window must sit at a slice time and keep `2w` clear of every face.
    pub fn new(grid: &GridSpec, center: SpacetimePoint, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "window width {width} must be positive"
            )));
        }
        if !center.is_finite() {
            return Err(Error::NonFinite("window center".into()));
        }
        let slice = grid
            .slice_at(center.t())
            .ok_or_else(|| Error::WindowOutOfBounds(format!("no time slice at t = {}", center.t())))?;
        let c = center.spatial();
        for a in 0..3 {
            let lo = grid.origin[a] + 2.0 * width;
            let hi = grid.origin[a] + grid.extent[a] - 2.0 * width;
            if !(c[a] >= lo && c[a] <= hi) {
                return Err(Error::WindowOutOfBounds(format!(
                    "center {} on axis {} outside [{lo}, {hi}]",
                    c[a],
                    a + 1
                )));
            }
        }
        let inv = 1.0 / (2.0 * width * width);
        let factors: [Vec<f64>; 3] = std::array::from_fn(|a| {
            grid.axis_coordinates(a)
                .iter()
                .map(|x| (-(x - c[a]).powi(2) * inv).exp())
                .collect()
        });
        let weight = factors.iter().map(|f| f.iter().sum::<f64>()).product();
        Ok(Window {
            slice,
            center,
            width,
            factors,
            weight,
        })
    }
}

/// Normalized windowed transform `sum_x A(x) w(x) e^{-i kappa.x} / sum_x w(x)`
/// of one scalar component. A plane wave of amplitude `a` sitting on a bin
/// maps to `a` at that bin.
pub fn windowed_component(fft: &Fft3, grid: &GridSpec, samples: &[Complex64], window: &Window) -> Vec<Complex64> {
    let [n0, n1, n2] = grid.samples;
    let f = &window.factors;
    let mut buf = Vec::with_capacity(grid.points());
    for i in 0..n0 {
        for j in 0..n1 {
            let wij = f[0][i] * f[1][j];
            let row = &samples[(i * n1 + j) * n2..(i * n1 + j + 1) * n2];
            buf.extend(row.iter().zip(&f[2]).map(|(z, w)| z * (wij * w)));
        }
    }
    fft.process(&mut buf);
    // grid points start at the origin, not at zero
    let phase: [Vec<Complex64>; 3] = std::array::from_fn(|a| {
        (0..grid.samples[a])
            .map(|j| {
                let kappa = bin_frequency(grid, a, j);
                Complex64::from_polar(1.0 / window.weight.cbrt(), -kappa * grid.origin[a])
            })
            .collect()
    });
    for i in 0..n0 {
        for j in 0..n1 {
            let pij = phase[0][i] * phase[1][j];
            let row = &mut buf[(i * n1 + j) * n2..(i * n1 + j + 1) * n2];
            for (z, p) in row.iter_mut().zip(&phase[2]) {
                *z *= pij * p;
            }
        }
    }
    buf
}

fn bin_frequency(grid: &GridSpec, axis: usize, j: usize) -> f64 {
    2.0 * PI * signed_index(j, grid.samples[axis]) as f64 / grid.extent[axis]
}

/// Four-component windowed spectrum on one slice.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedSpectrum {
    pub grid: GridSpec,
    pub center: SpacetimePoint,
    pub slice: usize,
    pub bins: Vec<CVec4>,
}

impl WindowedSpectrum {
    pub fn dims(&self) -> [usize; 3] {
        self.grid.samples
    }

    pub fn bin_index(&self, flat: usize) -> [usize; 3] {
        let [_, n1, n2] = self.grid.samples;
        [flat / (n1 * n2), (flat / n2) % n1, flat % n2]
    }

    /// Angular spatial frequency of a bin.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.bin_index(flat);
        std::array::from_fn(|a| bin_frequency(&self.grid, a, idx[a]))
    }

    /// Largest component modulus at a bin.
    pub fn magnitude(&self, flat: usize) -> f64 {
        linf(&self.bins[flat])
    }

    pub fn energy(&self) -> f64 {
        self.bins
            .iter()
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Flat indices of the periodic `3^3` neighbourhood of a bin, itself included.
    pub fn neighbourhood(&self, flat: usize) -> Vec<usize> {
        let dims = self.grid.samples;
        let idx = self.bin_index(flat);
        let mut out = Vec::with_capacity(27);
        for d0 in [-1i64, 0, 1] {
            for d1 in [-1i64, 0, 1] {
                for d2 in [-1i64, 0, 1] {
                    let w = |a: usize, d: i64| (idx[a] as i64 + d).rem_euclid(dims[a] as i64) as usize;
                    let n = self.grid.index([w(0, d0), w(1, d1), w(2, d2)]);
                    if !out.contains(&n) {
                        out.push(n);
                    }
                }
            }
        }
        out
    }

    /// Share of spectral energy inside the neighbourhood of `flat`.
    pub fn energy_fraction_near(&self, flat: usize) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let near: f64 = self
            .neighbourhood(flat)
            .iter()
            .map(|&n| self.bins[n].iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        near / total
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.bins.len() {
            if self.magnitude(i) > self.magnitude(best) {
                best = i;
            }
        }
        best
    }

    /// Bins that dominate their neighbourhood; equal magnitudes go to the
    /// lower flat index.
    pub fn local_maxima(&self, floor: f64) -> Vec<usize> {
        let mags: Vec<f64> = (0..self.bins.len()).map(|i| self.magnitude(i)).collect();
        peaks_of(&mags, &self.grid, floor)
    }
}

pub(crate) fn linf(v: &CVec4) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn peaks_of(mags: &[f64], grid: &GridSpec, floor: f64) -> Vec<usize> {
    let dims = grid.samples;
    let mut out = Vec::new();
    for (flat, &m) in mags.iter().enumerate() {
        if !(m > 0.0 && m >= floor) {
            continue;
        }
        let idx = [flat / (dims[1] * dims[2]), (flat / dims[2]) % dims[1], flat % dims[2]];
        let mut is_peak = true;
        'scan: for d0 in [-1i64, 0, 1] {
            for d1 in [-1i64, 0, 1] {
                for d2 in [-1i64, 0, 1] {
                    let w = |a: usize, d: i64| (idx[a] as i64 + d).rem_euclid(dims[a] as i64) as usize;
                    let n = grid.index([w(0, d0), w(1, d1), w(2, d2)]);
                    if n == flat {
                        continue;
                    }
                    if mags[n] > m || (mags[n] == m && n < flat) {
                        is_peak = false;
                        break 'scan;
                    }
                }
            }
        }
        if is_peak {
            out.push(flat);
        }
    }
    out
}

pub fn windowed_spectrum(field: &GridField, center: SpacetimePoint, window_width: f64) -> Result<WindowedSpectrum> {
    let grid = field.grid();
    let window = Window::new(grid, center, window_width)?;
    let fft = Fft3::new(grid.samples);
    Ok(spectrum_with(&fft, field, &window))
}

pub(crate) fn spectrum_with(fft: &Fft3, field: &GridField, window: &Window) -> WindowedSpectrum {
    let grid = field.grid();
    let comps: Vec<Vec<Complex64>> = (0..4)
        .map(|mu| windowed_component(fft, grid, field.component(window.slice, mu), window))
        .collect();
    let bins = (0..grid.points())
        .map(|i| std::array::from_fn(|mu| comps[mu][i]))
        .collect();
    WindowedSpectrum {
        grid: grid.clone(),
        center: window.center,
        slice: window.slice,
        bins,
    }
}
