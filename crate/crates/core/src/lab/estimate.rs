use serde::{Deserialize, Serialize};

use super::grid::GridField;
use super::spectrum::{linf, peaks_of, spectrum_with, windowed_component, Fft3, Window, WindowedSpectrum};
use crate::error::{Error, Result};
use crate::gauge::CVec4;
use crate::phase_space::SpacetimePoint;

/// Spectral peak seen through one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationEstimate {
    /// Window center.
    pub x: SpacetimePoint,
    /// Unit direction of the peak bin (zero for the constant bin).
    pub k_hat: [f64; 3],
    /// Modulus of the peak bin's angular frequency.
    pub frequency: f64,
    /// Component amplitudes at the peak, unit Hermitian norm, phase fixed so
    /// the largest component is real and positive.
    pub omega_hat: CVec4,
    /// Largest component modulus at the peak.
    pub strength: f64,
    /// Position of the window in the input list.
    pub window: usize,
}

impl PolarizationEstimate {
    pub fn wave_vector(&self) -> [f64; 3] {
        self.k_hat.map(|c| c * self.frequency)
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} must lie in (0, 1)"
        )));
    }
    Ok(())
}

fn windows(field: &GridField, centers: &[SpacetimePoint], width: f64) -> Result<Vec<Window>> {
    centers.iter().map(|c| Window::new(field.grid(), *c, width)).collect()
}

/// Normalizes to unit Hermitian norm, rotating the global phase so the
/// largest component is real positive.
pub fn normalize_polarization(v: &CVec4) -> Option<CVec4> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return None;
    }
    let lead = v
        .iter()
        .enumerate()
        .fold(0, |best, (i, z)| if z.norm() > v[best].norm() { i } else { best });
    let phase = v[lead].conj() / v[lead].norm();
    Some(v.map(|z| z * phase / norm))
}

/// Spectra of all windows, in input order.
pub fn window_spectra(field: &GridField, centers: &[SpacetimePoint], width: f64) -> Result<Vec<WindowedSpectrum>> {
    let ws = windows(field, centers, width)?;
    let fft = Fft3::new(field.grid().samples);
    Ok(ws.iter().map(|w| spectrum_with(&fft, field, w)).collect())
}

/// Peaks whose magnitude reaches `threshold` times the largest magnitude over
/// every window. Results are ordered by window, then by bin.
pub fn estimate_polarization_set(
    field: &GridField,
    centers: &[SpacetimePoint],
    window_width: f64,
    threshold: f64,
) -> Result<Vec<PolarizationEstimate>> {
    check_threshold(threshold)?;
    let spectra = window_spectra(field, centers, window_width)?;
    let global = spectra.iter().flat_map(|s| s.bins.iter().map(linf)).fold(0.0, f64::max);
    if global == 0.0 {
        return Ok(Vec::new());
    }
    let floor = threshold * global;
    let mut out = Vec::new();
    for (w, spec) in spectra.iter().enumerate() {
        for bin in spec.local_maxima(floor) {
            let kappa = spec.frequency(bin);
            let f = kappa.iter().map(|c| c * c).sum::<f64>().sqrt();
            let k_hat = if f > 0.0 { kappa.map(|c| c / f) } else { [0.0; 3] };
            let Some(omega_hat) = normalize_polarization(&spec.bins[bin]) else {
                continue;
            };
            out.push(PolarizationEstimate {
                x: spec.center,
                k_hat,
                frequency: f,
                omega_hat,
                strength: spec.magnitude(bin),
                window: w,
            });
        }
    }
    Ok(out)
}

/// Per-window oscillation flags from each component on its own: a window is
/// flagged when some component's spectrum reaches `threshold` times the
/// largest component modulus seen anywhere.
pub fn scalar_detector(
    field: &GridField,
    centers: &[SpacetimePoint],
    window_width: f64,
    threshold: f64,
) -> Result<Vec<bool>> {
    check_threshold(threshold)?;
    let ws = windows(field, centers, window_width)?;
    let grid = field.grid();
    let fft = Fft3::new(grid.samples);
    // peak[w][mu]: largest local maximum of |S_mu| in window w
    let mut peak = vec![[0.0f64; 4]; ws.len()];
    for (w, win) in ws.iter().enumerate() {
        for mu in 0..4 {
            let s = windowed_component(&fft, grid, field.component(win.slice, mu), win);
            let mags: Vec<f64> = s.iter().map(|z| z.norm()).collect();
            peak[w][mu] = peaks_of(&mags, grid, 0.0).iter().map(|&b| mags[b]).fold(0.0, f64::max);
        }
    }
    let global = peak.iter().flatten().cloned().fold(0.0, f64::max);
    if global == 0.0 {
        return Ok(vec![false; ws.len()]);
    }
    Ok(peak
        .iter()
        .map(|p| p.iter().any(|&m| m >= threshold * global))
        .collect())
}
