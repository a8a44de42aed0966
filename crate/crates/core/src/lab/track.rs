use super::grid::GridField;
use super::synth::energy_centroid;
use crate::error::{Error, Result};
use crate::geometry::{fit_line, fit_linear_motion};

#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub times: Vec<f64>,
    pub trajectory: Vec<[f64; 3]>,
    /// Largest perpendicular distance of a centroid from the fitted line.
    pub line_residual: f64,
    pub speed: f64,
    /// Unit direction of the fitted velocity.
    pub direction: [f64; 3],
}

/// Follows the `|A|^2`-weighted centroid through the time slices of `field`.
pub fn straightness_track(field: &GridField) -> Result<Track> {
    let grid = field.grid();
    if grid.slices < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: grid.slices,
        });
    }
    let mut trajectory = Vec::with_capacity(grid.slices);
    for s in 0..grid.slices {
        let (c, _) = energy_centroid(field, s).ok_or(Error::DegenerateField(s))?;
        trajectory.push(c);
    }
    let times = grid.times();
    let line = fit_line(&trajectory).expect("nonempty trajectory");
    let (_, v) = fit_linear_motion(&times, &trajectory).expect("distinct slice times");
    let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let direction = if speed > 0.0 { v.map(|c| c / speed) } else { [0.0; 3] };
    Ok(Track {
        times,
        trajectory,
        line_residual: line.max_deviation,
        speed,
        direction,
    })
}
