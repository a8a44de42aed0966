//! Least-squares line fits used by the straightness checks.

use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct LineFit {
    pub centroid: Vec<f64>,
    /// Unit direction of the best-fit line (principal axis).
    pub direction: Vec<f64>,
    /// Largest perpendicular distance of any point from the line.
    pub max_deviation: f64,
}

/// Total-least-squares line through `points` (all of the same dimension).
/// Returns `None` for an empty set.
pub fn fit_line<const D: usize>(points: &[[f64; D]]) -> Option<LineFit> {
    if points.is_empty() {
        return None;
    }
    let n = points.len();
    let centroid: Vec<f64> = (0..D)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n.max(D), D, |i, j| if i < n { points[i][j] - centroid[j] } else { 0.0 });
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (best, _) =
        svd.singular_values.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc },
        );
    let direction: Vec<f64> = v_t.row(best).iter().copied().collect();
    let max_deviation = points
        .iter()
        .map(|p| {
            let d: Vec<f64> = (0..D).map(|j| p[j] - centroid[j]).collect();
            let along: f64 = d.iter().zip(&direction).map(|(a, b)| a * b).sum();
            d.iter()
                .zip(&direction)
                .map(|(a, b)| (a - along * b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    Some(LineFit {
        centroid,
        direction,
        max_deviation,
    })
}

/// Ordinary least squares `p(t) = a + b t`, per component. Returns `(a, b)`.
pub fn fit_linear_motion<const D: usize>(times: &[f64], points: &[[f64; D]]) -> Option<([f64; D], [f64; D])> {
    let n = times.len();
    if n < 2 || n != points.len() {
        return None;
    }
    let tm = times.iter().sum::<f64>() / n as f64;
    let stt: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    if stt == 0.0 {
        return None;
    }
    let mut a = [0.0; D];
    let mut b = [0.0; D];
    for j in 0..D {
        let pm = points.iter().map(|p| p[j]).sum::<f64>() / n as f64;
        let stp: f64 = times.iter().zip(points).map(|(t, p)| (t - tm) * (p[j] - pm)).sum();
        b[j] = stp / stt;
        a[j] = pm - b[j] * tm;
    }
    Some((a, b))
}
