//! Null bicharacteristics: integral curves of the Hamilton field of `q`
//! started on `q = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::fit_line;
use crate::phase_space::{SpacetimePoint, WaveCovector, MINKOWSKI};
use crate::symbol::{HamiltonField, MatrixSymbol};

/// Sign of `k_0` on the light cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "future" => Ok(Branch::Plus),
            "-" | "minus" | "past" => Ok(Branch::Minus),
            _ => Err(Error::InvalidParameter(format!("unknown branch '{s}'"))),
        }
    }
}

/// Replaces `k_0` by `+-|k_spatial|`.
pub fn null_project(k: WaveCovector, branch: Branch) -> Result<WaveCovector> {
    let norm = k.spatial_norm();
    if norm == 0.0 {
        return Err(Error::ZeroSpatialPart);
    }
    let k0 = match branch {
        Branch::Plus => norm,
        Branch::Minus => -norm,
    };
    Ok(WaveCovector([k0, k.0[1], k.0[2], k.0[3]]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Rk4,
    Adaptive,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::Adaptive => "adaptive",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "adaptive" => Ok(Method::Adaptive),
            _ => Err(Error::InvalidParameter(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub tau: f64,
    pub x: SpacetimePoint,
    pub k: WaveCovector,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorInfo {
    pub method: Method,
    /// Uniform step for rk4, initial step for the adaptive pair.
    pub step: f64,
}

/// Sampled bicharacteristic with `q` recorded at every sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    samples: Vec<RaySample>,
    q_values: Vec<f64>,
    info: IntegratorInfo,
}

impl Ray {
    pub fn from_samples(samples: Vec<RaySample>, q_values: Vec<f64>, info: IntegratorInfo) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        if samples.len() != q_values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples but {} q values",
                samples.len(),
                q_values.len()
            )));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].tau <= w[0].tau) {
            return Err(Error::InvalidParameter(format!(
                "tau not increasing at sample {}",
                i + 1
            )));
        }
        if samples.iter().any(|s| s.k.is_zero()) {
            return Err(Error::ZeroCovector);
        }
        Ok(Ray {
            samples,
            q_values,
            info,
        })
    }

    pub fn samples(&self) -> &[RaySample] {
        &self.samples
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn info(&self) -> IntegratorInfo {
        self.info
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positions(&self) -> Vec<[f64; 4]> {
        self.samples.iter().map(|s| s.x.0).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    /// Start must satisfy `|q| <= null_tol * scale(q)`.
    pub null_tol: f64,
    /// Abort once `|q| > drift_limit * scale(q)` anywhere on the ray.
    pub drift_limit: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            null_tol: 1e-10,
            drift_limit: 1e-6,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

type State = [f64; 8];

fn rhs(field: &HamiltonField, s: &State) -> State {
    let x = [s[0], s[1], s[2], s[3]];
    let k = [s[4], s[5], s[6], s[7]];
    let (dx, dk) = field.eval(&x, &k);
    [dx[0], dx[1], dx[2], dx[3], dk[0], dk[1], dk[2], dk[3]]
}

fn axpy(s: &State, h: f64, d: &State) -> State {
    std::array::from_fn(|i| s[i] + h * d[i])
}

pub(crate) fn rk4_step(field: &HamiltonField, s: &State, h: f64) -> State {
    let k1 = rhs(field, s);
    let k2 = rhs(field, &axpy(s, 0.5 * h, &k1));
    let k3 = rhs(field, &axpy(s, 0.5 * h, &k2));
    let k4 = rhs(field, &axpy(s, h, &k3));
    let mut out = *s;
    let lim = if field.is_x_independent() { 4 } else { 8 };
    // for x-independent q the k equation is dk/dtau = 0 exactly; leave k untouched
    for i in 0..lim {
        out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

// Dormand-Prince 5(4) tableau; the Hamilton field is autonomous so the c_i nodes are unused
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince attempt: 5th-order solution and the embedded error estimate.
fn dp_step(field: &HamiltonField, s: &State, h: f64) -> (State, State) {
    let mut stages = [[0.0; 8]; 7];
    for i in 0..7 {
        let mut y = *s;
        for (j, a) in DP_A[i].iter().enumerate().take(i) {
            if *a != 0.0 {
                for c in 0..8 {
                    y[c] += h * a * stages[j][c];
                }
            }
        }
        stages[i] = rhs(field, &y);
    }
    let mut y5 = *s;
    let mut err = [0.0; 8];
    for c in 0..8 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for i in 0..7 {
            d5 += DP_B5[i] * stages[i][c];
            d4 += DP_B4[i] * stages[i][c];
        }
        y5[c] = s[c] + h * d5;
        err[c] = h * (d5 - d4);
    }
    if field.is_x_independent() {
        y5[4..].copy_from_slice(&s[4..]);
    }
    (y5, err)
}

fn sample_of(tau: f64, s: &State) -> RaySample {
    RaySample {
        tau,
        x: SpacetimePoint([s[0], s[1], s[2], s[3]]),
        k: WaveCovector([s[4], s[5], s[6], s[7]]),
    }
}

/// Traces the bicharacteristic of `q` through `(x0, k0)` over `tau_span`.
pub fn trace_ray(
    q: &MatrixSymbol,
    x0: SpacetimePoint,
    k0: WaveCovector,
    tau_span: (f64, f64),
    step: f64,
    method: Method,
) -> Result<Ray> {
    trace_ray_with(q, x0, k0, tau_span, step, method, &TraceOptions::default())
}

pub fn trace_ray_with(
    q: &MatrixSymbol,
    x0: SpacetimePoint,
    k0: WaveCovector,
    tau_span: (f64, f64),
    step: f64,
    method: Method,
    opts: &TraceOptions,
) -> Result<Ray> {
    let field = HamiltonField::new(q)?;
    let (t0, t1) = tau_span;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidStep(format!("step must be positive, got {step}")));
    }
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(Error::InvalidStep(format!("empty tau span [{t0}, {t1}]")));
    }
    if !x0.is_finite() || !k0.is_finite() {
        return Err(Error::NonFinite("ray start".into()));
    }
    if k0.is_zero() {
        return Err(Error::ZeroCovector);
    }

    let q_at = |s: &State| -> (f64, f64) {
        let x = [s[0], s[1], s[2], s[3]];
        let k = [s[4], s[5], s[6], s[7]];
        (field.q_value(&x, &k).re, field.q_scale(&x, &k))
    };

    let start: State = [x0.0[0], x0.0[1], x0.0[2], x0.0[3], k0.0[0], k0.0[1], k0.0[2], k0.0[3]];
    let (q_start, scale) = q_at(&start);
    if q_start.abs() > opts.null_tol * scale {
        return Err(Error::NonNullStart {
            value: q_start.abs(),
            tol: opts.null_tol * scale,
        });
    }

    let mut samples = vec![sample_of(t0, &start)];
    let mut q_values = vec![q_start];
    let record = |tau: f64, s: &State, samples: &mut Vec<RaySample>, q_values: &mut Vec<f64>| -> Result<()> {
        let (qv, sc) = q_at(s);
        if !qv.is_finite() || qv.abs() > opts.drift_limit * sc {
            return Err(Error::ConstraintDrift { tau, value: qv.abs() });
        }
        if s[4..].iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroCovector);
        }
        samples.push(sample_of(tau, s));
        q_values.push(qv);
        Ok(())
    };

    let len = t1 - t0;
    match method {
        Method::Rk4 => {
            if len > 0.0 {
                let n = ((len / step) - 1e-9).ceil().max(1.0) as usize;
                if n > opts.max_steps {
                    return Err(Error::InvalidStep(format!("{n} steps exceed the limit")));
                }
                let h = len / n as f64;
                let mut s = start;
                for i in 1..=n {
                    s = rk4_step(&field, &s, h);
                    let tau = if i == n { t1 } else { t0 + i as f64 * h };
                    record(tau, &s, &mut samples, &mut q_values)?;
                }
            }
        }
        Method::Adaptive => {
            let mut tau = t0;
            let mut h = step.min(len);
            let mut s = start;
            let mut taken = 0usize;
            while tau < t1 {
                if tau + h > t1 {
                    h = t1 - tau;
                }
                let min_h = 1e-14 * (1.0 + tau.abs());
                if h < min_h {
                    return Err(Error::StepFailure { tau });
                }
                let (y, err) = dp_step(&field, &s, h);
                let ratio = err
                    .iter()
                    .zip(s.iter().zip(y.iter()))
                    .map(|(e, (a, b))| e.abs() / (opts.abs_tol + opts.rel_tol * a.abs().max(b.abs())))
                    .fold(0.0_f64, f64::max);
                if !ratio.is_finite() {
                    h *= 0.1;
                    continue;
                }
                if ratio <= 1.0 {
                    tau = if t1 - (tau + h) <= 1e-15 * (1.0 + t1.abs()) {
                        t1
                    } else {
                        tau + h
                    };
                    s = y;
                    record(tau, &s, &mut samples, &mut q_values)?;
                    taken += 1;
                    if taken > opts.max_steps {
                        return Err(Error::StepFailure { tau });
                    }
                }
                let factor = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            }
        }
    }

    Ray::from_samples(samples, q_values, IntegratorInfo { method, step })
}

/// Largest second-difference estimate of `x''(tau)` over interior samples.
pub fn geodesic_residual(r: &Ray) -> Result<f64> {
    let s = r.samples();
    if s.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: s.len(),
        });
    }
    let h = s[1].tau - s[0].tau;
    for (i, w) in s.windows(2).enumerate() {
        let hi = w[1].tau - w[0].tau;
        if (hi - h).abs() > 1e-9 * h.abs() {
            return Err(Error::NonUniformSpacing(i + 1));
        }
    }
    let mut worst = 0.0_f64;
    for w in s.windows(3) {
        for mu in 0..4 {
            let d = (w[2].x.0[mu] - 2.0 * w[1].x.0[mu] + w[0].x.0[mu]).abs() / (h * h);
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Largest `|1/4 eta_{mu nu} xdot^mu xdot^nu|` along the ray, with `xdot = dq/dk`.
pub fn null_curve_residual(r: &Ray, q: &MatrixSymbol) -> Result<f64> {
    let field = HamiltonField::new(q)?;
    Ok(r.samples()
        .iter()
        .map(|s| {
            let v = field.velocity(&s.x.0, &s.k.0);
            (0.25 * MINKOWSKI.dot(v, v)).abs()
        })
        .fold(0.0, f64::max))
}

/// Largest perpendicular distance of the ray's points from their best-fit line.
pub fn line_deviation(r: &Ray) -> f64 {
    fit_line(&r.positions()).map(|f| f.max_deviation).unwrap_or(0.0)
}

/// Largest `|x(tau)^2|` (Minkowski square of the position).
pub fn light_cone_residual(r: &Ray) -> f64 {
    r.samples()
        .iter()
        .map(|s| MINKOWSKI.dot(s.x.0, s.x.0).abs())
        .fold(0.0, f64::max)
}
