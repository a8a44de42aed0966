//! Transport of fiber polarizations along bicharacteristics.
//!
//! Along a ray the connection `H_q + 1/2 {p~, p} + i p~ p^s` acts as
//! `d/dtau + M(x(tau), k(tau))`, so a polarization is carried by the linear
//! ODE `dw/dtau = -M w` on the ray's own tau grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::phase_space::{PhaseSpacePoint, MINKOWSKI};
use crate::principal::{kernel_basis, kernel_residual, PrincipalTypeDecomposition, DEFAULT_KERNEL_TOL};
use crate::ray::Ray;
use crate::symbol::{poisson_bracket_poly, CMatrix, HamiltonField, MatrixPoly};

/// Kernel residual above which transport aborts.
pub const KERNEL_ESCAPE_LIMIT: f64 = 1e-6;
/// Fibers with Euclidean norm at or below this are the zero section.
pub const ZERO_FIBER: f64 = 1e-12;

/// The non-derivative part `M = 1/2 {p~, p} + i p~ p^s` of the connection,
/// kept as a polynomial.
#[derive(Clone, Debug)]
pub struct Connection {
    m: MatrixPoly,
}

impl Connection {
    pub fn new(d: &PrincipalTypeDecomposition) -> Result<Self> {
        let bracket = poisson_bracket_poly(d.p_tilde().principal(), d.p().principal())?;
        let sub = d.p_tilde().principal().mul(&d.p().subprincipal())?;
        let m = bracket
            .scale(Complex64::new(0.5, 0.0))
            .add(&sub.scale(Complex64::new(0.0, 1.0)))?;
        Ok(Connection { m })
    }

    pub fn poly(&self) -> &MatrixPoly {
        &self.m
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn eval_at(&self, x: &[f64; 4], k: &[f64; 4]) -> CMatrix {
        self.m.eval_at(x, k)
    }
}

pub fn connection_matrix(d: &PrincipalTypeDecomposition, pt: &PhaseSpacePoint) -> Result<CMatrix> {
    Ok(Connection::new(d)?.m.eval(pt))
}

/// Bicharacteristic with a fiber vector at every sample.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonOrbit {
    ray: Ray,
    omega: Vec<CVector>,
    reprojected: bool,
}

impl HamiltonOrbit {
    pub fn new(ray: Ray, omega: Vec<CVector>) -> Result<Self> {
        if ray.len() != omega.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ray samples but {} fiber vectors",
                ray.len(),
                omega.len()
            )));
        }
        if let Some(first) = omega.first() {
            if omega.iter().any(|w| w.len() != first.len()) {
                return Err(Error::DimensionMismatch("fiber vectors differ in length".into()));
            }
        }
        Ok(HamiltonOrbit {
            ray,
            omega,
            reprojected: false,
        })
    }

    pub fn from_parts(ray: Ray, omega: Vec<CVector>, reprojected: bool) -> Result<Self> {
        let mut o = Self::new(ray, omega)?;
        o.reprojected = reprojected;
        Ok(o)
    }

    pub fn ray(&self) -> &Ray {
        &self.ray
    }

    pub fn omega(&self) -> &[CVector] {
        &self.omega
    }

    /// Whether kernel reprojection was applied after each step.
    pub fn reprojected(&self) -> bool {
        self.reprojected
    }

    pub fn fiber_dim(&self) -> usize {
        self.omega.first().map(|w| w.len()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// `k^mu w_mu` per sample, for four-component fibers.
    pub fn lorenz_residuals(&self) -> Option<Vec<Complex64>> {
        if self.fiber_dim() != 4 {
            return None;
        }
        Some(
            self.ray
                .samples()
                .iter()
                .zip(&self.omega)
                .map(|(s, w)| lorenz_pairing(&s.k.0, w))
                .collect(),
        )
    }

    pub fn samples(&self) -> Vec<PolarizationSample> {
        self.ray
            .samples()
            .iter()
            .zip(&self.omega)
            .map(|(s, w)| PolarizationSample {
                pt: PhaseSpacePoint { x: s.x, k: s.k },
                omega: w.clone(),
                strength: w.norm(),
            })
            .collect()
    }
}

pub(crate) fn lorenz_pairing(k: &[f64; 4], w: &CVector) -> Complex64 {
    let up = MINKOWSKI.raise(*k);
    (0..4).map(|mu| w[mu] * up[mu]).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportOptions {
    pub kernel_limit: f64,
    /// Project onto the numerical kernel of `p` after every step.
    pub reproject: bool,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            kernel_limit: KERNEL_ESCAPE_LIMIT,
            reproject: false,
        }
    }
}

pub fn transport(d: &PrincipalTypeDecomposition, r: &Ray, omega0: &CVector) -> Result<HamiltonOrbit> {
    transport_with(d, r, omega0, &TransportOptions::default())
}

/// Integrates `dw/dtau = -M w` with classical RK4 on the ray's samples. The
/// ray state at segment midpoints comes from cubic Hermite interpolation
/// using the Hamilton field of `q` at both ends.
pub fn transport_with(
    d: &PrincipalTypeDecomposition,
    r: &Ray,
    omega0: &CVector,
    opts: &TransportOptions,
) -> Result<HamiltonOrbit> {
    let n = d.p().dim();
    if omega0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "fiber vector has {} components, symbol is {n}x{n}",
            omega0.len()
        )));
    }
    if r.is_empty() {
        return Err(Error::EmptyOrbit);
    }
    let conn = Connection::new(d)?;
    let field = HamiltonField::new(d.q())?;
    let samples = r.samples();

    let check = |i: usize, w: &CVector| -> Result<()> {
        let s = &samples[i];
        let pt = PhaseSpacePoint { x: s.x, k: s.k };
        let res = kernel_residual(d.p(), &pt, w);
        if !(res <= opts.kernel_limit) {
            return Err(Error::KernelEscape {
                tau: s.tau,
                residual: res,
                limit: opts.kernel_limit,
            });
        }
        Ok(())
    };
    let reproject = |i: usize, w: CVector| -> CVector {
        let s = &samples[i];
        let pt = PhaseSpacePoint { x: s.x, k: s.k };
        let kb = kernel_basis(d.p(), &pt, DEFAULT_KERNEL_TOL);
        kb.vectors.iter().fold(CVector::zeros(n), |acc, v| acc + v * v.dotc(&w))
    };

    check(0, omega0)?;
    let mut omega = Vec::with_capacity(samples.len());
    omega.push(omega0.clone());
    let mut w = omega0.clone();
    for i in 1..samples.len() {
        if !conn.is_zero() {
            let (a, b) = (&samples[i - 1], &samples[i]);
            let h = b.tau - a.tau;
            let (va, fa) = field.eval(&a.x.0, &a.k.0);
            let (vb, fb) = field.eval(&b.x.0, &b.k.0);
            let mid = |p: &[f64; 4], q: &[f64; 4], dp: &[f64; 4], dq: &[f64; 4]| -> [f64; 4] {
                std::array::from_fn(|mu| 0.5 * (p[mu] + q[mu]) + h / 8.0 * (dp[mu] - dq[mu]))
            };
            let xm = mid(&a.x.0, &b.x.0, &va, &vb);
            let km = mid(&a.k.0, &b.k.0, &fa, &fb);
            let m0 = conn.eval_at(&a.x.0, &a.k.0);
            let mm = conn.eval_at(&xm, &km);
            let m1 = conn.eval_at(&b.x.0, &b.k.0);
            let hc = Complex64::new(h, 0.0);
            let half = Complex64::new(0.5 * h, 0.0);
            let k1 = -(&m0 * &w);
            let k2 = -(&mm * (&w + &k1 * half));
            let k3 = -(&mm * (&w + &k2 * half));
            let k4 = -(&m1 * (&w + &k3 * hc));
            w = &w + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0);
        }
        if opts.reproject {
            w = reproject(i, w);
        }
        check(i, &w)?;
        omega.push(w.clone());
    }
    Ok(HamiltonOrbit {
        ray: r.clone(),
        omega,
        reprojected: opts.reproject,
    })
}

/// Multiplies every fiber vector by `z`.
pub fn fiber_scale(o: &HamiltonOrbit, z: Complex64) -> HamiltonOrbit {
    HamiltonOrbit {
        ray: o.ray.clone(),
        omega: o.omega.iter().map(|w| w * z).collect(),
        reprojected: o.reprojected,
    }
}

/// Point `(x, k; w)` of a polarization set with a detection strength.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationSample {
    pub pt: PhaseSpacePoint,
    pub omega: CVector,
    pub strength: f64,
}

/// Distances below which two base points are the same point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionTolerance {
    pub x: f64,
    pub k: f64,
}

impl Default for ProjectionTolerance {
    fn default() -> Self {
        ProjectionTolerance { x: 1e-9, k: 1e-9 }
    }
}

/// Base points `(x, k)` of the samples with nonzero fiber, deduplicated.
pub fn project_wavefront(samples: &[PolarizationSample]) -> Vec<PhaseSpacePoint> {
    project_wavefront_with(samples, ProjectionTolerance::default())
}

pub fn project_wavefront_with(samples: &[PolarizationSample], tol: ProjectionTolerance) -> Vec<PhaseSpacePoint> {
    let dist = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let mut out: Vec<PhaseSpacePoint> = Vec::new();
    for s in samples.iter().filter(|s| s.omega.norm() > ZERO_FIBER) {
        let dup = out
            .iter()
            .any(|p| dist(&p.x.0, &s.pt.x.0) <= tol.x && dist(&p.k.0, &s.pt.k.0) <= tol.k);
        if !dup {
            out.push(s.pt);
        }
    }
    out
}
