//! Polarization algebra of free Maxwell modes in Lorenz gauge.
//!
//! Polarization vectors are covectors `eps_mu` stored with lower indices,
//! like wave covectors. All pairings here are bilinear; Hermitian overlaps
//! live in [`crate::linalg`].

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, orthonormal_span, CVector};
use crate::phase_space::{WaveCovector, MINKOWSKI};

pub type CVec4 = [Complex64; 4];

/// Relative tolerance for `k^2 = 0`.
pub const NULL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn real4(v: [f64; 4]) -> CVec4 {
    v.map(|x| Complex64::new(x, 0.0))
}

fn require_null(k: &WaveCovector) -> Result<()> {
    if !k.is_finite() {
        return Err(Error::NonFinite("wave covector".into()));
    }
    let scale = k.0.iter().map(|c| c * c).sum::<f64>();
    if scale == 0.0 {
        return Err(Error::ZeroCovector);
    }
    if k.square().abs() > NULL_TOL * scale {
        return Err(Error::NotNull(k.square()));
    }
    Ok(())
}

fn require_spatial(k: &WaveCovector) -> Result<()> {
    if k.spatial_norm() == 0.0 {
        return Err(Error::NullSpatialPart);
    }
    require_null(k)
}

/// `sum eta^{mu nu} a_mu b_nu`, without conjugation.
pub fn minkowski_pairing(a: &CVec4, b: &CVec4) -> Complex64 {
    (0..4).map(|mu| a[mu] * b[mu] * MINKOWSKI.component(mu)).sum()
}

/// Rotation taking `z` to `dir` (unit), minimal except for `dir = -z`, where a
/// half turn about `x` is used.
pub fn rotation_to(dir: [f64; 3]) -> Matrix3<f64> {
    let d = Vector3::from(dir);
    let v = Vector3::z().cross(&d);
    let c = d.z;
    let s2 = v.norm_squared();
    if s2 == 0.0 {
        return if c > 0.0 {
            Matrix3::identity()
        } else {
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))
        };
    }
    let vx = Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0);
    // 1/(1+c) loses precision near c = -1; (1-c)/|v|^2 is the same quantity
    let f = if c >= 0.0 { 1.0 / (1.0 + c) } else { (1.0 - c) / s2 };
    Matrix3::identity() + vx + vx * vx * f
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationBasis {
    pub k: WaveCovector,
    pub eps: [CVec4; 4],
}

impl PolarizationBasis {
    /// Wraps arbitrary vectors, e.g. to probe the completeness check.
    pub fn from_vectors(k: WaveCovector, eps: [CVec4; 4]) -> Self {
        PolarizationBasis { k, eps }
    }

    /// `eps(l) . eps(l')` for all pairs.
    pub fn pairing_matrix(&self) -> [[Complex64; 4]; 4] {
        std::array::from_fn(|a| std::array::from_fn(|b| minkowski_pairing(&self.eps[a], &self.eps[b])))
    }
}

/// Canonical basis rotated so that `lambda = 3` points along the wave vector.
pub fn standard_basis(k: WaveCovector) -> Result<PolarizationBasis> {
    require_spatial(&k)?;
    let w = k.wave_vector();
    let n = k.spatial_norm();
    let r = rotation_to([w[0] / n, w[1] / n, w[2] / n]);
    let mut eps = [real4([1.0, 0.0, 0.0, 0.0]); 4];
    for (lambda, e) in eps.iter_mut().enumerate().skip(1) {
        let col = r.column(lambda - 1);
        *e = real4([0.0, col[0], col[1], col[2]]);
    }
    Ok(PolarizationBasis { k, eps })
}

/// Max-norm of `sum_{l l'} eps_mu(l) eps_nu(l') eta_{l l'} - eta_{mu nu}`.
pub fn completeness_residual(b: &PolarizationBasis) -> f64 {
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let sum: Complex64 = (0..4)
                .map(|l| b.eps[l][mu] * b.eps[l][nu] * MINKOWSKI.component(l))
                .sum();
            let eta = if mu == nu { MINKOWSKI.component(mu) } else { 0.0 };
            worst = worst.max((sum - eta).norm());
        }
    }
    worst
}

/// One plane-wave component `a eps_mu e^{-i k.x}` of the potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMode {
    pub k: WaveCovector,
    pub eps: CVec4,
    pub amplitude: Complex64,
}

impl FourierMode {
    pub fn new(k: WaveCovector, eps: CVec4, amplitude: Complex64) -> Result<Self> {
        require_null(&k)?;
        if eps
            .iter()
            .chain(std::iter::once(&amplitude))
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("polarization".into()));
        }
        Ok(FourierMode { k, eps, amplitude })
    }

    fn k_complex(&self) -> CVec4 {
        real4(self.k.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeFunction {
    pub chi_hat: Complex64,
}

/// `k^mu eps_mu`.
pub fn lorenz_residual(m: &FourierMode) -> Complex64 {
    minkowski_pairing(&m.k_complex(), &m.eps)
}

/// `eps' = eps + i k chi`.
pub fn gauge_transform(m: &FourierMode, g: GaugeFunction) -> FourierMode {
    let k = m.k_complex();
    FourierMode {
        eps: std::array::from_fn(|mu| m.eps[mu] + I * k[mu] * g.chi_hat),
        ..*m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiationFix {
    pub mode: FourierMode,
    pub gauge: GaugeFunction,
    /// Lorenz residual of the result; gauge transforms cannot remove it.
    pub lorenz_residual: Complex64,
}

/// Picks the gauge function that removes the time component.
pub fn radiation_fix(m: &FourierMode) -> Result<RadiationFix> {
    let k0 = m.k.0[0];
    if k0 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let gauge = GaugeFunction {
        chi_hat: I * m.eps[0] / k0,
    };
    let mut mode = gauge_transform(m, gauge);
    mode.eps[0] = ZERO;
    Ok(RadiationFix {
        mode,
        gauge,
        lorenz_residual: lorenz_residual(&mode),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolarizationStyle {
    Linear,
    Circular,
}

impl std::str::FromStr for PolarizationStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PolarizationStyle::Linear),
            "circular" => Ok(PolarizationStyle::Circular),
            other => Err(Error::InvalidSymbol(format!("unknown polarization style `{other}`"))),
        }
    }
}

/// The two transverse states; circular ones are `(eps1 +- i eps2)/sqrt 2`.
pub fn physical_polarizations(k: WaveCovector, style: PolarizationStyle) -> Result<[CVec4; 2]> {
    let b = standard_basis(k)?;
    let (e1, e2) = (b.eps[1], b.eps[2]);
    Ok(match style {
        PolarizationStyle::Linear => [e1, e2],
        PolarizationStyle::Circular => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [
                std::array::from_fn(|mu| (e1[mu] + I * e2[mu]) * s),
                std::array::from_fn(|mu| (e1[mu] - I * e2[mu]) * s),
            ]
        }
    })
}

/// Orthonormal basis of the Lorenz-admissible polarizations modulo pure
/// gauge, represented with `eps_0 = 0`.
pub fn physical_kernel(k: WaveCovector) -> Result<Vec<CVector>> {
    require_spatial(&k)?;
    let up = k.raised();
    let row = DMatrix::from_fn(1, 4, |_, mu| Complex64::new(up[mu], 0.0));
    let scale = up.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (lorenz, _) = nullspace(&row, 1e-10 * scale);
    let kv = CVector::from_fn(4, |mu, _| Complex64::new(k.0[mu], 0.0));
    let shifted: Vec<CVector> = lorenz.iter().map(|v| v - &kv * (v[0] / k.0[0])).collect();
    Ok(orthonormal_span(&shifted, 1e-10))
}

/// `eps = transverse + pure_gauge k + constraint_violation n` with
/// `n = (k0, -k1, -k2, -k3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeClassification {
    pub transverse: CVec4,
    pub pure_gauge: Complex64,
    pub constraint_violation: Complex64,
}

impl ModeClassification {
    pub fn transverse_norm(&self) -> f64 {
        self.transverse.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Coarse label for reports: the component that dominates, with `tol`
    /// deciding what counts as absent.
    pub fn label(&self, tol: f64) -> &'static str {
        let t = self.transverse_norm() > tol;
        let g = self.pure_gauge.norm() > tol;
        let v = self.constraint_violation.norm() > tol;
        match (t, g, v) {
            (_, _, true) => "constraint-violating",
            (true, false, false) => "transverse",
            (false, true, false) => "pure-gauge",
            (true, true, false) => "transverse+gauge",
            (false, false, false) => "zero",
        }
    }
}

pub fn classify_mode(m: &FourierMode) -> Result<ModeClassification> {
    require_spatial(&m.k)?;
    let k = m.k.0;
    let n = [k[0], -k[1], -k[2], -k[3]];
    let beta = lorenz_residual(m) / (2.0 * k[0] * k[0]);
    let alpha = m.eps[0] / k[0] - beta;
    let mut transverse: CVec4 = std::array::from_fn(|mu| m.eps[mu] - alpha * k[mu] - beta * n[mu]);
    transverse[0] = ZERO;
    Ok(ModeClassification {
        transverse,
        pure_gauge: alpha,
        constraint_violation: beta,
    })
}

/// `F_{mu nu} = i (k_mu eps_nu - k_nu eps_mu)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldStrengthMode {
    pub f: [[Complex64; 4]; 4],
}

impl FieldStrengthMode {
    pub fn max_abs(&self) -> f64 {
        self.f.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn field_strength_mode(m: &FourierMode) -> FieldStrengthMode {
    let k = m.k.0;
    FieldStrengthMode {
        f: std::array::from_fn(|mu| std::array::from_fn(|nu| I * (k[mu] * m.eps[nu] - k[nu] * m.eps[mu]))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kz() -> WaveCovector {
        WaveCovector::new(1.0, 0.0, 0.0, -1.0)
    }

    fn mode(k: WaveCovector, eps: [f64; 4]) -> FourierMode {
        FourierMode::new(k, real4(eps), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn canonical_basis_along_z() {
        let b = standard_basis(kz()).unwrap();
        for (l, e) in b.eps.iter().enumerate() {
            let mut unit = [0.0; 4];
            unit[l] = 1.0;
            assert_eq!(*e, real4(unit));
        }
        assert_eq!(completeness_residual(&b), 0.0);
    }

    #[test]
    fn basis_along_x() {
        let b = standard_basis(WaveCovector::new(1.0, -1.0, 0.0, 0.0)).unwrap();
        assert!((b.eps[3][1].re - 1.0).abs() < 1e-15);
        assert!(b.eps[3][2].norm() < 1e-15 && b.eps[3][3].norm() < 1e-15);
        for l in [1, 2] {
            assert!(b.eps[l][1].norm() < 1e-15);
        }
        let p = b.pairing_matrix();
        for (a, row) in p.iter().enumerate() {
            for (bb, z) in row.iter().enumerate() {
                let eta = if a == bb { MINKOWSKI.component(a) } else { 0.0 };
                assert!((z - eta).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn antipodal_direction() {
        let b = standard_basis(WaveCovector::new(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(b.eps[3], real4([0.0, 0.0, 0.0, -1.0]));
        assert_eq!(completeness_residual(&b), 0.0);
        assert!(matches!(
            standard_basis(WaveCovector::new(1.0, 0.0, 0.0, 0.0)),
            Err(Error::NullSpatialPart)
        ));
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(
            minkowski_pairing(&real4([1.0, 0.0, 0.0, 0.0]), &real4([1.0, 0.0, 0.0, 0.0])),
            c(1.0, 0.0)
        );
        assert_eq!(
            minkowski_pairing(&real4([0.0, 1.0, 0.0, 0.0]), &real4([0.0, 1.0, 0.0, 0.0])),
            c(-1.0, 0.0)
        );
        let k = real4([5.0, 3.0, 4.0, 0.0]);
        assert_eq!(minkowski_pairing(&k, &k), c(0.0, 0.0));
    }

    #[test]
    fn doubled_vector_breaks_completeness() {
        let mut b = standard_basis(kz()).unwrap();
        b.eps[1] = b.eps[1].map(|z| z * 2.0);
        assert_eq!(completeness_residual(&b), 3.0);
    }

    #[test]
    fn lorenz_examples() {
        assert_eq!(lorenz_residual(&mode(kz(), [0.0, 1.0, 0.0, 0.0])), c(0.0, 0.0));
        assert_eq!(lorenz_residual(&mode(kz(), [0.0, 0.0, 0.0, 1.0])), c(1.0, 0.0));
        assert_eq!(lorenz_residual(&mode(kz(), [1.0, 0.0, 0.0, 0.0])), c(1.0, 0.0));
    }

    #[test]
    fn gauge_and_radiation_examples() {
        let m = mode(kz(), [1.0, 1.0, 0.0, -1.0]);
        assert_eq!(gauge_transform(&m, GaugeFunction { chi_hat: ZERO }), m);
        let g = gauge_transform(&m, GaugeFunction { chi_hat: I });
        assert_eq!(g.eps, real4([0.0, 1.0, 0.0, 0.0]));

        let fix = radiation_fix(&m).unwrap();
        assert_eq!(fix.gauge.chi_hat, I);
        assert_eq!(fix.mode.eps, real4([0.0, 1.0, 0.0, 0.0]));
        assert_eq!(fix.lorenz_residual, ZERO);

        let t = mode(kz(), [0.0, 1.0, 0.0, 0.0]);
        let same = radiation_fix(&t).unwrap();
        assert_eq!(same.gauge.chi_hat, ZERO);
        assert_eq!(same.mode, t);

        let bad = radiation_fix(&mode(kz(), [1.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(bad.mode.eps, real4([0.0, 1.0, 0.0, 1.0]));
        assert_eq!(bad.lorenz_residual, c(1.0, 0.0));
    }

    #[test]
    fn polarization_examples() {
        let lin = physical_polarizations(kz(), PolarizationStyle::Linear).unwrap();
        assert_eq!(lin, [real4([0.0, 1.0, 0.0, 0.0]), real4([0.0, 0.0, 1.0, 0.0])]);
        let circ = physical_polarizations(kz(), PolarizationStyle::Circular).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(circ[0], [ZERO, c(s, 0.0), c(0.0, s), ZERO]);
        assert_eq!(circ[1], [ZERO, c(s, 0.0), c(0.0, -s), ZERO]);
        let k = WaveCovector::new(5.0, 3.0, 4.0, 0.0);
        for e in physical_polarizations(k, PolarizationStyle::Linear).unwrap() {
            let m = FourierMode::new(k, e, c(1.0, 0.0)).unwrap();
            assert!(lorenz_residual(&m).norm() < 1e-12 && e[0].norm() < 1e-12);
        }
    }

    #[test]
    fn physical_kernel_along_z() {
        let ker = physical_kernel(kz()).unwrap();
        assert_eq!(ker.len(), 2);
        let analytic: Vec<CVector> = physical_polarizations(kz(), PolarizationStyle::Linear)
            .unwrap()
            .iter()
            .map(|e| CVector::from_row_slice(e))
            .collect();
        let angles = crate::linalg::principal_angles(&ker, &analytic);
        assert!(angles.iter().all(|a| *a < 1e-12), "{angles:?}");
    }

    #[test]
    fn classification_examples() {
        let t = classify_mode(&mode(kz(), [0.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!((t.pure_gauge, t.constraint_violation), (ZERO, ZERO));
        assert_eq!(t.label(1e-12), "transverse");

        let g = classify_mode(&mode(kz(), kz().0)).unwrap();
        assert_eq!(g.pure_gauge, c(1.0, 0.0));
        assert_eq!(g.constraint_violation, ZERO);
        assert_eq!(g.transverse_norm(), 0.0);
        assert_eq!(g.label(1e-12), "pure-gauge");

        let v = classify_mode(&mode(kz(), [1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v.constraint_violation, c(0.5, 0.0));
        assert_eq!(v.label(1e-12), "constraint-violating");
    }

    #[test]
    fn field_strength_examples() {
        let m = mode(kz(), [0.0, 1.0, 0.0, 0.0]);
        let f = field_strength_mode(&m);
        assert_eq!(f.f[0][1], I);
        assert_eq!(f.f[3][1], -I);
        assert_eq!(f.f[1][0], -I);
        let g = gauge_transform(&m, GaugeFunction { chi_hat: c(0.3, -1.2) });
        let fg = field_strength_mode(&g);
        for mu in 0..4 {
            for nu in 0..4 {
                assert!((fg.f[mu][nu] - f.f[mu][nu]).norm() < 1e-15);
            }
        }
        assert_eq!(field_strength_mode(&mode(kz(), [2.0, 0.0, 0.0, -2.0])).max_abs(), 0.0);
    }

    #[test]
    fn zero_frequency_rejected() {
        let m = FourierMode {
            k: WaveCovector::new(0.0, 0.0, 0.0, 0.0),
            eps: [ZERO; 4],
            amplitude: ZERO,
        };
        assert!(matches!(radiation_fix(&m), Err(Error::ZeroFrequency)));
    }
}
