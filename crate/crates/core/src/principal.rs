//! Real-principal-type decomposition `p~ p = q 1`, the characteristic set and
//! the literal kernel of the principal symbol.

use crate::error::{Error, Result};
use crate::linalg::{nullspace, CVector};
use crate::phase_space::PhaseSpacePoint;
use crate::symbol::{MatrixPoly, MatrixSymbol, Variable};

pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;
/// Below this the evaluated matrix is treated as identically zero.
pub const MACHINE_FLOOR: f64 = 1e-300;

/// A verified factorization `p_tilde * p = q * 1_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalTypeDecomposition {
    p: MatrixSymbol,
    p_tilde: MatrixSymbol,
    q: MatrixSymbol,
}

impl PrincipalTypeDecomposition {
    pub fn p(&self) -> &MatrixSymbol {
        &self.p
    }

    pub fn p_tilde(&self) -> &MatrixSymbol {
        &self.p_tilde
    }

    pub fn q(&self) -> &MatrixSymbol {
        &self.q
    }

    /// `p_tilde * p - q * 1` as a polynomial; zero for every accepted decomposition.
    pub fn defect(&self) -> MatrixPoly {
        let n = self.p.dim();
        let prod = self.p_tilde.principal().mul(self.p.principal()).expect("checked dims");
        let q1 = MatrixPoly::scalar_times_identity(self.q.principal(), n).expect("scalar q");
        prod.sub(&q1).expect("same dims")
    }
}

/// Recognizes `p = q * 1` (then `p_tilde = 1`), otherwise verifies `hint`
/// by exact polynomial multiplication.
pub fn decompose_principal_type(p: &MatrixSymbol, hint: Option<&MatrixSymbol>) -> Result<PrincipalTypeDecomposition> {
    let n = p.dim();
    let homogeneous = p.check_homogeneity();
    if !homogeneous.holds {
        return Err(Error::NoDecomposition("principal part is not homogeneous in k".into()));
    }

    let (p_tilde, product) = match hint {
        None => match p.principal().as_scalar_identity() {
            Some(_) => {
                let id = MatrixSymbol::new(0, MatrixPoly::identity(n), MatrixPoly::zero(n))?;
                (id, p.principal().clone())
            }
            None => {
                return Err(Error::NoDecomposition(
                    "p is not a scalar multiple of the identity and no p~ was supplied".into(),
                ))
            }
        },
        Some(h) => {
            if h.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "hint is {0}x{0}, p is {1}x{1}",
                    h.dim(),
                    n
                )));
            }
            if !h.check_homogeneity().holds {
                return Err(Error::NoDecomposition("p~ is not homogeneous in k".into()));
            }
            (h.clone(), h.principal().mul(p.principal())?)
        }
    };

    let q_poly = product
        .as_scalar_identity()
        .ok_or_else(|| Error::NoDecomposition("p~ p is not a scalar multiple of the identity".into()))?;
    if q_poly.is_zero() {
        return Err(Error::NoDecomposition("p~ p vanishes identically".into()));
    }
    let q = MatrixSymbol::new(p_tilde.order() + p.order(), q_poly, MatrixPoly::zero(1))?;
    Ok(PrincipalTypeDecomposition {
        p: p.clone(),
        p_tilde,
        q,
    })
}

/// Scale against which `|q|` is judged: the no-cancellation magnitude of the
/// polynomial at `pt`, plus the machine floor.
pub fn symbol_scale(poly: &MatrixPoly, pt: &PhaseSpacePoint) -> f64 {
    poly.magnitude_scale(&pt.x.0, &pt.k.0) + MACHINE_FLOOR
}

/// True iff `|q(pt)| <= tol * scale(q, pt)`.
pub fn char_membership(d: &PrincipalTypeDecomposition, pt: &PhaseSpacePoint, tol: f64) -> bool {
    let q = d.q().principal();
    let v = q.eval_scalar(&pt.x.0, &pt.k.0);
    v.norm() <= tol * symbol_scale(q, pt)
}

/// Whether `q` is of real principal type at `pt`: off the characteristic set
/// this holds trivially; on it, `dq/dk` must not vanish, which rules out both
/// a vanishing and a radial Hamilton field.
pub fn is_real_principal_type(q: &MatrixSymbol, pt: &PhaseSpacePoint, tol: f64) -> Result<bool> {
    let poly = q.principal();
    poly.require_scalar()?;
    if pt.k.is_zero() {
        return Err(Error::ZeroCovector);
    }
    let scale = symbol_scale(poly, pt);
    let v = poly.eval_scalar(&pt.x.0, &pt.k.0);
    if v.im.abs() > tol * scale {
        return Err(Error::ComplexSymbol { re: v.re, im: v.im });
    }
    if v.norm() > tol * scale {
        return Ok(true);
    }
    let mut grad_sq = 0.0;
    let mut grad_scale = 0.0;
    for mu in 0..4 {
        let d = poly.derivative(Variable::K(mu));
        grad_sq += d.eval_scalar(&pt.x.0, &pt.k.0).norm_sqr();
        grad_scale += symbol_scale(&d, pt);
    }
    Ok(grad_sq.sqrt() > tol * grad_scale)
}

/// Orthonormal basis of the numerical kernel of `p(x, k)`.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub pt: PhaseSpacePoint,
    pub vectors: Vec<CVector>,
    pub singular_values: Vec<f64>,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Singular directions with `sigma_i <= tol * max(sigma_max, scale(p, pt))` span
/// the kernel. The symbol scale keeps the rule consistent with
/// [`char_membership`] when the whole matrix is at rounding level.
pub fn kernel_basis(p: &MatrixSymbol, pt: &PhaseSpacePoint, tol: f64) -> KernelBasis {
    let m = p.principal().eval(pt);
    let scale = symbol_scale(p.principal(), pt);
    let (probe, sigma) = nullspace(&m, f64::INFINITY);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let threshold = if smax <= MACHINE_FLOOR {
        f64::INFINITY
    } else {
        tol * smax.max(scale)
    };
    let vectors = sigma
        .iter()
        .zip(probe)
        .filter(|(s, _)| **s <= threshold)
        .map(|(_, v)| v)
        .collect();
    KernelBasis {
        pt: *pt,
        vectors,
        singular_values: sigma,
    }
}

/// `|p(pt) w| / (scale(p, pt) |w|)`: how far `w` is from the kernel, relative
/// to the size of the symbol.
pub fn kernel_residual(p: &MatrixSymbol, pt: &PhaseSpacePoint, w: &CVector) -> f64 {
    let nw = w.norm();
    if nw == 0.0 {
        return 0.0;
    }
    let m = p.principal().eval(pt);
    (m * w).norm() / (symbol_scale(p.principal(), pt) * nw)
}
