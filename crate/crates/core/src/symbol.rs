//! Exact calculus of matrix-valued polynomial symbols in `(x, k)`.
//!
//! A [`MatrixPoly`] is a finite sum of monomials `x^a k^b` with complex `N x N`
//! coefficients. A [`MatrixSymbol`] pairs a principal part (homogeneous of
//! degree `m` in `k`) with a lower-order part holding `p_{m-1}`. Every
//! derivative is taken term by term on the exponents; nothing here is
//! numerical apart from the final evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::PhaseSpacePoint;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Exponents of `x^0..x^3` and `k_0..k_3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub x: [u32; 4],
    pub k: [u32; 4],
}

impl Monomial {
    pub const ONE: Monomial = Monomial { x: [0; 4], k: [0; 4] };

    pub fn new(x: [u32; 4], k: [u32; 4]) -> Self {
        Monomial { x, k }
    }

    pub fn var(v: Variable) -> Self {
        let mut m = Monomial::ONE;
        match v {
            Variable::X(mu) => m.x[mu] = 1,
            Variable::K(mu) => m.k[mu] = 1,
        }
        m
    }

    pub fn k_degree(&self) -> u32 {
        self.k.iter().sum()
    }

    pub fn x_degree(&self) -> u32 {
        self.x.iter().sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial {
            x: std::array::from_fn(|i| self.x[i] + other.x[i]),
            k: std::array::from_fn(|i| self.k[i] + other.k[i]),
        }
    }

    /// Exponent of `v`, and the monomial with that exponent lowered by one.
    fn lowered(&self, v: Variable) -> Option<(u32, Monomial)> {
        let mut out = *self;
        let slot = match v {
            Variable::X(mu) => &mut out.x[mu],
            Variable::K(mu) => &mut out.k[mu],
        };
        if *slot == 0 {
            return None;
        }
        let e = *slot;
        *slot -= 1;
        Some((e, out))
    }

    pub fn eval(&self, x: &[f64; 4], k: &[f64; 4]) -> f64 {
        let mut v = 1.0;
        for mu in 0..4 {
            if self.x[mu] > 0 {
                v *= x[mu].powi(self.x[mu] as i32);
            }
            if self.k[mu] > 0 {
                v *= k[mu].powi(self.k[mu] as i32);
            }
        }
        v
    }
}

/// A coordinate of phase space: `x^mu` or `k_mu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variable {
    X(usize),
    K(usize),
}

/// Which part of a [`MatrixSymbol`] to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Principal,
    Lower,
}

/// Polynomial in `(x, k)` with `N x N` complex matrix coefficients.
///
/// Terms with an all-zero coefficient are never stored, so structural
/// equality is polynomial equality.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPoly {
    dim: usize,
    terms: BTreeMap<Monomial, CMatrix>,
}

impl MatrixPoly {
    pub fn zero(dim: usize) -> Self {
        MatrixPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(coeff: CMatrix) -> Result<Self> {
        Self::monomial(Monomial::ONE, coeff)
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(CMatrix::identity(dim, dim)).expect("square identity")
    }

    pub fn monomial(mono: Monomial, coeff: CMatrix) -> Result<Self> {
        let dim = coeff.nrows();
        let mut p = MatrixPoly::zero(dim);
        p.add_term(mono, coeff)?;
        Ok(p)
    }

    /// Scalar (`N = 1`) monomial `c * x^a k^b`.
    pub fn scalar_monomial(mono: Monomial, c: Complex64) -> Self {
        Self::monomial(mono, CMatrix::from_element(1, 1, c)).expect("1x1")
    }

    pub fn scalar_constant(c: f64) -> Self {
        Self::scalar_monomial(Monomial::ONE, Complex64::new(c, 0.0))
    }

    pub fn variable(v: Variable) -> Self {
        Self::scalar_monomial(Monomial::var(v), Complex64::new(1.0, 0.0))
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Monomial, CMatrix)>) -> Result<Self> {
        let mut p = MatrixPoly::zero(dim);
        for (m, c) in terms {
            p.add_term(m, c)?;
        }
        Ok(p)
    }

    /// `s(x,k) * 1_N` for a scalar polynomial `s`.
    pub fn scalar_times_identity(scalar: &MatrixPoly, dim: usize) -> Result<Self> {
        scalar.require_scalar()?;
        let mut p = MatrixPoly::zero(dim);
        for (m, c) in &scalar.terms {
            p.add_term(*m, CMatrix::identity(dim, dim) * c[(0, 0)])?;
        }
        Ok(p)
    }

    /// Diagonal matrix polynomial built from scalar entries.
    pub fn diagonal(entries: &[MatrixPoly]) -> Result<Self> {
        let dim = entries.len();
        let mut p = MatrixPoly::zero(dim);
        for (i, e) in entries.iter().enumerate() {
            e.require_scalar()?;
            for (m, c) in &e.terms {
                let mut coeff = CMatrix::zeros(dim, dim);
                coeff[(i, i)] = c[(0, 0)];
                p.add_term(*m, coeff)?;
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CMatrix)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn require_scalar(&self) -> Result<()> {
        if self.dim == 1 {
            Ok(())
        } else {
            Err(Error::NotScalar(self.dim))
        }
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: CMatrix) -> Result<()> {
        if coeff.nrows() != self.dim || coeff.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "coefficient is {}x{}, polynomial is {}x{}",
                coeff.nrows(),
                coeff.ncols(),
                self.dim,
                self.dim
            )));
        }
        if coeff.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("symbol coefficient".into()));
        }
        let entry = self
            .terms
            .entry(mono)
            .or_insert_with(|| CMatrix::zeros(coeff.nrows(), coeff.ncols()));
        *entry += coeff;
        if entry.iter().all(|c| *c == ZERO) {
            self.terms.remove(&mono);
        }
        Ok(())
    }

    fn check_dims(&self, other: &MatrixPoly, op: &str) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{op}: {}x{} vs {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatrixPoly) -> Result<MatrixPoly> {
        self.check_dims(other, "add")?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MatrixPoly) -> Result<MatrixPoly> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> MatrixPoly {
        let mut out = MatrixPoly::zero(self.dim);
        for (m, c) in &self.terms {
            out.add_term(*m, c * s).expect("same shape");
        }
        out
    }

    /// Matrix product `self * other`, left-to-right.
    pub fn mul(&self, other: &MatrixPoly) -> Result<MatrixPoly> {
        self.check_dims(other, "mul")?;
        let mut out = MatrixPoly::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.times(mb), ca * cb)?;
            }
        }
        Ok(out)
    }

    pub fn derivative(&self, v: Variable) -> MatrixPoly {
        let mut out = MatrixPoly::zero(self.dim);
        for (m, c) in &self.terms {
            if let Some((e, lowered)) = m.lowered(v) {
                out.add_term(lowered, c * Complex64::new(e as f64, 0.0))
                    .expect("same shape");
            }
        }
        out
    }

    pub fn eval(&self, pt: &PhaseSpacePoint) -> CMatrix {
        self.eval_at(&pt.x.0, &pt.k.0)
    }

    pub fn eval_at(&self, x: &[f64; 4], k: &[f64; 4]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (m, c) in &self.terms {
            let v = m.eval(x, k);
            out.zip_apply(c, |o, ci| *o += ci * v);
        }
        out
    }

    /// Allocation-free evaluation of a scalar polynomial.
    pub fn eval_scalar(&self, x: &[f64; 4], k: &[f64; 4]) -> Complex64 {
        debug_assert_eq!(self.dim, 1);
        self.terms
            .iter()
            .fold(ZERO, |acc, (m, c)| acc + c[(0, 0)] * m.eval(x, k))
    }

    /// Magnitude bound `sum |c|_max * |x^a k^b|`, the size the polynomial would
    /// have without cancellation between terms. Homogeneous of the same degree
    /// in `k` as the polynomial and nonzero on the light cone for `k^2`.
    pub fn magnitude_scale(&self, x: &[f64; 4], k: &[f64; 4]) -> f64 {
        let ax = x.map(f64::abs);
        let ak = k.map(f64::abs);
        self.terms
            .iter()
            .map(|(m, c)| c.iter().map(|z| z.norm()).fold(0.0, f64::max) * m.eval(&ax, &ak))
            .sum()
    }

    pub fn k_degrees(&self) -> BTreeSet<u32> {
        self.terms.keys().map(Monomial::k_degree).collect()
    }

    pub fn is_x_independent(&self) -> bool {
        self.terms.keys().all(|m| m.x_degree() == 0)
    }

    /// If every coefficient is a multiple of the identity, the scalar
    /// polynomial `s` with `self = s * 1_N`.
    pub fn as_scalar_identity(&self) -> Option<MatrixPoly> {
        let n = self.dim;
        let mut s = MatrixPoly::zero(1);
        for (m, c) in &self.terms {
            let d = c[(0, 0)];
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { d } else { ZERO };
                    if c[(i, j)] != expect {
                        return None;
                    }
                }
            }
            s.add_term(*m, CMatrix::from_element(1, 1, d)).ok()?;
        }
        Some(s)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.iter().all(|z| z.im == 0.0))
    }
}

impl fmt::Display for MatrixPoly {
    /// Renders scalar polynomials as `c*x3^2*k0 + ...`; matrices print per term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(m, _)| {
            (
                m.x_degree() + m.k_degree(),
                std::cmp::Reverse(m.x),
                std::cmp::Reverse(m.k),
            )
        });
        let mut first = true;
        for (m, c) in ordered {
            let mut factors = Vec::new();
            for (name, exps) in [("x", &m.x), ("k", &m.k)] {
                for (mu, &e) in exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(format!("{name}{mu}")),
                        _ => factors.push(format!("{name}{mu}^{e}")),
                    }
                }
            }
            let coeff = if self.dim == 1 {
                let z = c[(0, 0)];
                if z.im == 0.0 {
                    let (sign, mag) = if z.re < 0.0 { ("-", -z.re) } else { ("+", z.re) };
                    if first {
                        if sign == "-" {
                            write!(f, "-")?;
                        }
                    } else {
                        write!(f, " {sign} ")?;
                    }
                    if mag == 1.0 && !factors.is_empty() {
                        String::new()
                    } else {
                        format!("{mag}")
                    }
                } else {
                    if !first {
                        write!(f, " + ")?;
                    }
                    format!("({}{:+}i)", z.re, z.im)
                }
            } else {
                if !first {
                    write!(f, " + ")?;
                }
                let entries: Vec<String> = c.transpose().iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
                format!("[{}]", entries.join(", "))
            };
            first = false;
            match (coeff.is_empty(), factors.is_empty()) {
                (true, _) => write!(f, "{}", factors.join("*"))?,
                (false, true) => write!(f, "{coeff}")?,
                (false, false) => write!(f, "{coeff}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

/// Result of the structural homogeneity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Homogeneity {
    pub holds: bool,
    pub degree: Option<u32>,
}

/// Classical symbol truncated to `p + p_{m-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSymbol {
    order: i32,
    principal: MatrixPoly,
    lower: MatrixPoly,
}

impl MatrixSymbol {
    /// Builds a symbol whose principal part is homogeneous of degree `order`.
    pub fn new(order: i32, principal: MatrixPoly, lower: MatrixPoly) -> Result<Self> {
        let sym = Self::from_parts(order, principal, lower)?;
        if let Some(bad) = sym
            .principal
            .k_degrees()
            .into_iter()
            .find(|&d| d as i64 != order as i64)
        {
            return Err(Error::InvalidSymbol(format!(
                "principal term of k-degree {bad} in a symbol of order {order}"
            )));
        }
        Ok(sym)
    }

    /// Like [`MatrixSymbol::new`] but without the homogeneity requirement, so
    /// that [`check_homogeneity`] can diagnose arbitrary input.
    pub fn from_parts(order: i32, principal: MatrixPoly, lower: MatrixPoly) -> Result<Self> {
        if principal.dim() != lower.dim() {
            return Err(Error::DimensionMismatch(format!(
                "principal part is {0}x{0}, lower part is {1}x{1}",
                principal.dim(),
                lower.dim()
            )));
        }
        if principal.dim() == 0 {
            return Err(Error::InvalidSymbol("dimension must be positive".into()));
        }
        Ok(MatrixSymbol {
            order,
            principal,
            lower,
        })
    }

    /// Principal part only, order inferred from the terms (0 for the zero polynomial).
    pub fn principal_only(principal: MatrixPoly) -> Result<Self> {
        let order = principal.k_degrees().into_iter().next().unwrap_or(0) as i32;
        let dim = principal.dim();
        Self::new(order, principal, MatrixPoly::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.principal.dim()
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn principal(&self) -> &MatrixPoly {
        &self.principal
    }

    pub fn lower(&self) -> &MatrixPoly {
        &self.lower
    }

    pub fn part(&self, part: Part) -> &MatrixPoly {
        match part {
            Part::Principal => &self.principal,
            Part::Lower => &self.lower,
        }
    }

    pub fn eval(&self, part: Part, pt: &PhaseSpacePoint) -> CMatrix {
        self.part(part).eval(pt)
    }

    pub fn differentiate(&self, v: Variable) -> MatrixSymbol {
        let order = match v {
            Variable::X(_) => self.order,
            Variable::K(_) => self.order - 1,
        };
        MatrixSymbol {
            order,
            principal: self.principal.derivative(v),
            lower: self.lower.derivative(v),
        }
    }

    pub fn check_homogeneity(&self) -> Homogeneity {
        let degrees = self.principal.k_degrees();
        match degrees.len() {
            0 => Homogeneity {
                holds: true,
                degree: u32::try_from(self.order).ok(),
            },
            1 => Homogeneity {
                holds: true,
                degree: degrees.into_iter().next(),
            },
            _ => Homogeneity {
                holds: false,
                degree: None,
            },
        }
    }

    /// `sum_mu d^2 p / dx^mu dk_mu` as a polynomial.
    pub fn mixed_trace(&self) -> MatrixPoly {
        let mut acc = MatrixPoly::zero(self.dim());
        for mu in 0..4 {
            let d = self.principal.derivative(Variable::X(mu)).derivative(Variable::K(mu));
            acc = acc.add(&d).expect("same dim");
        }
        acc
    }

    /// `p^s = p_{m-1} - (1/2i) sum_mu d^2 p / dx^mu dk_mu` as a polynomial.
    pub fn subprincipal(&self) -> MatrixPoly {
        // -(1/2i) = i/2
        let correction = self.mixed_trace().scale(I * 0.5);
        self.lower.add(&correction).expect("same dim")
    }
}

pub fn eval_symbol(sym: &MatrixSymbol, part: Part, pt: &PhaseSpacePoint) -> CMatrix {
    sym.eval(part, pt)
}

pub fn differentiate(sym: &MatrixSymbol, v: Variable) -> MatrixSymbol {
    sym.differentiate(v)
}

pub fn check_homogeneity(sym: &MatrixSymbol) -> Homogeneity {
    sym.check_homogeneity()
}

pub fn subprincipal_symbol(sym: &MatrixSymbol, pt: &PhaseSpacePoint) -> CMatrix {
    sym.subprincipal().eval(pt)
}

/// `{a, b} = sum_mu (da/dk_mu)(db/dx^mu) - (da/dx^mu)(db/dk_mu)` on principal
/// parts, matrix products taken in the written order.
pub fn poisson_bracket_poly(a: &MatrixPoly, b: &MatrixPoly) -> Result<MatrixPoly> {
    a.check_dims(b, "poisson bracket")?;
    let mut acc = MatrixPoly::zero(a.dim());
    for mu in 0..4 {
        let first = a.derivative(Variable::K(mu)).mul(&b.derivative(Variable::X(mu)))?;
        let second = a.derivative(Variable::X(mu)).mul(&b.derivative(Variable::K(mu)))?;
        acc = acc.add(&first)?.sub(&second)?;
    }
    Ok(acc)
}

pub fn poisson_bracket(a: &MatrixSymbol, b: &MatrixSymbol, pt: &PhaseSpacePoint) -> Result<CMatrix> {
    Ok(poisson_bracket_poly(a.principal(), b.principal())?.eval(pt))
}

/// Precomputed partial derivatives of a scalar symbol `q`, giving the
/// Hamilton field `dx^mu/dtau = dq/dk_mu`, `dk_mu/dtau = -dq/dx^mu`.
#[derive(Clone, Debug)]
pub struct HamiltonField {
    q: MatrixPoly,
    dq_dk: [MatrixPoly; 4],
    dq_dx: [MatrixPoly; 4],
    x_independent: bool,
}

impl HamiltonField {
    pub fn new(q: &MatrixSymbol) -> Result<Self> {
        let p = q.principal();
        p.require_scalar()?;
        Ok(HamiltonField {
            q: p.clone(),
            dq_dk: std::array::from_fn(|mu| p.derivative(Variable::K(mu))),
            dq_dx: std::array::from_fn(|mu| p.derivative(Variable::X(mu))),
            x_independent: p.is_x_independent(),
        })
    }

    pub fn q(&self) -> &MatrixPoly {
        &self.q
    }

    /// No `x` dependence: the `k` equation has an identically zero right side.
    pub fn is_x_independent(&self) -> bool {
        self.x_independent
    }

    pub fn q_value(&self, x: &[f64; 4], k: &[f64; 4]) -> Complex64 {
        self.q.eval_scalar(x, k)
    }

    pub fn q_scale(&self, x: &[f64; 4], k: &[f64; 4]) -> f64 {
        self.q.magnitude_scale(x, k)
    }

    pub fn velocity(&self, x: &[f64; 4], k: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|mu| self.dq_dk[mu].eval_scalar(x, k).re)
    }

    pub fn force(&self, x: &[f64; 4], k: &[f64; 4]) -> [f64; 4] {
        if self.x_independent {
            return [0.0; 4];
        }
        std::array::from_fn(|mu| -self.dq_dx[mu].eval_scalar(x, k).re)
    }

    pub fn eval(&self, x: &[f64; 4], k: &[f64; 4]) -> ([f64; 4], [f64; 4]) {
        (self.velocity(x, k), self.force(x, k))
    }
}

/// Hamilton field of a scalar symbol at a point: `(dx/dtau, dk/dtau)`.
pub fn hamilton_field(q: &MatrixSymbol, pt: &PhaseSpacePoint) -> Result<([f64; 4], [f64; 4])> {
    Ok(HamiltonField::new(q)?.eval(&pt.x.0, &pt.k.0))
}

/// Serialized form of a symbol: dimension, order and term lists with
/// row-major `[re, im]` coefficient entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub dim: usize,
    pub order: i32,
    pub principal: Vec<TermSpec>,
    #[serde(default)]
    pub lower: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub x: [u32; 4],
    pub k: [u32; 4],
    pub coeffs: Vec<[f64; 2]>,
}

impl SymbolSpec {
    fn poly(dim: usize, terms: &[TermSpec]) -> Result<MatrixPoly> {
        let mut p = MatrixPoly::zero(dim);
        for (i, t) in terms.iter().enumerate() {
            if t.coeffs.len() != dim * dim {
                return Err(Error::InvalidSymbol(format!(
                    "term {i}: expected {} coefficients, got {}",
                    dim * dim,
                    t.coeffs.len()
                )));
            }
            let c = CMatrix::from_row_iterator(dim, dim, t.coeffs.iter().map(|[re, im]| Complex64::new(*re, *im)));
            p.add_term(Monomial::new(t.x, t.k), c)?;
        }
        Ok(p)
    }

    /// Converts to a symbol. Homogeneity is not enforced here; callers that
    /// need it check [`MatrixSymbol::check_homogeneity`].
    pub fn to_symbol(&self) -> Result<MatrixSymbol> {
        if self.dim == 0 {
            return Err(Error::InvalidSymbol("dimension must be positive".into()));
        }
        MatrixSymbol::from_parts(
            self.order,
            Self::poly(self.dim, &self.principal)?,
            Self::poly(self.dim, &self.lower)?,
        )
    }

    pub fn from_symbol(sym: &MatrixSymbol) -> Self {
        let terms = |p: &MatrixPoly| {
            p.terms()
                .map(|(m, c)| TermSpec {
                    x: m.x,
                    k: m.k,
                    coeffs: c.transpose().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect()
        };
        SymbolSpec {
            dim: sym.dim(),
            order: sym.order(),
            principal: terms(sym.principal()),
            lower: terms(sym.lower()),
        }
    }
}
