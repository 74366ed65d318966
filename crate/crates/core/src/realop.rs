//! Real-linear operators on complex coordinate space.
//!
//! A real-linear map `z ↦ S₁z + S₂z̄` is stored as the pair `(S₁, S₂)`. Its
//! matrix identification acts on the stacked real vector `(Re z; Im z)`:
//!
//! ```text
//!     [ Re S₁ + Re S₂   Im S₂ − Im S₁ ]
//!     [ Im S₁ + Im S₂   Re S₁ − Re S₂ ]
//! ```
//!
//! Every other module in the crate shares this stacking convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
/// Real `2n × 2n` matrix identification of a real-linear operator.
pub type MatrixIdent = DMatrix<f64>;

/// Default absolute tolerance on matrix entries, applied after scaling by the
/// largest entry magnitude.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RealLinearOp {
    linear: CMatrix,
    antilinear: CMatrix,
}

impl RealLinearOp {
    /// Builds `z ↦ linear·z + antilinear·z̄`. The two parts must have the same
    /// shape; rectangular operators (`Cⁿ → Cᵐ`) are allowed.
    pub fn new(linear: CMatrix, antilinear: CMatrix) -> Result<Self> {
        if linear.shape() != antilinear.shape() {
            return Err(Error::DimensionMismatch(format!(
                "linear part is {:?} but antilinear part is {:?}",
                linear.shape(),
                antilinear.shape()
            )));
        }
        Ok(Self { linear, antilinear })
    }

    /// Complex-linear operator `z ↦ a·z`.
    pub fn complex_linear(a: CMatrix) -> Self {
        let zero = CMatrix::zeros(a.nrows(), a.ncols());
        Self {
            linear: a,
            antilinear: zero,
        }
    }

    /// Real diagonal operator `z ↦ diag(entries)·z`.
    pub fn real_diagonal(entries: &[f64]) -> Self {
        let diag = CVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)));
        Self::complex_linear(CMatrix::from_diagonal(&diag))
    }

    pub fn identity(d: usize) -> Self {
        Self::complex_linear(CMatrix::identity(d, d))
    }

    pub fn zero(d: usize) -> Self {
        Self::complex_linear(CMatrix::zeros(d, d))
    }

    /// `J : z ↦ −iz`.
    pub fn j(d: usize) -> Self {
        Self::complex_linear(CMatrix::identity(d, d) * C64::new(0.0, -1.0))
    }

    /// Componentwise conjugation `z ↦ z̄`.
    pub fn conjugation(d: usize) -> Self {
        Self {
            linear: CMatrix::zeros(d, d),
            antilinear: CMatrix::identity(d, d),
        }
    }

    pub fn linear_part(&self) -> &CMatrix {
        &self.linear
    }

    pub fn antilinear_part(&self) -> &CMatrix {
        &self.antilinear
    }

    pub fn into_parts(self) -> (CMatrix, CMatrix) {
        (self.linear, self.antilinear)
    }

    pub fn nrows(&self) -> usize {
        self.linear.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.linear.ncols()
    }

    /// Mode count of a square operator.
    pub fn dim(&self) -> usize {
        debug_assert!(self.linear.is_square());
        self.linear.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.linear.is_square()
    }

    pub fn to_matrix(&self) -> MatrixIdent {
        let (r, c) = self.linear.shape();
        let mut m = MatrixIdent::zeros(2 * r, 2 * c);
        for i in 0..r {
            for j in 0..c {
                let s1 = self.linear[(i, j)];
                let s2 = self.antilinear[(i, j)];
                m[(i, j)] = s1.re + s2.re;
                m[(i, j + c)] = s2.im - s1.im;
                m[(i + r, j)] = s1.im + s2.im;
                m[(i + r, j + c)] = s1.re - s2.re;
            }
        }
        m
    }

    pub fn from_matrix(m: &MatrixIdent) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows % 2 != 0 {
            return Err(Error::OddDimension(rows));
        }
        if cols % 2 != 0 {
            return Err(Error::OddDimension(cols));
        }
        let (r, c) = (rows / 2, cols / 2);
        let mut linear = CMatrix::zeros(r, c);
        let mut antilinear = CMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let s11 = m[(i, j)];
                let s12 = m[(i, j + c)];
                let s21 = m[(i + r, j)];
                let s22 = m[(i + r, j + c)];
                linear[(i, j)] = C64::new((s11 + s22) / 2.0, (s21 - s12) / 2.0);
                antilinear[(i, j)] = C64::new((s11 - s22) / 2.0, (s12 + s21) / 2.0);
            }
        }
        Ok(Self { linear, antilinear })
    }

    pub fn apply(&self, z: &CVector) -> Result<CVector> {
        if z.len() != self.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator takes vectors of length {}, got {}",
                self.ncols(),
                z.len()
            )));
        }
        Ok(&self.linear * z + &self.antilinear * z.conjugate())
    }

    /// Adjoint with respect to the real inner product `Re⟨·,·⟩`.
    pub fn sharp(&self) -> Self {
        Self {
            linear: self.linear.adjoint(),
            antilinear: self.antilinear.transpose(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.ncols() != other.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        Ok(Self {
            linear: &self.linear * &other.linear + &self.antilinear * other.antilinear.conjugate(),
            antilinear: &self.linear * &other.antilinear
                + &self.antilinear * other.linear.conjugate(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.linear.shape() != other.linear.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {:?} and {:?}",
                self.linear.shape(),
                other.linear.shape()
            )));
        }
        Ok(Self {
            linear: &self.linear + &other.linear,
            antilinear: &self.antilinear + &other.antilinear,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            linear: &self.linear * C64::new(a, 0.0),
            antilinear: &self.antilinear * C64::new(a, 0.0),
        }
    }

    /// Largest entry magnitude over both parts.
    pub fn max_abs(&self) -> f64 {
        self.linear
            .iter()
            .chain(self.antilinear.iter())
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Scale-normalized maximum entrywise distance.
    pub fn distance(&self, other: &Self) -> f64 {
        let diff = Self {
            linear: &self.linear - &other.linear,
            antilinear: &self.antilinear - &other.antilinear,
        };
        diff.max_abs() / self.max_abs().max(other.max_abs()).max(1.0)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.linear.shape() == other.linear.shape() && self.distance(other) <= tol
    }
}

/// Stacks `z` as `(Re z; Im z)`.
pub fn stack(z: &CVector) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(2 * n, |i, _| if i < n { z[i].re } else { z[i - n].im })
}

/// Inverse of [`stack`].
pub fn unstack(x: &DVector<f64>) -> Result<CVector> {
    if x.len() % 2 != 0 {
        return Err(Error::OddDimension(x.len()));
    }
    let n = x.len() / 2;
    Ok(CVector::from_fn(n, |i, _| C64::new(x[i], x[i + n])))
}

/// `𝐉 = [[0, 1], [−1, 0]]`, the identification of `z ↦ −iz`.
pub fn j_matrix(d: usize) -> MatrixIdent {
    let mut j = MatrixIdent::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, i + d)] = 1.0;
        j[(i + d, i)] = -1.0;
    }
    j
}

/// Complex inner product, conjugate-linear in the first slot.
pub fn inner(y: &CVector, z: &CVector) -> C64 {
    y.dotc(z)
}

/// Outcome of a symplecticity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticCheck {
    pub symplectic: bool,
    pub residual: f64,
}

/// Checks the four defining identities of a symplectic `(M₁, M₂)` pair.
/// The residual is normalized by `max(1, ‖M‖²_max)`.
pub fn is_symplectic(op: &RealLinearOp, tol: f64) -> SymplecticCheck {
    if !op.is_square() {
        return SymplecticCheck {
            symplectic: false,
            residual: f64::INFINITY,
        };
    }
    let d = op.dim();
    let (m1, m2) = (&op.linear, &op.antilinear);
    let eye = CMatrix::identity(d, d);
    let residuals = [
        m1.adjoint() * m1 - m2.transpose() * m2.conjugate() - &eye,
        m2.transpose() * m1.conjugate() - m1.adjoint() * m2,
        m1 * m1.adjoint() - m2 * m2.adjoint() - &eye,
        m1 * m2.transpose() - m2 * m1.transpose(),
    ];
    let raw = residuals
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let scale = op.max_abs().powi(2).max(1.0);
    let residual = raw / scale;
    SymplecticCheck {
        symplectic: residual <= tol,
        residual,
    }
}

/// Inverse of a symplectic transformation, `z ↦ M₁*z − M₂ᵀz̄`.
pub fn inverse_symplectic(op: &RealLinearOp) -> Result<RealLinearOp> {
    let check = is_symplectic(op, 1e-10);
    if !check.symplectic {
        return Err(Error::NotSymplectic {
            residual: check.residual,
        });
    }
    Ok(RealLinearOp {
        linear: op.linear.adjoint(),
        antilinear: -op.antilinear.transpose(),
    })
}

/// Complex parts `(M₁, M₂)` of a symplectic transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticParts {
    pub m1: CMatrix,
    pub m2: CMatrix,
}

impl SymplecticParts {
    /// Validates the symplectic identities within `tol`.
    pub fn new(m1: CMatrix, m2: CMatrix, tol: f64) -> Result<Self> {
        let op = RealLinearOp::new(m1, m2)?;
        Self::from_op(op, tol)
    }

    pub fn from_op(op: RealLinearOp, tol: f64) -> Result<Self> {
        let check = is_symplectic(&op, tol);
        if !check.symplectic {
            return Err(Error::NotSymplectic {
                residual: check.residual,
            });
        }
        let (m1, m2) = op.into_parts();
        Ok(Self { m1, m2 })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m1: CMatrix::identity(d, d),
            m2: CMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.m1.nrows()
    }

    pub fn to_op(&self) -> RealLinearOp {
        RealLinearOp {
            linear: self.m1.clone(),
            antilinear: self.m2.clone(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            m1: self.m1.adjoint(),
            m2: -self.m2.transpose(),
        }
    }

    /// Composition `self ∘ other`; symplectic maps are closed under it.
    pub fn compose(&self, other: &Self) -> Self {
        let op = self
            .to_op()
            .compose(&other.to_op())
            .expect("symplectic parts have matching dimensions");
        let (m1, m2) = op.into_parts();
        Self { m1, m2 }
    }
}
