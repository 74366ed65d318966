//! Dense numerical kernels shared by the analysis modules: eigenvalues,
//! singular values, the Kronecker-form Lyapunov solve, and adaptive
//! Gauss–Kronrod quadrature for vector-valued integrands.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::realop::{CMatrix, C64};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// `e^{A}` by Padé scaling and squaring.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.exp()
}

pub fn eigenvalues_real(a: &DMatrix<f64>) -> Result<Vec<C64>> {
    let schur = Schur::try_new(a.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::numerical("real Schur decomposition did not converge", f64::NAN))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn eigenvalues_complex(a: &CMatrix) -> Result<Vec<C64>> {
    let schur = Schur::try_new(a.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::numerical("complex Schur decomposition did not converge", f64::NAN))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Maximum real part over the spectrum of a real matrix.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues_real(a)?
        .iter()
        .fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re)))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Singular values in descending order.
pub fn singular_values_complex(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn singular_values_real(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with a relative singular-value threshold, plus the
/// smallest ratio `σ / (tol·σ_max)` seen among singular values within a
/// factor ten of the threshold (for borderline reporting).
#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub borderline: bool,
}

pub fn rank_info(singular_values: Vec<f64>, rel_tol: f64) -> RankInfo {
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * smax;
    let rank = singular_values.iter().filter(|&&s| s > threshold).count();
    let borderline = smax > 0.0
        && singular_values
            .iter()
            .any(|&s| s > threshold / 10.0 && s <= threshold * 10.0);
    RankInfo {
        rank,
        singular_values,
        threshold,
        borderline,
    }
}

/// Solves `Aᵀ X + X A = −Q` through the Kronecker-vectorized system
/// `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec X = −vec Q`.
pub fn lyapunov_kron(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "Lyapunov solve needs square operands of equal size, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    let system = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|x| -x));
    let lu = system.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("singular Lyapunov system", 0.0))?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> Vec<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let n = fc.len();
    let mut kron: Vec<f64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<f64> = fc.iter().map(|v| v * WG[3]).collect();
    for k in 0..7 {
        let dx = half * XGK[k];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..n {
            let s = f1[i] + f2[i];
            kron[i] += WGK[k] * s;
            if k % 2 == 1 {
                gauss[i] += WG[k / 2] * s;
            }
        }
    }
    let mut error = 0.0_f64;
    for i in 0..n {
        kron[i] *= half;
        gauss[i] *= half;
        error = error.max((kron[i] - gauss[i]).abs());
    }
    Panel {
        a,
        b,
        value: kron,
        error,
    }
}

/// Globally adaptive Gauss–Kronrod quadrature of a vector-valued integrand.
/// The error is measured as the maximum over components.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Vec<f64>,
{
    const MAX_PANELS: usize = 4000;
    if b == a {
        return Ok(f(a).iter().map(|_| 0.0).collect());
    }
    let mut panels = vec![gk15(&f, a, b)];
    loop {
        let total: f64 = panels.iter().map(|p| p.error).sum();
        if total <= abs_tol {
            break;
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::numerical(
                "adaptive quadrature exhausted its panel budget",
                total,
            ));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
    // Sum in interval order for reproducibility.
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let n = panels[0].value.len();
    let mut out = vec![0.0; n];
    for p in &panels {
        for (o, v) in out.iter_mut().zip(&p.value) {
            *o += v;
        }
    }
    Ok(out)
}

pub fn matrix_to_vec(m: &DMatrix<f64>) -> Vec<f64> {
    m.as_slice().to_vec()
}

pub fn vec_to_matrix(v: &[f64], n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, m, v)
}

/// Frobenius-normalized maximum absolute difference.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

pub fn symmetry_residual(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).amax() / a.amax().max(1.0)
}
