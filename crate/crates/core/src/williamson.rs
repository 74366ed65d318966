//! Williamson symplectic diagonalization `𝐒 = 𝐆ᵀ𝐃_coth𝐆`, symplectic
//! eigenvalues, inverse temperatures and temperature partitions.
//!
//! The `+iν` eigenvectors of `𝐉𝐒` are obtained from the Hermitian matrix
//! `i𝐒^{1/2}𝐉𝐒^{1/2}`, which is similar to `i𝐉𝐒`: if `u` is an eigenvector
//! for `−ν` then `w = 𝐒^{-1/2}u` satisfies `𝐉𝐒w = iνw`. Writing
//! `w = x + iy` with `xᵀ𝐉y = 1`, the columns `(x₁…x_d, y₁…y_d)` form `𝐆⁻¹`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::CMatrixExt;
use crate::linalg;
use crate::realop::{j_matrix, CMatrix, CVector, C64};

/// Default faithfulness margin: every `ν` must exceed `1 + tol`.
pub const DEFAULT_NU_TOL: f64 = 1e-9;

/// Default relative tolerance for grouping equal inverse temperatures.
pub const DEFAULT_TEMPERATURE_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-9;
const IMAG_RESIDUE_TOL: f64 = 1e-8;
const CLUSTER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonResult {
    /// Symplectic `𝐆` with `𝐆ᵀ𝐃_coth𝐆 = 𝐒`.
    pub g: DMatrix<f64>,
    /// `𝐆⁻¹`, which maps the standard form back: `𝐆⁻ᵀ𝐒𝐆⁻¹ = 𝐃_coth`.
    pub g_inv: DMatrix<f64>,
    /// Symplectic eigenvalues, descending.
    pub nu: Vec<f64>,
    pub beta: Vec<f64>,
}

impl WilliamsonResult {
    /// `diag(ν, ν)`.
    pub fn d_coth(&self) -> DMatrix<f64> {
        diag_doubled(&self.nu)
    }

    pub fn reconstruction_residual(&self, s: &DMatrix<f64>) -> f64 {
        let r = self.g.transpose() * self.d_coth() * &self.g - s;
        r.amax() / s.amax().max(f64::MIN_POSITIVE)
    }

    pub fn symplectic_residual(&self) -> f64 {
        let j = j_matrix(self.nu.len());
        (self.g.transpose() * &j * &self.g - j).amax()
    }
}

pub(crate) fn diag_doubled(v: &[f64]) -> DMatrix<f64> {
    let d = v.len();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| if r == c { v[r % d] } else { 0.0 })
}

fn check_covariance(s: &DMatrix<f64>) -> Result<usize> {
    let n = s.nrows();
    if !s.is_square() || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "covariance must be a nonempty square matrix, got {:?}",
            s.shape()
        )));
    }
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let res = linalg::symmetry_residual(s);
    if res > SYMMETRY_TOL {
        return Err(Error::NotSymmetric {
            what: "covariance matrix",
            property: "symmetric",
            residual: res,
        });
    }
    Ok(n / 2)
}

struct Whitened {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

fn whiten(s: &DMatrix<f64>) -> Result<Whitened> {
    let sym = (s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        return Err(Error::InvalidCovariance {
            reason: "covariance matrix is not positive definite",
            residual: -min,
        });
    }
    let q = &eig.eigenvectors;
    let root = eig.eigenvalues.map(f64::sqrt);
    let sqrt = q * DMatrix::from_diagonal(&root) * q.transpose();
    let inv_sqrt = q * DMatrix::from_diagonal(&root.map(|x| 1.0 / x)) * q.transpose();
    Ok(Whitened { sqrt, inv_sqrt })
}

/// Hermitian eigendecomposition of `i𝐒^{1/2}𝐉𝐒^{1/2}`; eigenvalues ascending,
/// so the first `d` are `−ν` with `ν` descending.
fn pairing_eigen(d: usize, w: &Whitened) -> (Vec<f64>, CMatrix) {
    let k = &w.sqrt * j_matrix(d) * &w.sqrt;
    let zero = DMatrix::<f64>::zeros(2 * d, 2 * d);
    let h = CMatrixExt::from_real_imag(&zero, &k);
    linalg::hermitian_eigen(&h)
}

/// Eigenvalues of `𝐉𝐒` by a general (Schur) solver must be purely imaginary
/// for a genuine covariance; returns the largest real part seen, relative.
fn imaginary_residue(s: &DMatrix<f64>, d: usize) -> Result<f64> {
    let ev = linalg::eigenvalues_real(&(j_matrix(d) * s))?;
    let scale = s.amax().max(1.0);
    Ok(ev.iter().fold(0.0_f64, |acc, z| acc.max(z.re.abs())) / scale)
}

/// Symplectic eigenvalues of `𝐒`, descending: the moduli of the eigenvalues
/// of `i𝐉𝐒`, one from each `±` pair.
pub fn symplectic_eigenvalues(s: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = check_covariance(s)?;
    let residue = imaginary_residue(s, d)?;
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::InvalidCovariance {
            reason: "eigenvalues of iJS are not real",
            residual: residue,
        });
    }
    let w = whiten(s)?;
    let (values, _) = pairing_eigen(d, &w);
    Ok(values[..d].iter().map(|x| -x).collect())
}

/// `β = log((ν+1)/(ν−1))`, the inverse of `ν = coth(β/2)`.
pub fn beta_from_nu(nu: f64) -> Result<f64> {
    if !(nu > 1.0) || !nu.is_finite() {
        return Err(Error::NonFaithful { nu, tol: 0.0 });
    }
    Ok((2.0 / (nu - 1.0)).ln_1p())
}

pub fn nu_from_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::BadTemperature(beta));
    }
    Ok(1.0 / (beta / 2.0).tanh())
}

/// Canonical orthonormal basis of one eigenspace: candidates are projected
/// onto the eigenspace and picked greedily by largest remaining norm, ties
/// going to the lowest index.
fn canonical_basis(eigvecs: &CMatrix, cols: &[usize], candidates: &[CVector]) -> Result<Vec<CVector>> {
    let basis: Vec<CVector> = cols.iter().map(|&c| eigvecs.column(c).into_owned()).collect();
    let project = |v: &CVector| -> CVector {
        basis
            .iter()
            .fold(CVector::zeros(v.len()), |acc, b| acc + b * b.dotc(v))
    };
    let mut residuals: Vec<CVector> = candidates.iter().map(project).collect();
    let mut chosen: Vec<CVector> = Vec::with_capacity(cols.len());
    let mut used = vec![false; residuals.len()];
    while chosen.len() < cols.len() {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in residuals.iter().enumerate() {
            if used[i] {
                continue;
            }
            let n = r.norm();
            match best {
                Some((_, bn)) if n <= bn * (1.0 + 1e-10) => {}
                _ => best = Some((i, n)),
            }
        }
        let (idx, norm) = best.ok_or_else(|| Error::numerical("eigenspace basis exhausted", 0.0))?;
        if norm < 1e-8 {
            return Err(Error::numerical("degenerate eigenspace pivot too small", norm));
        }
        used[idx] = true;
        let q = &residuals[idx] / C64::new(norm, 0.0);
        for r in residuals.iter_mut() {
            let coef = q.dotc(r);
            *r -= &q * coef;
        }
        chosen.push(q);
    }
    Ok(chosen)
}

/// Williamson decomposition with deterministic conventions: `ν` descending,
/// and within each (near-)degenerate eigenspace the basis closest to the
/// coordinate modes, so that a diagonal `𝐒` with descending entries yields
/// `𝐆 = 1`.
pub fn williamson(s: &DMatrix<f64>, tol: f64) -> Result<WilliamsonResult> {
    let d = check_covariance(s)?;
    let residue = imaginary_residue(s, d)?;
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::InvalidCovariance {
            reason: "eigenvalues of iJS are not real",
            residual: residue,
        });
    }
    let w = whiten(s)?;
    let (values, vectors) = pairing_eigen(d, &w);
    let nu: Vec<f64> = values[..d].iter().map(|x| -x).collect();
    if let Some(&bad) = nu.iter().rev().find(|&&x| x <= 1.0 + tol) {
        return Err(Error::NonFaithful { nu: bad, tol });
    }

    let sqrt_c = CMatrixExt::from_real(&w.sqrt);
    let inv_sqrt_c = CMatrixExt::from_real(&w.inv_sqrt);
    let n = 2 * d;
    let mut candidates: Vec<CVector> = (0..d)
        .map(|j| {
            let mut e = CVector::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            e[d + j] = C64::new(0.0, 1.0);
            &sqrt_c * e
        })
        .collect();
    candidates.extend((0..n).map(|k| sqrt_c.column(k).into_owned()));

    let mut g_inv = DMatrix::<f64>::zeros(n, n);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (nu[end - 1] - nu[end]).abs() <= CLUSTER_TOL * nu[end - 1].max(1.0) {
            end += 1;
        }
        let cols: Vec<usize> = (start..end).collect();
        let basis = canonical_basis(&vectors, &cols, &candidates)?;
        for (offset, u) in basis.iter().enumerate() {
            let j = start + offset;
            let wv = &inv_sqrt_c * u * C64::new((2.0 * nu[j]).sqrt(), 0.0);
            for r in 0..n {
                g_inv[(r, j)] = wv[r].re;
                g_inv[(r, d + j)] = wv[r].im;
            }
        }
        start = end;
    }

    let jm = j_matrix(d);
    let g = -(&jm * g_inv.transpose() * &jm);
    let beta = nu.iter().map(|&x| beta_from_nu(x)).collect::<Result<Vec<_>>>()?;
    let result = WilliamsonResult {
        g,
        g_inv,
        nu,
        beta,
    };
    let sym = result.symplectic_residual();
    let rec = result.reconstruction_residual(s);
    let gscale = result.g.amax().powi(2).max(1.0);
    if sym > 1e-10 * gscale || rec > 1e-9 * gscale {
        return Err(Error::numerical(
            "Williamson pairing is defective",
            sym.max(rec),
        ));
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperaturePartition {
    /// Index sets (ascending within a class), classes ordered by `β` descending.
    pub classes: Vec<Vec<usize>>,
    /// Mean `β` of each class.
    pub representative_beta: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TemperaturePartition {
    pub fn class_of(&self, index: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&index))
    }
}

/// Groups indices whose `β` agree within `tol·max(1, |β|)`, chaining
/// neighbours in sorted order.
pub fn temperature_partition(beta: &[f64], tol: f64) -> TemperaturePartition {
    let mut order: Vec<usize> = (0..beta.len()).collect();
    order.sort_by(|&i, &j| beta[j].total_cmp(&beta[i]).then(i.cmp(&j)));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut warnings = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 {
            classes.push(vec![i]);
            continue;
        }
        let prev = order[pos - 1];
        let gap = (beta[prev] - beta[i]).abs();
        let scale = tol * beta[prev].abs().max(beta[i].abs()).max(1.0);
        if scale > 0.0 && gap > scale / 10.0 && gap <= scale * 10.0 {
            warnings.push(format!(
                "inverse temperatures of modes {prev} and {i} differ by {gap:.3e}, \
                 within a factor 10 of the grouping tolerance {scale:.3e}"
            ));
        }
        if gap <= scale {
            classes.last_mut().expect("nonempty").push(i);
        } else {
            classes.push(vec![i]);
        }
    }
    for c in classes.iter_mut() {
        c.sort_unstable();
    }
    let representative_beta = classes
        .iter()
        .map(|c| c.iter().map(|&i| beta[i]).sum::<f64>() / c.len() as f64)
        .collect();
    TemperaturePartition {
        classes,
        representative_beta,
        warnings,
    }
}

/// The diagonal blocks `(X − iY, X + iY)` of `𝒰*A𝒰` for `A = [[X, Y], [−Y, X]]`.
pub fn block_diagonalize(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(CMatrix, CMatrix)> {
    if !x.is_square() || x.shape() != y.shape() {
        return Err(Error::DimensionMismatch(format!(
            "X is {:?} and Y is {:?}, expected equal square shapes",
            x.shape(),
            y.shape()
        )));
    }
    Ok((
        CMatrixExt::from_real_imag(x, &(-y)),
        CMatrixExt::from_real_imag(x, y),
    ))
}
