//! KMS and GNS spectral-gap matrices, the kernel criteria for gap existence,
//! and first-order gap values. Everything here assumes a standardized
//! generator: the invariant state is `𝐃_coth(β)` with mean zero.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{gram_products, CMatrixExt};
use crate::linalg::{self, RankInfo};
use crate::realop::{j_matrix, CMatrix, RealLinearOp, C64};
use crate::standardize::StandardizedGenerator;
use crate::williamson::{diag_doubled, temperature_partition, TemperaturePartition};

/// Default relative singular-value threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Relative size below which an eigenvalue of a (non-normal) gap matrix is
/// treated as zero in cross-checks.
pub const EIGEN_ZERO_TOL: f64 = 1e-7;

/// Cross-check quantities within this factor of their thresholds are
/// reported as borderline rather than as disagreements.
pub const CROSS_CHECK_BAND: f64 = 1e3;

const REALITY_TOL: f64 = 1e-8;

fn check_beta(beta: &[f64]) -> Result<()> {
    if let Some(&b) = beta.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::BadTemperature(b));
    }
    Ok(())
}

fn check_drift(z: &RealLinearOp, beta: &[f64]) -> Result<()> {
    check_beta(beta)?;
    if !z.is_square() || z.dim() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "drift is {}x{}, {} inverse temperatures given",
            z.nrows(),
            z.ncols(),
            beta.len()
        )));
    }
    Ok(())
}

fn csch(x: f64) -> f64 {
    1.0 / x.sinh()
}

fn map_half(beta: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    beta.iter().map(|&b| f(b / 2.0)).collect()
}

/// `𝐃_csch = diag(csch(β_j/2))` on both blocks.
pub fn d_csch(beta: &[f64]) -> Result<DMatrix<f64>> {
    check_beta(beta)?;
    Ok(diag_doubled(&map_half(beta, csch)))
}

pub fn d_coth(beta: &[f64]) -> Result<DMatrix<f64>> {
    check_beta(beta)?;
    Ok(diag_doubled(&map_half(beta, |x| 1.0 / x.tanh())))
}

pub fn d_sinh(beta: &[f64]) -> Result<DMatrix<f64>> {
    check_beta(beta)?;
    Ok(diag_doubled(&map_half(beta, f64::sinh)))
}

pub fn d_cosh(beta: &[f64]) -> Result<DMatrix<f64>> {
    check_beta(beta)?;
    Ok(diag_doubled(&map_half(beta, f64::cosh)))
}

fn complex(m: &DMatrix<f64>) -> CMatrix {
    CMatrixExt::from_real(m)
}

fn i_times(m: &DMatrix<f64>) -> CMatrix {
    CMatrixExt::from_real_imag(&DMatrix::zeros(m.nrows(), m.ncols()), m)
}

/// `𝐙 + 𝐃_csch⁻¹𝐙ᵀ𝐃_csch`.
pub fn kms_gap_matrix(z: &RealLinearOp, beta: &[f64]) -> Result<DMatrix<f64>> {
    check_drift(z, beta)?;
    let zm = z.to_matrix();
    let dc = d_csch(beta)?;
    let dc_inv = diag_doubled(&map_half(beta, f64::sinh));
    Ok(&zm + dc_inv * zm.transpose() * dc)
}

/// `𝐙ᵀ𝐃_csch + 𝐃_csch𝐙`, the identification of `Z^♯D_csch + D_cschZ`.
pub fn kms_symmetric_matrix(z: &RealLinearOp, beta: &[f64]) -> Result<DMatrix<f64>> {
    check_drift(z, beta)?;
    let zm = z.to_matrix();
    let dc = d_csch(beta)?;
    Ok(zm.transpose() * &dc + &dc * zm)
}

/// `𝐙 + (𝐃_cosh + i𝐉𝐃_sinh)⁻¹𝐃_csch⁻¹𝐙ᵀ𝐃_csch(𝐃_cosh + i𝐉𝐃_sinh)`.
pub fn gns_gap_matrix(z: &RealLinearOp, beta: &[f64]) -> Result<CMatrix> {
    check_drift(z, beta)?;
    let d = beta.len();
    let zm = complex(&z.to_matrix());
    let j = j_matrix(d);
    let (ch, sh) = (d_cosh(beta)?, d_sinh(beta)?);
    let p = complex(&ch) + i_times(&(&j * &sh));
    // cosh² − sinh² = 1 and diagonal-doubled matrices commute with 𝐉.
    let p_inv = complex(&ch) - i_times(&(&j * &sh));
    let dc = complex(&d_csch(beta)?);
    let dc_inv = complex(&sh);
    Ok(&zm + p_inv * dc_inv * zm.transpose() * dc * p)
}

/// `𝐙ᵀ(𝐃_coth + i𝐉) + (𝐃_coth + i𝐉)𝐙`, Hermitian and negative semidefinite.
pub fn gns_alt_matrix(z: &RealLinearOp, beta: &[f64]) -> Result<CMatrix> {
    check_drift(z, beta)?;
    let zm = complex(&z.to_matrix());
    let k = complex(&d_coth(beta)?) + i_times(&j_matrix(beta.len()));
    Ok(zm.transpose() * &k + k * zm)
}

fn check_kraus(u: &CMatrix, v: &CMatrix, beta: &[f64]) -> Result<()> {
    check_beta(beta)?;
    if u.shape() != v.shape() || u.ncols() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "U is {:?}, V is {:?}, {} inverse temperatures given",
            u.shape(),
            v.shape(),
            beta.len()
        )));
    }
    Ok(())
}

/// Explicit form of `Z^♯D_csch + D_cschZ` in terms of the Kraus coefficients.
pub fn kms_form_operator(u: &CMatrix, v: &CMatrix, beta: &[f64]) -> Result<RealLinearOp> {
    check_kraus(u, v, beta)?;
    let d = beta.len();
    let [uu, vv, uv, vu] = gram_products(u, v);
    let lo: Vec<f64> = beta.iter().map(|b| (-b / 2.0).exp()).collect();
    let hi: Vec<f64> = beta.iter().map(|b| (b / 2.0).exp()).collect();
    let two = |x: C64, den: f64| x * (-2.0 / den);
    let linear = CMatrix::from_fn(d, d, |j, k| {
        two(uu[(j, k)], lo[j] + lo[k]) + two(vv[(j, k)], hi[j] + hi[k])
    });
    let antilinear = CMatrix::from_fn(d, d, |j, k| {
        two(uv[(j, k)], lo[j] + hi[k]) + two(vu[(j, k)], hi[j] + lo[k])
    });
    RealLinearOp::new(linear, antilinear)
}

/// `A_t : ℂ^d → ℂ^m` with linear part `exp(−e^{−β_k/2}t/2)·ū_{jk}` and
/// antilinear part `exp(−e^{β_k/2}t/2)·v_{jk}`, so that
/// `−∫₀^∞ A_t^♯A_t dt` is the KMS form operator.
pub fn a_t_operator(u: &CMatrix, v: &CMatrix, beta: &[f64], t: f64) -> Result<RealLinearOp> {
    check_kraus(u, v, beta)?;
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let (m, d) = u.shape();
    let linear = CMatrix::from_fn(m, d, |j, k| {
        u[(j, k)].conj() * (-(-beta[k] / 2.0).exp() * t / 2.0).exp()
    });
    let antilinear = CMatrix::from_fn(m, d, |j, k| {
        v[(j, k)] * (-(beta[k] / 2.0).exp() * t / 2.0).exp()
    });
    RealLinearOp::new(linear, antilinear)
}

/// Truncation horizon `T = 40·max(1, e^{β_max/2})`: the slowest factor of
/// `A_t^♯A_t` decays like `exp(−e^{−β_max/2}t)`.
pub fn a_t_horizon(beta: &[f64]) -> f64 {
    let bmax = beta.iter().copied().fold(0.0_f64, f64::max);
    40.0 * (bmax / 2.0).exp().max(1.0)
}

/// `−∫₀^T A_t^♯A_t dt` by adaptive quadrature.
pub fn a_t_integral(u: &CMatrix, v: &CMatrix, beta: &[f64], horizon: f64) -> Result<RealLinearOp> {
    check_kraus(u, v, beta)?;
    let n = 2 * beta.len();
    let integrand = |t: f64| {
        let a = a_t_operator(u, v, beta, t).expect("validated inputs");
        let am = a.to_matrix();
        linalg::matrix_to_vec(&(-(am.transpose() * am)))
    };
    let vals = linalg::integrate(integrand, 0.0, horizon, 1e-10)?;
    RealLinearOp::from_matrix(&linalg::vec_to_matrix(&vals, n, n))
}

/// Columns of `U` and `V` belonging to one temperature class.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureBlock {
    pub indices: Vec<usize>,
    pub u: CMatrix,
    pub v: CMatrix,
}

pub fn temperature_blocks(
    u: &CMatrix,
    v: &CMatrix,
    partition: &TemperaturePartition,
) -> Result<Vec<TemperatureBlock>> {
    let d = u.ncols();
    let total: usize = partition.classes.iter().map(Vec::len).sum();
    if total != d || v.shape() != u.shape() || partition.classes.iter().flatten().any(|&i| i >= d) {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {total} indices, U has {d} columns"
        )));
    }
    Ok(partition
        .classes
        .iter()
        .map(|idx| TemperatureBlock {
            indices: idx.clone(),
            u: u.select_columns(idx.iter()),
            v: v.select_columns(idx.iter()),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRank {
    pub indices: Vec<usize>,
    pub kernel_dim: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub borderline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmsVerdict {
    pub exists: bool,
    pub classes: Vec<ClassRank>,
    pub borderline: bool,
}

/// KMS gap exists iff every class stack `[U_n; V_n]` has trivial kernel.
pub fn kms_gap_exists(
    u: &CMatrix,
    v: &CMatrix,
    partition: &TemperaturePartition,
    tol: f64,
) -> Result<KmsVerdict> {
    let blocks = temperature_blocks(u, v, partition)?;
    let classes: Vec<ClassRank> = blocks
        .into_iter()
        .map(|b| {
            let (m, k) = b.u.shape();
            let mut stack = CMatrix::zeros(2 * m, k);
            stack.rows_mut(0, m).copy_from(&b.u);
            stack.rows_mut(m, m).copy_from(&b.v);
            let RankInfo {
                rank,
                singular_values,
                threshold,
                borderline,
            } = linalg::rank_info(linalg::singular_values_complex(&stack), tol);
            ClassRank {
                indices: b.indices,
                kernel_dim: k - rank,
                singular_values,
                threshold,
                borderline,
            }
        })
        .collect();
    Ok(KmsVerdict {
        exists: classes.iter().all(|c| c.kernel_dim == 0),
        borderline: classes.iter().any(|c| c.borderline),
        classes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnsVerdict {
    pub exists: bool,
    pub rank: usize,
    pub required_rank: usize,
    pub singular_values: Vec<f64>,
    pub borderline: bool,
}

/// GNS gap exists iff `[U | V̄]` has rank `2d`.
pub fn gns_gap_exists(u: &CMatrix, v: &CMatrix, tol: f64) -> Result<GnsVerdict> {
    if u.shape() != v.shape() {
        return Err(Error::DimensionMismatch(format!(
            "U is {:?}, V is {:?}",
            u.shape(),
            v.shape()
        )));
    }
    let (m, d) = u.shape();
    let mut block = CMatrix::zeros(m, 2 * d);
    block.columns_mut(0, d).copy_from(u);
    block.columns_mut(d, d).copy_from(&v.conjugate());
    let info = linalg::rank_info(linalg::singular_values_complex(&block), tol);
    Ok(GnsVerdict {
        exists: info.rank == 2 * d,
        rank: info.rank,
        required_rank: 2 * d,
        singular_values: info.singular_values,
        borderline: info.borderline,
    })
}

/// Drift of the KMS-dual semigroup, `D_csch⁻¹Z^♯D_csch`.
pub fn dual_drift(z: &RealLinearOp, beta: &[f64]) -> Result<RealLinearOp> {
    check_drift(z, beta)?;
    let dc = RealLinearOp::real_diagonal(&map_half(beta, csch));
    let dc_inv = RealLinearOp::real_diagonal(&map_half(beta, f64::sinh));
    dc_inv.compose(&z.sharp())?.compose(&dc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    Kms,
    Gns,
}

impl Embedding {
    pub fn name(self) -> &'static str {
        match self {
            Embedding::Kms => "KMS",
            Embedding::Gns => "GNS",
        }
    }
}

/// First-order restricted gap `−½·max Re λ` from a gap-matrix spectrum.
pub fn first_order_gap(eigenvalues: &[C64], exists: bool, embedding: Embedding) -> Result<f64> {
    if !exists {
        return Err(Error::NoGap {
            embedding: embedding.name(),
        });
    }
    let scale = eigenvalues.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
    if let Some(z) = eigenvalues.iter().find(|z| z.im.abs() > REALITY_TOL * scale) {
        return Err(Error::numerical(
            format!("{} gap matrix has a non-real eigenvalue", embedding.name()),
            z.im.abs(),
        ));
    }
    let max = eigenvalues.iter().fold(f64::NEG_INFINITY, |a, z| a.max(z.re));
    Ok((-0.5 * max).max(0.0))
}

/// Exact eigenvalues of the KMS gap matrix through its symmetric similarity
/// `𝐃_csch^{-1/2}(𝐙ᵀ𝐃_csch + 𝐃_csch𝐙)𝐃_csch^{-1/2}`, ascending.
pub fn kms_gap_eigenvalues_symmetric(z: &RealLinearOp, beta: &[f64]) -> Result<Vec<f64>> {
    let form = kms_symmetric_matrix(z, beta)?;
    let w = diag_doubled(&map_half(beta, |x| x.sinh().sqrt()));
    Ok(linalg::symmetric_eigenvalues(&(&w * form * &w)))
}

/// Eigenvalues of the GNS gap matrix through its Hermitian similarity
/// `K^{-1/2}(𝐙ᵀK + K𝐙)K^{-1/2}` with `K = 𝐃_coth + i𝐉`, ascending.
pub fn gns_gap_eigenvalues_hermitian(z: &RealLinearOp, beta: &[f64]) -> Result<Vec<f64>> {
    let alt = gns_alt_matrix(z, beta)?;
    let k = complex(&d_coth(beta)?) + i_times(&j_matrix(beta.len()));
    let (vals, vecs) = linalg::hermitian_eigen(&k);
    let root_inv = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| C64::new(1.0 / x.sqrt(), 0.0)),
    ));
    let k_inv_sqrt = &vecs * root_inv * vecs.adjoint();
    Ok(linalg::hermitian_eigen(&(&k_inv_sqrt * alt * &k_inv_sqrt)).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    pub temperature_tol: f64,
    pub rank_tol: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            temperature_tol: crate::williamson::DEFAULT_TEMPERATURE_TOL,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// A singularity test: `ratio` is the relevant smallest magnitude relative
/// to the largest, compared against `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityCheck {
    pub ratio: f64,
    pub threshold: f64,
    pub singular: bool,
    pub borderline: bool,
}

impl SingularityCheck {
    pub fn new(ratio: f64, threshold: f64) -> Self {
        Self {
            ratio,
            threshold,
            singular: ratio <= threshold,
            borderline: ratio > threshold / CROSS_CHECK_BAND && ratio < threshold * CROSS_CHECK_BAND,
        }
    }
}

fn min_ratio(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(0.0_f64, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapDiagnostics {
    /// Smallest singular value of `𝐙ᵀ𝐃_csch + 𝐃_csch𝐙`, relative.
    pub kms_form_singular: SingularityCheck,
    /// Smallest eigenvalue modulus of the KMS gap matrix, relative.
    pub kms_matrix_singular: SingularityCheck,
    /// Smallest eigenvalue modulus of the alternative GNS matrix, relative.
    pub gns_alt_singular: SingularityCheck,
    /// Smallest eigenvalue modulus of the GNS gap matrix, relative.
    pub gns_matrix_singular: SingularityCheck,
    /// `‖kms_form_operator − (Z^♯D_csch + D_cschZ)‖`, scale-normalized.
    pub form_identity_residual: f64,
    /// `‖kms_gap_matrix − (𝐙 + dual drift)‖`, scale-normalized.
    pub dual_drift_residual: f64,
    pub gns_alt_hermitian_residual: f64,
    pub gns_alt_max_eigenvalue: f64,
    pub max_imaginary_part: f64,
    pub max_real_part: f64,
    pub kms_criteria_agree: bool,
    pub gns_criteria_agree: bool,
    pub gns_implies_kms: bool,
    pub borderline: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub beta: Vec<f64>,
    pub partition: TemperaturePartition,
    pub kms_matrix: DMatrix<f64>,
    pub kms_eigenvalues: Vec<C64>,
    pub gns_matrix: CMatrix,
    pub gns_eigenvalues: Vec<C64>,
    pub gns_alt_matrix: CMatrix,
    pub gns_alt_eigenvalues: Vec<f64>,
    pub kms_form: RealLinearOp,
    pub kms: KmsVerdict,
    pub gns: GnsVerdict,
    /// First-order restricted gap values; `None` when the gap does not exist.
    pub kms_gap_first_order: Option<f64>,
    pub gns_gap_first_order: Option<f64>,
    pub diagnostics: GapDiagnostics,
    pub warnings: Vec<String>,
}

fn sorted_by_re(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Full gap analysis of a standardized generator.
pub fn gap_report(std: &StandardizedGenerator, options: &GapOptions) -> Result<GapReport> {
    let beta = std.beta.clone();
    let z = std.drift();
    let (u, v) = (std.params_tilde.u(), std.params_tilde.v());
    let partition = temperature_partition(&beta, options.temperature_tol);

    let kms_matrix = kms_gap_matrix(&z, &beta)?;
    let gns_matrix = gns_gap_matrix(&z, &beta)?;
    let gns_alt = gns_alt_matrix(&z, &beta)?;
    let kms_eigenvalues = sorted_by_re(linalg::eigenvalues_real(&kms_matrix)?);
    let gns_eigenvalues = sorted_by_re(linalg::eigenvalues_complex(&gns_matrix)?);
    let (gns_alt_eigenvalues, _) = linalg::hermitian_eigen(&gns_alt);

    let kms = kms_gap_exists(u, v, &partition, options.rank_tol)?;
    let gns = gns_gap_exists(u, v, options.rank_tol)?;

    let form = kms_form_operator(u, v, &beta)?;
    let sym = kms_symmetric_matrix(&z, &beta)?;
    let form_identity_residual = linalg::rel_diff(&form.to_matrix(), &sym);
    let dual = dual_drift(&z, &beta)?;
    let dual_drift_residual = linalg::rel_diff(&kms_matrix, &(z.to_matrix() + dual.to_matrix()));

    let kms_form_singular = SingularityCheck::new(
        min_ratio(linalg::singular_values_real(&sym).into_iter()),
        options.rank_tol,
    );
    let kms_matrix_singular =
        SingularityCheck::new(min_ratio(kms_eigenvalues.iter().map(|z| z.norm())), EIGEN_ZERO_TOL);
    let gns_alt_singular = SingularityCheck::new(
        min_ratio(gns_alt_eigenvalues.iter().map(|x| x.abs())),
        options.rank_tol,
    );
    let gns_matrix_singular =
        SingularityCheck::new(min_ratio(gns_eigenvalues.iter().map(|z| z.norm())), EIGEN_ZERO_TOL);

    let kms_borderline = kms.borderline || kms_form_singular.borderline || kms_matrix_singular.borderline;
    let gns_borderline = gns.borderline || gns_alt_singular.borderline || gns_matrix_singular.borderline;
    let kms_criteria_agree =
        kms.exists == !kms_form_singular.singular && kms.exists == !kms_matrix_singular.singular;
    let gns_criteria_agree =
        gns.exists == !gns_alt_singular.singular && gns.exists == !gns_matrix_singular.singular;

    let all_eigs = kms_eigenvalues.iter().chain(gns_eigenvalues.iter());
    let scale = all_eigs.clone().fold(1.0_f64, |a, z| a.max(z.norm()));
    let max_imaginary_part = all_eigs.clone().fold(0.0_f64, |a, z| a.max(z.im.abs())) / scale;
    let max_real_part = all_eigs.fold(f64::NEG_INFINITY, |a, z| a.max(z.re));

    let alt_scale = gns_alt.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
    let gns_alt_hermitian_residual =
        (&gns_alt - gns_alt.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm())) / alt_scale;

    let kms_gap_first_order = if kms.exists {
        let e = kms_gap_eigenvalues_symmetric(&z, &beta)?;
        Some((-0.5 * e[e.len() - 1]).max(0.0))
    } else {
        None
    };
    let gns_gap_first_order = if gns.exists {
        let e = gns_gap_eigenvalues_hermitian(&z, &beta)?;
        Some((-0.5 * e[e.len() - 1]).max(0.0))
    } else {
        None
    };

    let mut warnings = partition.warnings.clone();
    if kms.borderline {
        warnings.push("KMS rank decision is borderline: a singular value lies within a factor 10 of the threshold".into());
    }
    if gns.borderline {
        warnings.push("GNS rank decision is borderline: a singular value lies within a factor 10 of the threshold".into());
    }
    if !kms_criteria_agree && !kms_borderline {
        warnings.push("KMS existence criteria disagree".into());
    }
    if !gns_criteria_agree && !gns_borderline {
        warnings.push("GNS existence criteria disagree".into());
    }

    let diagnostics = GapDiagnostics {
        kms_form_singular,
        kms_matrix_singular,
        gns_alt_singular,
        gns_matrix_singular,
        form_identity_residual,
        dual_drift_residual,
        gns_alt_hermitian_residual,
        gns_alt_max_eigenvalue: gns_alt_eigenvalues[gns_alt_eigenvalues.len() - 1],
        max_imaginary_part,
        max_real_part,
        kms_criteria_agree,
        gns_criteria_agree,
        gns_implies_kms: !gns.exists || kms.exists,
        borderline: kms_borderline || gns_borderline,
    };

    Ok(GapReport {
        beta,
        partition,
        kms_matrix,
        kms_eigenvalues,
        gns_matrix,
        gns_eigenvalues,
        gns_alt_matrix: gns_alt,
        gns_alt_eigenvalues,
        kms_form: form,
        kms,
        gns,
        kms_gap_first_order,
        gns_gap_first_order,
        diagnostics,
        warnings,
    })
}

/// Both first-order gap values, failing if either gap does not exist.
pub fn gap_values(report: &GapReport) -> Result<(f64, f64)> {
    let kms = first_order_gap(&report.kms_eigenvalues, report.kms.exists, Embedding::Kms)?;
    let gns = first_order_gap(&report.gns_eigenvalues, report.gns.exists, Embedding::Gns)?;
    Ok((kms, gns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::drift;
    use crate::models::{self, BosonChainSpec};
    use crate::standardize::standardize;

    fn ln4() -> f64 {
        4.0_f64.ln()
    }

    fn ou() -> StandardizedGenerator {
        standardize(&models::thermal_one_mode(ln4()).unwrap(), 1e-9).unwrap()
    }

    #[test]
    fn ou_gap_matrices() {
        let st = ou();
        let z = st.drift();
        let b = [ln4()];
        let id = DMatrix::<f64>::identity(2, 2);
        assert!((kms_gap_matrix(&z, &b).unwrap() + &id).amax() < 1e-14);
        let g = gns_gap_matrix(&z, &b).unwrap();
        assert!((g + complex(&id)).iter().all(|x| x.norm() < 1e-14));
        let (alt, _) = linalg::hermitian_eigen(&gns_alt_matrix(&z, &b).unwrap());
        assert!((alt[0] + 8.0 / 3.0).abs() < 1e-14);
        assert!((alt[1] + 2.0 / 3.0).abs() < 1e-14);
        let dual = dual_drift(&z, &b).unwrap();
        assert!((dual.linear_part()[(0, 0)] - C64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ou_form_operator_two_paths() {
        let st = ou();
        let f = kms_form_operator(st.params_tilde.u(), st.params_tilde.v(), &[ln4()]).unwrap();
        assert!((f.linear_part()[(0, 0)] - C64::new(-4.0 / 3.0, 0.0)).norm() < 1e-14);
        let sym = kms_symmetric_matrix(&st.drift(), &[ln4()]).unwrap();
        assert!((f.to_matrix() - sym).amax() < 1e-14);
    }

    #[test]
    fn ou_report() {
        let r = gap_report(&ou(), &GapOptions::default()).unwrap();
        assert!(r.kms.exists && r.gns.exists);
        assert!((r.kms_gap_first_order.unwrap() - 0.5).abs() < 1e-12);
        assert!((r.gns_gap_first_order.unwrap() - 0.5).abs() < 1e-12);
        let (k, g) = gap_values(&r).unwrap();
        assert!((k - 0.5).abs() < 1e-12 && (g - 0.5).abs() < 1e-12);
        assert!(r.diagnostics.kms_criteria_agree && r.diagnostics.gns_criteria_agree);
    }

    #[test]
    fn zero_kraus_gives_zero_operators() {
        let u = CMatrix::zeros(2, 2);
        let b = [1.0, 2.0];
        assert_eq!(kms_form_operator(&u, &u, &b).unwrap().max_abs(), 0.0);
        assert_eq!(a_t_operator(&u, &u, &b, 3.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn a_t_at_zero_and_integral() {
        let p = models::boson_chain_params(&BosonChainSpec::reference()).unwrap();
        let st = standardize(&p, 1e-9).unwrap();
        let (u, v) = (st.params_tilde.u(), st.params_tilde.v());
        let a0 = a_t_operator(u, v, &st.beta, 0.0).unwrap();
        assert_eq!(a0.linear_part(), &u.conjugate());
        assert_eq!(a0.antilinear_part(), v);
        assert!(a_t_operator(u, v, &st.beta, -1.0).is_err());

        let integral = a_t_integral(u, v, &st.beta, a_t_horizon(&st.beta)).unwrap();
        let form = kms_form_operator(u, v, &st.beta).unwrap();
        assert!(integral.distance(&form) < 1e-6);
    }

    #[test]
    fn example_without_kms_gap() {
        let p = models::two_mode_example_params(1.0, 2.0, 1.0, 0.0, 2.0).unwrap();
        let st = standardize(&p, 1e-9).unwrap();
        let r = gap_report(&st, &GapOptions::default()).unwrap();
        assert_eq!(r.partition.classes, vec![vec![0, 1]]);
        assert!(!r.kms.exists);
        assert_eq!(r.kms.classes[0].kernel_dim, 1);
        assert!(r.kms_gap_first_order.is_none());
        assert!(matches!(gap_values(&r), Err(Error::NoGap { embedding: "KMS" })));
        assert!(r.diagnostics.kms_form_singular.singular);
        assert!(r.diagnostics.kms_criteria_agree);

        // Equal temperatures: the form is a multiple of Z^♯ + Z.
        let z = drift(&p);
        let sym = kms_symmetric_matrix(&z, &[ln4(), ln4()]).unwrap();
        let zm = z.to_matrix();
        assert!((sym - (zm.transpose() + zm) * (4.0 / 3.0)).amax() < 1e-13);
    }

    #[test]
    fn boson_chain_verdicts() {
        let p = models::boson_chain_params(&BosonChainSpec::reference()).unwrap();
        let st = standardize(&p, 1e-9).unwrap();
        let r = gap_report(&st, &GapOptions::default()).unwrap();
        assert_eq!(r.partition.classes.len(), 3);
        assert!(r.kms.exists);
        assert!(!r.gns.exists);
        assert!(r.diagnostics.kms_criteria_agree && r.diagnostics.gns_criteria_agree);
        assert!(r.diagnostics.form_identity_residual < 1e-9);
        assert!(r.diagnostics.dual_drift_residual < 1e-12);
        assert!(r.diagnostics.max_imaginary_part < 1e-8);
        assert!(r.diagnostics.gns_alt_max_eigenvalue < 1e-9);
    }

    #[test]
    fn gns_rank_examples() {
        let (gm, gp) = models::thermal_rates(ln4()).unwrap();
        let u = CMatrix::from_column_slice(2, 1, &[C64::new(0.0, 0.0), C64::new(gp, 0.0)]);
        let v = CMatrix::from_column_slice(2, 1, &[C64::new(gm, 0.0), C64::new(0.0, 0.0)]);
        assert!(gns_gap_exists(&u, &v, 1e-9).unwrap().exists);
        let w = CMatrix::from_fn(4, 2, |r, c| C64::new((r + 2 * c) as f64, 1.0));
        assert!(!gns_gap_exists(&w, &w.conjugate(), 1e-9).unwrap().exists);
    }

    #[test]
    fn single_mode_always_has_kms_gap() {
        let u = CMatrix::from_element(1, 1, C64::new(0.0, 0.3));
        let v = CMatrix::zeros(1, 1);
        let part = temperature_partition(&[0.7], 1e-8);
        assert!(kms_gap_exists(&u, &v, &part, 1e-9).unwrap().exists);
    }

    #[test]
    fn bad_temperatures_rejected() {
        let z = RealLinearOp::identity(1).scale(-0.5);
        assert!(matches!(kms_gap_matrix(&z, &[0.0]), Err(Error::BadTemperature(_))));
        assert!(gns_gap_matrix(&z, &[-1.0]).is_err());
        assert!(gns_alt_matrix(&z, &[f64::INFINITY]).is_err());
        assert!(dual_drift(&z, &[1.0, 2.0]).is_err());
    }
}
