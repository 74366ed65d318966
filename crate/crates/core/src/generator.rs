//! GKSL parameter sets, the drift and diffusion operators they induce, the
//! invariant Gaussian state, and time evolution of Gaussian states.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::realop::{inner, j_matrix, stack, unstack, CMatrix, CVector, RealLinearOp, C64};

/// Tolerance for accepting nearly Hermitian `Ω` and nearly symmetric `κ`
/// on ingestion; accepted inputs are then symmetrized exactly.
pub const INGEST_TOL: f64 = 1e-9;

/// Quadrature tolerance for the time integrals.
pub const QUAD_TOL: f64 = 1e-10;

/// Parameter matrices of a Gaussian GKSL generator on `d` modes with `m`
/// Kraus operators: Hamiltonian parts `Ω` (Hermitian) and `κ` (symmetric),
/// Kraus coefficients `U`, `V` (`m × d`), and linear term `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    omega: CMatrix,
    kappa: CMatrix,
    u: CMatrix,
    v: CMatrix,
    zeta: CVector,
}

fn hermitian_residual(a: &CMatrix) -> f64 {
    let scale = a.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    (a - a.adjoint()).iter().fold(0.0_f64, |acc, z| acc.max(z.norm())) / scale
}

fn symmetric_residual(a: &CMatrix) -> f64 {
    let scale = a.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    (a - a.transpose()).iter().fold(0.0_f64, |acc, z| acc.max(z.norm())) / scale
}

impl GeneratorParams {
    /// Validates shapes and symmetries (within [`INGEST_TOL`]) and
    /// symmetrizes `Ω` and `κ`.
    pub fn new(
        omega: CMatrix,
        kappa: CMatrix,
        u: CMatrix,
        v: CMatrix,
        zeta: CVector,
    ) -> Result<Self> {
        Self::with_tolerance(omega, kappa, u, v, zeta, INGEST_TOL)
    }

    pub fn with_tolerance(
        omega: CMatrix,
        kappa: CMatrix,
        u: CMatrix,
        v: CMatrix,
        zeta: CVector,
        tol: f64,
    ) -> Result<Self> {
        let d = omega.nrows();
        if d == 0 {
            return Err(Error::InvalidParameter("mode count must be positive".into()));
        }
        if omega.shape() != (d, d) || kappa.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "omega is {:?} and kappa is {:?}, expected {d}x{d}",
                omega.shape(),
                kappa.shape()
            )));
        }
        let m = u.nrows();
        if u.shape() != (m, d) || v.shape() != (m, d) {
            return Err(Error::DimensionMismatch(format!(
                "U is {:?} and V is {:?}, expected {m}x{d}",
                u.shape(),
                v.shape()
            )));
        }
        if m < 1 || m > 2 * d {
            return Err(Error::InvalidParameter(format!(
                "Kraus count m = {m} must satisfy 1 <= m <= 2d = {}",
                2 * d
            )));
        }
        if zeta.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "zeta has length {}, expected {d}",
                zeta.len()
            )));
        }
        let res = hermitian_residual(&omega);
        if res > tol {
            return Err(Error::NotSymmetric {
                what: "omega",
                property: "Hermitian",
                residual: res,
            });
        }
        let res = symmetric_residual(&kappa);
        if res > tol {
            return Err(Error::NotSymmetric {
                what: "kappa",
                property: "symmetric",
                residual: res,
            });
        }
        let half = C64::new(0.5, 0.0);
        Ok(Self {
            omega: (&omega + omega.adjoint()) * half,
            kappa: (&kappa + kappa.transpose()) * half,
            u,
            v,
            zeta,
        })
    }

    pub fn d(&self) -> usize {
        self.omega.nrows()
    }

    pub fn m(&self) -> usize {
        self.u.nrows()
    }

    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    pub fn kappa(&self) -> &CMatrix {
        &self.kappa
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn zeta(&self) -> &CVector {
        &self.zeta
    }

    pub fn with_zeta(mut self, zeta: CVector) -> Self {
        self.zeta = zeta;
        self
    }
}

/// The four Gram products `UᵀŪ, VᵀV̄, UᵀV, VᵀU`.
pub fn gram_products(u: &CMatrix, v: &CMatrix) -> [CMatrix; 4] {
    [
        u.transpose() * u.conjugate(),
        v.transpose() * v.conjugate(),
        u.transpose() * v,
        v.transpose() * u,
    ]
}

/// Drift operator `Z`.
pub fn drift(params: &GeneratorParams) -> RealLinearOp {
    let [uu, vv, uv, vu] = gram_products(&params.u, &params.v);
    let i = C64::new(0.0, 1.0);
    let half = C64::new(0.5, 0.0);
    let linear = (uu - vv) * half + &params.omega * i;
    let antilinear = (uv - vu) * half + &params.kappa * i;
    RealLinearOp::new(linear, antilinear).expect("Gram products share shape")
}

/// Diffusion operator `C`.
pub fn diffusion(params: &GeneratorParams) -> RealLinearOp {
    let [uu, vv, uv, vu] = gram_products(&params.u, &params.v);
    RealLinearOp::new(uu + vv, uv + vu).expect("Gram products share shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub spectral_abscissa: f64,
    pub margin: f64,
}

/// Stable iff the spectral abscissa of `𝐙` is below `−margin`.
pub fn is_stable(z: &RealLinearOp, margin: f64) -> Result<StabilityReport> {
    let abscissa = linalg::spectral_abscissa(&z.to_matrix())?;
    Ok(StabilityReport {
        stable: abscissa < -margin,
        spectral_abscissa: abscissa,
        margin,
    })
}

fn require_stable(zm: &DMatrix<f64>) -> Result<f64> {
    let abscissa = linalg::spectral_abscissa(zm)?;
    if abscissa >= 0.0 {
        return Err(Error::Unstable {
            abscissa,
            bound: 0.0,
        });
    }
    Ok(abscissa)
}

/// Solves `Z^♯S + SZ = −C` for the covariance operator `S`.
pub fn solve_lyapunov(z: &RealLinearOp, c: &RealLinearOp) -> Result<RealLinearOp> {
    let zm = z.to_matrix();
    let cm = c.to_matrix();
    if zm.shape() != cm.shape() || !zm.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "drift is {:?}, diffusion is {:?}",
            zm.shape(),
            cm.shape()
        )));
    }
    require_stable(&zm)?;
    let s = linalg::lyapunov_kron(&zm, &cm)?;
    let s = (&s + s.transpose()) * 0.5;
    let residual = lyapunov_residual(&zm, &s, &cm);
    if residual > 1e-8 {
        return Err(Error::numerical("Lyapunov residual too large", residual));
    }
    RealLinearOp::from_matrix(&s)
}

/// `‖𝐙ᵀ𝐒 + 𝐒𝐙 + 𝐂‖_max`, relative to `max(‖𝐂‖_max, ‖𝐙‖·‖𝐒‖)`.
pub fn lyapunov_residual(z: &DMatrix<f64>, s: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
    let r = z.transpose() * s + s * z + c;
    let scale = c.amax().max(z.amax() * s.amax()).max(f64::MIN_POSITIVE);
    r.amax() / scale
}

/// A Gaussian state: mean vector `ω` and covariance operator `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStateParams {
    pub mean: CVector,
    pub covariance: RealLinearOp,
}

impl GaussianStateParams {
    pub fn new(mean: CVector, covariance: RealLinearOp) -> Result<Self> {
        if !covariance.is_square() || covariance.dim() != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {}, covariance is {}x{}",
                mean.len(),
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        Ok(Self { mean, covariance })
    }

    /// The vacuum: zero mean, identity covariance.
    pub fn vacuum(d: usize) -> Self {
        Self {
            mean: CVector::zeros(d),
            covariance: RealLinearOp::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        self.covariance.to_matrix()
    }

    /// Smallest eigenvalue of the Hermitian matrix `𝐒 + i𝐉`.
    pub fn validity_min_eigenvalue(&self) -> f64 {
        let s = self.covariance_matrix();
        let j = j_matrix(self.dim());
        let h = CMatrixExt::from_real_imag(&s, &j);
        linalg::hermitian_eigen(&h).0[0]
    }

    /// Checks symmetry of `𝐒` and `𝐒 + i𝐉 ⪰ 0` within `tol`.
    pub fn check_valid(&self, tol: f64) -> Result<()> {
        let s = self.covariance_matrix();
        let sym = linalg::symmetry_residual(&s);
        if sym > 1e-12 {
            return Err(Error::InvalidCovariance {
                reason: "covariance matrix is not symmetric",
                residual: sym,
            });
        }
        let min = self.validity_min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidCovariance {
                reason: "S + iJ is not positive semidefinite",
                residual: -min,
            });
        }
        Ok(())
    }
}

pub(crate) struct CMatrixExt;

impl CMatrixExt {
    pub(crate) fn from_real_imag(re: &DMatrix<f64>, im: &DMatrix<f64>) -> CMatrix {
        CMatrix::from_fn(re.nrows(), re.ncols(), |r, c| C64::new(re[(r, c)], im[(r, c)]))
    }

    pub(crate) fn from_real(re: &DMatrix<f64>) -> CMatrix {
        re.map(|x| C64::new(x, 0.0))
    }
}

/// Unique invariant Gaussian state of a generator with stable drift:
/// `ω = (i/2)(Z^♯)⁻¹ζ` and `S` from the Lyapunov equation.
pub fn invariant_state(params: &GeneratorParams) -> Result<GaussianStateParams> {
    let z = drift(params);
    let c = diffusion(params);
    let covariance = solve_lyapunov(&z, &c)?;
    let zt = z.to_matrix().transpose();
    let x = zt
        .lu()
        .solve(&stack(&params.zeta))
        .ok_or_else(|| Error::numerical("drift adjoint is singular", 0.0))?;
    let mean = unstack(&x)? * C64::new(0.0, 0.5);
    let state = GaussianStateParams { mean, covariance };
    state.check_valid(1e-9)?;
    Ok(state)
}

fn stable_abscissa(params: &GeneratorParams) -> Result<Option<f64>> {
    let a = linalg::spectral_abscissa(&drift(params).to_matrix())?;
    Ok((a < 0.0).then_some(a))
}

/// Evolves a Gaussian state for time `t`. Uses the closed form relative to
/// the invariant state when the drift is stable, quadrature otherwise.
pub fn evolve_state(
    params: &GeneratorParams,
    state0: &GaussianStateParams,
    t: f64,
) -> Result<GaussianStateParams> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if stable_abscissa(params)?.is_some() {
        evolve_state_closed_form(params, state0, t)
    } else {
        evolve_state_quadrature(params, state0, t)
    }
}

fn check_state_dim(params: &GeneratorParams, state0: &GaussianStateParams) -> Result<()> {
    if state0.dim() != params.d() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} modes, generator has {}",
            state0.dim(),
            params.d()
        )));
    }
    Ok(())
}

/// `S_t = e^{tZ^♯}(S₀ − S_∞)e^{tZ} + S_∞`, and the analogous relaxation of
/// the mean towards the invariant mean. Requires a stable drift.
pub fn evolve_state_closed_form(
    params: &GeneratorParams,
    state0: &GaussianStateParams,
    t: f64,
) -> Result<GaussianStateParams> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    check_state_dim(params, state0)?;
    let inv = invariant_state(params)?;
    let zm = drift(params).to_matrix();
    let e = linalg::expm(&(&zm * t));
    let s0 = state0.covariance_matrix();
    let s_inf = inv.covariance_matrix();
    let st = e.transpose() * (&s0 - &s_inf) * &e + &s_inf;
    let st = (&st + st.transpose()) * 0.5;

    // The mean is ω_t = 𝐉 v_t with v' = 𝐙ᵀv + ζ/2 and v₀ = 𝐉ᵀω₀.
    let j = j_matrix(params.d());
    let v0 = j.transpose() * stack(&state0.mean);
    let v_inf = j.transpose() * stack(&inv.mean);
    let vt = e.transpose() * (v0 - &v_inf) + v_inf;
    let mean = unstack(&(&j * vt))?;
    GaussianStateParams::new(mean, RealLinearOp::from_matrix(&st)?)
}

/// Direct quadrature of the evolution integrals; valid for any drift.
pub fn evolve_state_quadrature(
    params: &GeneratorParams,
    state0: &GaussianStateParams,
    t: f64,
) -> Result<GaussianStateParams> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    check_state_dim(params, state0)?;
    let n = 2 * params.d();
    let zm = drift(params).to_matrix();
    let cm = diffusion(params).to_matrix();
    let zeta = stack(&params.zeta);
    let integrand = |s: f64| {
        let e = linalg::expm(&(&zm * s));
        let et = e.transpose();
        let mut out = linalg::matrix_to_vec(&(&et * &cm * &e));
        out.extend((&et * &zeta * 0.5).iter());
        out
    };
    let integral = linalg::integrate(integrand, 0.0, t, QUAD_TOL)?;
    let (cov_part, mean_part) = integral.split_at(n * n);

    let e = linalg::expm(&(&zm * t));
    let st = e.transpose() * state0.covariance_matrix() * &e + linalg::vec_to_matrix(cov_part, n, n);
    let st = (&st + st.transpose()) * 0.5;

    let j = j_matrix(params.d());
    let v0 = j.transpose() * stack(&state0.mean);
    let vt = e.transpose() * v0 + DVector::from_column_slice(mean_part);
    let mean = unstack(&(&j * vt))?;
    GaussianStateParams::new(mean, RealLinearOp::from_matrix(&st)?)
}

/// A point on a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSample {
    pub t: f64,
    pub state: GaussianStateParams,
}

pub fn trajectory(
    params: &GeneratorParams,
    state0: &GaussianStateParams,
    times: &[f64],
) -> Result<Vec<EvolutionSample>> {
    times
        .iter()
        .map(|&t| {
            Ok(EvolutionSample {
                t,
                state: evolve_state(params, state0, t)?,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `t`.
pub fn fit_log_slope(times: &[f64], values: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &y)| y > 0.0 && y.is_finite())
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(
            "decay fit needs at least two positive samples".into(),
        ));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("decay fit needs distinct times".into()));
    }
    Ok(sxy / sxx)
}

/// Scalar factors of `T_t(W(z)) = exp(log_modulus + i·phase)·W(z_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylAction {
    pub log_modulus: f64,
    pub phase: f64,
    pub zt: CVector,
}

pub fn weyl_action(params: &GeneratorParams, z: &CVector, t: f64) -> Result<WeylAction> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if z.len() != params.d() {
        return Err(Error::DimensionMismatch(format!(
            "z has length {}, generator has {} modes",
            z.len(),
            params.d()
        )));
    }
    let zm = drift(params).to_matrix();
    let cm = diffusion(params).to_matrix();
    let zeta = stack(&params.zeta);
    let z0 = stack(z);
    let integrand = |s: f64| {
        let w = linalg::expm(&(&zm * s)) * &z0;
        vec![-0.5 * w.dot(&(&cm * &w)), zeta.dot(&w)]
    };
    let v = linalg::integrate(integrand, 0.0, t, QUAD_TOL)?;
    let zt = unstack(&(linalg::expm(&(&zm * t)) * z0))?;
    Ok(WeylAction {
        log_modulus: v[0],
        phase: v[1],
        zt,
    })
}

/// Coefficients of `ℒ(p(z)) = p(Zz) − Re⟨ζ, z⟩/√2`.
pub fn momentum_image(params: &GeneratorParams, z: &CVector) -> Result<(CVector, f64)> {
    let zz = drift(params).apply(z)?;
    let scalar = -inner(&params.zeta, z).re / std::f64::consts::SQRT_2;
    Ok((zz, scalar))
}

/// Whether two Kraus coefficient pairs have the same four Gram products,
/// i.e. give the same drift and diffusion for fixed `Ω`, `κ`.
pub fn same_noise_part(
    u: &CMatrix,
    v: &CMatrix,
    u2: &CMatrix,
    v2: &CMatrix,
    tol: f64,
) -> Result<bool> {
    let d = u.ncols();
    if v.ncols() != d || u2.ncols() != d || v2.ncols() != d {
        return Err(Error::DimensionMismatch(
            "all coefficient matrices must have the same column count".into(),
        ));
    }
    if u.nrows() != v.nrows() || u2.nrows() != v2.nrows() {
        return Err(Error::DimensionMismatch(
            "U and V must have the same row count".into(),
        ));
    }
    let a = gram_products(u, v);
    let b = gram_products(u2, v2);
    Ok(a.iter().zip(&b).all(|(x, y)| {
        let scale = x
            .iter()
            .chain(y.iter())
            .fold(1.0_f64, |acc, z| acc.max(z.norm()));
        (x - y).iter().all(|z| z.norm() <= tol * scale)
    }))
}
