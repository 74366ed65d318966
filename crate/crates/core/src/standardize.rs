//! Change of symplectic frame for generator parameters, and standardization:
//! the frame in which the invariant state is diagonal with mean zero.

use crate::error::{Error, Result};
use crate::generator::{self, GeneratorParams, INGEST_TOL};
use crate::realop::{inverse_symplectic, CMatrix, CVector, RealLinearOp, SymplecticParts, C64};
use crate::williamson::{self, WilliamsonResult};

const SYMPLECTIC_TOL: f64 = 1e-10;
const ZETA_RESIDUAL_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-10;

/// A generator in standard form together with the frame change that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedGenerator {
    pub params_tilde: GeneratorParams,
    /// `M = G⁻¹`.
    pub m_parts: SymplecticParts,
    pub beta: Vec<f64>,
    pub nu: Vec<f64>,
    pub mean_removed: CVector,
    pub williamson: WilliamsonResult,
    /// Size of `M^♯(ζ − 2Z^♯Jω)` before it was set to zero.
    pub zeta_residual: f64,
}

impl StandardizedGenerator {
    pub fn d(&self) -> usize {
        self.params_tilde.d()
    }

    pub fn drift(&self) -> RealLinearOp {
        generator::drift(&self.params_tilde)
    }

    pub fn diffusion(&self) -> RealLinearOp {
        generator::diffusion(&self.params_tilde)
    }
}

fn symplectic_op(m_parts: &SymplecticParts) -> Result<RealLinearOp> {
    let op = m_parts.to_op();
    let check = crate::realop::is_symplectic(&op, SYMPLECTIC_TOL);
    if !check.symplectic {
        return Err(Error::NotSymplectic {
            residual: check.residual,
        });
    }
    Ok(op)
}

fn transformed_matrices(
    params: &GeneratorParams,
    m_parts: &SymplecticParts,
) -> (CMatrix, CMatrix, CMatrix, CMatrix) {
    let (m1, m2) = (&m_parts.m1, &m_parts.m2);
    let (om, ka) = (params.omega(), params.kappa());
    let (u, v) = (params.u(), params.v());
    let m1a = m1.adjoint();
    let m2t = m2.transpose();
    let (m1c, m2c) = (m1.conjugate(), m2.conjugate());
    let omt = om.transpose();
    let kaa = ka.adjoint();

    let omega = &m1a * om * m1 + &m2t * &omt * &m2c + &m1a * ka * &m2c + &m2t * &kaa * m1;
    let kappa = &m1a * om * m2 + &m2t * &omt * &m1c + &m1a * ka * &m1c + &m2t * &kaa * m2;
    let u_t = u * &m1c + v.conjugate() * m2;
    let v_t = u.conjugate() * m2 + v * &m1c;
    (omega, kappa, u_t, v_t)
}

fn check_frame_identities(
    params: &GeneratorParams,
    out: &GeneratorParams,
    m: &RealLinearOp,
) -> Result<()> {
    let m_inv = inverse_symplectic(m)?;
    let z = generator::drift(params);
    let c = generator::diffusion(params);
    let z_expected = m_inv.compose(&z)?.compose(m)?;
    let c_expected = m.sharp().compose(&c)?.compose(m)?;
    let scale = m.max_abs().powi(2).max(1.0);
    let dz = generator::drift(out).distance(&z_expected);
    let dc = generator::diffusion(out).distance(&c_expected);
    let worst = dz.max(dc);
    if worst > IDENTITY_TOL * scale {
        return Err(Error::numerical(
            "transformed drift or diffusion disagrees with the frame change",
            worst,
        ));
    }
    Ok(())
}

/// Rewrites the parameters in the frame `z ↦ Mz`: the new drift is
/// `M⁻¹ZM`, the new diffusion `M^♯CM`, and the linear term `M^♯ζ`.
pub fn transform_params(params: &GeneratorParams, m_parts: &SymplecticParts) -> Result<GeneratorParams> {
    if m_parts.dim() != params.d() {
        return Err(Error::DimensionMismatch(format!(
            "frame change acts on {} modes, generator has {}",
            m_parts.dim(),
            params.d()
        )));
    }
    let m = symplectic_op(m_parts)?;
    let (omega, kappa, u, v) = transformed_matrices(params, m_parts);
    let zeta = m.sharp().apply(params.zeta())?;
    let out = GeneratorParams::with_tolerance(omega, kappa, u, v, zeta, INGEST_TOL)?;
    check_frame_identities(params, &out, &m)?;
    Ok(out)
}

/// Standardizes a generator with stable drift and faithful invariant state.
pub fn standardize(params: &GeneratorParams, nu_tol: f64) -> Result<StandardizedGenerator> {
    let state = generator::invariant_state(params)?;
    let w = williamson::williamson(&state.covariance_matrix(), nu_tol)?;
    let m = RealLinearOp::from_matrix(&w.g_inv)?;
    let m_parts = SymplecticParts::from_op(m.clone(), SYMPLECTIC_TOL * w.g_inv.amax().powi(2).max(1.0))?;

    // ζ̃ = M^♯(ζ − 2Z^♯Jω) vanishes for the true invariant mean.
    let z = generator::drift(params);
    let jw = RealLinearOp::j(params.d()).apply(&state.mean)?;
    let shift = z.sharp().apply(&jw)? * C64::new(2.0, 0.0);
    let zeta_tilde = m.sharp().apply(&(params.zeta() - shift))?;
    let zeta_residual = zeta_tilde.norm();
    let zeta_scale = params.zeta().norm().max(1.0);
    if zeta_residual > ZETA_RESIDUAL_TOL * zeta_scale {
        return Err(Error::InconsistentMean {
            residual: zeta_residual,
        });
    }

    let (omega, kappa, u, v) = transformed_matrices(params, &m_parts);
    let params_tilde =
        GeneratorParams::with_tolerance(omega, kappa, u, v, CVector::zeros(params.d()), INGEST_TOL)?;
    check_frame_identities(&params.clone().with_zeta(CVector::zeros(params.d())), &params_tilde, &m)?;

    Ok(StandardizedGenerator {
        params_tilde,
        m_parts,
        beta: w.beta.clone(),
        nu: w.nu.clone(),
        mean_removed: state.mean,
        williamson: w,
        zeta_residual,
    })
}
