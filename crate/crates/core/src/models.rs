//! Built-in generators with closed-form references: a one-mode thermal
//! Ornstein–Uhlenbeck generator, the three-mode boson chain, and a two-mode
//! generator whose modes share one inverse temperature.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::GeneratorParams;
use crate::realop::{CMatrix, CVector, C64};
use crate::williamson::beta_from_nu;

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::BadTemperature(beta));
    }
    Ok(())
}

/// Thermal rates `(γ⁻, γ⁺) = (√(e^β/(e^β−1)), √(1/(e^β−1)))`.
pub fn thermal_rates(beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let em1 = beta.exp_m1();
    Ok(((beta.exp() / em1).sqrt(), (1.0 / em1).sqrt()))
}

/// One mode with `L₁ = γ⁻a`, `L₂ = γ⁺a†`, no Hamiltonian: drift `−½`,
/// diffusion `coth(β/2)`.
pub fn thermal_one_mode(beta: f64) -> Result<GeneratorParams> {
    let (gm, gp) = thermal_rates(beta)?;
    let r = |x: f64| C64::new(x, 0.0);
    GeneratorParams::new(
        CMatrix::zeros(1, 1),
        CMatrix::zeros(1, 1),
        CMatrix::from_column_slice(2, 1, &[r(0.0), r(gp)]),
        CMatrix::from_column_slice(2, 1, &[r(gm), r(0.0)]),
        CVector::zeros(1),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BosonChainSpec {
    pub omega: f64,
    pub beta1: f64,
    pub beta3: f64,
}

impl BosonChainSpec {
    pub fn new(omega: f64, beta1: f64, beta3: f64) -> Result<Self> {
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "chain coupling must be nonzero and finite, got {omega}"
            )));
        }
        check_beta(beta1)?;
        check_beta(beta3)?;
        if beta1 == beta3 {
            return Err(Error::InvalidParameter(format!(
                "end-mode inverse temperatures must differ, both are {beta1}"
            )));
        }
        Ok(Self {
            omega,
            beta1,
            beta3,
        })
    }

    /// `ω = 1`, `β₁ = ln 2`, `β₃ = ln 3`.
    pub fn reference() -> Self {
        Self {
            omega: 1.0,
            beta1: 2.0_f64.ln(),
            beta3: 3.0_f64.ln(),
        }
    }
}

/// Three modes coupled by `H = ω Σ (a_j a†_{j+1} + a†_j a_{j+1})`, with
/// thermal baths on modes 1 and 3.
pub fn boson_chain_params(spec: &BosonChainSpec) -> Result<GeneratorParams> {
    let spec = BosonChainSpec::new(spec.omega, spec.beta1, spec.beta3)?;
    let (g1m, g1p) = thermal_rates(spec.beta1)?;
    let (g3m, g3p) = thermal_rates(spec.beta3)?;
    let r = |x: f64| C64::new(x, 0.0);
    let mut u = CMatrix::zeros(4, 3);
    u[(1, 0)] = r(g1p);
    u[(3, 2)] = r(g3p);
    let mut v = CMatrix::zeros(4, 3);
    v[(0, 0)] = r(g1m);
    v[(2, 2)] = r(g3m);
    let mut omega = CMatrix::zeros(3, 3);
    for j in 0..2 {
        omega[(j, j + 1)] = r(spec.omega);
        omega[(j + 1, j)] = r(spec.omega);
    }
    GeneratorParams::new(omega, CMatrix::zeros(3, 3), u, v, CVector::zeros(3))
}

/// Closed-form invariant covariance and symplectic spectrum of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonChainClosedForm {
    pub s_full: DMatrix<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub r: f64,
    /// Descending.
    pub symplectic_eigenvalues: [f64; 3],
    /// In the order of `symplectic_eigenvalues`.
    pub final_betas: [f64; 3],
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

pub fn boson_chain_closed_form(spec: &BosonChainSpec) -> Result<BosonChainClosedForm> {
    let spec = BosonChainSpec::new(spec.omega, spec.beta1, spec.beta3)?;
    let w = spec.omega;
    let (c1, c3) = (coth(spec.beta1 / 2.0), coth(spec.beta3 / 2.0));
    let lambda = (c1 + c3) / 2.0;
    let mu = (c1 - c3) / 2.0;
    let den = 4.0 * w * w + 1.0;
    let r = (8.0 * w * w + 1.0).sqrt() / den;

    let mut s_delta = DMatrix::<f64>::zeros(6, 6);
    let diag = [-1.0, 0.0, 1.0];
    for j in 0..3 {
        s_delta[(j, j)] = -0.5 * diag[j];
        s_delta[(j + 3, j + 3)] = -0.5 * diag[j];
    }
    let upper = [[0.0, -w, 0.0], [w, 0.0, -w], [0.0, w, 0.0]];
    for (i, row) in upper.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            s_delta[(i, k + 3)] = x;
            s_delta[(i + 3, k)] = -x;
        }
    }
    s_delta *= 2.0 / den;
    let s_full = DMatrix::<f64>::identity(6, 6) * lambda + s_delta * mu;

    let mut nu = [
        (lambda + mu * r).abs(),
        lambda.abs(),
        (lambda - mu * r).abs(),
    ];
    nu.sort_by(|a, b| b.total_cmp(a));
    let final_betas = [beta_from_nu(nu[0])?, beta_from_nu(nu[1])?, beta_from_nu(nu[2])?];
    Ok(BosonChainClosedForm {
        s_full,
        lambda,
        mu,
        r,
        symplectic_eigenvalues: nu,
        final_betas,
    })
}

/// Two modes, one Kraus operator `v a₁ + u a₁† + v a₂ + u a₂†`, with
/// `κ = i uv (v²−u²)/(v²+u²) E` and `Ω = [[a, b], [b, c]]`.
pub fn two_mode_example_params(u: f64, v: f64, a: f64, b: f64, c: f64) -> Result<GeneratorParams> {
    if !(v > u && u > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need v > u > 0, got u = {u}, v = {v}"
        )));
    }
    if a == c {
        return Err(Error::InvalidParameter(format!(
            "diagonal Hamiltonian entries must differ, both are {a}"
        )));
    }
    let r = |x: f64| C64::new(x, 0.0);
    let k = u * v * (v * v - u * u) / (v * v + u * u);
    GeneratorParams::new(
        CMatrix::from_row_slice(2, 2, &[r(a), r(b), r(b), r(c)]),
        CMatrix::from_element(2, 2, C64::new(0.0, k)),
        CMatrix::from_element(1, 2, r(u)),
        CMatrix::from_element(1, 2, r(v)),
        CVector::zeros(2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{diffusion, drift, gram_products, invariant_state, is_stable};
    use crate::realop::RealLinearOp;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    fn real_diag(d: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            d.len(),
            d.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    #[test]
    fn thermal_rates_at_ln4() {
        let (gm, gp) = thermal_rates(4.0_f64.ln()).unwrap();
        assert!((gm * gm - 4.0 / 3.0).abs() < 1e-14);
        assert!((gp * gp - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn chain_gram_products() {
        let p = boson_chain_params(&BosonChainSpec::reference()).unwrap();
        let [uu, vv, uv, vu] = gram_products(p.u(), p.v());
        assert!(close(&(&uu - &vv), &real_diag(&[-1.0, 0.0, -1.0]), 1e-14));
        assert!(close(&(&uu + &vv), &real_diag(&[3.0, 0.0, 2.0]), 1e-14));
        assert!(uv.iter().chain(vu.iter()).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn chain_drift_and_diffusion_blocks() {
        let p = boson_chain_params(&BosonChainSpec::reference()).unwrap();
        let z = drift(&p).to_matrix();
        let c = diffusion(&p).to_matrix();
        let om = [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        let dg = [1.0, 0.0, 1.0];
        let cd = [3.0, 0.0, 2.0];
        for i in 0..3 {
            for k in 0..3 {
                let d = if i == k { -0.5 * dg[i] } else { 0.0 };
                assert!((z[(i, k)] - d).abs() < 1e-15);
                assert!((z[(i + 3, k + 3)] - d).abs() < 1e-15);
                assert!((z[(i, k + 3)] + om[i][k]).abs() < 1e-15);
                assert!((z[(i + 3, k)] - om[i][k]).abs() < 1e-15);
                let cc = if i == k { cd[i] } else { 0.0 };
                assert!((c[(i, k)] - cc).abs() < 1e-14);
                assert!((c[(i + 3, k + 3)] - cc).abs() < 1e-14);
                assert!(c[(i, k + 3)].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chain_closed_form_reference_numbers() {
        let cf = boson_chain_closed_form(&BosonChainSpec::reference()).unwrap();
        assert!((cf.lambda - 2.5).abs() < 1e-14);
        assert!((cf.mu - 0.5).abs() < 1e-14);
        assert!((cf.r - 0.6).abs() < 1e-15);
        for (a, b) in cf.symplectic_eigenvalues.iter().zip([2.8, 2.5, 2.2]) {
            assert!((a - b).abs() < 1e-14);
        }
        let expected = [(19.0_f64 / 9.0).ln(), (7.0_f64 / 3.0).ln(), (8.0_f64 / 3.0).ln()];
        for (a, b) in cf.final_betas.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn chain_closed_form_solves_lyapunov() {
        for spec in [
            BosonChainSpec::reference(),
            BosonChainSpec::new(-0.7, 0.3, 2.1).unwrap(),
            BosonChainSpec::new(2.5, 4.0, 1.0).unwrap(),
        ] {
            let p = boson_chain_params(&spec).unwrap();
            let s = invariant_state(&p).unwrap().covariance_matrix();
            let cf = boson_chain_closed_form(&spec).unwrap();
            assert!((s - &cf.s_full).amax() < 1e-9, "{spec:?}");
        }
    }

    #[test]
    fn chain_rejects_bad_specs() {
        assert!(BosonChainSpec::new(0.0, 1.0, 2.0).is_err());
        assert!(BosonChainSpec::new(1.0, 1.0, 1.0).is_err());
        assert!(BosonChainSpec::new(1.0, -1.0, 1.0).is_err());
        let bad = BosonChainSpec {
            omega: 1.0,
            beta1: 2.0,
            beta3: 2.0,
        };
        assert!(boson_chain_params(&bad).is_err());
    }

    #[test]
    fn two_mode_example_reference() {
        let p = two_mode_example_params(1.0, 2.0, 1.0, 0.0, 2.0).unwrap();
        assert_eq!((p.d(), p.m()), (2, 1));
        let z = drift(&p);
        assert!(is_stable(&z, 0.0).unwrap().stable);

        // Matrix identification read off the example display.
        let k = 2.0 * 3.0 / 5.0;
        let zm = z.to_matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!((zm[(i, j)] - (-1.5 - k)).abs() < 1e-14);
                assert!((zm[(i + 2, j + 2)] - (-1.5 + k)).abs() < 1e-14);
            }
        }
        assert!((zm[(0, 2)] + 1.0).abs() < 1e-15 && (zm[(3, 1)] - 2.0).abs() < 1e-15);

        let s = invariant_state(&p).unwrap().covariance;
        let expected = RealLinearOp::identity(2).scale(5.0 / 3.0);
        assert!(s.distance(&expected) < 1e-10);
    }

    #[test]
    fn two_mode_example_rejects_bad_inputs() {
        assert!(two_mode_example_params(2.0, 1.0, 1.0, 0.0, 2.0).is_err());
        assert!(two_mode_example_params(1.0, 2.0, 1.0, 0.0, 1.0).is_err());
    }
}
