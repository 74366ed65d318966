//! The full analysis chain: drift and diffusion, stability, invariant state,
//! Williamson form, standardization and the gap report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{self, GapOptions, GapReport, DEFAULT_RANK_TOL};
use crate::generator::{self, GaussianStateParams, GeneratorParams, StabilityReport};
use crate::realop::RealLinearOp;
use crate::standardize::{self, StandardizedGenerator};
use crate::williamson::{DEFAULT_NU_TOL, DEFAULT_TEMPERATURE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub stability_margin: f64,
    pub temperature_tol: f64,
    pub rank_tol: f64,
    pub nu_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            stability_margin: 1e-3,
            temperature_tol: DEFAULT_TEMPERATURE_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            nu_tol: DEFAULT_NU_TOL,
        }
    }
}

impl AnalysisOptions {
    pub fn gap_options(&self) -> GapOptions {
        GapOptions {
            temperature_tol: self.temperature_tol,
            rank_tol: self.rank_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub params: GeneratorParams,
    pub drift: RealLinearOp,
    pub diffusion: RealLinearOp,
    pub stability: StabilityReport,
    pub invariant: GaussianStateParams,
    /// `‖𝐙ᵀ𝐒 + 𝐒𝐙 + 𝐂‖`, relative.
    pub lyapunov_residual: f64,
    pub standardized: StandardizedGenerator,
    pub gap: GapReport,
}

pub fn analyze(params: &GeneratorParams, options: &AnalysisOptions) -> Result<Analysis> {
    let drift = generator::drift(params);
    let diffusion = generator::diffusion(params);
    let stability = generator::is_stable(&drift, options.stability_margin)?;
    if !stability.stable {
        return Err(Error::Unstable {
            abscissa: stability.spectral_abscissa,
            bound: -options.stability_margin,
        });
    }
    let invariant = generator::invariant_state(params)?;
    let lyapunov_residual = generator::lyapunov_residual(
        &drift.to_matrix(),
        &invariant.covariance_matrix(),
        &diffusion.to_matrix(),
    );
    let standardized = standardize::standardize(params, options.nu_tol)?;
    let gap = gap::gap_report(&standardized, &options.gap_options())?;
    Ok(Analysis {
        params: params.clone(),
        drift,
        diffusion,
        stability,
        invariant,
        lyapunov_residual,
        standardized,
        gap,
    })
}
