//! Machine-readable reports. Every field is plain data so that the JSON form
//! parses back into the same report.

use gqms::fuzz::FuzzSummary;
use gqms::gap::{GapDiagnostics, GnsVerdict, KmsVerdict};
use gqms::generator::{GaussianStateParams, StabilityReport};
use gqms::io::{matrix_to_rows, real_rows, vector_to_entries, ComplexEntry, GeneratorFile};
use gqms::models::{BosonChainClosedForm, BosonChainSpec};
use gqms::pipeline::{Analysis, AnalysisOptions};
use gqms::realop::C64;
use gqms::williamson::TemperaturePartition;
use serde::{Deserialize, Serialize};

pub const TOOL_NAME: &str = "gqms";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub mean: Vec<ComplexEntry>,
    pub covariance: Vec<Vec<f64>>,
    pub validity_min_eigenvalue: f64,
}

impl StateReport {
    pub fn new(s: &GaussianStateParams) -> Self {
        Self {
            mean: vector_to_entries(&s.mean),
            covariance: real_rows(&s.covariance_matrix()),
            validity_min_eigenvalue: s.validity_min_eigenvalue(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilliamsonReport {
    pub nu: Vec<f64>,
    pub beta: Vec<f64>,
    pub partition: TemperaturePartition,
    pub reconstruction_residual: f64,
    pub symplectic_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub m1: Vec<Vec<ComplexEntry>>,
    pub m2: Vec<Vec<ComplexEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedReport {
    pub params: GeneratorFile,
    pub frame: FrameReport,
    pub mean_removed: Vec<ComplexEntry>,
    pub zeta_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmsSection {
    pub exists: bool,
    pub criterion: String,
    pub verdict: KmsVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnsSection {
    pub exists: bool,
    pub criterion: String,
    pub verdict: GnsVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSection {
    pub kms_matrix: Vec<Vec<f64>>,
    pub kms_eigenvalues: Vec<ComplexEntry>,
    pub gns_matrix: Vec<Vec<ComplexEntry>>,
    pub gns_eigenvalues: Vec<ComplexEntry>,
    pub gns_alt_matrix: Vec<Vec<ComplexEntry>>,
    pub gns_alt_eigenvalues: Vec<f64>,
    pub kms: KmsSection,
    pub gns: GnsSection,
    pub kms_gap_first_order: Option<f64>,
    pub gns_gap_first_order: Option<f64>,
    pub diagnostics: GapDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub tolerances: AnalysisOptions,
    pub seed: Option<u64>,
    pub d: usize,
    pub m: usize,
    pub stability: StabilityReport,
    pub lyapunov_residual: f64,
    pub invariant_state: StateReport,
    pub williamson: WilliamsonReport,
    pub standardized: StandardizedReport,
    pub gap: GapSection,
    pub warnings: Vec<String>,
}

fn entries(v: &[C64]) -> Vec<ComplexEntry> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub const KMS_CRITERION: &str = "joint kernel of U and V columns within each temperature class";
pub const GNS_CRITERION: &str = "rank of the stacked noise matrices";

impl AnalysisReport {
    pub fn new(a: &Analysis, options: &AnalysisOptions, seed: Option<u64>) -> Self {
        let st = &a.standardized;
        let w = &st.williamson;
        let g = &a.gap;
        let s = a.invariant.covariance_matrix();
        Self {
            tool: ToolInfo::current(),
            tolerances: *options,
            seed,
            d: a.params.d(),
            m: a.params.m(),
            stability: a.stability,
            lyapunov_residual: a.lyapunov_residual,
            invariant_state: StateReport::new(&a.invariant),
            williamson: WilliamsonReport {
                nu: st.nu.clone(),
                beta: st.beta.clone(),
                partition: g.partition.clone(),
                reconstruction_residual: w.reconstruction_residual(&s),
                symplectic_residual: w.symplectic_residual(),
            },
            standardized: StandardizedReport {
                params: GeneratorFile::from_params(&st.params_tilde),
                frame: FrameReport {
                    m1: matrix_to_rows(&st.m_parts.m1),
                    m2: matrix_to_rows(&st.m_parts.m2),
                },
                mean_removed: vector_to_entries(&st.mean_removed),
                zeta_residual: st.zeta_residual,
            },
            gap: GapSection {
                kms_matrix: real_rows(&g.kms_matrix),
                kms_eigenvalues: entries(&g.kms_eigenvalues),
                gns_matrix: matrix_to_rows(&g.gns_matrix),
                gns_eigenvalues: entries(&g.gns_eigenvalues),
                gns_alt_matrix: matrix_to_rows(&g.gns_alt_matrix),
                gns_alt_eigenvalues: g.gns_alt_eigenvalues.clone(),
                kms: KmsSection {
                    exists: g.kms.exists,
                    criterion: KMS_CRITERION.into(),
                    verdict: g.kms.clone(),
                },
                gns: GnsSection {
                    exists: g.gns.exists,
                    criterion: GNS_CRITERION.into(),
                    verdict: g.gns.clone(),
                },
                kms_gap_first_order: g.kms_gap_first_order,
                gns_gap_first_order: g.gns_gap_first_order,
                diagnostics: g.diagnostics.clone(),
            },
            warnings: g.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSection {
    pub spec: BosonChainSpec,
    pub lambda: f64,
    pub mu: f64,
    pub r: f64,
    pub covariance: Vec<Vec<f64>>,
    pub symplectic_eigenvalues: Vec<f64>,
    pub pipeline_symplectic_eigenvalues: Vec<f64>,
    pub final_betas: Vec<f64>,
    pub pipeline_betas: Vec<f64>,
    pub covariance_deviation: f64,
    pub symplectic_eigenvalue_deviation: f64,
    pub beta_deviation: f64,
    pub max_deviation: f64,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl ClosedFormSection {
    pub fn new(spec: BosonChainSpec, cf: &BosonChainClosedForm, a: &Analysis) -> Self {
        let st = &a.standardized;
        let covariance_deviation = (&cf.s_full - a.invariant.covariance_matrix()).amax();
        let symplectic_eigenvalue_deviation = max_abs_diff(&cf.symplectic_eigenvalues, &st.nu);
        let beta_deviation = max_abs_diff(&cf.final_betas, &st.beta);
        Self {
            spec,
            lambda: cf.lambda,
            mu: cf.mu,
            r: cf.r,
            covariance: real_rows(&cf.s_full),
            symplectic_eigenvalues: cf.symplectic_eigenvalues.to_vec(),
            pipeline_symplectic_eigenvalues: st.nu.clone(),
            final_betas: cf.final_betas.to_vec(),
            pipeline_betas: st.beta.clone(),
            covariance_deviation,
            symplectic_eigenvalue_deviation,
            beta_deviation,
            max_deviation: covariance_deviation
                .max(symplectic_eigenvalue_deviation)
                .max(beta_deviation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BosonChainReport {
    pub analysis: AnalysisReport,
    pub closed_form: ClosedFormSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub tool: ToolInfo,
    pub tolerances: AnalysisOptions,
    pub summary: FuzzSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRow {
    pub t: f64,
    pub mean: Vec<ComplexEntry>,
    pub covariance: Vec<Vec<f64>>,
    /// `‖S_t − S_∞‖_F`; absent when the drift is not stable.
    pub distance_to_invariant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub tool: ToolInfo,
    pub spectral_abscissa: f64,
    pub rows: Vec<EvolutionRow>,
    pub fit: Option<DecayFit>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::to_json;
    use gqms::models;
    use gqms::pipeline::analyze;

    #[test]
    fn analysis_report_round_trips() {
        let options = AnalysisOptions::default();
        for p in [
            models::boson_chain_params(&BosonChainSpec::reference()).unwrap(),
            models::two_mode_example_params(1.0, 2.0, 1.0, 0.0, 2.0).unwrap(),
        ] {
            let report = AnalysisReport::new(&analyze(&p, &options).unwrap(), &options, Some(5));
            let text = to_json(&report);
            let back: AnalysisReport = serde_json::from_str(&text).unwrap();
            assert_eq!(back, report);
            assert_eq!(to_json(&back), text);
        }
    }
}
