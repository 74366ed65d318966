//! Output formatting: compact JSON with 17 significant digits, and
//! human-readable tables.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::report::{AnalysisReport, BosonChainReport, EvolutionReport, FuzzReport};

struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser).expect("report serializes");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn num(x: f64, precision: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e6).contains(&a) {
        format!("{x:.precision$e}")
    } else {
        format!("{x:.precision$}")
    }
}

fn complex(z: [f64; 2], p: usize) -> String {
    let sign = if z[1] < 0.0 { '-' } else { '+' };
    format!("{}{sign}{}i", num(z[0], p), num(z[1].abs(), p))
}

fn list(xs: &[f64], p: usize) -> String {
    let items: Vec<String> = xs.iter().map(|x| num(*x, p)).collect();
    format!("[{}]", items.join(", "))
}

fn complex_list(xs: &[[f64; 2]], p: usize) -> String {
    let items: Vec<String> = xs.iter().map(|z| complex(*z, p)).collect();
    format!("[{}]", items.join(", "))
}

fn matrix(out: &mut String, rows: &[Vec<f64>], p: usize, indent: &str) {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| num(*x, p)).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
    for r in cells {
        let line: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "{indent}{}", line.join("  "));
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn opt(x: Option<f64>, p: usize) -> String {
    x.map_or_else(|| "none".to_string(), |v| num(v, p))
}

pub fn analysis(r: &AnalysisReport, p: usize) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "{} {}  (d = {}, m = {})", r.tool.name, r.tool.version, r.d, r.m);
    let _ = writeln!(
        o,
        "tolerances: stability margin {}, temperature {}, rank {}",
        num(r.tolerances.stability_margin, p),
        num(r.tolerances.temperature_tol, p),
        num(r.tolerances.rank_tol, p)
    );
    let _ = writeln!(o, "\nstability");
    let _ = writeln!(o, "  spectral abscissa  {}", num(r.stability.spectral_abscissa, p));
    let _ = writeln!(o, "\ninvariant state");
    let _ = writeln!(o, "  mean               {}", complex_list(&r.invariant_state.mean, p));
    let _ = writeln!(o, "  lyapunov residual  {}", num(r.lyapunov_residual, p));
    let _ = writeln!(o, "  min eig of S + iJ  {}", num(r.invariant_state.validity_min_eigenvalue, p));
    let _ = writeln!(o, "  covariance");
    matrix(&mut o, &r.invariant_state.covariance, p, "    ");
    let w = &r.williamson;
    let _ = writeln!(o, "\nwilliamson");
    let _ = writeln!(o, "  symplectic eigenvalues  {}", list(&w.nu, p));
    let _ = writeln!(o, "  inverse temperatures    {}", list(&w.beta, p));
    let classes: Vec<String> = w
        .partition
        .classes
        .iter()
        .zip(&w.partition.representative_beta)
        .map(|(c, b)| format!("{c:?} at beta {}", num(*b, p)))
        .collect();
    let _ = writeln!(o, "  temperature classes     {}", classes.join("; "));
    let _ = writeln!(o, "  reconstruction residual {}", num(w.reconstruction_residual, p));
    let _ = writeln!(o, "  symplectic residual     {}", num(w.symplectic_residual, p));
    let g = &r.gap;
    let _ = writeln!(o, "\nspectral gaps");
    let _ = writeln!(o, "  KMS gap exists  {}  ({})", yes_no(g.kms.exists), g.kms.criterion);
    for c in &g.kms.verdict.classes {
        let _ = writeln!(o, "    class {:?}: kernel dimension {}", c.indices, c.kernel_dim);
    }
    let _ = writeln!(o, "  GNS gap exists  {}  ({}: {} of {})", yes_no(g.gns.exists), g.gns.criterion, g.gns.verdict.rank, g.gns.verdict.required_rank);
    let _ = writeln!(o, "  KMS first-order gap  {}", opt(g.kms_gap_first_order, p));
    let _ = writeln!(o, "  GNS first-order gap  {}", opt(g.gns_gap_first_order, p));
    let _ = writeln!(o, "  KMS gap matrix eigenvalues  {}", complex_list(&g.kms_eigenvalues, p));
    let _ = writeln!(o, "  GNS gap matrix eigenvalues  {}", complex_list(&g.gns_eigenvalues, p));
    let _ = writeln!(o, "  alternative GNS eigenvalues {}", list(&g.gns_alt_eigenvalues, p));
    let d = &g.diagnostics;
    let _ = writeln!(o, "  cross-checks: KMS criteria agree {}, GNS criteria agree {}, GNS implies KMS {}",
        yes_no(d.kms_criteria_agree), yes_no(d.gns_criteria_agree), yes_no(d.gns_implies_kms));
    let _ = writeln!(o, "  KMS form smallest relative singular value {}", num(d.kms_form_singular.ratio, p));
    if !r.warnings.is_empty() {
        let _ = writeln!(o, "\nwarnings");
        for w in &r.warnings {
            let _ = writeln!(o, "  {w}");
        }
    }
    o
}

pub fn boson_chain(r: &BosonChainReport, p: usize) -> String {
    let mut o = analysis(&r.analysis, p);
    let c = &r.closed_form;
    let _ = writeln!(o, "\nclosed form (omega {}, beta1 {}, beta3 {})", num(c.spec.omega, p), num(c.spec.beta1, p), num(c.spec.beta3, p));
    let _ = writeln!(o, "  lambda {}, mu {}, r {}", num(c.lambda, p), num(c.mu, p), num(c.r, p));
    let _ = writeln!(o, "  {:<24}{:<40}{}", "", "closed form", "pipeline");
    let _ = writeln!(o, "  {:<24}{:<40}{}", "symplectic eigenvalues", list(&c.symplectic_eigenvalues, p), list(&c.pipeline_symplectic_eigenvalues, p));
    let _ = writeln!(o, "  {:<24}{:<40}{}", "inverse temperatures", list(&c.final_betas, p), list(&c.pipeline_betas, p));
    let _ = writeln!(o, "  covariance deviation    {}", num(c.covariance_deviation, p));
    let _ = writeln!(o, "  max deviation           {}", num(c.max_deviation, p));
    o
}

pub fn fuzz(r: &FuzzReport, p: usize) -> String {
    let s = &r.summary;
    let mut o = String::new();
    let _ = writeln!(o, "fuzz: {} instances ({} generic, {} planted), seed {}", s.count, s.generic, s.planted, s.seed);
    let _ = writeln!(o, "KMS gap exists on {}, GNS gap exists on {}, borderline instances {}", s.kms_exists, s.gns_exists, s.borderline_instances);
    if !s.checks.is_empty() {
        let _ = writeln!(o, "\n  {:<28}{:>8}{:>8}{:>12}{:>16}{:>12}", "check", "n", "failed", "borderline", "worst", "bound");
        for c in &s.checks {
            let _ = writeln!(o, "  {:<28}{:>8}{:>8}{:>12}{:>16}{:>12}", c.name, c.evaluated, c.failed, c.borderline, num(c.worst, 3), format!("{:.0e}", c.bound));
        }
    }
    if s.violations.is_empty() {
        let _ = writeln!(o, "\nno violations");
    } else {
        let _ = writeln!(o, "\n{} violations", s.violations.len());
        for v in &s.violations {
            let _ = writeln!(o, "  instance {}: {} (value {}, bound {})", v.index, v.check, num(v.value, p), num(v.bound, p));
            if let Some(inst) = &v.instance {
                let _ = writeln!(o, "    {}", to_json(inst));
            }
        }
    }
    o
}

pub fn evolution(r: &EvolutionReport, p: usize) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "spectral abscissa {}", num(r.spectral_abscissa, p));
    for row in &r.rows {
        let dist = opt(row.distance_to_invariant, p);
        let _ = writeln!(o, "\nt = {}  distance to invariant {}", num(row.t, p), dist);
        let _ = writeln!(o, "  mean {}", complex_list(&row.mean, p));
        matrix(&mut o, &row.covariance, p, "  ");
    }
    if let Some(f) = &r.fit {
        let _ = writeln!(o, "\ndecay rate fit {}  (2 x abscissa {}, relative error {})", num(f.rate, p), num(f.expected, p), num(f.relative_error, p));
    }
    o
}
