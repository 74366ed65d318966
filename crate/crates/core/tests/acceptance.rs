//! Acceptance gate. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails. Reference values are recomputed here from the raw
//! parameter matrices wherever possible instead of trusting library helpers.

use std::io::Write;
use std::time::{Duration, Instant};

use gqms::fuzz::{decay_rate, slow_mode_state};
use gqms::gap::{self, a_t_horizon, a_t_integral, kms_form_operator};
use gqms::generator::{self, GaussianStateParams, GeneratorParams};
use gqms::linalg;
use gqms::models::{self, BosonChainSpec};
use gqms::pipeline::{analyze, Analysis, AnalysisOptions};
use gqms::realop::{CMatrix, C64};
use gqms::sampling::{self, Instance, SamplerConfig};
use gqms::standardize::{self, standardize};
use gqms::williamson::{self, williamson};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 0x5eed_2024;
const INSTANCES: u64 = 500;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(o: &Outcome) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {} {}: {}", o.id, status, o.detail);
}

fn note(text: &str) {
    let _ = writeln!(std::io::stderr().lock(), "  note: {text}");
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real `2m×2d` matrix of `z ↦ Lz + Az̄` in `(Re, Im)` stacking.
fn ident(lin: &CMatrix, anti: &CMatrix) -> DMatrix<f64> {
    let (m, d) = lin.shape();
    let mut out = DMatrix::zeros(2 * m, 2 * d);
    for r in 0..m {
        for k in 0..d {
            let (l, a) = (lin[(r, k)], anti[(r, k)]);
            out[(r, k)] = l.re + a.re;
            out[(r, d + k)] = a.im - l.im;
            out[(m + r, k)] = l.im + a.im;
            out[(m + r, d + k)] = l.re - a.re;
        }
    }
    out
}

fn oracle_drift(p: &GeneratorParams) -> DMatrix<f64> {
    let (u, v) = (p.u(), p.v());
    let half = c(0.5, 0.0);
    let lin = (u.transpose() * u.conjugate() - v.transpose() * v.conjugate()) * half + p.omega() * c(0.0, 1.0);
    let anti = (u.transpose() * v - v.transpose() * u) * half + p.kappa() * c(0.0, 1.0);
    ident(&lin, &anti)
}

fn oracle_diffusion(p: &GeneratorParams) -> DMatrix<f64> {
    let (u, v) = (p.u(), p.v());
    let lin = u.transpose() * u.conjugate() + v.transpose() * v.conjugate();
    let anti = u.transpose() * v + v.transpose() * u;
    ident(&lin, &anti)
}

fn diag2(x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    DMatrix::from_fn(2 * d, 2 * d, |r, k| if r == k { x[r % d] } else { 0.0 })
}

fn j(d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        m[(k, d + k)] = 1.0;
        m[(d + k, k)] = -1.0;
    }
    m
}

/// `ZᵀS + SZ = −C` through the Kronecker system.
fn oracle_lyapunov(z: &DMatrix<f64>, cm: &DMatrix<f64>) -> DMatrix<f64> {
    let n = z.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(&z.transpose()) + z.transpose().kronecker(&id);
    let rhs = DVector::from_iterator(n * n, (-cm).iter().copied());
    let x = k.lu().solve(&rhs).expect("nonsingular Lyapunov operator");
    let s = DMatrix::from_column_slice(n, n, x.as_slice());
    (&s + s.transpose()) * 0.5
}

/// Symplectic eigenvalues, descending, from the spectrum `±iν` of `𝐉𝐒`.
fn oracle_nu(s: &DMatrix<f64>) -> Vec<f64> {
    let d = s.nrows() / 2;
    let mut ims: Vec<f64> = (j(d) * s).complex_eigenvalues().iter().map(|e| e.im.abs()).collect();
    ims.sort_by(|a, b| b.total_cmp(a));
    ims.into_iter().step_by(2).collect()
}

fn csch_half(beta: &[f64]) -> Vec<f64> {
    beta.iter().map(|b| 1.0 / (b / 2.0).sinh()).collect()
}

fn oracle_kms_form(z: &DMatrix<f64>, beta: &[f64]) -> DMatrix<f64> {
    let dc = diag2(&csch_half(beta));
    z.transpose() * &dc + &dc * z
}

/// `−∫₀^T A_tᵀA_t dt` in closed form: every column of `A_t` carries a single
/// exponential, so each entry integrates exactly.
fn oracle_a_t_integral(u: &CMatrix, v: &CMatrix, beta: &[f64], horizon: f64) -> DMatrix<f64> {
    let (m, d) = u.shape();
    let zero = CMatrix::zeros(m, d);
    let l = ident(&u.conjugate(), &zero);
    let k = ident(&zero, v);
    let slow: Vec<f64> = beta.iter().map(|b| (-b / 2.0).exp() / 2.0).collect();
    let fast: Vec<f64> = beta.iter().map(|b| (b / 2.0).exp() / 2.0).collect();
    let rate = |x: &[f64], i: usize| x[i % d];
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for (x, xr) in [(&l, &slow), (&k, &fast)] {
        for (y, yr) in [(&l, &slow), (&k, &fast)] {
            let g = x.transpose() * y;
            for r in 0..2 * d {
                for s in 0..2 * d {
                    let a = rate(xr, r) + rate(yr, s);
                    out[(r, s)] -= g[(r, s)] * (1.0 - (-a * horizon).exp()) / a;
                }
            }
        }
    }
    out
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

fn smallest_relative_sv(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.min() / sv.max().max(f64::MIN_POSITIVE)
}

fn smallest_relative_modulus(eigs: &[C64]) -> f64 {
    let max = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min) / max.max(f64::MIN_POSITIVE)
}

fn instances(count: u64) -> Vec<(Instance, Analysis)> {
    let config = SamplerConfig::default();
    let options = AnalysisOptions::default();
    (0..count)
        .map(|i| {
            let inst = sampling::sample_instance(SEED, i, &config).expect("sampler");
            let a = analyze(&inst.params, &options).expect("sampled instances are analyzable");
            (inst, a)
        })
        .collect()
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let spec = BosonChainSpec::new(1.0, 2.0_f64.ln(), 3.0_f64.ln()).unwrap();
    let p = models::boson_chain_params(&spec).unwrap();
    let a = analyze(&p, &AnalysisOptions::default()).unwrap();
    let nu = &a.standardized.nu;
    let nu_dev = nu.iter().zip([2.8, 2.5, 2.2]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let oracle_dev = oracle_nu(&a.invariant.covariance_matrix())
        .iter()
        .zip([2.8, 2.5, 2.2])
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let beta = &a.standardized.beta;
    let distinct = a.gap.partition.classes.len() == 3
        && (beta[0] - beta[1]).abs() > 1e-3
        && (beta[1] - beta[2]).abs() > 1e-3;
    let cf = models::boson_chain_closed_form(&spec).unwrap();
    let s_lyap = oracle_lyapunov(&oracle_drift(&p), &oracle_diffusion(&p));
    let s_dev = (&cf.s_full - &s_lyap).amax();
    let elapsed = t0.elapsed();
    let pass = nu_dev < 1e-9
        && oracle_dev < 1e-9
        && distinct
        && a.gap.kms.exists
        && !a.gap.gns.exists
        && s_dev < 1e-9
        && within(elapsed, 1.0);
    Outcome {
        id: 1,
        pass,
        detail: format!(
            "boson chain nu dev {nu_dev:.1e} (spectral oracle {oracle_dev:.1e}), distinct beta {distinct}, kms {} gns {}, closed-form S vs Lyapunov {s_dev:.1e}, {:.3}s",
            a.gap.kms.exists,
            a.gap.gns.exists,
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let p = models::two_mode_example_params(1.0, 2.0, 1.0, 0.0, 2.0).unwrap();
    let a = analyze(&p, &AnalysisOptions::default()).unwrap();
    let stable = a.stability.spectral_abscissa < 0.0;
    let s = oracle_lyapunov(&oracle_drift(&p), &oracle_diffusion(&p));
    let s_dev = (&s - DMatrix::<f64>::identity(4, 4) * (5.0 / 3.0)).amax();
    let lib_dev = (a.invariant.covariance_matrix() - DMatrix::<f64>::identity(4, 4) * (5.0 / 3.0)).amax();
    let ln4 = 4.0_f64.ln();
    let beta_dev = a.standardized.beta.iter().map(|b| (b - ln4).abs()).fold(0.0, f64::max);
    let kernel: Vec<usize> = a.gap.kms.classes.iter().map(|c| c.kernel_dim).collect();
    let beta = &a.standardized.beta;
    let z_std = oracle_drift(&a.standardized.params_tilde);
    let sv_min = oracle_kms_form(&z_std, beta).svd(false, false).singular_values.min();
    let elapsed = t0.elapsed();
    let pass = stable
        && s_dev < 1e-10
        && lib_dev < 1e-10
        && beta_dev < 1e-10
        && !a.gap.kms.exists
        && kernel == vec![1]
        && sv_min < 1e-10
        && within(elapsed, 1.0);
    Outcome {
        id: 2,
        pass,
        detail: format!(
            "two-mode counterexample stable {stable}, S dev from 5/3 I {:.1e}, beta dev from ln4 {beta_dev:.1e}, kms {} with kernel dims {kernel:?}, min singular value {sv_min:.1e}, {:.3}s",
            s_dev.max(lib_dev),
            a.gap.kms.exists,
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let p = models::thermal_one_mode(4.0_f64.ln()).unwrap();
    let a = analyze(&p, &AnalysisOptions::default()).unwrap();
    let id = DMatrix::<f64>::identity(2, 2);
    let z_dev = (oracle_drift(&p) + &id * 0.5).amax().max((a.drift.to_matrix() + &id * 0.5).amax());
    let c_dev = (oracle_diffusion(&p) - &id * (5.0 / 3.0)).amax();
    let s_dev = (a.invariant.covariance_matrix() - &id * (5.0 / 3.0)).amax();
    let kms = a.gap.kms_gap_first_order.unwrap_or(f64::NAN);
    let gns = a.gap.gns_gap_first_order.unwrap_or(f64::NAN);
    let elapsed = t0.elapsed();
    let pass = z_dev < 1e-12
        && c_dev < 1e-12
        && s_dev < 1e-12
        && (kms - 0.5).abs() < 1e-10
        && (gns - 0.5).abs() < 1e-10
        && within(elapsed, 1.0);
    Outcome {
        id: 3,
        pass,
        detail: format!(
            "OU Z dev {z_dev:.1e}, C dev {c_dev:.1e}, S dev {s_dev:.1e}, KMS gap {kms:.12}, GNS gap {gns:.12}, {:.3}s",
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_4(set: &[(Instance, Analysis)], setup: Duration) -> Outcome {
    let t0 = Instant::now();
    let mut worst_identity = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    let mut worst_quadratic = f64::NEG_INFINITY;
    for (inst, a) in set {
        let st = &a.standardized;
        let pt = &st.params_tilde;
        let form = kms_form_operator(pt.u(), pt.v(), &st.beta).unwrap().to_matrix();
        let oracle = oracle_kms_form(&oracle_drift(pt), &st.beta);
        worst_identity = worst_identity.max(rel(&form, &oracle));
        worst_oracle = worst_oracle.max(rel(&a.gap.kms_form.to_matrix(), &oracle));
        let mut rng = sampling::instance_rng(SEED ^ 0x4, inst.index);
        let n = form.nrows();
        for _ in 0..100 {
            let x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = &x / x.norm();
            worst_quadratic = worst_quadratic.max(x.dot(&(&form * &x)));
        }
    }
    let elapsed = setup + t0.elapsed();
    let pass = set.len() >= 500 && worst_identity <= 1e-9 && worst_oracle <= 1e-9 && worst_quadratic <= 1e-10 && within(elapsed, 60.0);
    Outcome {
        id: 4,
        pass,
        detail: format!(
            "{} instances, explicit form vs Z^#D+DZ rel {worst_identity:.1e} (report {worst_oracle:.1e}), max x*Fx {worst_quadratic:.1e}, {:.2}s",
            set.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_5(set: &[(Instance, Analysis)]) -> Outcome {
    let rank_tol = AnalysisOptions::default().rank_tol;
    let band = gap::CROSS_CHECK_BAND;
    let zero_tol = gap::EIGEN_ZERO_TOL;
    let in_band = |ratio: f64, thr: f64| ratio > thr / band && ratio < thr * band;
    let (mut kms_checked, mut kms_agree, mut gns_checked, mut gns_agree) = (0, 0, 0, 0);
    let (mut borderline, mut gns_without_kms, mut planted_mismatch) = (0, 0, 0);
    let mut band_agree = 0;
    let (mut kms_true, mut gns_true) = (0, 0);
    for (inst, a) in set {
        let st = &a.standardized;
        let beta = &st.beta;
        let z = oracle_drift(&st.params_tilde);
        let g = &a.gap;

        let form_ratio = smallest_relative_sv(&oracle_kms_form(&z, beta));
        let dc = diag2(&csch_half(beta));
        let dc_inv = diag2(&beta.iter().map(|b| (b / 2.0).sinh()).collect::<Vec<_>>());
        let kms_matrix = &z + dc_inv * z.transpose() * &dc;
        let kms_eigs: Vec<C64> = kms_matrix.complex_eigenvalues().iter().copied().collect();
        let kms_ratio = smallest_relative_modulus(&kms_eigs);
        let kms_band = g.kms.borderline || in_band(form_ratio, rank_tol) || in_band(kms_ratio, zero_tol);

        let alt = gap::gns_alt_matrix(&st.drift(), beta).unwrap();
        let (alt_eigs, _) = linalg::hermitian_eigen(&alt);
        let alt_max = alt_eigs.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let alt_ratio = alt_eigs.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min) / alt_max;
        let gns_eigs = linalg::eigenvalues_complex(&gap::gns_gap_matrix(&st.drift(), beta).unwrap()).unwrap();
        let gns_ratio = smallest_relative_modulus(&gns_eigs);
        let gns_band = g.gns.borderline || in_band(alt_ratio, rank_tol) || in_band(gns_ratio, zero_tol);

        if g.kms.exists {
            kms_true += 1;
        }
        if g.gns.exists {
            gns_true += 1;
        }
        if kms_band || gns_band {
            borderline += 1;
            if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
                note(&format!(
                    "borderline instance {}: form {form_ratio:.1e}, kms matrix {kms_ratio:.1e}, alt {alt_ratio:.1e}, gns matrix {gns_ratio:.1e}, rank flags {} {}",
                    inst.index, g.kms.borderline, g.gns.borderline
                ));
            }
        }
        let kms_ok = g.kms.exists == (form_ratio > rank_tol) && g.kms.exists == (kms_ratio > zero_tol);
        let gns_ok = g.gns.exists == (alt_ratio > rank_tol) && g.gns.exists == (gns_ratio > zero_tol);
        if !kms_band {
            kms_checked += 1;
            kms_agree += usize::from(kms_ok);
        }
        if !gns_band {
            gns_checked += 1;
            gns_agree += usize::from(gns_ok);
        }
        if (kms_band || gns_band) && kms_ok && gns_ok {
            band_agree += 1;
        }
        if g.gns.exists && !g.kms.exists {
            gns_without_kms += 1;
        }
        if let Some(pl) = &inst.planted {
            if !kms_band && pl.kms_exists != g.kms.exists || !gns_band && pl.gns_exists != g.gns.exists {
                planted_mismatch += 1;
            }
        }
    }
    let pass = kms_agree == kms_checked && gns_agree == gns_checked && gns_without_kms == 0 && planted_mismatch == 0;
    Outcome {
        id: 5,
        pass,
        detail: format!(
            "KMS criteria agree {kms_agree}/{kms_checked}, GNS criteria agree {gns_agree}/{gns_checked}, borderline {borderline} (of which {band_agree} agree anyway), gns-without-kms cases {gns_without_kms}, planted mismatches {planted_mismatch} (kms true {kms_true}, gns true {gns_true})"
        ),
    }
}

fn criterion_6(set: &[(Instance, Analysis)]) -> Outcome {
    let options = AnalysisOptions::default();
    let mut pairs = 0;
    let mut verdict_mismatch = 0;
    let mut worst = 0.0_f64;
    for (inst, a) in set.iter().take(250) {
        let mut rng = sampling::instance_rng(SEED ^ 0x6, inst.index);
        let frame = sampling::random_symplectic(&mut rng, inst.params.d(), 0.8);
        let moved = standardize::transform_params(&inst.params, &frame).unwrap();
        let b = analyze(&moved, &options).unwrap();
        pairs += 1;
        if a.gap.kms.exists != b.gap.kms.exists || a.gap.gns.exists != b.gap.gns.exists {
            verdict_mismatch += 1;
            continue;
        }
        for (x, y) in [
            (a.gap.kms_gap_first_order, b.gap.kms_gap_first_order),
            (a.gap.gns_gap_first_order, b.gap.gns_gap_first_order),
        ] {
            if let (Some(x), Some(y)) = (x, y) {
                worst = worst.max((x - y).abs() / x.abs().max(1.0));
            }
        }
    }
    Outcome {
        id: 6,
        pass: pairs >= 200 && verdict_mismatch == 0 && worst <= 1e-7,
        detail: format!("{pairs} pairs, verdict mismatches {verdict_mismatch}, max gap value difference {worst:.1e}"),
    }
}

fn criterion_7() -> Outcome {
    let mut worst_nu = 0.0_f64;
    let mut worst_rec = 0.0_f64;
    let mut worst_symp = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    let n = 200;
    for i in 0..n {
        let d = 1 + (i as usize % 4);
        let mut rng = sampling::instance_rng(SEED ^ 0x7, i);
        let (s, nu_planted) = sampling::planted_covariance(&mut rng, d, 0.8);
        let w = williamson(&s, williamson::DEFAULT_NU_TOL).unwrap();
        for (a, b) in w.nu.iter().zip(&nu_planted) {
            worst_nu = worst_nu.max((a - b).abs());
        }
        for (a, b) in oracle_nu(&s).iter().zip(&nu_planted) {
            worst_oracle = worst_oracle.max((a - b).abs());
        }
        let rebuilt = w.g.transpose() * diag2(&w.nu) * &w.g;
        worst_rec = worst_rec.max((rebuilt - &s).amax() / s.amax());
        let jd = j(d);
        worst_symp = worst_symp.max((w.g.transpose() * &jd * &w.g - &jd).amax());
    }
    Outcome {
        id: 7,
        pass: worst_nu <= 1e-9 && worst_rec <= 1e-9 && worst_symp <= 1e-9,
        detail: format!(
            "{n} planted covariances, nu recovery {worst_nu:.1e} (spectral oracle {worst_oracle:.1e}), reconstruction {worst_rec:.1e}, symplecticity {worst_symp:.1e}"
        ),
    }
}

fn criterion_8(set: &[(Instance, Analysis)]) -> Outcome {
    let mut worst_paths = 0.0_f64;
    let mut worst_fit = 0.0_f64;
    let mut vacuum_within = 0;
    let chosen: Vec<&(Instance, Analysis)> = set.iter().take(50).collect();
    for (inst, a) in &chosen {
        let p = &inst.params;
        let vac = GaussianStateParams::vacuum(p.d());
        let slow = slow_mode_state(p).unwrap();
        let scale = a.invariant.covariance_matrix().amax().max(1.0);
        for state in [&vac, &slow] {
            for t in [0.3, 1.7, 6.0] {
                let x = generator::evolve_state_closed_form(p, state, t).unwrap();
                let y = generator::evolve_state_quadrature(p, state, t).unwrap();
                let dev = (x.covariance_matrix() - y.covariance_matrix()).amax() / scale
                    + (&x.mean - &y.mean).norm() / a.invariant.mean.norm().max(1.0);
                worst_paths = worst_paths.max(dev);
            }
        }
        let target = 2.0 * a.stability.spectral_abscissa;
        let fit = decay_rate(p, &slow).unwrap();
        worst_fit = worst_fit.max((fit - target).abs() / target.abs());
        let fit_vac = decay_rate(p, &vac).unwrap();
        if (fit_vac - target).abs() / target.abs() <= 0.05 {
            vacuum_within += 1;
        }
    }
    note(&format!(
        "decay fit started from the vacuum lands within 5% on {vacuum_within}/{} instances; pre-asymptotic transients dominate the rest",
        chosen.len()
    ));
    Outcome {
        id: 8,
        pass: chosen.len() == 50 && worst_paths <= 1e-9 && worst_fit <= 0.05,
        detail: format!(
            "{} instances, closed form vs quadrature {worst_paths:.1e}, slowest-mode decay fit rel error {worst_fit:.1e}",
            chosen.len()
        ),
    }
}

fn criterion_9(set: &[(Instance, Analysis)]) -> Outcome {
    let mut worst = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    let chosen: Vec<&(Instance, Analysis)> = set.iter().skip(50).take(50).collect();
    for (_, a) in &chosen {
        let st = &a.standardized;
        let pt = &st.params_tilde;
        let horizon = a_t_horizon(&st.beta);
        let quad = a_t_integral(pt.u(), pt.v(), &st.beta, horizon).unwrap().to_matrix();
        let form = kms_form_operator(pt.u(), pt.v(), &st.beta).unwrap().to_matrix();
        let exact = oracle_a_t_integral(pt.u(), pt.v(), &st.beta, horizon);
        worst = worst.max(rel(&quad, &form));
        worst_oracle = worst_oracle.max(rel(&exact, &form));
    }
    Outcome {
        id: 9,
        pass: chosen.len() == 50 && worst <= 1e-6 && worst_oracle <= 1e-6,
        detail: format!(
            "{} instances, quadrature vs form rel {worst:.1e}, exact exponential integral vs form rel {worst_oracle:.1e}",
            chosen.len()
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = vec![criterion_1(), criterion_2(), criterion_3()];
    for o in &outcomes {
        report(o);
    }
    let t0 = Instant::now();
    let set = instances(INSTANCES);
    let setup = t0.elapsed();
    let rest: [&dyn Fn() -> Outcome; 6] = [
        &|| criterion_4(&set, setup),
        &|| criterion_5(&set),
        &|| criterion_6(&set),
        &criterion_7,
        &|| criterion_8(&set),
        &|| criterion_9(&set),
    ];
    for f in rest {
        let o = f();
        report(&o);
        outcomes.push(o);
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn oracles_agree_with_library_on_reference_models() {
    for p in [
        models::thermal_one_mode(0.8).unwrap(),
        models::two_mode_example_params(1.0, 2.0, 1.0, 0.0, 2.0).unwrap(),
        models::boson_chain_params(&BosonChainSpec::reference()).unwrap(),
    ] {
        assert!(rel(&generator::drift(&p).to_matrix(), &oracle_drift(&p)) < 1e-14);
        assert!(rel(&generator::diffusion(&p).to_matrix(), &oracle_diffusion(&p)) < 1e-14);
        let s = generator::invariant_state(&p).unwrap().covariance_matrix();
        assert!(rel(&s, &oracle_lyapunov(&oracle_drift(&p), &oracle_diffusion(&p))) < 1e-12);
        let st = standardize(&p, 1e-9).unwrap();
        let pt = &st.params_tilde;
        let at = gap::a_t_operator(pt.u(), pt.v(), &st.beta, 0.0).unwrap().to_matrix();
        assert!(rel(&at, &ident(&pt.u().conjugate(), pt.v())) < 1e-14);
    }
}
