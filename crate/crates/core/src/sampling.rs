//! Seeded random instances: generic stable generators, generators with a
//! planted invariant state and temperature classes, random symplectic
//! frames, and covariance matrices with a planted Williamson form.
//!
//! Every instance is drawn from its own ChaCha stream `(seed, index)`, so
//! instance `k` does not depend on how many draws earlier instances used.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{self, gram_products, GeneratorParams};
use crate::linalg;
use crate::realop::{CMatrix, CVector, SymplecticParts, C64};
use crate::standardize::transform_params;
use crate::williamson::{self, diag_doubled};

/// The generator for instance `index` of a seeded run.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard complex normal: independent real and imaginary parts of
/// variance ½.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(s * normal(rng), s * normal(rng))
}

pub fn complex_normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn complex_normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix,
/// with the phases of `R`'s diagonal absorbed.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = complex_normal_matrix(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// `unitary · squeeze · unitary` with squeezing parameters uniform in
/// `[−max_squeeze, max_squeeze]`.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, d: usize, max_squeeze: f64) -> SymplecticParts {
    let left = SymplecticParts {
        m1: haar_unitary(rng, d),
        m2: CMatrix::zeros(d, d),
    };
    let right = SymplecticParts {
        m1: haar_unitary(rng, d),
        m2: CMatrix::zeros(d, d),
    };
    let r: Vec<f64> = (0..d).map(|_| rng.random_range(-max_squeeze..=max_squeeze)).collect();
    let squeeze = SymplecticParts {
        m1: CMatrix::from_diagonal(&CVector::from_iterator(d, r.iter().map(|x| C64::new(x.cosh(), 0.0)))),
        m2: CMatrix::from_diagonal(&CVector::from_iterator(d, r.iter().map(|x| C64::new(x.sinh(), 0.0)))),
    };
    left.compose(&squeeze).compose(&right)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub dims: Vec<usize>,
    /// Accept only drifts with spectral abscissa below `−stability_margin`.
    pub stability_margin: f64,
    /// Reject invariant states with some `ν ≤ 1 + nu_margin`.
    pub nu_margin: f64,
    pub max_squeeze: f64,
    pub max_attempts: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            stability_margin: 1e-3,
            nu_margin: 1e-3,
            max_squeeze: 0.6,
            max_attempts: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Generic,
    Planted,
}

/// Ground truth of a planted instance, before the random frame change.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub beta: Vec<f64>,
    pub classes: Vec<Vec<usize>>,
    pub u: CMatrix,
    pub v: CMatrix,
    pub frame: SymplecticParts,
    pub kms_exists: bool,
    pub gns_exists: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub index: u64,
    pub kind: InstanceKind,
    pub params: GeneratorParams,
    pub planted: Option<Planted>,
}

fn pick_dim<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidParameter("mode counts must be positive".into()));
    }
    Ok(dims[rng.random_range(0..dims.len())])
}

fn acceptable(params: &GeneratorParams, config: &SamplerConfig) -> bool {
    let z = generator::drift(params);
    match generator::is_stable(&z, config.stability_margin) {
        Ok(s) if s.stable => {}
        _ => return false,
    }
    let Ok(state) = generator::invariant_state(params) else {
        return false;
    };
    match williamson::symplectic_eigenvalues(&state.covariance_matrix()) {
        Ok(nu) => nu.iter().all(|&x| x > 1.0 + config.nu_margin),
        Err(_) => false,
    }
}

/// Generic instance: i.i.d. complex normal `U`, `V`, `ζ`; `Ω = (A+A*)/2`,
/// `κ = (B+Bᵀ)/2`; `m` uniform in `1..=2d`; rejection until stable.
pub fn sample_generic(seed: u64, index: u64, config: &SamplerConfig) -> Result<Instance> {
    let mut rng = instance_rng(seed, index);
    for _ in 0..config.max_attempts {
        let d = pick_dim(&mut rng, &config.dims)?;
        let m = rng.random_range(1..=2 * d);
        let u = complex_normal_matrix(&mut rng, m, d);
        let v = complex_normal_matrix(&mut rng, m, d);
        let a = complex_normal_matrix(&mut rng, d, d);
        let b = complex_normal_matrix(&mut rng, d, d);
        let half = C64::new(0.5, 0.0);
        let omega = (&a + a.adjoint()) * half;
        let kappa = (&b + b.transpose()) * half;
        let zeta = complex_normal_vector(&mut rng, d);
        let params = GeneratorParams::new(omega, kappa, u, v, zeta)?;
        if acceptable(&params, config) {
            return Ok(Instance {
                index,
                kind: InstanceKind::Generic,
                params,
                planted: None,
            });
        }
    }
    Err(Error::numerical(
        format!("no stable instance after {} attempts", config.max_attempts),
        0.0,
    ))
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Random grouping of `0..d` into consecutive classes.
fn random_classes<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Vec<usize>> {
    let mut classes = vec![vec![0]];
    for j in 1..d {
        if rng.random_bool(0.5) {
            classes.last_mut().expect("nonempty").push(j);
        } else {
            classes.push(vec![j]);
        }
    }
    classes
}

/// Standard-form Hamiltonian parts making `𝐃_coth(β)` invariant for the
/// given Kraus coefficients. Requires `UᵀŪ(1+c) + VᵀV̄(1−c) = 0` within
/// each temperature class; entries inside a class are free and drawn at
/// random.
fn planted_hamiltonian<R: Rng + ?Sized>(
    rng: &mut R,
    u: &CMatrix,
    v: &CMatrix,
    beta: &[f64],
) -> (CMatrix, CMatrix) {
    let d = beta.len();
    let c: Vec<f64> = beta.iter().map(|b| coth(b / 2.0)).collect();
    let [uu, vv, uv, vu] = gram_products(u, v);
    let x = &uu - &vv;
    let y = &uu + &vv;
    let w = &uv - &vu;
    let c2 = &uv + &vu;
    let i = C64::new(0.0, 1.0);
    let free = complex_normal_matrix(rng, d, d);
    let free = (&free + free.adjoint()) * C64::new(0.5, 0.0);
    let mut omega = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            omega[(j, k)] = if beta[j] == beta[k] {
                free[(j, k)]
            } else {
                i * (y[(j, k)] + x[(j, k)] * ((c[j] + c[k]) / 2.0)) / (c[j] - c[k])
            };
        }
    }
    let kappa = CMatrix::from_fn(d, d, |j, k| {
        i * (c2[(j, k)] + w[(j, k)] * ((c[j] - c[k]) / 2.0)) / (c[j] + c[k])
    });
    (omega, kappa)
}

fn stacked_rank_deficient(u: &CMatrix, v: &CMatrix, classes: &[Vec<usize>]) -> bool {
    classes.iter().any(|idx| {
        let (m, k) = (u.nrows(), idx.len());
        let mut stack = CMatrix::zeros(2 * m, k);
        stack.rows_mut(0, m).copy_from(&u.select_columns(idx.iter()));
        stack.rows_mut(m, m).copy_from(&v.select_columns(idx.iter()));
        let info = linalg::rank_info(linalg::singular_values_complex(&stack), 1e-9);
        info.rank < k
    })
}

/// Planted instance: pick temperature classes and `β`, Kraus coefficients
/// with `U_c = e^{−β_c/2}Q_cV_c` on each class (so the diagonal state is
/// invariant), the compatible `Ω`, `κ`, then move to a random symplectic
/// frame and add a random linear term. Half of the multi-mode classes get
/// a rank-deficient `V_c`, which removes the KMS gap.
pub fn sample_planted(seed: u64, index: u64, config: &SamplerConfig) -> Result<Instance> {
    let mut rng = instance_rng(seed, index);
    for _ in 0..config.max_attempts {
        let d = pick_dim(&mut rng, &config.dims)?;
        let m = rng.random_range(1..=2 * d);
        let classes = random_classes(&mut rng, d);
        let mut class_beta: Vec<f64> = Vec::new();
        while class_beta.len() < classes.len() {
            let b = rng.random_range(0.3..3.0);
            if class_beta.iter().all(|&x: &f64| (x - b).abs() > 0.2) {
                class_beta.push(b);
            }
        }
        let mut beta = vec![0.0; d];
        for (c, idx) in classes.iter().enumerate() {
            for &j in idx {
                beta[j] = class_beta[c];
            }
        }
        let mut v = complex_normal_matrix(&mut rng, m, d);
        let mut u = CMatrix::zeros(m, d);
        for (c, idx) in classes.iter().enumerate() {
            if idx.len() >= 2 && rng.random_bool(0.5) {
                let last = idx[idx.len() - 1];
                let mut col = CVector::zeros(m);
                for &j in &idx[..idx.len() - 1] {
                    col += v.column(j) * complex_normal(&mut rng);
                }
                v.set_column(last, &col);
            }
            let q = haar_unitary(&mut rng, m);
            let vc = v.select_columns(idx.iter());
            let uc = q * vc * C64::new((-class_beta[c] / 2.0).exp(), 0.0);
            for (pos, &j) in idx.iter().enumerate() {
                u.set_column(j, &uc.column(pos));
            }
        }
        let (omega, kappa) = planted_hamiltonian(&mut rng, &u, &v, &beta);
        let standard = match GeneratorParams::new(omega, kappa, u.clone(), v.clone(), CVector::zeros(d)) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let z = generator::drift(&standard);
        match generator::is_stable(&z, config.stability_margin) {
            Ok(s) if s.stable => {}
            _ => continue,
        }
        let Ok(state) = generator::invariant_state(&standard) else {
            continue;
        };
        let planted_cov = diag_doubled(&beta.iter().map(|b| coth(b / 2.0)).collect::<Vec<_>>());
        if (state.covariance_matrix() - &planted_cov).amax() > 1e-8 * planted_cov.amax() {
            return Err(Error::numerical(
                "planted Hamiltonian does not make the diagonal state invariant",
                (state.covariance_matrix() - planted_cov).amax(),
            ));
        }
        let frame = random_symplectic(&mut rng, d, config.max_squeeze);
        let zeta = complex_normal_vector(&mut rng, d);
        let params = transform_params(&standard, &frame)?.with_zeta(zeta);
        if !acceptable(&params, config) {
            continue;
        }
        let kms_exists = !stacked_rank_deficient(&u, &v, &classes);
        let gns_exists = {
            let mut block = CMatrix::zeros(m, 2 * d);
            block.columns_mut(0, d).copy_from(&u);
            block.columns_mut(d, d).copy_from(&v.conjugate());
            linalg::rank_info(linalg::singular_values_complex(&block), 1e-9).rank == 2 * d
        };
        return Ok(Instance {
            index,
            kind: InstanceKind::Planted,
            params,
            planted: Some(Planted {
                beta,
                classes,
                u,
                v,
                frame,
                kms_exists,
                gns_exists,
            }),
        });
    }
    Err(Error::numerical(
        format!("no stable planted instance after {} attempts", config.max_attempts),
        0.0,
    ))
}

/// Even indices are generic instances, odd indices planted ones.
pub fn sample_instance(seed: u64, index: u64, config: &SamplerConfig) -> Result<Instance> {
    if index % 2 == 0 {
        sample_generic(seed, index, config)
    } else {
        sample_planted(seed, index, config)
    }
}

/// `𝐒 = 𝐆₀ᵀ𝐃𝐆₀` for a random symplectic `𝐆₀` and random `ν > 1`
/// (descending), with a repeated value on some draws.
pub fn planted_covariance<R: Rng + ?Sized>(rng: &mut R, d: usize, max_squeeze: f64) -> (DMatrix<f64>, Vec<f64>) {
    let mut nu: Vec<f64> = (0..d).map(|_| 1.05 + 4.0 * rng.random::<f64>()).collect();
    if d >= 2 && rng.random_bool(0.3) {
        nu[1] = nu[0];
    }
    let g0 = random_symplectic(rng, d, max_squeeze).to_op().to_matrix();
    let s = g0.transpose() * diag_doubled(&nu) * &g0;
    let s = (&s + s.transpose()) * 0.5;
    nu.sort_by(|a, b| b.total_cmp(a));
    (s, nu)
}
