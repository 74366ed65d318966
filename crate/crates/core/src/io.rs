//! JSON document format for generator parameters. Complex numbers are
//! two-element arrays `[re, im]`; matrices are arrays of rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{GaussianStateParams, GeneratorParams};
use crate::realop::{CMatrix, CVector, RealLinearOp, C64};
use nalgebra::DMatrix;

pub type ComplexEntry = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub d: usize,
    pub m: usize,
    pub omega: Vec<Vec<ComplexEntry>>,
    pub kappa: Vec<Vec<ComplexEntry>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<ComplexEntry>>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<ComplexEntry>>,
    pub zeta: Vec<ComplexEntry>,
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<ComplexEntry>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn vector_to_entries(v: &CVector) -> Vec<ComplexEntry> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn rows_to_matrix(name: &str, rows: &[Vec<ComplexEntry>], nrows: usize, ncols: usize) -> Result<CMatrix> {
    if rows.len() != nrows {
        return Err(Error::DimensionMismatch(format!(
            "field `{name}` has {} rows, expected {nrows}",
            rows.len()
        )));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != ncols) {
        return Err(Error::DimensionMismatch(format!(
            "field `{name}` row {r} has {} entries, expected {ncols}",
            row.len()
        )));
    }
    check_finite(name, rows.iter().flatten())?;
    Ok(CMatrix::from_fn(nrows, ncols, |r, c| {
        C64::new(rows[r][c][0], rows[r][c][1])
    }))
}

fn check_finite<'a>(name: &str, entries: impl Iterator<Item = &'a ComplexEntry>) -> Result<()> {
    for (k, e) in entries.enumerate() {
        if !e[0].is_finite() || !e[1].is_finite() {
            return Err(Error::InvalidParameter(format!(
                "field `{name}` entry {k} is not finite"
            )));
        }
    }
    Ok(())
}

impl GeneratorFile {
    pub fn from_params(p: &GeneratorParams) -> Self {
        Self {
            d: p.d(),
            m: p.m(),
            omega: matrix_to_rows(p.omega()),
            kappa: matrix_to_rows(p.kappa()),
            u: matrix_to_rows(p.u()),
            v: matrix_to_rows(p.v()),
            zeta: vector_to_entries(p.zeta()),
        }
    }

    pub fn to_params(&self) -> Result<GeneratorParams> {
        let (d, m) = (self.d, self.m);
        let omega = rows_to_matrix("omega", &self.omega, d, d)?;
        let kappa = rows_to_matrix("kappa", &self.kappa, d, d)?;
        let u = rows_to_matrix("U", &self.u, m, d)?;
        let v = rows_to_matrix("V", &self.v, m, d)?;
        if self.zeta.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "field `zeta` has {} entries, expected {d}",
                self.zeta.len()
            )));
        }
        check_finite("zeta", self.zeta.iter())?;
        let zeta = CVector::from_iterator(d, self.zeta.iter().map(|e| C64::new(e[0], e[1])));
        GeneratorParams::new(omega, kappa, u, v, zeta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("malformed generator file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

pub fn params_from_json(text: &str) -> Result<GeneratorParams> {
    GeneratorFile::from_json(text)?.to_params()
}

pub fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// A Gaussian state: complex mean and the `2d×2d` real covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub mean: Vec<ComplexEntry>,
    pub covariance: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_state(s: &GaussianStateParams) -> Self {
        Self {
            mean: vector_to_entries(&s.mean),
            covariance: real_rows(&s.covariance_matrix()),
        }
    }

    pub fn to_state(&self) -> Result<GaussianStateParams> {
        let d = self.mean.len();
        let n = 2 * d;
        if self.covariance.len() != n || self.covariance.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "field `covariance` must be {n}x{n} for a mean of length {d}"
            )));
        }
        check_finite("mean", self.mean.iter())?;
        if self.covariance.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("field `covariance` has a non-finite entry".into()));
        }
        let mean = CVector::from_iterator(d, self.mean.iter().map(|e| C64::new(e[0], e[1])));
        let cov = DMatrix::from_fn(n, n, |r, c| self.covariance[r][c]);
        GaussianStateParams::new(mean, RealLinearOp::from_matrix(&cov)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("malformed state file: {e}")))
    }
}
