//! JSON and CSV encodings shared by the library and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::quantum::{DensityMatrix, ProcessMatrix};

/// A complex matrix as separate real and imaginary row lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&crate::linalg::C64) -> f64| {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    /// An empty `im` means a real matrix.
    fn try_from(j: &MatrixJson) -> Result<Self> {
        let rows = j.re.len();
        let cols = j.re.first().map_or(0, Vec::len);
        if rows == 0 || j.re.iter().any(|r| r.len() != cols) {
            return Err(Error::Format("ragged or empty \"re\" rows".into()));
        }
        if !j.im.is_empty() && (j.im.len() != rows || j.im.iter().any(|r| r.len() != cols)) {
            return Err(Error::Format("\"im\" shape differs from \"re\"".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            c64(j.re[r][c], j.im.get(r).map_or(0.0, |row| row[c]))
        }))
    }
}

/// `{"n_qubits", "re", "im", "normalized"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessJson {
    pub n_qubits: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub normalized: bool,
}

impl From<&ProcessMatrix> for ProcessJson {
    fn from(p: &ProcessMatrix) -> Self {
        let m = MatrixJson::from(p.chi());
        Self {
            n_qubits: p.n_qubits(),
            re: m.re,
            im: m.im,
            normalized: p.is_normalized(),
        }
    }
}

impl TryFrom<&ProcessJson> for ProcessMatrix {
    type Error = Error;

    fn try_from(j: &ProcessJson) -> Result<Self> {
        let chi = CMatrix::try_from(&MatrixJson {
            re: j.re.clone(),
            im: j.im.clone(),
        })?;
        let p = ProcessMatrix::from_hermitian(j.n_qubits, chi)
            .map_err(|e| Error::Format(e.to_string()))?;
        if j.normalized && !p.is_normalized() {
            return Err(Error::Format(format!(
                "process marked normalized but has trace {}",
                p.trace()
            )));
        }
        Ok(p)
    }
}

pub fn process_to_json(p: &ProcessMatrix) -> String {
    serde_json::to_string_pretty(&ProcessJson::from(p)).expect("plain data serializes")
}

pub fn process_from_json(s: &str) -> Result<ProcessMatrix> {
    let j: ProcessJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    ProcessMatrix::try_from(&j)
}

/// Density matrices use the process layout with `n_qubits` of the state.
pub fn state_to_json(rho: &DensityMatrix) -> String {
    let m = MatrixJson::from(rho.matrix());
    let j = ProcessJson {
        n_qubits: rho.n_qubits(),
        re: m.re,
        im: m.im,
        normalized: (rho.trace() - 1.0).abs() <= crate::linalg::PSD_TOL,
    };
    serde_json::to_string_pretty(&j).expect("plain data serializes")
}

pub fn state_from_json(s: &str) -> Result<DensityMatrix> {
    let j: ProcessJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    let m = CMatrix::try_from(&MatrixJson { re: j.re, im: j.im })?;
    if m.rows() != 1 << j.n_qubits {
        return Err(Error::Format(format!(
            "{} qubits but {}x{} matrix",
            j.n_qubits,
            m.rows(),
            m.cols()
        )));
    }
    DensityMatrix::new(m).map_err(|e| Error::Format(e.to_string()))
}

/// Six significant digits, shortest form (`1`, `0.5`, `0.133333`, `1.2e-7`).
pub fn csv_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x == 0.0 {
            "0".into()
        } else {
            format!("{x}")
        };
    }
    let s = format!("{x:.5e}");
    let v: f64 = s.parse().expect("formatted float parses");
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let mut t = format!("{v:.decimals$}");
        if t.contains('.') {
            t = t.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        if t == "-0" {
            t = "0".into();
        }
        t
    } else {
        let (mant, e) = s.split_once('e').expect("exponent form");
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

/// Round-trip value for JSON: 17 significant digits.
pub fn json_float(x: f64) -> serde_json::Value {
    let s = format!("{x:.16e}");
    let v: f64 = s.parse().expect("formatted float parses");
    serde_json::Value::from(v)
}
