//! States and channel representations for one and two qubits.
//!
//! Conventions used throughout the crate:
//!
//! * Kets are written `|k1 k2>` with `k1` the first tensor factor (qubit A);
//!   matrices use the usual big-endian index `2*k1 + k2`.
//! * The operator basis is `E_k = |k1..kn><k(n+1)..k2n|` with the
//!   little-endian index law `k = 1 + sum_i k_i 2^(i-1)`. In zero-based form,
//!   `k = le(a) + d*le(b)` for `E_k = |a><b|`, where `le` reads the qubit
//!   labels least-significant first.
//! * A process matrix is scaled so that a trace-preserving map has unit
//!   trace: `rho_out = d * sum_kj chi_kj E_k rho E_j^dagger` with `d = 2^n`.
//!   Equivalently `chi` is the Choi matrix divided by `d`, re-indexed.
//! * Superoperators act on column-stacked density matrices.
//! * The Choi matrix is `(id ⊗ Phi)(|Omega><Omega|)` with the unnormalized
//!   `|Omega> = sum_b |b>|b>`; the input copy is the first factor.

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{c64, hermitian_eig, kron, CMatrix, Subsystem, C64, PSD_TOL};

fn dim_of(n_qubits: usize) -> usize {
    1 << n_qubits
}

fn qubits_for_dim(op: &'static str, d: usize) -> Result<usize> {
    match d {
        2 => Ok(1),
        4 => Ok(2),
        _ => Err(dim_mismatch(op, "2 or 4", d)),
    }
}

/// Reverses the bit order of an `n`-bit index. Maps the little-endian label
/// order of the operator basis onto the big-endian matrix index and back.
#[inline]
pub fn reverse_bits(idx: usize, n_qubits: usize) -> usize {
    (0..n_qubits).fold(0, |acc, i| acc | (((idx >> i) & 1) << (n_qubits - 1 - i)))
}

/// Matrix position `(row, col)` of the single nonzero entry of `E_k`
/// (zero-based `k`).
#[inline]
pub fn basis_position(k: usize, n_qubits: usize) -> (usize, usize) {
    let d = dim_of(n_qubits);
    (reverse_bits(k % d, n_qubits), reverse_bits(k / d, n_qubits))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    label: Option<String>,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and `0 <= tr <= 1` (sub-unit trace
    /// is allowed for outputs of non-trace-preserving maps).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        qubits_for_dim("DensityMatrix::new", matrix.rows())?;
        if !matrix.is_square() {
            return Err(dim_mismatch(
                "DensityMatrix::new",
                "square",
                format!("{:?}", matrix.dim()),
            ));
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > PSD_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = matrix.hermitian_part();
        let min = matrix.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        let tr = matrix.trace().re;
        if tr > 1.0 + PSD_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} exceeds 1"
            )));
        }
        Ok(Self {
            matrix,
            label: None,
        })
    }

    /// Wraps a matrix already known to be a valid (sub-normalized) state.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self {
            matrix,
            label: None,
        }
    }

    pub fn from_ket(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(CMatrix::projector(&v))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = dim_of(n_qubits);
        Self::new_unchecked(CMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_qubits(&self) -> usize {
        if self.dim() == 2 {
            1
        } else {
            2
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Positive-partial-transpose test on a two-qubit state.
    pub fn is_ppt(&self, tol: f64) -> Result<bool> {
        let pt = crate::linalg::partial_transpose(&self.matrix, Subsystem::B)?;
        Ok(pt.min_eigenvalue()? >= -tol)
    }

    /// Trace distance `||a - b||_1 / 2`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff = &self.matrix - &other.matrix;
        let e = hermitian_eig(&diff.hermitian_part())?;
        Ok(0.5 * e.values.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// The operator basis `E_k` for `n` qubits.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    n_qubits: usize,
    elements: Vec<CMatrix>,
}

impl OperatorBasis {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if !(1..=2).contains(&n_qubits) {
            return Err(Error::InvalidParameter(format!(
                "unsupported qubit count {n_qubits}"
            )));
        }
        let d = dim_of(n_qubits);
        let elements = (0..d * d)
            .map(|k| {
                let (r, c) = basis_position(k, n_qubits);
                CMatrix::unit(d, r, c)
            })
            .collect();
        Ok(Self { n_qubits, elements })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Zero-based access: `element(0)` is `E_1`.
    pub fn element(&self, k: usize) -> &CMatrix {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Expansion coefficients `c_k = tr(E_k^dagger op)`.
    pub fn coefficients(&self, op: &CMatrix) -> Vec<C64> {
        (0..self.elements.len())
            .map(|k| {
                let (r, c) = basis_position(k, self.n_qubits);
                op[(r, c)]
            })
            .collect()
    }
}

/// Process matrix in the `E_k` basis, trace one for trace-preserving maps.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    n_qubits: usize,
    chi: CMatrix,
}

impl ProcessMatrix {
    /// Validates Hermiticity and complete positivity (`chi ⪰ 0`).
    pub fn new(n_qubits: usize, chi: CMatrix) -> Result<Self> {
        let p = Self::from_hermitian(n_qubits, chi)?;
        let min = p.chi.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: min,
            });
        }
        Ok(p)
    }

    /// Accepts any Hermitian coefficient matrix (not necessarily CP). Used for
    /// SDP optimizer iterates and intermediate linear combinations.
    pub fn from_hermitian(n_qubits: usize, chi: CMatrix) -> Result<Self> {
        if !(1..=2).contains(&n_qubits) {
            return Err(Error::InvalidParameter(format!(
                "unsupported qubit count {n_qubits}"
            )));
        }
        let d2 = dim_of(n_qubits).pow(2);
        if chi.dim() != (d2, d2) {
            return Err(dim_mismatch(
                "ProcessMatrix",
                format!("{d2}x{d2}"),
                format!("{:?}", chi.dim()),
            ));
        }
        let deviation = chi.hermitian_deviation();
        if deviation > PSD_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            n_qubits,
            chi: chi.hermitian_part(),
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        KrausSet::new(vec![CMatrix::identity(dim_of(n_qubits))])
            .and_then(|k| k.to_process())
            .expect("identity channel")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        dim_of(self.n_qubits)
    }

    pub fn chi(&self) -> &CMatrix {
        &self.chi
    }

    /// Zero-based entry `chi[k][j]`.
    pub fn entry(&self, k: usize, j: usize) -> C64 {
        self.chi[(k, j)]
    }

    pub fn trace(&self) -> f64 {
        self.chi.trace().re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= PSD_TOL
    }

    pub fn normalize(&self) -> Result<Self> {
        let tr = self.trace();
        if tr.abs() <= 1e-12 {
            return Err(Error::ZeroTrace);
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            chi: self.chi.scale_real(1.0 / tr),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            chi: self.chi.scale_real(s),
        }
    }

    /// Weighted sum `sum_i w_i chi_i`.
    pub fn mix(parts: &[(f64, &ProcessMatrix)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let mut chi = CMatrix::zeros(first.chi.rows(), first.chi.cols());
        for (w, p) in parts {
            if p.n_qubits != first.n_qubits {
                return Err(dim_mismatch(
                    "ProcessMatrix::mix",
                    first.n_qubits,
                    p.n_qubits,
                ));
            }
            chi += &p.chi.scale_real(*w);
        }
        Ok(Self {
            n_qubits: first.n_qubits,
            chi,
        })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.matrix())?;
        Ok(DensityMatrix::new_unchecked(out.hermitian_part()))
    }

    /// Applies the linear map to an arbitrary operator.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        apply_chi(self.n_qubits, &self.chi, m)
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        ChoiMatrix {
            n_qubits: self.n_qubits,
            matrix: chi_to_choi(self.n_qubits, &self.chi),
        }
    }

    pub fn to_superoperator(&self) -> Superoperator {
        self.to_choi().to_superoperator()
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        self.to_choi().to_kraus()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &ProcessMatrix) -> Result<Self> {
        if self.n_qubits != first.n_qubits {
            return Err(dim_mismatch("compose", self.n_qubits, first.n_qubits));
        }
        let s = self
            .to_superoperator()
            .matrix
            .matmul(&first.to_superoperator().matrix)?;
        Superoperator::new(self.n_qubits, s)?.to_process_hermitian()
    }

    /// Two-qubit process `self ⊗ other` from two single-qubit processes.
    pub fn tensor(&self, other: &ProcessMatrix) -> Result<Self> {
        if self.n_qubits != 1 || other.n_qubits != 1 {
            return Err(dim_mismatch(
                "tensor_extend",
                "two single-qubit processes",
                format!("{} and {} qubits", self.n_qubits, other.n_qubits),
            ));
        }
        let sa = self.to_superoperator();
        let sb = other.to_superoperator();
        let joint = kron(&sa.matrix, &sb.matrix);
        // vec(rA) ⊗ vec(rB) -> vec(rA ⊗ rB), both column-stacked
        let reorder = |idx: usize| -> usize {
            let (va, vb) = (idx / 4, idx % 4);
            let (ia, ja) = (va % 2, va / 2);
            let (ib, jb) = (vb % 2, vb / 2);
            let (i, j) = (2 * ia + ib, 2 * ja + jb);
            i + 4 * j
        };
        let mut s = CMatrix::zeros(16, 16);
        for r in 0..16 {
            for c in 0..16 {
                s[(reorder(r), reorder(c))] = joint[(r, c)];
            }
        }
        Superoperator::new(2, s)?.to_process_hermitian()
    }

    /// `d * sum_kj chi_kj E_j^dagger E_k == I` within `tol`.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.tp_residual() <= tol
    }

    /// Largest entry of `sum_kj d chi_kj E_j^dagger E_k - I`.
    pub fn tp_residual(&self) -> f64 {
        let d = self.dim();
        let j = self.to_choi().matrix;
        // partial trace over the output factor
        let reduced = CMatrix::from_fn(d, d, |b, bp| {
            (0..d).map(|a| j[(b * d + a, bp * d + a)]).sum()
        });
        // tr_out J = (sum K^dagger K)^T
        reduced.transpose().max_abs_diff(&CMatrix::identity(d))
    }

    /// Process fidelity `tr(self * other)`.
    pub fn overlap(&self, other: &ProcessMatrix) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(dim_mismatch("overlap", self.n_qubits, other.n_qubits));
        }
        Ok(crate::linalg::hs_inner(&self.chi, &other.chi)?.re)
    }
}

/// `d * sum_kj chi_kj E_k m E_j^dagger` for any Hermitian-or-not `chi`.
pub fn apply_chi(n_qubits: usize, chi: &CMatrix, m: &CMatrix) -> Result<CMatrix> {
    let d = dim_of(n_qubits);
    if m.dim() != (d, d) {
        return Err(dim_mismatch(
            "apply_process",
            format!("{d}x{d}"),
            format!("{:?}", m.dim()),
        ));
    }
    if chi.dim() != (d * d, d * d) {
        return Err(dim_mismatch(
            "apply_process",
            format!("{0}x{0}", d * d),
            format!("{:?}", chi.dim()),
        ));
    }
    let le: Vec<usize> = (0..d).map(|s| reverse_bits(s, n_qubits)).collect();
    let scale = d as f64;
    Ok(CMatrix::from_fn(d, d, |a, ap| {
        let mut acc = C64::default();
        for b in 0..d {
            let k = le[a] + d * le[b];
            for bp in 0..d {
                let rho = m[(b, bp)];
                if rho != C64::default() {
                    acc += chi[(k, le[ap] + d * le[bp])] * rho;
                }
            }
        }
        acc * scale
    }))
}

pub(crate) fn chi_to_choi(n_qubits: usize, chi: &CMatrix) -> CMatrix {
    let d = dim_of(n_qubits);
    let le: Vec<usize> = (0..d).map(|s| reverse_bits(s, n_qubits)).collect();
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (b, a) = (r / d, r % d);
        let (bp, ap) = (c / d, c % d);
        chi[(le[a] + d * le[b], le[ap] + d * le[bp])] * d as f64
    })
}

pub(crate) fn choi_to_chi(n_qubits: usize, choi: &CMatrix) -> CMatrix {
    let d = dim_of(n_qubits);
    let std: Vec<usize> = (0..d).map(|s| reverse_bits(s, n_qubits)).collect();
    CMatrix::from_fn(d * d, d * d, |k, j| {
        let (a, b) = (std[k % d], std[k / d]);
        let (ap, bp) = (std[j % d], std[j / d]);
        choi[(b * d + a, bp * d + ap)] / d as f64
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?;
        let d = first.rows();
        qubits_for_dim("KrausSet::new", d)?;
        for op in &operators {
            if op.dim() != (d, d) {
                return Err(dim_mismatch(
                    "KrausSet::new",
                    format!("{d}x{d}"),
                    format!("{:?}", op.dim()),
                ));
            }
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// `sum_i K_i^dagger K_i`
    pub fn completeness(&self) -> CMatrix {
        let d = self.dim();
        self.operators
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| &acc + &(&k.adjoint() * k))
    }

    /// True when `sum K^dagger K ⪯ I` within `tol`.
    pub fn is_subnormalized(&self, tol: f64) -> bool {
        let gap = &CMatrix::identity(self.dim()) - &self.completeness();
        gap.min_eigenvalue().map(|m| m >= -tol).unwrap_or(false)
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim();
        self.operators.iter().fold(CMatrix::zeros(d, d), |acc, k| {
            &acc + &(&(k * rho) * &k.adjoint())
        })
    }

    pub fn to_process(&self) -> Result<ProcessMatrix> {
        let d = self.dim();
        let n = qubits_for_dim("kraus_to_process", d)?;
        let basis = OperatorBasis::new(n)?;
        let mut chi = CMatrix::zeros(d * d, d * d);
        for k in &self.operators {
            let c = basis.coefficients(k);
            for (a, ca) in c.iter().enumerate() {
                if *ca == C64::default() {
                    continue;
                }
                for (b, cb) in c.iter().enumerate() {
                    chi[(a, b)] += ca * cb.conj();
                }
            }
        }
        ProcessMatrix::from_hermitian(n, chi.scale_real(1.0 / d as f64))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn new(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        let d2 = dim_of(n_qubits).pow(2);
        if matrix.dim() != (d2, d2) {
            return Err(dim_mismatch(
                "ChoiMatrix",
                format!("{d2}x{d2}"),
                format!("{:?}", matrix.dim()),
            ));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn to_process(&self) -> Result<ProcessMatrix> {
        ProcessMatrix::from_hermitian(self.n_qubits, choi_to_chi(self.n_qubits, &self.matrix))
    }

    pub fn to_superoperator(&self) -> Superoperator {
        let d = dim_of(self.n_qubits);
        let j = &self.matrix;
        let matrix = CMatrix::from_fn(d * d, d * d, |r, c| {
            let (a, ap) = (r % d, r / d);
            let (b, bp) = (c % d, c / d);
            j[(b * d + a, bp * d + ap)]
        });
        Superoperator {
            n_qubits: self.n_qubits,
            matrix,
        }
    }

    /// Kraus operators from the eigen-decomposition; eigenvalues at or below
    /// `1e-10` are dropped.
    pub fn to_kraus(&self) -> Result<KrausSet> {
        let d = dim_of(self.n_qubits);
        let e = hermitian_eig(&self.matrix.hermitian_part())?;
        let min = e.values.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: min,
            });
        }
        let ops: Vec<CMatrix> = e
            .values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 1e-10)
            .map(|(idx, &l)| {
                let s = l.sqrt();
                CMatrix::from_fn(d, d, |a, b| e.vectors[(b * d + a, idx)] * s)
            })
            .collect();
        if ops.is_empty() {
            return KrausSet::new(vec![CMatrix::zeros(d, d)]);
        }
        KrausSet::new(ops)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    n_qubits: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        let d2 = dim_of(n_qubits).pow(2);
        if matrix.dim() != (d2, d2) {
            return Err(dim_mismatch(
                "Superoperator",
                format!("{d2}x{d2}"),
                format!("{:?}", matrix.dim()),
            ));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// `conj(K) ⊗ K` summed over a Kraus set.
    pub fn from_kraus(k: &KrausSet) -> Result<Self> {
        let n = qubits_for_dim("Superoperator::from_kraus", k.dim())?;
        let d2 = k.dim() * k.dim();
        let matrix = k
            .operators()
            .iter()
            .fold(CMatrix::zeros(d2, d2), |acc, op| {
                &acc + &kron(&op.conj(), op)
            });
        Self::new(n, matrix)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = dim_of(self.n_qubits);
        let v = self.matrix.mul_vec(&rho.vec_cols())?;
        CMatrix::unvec_cols(&v, d, d)
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        let d = dim_of(self.n_qubits);
        let s = &self.matrix;
        let matrix = CMatrix::from_fn(d * d, d * d, |r, c| {
            let (b, a) = (r / d, r % d);
            let (bp, ap) = (c / d, c % d);
            s[(a + d * ap, b + d * bp)]
        });
        ChoiMatrix {
            n_qubits: self.n_qubits,
            matrix,
        }
    }

    pub fn to_process(&self) -> Result<ProcessMatrix> {
        self.to_choi().to_process()
    }

    /// Like [`Superoperator::to_process`] but symmetrizes round-off first.
    pub(crate) fn to_process_hermitian(&self) -> Result<ProcessMatrix> {
        let chi = choi_to_chi(self.n_qubits, &self.to_choi().matrix).hermitian_part();
        ProcessMatrix::from_hermitian(self.n_qubits, chi)
    }
}

/// Convenience: `|psi><psi|` for a ket written as `(re, im)` pairs.
pub fn ket(amplitudes: &[(f64, f64)]) -> Vec<C64> {
    amplitudes.iter().map(|&(r, i)| c64(r, i)).collect()
}
