//! Dense complex matrices sized for one- and two-qubit work.
//!
//! Everything here is exact-shape and row-major. The largest matrices in the
//! crate are the 16x16 superoperators and two-qubit process matrices, so no
//! attempt is made at blocking or sparsity.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;

use crate::error::{dim_mismatch, Error, Result};

pub type C64 = Complex<f64>;

/// Tolerance used for eigenvalue-based positivity checks.
pub const PSD_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Which tensor factor of a two-qubit operator an operation acts on.
/// `A` is the first factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c64(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_mismatch("CMatrix::from_vec", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |i, j| c64(rows[i][j], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                c64(values[i], 0.0)
            } else {
                C64::default()
            }
        })
    }

    /// `|u><v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
    }

    /// The matrix unit `|i><j|` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = c64(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + adj[(i, j)]) * 0.5
        })
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match hermitian_eig(&self.hermitian_part()) {
            Ok(e) => e.values.first().is_none_or(|&v| v >= -tol),
            Err(_) => false,
        }
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = hermitian_eig(&self.hermitian_part())?;
        Ok(e.values.first().copied().unwrap_or(0.0))
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(dim_mismatch(
                "matmul",
                format!("{} rows", self.cols),
                format!("{} rows", rhs.rows),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(dim_mismatch("mul_vec", self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// Column-stacking vectorization: entry `(i, j)` lands at `i + rows * j`.
    pub fn vec_cols(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn unvec_cols(v: &[C64], rows: usize, cols: usize) -> Result<Self> {
        if v.len() != rows * cols {
            return Err(dim_mismatch("unvec_cols", rows * cols, v.len()));
        }
        Ok(Self::from_fn(rows, cols, |i, j| v[i + rows * j]))
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(dim_mismatch("solve", self.rows, rhs.rows));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pivot <= scale * 1e-14 {
                return Err(Error::Singular);
            }
            if p != k {
                a.swap_rows(p, k);
                b.swap_rows(p, k);
            }
            let inv = a[(k, k)].inv();
            for i in (k + 1)..n {
                let f = a[(i, k)] * inv;
                if f == C64::default() {
                    continue;
                }
                for j in k..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
                for j in 0..b.cols {
                    let t = b[(k, j)];
                    b[(i, j)] -= f * t;
                }
            }
        }
        for j in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = b[(i, j)];
                for k in (i + 1)..n {
                    s -= a[(i, k)] * b[(k, j)];
                }
                b[(i, j)] = s / a[(i, i)];
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                assert_eq!(self.dim(), rhs.dim(), concat!(stringify!($method), " shape mismatch"));
                CMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $trait<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.dim(), rhs.dim(), "add_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.dim(), rhs.dim(), "sub_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    /// Panics on shape mismatch; use [`CMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Mul<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, s: f64) -> CMatrix {
        self.scale_real(s)
    }
}

impl Mul<C64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, s: C64) -> CMatrix {
        self.scale(s)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = b.dim();
    CMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn require_two_qubit(op: &'static str, m: &CMatrix) -> Result<()> {
    if m.dim() != (4, 4) {
        return Err(dim_mismatch(op, "4x4", format!("{}x{}", m.rows, m.cols)));
    }
    Ok(())
}

/// Transposes the indices of one qubit of a 4x4 operator.
pub fn partial_transpose(m: &CMatrix, subsystem: Subsystem) -> Result<CMatrix> {
    require_two_qubit("partial_transpose", m)?;
    Ok(CMatrix::from_fn(4, 4, |r, c| {
        let (ra, rb, ca, cb) = (r >> 1, r & 1, c >> 1, c & 1);
        let (ra, rb, ca, cb) = match subsystem {
            Subsystem::A => (ca, rb, ra, cb),
            Subsystem::B => (ra, cb, ca, rb),
        };
        m[((ra << 1) | rb, (ca << 1) | cb)]
    }))
}

/// Traces out `subsystem` of a 4x4 operator, leaving the other qubit.
pub fn partial_trace(m: &CMatrix, subsystem: Subsystem) -> Result<CMatrix> {
    require_two_qubit("partial_trace", m)?;
    Ok(CMatrix::from_fn(2, 2, |i, j| {
        (0..2)
            .map(|k| match subsystem {
                Subsystem::A => m[((k << 1) | i, (k << 1) | j)],
                Subsystem::B => m[((i << 1) | k, (j << 1) | k)],
            })
            .sum()
    }))
}

/// `tr(a^dagger b)`
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(dim_mismatch(
            "hs_inner",
            format!("{}x{}", a.rows, a.cols),
            format!("{}x{}", b.rows, b.cols),
        ));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascend; column `k`
/// of `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(f(lambda)) V^dagger`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * fl[k])
                .sum()
        })
    }
}

/// Hermitian eigensolver.
///
/// Works on the real-symmetric embedding `[[Re M, -Im M], [Im M, Re M]]`:
/// Householder tridiagonalization followed by implicit QL. Every eigenvalue of
/// `M` appears twice in the embedding, and every real eigenvector `[a; b]`
/// yields the complex eigenvector `a + ib`, so each degenerate cluster is
/// reduced to an orthonormal complex basis by pivoted Gram-Schmidt.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(dim_mismatch(
            "hermitian_eig",
            "square",
            format!("{}x{}", m.rows, m.cols),
        ));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let scale = m.max_abs().max(1.0);
    let deviation = m.hermitian_deviation();
    if deviation > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation });
    }

    let nn = 2 * n;
    let mut v = vec![vec![0.0f64; nn]; nn];
    for i in 0..n {
        for j in 0..n {
            // symmetrize on the fly so tiny asymmetries don't leak in
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            v[i][j] = z.re;
            v[i + n][j + n] = z.re;
            v[i + n][j] = z.im;
            v[i][j + n] = -z.im;
        }
    }
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let values_scale = d
        .iter()
        .fold(0.0f64, |a, &x| a.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-10 * values_scale;

    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < nn {
        let mut end = start + 1;
        while end < nn && d[end] - d[end - 1] <= cluster_tol {
            end += 1;
        }
        if (end - start) % 2 == 1 && end < nn {
            end += 1;
        }
        let mut candidates: Vec<Vec<C64>> = (start..end)
            .map(|k| (0..n).map(|i| c64(v[i][k], v[i + n][k])).collect())
            .collect();
        let want = (end - start).div_ceil(2);
        let mut picked: Vec<Vec<C64>> = Vec::with_capacity(want);
        for _ in 0..want {
            let (best, norm) = candidates
                .iter()
                .enumerate()
                .map(|(k, c)| (k, vnorm(c)))
                .fold((0, -1.0), |b, cur| if cur.1 > b.1 { cur } else { b });
            if norm <= 1e-8 {
                break;
            }
            let mut q = candidates.swap_remove(best);
            q.iter_mut().for_each(|z| *z /= norm);
            for c in candidates.iter_mut() {
                let proj: C64 = q.iter().zip(c.iter()).map(|(a, b)| a.conj() * b).sum();
                for (ci, qi) in c.iter_mut().zip(&q) {
                    *ci -= proj * qi;
                }
            }
            picked.push(q);
        }
        if picked.len() != want {
            return Err(Error::NoConvergence);
        }
        for q in picked {
            let mq = m.mul_vec(&q)?;
            let rq: C64 = q.iter().zip(&mq).map(|(a, b)| a.conj() * b).sum();
            values.push(rq.re);
            vectors.push(q);
        }
        start = end;
    }
    if values.len() != n {
        return Err(Error::NoConvergence);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| vectors[order[j]][i]);
    Ok(HermitianEigen {
        values: sorted_values,
        vectors: vecs,
    })
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// Householder reduction to tridiagonal form (EISPACK tred2).
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (EISPACK tql2); sorts ascending.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in v.iter_mut() {
                row.swap(i, k);
            }
        }
    }
    Ok(())
}

/// Clips negative eigenvalues of a Hermitian matrix to zero.
pub fn psd_clip(m: &CMatrix) -> Result<CMatrix> {
    let e = hermitian_eig(&m.hermitian_part())?;
    Ok(e.reconstruct_with(|l| l.max(0.0)))
}

/// Matrix exponential by scaling and squaring with a diagonal [6/6] Padé
/// approximant.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(dim_mismatch(
            "expm",
            "square",
            format!("{}x{}", a.rows, a.cols),
        ));
    }
    let n = a.rows;
    let norm_inf = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm_inf > 0.5 {
        (norm_inf / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = a.scale_real(0.5f64.powi(squarings));

    const Q: usize = 6;
    let mut coef = 1.0;
    let mut numer = CMatrix::identity(n);
    let mut denom = CMatrix::identity(n);
    let mut power = CMatrix::identity(n);
    for k in 1..=Q {
        coef *= (Q - k + 1) as f64 / ((2 * Q - k + 1) * k) as f64;
        power = &power * &x;
        let term = power.scale_real(coef);
        numer += &term;
        if k % 2 == 0 {
            denom += &term;
        } else {
            denom -= &term;
        }
    }
    let mut f = denom.solve(&numer)?;
    for _ in 0..squarings {
        f = &f * &f;
    }
    Ok(f)
}

pub mod pauli {
    //! Single-qubit Pauli matrices and common kets.
    use super::{c64, CMatrix, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn i2() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_vec(
            2,
            2,
            vec![c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)],
        )
        .expect("2x2")
    }

    pub fn z() -> CMatrix {
        CMatrix::diag_real(&[1.0, -1.0])
    }

    pub fn ket0() -> Vec<C64> {
        vec![c64(1.0, 0.0), c64(0.0, 0.0)]
    }

    pub fn ket1() -> Vec<C64> {
        vec![c64(0.0, 0.0), c64(1.0, 0.0)]
    }

    pub fn ket_plus() -> Vec<C64> {
        vec![c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0)]
    }

    pub fn ket_minus() -> Vec<C64> {
        vec![c64(FRAC_1_SQRT_2, 0.0), c64(-FRAC_1_SQRT_2, 0.0)]
    }

    /// `(|0> + i|1>)/sqrt 2`
    pub fn ket_r() -> Vec<C64> {
        vec![c64(FRAC_1_SQRT_2, 0.0), c64(0.0, FRAC_1_SQRT_2)]
    }

    /// `(|0> - i|1>)/sqrt 2`
    pub fn ket_l() -> Vec<C64> {
        vec![c64(FRAC_1_SQRT_2, 0.0), c64(0.0, -FRAC_1_SQRT_2)]
    }

    pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
        a.iter()
            .flat_map(|x| b.iter().map(move |y| x * y))
            .collect()
    }

    /// `(|00> + |11>)/sqrt 2`
    pub fn phi_plus() -> Vec<C64> {
        vec![
            c64(FRAC_1_SQRT_2, 0.0),
            c64(0.0, 0.0),
            c64(0.0, 0.0),
            c64(FRAC_1_SQRT_2, 0.0),
        ]
    }
}
