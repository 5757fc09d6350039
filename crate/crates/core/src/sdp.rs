//! Semidefinite programs over Hermitian matrix variables and a dense
//! primal-dual interior-point solver for them.
//!
//! A program is
//!
//! ```text
//! minimize    c(x)
//! subject to  H_k(x) ⪰ 0     (affine Hermitian expressions)
//!             e_l(x) = 0     (affine real scalars)
//! ```
//!
//! where `x` collects the real parameters of the Hermitian variables. Each
//! `H_k` becomes a real symmetric block (complex blocks through the
//! embedding `[[Re, -Im], [Im, Re]]`), giving the standard block form
//! `F(y) = F0 + sum_i y_i F_i ⪰ 0, E y = f`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{c64, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIterations => "max_iterations",
        })
    }
}

/// Handle to a Hermitian matrix variable of a [`ConicProgram`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermVar {
    index: usize,
    dim: usize,
    offset: usize,
}

impl HermVar {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Number of real parameters (`dim^2`).
    pub fn n_scalars(&self) -> usize {
        self.dim * self.dim
    }

    /// Global scalar indices of this variable.
    pub fn scalars(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.n_scalars()
    }
}

/// Local parameter `s` of a `d x d` Hermitian variable: the first `d` are
/// diagonal entries, then for each `i < j` the real and imaginary part of
/// entry `(i, j)`.
pub fn herm_basis(d: usize, s: usize) -> CMatrix {
    if s < d {
        return CMatrix::unit(d, s, s);
    }
    let (i, j, imag) = offdiag_index(d, s);
    let mut m = CMatrix::zeros(d, d);
    if imag {
        m[(i, j)] = c64(0.0, 1.0);
        m[(j, i)] = c64(0.0, -1.0);
    } else {
        m[(i, j)] = c64(1.0, 0.0);
        m[(j, i)] = c64(1.0, 0.0);
    }
    m
}

fn offdiag_index(d: usize, s: usize) -> (usize, usize, bool) {
    let k = (s - d) / 2;
    let imag = (s - d) % 2 == 1;
    let mut rem = k;
    for i in 0..d {
        let row = d - 1 - i;
        if rem < row {
            return (i, i + 1 + rem, imag);
        }
        rem -= row;
    }
    unreachable!("parameter index out of range")
}

/// Hermitian matrix from its `d^2` real parameters.
pub fn herm_from_scalars(d: usize, xs: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for (s, &v) in xs.iter().enumerate() {
        if s < d {
            m[(s, s)] = c64(v, 0.0);
        } else {
            let (i, j, imag) = offdiag_index(d, s);
            let z = if imag { c64(0.0, v) } else { c64(v, 0.0) };
            m[(i, j)] += z;
            m[(j, i)] += z.conj();
        }
    }
    m
}

/// Parameters of a Hermitian matrix (inverse of [`herm_from_scalars`]).
pub fn herm_to_scalars(m: &CMatrix) -> Vec<f64> {
    let d = m.rows();
    let mut out: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    for i in 0..d {
        for j in i + 1..d {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

/// `constant + sum_s x_s * coeff_s` with Hermitian constant and coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineHerm {
    constant: CMatrix,
    terms: BTreeMap<usize, CMatrix>,
}

impl AffineHerm {
    pub fn constant(m: CMatrix) -> Self {
        Self {
            constant: m,
            terms: BTreeMap::new(),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self::constant(CMatrix::zeros(d, d))
    }

    /// The variable itself.
    pub fn var(v: HermVar) -> Self {
        Self::linear(v, |b| Ok(b.clone())).expect("identity map")
    }

    /// `f(X)` for a real-linear, Hermiticity-preserving `f`, built by
    /// applying `f` to every basis element of the variable.
    pub fn linear(v: HermVar, f: impl Fn(&CMatrix) -> Result<CMatrix>) -> Result<Self> {
        let mut terms = BTreeMap::new();
        let mut dim = None;
        for s in 0..v.n_scalars() {
            let img = f(&herm_basis(v.dim, s))?;
            dim.get_or_insert(img.rows());
            if img.max_abs() > 0.0 {
                terms.insert(v.offset + s, img);
            }
        }
        let d = dim.unwrap_or(0);
        Ok(Self {
            constant: CMatrix::zeros(d, d),
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.constant.rows()
    }

    pub fn constant_part(&self) -> &CMatrix {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn plus(mut self, other: &AffineHerm) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(dim_mismatch("AffineHerm::plus", self.dim(), other.dim()));
        }
        self.constant += &other.constant;
        for (k, m) in &other.terms {
            match self.terms.get_mut(k) {
                Some(t) => *t += m,
                None => {
                    self.terms.insert(*k, m.clone());
                }
            }
        }
        Ok(self)
    }

    pub fn minus(self, other: &AffineHerm) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            constant: self.constant.scale_real(s),
            terms: self
                .terms
                .iter()
                .map(|(k, m)| (*k, m.scale_real(s)))
                .collect(),
        }
    }

    pub fn plus_constant(mut self, m: &CMatrix) -> Result<Self> {
        if m.dim() != self.constant.dim() {
            return Err(dim_mismatch(
                "AffineHerm::plus_constant",
                self.dim(),
                m.rows(),
            ));
        }
        self.constant += m;
        Ok(self)
    }

    /// Composes a further linear map onto the expression.
    pub fn map(&self, f: impl Fn(&CMatrix) -> Result<CMatrix>) -> Result<Self> {
        let constant = f(&self.constant)?;
        let mut terms = BTreeMap::new();
        for (k, m) in &self.terms {
            let img = f(m)?;
            if img.max_abs() > 0.0 {
                terms.insert(*k, img);
            }
        }
        Ok(Self { constant, terms })
    }

    pub fn eval(&self, x: &[f64]) -> CMatrix {
        let mut m = self.constant.clone();
        for (k, t) in &self.terms {
            if x[*k] != 0.0 {
                m += &t.scale_real(x[*k]);
            }
        }
        m
    }

    pub fn trace(&self) -> AffineScalar {
        AffineScalar {
            constant: self.constant.trace().re,
            coeffs: self
                .terms
                .iter()
                .map(|(k, m)| (*k, m.trace().re))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }

    /// `Re tr(self * m)` for Hermitian `m`.
    pub fn inner(&self, m: &CMatrix) -> Result<AffineScalar> {
        let ip = |a: &CMatrix| crate::linalg::hs_inner(a, m).map(|z| z.re);
        let mut coeffs = BTreeMap::new();
        for (k, t) in &self.terms {
            let v = ip(t)?;
            if v != 0.0 {
                coeffs.insert(*k, v);
            }
        }
        Ok(AffineScalar {
            constant: ip(&self.constant)?,
            coeffs,
        })
    }
}

/// `constant + sum_s coeff_s x_s`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineScalar {
    pub constant: f64,
    pub coeffs: BTreeMap<usize, f64>,
}

impl AffineScalar {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn plus(mut self, other: &AffineScalar) -> Self {
        self.constant += other.constant;
        for (k, v) in &other.coeffs {
            *self.coeffs.entry(*k).or_insert(0.0) += v;
        }
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            constant: self.constant * s,
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * s)).collect(),
        }
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|(k, v)| v * x[*k]).sum::<f64>()
    }
}

#[derive(Clone, Debug)]
pub struct PsdConstraint {
    pub name: String,
    pub expr: AffineHerm,
}

/// Block-structured SDP over Hermitian matrix variables.
#[derive(Clone, Debug, Default)]
pub struct ConicProgram {
    vars: Vec<HermVar>,
    n_scalars: usize,
    psd: Vec<PsdConstraint>,
    eqs: Vec<(String, AffineScalar)>,
    objective: AffineScalar,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, dim: usize) -> HermVar {
        let v = HermVar {
            index: self.vars.len(),
            dim,
            offset: self.n_scalars,
        };
        self.n_scalars += dim * dim;
        self.vars.push(v);
        v
    }

    /// Requires `expr ⪰ 0`.
    pub fn add_psd(&mut self, name: impl Into<String>, expr: AffineHerm) -> Result<()> {
        self.check_expr(&expr)?;
        self.psd.push(PsdConstraint {
            name: name.into(),
            expr,
        });
        Ok(())
    }

    /// Requires `expr >= 0` (a 1x1 block).
    pub fn add_nonneg(&mut self, name: impl Into<String>, expr: AffineScalar) -> Result<()> {
        let to_herm = AffineHerm {
            constant: CMatrix::from_fn(1, 1, |_, _| c64(expr.constant, 0.0)),
            terms: expr
                .coeffs
                .iter()
                .map(|(k, v)| (*k, CMatrix::from_fn(1, 1, |_, _| c64(*v, 0.0))))
                .collect(),
        };
        self.add_psd(name, to_herm)
    }

    /// Requires `expr == 0`.
    pub fn add_eq(&mut self, name: impl Into<String>, expr: AffineScalar) -> Result<()> {
        if let Some((k, _)) = expr.coeffs.iter().find(|(k, _)| **k >= self.n_scalars) {
            return Err(Error::InvalidParameter(format!(
                "equality references unknown scalar {k}"
            )));
        }
        self.eqs.push((name.into(), expr));
        Ok(())
    }

    pub fn minimize(&mut self, objective: AffineScalar) {
        self.objective = objective;
    }

    fn check_expr(&self, e: &AffineHerm) -> Result<()> {
        if !e.constant.is_square() {
            return Err(dim_mismatch(
                "add_psd",
                "square",
                format!("{:?}", e.constant.dim()),
            ));
        }
        let dev = e.constant.hermitian_deviation();
        if dev > 1e-12 * (1.0 + e.constant.max_abs()) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        for (k, m) in &e.terms {
            if *k >= self.n_scalars {
                return Err(Error::InvalidParameter(format!(
                    "expression references unknown scalar {k}"
                )));
            }
            if m.dim() != e.constant.dim() {
                return Err(dim_mismatch("add_psd", e.dim(), m.rows()));
            }
            let dev = m.hermitian_deviation();
            if dev > 1e-12 * (1.0 + m.max_abs()) {
                return Err(Error::NotHermitian { deviation: dev });
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> &[HermVar] {
        &self.vars
    }

    pub fn n_scalars(&self) -> usize {
        self.n_scalars
    }

    pub fn psd_constraints(&self) -> &[PsdConstraint] {
        &self.psd
    }

    pub fn objective(&self) -> &AffineScalar {
        &self.objective
    }

    /// Variable values from a flat parameter vector.
    pub fn unpack(&self, x: &[f64]) -> Vec<CMatrix> {
        self.vars
            .iter()
            .map(|v| herm_from_scalars(v.dim, &x[v.scalars()]))
            .collect()
    }

    /// Evaluates every constraint at `values` (one matrix per variable).
    pub fn replay(&self, values: &[CMatrix]) -> Result<Replay> {
        if values.len() != self.vars.len() {
            return Err(dim_mismatch("replay", self.vars.len(), values.len()));
        }
        let mut x = Vec::with_capacity(self.n_scalars);
        for (v, m) in self.vars.iter().zip(values) {
            if m.dim() != (v.dim, v.dim) {
                return Err(dim_mismatch("replay", v.dim, m.rows()));
            }
            x.extend(herm_to_scalars(m));
        }
        let mut worst_psd = f64::INFINITY;
        let mut worst_name = String::new();
        for c in &self.psd {
            let m = c.expr.eval(&x).hermitian_part();
            let e = m.min_eigenvalue()?;
            if e < worst_psd {
                worst_psd = e;
                worst_name = c.name.clone();
            }
        }
        let worst_eq = self
            .eqs
            .iter()
            .map(|(_, e)| e.eval(&x).abs())
            .fold(0.0, f64::max);
        Ok(Replay {
            objective: self.objective.eval(&x),
            min_psd_eigenvalue: worst_psd,
            tightest_constraint: worst_name,
            max_equality_violation: worst_eq,
        })
    }

    /// Self-describing JSON dump for cross-checking with other solvers.
    pub fn debug_json(&self) -> serde_json::Value {
        use serde_json::json;
        let mat = |m: &CMatrix| json!(crate::formats::MatrixJson::from(m));
        let scalar = |s: &AffineScalar| {
            json!({
                "constant": s.constant,
                "coeffs": s.coeffs.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
            })
        };
        json!({
            "variables": self.vars.iter().map(|v| json!({
                "dim": v.dim,
                "offset": v.offset,
                "parametrization": "diag, then (re, im) of upper triangle row by row",
            })).collect::<Vec<_>>(),
            "psd_constraints": self.psd.iter().map(|c| json!({
                "name": c.name,
                "constant": mat(&c.expr.constant),
                "terms": c.expr.terms.iter().map(|(k, m)| json!({"scalar": k, "coeff": mat(m)})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "equalities": self.eqs.iter().map(|(n, e)| json!({"name": n, "expr": scalar(e)})).collect::<Vec<_>>(),
            "minimize": scalar(&self.objective),
        })
    }

    /// Real symmetric block form of the program.
    fn standard_form(&self) -> StandardForm {
        let m = self.n_scalars;
        let mut c = DVector::zeros(m);
        for (k, v) in &self.objective.coeffs {
            c[*k] += v;
        }
        let blocks = self
            .psd
            .iter()
            .map(|p| RealBlock::from_expr(&p.expr))
            .collect();
        let p = self.eqs.len();
        let mut ea = DMatrix::zeros(p, m);
        let mut eb = DVector::zeros(p);
        for (l, (_, e)) in self.eqs.iter().enumerate() {
            for (k, v) in &e.coeffs {
                ea[(l, *k)] += v;
            }
            eb[l] = -e.constant;
        }
        StandardForm {
            c,
            obj_const: self.objective.constant,
            blocks,
            ea,
            eb,
        }
    }
}

/// Constraint evaluation of a candidate solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replay {
    pub objective: f64,
    pub min_psd_eigenvalue: f64,
    pub tightest_constraint: String,
    pub max_equality_violation: f64,
}

impl Replay {
    pub fn is_feasible(&self, feas_tol: f64) -> bool {
        self.min_psd_eigenvalue >= -feas_tol && self.max_equality_violation <= feas_tol
    }
}

type Triplets = Vec<(usize, usize, f64)>;

#[derive(Clone, Debug)]
struct RealBlock {
    n: usize,
    f0: DMatrix<f64>,
    terms: Vec<(usize, Triplets)>,
}

/// `[[Re H, -Im H], [Im H, Re H]]`, or just `Re H` when `H` is real.
pub fn real_embed(h: &CMatrix) -> Result<DMatrix<f64>> {
    let dev = h.hermitian_deviation();
    if dev > 1e-12 * (1.0 + h.max_abs()) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(embed(h, true))
}

fn embed(h: &CMatrix, complex: bool) -> DMatrix<f64> {
    let d = h.rows();
    if !complex {
        return DMatrix::from_fn(d, d, |i, j| h[(i, j)].re);
    }
    DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z: C64 = h[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

impl RealBlock {
    fn from_expr(e: &AffineHerm) -> Self {
        let complex = e.constant.as_slice().iter().any(|z| z.im != 0.0)
            || e.terms
                .values()
                .any(|m| m.as_slice().iter().any(|z| z.im != 0.0));
        let f0 = embed(&e.constant, complex);
        let terms = e
            .terms
            .iter()
            .map(|(k, m)| {
                let a = embed(m, complex);
                let mut t = Vec::new();
                for j in 0..a.ncols() {
                    for i in 0..a.nrows() {
                        if a[(i, j)] != 0.0 {
                            t.push((i, j, a[(i, j)]));
                        }
                    }
                }
                (*k, t)
            })
            .collect();
        Self {
            n: f0.nrows(),
            f0,
            terms,
        }
    }

    /// `sum_i y_i A_i` (without the constant).
    fn lin(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, t) in &self.terms {
            let v = y[*k];
            if v != 0.0 {
                for &(i, j, a) in t {
                    m[(i, j)] += v * a;
                }
            }
        }
        m
    }

    /// `out_i += <A_i, X>`
    fn adjoint_into(&self, x: &DMatrix<f64>, out: &mut DVector<f64>) {
        for (k, t) in &self.terms {
            out[*k] += t.iter().map(|&(i, j, a)| a * x[(i, j)]).sum::<f64>();
        }
    }

    /// `M_ij += <A_i, W A_j W>`
    fn schur_into(&self, w: &DMatrix<f64>, m: &mut DMatrix<f64>) {
        let n = self.n;
        let total: usize = self.terms.iter().map(|(_, t)| t.len()).sum();
        let mut rest = total;
        for (a, (i, ti)) in self.terms.iter().enumerate() {
            // against all later terms, a dense W A_i W beats the pairwise sum
            // once A_i has many entries
            let dense = ti.len() * rest > 2 * n * n * n + rest;
            let wai_w = dense.then(|| {
                let mut ai = DMatrix::zeros(n, n);
                for &(p, q, u) in ti {
                    ai[(p, q)] += u;
                }
                w * ai * w
            });
            for (j, tj) in &self.terms[a..] {
                let acc: f64 = match &wai_w {
                    // <A_i, W A_j W> = <A_j, W A_i W>, W symmetric
                    Some(b) => tj.iter().map(|&(r, s, v)| v * b[(r, s)]).sum(),
                    None => {
                        let mut acc = 0.0;
                        for &(p, q, u) in ti {
                            for &(r, s, v) in tj {
                                acc += u * v * w[(p, r)] * w[(s, q)];
                            }
                        }
                        acc
                    }
                };
                m[(*i, *j)] += acc;
                if i != j {
                    m[(*j, *i)] += acc;
                }
            }
            rest -= ti.len();
        }
    }
}

struct StandardForm {
    c: DVector<f64>,
    obj_const: f64,
    blocks: Vec<RealBlock>,
    ea: DMatrix<f64>,
    eb: DVector<f64>,
}

impl StandardForm {
    fn m(&self) -> usize {
        self.c.len()
    }

    fn adjoint(&self, xs: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (b, x) in self.blocks.iter().zip(xs) {
            b.adjoint_into(x, &mut out);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Duality-gap tolerance, absolute for `|objective| <= 1` and relative above.
    pub gap_tol: f64,
    /// Relative primal and dual residual tolerance.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            feas_tol: 1e-7,
            max_iter: 200,
        }
    }
}

/// Per-iteration progress of the interior-point method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Complementarity `<X, S>`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub optimal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// One Hermitian matrix per program variable.
    pub variable_values: Vec<CMatrix>,
    pub scalars: Vec<f64>,
    pub history: Vec<IterationRecord>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Converts a non-optimal status into an error naming `quantity`.
    pub fn require_optimal(self, quantity: &'static str) -> Result<Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Solver {
                quantity,
                status: self.status,
                gap: self.gap,
                iterations: self.iterations,
            })
        }
    }
}

/// Seam for alternative solvers; [`InteriorPoint`] is the default.
pub trait SdpBackend {
    fn solve(&self, program: &ConicProgram, options: &SolverOptions) -> Result<SdpSolution>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorPoint;

impl SdpBackend for InteriorPoint {
    fn solve(&self, program: &ConicProgram, options: &SolverOptions) -> Result<SdpSolution> {
        solve(program, options)
    }
}

pub fn solve(program: &ConicProgram, options: &SolverOptions) -> Result<SdpSolution> {
    if program.n_scalars == 0 {
        return Err(Error::InvalidParameter("program has no variables".into()));
    }
    let sf = program.standard_form();
    let out = Ipm::new(&sf, options).run();
    let scalars: Vec<f64> = out.y.iter().copied().collect();
    Ok(SdpSolution {
        status: out.status,
        optimal_value: out.last.primal_objective,
        dual_value: out.last.dual_objective,
        gap: out.last.gap,
        iterations: out.iterations,
        primal_residual: out.last.primal_residual,
        dual_residual: out.last.dual_residual,
        variable_values: program.unpack(&scalars),
        scalars,
        history: out.history,
    })
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

struct Scaling {
    /// `W = G G^T` with `G^T S G = G^-1 X G^-T = diag(d)`.
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    d: DVector<f64>,
    chol_x: DMatrix<f64>,
    chol_s: DMatrix<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let l = x.clone().cholesky()?.l();
    let r = s.clone().cholesky()?.l();
    let svd = (r.transpose() * &l).svd(true, true);
    let v = svd.v_t?.transpose();
    let d = svd.singular_values;
    if d.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let dm12 = DMatrix::from_diagonal(&d.map(|v| 1.0 / v.sqrt()));
    let dp12 = DMatrix::from_diagonal(&d.map(|v| v.sqrt()));
    let g = &l * &v * dm12;
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.nrows()))?;
    let g_inv = dp12 * v.transpose() * l_inv;
    let w = &g * g.transpose();
    Some(Scaling {
        g,
        g_inv,
        w,
        d,
        chol_x: l,
        chol_s: r,
    })
}

/// Largest `a` with `chol*chol^T + a*dx ⪰ 0`, or infinity.
fn max_step(chol: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let n = chol.nrows();
    let Some(linv) = chol
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
    else {
        return 0.0;
    };
    let m = sym(&(&linv * dx * linv.transpose()));
    let lmin = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct IpmOutcome {
    status: SolveStatus,
    y: DVector<f64>,
    last: IterationRecord,
    iterations: usize,
    history: Vec<IterationRecord>,
}

struct Direction {
    dy: DVector<f64>,
    dlam: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
}

enum SchurFactor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if let Some(c) = m.clone().cholesky() {
            return Some(SchurFactor::Chol(c));
        }
        let scale = m
            .diagonal()
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(1e-300);
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += 1e-13 * scale;
        }
        if let Some(c) = reg.cholesky() {
            return Some(SchurFactor::Chol(c));
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(SchurFactor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        match self {
            SchurFactor::Chol(c) => Some(c.solve(b)),
            SchurFactor::Lu(lu) => lu.solve(b),
        }
    }
}

struct Ipm<'a> {
    sf: &'a StandardForm,
    opts: SolverOptions,
    y: DVector<f64>,
    lam: DVector<f64>,
    xs: Vec<DMatrix<f64>>,
    ss: Vec<DMatrix<f64>>,
    n_total: usize,
    f0_norm: f64,
    c_norm: f64,
    eb_norm: f64,
}

impl<'a> Ipm<'a> {
    fn new(sf: &'a StandardForm, opts: &SolverOptions) -> Self {
        let m = sf.m();
        let mut xs = Vec::with_capacity(sf.blocks.len());
        let mut ss = Vec::with_capacity(sf.blocks.len());
        for b in &sf.blocks {
            let n = b.n as f64;
            let mut a_norm = vec![0.0f64; m];
            for (k, t) in &b.terms {
                a_norm[*k] = t.iter().map(|(_, _, v)| v * v).sum::<f64>().sqrt();
            }
            let mut xi = 10.0f64.max(n.sqrt());
            let mut eta = 10.0f64.max(n.sqrt()).max(b.f0.norm());
            for (k, _) in &b.terms {
                xi = xi.max(n.sqrt() * (1.0 + sf.c[*k].abs()) / (1.0 + a_norm[*k]));
                eta = eta.max(a_norm[*k]);
            }
            xs.push(DMatrix::identity(b.n, b.n) * xi);
            ss.push(DMatrix::identity(b.n, b.n) * eta);
        }
        let n_total = sf.blocks.iter().map(|b| b.n).sum();
        let f0_norm = sf
            .blocks
            .iter()
            .map(|b| b.f0.norm_squared())
            .sum::<f64>()
            .sqrt();
        Self {
            sf,
            opts: *opts,
            y: DVector::zeros(m),
            lam: DVector::zeros(sf.ea.nrows()),
            xs,
            ss,
            n_total,
            f0_norm,
            c_norm: sf.c.norm(),
            eb_norm: sf.eb.norm(),
        }
    }

    fn gap_of(xs: &[DMatrix<f64>], ss: &[DMatrix<f64>]) -> f64 {
        xs.iter().zip(ss).map(|(x, s)| inner(x, s)).sum()
    }

    fn residuals(&self) -> (Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>) {
        let sf = self.sf;
        let rp: Vec<DMatrix<f64>> = sf
            .blocks
            .iter()
            .zip(&self.ss)
            .map(|(b, s)| &b.f0 + b.lin(&self.y) - s)
            .collect();
        let re = &sf.eb - &sf.ea * &self.y;
        let rd = &sf.c - sf.adjoint(&self.xs) - sf.ea.transpose() * &self.lam;
        (rp, re, rd)
    }

    fn record(
        &self,
        iteration: usize,
        rp: &[DMatrix<f64>],
        re: &DVector<f64>,
        rd: &DVector<f64>,
    ) -> IterationRecord {
        let sf = self.sf;
        let pobj = sf.c.dot(&self.y) + sf.obj_const;
        let dobj = -sf
            .blocks
            .iter()
            .zip(&self.xs)
            .map(|(b, x)| inner(&b.f0, x))
            .sum::<f64>()
            + self.lam.dot(&sf.eb)
            + sf.obj_const;
        let rp_norm = (rp.iter().map(|r| r.norm_squared()).sum::<f64>() + re.norm_squared()).sqrt();
        IterationRecord {
            iteration,
            primal_objective: pobj,
            dual_objective: dobj,
            gap: Self::gap_of(&self.xs, &self.ss),
            primal_residual: rp_norm / (1.0 + self.f0_norm + self.eb_norm),
            dual_residual: rd.norm() / (1.0 + self.c_norm),
            step_primal: 0.0,
            step_dual: 0.0,
        }
    }

    fn converged(&self, r: &IterationRecord) -> bool {
        let scale = r.primal_objective.abs().max(1.0);
        r.primal_residual <= self.opts.feas_tol
            && r.dual_residual <= self.opts.feas_tol
            && r.gap <= self.opts.gap_tol * scale
            && (r.primal_objective - r.dual_objective).abs() <= self.opts.gap_tol * scale
    }

    /// Ray certificates: a dual ray proves the constraints infeasible, a
    /// primal ray with negative cost proves the objective unbounded.
    fn detect_rays(&self) -> Option<SolveStatus> {
        let sf = self.sf;
        let x_norm = self.xs.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt();
        if x_norm > 1e6 {
            let t = -sf
                .blocks
                .iter()
                .zip(&self.xs)
                .map(|(b, x)| inner(&b.f0, x))
                .sum::<f64>()
                + self.lam.dot(&sf.eb);
            let ray = sf.adjoint(&self.xs) + sf.ea.transpose() * &self.lam;
            if t > 0.0 && ray.norm() <= 1e-8 * t.max(x_norm) {
                return Some(SolveStatus::Infeasible);
            }
        }
        let y_norm = self.y.norm();
        if y_norm > 1e6 {
            let g = -sf.c.dot(&self.y);
            if g > 1e-6 * self.c_norm * y_norm {
                let mut worst = 0.0f64;
                for b in &sf.blocks {
                    let a = sym(&b.lin(&self.y));
                    let lmin = SymmetricEigen::new(a)
                        .eigenvalues
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.min(lmin);
                }
                let eq = (&sf.ea * &self.y).norm();
                if worst >= -1e-8 * y_norm && eq <= 1e-8 * y_norm {
                    return Some(SolveStatus::Unbounded);
                }
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        scal: &[Scaling],
        factor: &SchurFactor,
        ea_minv_eat: Option<&nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
        rhs_scaled: &[DMatrix<f64>],
        rp: &[DMatrix<f64>],
        re: &DVector<f64>,
        rd: &DVector<f64>,
    ) -> Option<Direction> {
        let sf = self.sf;
        // Q = G D G^T - W rp W with D solving V D + D V = 2 R
        let q: Vec<DMatrix<f64>> = scal
            .iter()
            .zip(rhs_scaled)
            .zip(rp)
            .map(|((sc, r), rp)| {
                let n = sc.d.len();
                let dmat = DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (sc.d[i] + sc.d[j]));
                &sc.g * dmat * sc.g.transpose() - &sc.w * rp * &sc.w
            })
            .collect();
        let rhs = sf.adjoint(&q) - rd;
        let (mut dy, mut dlam) = self.solve_kkt(factor, ea_minv_eat, &rhs, re)?;
        let mut dx: Vec<DMatrix<f64>> = sf
            .blocks
            .iter()
            .zip(scal)
            .zip(&q)
            .map(|((b, sc), q)| sym(&(q - &sc.w * b.lin(&dy) * &sc.w)))
            .collect();
        // refine against the dual equation A*(dX) + E^T dlam = rd itself;
        // near the optimum M is too ill-conditioned for one solve
        let residual = |dx: &[DMatrix<f64>], dlam: &DVector<f64>| {
            rd - sf.adjoint(dx) - sf.ea.transpose() * dlam
        };
        let mut e = residual(&dx, &dlam);
        for _ in 0..3 {
            if e.norm() <= 1e-15 * (1.0 + rd.norm()) {
                break;
            }
            let zero = DVector::zeros(re.len());
            let (ey, elam) = self.solve_kkt(factor, ea_minv_eat, &(-&e), &zero)?;
            let dx_new: Vec<DMatrix<f64>> = dx
                .iter()
                .zip(&sf.blocks)
                .zip(scal)
                .map(|((dx, b), sc)| dx - sym(&(&sc.w * b.lin(&ey) * &sc.w)))
                .collect();
            let dlam_new = &dlam + &elam;
            let e_new = residual(&dx_new, &dlam_new);
            if e_new.norm() >= 0.5 * e.norm() || ey.norm() > dy.norm() {
                break;
            }
            dy += &ey;
            dlam = dlam_new;
            dx = dx_new;
            e = e_new;
        }
        let ds = sf
            .blocks
            .iter()
            .zip(rp)
            .map(|(b, rp)| sym(&(b.lin(&dy) + rp)))
            .collect();
        Some(Direction { dy, dlam, dx, ds })
    }

    /// Solves `M dy = rhs + E^T dlam`, `E dy = re`.
    fn solve_kkt(
        &self,
        factor: &SchurFactor,
        ea_minv_eat: Option<&nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
        rhs: &DVector<f64>,
        re: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        let sf = self.sf;
        let col = |v: &DVector<f64>| DMatrix::from_column_slice(v.len(), 1, v.as_slice());
        let minv_rhs = factor.solve(&col(rhs))?.column(0).into_owned();
        match ea_minv_eat {
            None => Some((minv_rhs, DVector::zeros(0))),
            Some(lu) => {
                let dlam = lu.solve(&(re - &sf.ea * &minv_rhs))?;
                let corr = sf.ea.transpose() * &dlam;
                Some((
                    minv_rhs + factor.solve(&col(&corr))?.column(0).into_owned(),
                    dlam,
                ))
            }
        }
    }

    fn steps(&self, scal: &[Scaling], dir: &Direction) -> (f64, f64) {
        let mut ax = f64::INFINITY;
        let mut as_ = f64::INFINITY;
        for ((sc, dx), ds) in scal.iter().zip(&dir.dx).zip(&dir.ds) {
            ax = ax.min(max_step(&sc.chol_x, dx));
            as_ = as_.min(max_step(&sc.chol_s, ds));
        }
        (ax, as_)
    }

    fn run(mut self) -> IpmOutcome {
        let sf = self.sf;
        let m = sf.m();
        let p = sf.ea.nrows();
        let mut history = Vec::new();
        let mut status = SolveStatus::MaxIterations;
        let mut stalls = 0;
        let mut iter = 0;
        let mut last_step = 1.0f64;
        loop {
            let (rp, re, rd) = self.residuals();
            let mut rec = self.record(iter, &rp, &re, &rd);
            if let Some(last) = history.last() {
                let last: &IterationRecord = last;
                rec.step_primal = last.step_primal;
                rec.step_dual = last.step_dual;
            }
            if self.converged(&rec) {
                status = SolveStatus::Optimal;
                history.push(rec);
                break;
            }
            if let Some(s) = self.detect_rays() {
                status = s;
                history.push(rec);
                break;
            }
            if iter >= self.opts.max_iter {
                history.push(rec);
                break;
            }

            let Some(scal) = self
                .xs
                .iter()
                .zip(&self.ss)
                .map(|(x, s)| nt_scaling(x, s))
                .collect::<Option<Vec<_>>>()
            else {
                history.push(rec);
                break;
            };

            let mut schur = DMatrix::zeros(m, m);
            for (b, sc) in sf.blocks.iter().zip(&scal) {
                b.schur_into(&sc.w, &mut schur);
            }
            // variables that appear in no block would make M singular
            for i in 0..m {
                if schur[(i, i)] == 0.0 {
                    schur[(i, i)] = 1.0;
                }
            }
            let Some(factor) = SchurFactor::new(schur) else {
                history.push(rec);
                break;
            };
            let eq_lu = if p > 0 {
                let Some(minv_eat) = factor.solve(&sf.ea.transpose()) else {
                    history.push(rec);
                    break;
                };
                let lu = (&sf.ea * minv_eat).lu();
                if !lu.is_invertible() {
                    history.push(rec);
                    break;
                }
                Some(lu)
            } else {
                None
            };

            let mu = rec.gap / self.n_total as f64;
            let v2: Vec<DMatrix<f64>> = scal
                .iter()
                .map(|sc| DMatrix::from_diagonal(&sc.d.map(|v| v * v)))
                .collect();

            // predictor
            let r_aff: Vec<DMatrix<f64>> = v2.iter().map(|v| -v).collect();
            let Some(aff) = self.direction(&scal, &factor, eq_lu.as_ref(), &r_aff, &rp, &re, &rd)
            else {
                history.push(rec);
                break;
            };
            let (ax, as_) = self.steps(&scal, &aff);
            let (ax, as_) = (ax.min(1.0), as_.min(1.0));
            let gap_aff: f64 = self
                .xs
                .iter()
                .zip(&self.ss)
                .zip(aff.dx.iter().zip(&aff.ds))
                .map(|((x, s), (dx, ds))| inner(&(x + dx * ax), &(s + ds * as_)))
                .sum();
            // short previous steps call for more centering
            let expon = (3.0 * last_step * last_step).max(1.0);
            let sigma = (gap_aff.max(0.0) / rec.gap).clamp(0.0, 1.0).powf(expon);

            // corrector
            let r_cor: Vec<DMatrix<f64>> = scal
                .iter()
                .zip(&v2)
                .zip(aff.dx.iter().zip(&aff.ds))
                .map(|((sc, v2), (dx, ds))| {
                    let dxs = &sc.g_inv * dx * sc.g_inv.transpose();
                    let dss = sc.g.transpose() * ds * &sc.g;
                    let n = sc.d.len();
                    DMatrix::identity(n, n) * (sigma * mu) - v2 - sym(&(dxs * dss))
                })
                .collect();
            let Some(dir) = self.direction(&scal, &factor, eq_lu.as_ref(), &r_cor, &rp, &re, &rd)
            else {
                history.push(rec);
                break;
            };
            let (mx, ms) = self.steps(&scal, &dir);
            let tau = 0.9 + 0.09 * last_step;
            let ax = (tau * mx).min(1.0);
            let as_ = (tau * ms).min(1.0);
            last_step = ax.min(as_);
            if ax < 1e-12 && as_ < 1e-12 {
                stalls += 1;
                if stalls > 3 {
                    history.push(rec);
                    break;
                }
            }

            self.y += &dir.dy * as_;
            for (s, ds) in self.ss.iter_mut().zip(&dir.ds) {
                *s = sym(&(&*s + ds * as_));
            }
            for (x, dx) in self.xs.iter_mut().zip(&dir.dx) {
                *x = sym(&(&*x + dx * ax));
            }
            if p > 0 {
                self.lam += &dir.dlam * ax;
            }
            rec.step_primal = as_;
            rec.step_dual = ax;
            history.push(rec);
            iter += 1;
        }
        let last = *history.last().expect("at least one record");
        IpmOutcome {
            status,
            y: self.y,
            last,
            iterations: iter,
            history,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{phi_plus, y as pauli_y};

    fn tight() -> SolverOptions {
        SolverOptions {
            gap_tol: 1e-10,
            ..SolverOptions::default()
        }
    }

    fn trace_one_program(c: &CMatrix) -> (ConicProgram, HermVar) {
        let mut p = ConicProgram::new();
        let x = p.add_var(c.rows());
        p.add_psd("X", AffineHerm::var(x)).unwrap();
        p.add_eq("trace", AffineHerm::var(x).trace().plus_constant(-1.0))
            .unwrap();
        p.minimize(AffineHerm::var(x).inner(c).unwrap());
        (p, x)
    }

    #[test]
    fn basis_round_trip() {
        for d in 1..6 {
            let xs: Vec<f64> = (0..d * d).map(|i| (i as f64 * 0.37).sin()).collect();
            let m = herm_from_scalars(d, &xs);
            assert!(m.is_hermitian(0.0));
            assert_eq!(herm_to_scalars(&m), xs);
            for s in 0..d * d {
                let mut e = vec![0.0; d * d];
                e[s] = 1.0;
                assert_eq!(herm_from_scalars(d, &e), herm_basis(d, s));
            }
        }
    }

    #[test]
    fn real_embed_examples() {
        let i4 = real_embed(&CMatrix::identity(2)).unwrap();
        assert_eq!(i4, DMatrix::identity(4, 4));
        let e = real_embed(&pauli_y()).unwrap();
        let mut ev: Vec<f64> = SymmetricEigen::new(e).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let e = real_embed(&CMatrix::projector(&phi_plus())).unwrap();
        let ev = SymmetricEigen::new(e.clone()).eigenvalues;
        assert!(ev.iter().all(|v| *v > -1e-12));
        assert_eq!(ev.iter().filter(|v| **v > 1e-9).count(), 2);
        let tr: f64 = (0..8).map(|i| e[(i, i)]).sum();
        assert!((tr - 2.0).abs() < 1e-12);
        assert!(real_embed(&CMatrix::unit(2, 0, 1)).is_err());
    }

    #[test]
    fn trace_constraint_forces_value() {
        let (p, _) = trace_one_program(&CMatrix::identity(2));
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.optimal_value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_cost_picks_smallest_entry() {
        let (p, _) = trace_one_program(&CMatrix::diag_real(&[1.0, 2.0]));
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.optimal_value - 1.0).abs() < 1e-8);
        assert!(sol.variable_values[0].max_abs_diff(&CMatrix::diag_real(&[1.0, 0.0])) < 1e-6);
    }

    #[test]
    fn complex_cost_gives_min_eigenvalue() {
        // min <C, X> over density matrices is lambda_min(C)
        let c = CMatrix::from_vec(
            3,
            3,
            vec![
                c64(2.0, 0.0),
                c64(0.5, 0.7),
                c64(0.0, -0.3),
                c64(0.5, -0.7),
                c64(1.0, 0.0),
                c64(0.2, 0.1),
                c64(0.0, 0.3),
                c64(0.2, -0.1),
                c64(-0.5, 0.0),
            ],
        )
        .unwrap();
        let (p, _) = trace_one_program(&c);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.optimal_value - c.min_eigenvalue().unwrap()).abs() < 1e-8);
    }

    #[test]
    fn operator_norm_bound() {
        // max tr(A X) s.t. -I ⪯ X ⪯ I equals the trace norm of A
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, -3.0]]);
        let mut p = ConicProgram::new();
        let x = p.add_var(2);
        let id = CMatrix::identity(2);
        p.add_psd(
            "upper",
            AffineHerm::var(x).scaled(-1.0).plus_constant(&id).unwrap(),
        )
        .unwrap();
        p.add_psd("lower", AffineHerm::var(x).plus_constant(&id).unwrap())
            .unwrap();
        p.minimize(AffineHerm::var(x).inner(&a).unwrap().scaled(-1.0));
        let sol = solve(&p, &tight()).unwrap();
        let e = crate::linalg::hermitian_eig(&a).unwrap();
        let nuclear: f64 = e.values.iter().map(|v| v.abs()).sum();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.optimal_value + nuclear).abs() < 1e-8);
    }

    #[test]
    fn infeasible_and_unbounded_are_reported() {
        let mut p = ConicProgram::new();
        let x = p.add_var(2);
        p.add_psd("X", AffineHerm::var(x)).unwrap();
        p.add_eq("trace", AffineHerm::var(x).trace().plus_constant(1.0))
            .unwrap();
        p.minimize(AffineHerm::var(x).trace());
        assert_eq!(
            solve(&p, &SolverOptions::default()).unwrap().status,
            SolveStatus::Infeasible
        );

        let mut p = ConicProgram::new();
        let x = p.add_var(2);
        p.add_psd("X", AffineHerm::var(x)).unwrap();
        p.minimize(AffineHerm::var(x).trace().scaled(-1.0));
        assert_eq!(
            solve(&p, &SolverOptions::default()).unwrap().status,
            SolveStatus::Unbounded
        );
    }

    #[test]
    fn iteration_cap_is_reported() {
        let (p, _) = trace_one_program(&CMatrix::diag_real(&[1.0, 2.0, 3.0]));
        let opts = SolverOptions {
            max_iter: 2,
            ..SolverOptions::default()
        };
        let sol = solve(&p, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::MaxIterations);
        assert!(matches!(
            sol.require_optimal("toy"),
            Err(Error::Solver {
                quantity: "toy",
                ..
            })
        ));
    }

    #[test]
    fn certificate_replay_and_history() {
        let c = CMatrix::from_real_rows(&[&[1.0, 0.5, 0.0], &[0.5, 2.0, 0.1], &[0.0, 0.1, 0.3]]);
        let (p, _) = trace_one_program(&c);
        let opts = SolverOptions::default();
        let sol = solve(&p, &opts).unwrap();
        let r = p.replay(&sol.variable_values).unwrap();
        assert!(r.is_feasible(opts.feas_tol), "{r:?}");
        assert!((r.objective - sol.optimal_value).abs() < 1e-9);
        for w in sol.history.windows(2) {
            assert!(w[1].gap <= w[0].gap);
        }
        for h in &sol.history {
            if h.primal_residual <= opts.feas_tol && h.dual_residual <= opts.feas_tol {
                assert!(h.dual_objective <= h.primal_objective + 1e-12);
            }
        }
    }

    #[test]
    fn objective_scaling() {
        let c = CMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 2.0]]);
        let (p1, _) = trace_one_program(&c);
        let (p10, _) = trace_one_program(&c.scale_real(10.0));
        let s1 = solve(&p1, &SolverOptions::default()).unwrap();
        let s10 = solve(&p10, &SolverOptions::default()).unwrap();
        assert_eq!(s1.status, s10.status);
        assert!((s10.optimal_value / s1.optimal_value - 10.0).abs() < 1e-5);
        assert!(s1.variable_values[0].max_abs_diff(&s10.variable_values[0]) < 1e-6);
    }

    #[test]
    fn deterministic() {
        let c = CMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 2.0]]);
        let (p, _) = trace_one_program(&c);
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn debug_json_lists_structure() {
        let (p, _) = trace_one_program(&CMatrix::identity(2));
        let j = p.debug_json();
        assert_eq!(j["variables"][0]["dim"], 2);
        assert_eq!(j["psd_constraints"][0]["name"], "X");
        assert_eq!(j["equalities"][0]["expr"]["constant"], -1.0);
    }

    #[test]
    fn rejects_bad_expressions() {
        let mut p = ConicProgram::new();
        assert!(p
            .add_psd("bad", AffineHerm::constant(CMatrix::unit(2, 0, 1)))
            .is_err());
        assert!(solve(&p, &SolverOptions::default()).is_err());
    }
}
