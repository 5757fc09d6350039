//! Entanglement-preservability and creation measures of two-qubit processes.
//!
//! Every measure optimizes over unnormalized process matrices `χ̃` drawn from
//! an incapable set `D`, given by a list of PSD constraints that are linear
//! in `χ̃`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{dim_mismatch, Result};
use crate::linalg::{hermitian_eig, partial_transpose, CMatrix, Subsystem};
use crate::qpt::QptInputSet;
use crate::quantum::{apply_chi, chi_to_choi, choi_to_chi, ProcessMatrix};
use crate::sdp::{
    self, AffineHerm, ConicProgram, HermVar, SdpSolution, SolveStatus, SolverOptions,
};

/// Below this magnitude a negative `α_pre - α_cre` is reported as zero.
pub const CLIP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Preservation,
    Creation,
}

/// Constraints defining the incapable processes of one flavor.
///
/// Preservation: `χ̃ ⪰ 0`, for every tomography input `ρ` both `χ̃(ρ)` and
/// its partial transpose are PSD, and `χ̃ = χ̃_1 + χ̃_2` where `ρ ↦ χ̃_1(ρ)^{T_B}`
/// and `ρ ↦ χ̃_2(ρ)^{T_A}` are completely positive. The split is what makes
/// every output of `χ̃` PPT, hence separable, and not only the sixteen
/// tomography outputs. Creation: `χ̃ ⪰ 0`, `χ̃(ρ) ⪰ 0` on the tomography
/// inputs, and PPT outputs on a finite set of pure product inputs.
#[derive(Clone, Debug)]
pub struct IncapableConstraintSet {
    flavor: Flavor,
    decomposable: bool,
    positive_inputs: Vec<(String, CMatrix)>,
    ppt_inputs: Vec<(String, CMatrix)>,
}

impl IncapableConstraintSet {
    pub fn preservation() -> Self {
        let inputs: Vec<(String, CMatrix)> = QptInputSet::two_qubit()
            .states()
            .iter()
            .map(|s| {
                (
                    s.label().unwrap_or_default().to_string(),
                    s.matrix().clone(),
                )
            })
            .collect();
        Self {
            flavor: Flavor::Preservation,
            decomposable: true,
            positive_inputs: inputs.clone(),
            ppt_inputs: inputs,
        }
    }

    /// The 36 Pauli-eigenstate products plus `n_random` seeded Haar-random
    /// pure products.
    pub fn creation(n_random: usize, seed: u64) -> Self {
        let mut ppt_inputs = QptInputSet::pauli_products();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..n_random {
            ppt_inputs.push((format!("random{i}"), crate::random::product_state(&mut rng)));
        }
        Self {
            flavor: Flavor::Creation,
            decomposable: false,
            positive_inputs: Self::preservation().positive_inputs,
            ppt_inputs,
        }
    }

    /// Only the per-output conditions, without the split. Its feasible set
    /// contains maps with entangled outputs.
    pub fn outputs_only(mut self) -> Self {
        self.decomposable = false;
        self
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn ppt_inputs(&self) -> &[(String, CMatrix)] {
        &self.ppt_inputs
    }

    /// Adds `χ̃ ∈ D` for the 16x16 variable `v`.
    pub fn constrain(&self, program: &mut ConicProgram, v: HermVar) -> Result<()> {
        if v.dim() != 16 {
            return Err(dim_mismatch("IncapableConstraintSet", 16, v.dim()));
        }
        program.add_psd("chi_tilde", AffineHerm::var(v))?;
        self.constrain_outputs(program, &AffineHerm::var(v))
    }

    /// Everything but `χ̃ ⪰ 0`, which also makes every output PSD, so the
    /// per-output positivity conditions never enter the program.
    fn constrain_outputs(&self, program: &mut ConicProgram, chi_tilde: &AffineHerm) -> Result<()> {
        if self.decomposable {
            // the split already makes every output PPT
            return add_split(program, chi_tilde.clone(), None);
        }
        for (label, rho) in &self.ppt_inputs {
            let pt = chi_tilde.map(|m| partial_transpose(&apply_chi(2, m, rho)?, Subsystem::B))?;
            program.add_psd(format!("pt_output[{label}]"), pt)?;
        }
        Ok(())
    }

    /// Smallest eigenvalue over the per-output blocks and `χ̃ ⪰ 0` at `chi`.
    /// The split condition is not included; see [`split_margin`].
    pub fn worst_eigenvalue(&self, chi: &CMatrix) -> Result<f64> {
        let mut worst = chi.hermitian_part().min_eigenvalue()?;
        for (_, rho) in &self.positive_inputs {
            worst = worst.min(apply_chi(2, chi, rho)?.hermitian_part().min_eigenvalue()?);
        }
        for (_, rho) in &self.ppt_inputs {
            let pt = partial_transpose(&apply_chi(2, chi, rho)?, Subsystem::B)?;
            worst = worst.min(pt.hermitian_part().min_eigenvalue()?);
        }
        Ok(worst)
    }
}

/// `T_B(x - u) ⪰ t I` and `T_A(u) ⪰ t I` with a fresh variable `u`.
fn add_split(program: &mut ConicProgram, x: AffineHerm, t: Option<HermVar>) -> Result<()> {
    let u = AffineHerm::var(program.add_var(16));
    let slack = match t {
        Some(t) => AffineHerm::linear(t, |b| Ok(CMatrix::identity(16).scale(b[(0, 0)])))?,
        None => AffineHerm::zeros(16),
    };
    let b = x
        .minus(&u)?
        .map(|m| Ok(output_partial_transpose(m, Subsystem::B)))?;
    program.add_psd("split_b", b.minus(&slack)?)?;
    let a = u.map(|m| Ok(output_partial_transpose(m, Subsystem::A)))?;
    program.add_psd("split_a", a.minus(&slack)?)?;
    Ok(())
}

/// Largest `t` such that `χ = χ_1 + χ_2` with `T_B∘χ_1 ⪰ t I` and
/// `T_A∘χ_2 ⪰ t I` as process matrices. Nonnegative iff the split exists.
/// Shortcuts the SDP when one side alone works.
pub fn split_margin(chi: &CMatrix, solver: &SolverOptions) -> Result<f64> {
    let direct = output_partial_transpose(chi, Subsystem::B)
        .hermitian_part()
        .min_eigenvalue()?
        .max(
            output_partial_transpose(chi, Subsystem::A)
                .hermitian_part()
                .min_eigenvalue()?,
        );
    if direct >= 0.0 {
        return Ok(direct);
    }
    let mut p = ConicProgram::new();
    let t = p.add_var(1);
    add_split(&mut p, AffineHerm::constant(chi.hermitian_part()), Some(t))?;
    // the margin is never above the trivial split's, which keeps the program bounded
    let cap = AffineHerm::constant(CMatrix::identity(1).scale_real(direct.abs() + 1.0));
    p.add_psd("cap", cap.minus(&AffineHerm::var(t))?)?;
    p.minimize(AffineHerm::var(t).trace().scaled(-1.0));
    let sol = sdp::solve(&p, solver)?.require_optimal("split_margin")?;
    Ok(-sol.optimal_value)
}

/// Process matrix of `ρ ↦ (χ(ρ))^{T_S}` for a two-qubit `χ`, with `T_S` the
/// transpose on output qubit `S`.
pub fn output_partial_transpose(chi: &CMatrix, subsystem: Subsystem) -> CMatrix {
    let j = chi_to_choi(2, chi);
    // rows b*4 + a with a = 2*a_A + a_B; swap the chosen output bit between row and column
    let bit = match subsystem {
        Subsystem::A => 2,
        Subsystem::B => 1,
    };
    let t = CMatrix::from_fn(16, 16, |r, c| {
        j[((r & !bit) | (c & bit), (c & !bit) | (r & bit))]
    });
    choi_to_chi(2, &t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureOptions {
    pub solver: SolverOptions,
    /// Extra random product inputs in the creation set.
    pub creation_random: usize,
    /// Random products checked against the creation witness.
    pub verify_samples: usize,
    pub seed: u64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            creation_random: 0,
            verify_samples: 10_000,
            seed: 0,
        }
    }
}

/// Solver diagnostics attached to one reported quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveInfo {
    pub status: SolveStatus,
    pub gap: f64,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Smallest eigenvalue over all PSD constraints, recomputed from the
    /// returned variable.
    pub replay_min_eigenvalue: f64,
    pub replay_equality_violation: f64,
    /// Creation measures only: smallest partial-transpose eigenvalue of the
    /// normalized witness over random product inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verifier_worst_pt_eigenvalue: Option<f64>,
}

/// A measure value with the optimizing `χ̃`.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: f64,
    pub witness: CMatrix,
    pub info: SolveInfo,
    pub solution: SdpSolution,
}

fn prepared(chi: &ProcessMatrix) -> Result<ProcessMatrix> {
    if chi.n_qubits() != 2 {
        return Err(dim_mismatch("measure", "2 qubits", chi.n_qubits()));
    }
    if chi.is_normalized() {
        Ok(chi.clone())
    } else {
        chi.normalize()
    }
}

fn finish(
    quantity: &'static str,
    program: &ConicProgram,
    solution: SdpSolution,
    chi_tilde: &AffineHerm,
    value: f64,
) -> Result<Evaluation> {
    let solution = solution.require_optimal(quantity)?;
    let replay = program.replay(&solution.variable_values)?;
    let info = SolveInfo {
        status: solution.status,
        gap: solution.gap,
        iterations: solution.iterations,
        primal_objective: solution.optimal_value,
        dual_objective: solution.dual_value,
        replay_min_eigenvalue: replay.min_psd_eigenvalue,
        replay_equality_violation: replay.max_equality_violation,
        verifier_worst_pt_eigenvalue: None,
    };
    Ok(Evaluation {
        value,
        witness: chi_tilde.eval(&solution.scalars),
        info,
        solution,
    })
}

/// Relative size below which eigenvalues of `χ` count as zero.
const RANK_TOL: f64 = 1e-10;

/// Composition: `min 1 - tr χ̃` over `χ̃ ∈ D` with `χ - χ̃ ⪰ 0`.
///
/// `χ - χ̃ ⪰ 0` confines `χ̃` to the range of `χ`, and without an interior
/// the solver loses accuracy. So `χ̃ = V Z V^†` with `V` an orthonormal basis
/// of that range, and the order constraint becomes `V^† χ V - Z ⪰ 0`.
pub fn composition(
    chi: &ProcessMatrix,
    set: &IncapableConstraintSet,
    solver: &SolverOptions,
    quantity: &'static str,
) -> Result<Evaluation> {
    let chi = prepared(chi)?;
    let eig = hermitian_eig(chi.chi())?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..16)
        .filter(|&k| eig.values[k] > RANK_TOL * top)
        .collect();
    let basis = CMatrix::from_fn(16, keep.len(), |i, c| eig.vectors[(i, keep[c])]);
    let reduced = CMatrix::diag_real(&keep.iter().map(|&k| eig.values[k]).collect::<Vec<_>>());

    let mut p = ConicProgram::new();
    let z = p.add_var(keep.len());
    let basis_adj = basis.adjoint();
    let chi_tilde = AffineHerm::linear(z, |b| Ok(&(&basis * b) * &basis_adj))?;
    p.add_psd(
        "chi_minus_chi_tilde",
        AffineHerm::constant(reduced).minus(&AffineHerm::var(z))?,
    )?;
    p.add_psd("chi_tilde", AffineHerm::var(z))?;
    set.constrain_outputs(&mut p, &chi_tilde)?;
    p.minimize(AffineHerm::var(z).trace().scaled(-1.0).plus_constant(1.0));
    let sol = sdp::solve(&p, solver)?;
    let value = sol.optimal_value;
    finish(quantity, &p, sol, &chi_tilde, value)
}

/// Robustness: `min tr χ̃ - 1` over `χ̃ ∈ D` with `χ̃ - χ ⪰ 0`, `tr χ̃ >= 1`.
pub fn robustness(
    chi: &ProcessMatrix,
    set: &IncapableConstraintSet,
    solver: &SolverOptions,
    quantity: &'static str,
) -> Result<Evaluation> {
    let chi = prepared(chi)?;
    let mut p = ConicProgram::new();
    let v = p.add_var(16);
    p.add_psd(
        "chi_tilde_minus_chi",
        AffineHerm::var(v).minus(&AffineHerm::constant(chi.chi().clone()))?,
    )?;
    p.add_nonneg(
        "trace_at_least_one",
        AffineHerm::var(v).trace().plus_constant(-1.0),
    )?;
    set.constrain(&mut p, v)?;
    p.minimize(AffineHerm::var(v).trace().plus_constant(-1.0));
    let sol = sdp::solve(&p, solver)?;
    let value = sol.optimal_value;
    finish(quantity, &p, sol, &AffineHerm::var(v), value)
}

pub fn alpha_pre_with(chi: &ProcessMatrix, solver: &SolverOptions) -> Result<Evaluation> {
    composition(
        chi,
        &IncapableConstraintSet::preservation(),
        solver,
        "alpha_pre",
    )
}

pub fn beta_pre_with(chi: &ProcessMatrix, solver: &SolverOptions) -> Result<Evaluation> {
    robustness(
        chi,
        &IncapableConstraintSet::preservation(),
        solver,
        "beta_pre",
    )
}

pub fn alpha_pre(chi: &ProcessMatrix) -> Result<f64> {
    Ok(alpha_pre_with(chi, &SolverOptions::default())?.value)
}

pub fn beta_pre(chi: &ProcessMatrix) -> Result<f64> {
    Ok(beta_pre_with(chi, &SolverOptions::default())?.value)
}

/// `tr(χ χ_target)` after normalizing both.
pub fn f_expt(chi: &ProcessMatrix, target: &ProcessMatrix) -> Result<f64> {
    if chi.n_qubits() != target.n_qubits() {
        return Err(dim_mismatch("f_expt", target.n_qubits(), chi.n_qubits()));
    }
    let norm = |p: &ProcessMatrix| {
        if p.is_normalized() {
            Ok(p.clone())
        } else {
            p.normalize()
        }
    };
    norm(chi)?.overlap(&norm(target)?)
}

/// Best fidelity with `target` reachable by a normalized `χ̃ ∈ D`.
pub fn f_threshold_with(target: &ProcessMatrix, solver: &SolverOptions) -> Result<Evaluation> {
    let target = prepared(target)?;
    let mut p = ConicProgram::new();
    let v = p.add_var(16);
    IncapableConstraintSet::preservation().constrain(&mut p, v)?;
    p.add_eq("unit_trace", AffineHerm::var(v).trace().plus_constant(-1.0))?;
    p.minimize(AffineHerm::var(v).inner(target.chi())?.scaled(-1.0));
    let sol = sdp::solve(&p, solver)?;
    let value = -sol.optimal_value;
    finish("f_threshold", &p, sol, &AffineHerm::var(v), value)
}

pub fn f_threshold(target: &ProcessMatrix) -> Result<f64> {
    Ok(f_threshold_with(target, &SolverOptions::default())?.value)
}

/// Worst partial-transpose eigenvalue of `χ̃ / tr χ̃` over seeded random
/// pure product inputs.
pub fn verify_creation_witness(witness: &CMatrix, samples: usize, seed: u64) -> Result<f64> {
    let tr = witness.trace().re;
    if tr <= crate::linalg::PSD_TOL {
        return Ok(0.0);
    }
    let w = witness.scale_real(1.0 / tr);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let rho = crate::random::product_state(&mut rng);
        let pt = partial_transpose(&apply_chi(2, &w, &rho)?, Subsystem::B)?;
        worst = worst.min(pt.hermitian_part().min_eigenvalue()?);
    }
    Ok(if samples == 0 { 0.0 } else { worst })
}

fn with_verifier(mut e: Evaluation, opts: &MeasureOptions) -> Result<Evaluation> {
    e.info.verifier_worst_pt_eigenvalue = Some(verify_creation_witness(
        &e.witness,
        opts.verify_samples,
        opts.seed.wrapping_add(1),
    )?);
    Ok(e)
}

/// Creation composition. The product-input set is finite, so the value is
/// a lower bound on the exact measure.
pub fn alpha_cre_with(chi: &ProcessMatrix, opts: &MeasureOptions) -> Result<Evaluation> {
    let set = IncapableConstraintSet::creation(opts.creation_random, opts.seed);
    with_verifier(composition(chi, &set, &opts.solver, "alpha_cre")?, opts)
}

pub fn beta_cre_with(chi: &ProcessMatrix, opts: &MeasureOptions) -> Result<Evaluation> {
    let set = IncapableConstraintSet::creation(opts.creation_random, opts.seed);
    with_verifier(robustness(chi, &set, &opts.solver, "beta_cre")?, opts)
}

pub fn alpha_cre(chi: &ProcessMatrix) -> Result<f64> {
    let opts = MeasureOptions {
        verify_samples: 0,
        ..MeasureOptions::default()
    };
    Ok(alpha_cre_with(chi, &opts)?.value)
}

pub fn beta_cre(chi: &ProcessMatrix) -> Result<f64> {
    let opts = MeasureOptions {
        verify_samples: 0,
        ..MeasureOptions::default()
    };
    Ok(beta_cre_with(chi, &opts)?.value)
}

/// `α_pre - α_cre`, with small negative values reported as zero.
pub fn pre_minus_cre(alpha_pre: f64, alpha_cre: f64) -> f64 {
    let d = alpha_pre - alpha_cre;
    if d < 0.0 && d > -CLIP_TOL {
        0.0
    } else {
        d
    }
}

pub fn alpha_pre_prime(chi: &ProcessMatrix) -> Result<f64> {
    Ok(pre_minus_cre(alpha_pre(chi)?, alpha_cre(chi)?))
}

/// Membership in the preservation set, up to `tol`. The per-output
/// conditions are checked directly; the split needs a small SDP only when
/// neither transposed process is CP on its own.
pub fn is_incapable(chi: &ProcessMatrix, tol: f64) -> bool {
    let Ok(chi) = prepared(chi) else {
        return false;
    };
    let outputs_ok = IncapableConstraintSet::preservation()
        .worst_eigenvalue(chi.chi())
        .is_ok_and(|w| w >= -tol);
    outputs_ok && split_margin(chi.chi(), &SolverOptions::default()).is_ok_and(|m| m >= -tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub alpha_pre: f64,
    pub beta_pre: f64,
    pub f_expt: Option<f64>,
    pub f_threshold: Option<f64>,
    pub alpha_cre: Option<f64>,
    pub beta_cre: Option<f64>,
    pub alpha_pre_prime: Option<f64>,
    pub solver: BTreeMap<String, SolveInfo>,
}

impl MeasureReport {
    /// Rows `(name, value)` in a fixed order, skipping absent quantities.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("alpha_pre", self.alpha_pre), ("beta_pre", self.beta_pre)];
        let optional = [
            ("f_expt", self.f_expt),
            ("f_threshold", self.f_threshold),
            ("alpha_cre", self.alpha_cre),
            ("beta_cre", self.beta_cre),
            ("alpha_pre_prime", self.alpha_pre_prime),
        ];
        out.extend(optional.into_iter().filter_map(|(n, v)| v.map(|v| (n, v))));
        out
    }
}

/// Evaluates the preservation measures, plus fidelities when `target` is
/// given and creation measures when `creation` is set.
pub fn evaluate(
    chi: &ProcessMatrix,
    target: Option<&ProcessMatrix>,
    creation: bool,
    opts: &MeasureOptions,
) -> Result<MeasureReport> {
    let mut solver = BTreeMap::new();
    let a = alpha_pre_with(chi, &opts.solver)?;
    let b = beta_pre_with(chi, &opts.solver)?;
    solver.insert("alpha_pre".to_string(), a.info.clone());
    solver.insert("beta_pre".to_string(), b.info.clone());
    let (f_expt_v, f_thr) = match target {
        Some(t) => {
            let f = f_threshold_with(t, &opts.solver)?;
            solver.insert("f_threshold".to_string(), f.info.clone());
            (Some(f_expt(chi, t)?), Some(f.value))
        }
        None => (None, None),
    };
    let (ac, bc, app) = if creation {
        let ac = alpha_cre_with(chi, opts)?;
        let bc = beta_cre_with(chi, opts)?;
        solver.insert("alpha_cre".to_string(), ac.info.clone());
        solver.insert("beta_cre".to_string(), bc.info.clone());
        (
            Some(ac.value),
            Some(bc.value),
            Some(pre_minus_cre(a.value, ac.value)),
        )
    } else {
        (None, None, None)
    };
    Ok(MeasureReport {
        alpha_pre: a.value,
        beta_pre: b.value,
        f_expt: f_expt_v,
        f_threshold: f_thr,
        alpha_cre: ac,
        beta_cre: bc,
        alpha_pre_prime: app,
        solver,
    })
}
