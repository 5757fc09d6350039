//! Builders for gates, post-selected photon fusion, local mixtures, a
//! measure-and-prepare example and damped Ising-coupled dynamics.

use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{MatrixJson, ProcessJson};
use crate::linalg::pauli::{i2, phi_plus, x, y, z};
use crate::linalg::{c64, expm, kron, CMatrix};
use crate::quantum::{KrausSet, ProcessMatrix, Superoperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    T,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "CZ")]
    Cz,
}

impl Gate {
    pub const ALL: [Gate; 8] = [
        Gate::I,
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::H,
        Gate::T,
        Gate::Cnot,
        Gate::Cz,
    ];

    pub fn unitary(self) -> CMatrix {
        match self {
            Gate::I => i2(),
            Gate::X => x(),
            Gate::Y => y(),
            Gate::Z => z(),
            Gate::H => {
                CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).scale_real(FRAC_1_SQRT_2)
            }
            Gate::T => CMatrix::from_vec(
                2,
                2,
                vec![
                    c64(1.0, 0.0),
                    c64(0.0, 0.0),
                    c64(0.0, 0.0),
                    c64(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                ],
            )
            .expect("2x2"),
            Gate::Cnot => CMatrix::from_real_rows(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 1.0, 0.0],
            ]),
            Gate::Cz => CMatrix::diag_real(&[1.0, 1.0, 1.0, -1.0]),
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::T => "T",
            Gate::Cnot => "CNOT",
            Gate::Cz => "CZ",
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Gate::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown gate {s:?}")))
    }
}

pub fn build_gate(gate: Gate) -> ProcessMatrix {
    KrausSet::new(vec![gate.unitary()])
        .and_then(|k| k.to_process())
        .expect("unitary Kraus set")
}

/// The post-selection `M = |00><00| + |11><11|` (trace 1/2).
pub fn fusion_ideal() -> ProcessMatrix {
    KrausSet::new(vec![CMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0])])
        .and_then(|k| k.to_process())
        .expect("fixed Kraus set")
}

/// Timing noise destroys the coherence between `|00>` and `|11>`.
pub fn fusion_noise() -> ProcessMatrix {
    KrausSet::new(vec![CMatrix::unit(4, 0, 0), CMatrix::unit(4, 3, 3)])
        .and_then(|k| k.to_process())
        .expect("fixed Kraus set")
}

/// `(1 - p) chi_fusion + p chi_noise`, unnormalized.
pub fn build_fusion(p_noise: f64) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&p_noise) {
        return Err(Error::InvalidParameter(format!(
            "p_noise {p_noise} outside [0, 1]"
        )));
    }
    ProcessMatrix::mix(&[(1.0 - p_noise, &fusion_ideal()), (p_noise, &fusion_noise())])
}

fn check_probabilities(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter(
            "probabilities must lie in [0, 1]".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// `sum_i p_i (A_i ⊗ B_i)` for local single-qubit channels.
pub fn build_losr(probs: &[f64], pairs: &[(KrausSet, KrausSet)]) -> Result<ProcessMatrix> {
    if probs.len() != pairs.len() || probs.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} probabilities for {} local pairs",
            probs.len(),
            pairs.len()
        )));
    }
    check_probabilities(probs)?;
    let parts = pairs
        .iter()
        .map(|(a, b)| a.to_process()?.tensor(&b.to_process()?))
        .collect::<Result<Vec<_>>>()?;
    let weighted: Vec<(f64, &ProcessMatrix)> = probs.iter().copied().zip(parts.iter()).collect();
    ProcessMatrix::mix(&weighted)
}

/// Single-qubit depolarizing channel with strength `p`: `rho -> (1-p) rho + p I/2`.
pub fn depolarizing_kraus(p: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "depolarizing strength {p} outside [0, 1]"
        )));
    }
    let w0 = (1.0 - 0.75 * p).sqrt();
    let w = (p / 4.0).sqrt();
    KrausSet::new(vec![
        i2().scale_real(w0),
        x().scale_real(w),
        y().scale_real(w),
        z().scale_real(w),
    ])
}

/// Depolarizing on qubit A, identity on qubit B.
pub fn build_depolarize_tensor_id(p: f64) -> Result<ProcessMatrix> {
    depolarizing_kraus(p)?
        .to_process()?
        .tensor(&ProcessMatrix::identity(1))
}

/// Measure `{|00><00|, I - |00><00|}`; prepare `|phi+>` on the first
/// outcome and `(I - |phi+><phi+|)/3` otherwise.
pub fn build_measure_prepare_example() -> ProcessMatrix {
    let h = FRAC_1_SQRT_2;
    let bell = [
        phi_plus(),
        vec![c64(h, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-h, 0.0)],
        vec![c64(0.0, 0.0), c64(h, 0.0), c64(h, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(h, 0.0), c64(-h, 0.0), c64(0.0, 0.0)],
    ];
    let e = |i: usize| {
        let mut v = vec![c64(0.0, 0.0); 4];
        v[i] = c64(1.0, 0.0);
        v
    };
    let mut ops = vec![CMatrix::outer(&bell[0], &e(0))];
    let w = (1.0f64 / 3.0).sqrt();
    for b in &bell[1..] {
        for s in 1..4 {
            ops.push(CMatrix::outer(b, &e(s)).scale_real(w));
        }
    }
    KrausSet::new(ops)
        .and_then(|k| k.to_process())
        .expect("fixed Kraus set")
}

/// Liouvillian of `H = 1/2 sum (-1)^{jk} |jk><jk|` with a depolarizing
/// dissipator of rate `gamma` on qubit B, in units `hbar = h_int = 1`.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    hamiltonian: CMatrix,
    gamma: f64,
    superop: Superoperator,
}

impl LindbladGenerator {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma {gamma} must be finite and >= 0"
            )));
        }
        let hamiltonian = CMatrix::diag_real(&[0.5, 0.5, 0.5, -0.5]);
        let id = CMatrix::identity(4);
        // column stacking: vec(A rho B) = (B^T ⊗ A) vec(rho)
        let commutator = &kron(&id, &hamiltonian) - &kron(&hamiltonian.transpose(), &id);
        let mut l = commutator.scale(c64(0.0, -1.0));
        for p in [x(), y(), z()] {
            let pb = kron(&i2(), &p);
            l += &kron(&pb.conj(), &pb).scale_real(gamma / 2.0);
        }
        l -= &CMatrix::identity(16).scale_real(1.5 * gamma);
        Ok(Self {
            hamiltonian,
            gamma,
            superop: Superoperator::new(2, l)?,
        })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn liouvillian(&self) -> &Superoperator {
        &self.superop
    }

    /// Largest `|tr L(E)|` over matrix units `E`; zero for a valid generator.
    pub fn trace_residual(&self) -> f64 {
        let l = self.superop.matrix();
        (0..16)
            .map(|c| {
                (0..4)
                    .map(|i| l[(i + 4 * i, c)])
                    .sum::<crate::linalg::C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn process(&self, tau: f64) -> Result<ProcessMatrix> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau {tau} must be finite and >= 0"
            )));
        }
        let s = expm(&self.superop.matrix().scale_real(tau))?;
        let chi = Superoperator::new(2, s)?.to_process()?;
        ProcessMatrix::from_hermitian(2, chi.chi().hermitian_part())
    }
}

pub fn build_lindblad_process(tau: f64, gamma: f64) -> Result<ProcessMatrix> {
    LindbladGenerator::new(gamma)?.process(tau)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalPair {
    pub a: Vec<MatrixJson>,
    pub b: Vec<MatrixJson>,
}

/// A channel description as read from JSON, tagged by `"kind"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Gate {
        name: String,
    },
    Fusion,
    FusionNoisy {
        p_noise: f64,
    },
    Losr {
        probs: Vec<f64>,
        pairs: Vec<LocalPair>,
    },
    #[serde(alias = "example_eq8")]
    MeasurePrepare,
    Lindblad {
        tau: f64,
        gamma: f64,
    },
    DepolarizeTensorId {
        p: f64,
    },
    CustomKraus {
        operators: Vec<MatrixJson>,
    },
    CustomChi(ProcessJson),
}

fn kraus_from_json(ops: &[MatrixJson]) -> Result<KrausSet> {
    KrausSet::new(
        ops.iter()
            .map(CMatrix::try_from)
            .collect::<Result<Vec<_>>>()?,
    )
}

impl ChannelSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// The process as specified; single-qubit gates stay single-qubit.
    pub fn build(&self) -> Result<ProcessMatrix> {
        match self {
            ChannelSpec::Gate { name } => Ok(build_gate(name.parse()?)),
            ChannelSpec::Fusion => Ok(fusion_ideal()),
            ChannelSpec::FusionNoisy { p_noise } => build_fusion(*p_noise),
            ChannelSpec::Losr { probs, pairs } => {
                let local = pairs
                    .iter()
                    .map(|p| Ok((kraus_from_json(&p.a)?, kraus_from_json(&p.b)?)))
                    .collect::<Result<Vec<_>>>()?;
                build_losr(probs, &local)
            }
            ChannelSpec::MeasurePrepare => Ok(build_measure_prepare_example()),
            ChannelSpec::Lindblad { tau, gamma } => build_lindblad_process(*tau, *gamma),
            ChannelSpec::DepolarizeTensorId { p } => build_depolarize_tensor_id(*p),
            ChannelSpec::CustomKraus { operators } => {
                let k = kraus_from_json(operators)?;
                if !k.is_subnormalized(1e-9) {
                    return Err(Error::InvalidParameter(
                        "Kraus operators exceed completeness".into(),
                    ));
                }
                k.to_process()
            }
            ChannelSpec::CustomChi(j) => {
                let p = ProcessMatrix::try_from(j)?;
                ProcessMatrix::new(p.n_qubits(), p.chi().clone())
            }
        }
    }

    /// Two-qubit process; single-qubit channels are extended by identity on
    /// qubit B.
    pub fn build_two_qubit(&self) -> Result<ProcessMatrix> {
        let p = self.build()?;
        if p.n_qubits() == 1 {
            p.tensor(&ProcessMatrix::identity(1))
        } else {
            Ok(p)
        }
    }
}
