//! Process tomography from the outputs of a fixed set of input states, and
//! shot-level Pauli state tomography feeding it.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pauli::{ket0, ket1, ket_l, ket_minus, ket_plus, ket_r, kron_vec};
use crate::linalg::{c64, kron, psd_clip, CMatrix, C64};
use crate::quantum::{ChoiMatrix, DensityMatrix, ProcessMatrix};

/// Labels of the two-qubit QPT inputs, in reconstruction order.
pub const QPT_LABELS_2Q: [&str; 16] = [
    "00", "01", "10", "11", "0+", "0R", "1+", "1R", "+1", "+0", "R1", "R0", "phi+", "phi+i",
    "psi+", "psi+i",
];

pub const QPT_LABELS_1Q: [&str; 4] = ["0", "1", "+", "R"];

const SINGLE_QUBIT_LABELS: [char; 6] = ['0', '1', '+', '-', 'R', 'L'];

fn single_ket(c: char) -> Option<Vec<C64>> {
    Some(match c {
        '0' => ket0(),
        '1' => ket1(),
        '+' => ket_plus(),
        '-' => ket_minus(),
        'R' => ket_r(),
        'L' => ket_l(),
        _ => return None,
    })
}

/// Pure input state for a label: a string of single-qubit labels from
/// `0 1 + - R L`, or one of `phi+`, `phi+i`, `psi+`, `psi+i`.
pub fn input_ket(label: &str) -> Result<Vec<C64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = |l: usize, hi: usize, phase: C64| {
        let mut v = vec![C64::default(); 4];
        v[l] = c64(h, 0.0);
        v[hi] = phase * h;
        v
    };
    match label {
        "phi+" => return Ok(bell(0, 3, c64(1.0, 0.0))),
        "phi+i" => return Ok(bell(0, 3, c64(0.0, 1.0))),
        "psi+" => return Ok(bell(1, 2, c64(1.0, 0.0))),
        "psi+i" => return Ok(bell(1, 2, c64(0.0, 1.0))),
        _ => {}
    }
    let kets: Option<Vec<Vec<C64>>> = label.chars().map(single_ket).collect();
    match kets {
        Some(k) if (1..=2).contains(&k.len()) => Ok(k
            .iter()
            .skip(1)
            .fold(k[0].clone(), |acc, v| kron_vec(&acc, v))),
        _ => Err(Error::Tomography(format!("unknown input label {label:?}"))),
    }
}

/// The fixed, ordered input set used for reconstruction.
#[derive(Clone, Debug)]
pub struct QptInputSet {
    n_qubits: usize,
    states: Vec<DensityMatrix>,
}

impl QptInputSet {
    pub fn new(n_qubits: usize) -> Result<Self> {
        let labels: &[&str] = match n_qubits {
            1 => &QPT_LABELS_1Q,
            2 => &QPT_LABELS_2Q,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported qubit count {n_qubits}"
                )))
            }
        };
        let states = labels
            .iter()
            .map(|l| Ok(DensityMatrix::from_ket(&input_ket(l)?)?.with_label(*l)))
            .collect::<Result<_>>()?;
        Ok(Self { n_qubits, states })
    }

    pub fn two_qubit() -> Self {
        Self::new(2).expect("fixed labels")
    }

    pub fn one_qubit() -> Self {
        Self::new(1).expect("fixed labels")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn matrices(&self) -> Vec<CMatrix> {
        self.states.iter().map(|s| s.matrix().clone()).collect()
    }

    /// Outputs of `chi` on every input, in order.
    pub fn outputs(&self, chi: &ProcessMatrix) -> Result<Vec<DensityMatrix>> {
        self.states.iter().map(|s| chi.apply(s)).collect()
    }

    /// The 36 products of single-qubit Pauli eigenstates.
    pub fn pauli_products() -> Vec<(String, CMatrix)> {
        let mut out = Vec::with_capacity(36);
        for a in SINGLE_QUBIT_LABELS {
            for b in SINGLE_QUBIT_LABELS {
                let label: String = [a, b].iter().collect();
                let psi = input_ket(&label).expect("fixed labels");
                out.push((label, CMatrix::projector(&psi)));
            }
        }
        out
    }
}

/// Off-diagonal matrix units `|l><h|` and the pair of inputs (uniform and
/// `+i` superpositions of `l` and `h`) that resolve them. Indices refer to
/// `QPT_LABELS_2Q`; `l`, `h` are matrix indices.
const COHERENCES_2Q: [(usize, usize, usize, usize); 6] = [
    (0, 1, 4, 5),
    (2, 3, 6, 7),
    (0, 2, 9, 11),
    (1, 3, 8, 10),
    (0, 3, 12, 13),
    (1, 2, 14, 15),
];

/// `rho_out(|l><h|) = P_plus + i P_i - (1+i)/2 (P_l + P_h)` and its adjoint
/// counterpart, where `P_x` are outputs of the corresponding inputs.
fn coherence_outputs(
    p_l: &CMatrix,
    p_h: &CMatrix,
    p_plus: &CMatrix,
    p_i: &CMatrix,
) -> (CMatrix, CMatrix) {
    let c = c64(0.5, 0.5);
    let diag = p_l + p_h;
    let lh = &(p_plus + &p_i.scale(c64(0.0, 1.0))) - &diag.scale(c);
    let hl = &(p_plus - &p_i.scale(c64(0.0, 1.0))) - &diag.scale(c.conj());
    (lh, hl)
}

fn choi_from_unit_outputs(n_qubits: usize, unit_out: &[Vec<CMatrix>]) -> Result<ProcessMatrix> {
    let d = 1 << n_qubits;
    let j = CMatrix::from_fn(d * d, d * d, |r, c| {
        let (b, a) = (r / d, r % d);
        let (bp, ap) = (c / d, c % d);
        unit_out[b][bp][(a, ap)]
    });
    ChoiMatrix::new(n_qubits, j)?.to_process()
}

fn check_outputs(outputs: &[DensityMatrix], n: usize, d: usize) -> Result<()> {
    if outputs.len() != n {
        return Err(Error::Tomography(format!(
            "expected {n} outputs, found {}",
            outputs.len()
        )));
    }
    if let Some(o) = outputs.iter().find(|o| o.dim() != d) {
        return Err(Error::Tomography(format!(
            "output of dimension {} where {d} expected",
            o.dim()
        )));
    }
    Ok(())
}

/// Reconstructs a two-qubit process from its outputs on the 16 inputs of
/// [`QptInputSet::two_qubit`], in that order.
pub fn qpt_reconstruct_2q(outputs: &[DensityMatrix]) -> Result<ProcessMatrix> {
    check_outputs(outputs, 16, 4)?;
    let p: Vec<&CMatrix> = outputs.iter().map(|o| o.matrix()).collect();
    let mut unit_out = vec![vec![CMatrix::zeros(4, 4); 4]; 4];
    for a in 0..4 {
        unit_out[a][a] = p[a].clone();
    }
    for &(l, h, plus, imag) in &COHERENCES_2Q {
        let (lh, hl) = coherence_outputs(p[l], p[h], p[plus], p[imag]);
        unit_out[l][h] = lh;
        unit_out[h][l] = hl;
    }
    choi_from_unit_outputs(2, &unit_out)
}

/// Single-qubit reconstruction from outputs on `|0>, |1>, |+>, |R>`.
pub fn qpt_reconstruct_1q(outputs: &[DensityMatrix]) -> Result<ProcessMatrix> {
    check_outputs(outputs, 4, 2)?;
    let p: Vec<&CMatrix> = outputs.iter().map(|o| o.matrix()).collect();
    let (lh, hl) = coherence_outputs(p[0], p[1], p[2], p[3]);
    let unit_out = vec![vec![p[0].clone(), lh], vec![hl, p[1].clone()]];
    choi_from_unit_outputs(1, &unit_out)
}

/// Least-squares reconstruction from any spanning set of input states.
pub fn qpt_reconstruct_general(inputs: &[CMatrix], outputs: &[CMatrix]) -> Result<ProcessMatrix> {
    if inputs.len() != outputs.len() || inputs.is_empty() {
        return Err(Error::Tomography(format!(
            "{} inputs but {} outputs",
            inputs.len(),
            outputs.len()
        )));
    }
    let d = inputs[0].rows();
    let n_qubits = match d {
        2 => 1,
        4 => 2,
        _ => {
            return Err(Error::Tomography(format!(
                "unsupported input dimension {d}"
            )))
        }
    };
    let d2 = d * d;
    // A[m][u]: coefficient of the matrix unit u = (b, b') in input m
    let a = CMatrix::from_fn(inputs.len(), d2, |m, u| inputs[m][(u / d, u % d)]);
    let y = CMatrix::from_fn(inputs.len(), d2, |m, v| outputs[m][(v / d, v % d)]);
    let ah = a.adjoint();
    let gram = &ah * &a;
    let x = gram
        .solve(&(&ah * &y))
        .map_err(|_| Error::Tomography("input states do not span the operator space".into()))?;
    let j = CMatrix::from_fn(d2, d2, |r, c| {
        let (b, aa) = (r / d, r % d);
        let (bp, ap) = (c / d, c % d);
        x[(b * d + bp, aa * d + ap)]
    });
    ChoiMatrix::new(n_qubits, j)?.to_process()
}

/// Clips negative eigenvalues of `chi` and rescales to the original trace.
pub fn project_psd(chi: &ProcessMatrix) -> Result<ProcessMatrix> {
    let tr = chi.trace();
    let clipped = psd_clip(chi.chi())?;
    let ct = clipped.trace().re;
    let scaled = if ct > 0.0 {
        clipped.scale_real(tr / ct)
    } else {
        clipped
    };
    ProcessMatrix::new(chi.n_qubits(), scaled.hermitian_part())
}

/// Shot counts per local Pauli setting. Setting keys are one letter per
/// qubit (`"XZ"`), outcome keys one sign per qubit (`"+-"`).
///
/// `trace` is the heralding probability of a post-selected output (absent
/// means 1). Counts are conditional on success, so without it the weight of
/// a non-trace-preserving map would be lost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub input: String,
    pub shots: u64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub trace: f64,
    pub settings: BTreeMap<String, BTreeMap<String, u64>>,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

/// Shot count used by [`exact_record`]; rounding error per frequency is
/// below `1e-12`.
pub const EXACT_SHOTS: u64 = 1 << 40;

/// Outcome probabilities per setting, either measured or exact.
pub type Frequencies = BTreeMap<String, BTreeMap<String, f64>>;

fn settings(n_qubits: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n_qubits {
        out = out
            .into_iter()
            .flat_map(|s| ['X', 'Y', 'Z'].into_iter().map(move |p| format!("{s}{p}")))
            .collect();
    }
    out
}

fn outcomes(n_qubits: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n_qubits {
        out = out
            .into_iter()
            .flat_map(|s| ['+', '-'].into_iter().map(move |o| format!("{s}{o}")))
            .collect();
    }
    out
}

fn eigenket(pauli: char, sign: char) -> Vec<C64> {
    match (pauli, sign) {
        ('X', '+') => ket_plus(),
        ('X', _) => ket_minus(),
        ('Y', '+') => ket_r(),
        ('Y', _) => ket_l(),
        ('Z', '+') => ket0(),
        _ => ket1(),
    }
}

/// Born-rule probabilities for every setting and outcome.
pub fn exact_frequencies(rho: &CMatrix) -> Result<Frequencies> {
    let n = match rho.rows() {
        2 => 1,
        4 => 2,
        d => {
            return Err(Error::Tomography(format!(
                "unsupported state dimension {d}"
            )))
        }
    };
    let mut freqs = Frequencies::new();
    for setting in settings(n) {
        let mut per = BTreeMap::new();
        for outcome in outcomes(n) {
            let psi = setting
                .chars()
                .zip(outcome.chars())
                .map(|(p, s)| eigenket(p, s))
                .reduce(|a, b| kron_vec(&a, &b))
                .expect("at least one qubit");
            let v = rho.mul_vec(&psi)?;
            let p: C64 = psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            per.insert(outcome, p.re.max(0.0));
        }
        freqs.insert(setting, per);
    }
    Ok(freqs)
}

/// Samples `shots` outcomes per setting from the Born distribution of `rho`.
pub fn simulate_counts(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<TomographyRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let tr = rho.trace();
    let label = rho.label().unwrap_or_default().to_string();
    if tr <= 1e-15 {
        return Ok(TomographyRecord {
            input: label,
            shots,
            trace: 0.0,
            settings: BTreeMap::new(),
        });
    }
    let probs = exact_frequencies(&rho.matrix().scale_real(1.0 / tr))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut settings = BTreeMap::new();
    for (setting, dist) in probs {
        // multinomial draw as a chain of conditional binomials
        let mut remaining = shots;
        let mut mass_left = 1.0;
        let mut counts = BTreeMap::new();
        let n_out = dist.len();
        for (i, (outcome, p)) in dist.into_iter().enumerate() {
            let k = if i + 1 == n_out || remaining == 0 {
                remaining
            } else {
                let q = (p / mass_left).clamp(0.0, 1.0);
                Binomial::new(remaining, q)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?
                    .sample(&mut rng)
            };
            counts.insert(outcome, k);
            remaining -= k;
            mass_left -= p;
        }
        settings.insert(setting, counts);
    }
    Ok(TomographyRecord {
        input: label,
        shots,
        trace: tr,
        settings,
    })
}

/// Record whose counts are the Born probabilities scaled by
/// [`EXACT_SHOTS`] (largest outcome absorbs the rounding remainder).
pub fn exact_record(rho: &DensityMatrix, label: &str) -> Result<TomographyRecord> {
    let tr = rho.trace();
    let mut settings = BTreeMap::new();
    if tr > 1e-15 {
        for (setting, dist) in exact_frequencies(&rho.matrix().scale_real(1.0 / tr))? {
            let mut counts: BTreeMap<String, u64> = dist
                .iter()
                .map(|(o, p)| (o.clone(), (p * EXACT_SHOTS as f64).round() as u64))
                .collect();
            let total: u64 = counts.values().sum();
            let (argmax, _) = dist
                .iter()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty outcome set");
            let c = counts.get_mut(argmax).expect("same keys");
            *c = (*c + EXACT_SHOTS)
                .checked_sub(total)
                .expect("rounding stays small");
            settings.insert(setting, counts);
        }
    }
    Ok(TomographyRecord {
        input: label.to_string(),
        shots: EXACT_SHOTS,
        trace: if tr > 1e-15 { tr } else { 0.0 },
        settings,
    })
}

impl TomographyRecord {
    pub fn n_qubits(&self) -> Result<usize> {
        let n = self
            .settings
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| Error::Tomography(format!("record {:?} has no settings", self.input)))?;
        if !(1..=2).contains(&n) {
            return Err(Error::Tomography(format!("unsupported setting length {n}")));
        }
        Ok(n)
    }

    /// Relative frequencies; checks coverage and per-setting totals.
    pub fn frequencies(&self) -> Result<Frequencies> {
        let n = self.n_qubits()?;
        let mut out = Frequencies::new();
        for s in settings(n) {
            let counts = self.settings.get(&s).ok_or_else(|| {
                Error::Tomography(format!("record {:?} is missing setting {s}", self.input))
            })?;
            let total: u64 = counts.values().sum();
            if total != self.shots {
                return Err(Error::Tomography(format!(
                    "record {:?} setting {s}: counts sum to {total}, shots is {}",
                    self.input, self.shots
                )));
            }
            let mut per = BTreeMap::new();
            for o in outcomes(n) {
                let k = counts.get(&o).copied().unwrap_or(0);
                per.insert(o, k as f64 / self.shots as f64);
            }
            out.insert(s, per);
        }
        Ok(out)
    }
}

fn pauli_matrix(p: char) -> CMatrix {
    use crate::linalg::pauli::*;
    match p {
        'I' => i2(),
        'X' => x(),
        'Y' => y(),
        _ => z(),
    }
}

/// Linear inversion without positivity projection.
pub fn linear_inversion(freqs: &Frequencies) -> Result<CMatrix> {
    let n = freqs
        .keys()
        .next()
        .map(|k| k.len())
        .ok_or_else(|| Error::Tomography("no settings".into()))?;
    for s in settings(n) {
        if !freqs.contains_key(&s) {
            return Err(Error::Tomography(format!("missing setting {s}")));
        }
    }
    let d = 1usize << n;
    let mut rho = CMatrix::zeros(d, d);
    let paulis = ['I', 'X', 'Y', 'Z'];
    let mut labels = vec![String::new()];
    for _ in 0..n {
        labels = labels
            .into_iter()
            .flat_map(|s| paulis.into_iter().map(move |p| format!("{s}{p}")))
            .collect();
    }
    for label in labels {
        // average <P> over every setting compatible with the identity slots
        let mut total = 0.0;
        let mut count = 0usize;
        for (setting, dist) in freqs {
            if !setting
                .chars()
                .zip(label.chars())
                .all(|(s, p)| p == 'I' || s == p)
            {
                continue;
            }
            let e: f64 = dist
                .iter()
                .map(|(o, f)| {
                    let sign: i32 = label
                        .chars()
                        .zip(o.chars())
                        .map(|(p, c)| if p != 'I' && c == '-' { -1 } else { 1 })
                        .product();
                    sign as f64 * f
                })
                .sum();
            total += e;
            count += 1;
        }
        let expectation = total / count as f64;
        let op = label
            .chars()
            .map(pauli_matrix)
            .reduce(|a, b| kron(&a, &b))
            .expect("at least one qubit");
        rho += &op.scale_real(expectation / d as f64);
    }
    Ok(rho.hermitian_part())
}

/// Linear inversion followed by eigenvalue clipping, rescaled to the
/// pre-projection trace.
pub fn state_from_frequencies(freqs: &Frequencies) -> Result<DensityMatrix> {
    let raw = linear_inversion(freqs)?;
    let tr = raw.trace().re;
    let clipped = psd_clip(&raw)?;
    let ct = clipped.trace().re;
    let rho = if ct > 0.0 {
        clipped.scale_real(tr / ct)
    } else {
        clipped
    };
    DensityMatrix::new(rho.hermitian_part())
}

/// Estimated output state, scaled by the record's heralding probability.
pub fn state_tomography(record: &TomographyRecord) -> Result<DensityMatrix> {
    state_tomography_with(record, true)
}

/// As [`state_tomography`]; `project = false` keeps the raw linear
/// inversion, which is exact for noiseless records.
pub fn state_tomography_with(record: &TomographyRecord, project: bool) -> Result<DensityMatrix> {
    if !(0.0..=1.0 + 1e-9).contains(&record.trace) {
        return Err(Error::Tomography(format!(
            "record {:?} has trace {} outside [0, 1]",
            record.input, record.trace
        )));
    }
    let rho = if record.trace == 0.0 {
        let d = if record.settings.is_empty() {
            infer_dim(&record.input).ok_or_else(|| {
                Error::Tomography(format!(
                    "record {:?} has zero trace and no settings",
                    record.input
                ))
            })?
        } else {
            1 << record.n_qubits()?
        };
        CMatrix::zeros(d, d)
    } else {
        let freqs = record.frequencies()?;
        let raw = if project {
            state_from_frequencies(&freqs)?.into_matrix()
        } else {
            linear_inversion(&freqs)?
        };
        raw.scale_real(record.trace)
    };
    Ok(DensityMatrix::new_unchecked(rho).with_label(record.input.clone()))
}

fn infer_dim(label: &str) -> Option<usize> {
    input_ket(label).ok().map(|v| v.len())
}

/// Process tomography from per-input state estimates. Accepts either the
/// 16 canonical inputs or the 36 Pauli-eigenstate products, matched by
/// label in any order. The result is projected onto the PSD cone.
pub fn qpt_from_states(states: &[(String, DensityMatrix)]) -> Result<ProcessMatrix> {
    project_psd(&reconstruct_by_label(states)?)
}

fn reconstruct_by_label(states: &[(String, DensityMatrix)]) -> Result<ProcessMatrix> {
    let by_label: BTreeMap<&str, &DensityMatrix> =
        states.iter().map(|(l, s)| (l.as_str(), s)).collect();
    if by_label.len() != states.len() {
        return Err(Error::Tomography("duplicate input labels".into()));
    }
    if states.len() == 16 && QPT_LABELS_2Q.iter().all(|l| by_label.contains_key(l)) {
        let outputs: Vec<DensityMatrix> =
            QPT_LABELS_2Q.iter().map(|l| by_label[l].clone()).collect();
        qpt_reconstruct_2q(&outputs)
    } else if states.len() == 4 && QPT_LABELS_1Q.iter().all(|l| by_label.contains_key(l)) {
        let outputs: Vec<DensityMatrix> =
            QPT_LABELS_1Q.iter().map(|l| by_label[l].clone()).collect();
        qpt_reconstruct_1q(&outputs)
    } else if states.len() == 36 {
        let mut inputs = Vec::with_capacity(36);
        let mut outputs = Vec::with_capacity(36);
        for (label, rho) in states {
            if label.len() != 2 {
                return Err(Error::Tomography(format!(
                    "{label:?} is not a two-qubit product label"
                )));
            }
            inputs.push(CMatrix::projector(&input_ket(label)?));
            outputs.push(rho.matrix().clone());
        }
        qpt_reconstruct_general(&inputs, &outputs)
    } else {
        let missing: Vec<&str> = QPT_LABELS_2Q
            .iter()
            .copied()
            .filter(|l| !by_label.contains_key(l))
            .collect();
        Err(Error::Tomography(format!(
            "expected the 16 canonical inputs or 36 product inputs, found {} records; missing: {}",
            states.len(),
            missing.join(",")
        )))
    }
}

/// Full pipeline: state tomography on each record, then [`qpt_from_states`].
pub fn qpt_from_counts(records: &[TomographyRecord]) -> Result<ProcessMatrix> {
    let states = records
        .iter()
        .map(|r| Ok((r.input.clone(), state_tomography(r)?)))
        .collect::<Result<Vec<_>>>()?;
    qpt_from_states(&states)
}

/// Noiseless variant: no positivity projection at either stage.
pub fn qpt_from_exact_counts(records: &[TomographyRecord]) -> Result<ProcessMatrix> {
    let states = records
        .iter()
        .map(|r| Ok((r.input.clone(), state_tomography_with(r, false)?)))
        .collect::<Result<Vec<_>>>()?;
    reconstruct_by_label(&states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{phi_plus, x};
    use crate::quantum::KrausSet;
    use crate::random;

    fn proc_of(ops: Vec<CMatrix>) -> ProcessMatrix {
        KrausSet::new(ops).unwrap().to_process().unwrap()
    }

    #[test]
    fn inputs_span_operator_space() {
        let set = QptInputSet::two_qubit();
        let m = CMatrix::from_fn(16, 16, |i, u| set.states()[i].matrix()[(u / 4, u % 4)]);
        assert!(m.inverse().is_ok());
        assert_eq!(set.states()[12].label(), Some("phi+"));
        let psi = input_ket("psi+i").unwrap();
        assert!((psi[2] - c64(0.0, std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn reconstructs_identity_fusion_and_noise() {
        let set = QptInputSet::two_qubit();
        let cases = [
            vec![CMatrix::identity(4)],
            vec![CMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0])],
            vec![CMatrix::unit(4, 0, 0), CMatrix::unit(4, 3, 3)],
        ];
        for ops in cases {
            let truth = proc_of(ops);
            let rec = qpt_reconstruct_2q(&set.outputs(&truth).unwrap()).unwrap();
            assert!(rec.chi().max_abs_diff(truth.chi()) < 1e-12);
        }
        let fusion = proc_of(vec![CMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0])]);
        let rec = qpt_reconstruct_2q(&set.outputs(&fusion).unwrap()).unwrap();
        for (k, j) in [(0, 0), (0, 15), (15, 0), (15, 15)] {
            assert!((rec.entry(k, j).re - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_reconstruction_matches_kraus_oracle() {
        let set = QptInputSet::one_qubit();
        let h = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
            .scale_real(std::f64::consts::FRAC_1_SQRT_2);
        for ops in [vec![CMatrix::identity(2)], vec![x()], vec![h]] {
            let truth = proc_of(ops);
            let rec = qpt_reconstruct_1q(&set.outputs(&truth).unwrap()).unwrap();
            assert!(rec.chi().max_abs_diff(truth.chi()) < 1e-12);
        }
    }

    #[test]
    fn explicit_and_least_squares_reconstructions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let set = QptInputSet::two_qubit();
        let truth = random::kraus(4, 3, false, &mut rng).to_process().unwrap();
        let outs: Vec<CMatrix> = set
            .outputs(&truth)
            .unwrap()
            .into_iter()
            .map(|o| o.into_matrix())
            .collect();
        let ls = qpt_reconstruct_general(&set.matrices(), &outs).unwrap();
        assert!(ls.chi().max_abs_diff(truth.chi()) < 1e-10);

        let products = QptInputSet::pauli_products();
        let ins: Vec<CMatrix> = products.iter().map(|(_, m)| m.clone()).collect();
        let outs: Vec<CMatrix> = ins.iter().map(|m| truth.apply_matrix(m).unwrap()).collect();
        let ls = qpt_reconstruct_general(&ins, &outs).unwrap();
        assert!(ls.chi().max_abs_diff(truth.chi()) < 1e-10);
    }

    #[test]
    fn wrong_output_count_is_rejected() {
        let set = QptInputSet::two_qubit();
        let outs = set.outputs(&ProcessMatrix::identity(2)).unwrap();
        assert!(matches!(
            qpt_reconstruct_2q(&outs[..15]),
            Err(Error::Tomography(_))
        ));
        assert!(qpt_reconstruct_1q(&outs[..4]).is_err());
    }

    #[test]
    fn counts_on_eigenstates_are_deterministic_outcomes() {
        let zero = DensityMatrix::from_ket(&ket0()).unwrap();
        let r = simulate_counts(&zero, 500, 1).unwrap();
        assert_eq!(r.settings["Z"]["+"], 500);
        let plus = DensityMatrix::from_ket(&ket_plus()).unwrap();
        let r = simulate_counts(&plus, 77, 2).unwrap();
        assert_eq!(r.settings["X"]["+"], 77);
        assert_eq!(r.settings.len(), 3);
    }

    #[test]
    fn maximally_mixed_frequencies_within_binomial_error() {
        let shots = 1_000_000u64;
        let r = simulate_counts(&DensityMatrix::maximally_mixed(1), shots, 9).unwrap();
        let f = r.settings["Z"]["+"] as f64 / shots as f64;
        // five standard errors of a fair binomial at N = 1e6 is 0.0025
        assert!((f - 0.5).abs() < 0.002, "{f}");
    }

    #[test]
    fn simulate_counts_is_reproducible() {
        let rho = DensityMatrix::from_ket(&phi_plus()).unwrap();
        assert_eq!(
            simulate_counts(&rho, 1000, 5).unwrap(),
            simulate_counts(&rho, 1000, 5).unwrap()
        );
        assert_ne!(
            simulate_counts(&rho, 1000, 5).unwrap(),
            simulate_counts(&rho, 1000, 6).unwrap()
        );
        let r = simulate_counts(&rho, 1000, 5).unwrap();
        for counts in r.settings.values() {
            assert_eq!(counts.values().sum::<u64>(), 1000);
        }
    }

    #[test]
    fn exact_frequencies_invert_exactly() {
        let bell = CMatrix::projector(&phi_plus());
        let rho = state_from_frequencies(&exact_frequencies(&bell).unwrap()).unwrap();
        assert!(rho.matrix().max_abs_diff(&bell) < 1e-12);
        let mixed = CMatrix::identity(4).scale_real(0.25);
        let rho = state_from_frequencies(&exact_frequencies(&mixed).unwrap()).unwrap();
        assert!(rho.matrix().max_abs_diff(&mixed) < 1e-12);
        for (_, m) in QptInputSet::pauli_products() {
            let rho = state_from_frequencies(&exact_frequencies(&m).unwrap()).unwrap();
            assert!(rho.matrix().max_abs_diff(&m) < 1e-12);
        }
    }

    #[test]
    fn missing_setting_is_reported() {
        let rho = DensityMatrix::from_ket(&phi_plus()).unwrap();
        let mut r = simulate_counts(&rho, 10, 0).unwrap();
        r.settings.remove("XY");
        assert!(matches!(state_tomography(&r), Err(Error::Tomography(_))));
    }

    #[test]
    fn finite_shot_state_tomography_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut failures = 0;
        for seed in 0..100 {
            let truth = DensityMatrix::new(random::density(4, 2, &mut rng)).unwrap();
            let rec = simulate_counts(&truth, 100_000, seed).unwrap();
            let est = state_tomography(&rec).unwrap();
            if est.trace_distance(&truth).unwrap() > 0.02 {
                failures += 1;
            }
        }
        assert!(
            failures <= 1,
            "{failures} of 100 seeds exceeded trace distance 0.02"
        );
    }

    #[test]
    fn record_json_round_trip() {
        let rho = DensityMatrix::from_ket(&phi_plus())
            .unwrap()
            .with_label("phi+");
        let r = simulate_counts(&rho, 100, 3).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"settings\":{\"XX\":{\"++\""));
        let back: TomographyRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
