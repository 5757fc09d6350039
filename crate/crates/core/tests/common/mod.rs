#![allow(dead_code)]

use qpc_core::linalg::{c64, partial_transpose, CMatrix, Subsystem};
use qpc_core::measures::{alpha_cre, alpha_pre, beta_cre, beta_pre, is_incapable};
use qpc_core::qpt::{exact_record, QptInputSet, TomographyRecord};
use qpc_core::quantum::{apply_chi, KrausSet, ProcessMatrix};
use qpc_core::random;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn process(ops: Vec<CMatrix>) -> ProcessMatrix {
    KrausSet::new(ops).unwrap().to_process().unwrap()
}

/// Measure in a random basis, prepare a random pure state per outcome.
pub fn entanglement_breaking<R: Rng>(rng: &mut R) -> KrausSet {
    let u = random::unitary(2, rng);
    let ops = (0..2)
        .map(|i| {
            let prep = random::ket(2, rng);
            let meas: Vec<_> = (0..2).map(|r| u[(r, i)]).collect();
            CMatrix::outer(&prep, &meas)
        })
        .collect();
    KrausSet::new(ops).unwrap()
}

pub fn local_channel<R: Rng>(rng: &mut R) -> KrausSet {
    let n = rng.random_range(1..=3);
    random::kraus(2, n, true, rng)
}

/// LOSR mixture in which every term breaks entanglement on one side, so
/// every output is separable.
pub fn incapable<R: Rng>(rng: &mut R) -> ProcessMatrix {
    let terms = rng.random_range(1..=3);
    let mut parts = Vec::new();
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 0.1).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    for _ in 0..terms {
        let eb = entanglement_breaking(rng);
        let other = local_channel(rng);
        parts.push(if rng.random::<bool>() {
            (eb, other)
        } else {
            (other, eb)
        });
    }
    qpc_core::channels::build_losr(&weights, &parts).unwrap()
}

/// Trace-preserving two-qubit channel close to a random entangling unitary.
pub fn capable<R: Rng>(rng: &mut R) -> ProcessMatrix {
    let u = random::unitary(4, rng);
    let noise = random::kraus(4, 2, true, rng);
    let p: f64 = rng.random_range(0.0..0.3);
    ProcessMatrix::mix(&[
        (1.0 - p, &process(vec![u])),
        (p, &noise.to_process().unwrap()),
    ])
    .unwrap()
}

/// Any trace-preserving two-qubit channel from a few families.
pub fn any_channel<R: Rng>(rng: &mut R) -> ProcessMatrix {
    match rng.random_range(0..4) {
        0 => capable(rng),
        1 => incapable(rng),
        2 => random::kraus(4, rng.random_range(1..=4), true, rng)
            .to_process()
            .unwrap(),
        _ => {
            let p: f64 = rng.random();
            ProcessMatrix::mix(&[(p, &capable(rng)), (1.0 - p, &incapable(rng))]).unwrap()
        }
    }
}

pub fn swap() -> CMatrix {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    CMatrix::from_vec(4, 4, vec![l, o, o, o, o, o, l, o, o, l, o, o, o, o, o, l]).unwrap()
}

pub const SLACK: f64 = 1e-6;

pub fn incapable_pool() -> Vec<ProcessMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    (0..10).map(|_| incapable(&mut rng)).collect()
}

/// MP1 for both measures, plus dominance of preservation over creation.
pub fn check_faithfulness_and_dominance(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = any_channel(&mut rng);
    let (a, b) = (alpha_pre(&chi).map_err(err)?, beta_pre(&chi).map_err(err)?);
    let inc = is_incapable(&chi, 1e-7);
    if (a <= SLACK) != inc || (b <= SLACK) != inc {
        return Err(format!(
            "seed {seed}: alpha_pre {a} beta_pre {b} incapable {inc}"
        ));
    }
    let (ac, bc) = (alpha_cre(&chi).map_err(err)?, beta_cre(&chi).map_err(err)?);
    if a < ac - SLACK || b < bc - SLACK {
        return Err(format!(
            "seed {seed}: pre ({a}, {b}) below cre ({ac}, {bc})"
        ));
    }
    Ok(())
}

/// MP2: pre-composing with an incapable process.
pub fn check_precomposition(seed: u64, incapable: &ProcessMatrix) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = capable(&mut rng);
    let ext = chi.compose(incapable).map_err(err)?;
    for (name, f) in MEASURES {
        let (before, after) = (f(&chi).map_err(err)?, f(&ext).map_err(err)?);
        if after > before + SLACK {
            return Err(format!("seed {seed}: {name} rose from {before} to {after}"));
        }
    }
    Ok(())
}

/// MP3: a mixture of extensions is no better than the average.
pub fn check_mixing(seed: u64, p: f64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = capable(&mut rng);
    let parts: Vec<ProcessMatrix> = (0..2)
        .map(|_| chi.compose(&incapable(&mut rng)))
        .collect::<qpc_core::Result<_>>()
        .map_err(err)?;
    let mix = ProcessMatrix::mix(&[(p, &parts[0]), (1.0 - p, &parts[1])]).map_err(err)?;
    for (name, f) in MEASURES {
        let avg = p * f(&parts[0]).map_err(err)? + (1.0 - p) * f(&parts[1]).map_err(err)?;
        let m = f(&mix).map_err(err)?;
        if m > avg + SLACK {
            return Err(format!(
                "seed {seed}: {name} of mixture {m} exceeds average {avg}"
            ));
        }
    }
    Ok(())
}

type Measure = fn(&ProcessMatrix) -> qpc_core::Result<f64>;

const MEASURES: [(&str, Measure); 2] = [("alpha_pre", alpha_pre), ("beta_pre", beta_pre)];

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Noise-free count records for the 16 tomography inputs.
pub fn exact_records(chi: &ProcessMatrix) -> Vec<TomographyRecord> {
    let set = QptInputSet::two_qubit();
    set.outputs(chi)
        .unwrap()
        .iter()
        .zip(set.states())
        .map(|(out, input)| exact_record(out, input.label().unwrap()).unwrap())
        .collect()
}

/// Smallest eigenvalue of the output or its partial transpose over 1000
/// random inputs of mixed rank.
pub fn worst_output_pt(chi: &CMatrix, seed: u64) -> f64 {
    let chi = chi.scale_real(1.0 / chi.trace().re);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..1000)
        .map(|i| {
            let rho = random::density(4, 1 + i % 4, &mut rng);
            let out = apply_chi(2, &chi, &rho).unwrap();
            let pt = partial_transpose(&out, Subsystem::B).unwrap();
            pt.hermitian_part()
                .min_eigenvalue()
                .unwrap()
                .min(out.hermitian_part().min_eigenvalue().unwrap())
        })
        .fold(f64::INFINITY, f64::min)
}
