//! Seeded random states, unitaries and channels for tests, sweeps and
//! property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, hermitian_eig, CMatrix, C64};
use crate::quantum::KrausSet;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state.
pub fn ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Unit-trace state `G G^dagger / tr` with `G` a `d x rank` Ginibre matrix.
pub fn density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_real(1.0 / tr).hermitian_part()
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for q in &cols {
            let ip: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= ip * qi;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Random Kraus set with `sum K^dagger K ⪯ I`.
///
/// With `trace_preserving` the completeness relation holds with equality;
/// otherwise the operators are post-multiplied by a random contraction.
pub fn kraus<R: Rng + ?Sized>(
    d: usize,
    n_ops: usize,
    trace_preserving: bool,
    rng: &mut R,
) -> KrausSet {
    let gs: Vec<CMatrix> = (0..n_ops.max(1)).map(|_| ginibre(d, d, rng)).collect();
    let s = gs
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, g| &acc + &(&g.adjoint() * g));
    let e = hermitian_eig(&s.hermitian_part()).expect("Gram matrix is Hermitian");
    let mut right = e.reconstruct_with(|l| 1.0 / l.sqrt());
    if !trace_preserving {
        let u = unitary(d, rng);
        let shrink: Vec<f64> = (0..d).map(|_| rng.random::<f64>().sqrt()).collect();
        let contraction = &(&u * &CMatrix::diag_real(&shrink)) * &u.adjoint();
        right = &right * &contraction;
    }
    KrausSet::new(gs.iter().map(|g| g * &right).collect()).expect("square Kraus operators")
}

/// Product of two Haar-random single-qubit pure states.
pub fn product_state<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let a = ket(2, rng);
    let b = ket(2, rng);
    CMatrix::projector(&crate::linalg::pauli::kron_vec(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 4, 8] {
            let u = unitary(d, &mut rng);
            assert!((&u.adjoint() * &u).max_abs_diff(&CMatrix::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn kraus_completeness() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..5 {
            let tp = kraus(4, n, true, &mut rng);
            assert!(tp.completeness().max_abs_diff(&CMatrix::identity(4)) < 1e-10);
            let sub = kraus(4, n, false, &mut rng);
            assert!(sub.is_subnormalized(1e-10));
        }
    }

    #[test]
    fn density_is_a_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for rank in 1..=4 {
            let r = density(4, rank, &mut rng);
            assert!((r.trace().re - 1.0).abs() < 1e-12);
            assert!(r.is_psd(1e-12));
        }
    }
}
