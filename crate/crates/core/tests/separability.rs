//! Processes in the preservation incapable set map every input, not just the
//! tomography inputs, to a separable state.

mod common;

use qpc_core::channels::{
    build_fusion, build_gate, build_lindblad_process, build_measure_prepare_example, Gate,
};
use qpc_core::measures::{alpha_pre_with, beta_pre_with, f_threshold_with, is_incapable};
use qpc_core::sdp::SolverOptions;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn optimizer_witnesses_have_separable_outputs() {
    let o = SolverOptions::default();
    let channels = [
        build_fusion(0.0).unwrap(),
        build_fusion(0.4).unwrap(),
        build_measure_prepare_example(),
        build_gate(Gate::Cnot),
        build_gate(Gate::H)
            .tensor(&qpc_core::quantum::ProcessMatrix::identity(1))
            .unwrap(),
        build_lindblad_process(std::f64::consts::PI, 0.02).unwrap(),
    ];
    for (i, chi) in channels.iter().enumerate() {
        let witnesses = [
            alpha_pre_with(chi, &o).unwrap().witness,
            beta_pre_with(chi, &o).unwrap().witness,
            f_threshold_with(chi, &o).unwrap().witness,
        ];
        for w in witnesses.iter().filter(|w| w.trace().re > 1e-6) {
            let worst = common::worst_output_pt(w, i as u64);
            assert!(worst >= -1e-8, "channel {i}: {worst}");
        }
    }
}

#[test]
fn incapable_constructions_have_separable_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..10 {
        let chi = common::incapable(&mut rng);
        assert!(is_incapable(&chi, 1e-7));
        assert!(common::worst_output_pt(chi.chi(), 100 + i) >= -1e-8);
    }
}
