//! Channels shared by the benchmarks.

use qpc_core::channels::{
    build_fusion, build_gate, build_lindblad_process, build_measure_prepare_example, Gate,
};
use qpc_core::quantum::ProcessMatrix;

pub fn channels() -> Vec<(&'static str, ProcessMatrix)> {
    vec![
        ("fusion_0.5", build_fusion(0.5).expect("valid p_noise")),
        ("measure_prepare", build_measure_prepare_example()),
        ("cnot", build_gate(Gate::Cnot)),
        (
            "lindblad_pi",
            build_lindblad_process(std::f64::consts::PI, 0.02).expect("valid parameters"),
        ),
    ]
}
