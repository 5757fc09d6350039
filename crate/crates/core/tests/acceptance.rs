//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qpc_core::channels::{
    build_fusion, build_gate, build_lindblad_process, build_measure_prepare_example, fusion_ideal,
    Gate,
};
use qpc_core::linalg::{c64, CMatrix};
use qpc_core::measures::{
    alpha_cre_with, alpha_pre_with, beta_cre_with, beta_pre_with, f_expt, f_threshold_with,
    Evaluation, IncapableConstraintSet, MeasureOptions, SolveInfo,
};
use qpc_core::qpt::{qpt_from_exact_counts, qpt_reconstruct_2q, QptInputSet};
use qpc_core::quantum::ProcessMatrix;
use qpc_core::random;
use qpc_core::sdp::{solve, AffineHerm, ConicProgram, SolveStatus, SolverOptions};
use qpc_core::sweep::sweep_fusion;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SOLVE_LIMIT: Duration = Duration::from_secs(5);
const SWEEP_LIMIT: Duration = Duration::from_secs(120);
/// Replay and gap tolerance for criterion 8.
const CERT_TOL: f64 = 1e-7;

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            ok: true,
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, note: String) {
        if !ok {
            self.ok = false;
        }
        self.notes
            .push(if ok { note } else { format!("MISS {note}") });
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.expect(
            (got - want).abs() <= tol,
            format!("{what}={got:.7} (want {want} ± {tol:e})"),
        );
    }
}

/// Solves collected for the certificate checks of criterion 8.
#[derive(Default)]
struct Ledger {
    evals: Vec<(String, ProcessMatrix, Evaluation)>,
    infos: Vec<(String, SolveInfo)>,
}

impl Ledger {
    fn eval(
        &mut self,
        name: &str,
        chi: &ProcessMatrix,
        e: qpc_core::Result<Evaluation>,
    ) -> Result<f64, String> {
        let e = e.map_err(|e| format!("{name}: {e}"))?;
        let v = e.value;
        self.evals.push((name.to_string(), chi.clone(), e));
        Ok(v)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn criterion_1(ledger: &mut Ledger) -> Result<Check, String> {
    let chi = build_measure_prepare_example();
    let (e, dt) = timed(|| alpha_pre_with(&chi, &SolverOptions::default()));
    let a = ledger.eval("measure-prepare alpha_pre", &chi, e)?;
    let mut c = Check::new();
    c.near("alpha_pre", a, 0.1333, 1e-3);
    c.expect(dt < SOLVE_LIMIT, format!("solve {:.2}s", dt.as_secs_f64()));
    Ok(c)
}

fn criterion_2(ledger: &mut Ledger) -> Result<Check, String> {
    let o = SolverOptions::default();
    let mut c = Check::new();
    for (p, want) in [(0.0, 1.0), (1.0, 0.0)] {
        let chi = build_fusion(p).unwrap();
        let a = ledger.eval(
            &format!("fusion({p}) alpha_pre"),
            &chi,
            alpha_pre_with(&chi, &o),
        )?;
        let b = ledger.eval(
            &format!("fusion({p}) beta_pre"),
            &chi,
            beta_pre_with(&chi, &o),
        )?;
        c.near(&format!("p={p} alpha_pre"), a, want, 1e-6);
        c.near(&format!("p={p} beta_pre"), b, want, 1e-6);
    }
    let target = fusion_ideal();
    let f = ledger.eval("fusion f_threshold", &target, f_threshold_with(&target, &o))?;
    c.near("f_threshold", f, 0.5, 1e-6);

    let (sweep, dt) = timed(|| sweep_fusion(21, false, None, &MeasureOptions::default()));
    let sweep = sweep.map_err(|e| format!("fusion sweep: {e}"))?;
    c.expect(
        dt < SWEEP_LIMIT,
        format!("21-point sweep {:.1}s", dt.as_secs_f64()),
    );
    for col in ["alpha_pre", "beta_pre"] {
        let v: Vec<f64> = sweep.column(col).into_iter().map(Option::unwrap).collect();
        let rise = v
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        c.expect(rise <= 1e-6, format!("{col} largest step up {rise:.1e}"));
    }
    for p in &sweep.points {
        for (q, info) in &p.report.solver {
            ledger
                .infos
                .push((format!("sweep p={} {q}", p.value), info.clone()));
        }
    }
    Ok(c)
}

fn criterion_3(ledger: &mut Ledger) -> Result<Check, String> {
    let o = SolverOptions::default();
    let mo = MeasureOptions::default();
    let mut c = Check::new();
    let start = build_lindblad_process(0.0, 0.02).unwrap();
    let checks: [(&str, qpc_core::Result<Evaluation>, f64); 4] = [
        ("tau=0 alpha_pre", alpha_pre_with(&start, &o), 1.0),
        ("tau=0 beta_pre", beta_pre_with(&start, &o), 1.0),
        ("tau=0 alpha_cre", alpha_cre_with(&start, &mo), 0.0),
        ("tau=0 beta_cre", beta_cre_with(&start, &mo), 0.0),
    ];
    for (name, e, want) in checks {
        let v = ledger.eval(name, &start, e)?;
        c.near(name, v, want, 1e-4);
    }
    let half = build_lindblad_process(PI, 0.02).unwrap();
    let a = ledger.eval("tau=pi alpha_pre", &half, alpha_pre_with(&half, &o))?;
    let b = ledger.eval("tau=pi beta_pre", &half, beta_pre_with(&half, &o))?;
    c.near("tau=pi alpha_pre", a, 0.94, 0.01);
    c.near("tau=pi beta_pre", b, 0.94, 0.01);
    let closed = build_lindblad_process(PI, 0.0).unwrap();
    let f = f_expt(&closed, &build_gate(Gate::Cz)).unwrap();
    c.near("gamma=0 fidelity to CZ", f, 1.0, 1e-9);
    Ok(c)
}

fn criterion_4(ledger: &mut Ledger) -> Result<Check, String> {
    let o = SolverOptions::default();
    let mut c = Check::new();
    for g in [Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::T] {
        let chi = build_gate(g).tensor(&ProcessMatrix::identity(1)).unwrap();
        let n = g.name();
        let a = ledger.eval(&format!("{n} alpha_pre"), &chi, alpha_pre_with(&chi, &o))?;
        let b = ledger.eval(&format!("{n} beta_pre"), &chi, beta_pre_with(&chi, &o))?;
        let f = ledger.eval(
            &format!("{n} f_threshold"),
            &chi,
            f_threshold_with(&chi, &o),
        )?;
        let worst = [(a - 1.0).abs(), (b - 1.0).abs()]
            .into_iter()
            .fold(0.0, f64::max);
        c.expect(worst <= 1e-6, format!("{n}: alpha/beta off by {worst:.1e}"));
        c.expect((f - 0.5).abs() <= 1e-6, format!("{n}: f_threshold={f:.7}"));
    }
    Ok(c)
}

fn criterion_5() -> Result<Check, String> {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for (p, off) in [(0.0, 0.25), (1.0, 0.0), (0.5, 0.125)] {
        let chi = qpt_from_exact_counts(&common::exact_records(&build_fusion(p).unwrap()))
            .map_err(|e| e.to_string())?;
        for k in 0..16 {
            for j in 0..16 {
                let want = match (k, j) {
                    (0, 0) | (15, 15) => 0.25,
                    (0, 15) | (15, 0) => off,
                    _ => 0.0,
                };
                worst = worst.max((chi.entry(k, j) - c64(want, 0.0)).norm());
            }
        }
    }
    c.expect(
        worst <= 1e-10,
        format!("fusion/noise/mixed max entry error {worst:.1e}"),
    );
    Ok(c)
}

fn criterion_6() -> Result<Check, String> {
    let mut c = Check::new();
    let pool = common::incapable_pool();
    let cases = 50u64;
    let mut failures = Vec::new();
    for i in 0..cases {
        let p = 0.05 + 0.9 * i as f64 / (cases - 1) as f64;
        for r in [
            common::check_faithfulness_and_dominance(1000 + i),
            common::check_precomposition(2000 + i, &pool[i as usize % pool.len()]),
            common::check_mixing(3000 + i, p),
        ] {
            if let Err(e) = r {
                failures.push(e);
            }
        }
    }
    c.expect(
        failures.is_empty(),
        format!(
            "{cases} cases each of MP1+dominance, MP2, MP3: {} failures",
            failures.len()
        ),
    );
    c.notes.extend(failures);
    Ok(c)
}

fn criterion_7() -> Result<Check, String> {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut round: f64 = 0.0;
    for _ in 0..50 {
        let chi = random::kraus(4, 3, false, &mut rng).to_process().unwrap();
        for other in [
            chi.to_choi().to_process().unwrap(),
            chi.to_superoperator().to_process().unwrap(),
            chi.to_kraus().unwrap().to_process().unwrap(),
        ] {
            round = round.max(other.chi().max_abs_diff(chi.chi()));
        }
    }
    c.expect(round <= 1e-10, format!("round trips {round:.1e}"));

    let set = QptInputSet::two_qubit();
    let mut qpt: f64 = 0.0;
    for i in 0..200 {
        let truth = random::kraus(4, 1 + i % 4, i % 2 == 0, &mut rng)
            .to_process()
            .unwrap();
        let rec = qpt_reconstruct_2q(&set.outputs(&truth).unwrap()).unwrap();
        qpt = qpt.max(rec.chi().max_abs_diff(truth.chi()));
    }
    c.expect(qpt <= 1e-9, format!("QPT on 200 CP maps {qpt:.1e}"));

    let o = SolverOptions::default();
    let mut constrained: Vec<CMatrix> = Vec::new();
    for chi in [
        build_fusion(0.3).unwrap(),
        build_measure_prepare_example(),
        build_gate(Gate::Cnot),
        build_lindblad_process(PI, 0.02).unwrap(),
    ] {
        for e in [
            alpha_pre_with(&chi, &o),
            beta_pre_with(&chi, &o),
            f_threshold_with(&chi, &o),
        ] {
            let w = e.map_err(|e| e.to_string())?.witness;
            if w.trace().re > 1e-6 {
                constrained.push(w);
            }
        }
    }
    let mut inc_rng = ChaCha8Rng::seed_from_u64(70);
    constrained.extend((0..10).map(|_| common::incapable(&mut inc_rng).chi().clone()));
    let sep = constrained
        .iter()
        .enumerate()
        .map(|(i, w)| common::worst_output_pt(w, 500 + i as u64))
        .fold(f64::INFINITY, f64::min);
    c.expect(
        sep >= -1e-8,
        format!(
            "{} constrained channels x 1000 inputs, worst PT eigenvalue {sep:.1e}",
            constrained.len()
        ),
    );
    Ok(c)
}

/// Independent check of a preservation-measure witness: order constraint,
/// reported value, and membership of the witness in the incapable set.
fn replay_witness(name: &str, chi: &ProcessMatrix, e: &Evaluation) -> Option<String> {
    let chi = if chi.is_normalized() {
        chi.clone()
    } else {
        chi.normalize().unwrap()
    };
    let w = &e.witness;
    let tr = w.trace().re;
    let (order, value) = if name.ends_with("alpha_pre") {
        let mut d = chi.chi().clone();
        d -= w;
        (d, 1.0 - tr)
    } else if name.ends_with("beta_pre") {
        let mut d = w.clone();
        d -= chi.chi();
        (d, tr - 1.0)
    } else if name.ends_with("f_threshold") {
        let f = qpc_core::linalg::hs_inner(w, chi.chi()).unwrap().re;
        (CMatrix::identity(16).scale_real(0.0), f)
    } else {
        return None;
    };
    let order_min = order.hermitian_part().min_eigenvalue().unwrap();
    let member = IncapableConstraintSet::preservation()
        .worst_eigenvalue(w)
        .unwrap();
    let bad = order_min < -CERT_TOL || member < -CERT_TOL || (value - e.value).abs() > CERT_TOL;
    bad.then(|| {
        format!(
            "{name}: order {order_min:.1e} member {member:.1e} value {value} vs {}",
            e.value
        )
    })
}

fn criterion_8(ledger: &Ledger) -> Result<Check, String> {
    let mut c = Check::new();
    toy_check(&mut c);

    let mut infos: Vec<(String, SolveInfo)> = ledger
        .evals
        .iter()
        .map(|(n, _, e)| (n.clone(), e.info.clone()))
        .collect();
    infos.extend(ledger.infos.iter().cloned());
    let mut worst_replay: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, info) in &infos {
        let replay = (-info.replay_min_eigenvalue)
            .max(info.replay_equality_violation)
            .max(0.0);
        let gap = (info.primal_objective - info.dual_objective).abs();
        worst_replay = worst_replay.max(replay);
        worst_gap = worst_gap.max(gap);
        if info.status != SolveStatus::Optimal || replay > CERT_TOL || gap > CERT_TOL {
            bad.push(format!(
                "{name}: {} replay {replay:.1e} gap {gap:.1e}",
                info.status
            ));
        }
    }
    for (name, chi, e) in &ledger.evals {
        bad.extend(replay_witness(name, chi, e));
    }
    c.expect(
        bad.is_empty(),
        format!(
            "{} solves from criteria 1-4: worst replay violation {worst_replay:.1e}, worst |primal-dual| {worst_gap:.1e}",
            infos.len()
        ),
    );
    c.notes.extend(bad);
    Ok(c)
}

/// Toy programs with closed-form optima.
fn toy_check(c: &mut Check) {
    let o = SolverOptions {
        gap_tol: 1e-10,
        ..SolverOptions::default()
    };
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = true;
    // min <C, X> over density matrices = lambda_min(C)
    for d in 2..=4 {
        let g = random::ginibre(d, d, &mut rng);
        let mut h = g.adjoint();
        h += &g;
        let mut p = ConicProgram::new();
        let x = p.add_var(d);
        p.add_psd("X", AffineHerm::var(x)).unwrap();
        p.add_eq("trace", AffineHerm::var(x).trace().plus_constant(-1.0))
            .unwrap();
        p.minimize(AffineHerm::var(x).inner(&h).unwrap());
        let sol = solve(&p, &o).unwrap();
        ok &= sol.status == SolveStatus::Optimal;
        worst = worst.max((sol.optimal_value - h.min_eigenvalue().unwrap()).abs());
    }
    // max tr(A X) with -I ⪯ X ⪯ I = trace norm of A
    for d in 2..=3 {
        let g = random::ginibre(d, d, &mut rng);
        let mut a = g.adjoint();
        a += &g;
        let mut p = ConicProgram::new();
        let x = p.add_var(d);
        let id = CMatrix::identity(d);
        p.add_psd(
            "upper",
            AffineHerm::var(x).scaled(-1.0).plus_constant(&id).unwrap(),
        )
        .unwrap();
        p.add_psd("lower", AffineHerm::var(x).plus_constant(&id).unwrap())
            .unwrap();
        p.minimize(AffineHerm::var(x).inner(&a).unwrap().scaled(-1.0));
        let sol = solve(&p, &o).unwrap();
        ok &= sol.status == SolveStatus::Optimal;
        let nuclear: f64 = qpc_core::linalg::hermitian_eig(&a)
            .unwrap()
            .values
            .iter()
            .map(|v| v.abs())
            .sum();
        worst = worst.max((sol.optimal_value + nuclear).abs());
    }
    c.expect(
        ok && worst <= 1e-8,
        format!("toy SDPs at gap_tol 1e-10, max error {worst:.1e}"),
    );
}

fn main() {
    let mut ledger = Ledger::default();
    let mut failed = 0;
    let mut report = |n: u32, title: &str, r: Result<Check, String>, dt: Duration| {
        let (ok, notes) = match r {
            Ok(c) => (c.ok, c.notes),
            Err(e) => (false, vec![format!("error: {e}")]),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n} {}: {title} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
        for note in notes {
            println!("    {note}");
        }
    };
    let (r, dt) = timed(|| criterion_1(&mut ledger));
    report(1, "measure-prepare example composition", r, dt);
    let (r, dt) = timed(|| criterion_2(&mut ledger));
    report(2, "fusion anchors and sweep", r, dt);
    let (r, dt) = timed(|| criterion_3(&mut ledger));
    report(3, "dynamics anchors", r, dt);
    let (r, dt) = timed(|| criterion_4(&mut ledger));
    report(4, "ideal single-qubit gates", r, dt);
    let (r, dt) = timed(criterion_5);
    report(5, "fusion process matrices from tomography", r, dt);
    let (r, dt) = timed(criterion_6);
    report(6, "measure axioms on random ensembles", r, dt);
    let (r, dt) = timed(criterion_7);
    report(
        7,
        "representation, tomography and separability oracles",
        r,
        dt,
    );
    let (r, dt) = timed(|| criterion_8(&ledger));
    report(8, "SDP engine certificates", r, dt);
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
