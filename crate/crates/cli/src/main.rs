use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpc_core::channels::{build_gate, fusion_ideal, ChannelSpec, Gate};
use qpc_core::fixtures;
use qpc_core::formats::{process_from_json, process_to_json};
use qpc_core::measures::{evaluate, MeasureOptions, MeasureReport};
use qpc_core::qpt::{qpt_from_counts, qpt_from_exact_counts, TomographyRecord, QPT_LABELS_2Q};
use qpc_core::quantum::ProcessMatrix;
use qpc_core::sdp::SolverOptions;
use qpc_core::sweep::{
    sweep_dynamics, sweep_fusion, SweepResult, DEFAULT_DYNAMICS_STEPS, DEFAULT_TAU_MAX,
};
use qpc_core::Error;

/// Entanglement preservability of two-qubit processes.
#[derive(Parser, Debug)]
#[command(name = "qpc", version)]
struct Cli {
    /// Seed for random creation inputs and the creation verifier.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Solver duality-gap tolerance.
    #[arg(
        long,
        global = true,
        default_value_t = 1e-7,
        allow_negative_numbers = true
    )]
    gap_tol: f64,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Random product inputs added to the 36 Pauli products in the creation set.
    #[arg(long, global = true, default_value_t = 0)]
    creation_random: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the measures for one channel.
    Measure {
        /// ChannelSpec or process-matrix JSON file.
        spec: PathBuf,
        /// Target process (file, `fusion`, or a gate name) for fidelities.
        #[arg(long)]
        target: Option<String>,
        /// Also evaluate the creation measures.
        #[arg(long)]
        creation: bool,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noisy fusion over p_noise in [0, 1].
    SweepFusion {
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long)]
        creation: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lindblad dynamics over tau in [0, tau_max].
    SweepDynamics {
        #[arg(long, default_value_t = 0.02, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value_t = DEFAULT_TAU_MAX, allow_negative_numbers = true)]
        tau_max: f64,
        #[arg(long, default_value_t = DEFAULT_DYNAMICS_STEPS)]
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Process tomography from a directory of count records.
    Qpt {
        records_dir: PathBuf,
        /// Records hold exact frequencies: skip positivity projection.
        #[arg(long)]
        shots_exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a bundled data table.
    Report {
        /// Fixture name (`table1`).
        fixture: String,
    },
}

enum Failure {
    Usage(String),
    Input(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Solver(_) => 2,
            _ => 1,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Input(m) => ("input", m),
            Failure::Solver(m) => ("solver", m),
        };
        format!(
            "error[{kind}]: {}",
            msg.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join("; ")
        )
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// A ChannelSpec (object with `"kind"`) or a process-matrix JSON document.
fn load_process(path: &Path) -> Result<ProcessMatrix, Failure> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let parsed = if value.get("kind").is_some() {
        ChannelSpec::from_json(&text).and_then(|s| s.build_two_qubit())
    } else {
        process_from_json(&text).and_then(|p| {
            if p.n_qubits() == 1 {
                p.tensor(&ProcessMatrix::identity(1))
            } else {
                Ok(p)
            }
        })
    };
    parsed.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_target(arg: &str) -> Result<ProcessMatrix, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return load_process(path);
    }
    if arg == "fusion" {
        return Ok(fusion_ideal());
    }
    match arg.parse::<Gate>() {
        Ok(g) => {
            let p = build_gate(g);
            Ok(if p.n_qubits() == 1 {
                p.tensor(&ProcessMatrix::identity(1))?
            } else {
                p
            })
        }
        Err(_) => Err(Failure::Input(format!(
            "target {arg:?} is neither a file, `fusion`, nor a gate name"
        ))),
    }
}

/// Values within `1e-6` of 0 or 1 print as exactly 0 or 1.
fn shown(x: f64) -> String {
    let c = qpc_core::measures::CLIP_TOL;
    if x.abs() < c {
        "0".into()
    } else if (x - 1.0).abs() < c {
        "1".into()
    } else {
        format!("{x:.6}")
    }
}

fn print_report(r: &MeasureReport) {
    println!(
        "{:<16} {:>10}  {:<14} {:>5} {:>10}",
        "quantity", "value", "status", "iter", "gap"
    );
    for (name, v) in r.rows() {
        match r.solver.get(name) {
            Some(i) => println!(
                "{name:<16} {:>10}  {:<14} {:>5} {:>10.2e}",
                shown(v),
                i.status.to_string(),
                i.iterations,
                i.gap
            ),
            None => println!(
                "{name:<16} {:>10}  {:<14} {:>5} {:>10}",
                shown(v),
                "-",
                "-",
                "-"
            ),
        }
    }
    if let Some(w) = r
        .solver
        .values()
        .filter_map(|i| i.verifier_worst_pt_eigenvalue)
        .reduce(f64::min)
    {
        println!("creation verifier worst PT eigenvalue: {w:.3e}");
    }
}

fn print_sweep(s: &SweepResult) {
    let mut head = format!("{:>10}", s.parameter);
    for c in &s.columns {
        head.push_str(&format!(" {c:>16}"));
    }
    println!("{head} {:>8}", "time_s");
    for p in &s.points {
        let rows = p.report.rows();
        let mut line = format!("{:>10.6}", p.value);
        for c in &s.columns {
            let v = rows
                .iter()
                .find(|(n, _)| n == c)
                .map_or("-".to_string(), |(_, v)| shown(*v));
            line.push_str(&format!(" {v:>16}"));
        }
        println!("{line} {:>8.2}", p.wall_time_s);
    }
}

fn save_sweep(s: &SweepResult, csv: Option<&Path>, out: Option<&Path>) -> Outcome {
    if let Some(p) = csv {
        write(p, &s.to_csv())?;
    }
    if let Some(p) = out {
        write(p, &s.to_json())?;
    }
    Ok(())
}

fn cmd_qpt(dir: &Path, exact: bool, out: Option<&Path>) -> Outcome {
    let entries =
        fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    let mut seen: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for p in &paths {
        let rec: TomographyRecord = serde_json::from_str(&read(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        seen.entry(rec.input.clone())
            .or_default()
            .push(p.display().to_string());
        records.push(rec);
    }
    let dups: Vec<String> = seen
        .iter()
        .filter(|(_, files)| files.len() > 1)
        .map(|(l, files)| format!("{l} ({})", files.join(", ")))
        .collect();
    if !dups.is_empty() {
        return Err(Failure::Input(format!(
            "duplicate input labels: {}",
            dups.join("; ")
        )));
    }
    if records.len() != 36 {
        let missing: Vec<&str> = QPT_LABELS_2Q
            .iter()
            .copied()
            .filter(|l| !seen.contains_key(*l))
            .collect();
        let extra: Vec<&str> = seen
            .keys()
            .map(String::as_str)
            .filter(|l| !QPT_LABELS_2Q.contains(l))
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Failure::Input(format!(
                "{} records in {}; missing inputs: [{}]; unexpected inputs: [{}]",
                records.len(),
                dir.display(),
                missing.join(","),
                extra.join(",")
            )));
        }
    }
    let chi = if exact {
        qpt_from_exact_counts(&records)?
    } else {
        qpt_from_counts(&records)?
    };
    println!("records          {}", records.len());
    println!("trace            {:.12}", chi.trace());
    println!("min eigenvalue   {:.3e}", chi.chi().min_eigenvalue()?);
    println!("tp residual      {:.3e}", chi.tp_residual());
    if let Some(p) = out {
        write(p, &process_to_json(&chi))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if !(cli.gap_tol > 0.0 && cli.gap_tol.is_finite()) {
        return Err(Failure::Usage(format!(
            "--gap-tol must be positive, got {}",
            cli.gap_tol
        )));
    }
    if cli.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be positive".into()));
    }
    let opts = MeasureOptions {
        solver: SolverOptions {
            gap_tol: cli.gap_tol,
            ..SolverOptions::default()
        },
        creation_random: cli.creation_random,
        seed: cli.seed,
        ..MeasureOptions::default()
    };
    match cli.command {
        Command::Measure {
            spec,
            target,
            creation,
            out,
        } => {
            let chi = load_process(&spec)?;
            let target = target.as_deref().map(load_target).transpose()?;
            let report = evaluate(&chi, target.as_ref(), creation, &opts)?;
            print_report(&report);
            if let Some(p) = out {
                write(
                    &p,
                    &serde_json::to_string_pretty(&report).expect("plain data serializes"),
                )?;
            }
            Ok(())
        }
        Command::SweepFusion {
            steps,
            creation,
            csv,
            out,
        } => {
            let s = sweep_fusion(steps, creation, cli.jobs, &opts)?;
            print_sweep(&s);
            save_sweep(&s, csv.as_deref(), out.as_deref())
        }
        Command::SweepDynamics {
            gamma,
            tau_max,
            steps,
            csv,
            out,
        } => {
            let s = sweep_dynamics(gamma, tau_max, steps, cli.jobs, &opts)?;
            print_sweep(&s);
            save_sweep(&s, csv.as_deref(), out.as_deref())
        }
        Command::Qpt {
            records_dir,
            shots_exact,
            out,
        } => cmd_qpt(&records_dir, shots_exact, out.as_deref()),
        Command::Report { fixture } => {
            let f = fixtures::load(&fixture).map_err(|e| Failure::Usage(e.to_string()))?;
            print!("{}", f.render());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", Failure::Usage(first.to_string()).line());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}
