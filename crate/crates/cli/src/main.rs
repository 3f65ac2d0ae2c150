use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use diffuse_core::experiment::{self, ExperimentError, ExperimentKind, ExperimentOutcome, ExperimentSpec};
use diffuse_core::report::{self, format_real, Panel};
use diffuse_core::TestProblem;

#[derive(Parser)]
#[command(name = "diffuse-dirichlet", version, about = "Diffuse interface Dirichlet convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one convergence study and write its table and plot.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    /// Layer widths 2^-1, 2^-2, ... on one uniform mesh.
    Eps,
    /// Uniform meshes at a fixed small width.
    HUniform,
    /// Meshes refined near the layer until delta <= h^2 and kappa <= 4 delta.
    HLocal,
}

impl From<Experiment> for ExperimentKind {
    fn from(e: Experiment) -> Self {
        match e {
            Experiment::Eps => ExperimentKind::EpsSweep,
            Experiment::HUniform => ExperimentKind::HSweepUniform,
            Experiment::HLocal => ExperimentKind::HSweepLocal,
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Larger meshes and, for the width sweep, widths down to 2^-20.
    #[arg(long)]
    full: bool,
    /// Fixed width for the mesh sweeps; smallest width for the width sweep.
    #[arg(long)]
    eps: Option<f64>,
    /// Subdivisions per side of the (first) uniform mesh.
    #[arg(long)]
    base_n: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Write the mesh of the last run.
    #[arg(long)]
    dump_mesh: bool,
    /// Write the element labels of the last run.
    #[arg(long)]
    dump_layer: bool,
    /// Write the nodal solution of the last run.
    #[arg(long)]
    dump_solution: bool,
}

const EXIT_SOLVER: u8 = 2;
const EXIT_REFINEMENT: u8 = 3;

fn build_spec(args: &RunArgs) -> ExperimentSpec {
    let kind = ExperimentKind::from(args.experiment);
    let mut spec = ExperimentSpec::preset(kind, args.full);
    if let Some(n) = args.base_n {
        spec = spec.with_base_n(n);
    }
    if let Some(eps) = args.eps {
        match kind {
            ExperimentKind::EpsSweep => spec.eps_list.retain(|&e| e >= eps),
            _ => spec.eps_list = vec![eps],
        }
    }
    spec
}

fn print_outcome(out: &ExperimentOutcome) {
    let name = out.table.parameter.name();
    println!(
        "{name:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9} {:>6}",
        "delta", "kappa", "L2", "H1", "Linf", "Linf_out", "vertices", "cg"
    );
    for run in &out.runs {
        let r = &run.report;
        println!(
            "{:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>9} {:>6}",
            run.param, r.delta, r.kappa, r.l2, r.h1_full, r.linf_omega, r.linf_outside, r.vertices, run.cg_iterations
        );
    }
    for (norm, predicted, fitted) in out.rates() {
        match fitted {
            Ok(rate) => println!("rate {:<5} {rate:.3} (predicted {predicted})", norm.label()),
            Err(e) => println!("rate {:<5} n/a: {e} (predicted {predicted})", norm.label()),
        }
    }
    for run in &out.runs {
        if let (Some(target), Some(met)) = (run.delta_target, run.target_met()) {
            println!(
                "h {}: delta {} <= {} and kappa <= 4 delta: {met} after {} passes",
                format_real(run.param),
                format_real(run.report.delta),
                format_real(target),
                run.refinement_passes
            );
        }
    }
}

fn write_outputs(args: &RunArgs, out: &ExperimentOutcome) -> Result<()> {
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let stem = out.kind.name();
    let path = |suffix: &str| -> PathBuf { args.out.join(format!("{stem}{suffix}")) };
    report::write_csv_file(&out.table, &path(".csv"))?;
    let panels: Vec<Panel> = out
        .kind
        .predicted_rates()
        .into_iter()
        .map(|(norm, slope)| Panel { norm, slope })
        .collect();
    report::write_svg_loglog(&out.table, &panels, &path(".svg"))?;
    let mut written = vec![path(".csv"), path(".svg")];
    if let Some(last) = &out.last {
        if args.dump_mesh {
            report::write_file(&path("_mesh.txt"), |w| last.mesh.write_text(w))?;
            written.push(path("_mesh.txt"));
        }
        if args.dump_layer {
            report::write_file(&path("_layer.txt"), |w| report::write_layer_labels(&last.labels, w))?;
            written.push(path("_layer.txt"));
        }
        if args.dump_solution {
            report::write_file(&path("_solution.txt"), |w| {
                report::write_solution(&last.mesh, &last.coefficients, w)
            })?;
            written.push(path("_solution.txt"));
        }
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn exit_code(e: &ExperimentError) -> ExitCode {
    match e {
        ExperimentError::RefinementTarget { .. } => ExitCode::from(EXIT_REFINEMENT),
        e if e.is_solver_failure() => ExitCode::from(EXIT_SOLVER),
        _ => ExitCode::FAILURE,
    }
}

fn run(args: RunArgs) -> ExitCode {
    let spec = build_spec(&args);
    let start = Instant::now();
    let outcome = match experiment::run(&spec, &TestProblem::default()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    print_outcome(&outcome);
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    if let Err(e) = write_outputs(&args, &outcome) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors, which is reserved for solver failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run(args) => run(args),
    }
}
