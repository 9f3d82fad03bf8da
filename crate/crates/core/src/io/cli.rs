//! Command-line driver behind the `bhfem` binary.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use super::config::{Command, ConfigDoc, RunConfig};
use super::csv::{convergence_csv, format_sci, mesh_label};
use super::vtk::write_vtk;
use crate::analysis::{error_norms, uniqueness_thresholds, verify_energy_bound};
use crate::assembly::DiscreteField;
use crate::error::{Error, Result};
use crate::femcore::SpaceKind;
use crate::mesh::BoxDomain;
use crate::problems::{run_convergence_study, solve_on_unit_box, ExactSolution, ProblemSpec, TransientSolver};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "bhfem",
    version,
    about = "Finite element solvers for the generalized Burgers-Huxley equation",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Convergence study against a closed-form solution; writes one CSV per method
    Converge(RunArgs),
    /// Single stationary solve; writes solution.vtk and summary.txt
    Solve(RunArgs),
    /// Time-dependent excitable-media run; writes VTK snapshots
    Transient(RunArgs),
    /// Prints the uniqueness conditions and the energy bound for the parameters
    CheckConditions(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Flat TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-key override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Maps an error to the process exit code of its category.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) | Error::Parameter(_) => EXIT_CONFIG,
        Error::NonConvergence { .. }
        | Error::LinearSolver { .. }
        | Error::Assembly { .. }
        | Error::BoundaryData { .. } => EXIT_SOLVER,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_OTHER,
    }
}

/// Runs the CLI with explicit streams and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return e.exit_code();
        }
    };
    let (command, args) = match cli.command {
        Cmd::Converge(a) => (Command::Converge, a),
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Transient(a) => (Command::Transient, a),
        Cmd::CheckConditions(a) => (Command::CheckConditions, a),
    };
    match load_config(command, &args).and_then(|cfg| execute(&cfg, out, err)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(command: Command, args: &RunArgs) -> Result<RunConfig> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            ConfigDoc::parse(&text)?
        }
        None => ConfigDoc::default(),
    };
    for s in &args.set {
        doc.set(s)?;
    }
    let mut cfg = doc.resolve(Some(command))?;
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

/// Executes a resolved configuration.
pub fn execute(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    for w in &cfg.warnings {
        writeln!(err, "warning: {w}")?;
    }
    match cfg.command {
        Command::Converge => converge(cfg, out),
        Command::Solve => solve(cfg, out),
        Command::Transient => transient(cfg, out, err),
        Command::CheckConditions => check_conditions(cfg, out),
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(e).context(format!("creating {}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(e).context(format!("writing {}", path.display())))
}

fn converge(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    prepare_dir(&cfg.output_dir)?;
    let mut summary = String::new();
    writeln!(summary, "case {} dim {} params {:?}", cfg.case, cfg.dim, cfg.params).unwrap();
    for &method in &cfg.methods {
        let report = run_convergence_study(cfg.case, method, cfg.dim, &cfg.levels, cfg.params, &cfg.study)?;
        let csv = convergence_csv(&report)?;
        let path = cfg.output_dir.join(format!("{}_{}_{}d.csv", cfg.case, method, cfg.dim));
        write_text(&path, &csv)?;
        writeln!(
            out,
            "# {} {} {}D -> {}",
            method.method_name(),
            cfg.case,
            cfg.dim,
            path.display()
        )?;
        out.write_all(csv.as_bytes())?;
        let fine = report.finest();
        writeln!(
            summary,
            "{}: finest {} h1 {} l2 {} newton {}",
            method.method_name(),
            mesh_label(fine.n, cfg.dim),
            format_sci(fine.h1_error),
            format_sci(fine.l2_error),
            fine.newton_iters
        )
        .unwrap();
        for level in &report.levels {
            if let Some(e) = level.energy {
                writeln!(
                    summary,
                    "  energy bound at {}: {:.6e} <= {:.6e} {}",
                    mesh_label(level.n, cfg.dim),
                    e.lhs,
                    e.k_tilde,
                    if e.holds { "holds" } else { "VIOLATED" }
                )
                .unwrap();
            }
        }
    }
    write_text(&cfg.output_dir.join("summary.txt"), &summary)
}

fn solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    if cfg.methods.len() != 1 {
        return Err(Error::Config("key 'method': solve takes a single method".into()));
    }
    let method = cfg.method();
    prepare_dir(&cfg.output_dir)?;
    let mut problem = ProblemSpec::manufactured(cfg.case, cfg.params, cfg.dim, method)?.with_penalty(cfg.study.penalty);
    if let Some(q) = cfg.study.quad_order {
        problem = problem.with_quad_order(q);
    }
    let start = Instant::now();
    let (field, report) = solve_on_unit_box(&problem, cfg.n, &cfg.study.newton)?;
    let seconds = start.elapsed().as_secs_f64();
    let exact = problem.exact().expect("configured problems are manufactured");
    let errors = error_norms(&field.space, &field.coeffs, &exact, cfg.study.error_quad_order)?;

    let mut s = String::new();
    writeln!(s, "method          {}", method.method_name()).unwrap();
    writeln!(s, "case            {}", cfg.case).unwrap();
    writeln!(s, "mesh            {}", mesh_label(cfg.n, cfg.dim)).unwrap();
    writeln!(s, "dofs            {}", field.space.n_dofs()).unwrap();
    writeln!(s, "newton_iters    {}", report.iterations).unwrap();
    writeln!(s, "final_residual  {:.3e}", report.final_residual).unwrap();
    let history: Vec<String> = report.residual_history.iter().map(|r| format!("{r:.3e}")).collect();
    writeln!(s, "residuals       {}", history.join(" ")).unwrap();
    writeln!(s, "h1_error        {}", format_sci(errors.h1_broken)).unwrap();
    writeln!(s, "l2_error        {}", format_sci(errors.l2)).unwrap();
    if method == SpaceKind::DgP1 {
        writeln!(s, "dg_energy_error {}", format_sci(errors.dg_energy)).unwrap();
    }
    if method == SpaceKind::CfemP1 {
        let e = verify_energy_bound(&field, &cfg.params, &*problem.forcing, cfg.study.error_quad_order)?;
        writeln!(
            s,
            "energy_bound    {:.6e} <= {:.6e} {}",
            e.lhs,
            e.k_tilde,
            if e.holds { "holds" } else { "VIOLATED" }
        )
        .unwrap();
    } else {
        writeln!(s, "energy_bound    n/a (conforming solutions only)").unwrap();
    }
    writeln!(s, "seconds         {seconds:.3}").unwrap();

    let exact_field = DiscreteField::interpolate(field.space.clone(), |x| exact.value(x));
    let diff = DiscreteField {
        space: field.space.clone(),
        coeffs: field
            .coeffs
            .iter()
            .zip(&exact_field.coeffs)
            .map(|(a, b)| a - b)
            .collect(),
    };
    let vtk = cfg.output_dir.join("solution.vtk");
    write_vtk(
        &field.space.mesh,
        &[("u", &field), ("u_exact", &exact_field), ("error", &diff)],
        &vtk,
    )?;
    write_text(&cfg.output_dir.join("summary.txt"), &s)?;
    out.write_all(s.as_bytes())?;
    writeln!(out, "wrote {}", vtk.display())?;
    Ok(())
}

fn transient(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    prepare_dir(&cfg.output_dir)?;
    let spec = cfg.transient.clone();
    let mut solver = TransientSolver::new(spec.clone())?;
    let mesh = solver.space().mesh.clone();
    let mut written = Vec::new();
    let dir = cfg.output_dir.clone();
    let start = Instant::now();
    let total = solver.run(|snap| {
        let path = dir.join(format!("snapshot_{:06}.vtk", snap.step));
        write_vtk(&mesh, &[("u", &snap.u), ("v", &snap.v)], &path)?;
        let _ = writeln!(err, "t = {:.1}: wrote {}", snap.time, path.display());
        written.push((snap.time, path));
        Ok(())
    })?;
    let u = solver.u_field().vertex_average();
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    let var = u.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / u.len() as f64;
    let max_abs = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut s = String::new();
    writeln!(s, "method         {}", spec.discretization.method_name()).unwrap();
    writeln!(s, "params         {:?}", spec.params).unwrap();
    writeln!(s, "epsilon rho    {} {}", spec.epsilon, spec.rho).unwrap();
    writeln!(s, "mesh           {}", mesh_label(spec.mesh_n, 2)).unwrap();
    writeln!(s, "steps          {} (dt = {})", solver.step, spec.dt).unwrap();
    writeln!(s, "newton_total   {total}").unwrap();
    writeln!(s, "final mean u   {mean:.6e}").unwrap();
    writeln!(s, "final var u    {var:.6e}").unwrap();
    writeln!(s, "final max |u|  {max_abs:.6e}").unwrap();
    writeln!(s, "seconds        {:.1}", start.elapsed().as_secs_f64()).unwrap();
    for (t, p) in &written {
        writeln!(s, "snapshot t = {t:.1}: {}", p.display()).unwrap();
    }
    write_text(&cfg.output_dir.join("summary.txt"), &s)?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn check_conditions(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let report = uniqueness_thresholds(&cfg.params, &BoxDomain::unit(cfg.dim), &cfg.conditions)?;
    writeln!(out, "{report}")?;
    Ok(())
}
