use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use goafem::adaptive::{reference_errors, run_with, RunConfig};
use goafem::mesh::write_mesh;
use goafem::mlspace::Assembler;
use goafem::output::{self, Settings};
use goafem::problem::ProblemSpec;
use goafem::{Error, Result};

#[derive(Parser)]
#[command(name = "goafem", version, about = "Goal-oriented adaptive multilevel stochastic Galerkin FEM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive loop and write the convergence CSV.
    Run(RunArgs),
    /// Run to the reference tolerance and write the reference-error CSV too.
    Reference(RunArgs),
    /// Print final estimates and the fitted rate of a convergence CSV.
    Report {
        /// Convergence CSV, or a directory together with --setup.
        path: PathBuf,
        #[arg(long)]
        setup: Option<u8>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    setup: Option<u8>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    ref_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    solver_tol: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the final mesh of the zero index.
    #[arg(long)]
    dump_mesh: bool,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let map = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                output::parse_config(&text)?
            }
            None => Default::default(),
        };
        let mut s = Settings::from_map(self.setup, &map)?;
        if let Some(v) = self.theta {
            s.run.theta = v;
        }
        if let Some(v) = self.tol {
            s.run.tol = v;
        }
        if let Some(v) = self.ref_tol {
            s.ref_tol = Some(v);
        }
        if let Some(v) = self.max_iter {
            s.run.max_iter = v;
        }
        if let Some(v) = self.solver_tol {
            s.run.solver_tol = v;
        }
        if let Some(v) = &self.output_dir {
            s.output_dir = v.clone();
        }
        if let Some(v) = self.threads {
            s.threads = Some(v);
        }
        s.dump_mesh |= self.dump_mesh;
        s.validate()?;
        Ok(s)
    }
}

fn execute(s: &Settings, reference: bool) -> Result<()> {
    if let Some(n) = s.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let asm = Assembler::new(ProblemSpec::setup(s.run.setup)?)?;
    let setup = s.run.setup;
    let csv = output::convergence_path(&s.output_dir, setup);
    let ref_tol = match (reference, s.ref_tol) {
        (false, _) => None,
        (true, Some(r)) => Some(r),
        (true, None) => Some(goafem::adaptive::desk_tolerances(setup)?.1.min(s.run.tol / 10.0)),
    };
    let run_cfg = RunConfig {
        tol: ref_tol.unwrap_or(s.run.tol),
        max_iter: if ref_tol.is_some() { s.run.max_iter + 100 } else { s.run.max_iter },
        ..s.run.clone()
    };
    // rows are written as they come, so a failed run leaves a partial CSV;
    // a reference run keeps only the rows the plain run would have produced
    let mut rows = Vec::new();
    let mut in_prefix = true;
    let mut last_mesh = None;
    let result = run_with(&asm, &run_cfg, |state, rec| {
        eprintln!(
            "iter {:>3}  dofs {:>8}  mu {:.3e}  zeta {:.3e}  product {:.3e}  #P {}",
            rec.iter, rec.dofs, rec.mu, rec.zeta, rec.product, rec.n_indices
        );
        if in_prefix {
            rows.push(rec.clone());
            let _ = output::write_file(&csv, &output::convergence_csv(&rows));
        }
        in_prefix &= rec.product >= s.run.tol && rec.iter < s.run.max_iter;
        if s.dump_mesh {
            last_mesh = Some(state.structure.meshes()[0].clone());
        }
    });
    let full = result?;
    if let Some(mesh) = last_mesh {
        let path = s.output_dir.join(format!("setup{setup}_mesh0.txt"));
        let mut buf = Vec::new();
        write_mesh(&mesh, &mut buf).map_err(|e| Error::Config(e.to_string()))?;
        output::write_file(&path, &String::from_utf8_lossy(&buf))?;
    }
    if ref_tol.is_some() {
        let log = goafem::adaptive::ConvergenceLog { setup, records: rows, converged: false };
        let errors = reference_errors(&log, &full)?;
        output::write_file(&output::reference_path(&s.output_dir, setup), &output::reference_csv(&log, &errors))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => a.settings().and_then(|s| execute(&s, false)),
        Command::Reference(a) => a.settings().and_then(|s| execute(&s, true)),
        Command::Report { path, setup } => {
            let path = match setup {
                Some(k) if path.is_dir() => output::convergence_path(&path, k),
                _ => path,
            };
            std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
                .and_then(|t| output::parse_csv(&t))
                .and_then(|t| output::report(&t))
                .map(|r| print!("{r}"))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
