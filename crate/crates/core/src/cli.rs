//! `photmol` command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::figures::{render, FigureName, FigureOptions};
use crate::fock::HilbertSpec;
use crate::model::SystemParams;
use crate::optimal::{numeric_optimum, OptimalPoint, WEAK_DRIVE};
use crate::solver::Solver;
use crate::sweep::{run_point, run_sweep_to_file, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "photmol", version, about = "Photon statistics of two coupled, driven Kerr cavities")]
struct Cli {
    /// Worker threads for grid jobs.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate g2 and <n_a> at one parameter point.
    Point(PointArgs),
    /// Run a two-axis sweep from a JSON config and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Numerically minimize g2_a over (Delta, U).
    Optimize {
        #[arg(long)]
        j: f64,
        /// Drive ratio eps_a/eps_b; "inf" leaves mode B undriven.
        #[arg(long, default_value_t = f64::INFINITY)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value = "full_truncated")]
        solver: Solver,
    },
    /// Regenerate a figure dataset and its plot script.
    Figure {
        name: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long, default_value_t = 501)]
        line_points: usize,
        #[arg(long)]
        solver: Option<Solver>,
    },
}

#[derive(Debug, Args)]
struct PointArgs {
    /// SystemParams JSON file; individual flags override its fields.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    j: Option<f64>,
    /// Sets both detunings.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_a: Option<f64>,
    #[arg(long)]
    delta_b: Option<f64>,
    /// Sets both Kerr strengths.
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    u_a: Option<f64>,
    #[arg(long)]
    u_b: Option<f64>,
    #[arg(long)]
    eps_a: Option<f64>,
    #[arg(long)]
    eps_b: Option<f64>,
    /// eps_a/eps_b; sets eps_b.
    #[arg(long, conflicts_with = "eps_b")]
    eta: Option<f64>,
    /// phi_a - phi_b; sets phi_a.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    phi_a: Option<f64>,
    #[arg(long)]
    phi_b: Option<f64>,
    /// Sets both linewidths.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value = "master_equation")]
    solver: Solver,
    #[arg(long, default_value_t = 3)]
    n_max: usize,
}

impl PointArgs {
    fn params(&self) -> Result<SystemParams> {
        let mut p = match &self.params {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => SystemParams { eps_a: WEAK_DRIVE, ..SystemParams::default() },
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.coupling_j, self.j);
        set(&mut p.delta_a, self.delta);
        set(&mut p.delta_b, self.delta);
        set(&mut p.delta_a, self.delta_a);
        set(&mut p.delta_b, self.delta_b);
        set(&mut p.u_a, self.u);
        set(&mut p.u_b, self.u);
        set(&mut p.u_a, self.u_a);
        set(&mut p.u_b, self.u_b);
        set(&mut p.kappa_a, self.kappa);
        set(&mut p.kappa_b, self.kappa);
        set(&mut p.eps_a, self.eps_a);
        set(&mut p.eps_b, self.eps_b);
        if let Some(eta) = self.eta {
            p.eps_b = if eta.is_infinite() { 0.0 } else { p.eps_a / eta };
        }
        set(&mut p.phi_a, self.phi_a);
        set(&mut p.phi_b, self.phi_b);
        if let Some(phi) = self.phi {
            p.phi_a = p.phi_b + phi;
        }
        Ok(p)
    }
}

#[derive(Debug, Serialize)]
struct PointReport {
    solver: Solver,
    g2_a: Option<f64>,
    g2_a_undefined: bool,
    mean_n_a: f64,
    params: SystemParams,
}

/// Failure classes that map onto exit codes.
enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::InvalidParameter(_) | Error::Asymmetric(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn print_json<T: Serialize>(out: &mut impl Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli, out: &mut impl Write) -> std::result::Result<(), Failure> {
    if cli.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    match cli.command {
        Command::Point(args) => {
            let params = args.params()?;
            params.validate()?;
            let stats = run_point(&params, args.solver, HilbertSpec::symmetric(args.n_max))
                .map_err(|e| Failure::Solver(e.to_string()))?;
            let report = PointReport {
                solver: args.solver,
                g2_a: stats.g2_a,
                g2_a_undefined: stats.g2_a.is_none(),
                mean_n_a: stats.mean_n_a,
                params,
            };
            print_json(out, &report)?;
        }
        Command::Sweep { config, out: path } => {
            let cfg = SweepConfig::from_json_file(&config)?;
            let rows = run_sweep_to_file(&cfg, &path, cli.threads)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            writeln!(out, "wrote {} rows to {} ({failed} failed points)", rows.len(), path.display())
                .map_err(Error::from)?;
        }
        Command::Optimize { j, eta, phi, kappa, solver } => {
            if !(j > 0.0) || !(kappa > 0.0) || !(eta > 0.0) {
                return Err(Failure::Usage(format!("need j, kappa, eta > 0 (got {j}, {kappa}, {eta})")));
            }
            let p: OptimalPoint = numeric_optimum(kappa, j, eta, phi, solver)?;
            print_json(out, &p)?;
        }
        Command::Figure { name, out_dir, resolution, line_points, solver } => {
            let name: FigureName = name.parse()?;
            if resolution < 2 || line_points < 2 {
                return Err(Failure::Usage("--resolution and --line-points must be at least 2".into()));
            }
            let opts = FigureOptions { resolution, line_points, solver, threads: cli.threads };
            let files = render(name, &out_dir, &opts)?;
            for f in [&files.csv, &files.metadata, &files.script] {
                writeln!(out, "{}", f.display()).map_err(Error::from)?;
            }
        }
    }
    Ok(())
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver error: {m}");
            EXIT_SOLVER
        }
    }
}
