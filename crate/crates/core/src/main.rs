use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use tevp::elements::ElementKind;
use tevp::experiments::{
    convergence_study, reproduce_tables, run_case, write_csv, write_table_csv, ExperimentConfig,
    RowStatus, TableOptions,
};
use tevp::mesh::{validate_mesh, Domain};
use tevp::{Error, Execution, Result};

#[derive(Parser)]
#[command(
    name = "tevp",
    about = "Transmission eigenvalues with the Adini and Morley-Zienkiewicz elements"
)]
struct Cli {
    /// Run assembly and shifts on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a mesh, print its diagnostics and optionally dump it.
    Mesh {
        #[arg(long, default_value = "square")]
        domain: Domain,
        #[arg(long, default_value = "mz")]
        element: ElementKind,
        #[arg(long, default_value_t = 8)]
        level: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve every level of a configuration and write the eigenvalue CSV.
    Solve(CaseArgs),
    /// Solve every level and report convergence of the requested indices.
    Study(CaseArgs),
    /// Recompute a published table and write the comparison CSV.
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        table: u8,
        /// Also run the finest published level.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct CaseArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides, e.g. `--set levels=8,16,32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl CaseArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut text = match &self.config {
            Some(path) => std::fs::read_to_string(path)?,
            None => String::new(),
        };
        for o in &self.overrides {
            if !o.contains('=') {
                return Err(Error::Config(format!("override `{o}` is not KEY=VALUE")));
            }
            text.push('\n');
            text.push_str(o);
        }
        ExperimentConfig::parse(&text)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Mesh {
            domain,
            element,
            level,
            output,
        } => {
            let mesh = tevp::experiments::build_mesh(domain, element, level)?;
            let d = validate_mesh(&mesh)?;
            eprintln!(
                "mesh domain={} cells={} vertices={} edges={} boundary_edges={} h_max={:.6} area={:.6}",
                domain.name(),
                d.cell_count,
                d.vertex_count,
                d.edge_count,
                d.boundary_edge_count,
                d.h_max,
                d.area
            );
            if let Some(path) = output {
                std::fs::write(path, mesh.to_text())?;
            }
            Ok(true)
        }
        Command::Solve(args) => {
            let config = args.load()?;
            let case = run_case(&config, exec)?;
            let mut out = open_output(config.output.as_deref())?;
            write_csv(&case, &mut out)?;
            out.flush()?;
            for l in case.levels.iter().filter(|l| !l.converged) {
                error!("event=level_failed level={} error={:?}", l.level, l.error);
            }
            Ok(case.all_converged())
        }
        Command::Study(args) => {
            let config = args.load()?;
            let (case, reports) = convergence_study(&config, exec)?;
            let mut out = open_output(config.output.as_deref())?;
            write_csv(&case, &mut out)?;
            out.flush()?;
            for r in &reports {
                for (i, level) in r.levels.iter().enumerate() {
                    eprintln!(
                        "study index={} level={level} h={:.6} k={} error={}",
                        r.index,
                        r.h[i],
                        r.values[i]
                            .map_or("failed".into(), |k| format!("{:.10}{:+.10}i", k.re, k.im)),
                        r.errors[i].map_or("-".into(), |e| format!("{e:.3e}"))
                    );
                }
                eprintln!(
                    "study index={} reference={:.10}{:+.10}i reference_kind={:?} slope={}",
                    r.index,
                    r.reference.re,
                    r.reference.im,
                    r.reference_kind,
                    r.slope.map_or("-".into(), |s| format!("{s:.4}"))
                );
            }
            Ok(case.all_converged())
        }
        Command::Tables {
            table,
            full,
            tol,
            output,
        } => {
            let rows = reproduce_tables(
                table,
                &TableOptions {
                    full,
                    tolerance: tol,
                    exec,
                },
            )?;
            let mut out = open_output(output.as_deref())?;
            write_table_csv(&rows, &mut out)?;
            out.flush()?;
            let passed = rows.iter().filter(|r| r.status == RowStatus::Pass).count();
            eprintln!("tables table={table} rows={} passed={passed}", rows.len());
            Ok(rows.iter().all(|r| r.status == RowStatus::Pass))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // one solve is sequential inside; shifts and cells are the parallel axis
    faer::set_global_parallelism(faer::Par::Seq);
    // usage errors exit 1
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            error!("event=error message=\"{e}\"");
            ExitCode::FAILURE
        }
    }
}
