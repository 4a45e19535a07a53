use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ndreg::bench::{read_csv_file, run_batch, run_single, write_csv_file};
use ndreg::ipm::DEFAULT_MAXIT;
use ndreg::par::Execution;
use ndreg::profile::{performance_profile, Metric};
use ndreg::regularizer::Mode;

const EXIT_NOT_OPTIMAL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "ndreg", version, about = "IPM with non-diagonal regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one MPS/QPS file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "nondiag")]
        mode: Mode,
        #[arg(long, env = "NDREG_TOL")]
        tol: Option<f64>,
        #[arg(long, env = "NDREG_MAXIT", default_value_t = DEFAULT_MAXIT)]
        maxit: usize,
        /// Check every iteration with the dense spectral oracle (n + m ≤ 300).
        #[arg(long)]
        certify: bool,
        /// Certificate records, one line per bound.
        #[arg(long, requires = "certify")]
        dump: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve every MPS/QPS file in a directory under each mode.
    Bench {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "nondiag,uniform,none")]
        modes: Vec<Mode>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, env = "NDREG_TOL")]
        tol: Option<f64>,
        #[arg(long, env = "NDREG_MAXIT", default_value_t = DEFAULT_MAXIT)]
        maxit: usize,
        /// Run problems one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Performance profile over the modes found in bench CSV files.
    Profile {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long, default_value = "time")]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> Result<u8, ndreg::Error> {
    match cli.command {
        Command::Solve { file, mode, tol, maxit, certify, dump, csv } => {
            let (record, reports) = run_single(&file, mode, tol, maxit, certify)?;
            println!("{:>4} {:>5} {:>11} {:>11} {:>9} {:>9}", "k", "|N|", "reg_thr", "t_factor", "nnz", "nnz(L)");
            for it in &record.per_iteration {
                println!(
                    "{:>4} {:>5} {:>11.3e} {:>11.3e} {:>9} {:>9}",
                    it.k, it.n_size, it.reg_thr, it.factor_seconds, it.nnz_matrix, it.nnz_l
                );
            }
            println!(
                "{} mode={} status={} iterations={} objective={:.10e} seconds={:.6}",
                record.problem,
                record.mode,
                record.status.as_str(),
                record.iterations,
                record.objective.unwrap_or(f64::NAN),
                record.total_seconds
            );
            let mut certified_ok = true;
            if certify {
                let failures: usize =
                    reports.iter().flat_map(|r| &r.certificates).filter(|c| !c.passed()).count();
                let worst = reports.iter().map(|r| r.newton.relative).fold(0.0, f64::max);
                let checked: usize = reports.iter().map(|r| r.certificates.len()).sum();
                println!(
                    "certified iterations={} certificates={} failed={} max_newton_residual={:.3e}",
                    reports.len(),
                    checked,
                    failures,
                    worst
                );
                certified_ok = failures == 0;
                if let Some(path) = dump {
                    let text: String = reports.iter().map(|r| r.dump()).collect();
                    std::fs::write(&path, text)
                        .map_err(|e| ndreg::Error::Io { path: path.display().to_string(), message: e.to_string() })?;
                }
            }
            if let Some(path) = csv {
                write_csv_file(&path, std::slice::from_ref(&record))?;
            }
            Ok(if record.status.is_optimal() && certified_ok { 0 } else { EXIT_NOT_OPTIMAL })
        }
        Command::Bench { dir, modes, csv, tol, maxit, sequential } => {
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let records = run_batch(&dir, &modes, tol, maxit, exec)?;
            for r in &records {
                println!("{:<16} {:<8} {:<22} {:>4} {:.6}", r.problem, r.mode, r.status.as_str(), r.iterations, r.total_seconds);
            }
            write_csv_file(&csv, &records)?;
            Ok(0)
        }
        Command::Profile { csv, metric, out } => {
            let mut records = Vec::new();
            for path in &csv {
                records.extend(read_csv_file(path)?);
            }
            let profile = performance_profile(&records, metric)?;
            for (s, name) in profile.solvers.iter().enumerate() {
                println!("{name:<8} tau=1: {:.3}  tau=2: {:.3}", profile.value(s, 1.0), profile.value(s, 2.0));
            }
            profile.write_csv_file(&out)?;
            Ok(0)
        }
    }
}
