//! Single and batch benchmark runs, and their long-format CSV.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::ipm::{solve_observed, SolveOptions, Status};
use crate::par::{self, Execution};
use crate::problem::StandardQP;
use crate::regularizer::Mode;
use crate::spectral::{certify_run, SnapshotReport, CERTIFY_DIMENSION};

pub const CSV_VERSION_LINE: &str = "# ndreg-bench v1";

const CSV_HEADER: [&str; 12] = [
    "problem",
    "mode",
    "status",
    "iterations",
    "total_seconds",
    "objective",
    "k",
    "n_size",
    "reg_thr",
    "factor_seconds",
    "nnz_matrix",
    "nnz_l",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Solver(Status),
    /// The file could not be read or converted.
    InputError,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Solver(s) => s.as_str(),
            RunStatus::InputError => "input-error",
        }
    }

    pub fn is_optimal(self) -> bool {
        self == RunStatus::Solver(Status::Optimal)
    }
}

impl std::str::FromStr for RunStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "input-error" {
            Ok(RunStatus::InputError)
        } else {
            s.parse().map(RunStatus::Solver)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchIteration {
    pub k: usize,
    pub n_size: usize,
    pub reg_thr: f64,
    pub factor_seconds: f64,
    pub nnz_matrix: usize,
    pub nnz_l: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub problem: String,
    pub mode: Mode,
    pub status: RunStatus,
    pub iterations: usize,
    pub total_seconds: f64,
    pub objective: Option<f64>,
    pub per_iteration: Vec<BenchIteration>,
}

/// Rounds to whole nanoseconds so the 9-decimal CSV text is exact.
pub fn quantize_seconds(s: f64) -> f64 {
    (s * 1e9).round() / 1e9
}

fn problem_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Solves one file. With `certify`, every iteration of a problem with
/// n + m ≤ `CERTIFY_DIMENSION` is checked by the dense oracle.
pub fn run_single(
    path: &Path,
    mode: Mode,
    tol: Option<f64>,
    maxit: usize,
    certify: bool,
) -> Result<(BenchRecord, Vec<SnapshotReport>), Error> {
    let problem = StandardQP::from_file(path)?;
    let options = SolveOptions { mode, tol, maxit, ..Default::default() };
    let want_snapshots = certify && problem.n() + problem.m() <= CERTIFY_DIMENSION;
    let mut snaps = Vec::new();
    let report = solve_observed(&problem, &options, &mut |s| {
        if want_snapshots {
            snaps.push(s.to_owned());
        }
    });
    let record = BenchRecord {
        problem: problem_label(path),
        mode,
        status: RunStatus::Solver(report.status),
        iterations: report.iterations,
        total_seconds: quantize_seconds(report.total_seconds),
        objective: Some(report.objective),
        per_iteration: report
            .records
            .iter()
            .map(|r| BenchIteration {
                k: r.k,
                n_size: r.n_size,
                reg_thr: r.reg_thr,
                factor_seconds: quantize_seconds(r.factor_seconds),
                nnz_matrix: r.nnz_matrix,
                nnz_l: r.nnz_l,
            })
            .collect(),
    };
    let certificates = certify_run(&snaps, Execution::Parallel).into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((record, certificates))
}

/// MPS/QPS files directly inside `dir`, sorted by name.
pub fn problem_files(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let io = |e: std::io::Error| Error::Io { path: dir.display().to_string(), message: e.to_string() };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("mps") | Some("qps")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Every file in `dir` under every mode. Problems are solved in parallel
/// (each solve single-threaded); output is ordered by file then by `modes`.
/// A file that fails to load yields an input-error record.
pub fn run_batch(
    dir: &Path,
    modes: &[Mode],
    tol: Option<f64>,
    maxit: usize,
    exec: Execution,
) -> Result<Vec<BenchRecord>, Error> {
    let files = problem_files(dir)?;
    let jobs: Vec<(&PathBuf, Mode)> = files.iter().flat_map(|f| modes.iter().map(move |&m| (f, m))).collect();
    Ok(par::map(exec, &jobs, |&(path, mode)| match run_single(path, mode, tol, maxit, false) {
        Ok((record, _)) => record,
        Err(_) => BenchRecord {
            problem: problem_label(path),
            mode,
            status: RunStatus::InputError,
            iterations: 0,
            total_seconds: 0.0,
            objective: None,
            per_iteration: Vec::new(),
        },
    }))
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

/// Long format: one row per iteration, or a single row with empty
/// iteration columns when a run has none.
pub fn write_csv<W: Write>(mut out: W, records: &[BenchRecord]) -> Result<(), Error> {
    writeln!(out, "{CSV_VERSION_LINE}").map_err(csv_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let head = [
            r.problem.clone(),
            r.mode.as_str().to_string(),
            r.status.as_str().to_string(),
            r.iterations.to_string(),
            format!("{:.9}", r.total_seconds),
            r.objective.map(|v| format!("{v:e}")).unwrap_or_default(),
        ];
        if r.per_iteration.is_empty() {
            let row: Vec<String> = head.iter().cloned().chain(std::iter::repeat_n(String::new(), 6)).collect();
            w.write_record(&row).map_err(csv_err)?;
        }
        for it in &r.per_iteration {
            let tail = [
                it.k.to_string(),
                it.n_size.to_string(),
                format!("{:e}", it.reg_thr),
                format!("{:.9}", it.factor_seconds),
                it.nnz_matrix.to_string(),
                it.nnz_l.to_string(),
            ];
            w.write_record(head.iter().chain(tail.iter())).map_err(csv_err)?;
        }
    }
    w.flush().map_err(csv_err)?;
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[BenchRecord]) -> Result<(), Error> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    write_csv(std::io::BufWriter::new(file), records)
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<T, Error> {
    row[i].parse().map_err(|_| Error::Csv(format!("bad value `{}` in column {}", &row[i], CSV_HEADER[i])))
}

pub fn read_csv<R: BufRead>(mut input: R) -> Result<Vec<BenchRecord>, Error> {
    let mut first = String::new();
    input.read_line(&mut first).map_err(csv_err)?;
    if first.trim_end() != CSV_VERSION_LINE {
        return Err(Error::Csv(format!("expected `{CSV_VERSION_LINE}`, found `{}`", first.trim_end())));
    }
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Csv("unexpected header".into()));
    }
    let mut out: Vec<BenchRecord> = Vec::new();
    for row in rd.records() {
        let row = row.map_err(csv_err)?;
        let problem = row[0].to_string();
        let mode: Mode = row[1].parse().map_err(Error::Csv)?;
        let iteration = if row[6].is_empty() {
            None
        } else {
            Some(BenchIteration {
                k: field(&row, 6)?,
                n_size: field(&row, 7)?,
                reg_thr: field(&row, 8)?,
                factor_seconds: field(&row, 9)?,
                nnz_matrix: field(&row, 10)?,
                nnz_l: field(&row, 11)?,
            })
        };
        let same = out.last().is_some_and(|r| r.problem == problem && r.mode == mode && iteration.is_some() && !r.per_iteration.is_empty());
        if !same {
            out.push(BenchRecord {
                problem,
                mode,
                status: field(&row, 2)?,
                iterations: field(&row, 3)?,
                total_seconds: field(&row, 4)?,
                objective: if row[5].is_empty() { None } else { Some(field(&row, 5)?) },
                per_iteration: Vec::new(),
            });
        }
        if let Some(it) = iteration {
            out.last_mut().expect("pushed above").per_iteration.push(it);
        }
    }
    Ok(out)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<BenchRecord>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    read_csv(std::io::BufReader::new(file))
}
