//! Dolan–Moré performance profiles.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::bench::BenchRecord;
use crate::error::Error;

pub const PROFILE_VERSION_LINE: &str = "# ndreg-profile v1";
const GRID_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Time,
    Iterations,
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "time" => Ok(Metric::Time),
            "iter" | "iterations" => Ok(Metric::Iterations),
            other => Err(format!("unknown metric {other}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerformanceProfile {
    pub solvers: Vec<String>,
    pub problems: Vec<String>,
    /// ratios[p][s]; ∞ for failures.
    pub ratios: Vec<Vec<f64>>,
    /// Ascending, starts at 1.
    pub grid: Vec<f64>,
    /// curves[s][g] = fraction of problems with ratio ≤ grid[g].
    pub curves: Vec<Vec<f64>>,
}

impl PerformanceProfile {
    /// Fraction of problems solver `s` handles within ratio `tau`.
    pub fn value(&self, s: usize, tau: f64) -> f64 {
        if self.problems.is_empty() {
            return 0.0;
        }
        let hits = self.ratios.iter().filter(|r| r[s] <= tau).count();
        hits as f64 / self.problems.len() as f64
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), Error> {
        let err = |e: std::io::Error| Error::Csv(e.to_string());
        writeln!(out, "{PROFILE_VERSION_LINE}").map_err(err)?;
        writeln!(out, "tau,{}", self.solvers.join(",")).map_err(err)?;
        for (g, tau) in self.grid.iter().enumerate() {
            let row: Vec<String> = self.curves.iter().map(|c| format!("{:.6}", c[g])).collect();
            writeln!(out, "{tau:.6},{}", row.join(",")).map_err(err)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<(), Error> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// `metrics[p][s]` is solver s's cost on problem p, `None` when it failed.
pub fn profile_from_metrics(
    solvers: Vec<String>,
    problems: Vec<String>,
    metrics: &[Vec<Option<f64>>],
) -> Result<PerformanceProfile, Error> {
    if solvers.len() < 2 {
        return Err(Error::Invalid("a performance profile needs at least two solvers".into()));
    }
    if metrics.len() != problems.len() || metrics.iter().any(|row| row.len() != solvers.len()) {
        return Err(Error::DimensionMismatch { expected: problems.len() * solvers.len(), found: metrics.iter().map(Vec::len).sum() });
    }
    let ratios: Vec<Vec<f64>> = metrics
        .iter()
        .map(|row| {
            let best = row.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
            row.iter()
                .map(|v| match v {
                    None => f64::INFINITY,
                    Some(v) if *v == best => 1.0,
                    Some(v) if best > 0.0 => v / best,
                    Some(_) => f64::INFINITY,
                })
                .collect()
        })
        .collect();
    let top = ratios.iter().flatten().filter(|r| r.is_finite()).cloned().fold(2.0, f64::max);
    let grid = log_grid(top, GRID_POINTS);
    let mut profile = PerformanceProfile { solvers, problems, ratios, grid, curves: Vec::new() };
    profile.curves = (0..profile.solvers.len()).map(|s| profile.grid.iter().map(|&t| profile.value(s, t)).collect()).collect();
    Ok(profile)
}

/// `points` values from 1 to `top`, evenly spaced in log scale, both ends
/// exact.
pub fn log_grid(top: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let step = top.ln() / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| (step * i as f64).exp()).collect();
    g[0] = 1.0;
    g[points - 1] = top;
    g
}

/// Solvers are the modes present in `records`. A missing or non-optimal
/// record counts as a failure.
pub fn performance_profile(records: &[BenchRecord], metric: Metric) -> Result<PerformanceProfile, Error> {
    let mut solvers: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    for r in records {
        let m = r.mode.as_str().to_string();
        if !solvers.contains(&m) {
            solvers.push(m);
        }
        if !problems.contains(&r.problem) {
            problems.push(r.problem.clone());
        }
    }
    let mut cell: BTreeMap<(usize, usize), Option<f64>> = BTreeMap::new();
    for r in records {
        let p = problems.iter().position(|x| *x == r.problem).expect("collected above");
        let s = solvers.iter().position(|x| x == r.mode.as_str()).expect("collected above");
        let value = r.status.is_optimal().then_some(match metric {
            Metric::Time => r.total_seconds,
            Metric::Iterations => r.iterations as f64,
        });
        cell.insert((p, s), value);
    }
    let metrics: Vec<Vec<Option<f64>>> =
        (0..problems.len()).map(|p| (0..solvers.len()).map(|s| cell.get(&(p, s)).cloned().flatten()).collect()).collect();
    profile_from_metrics(solvers, problems, &metrics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize, prefix: &str) -> Vec<String> {
        (0..k).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn two_by_two_example() {
        let t = vec![vec![Some(1.0), Some(2.0)], vec![Some(2.0), Some(2.0)]];
        let p = profile_from_metrics(names(2, "s"), names(2, "p"), &t).unwrap();
        assert_eq!((p.value(0, 1.0), p.value(1, 1.0)), (1.0, 0.5));
        assert_eq!((p.value(0, 2.0), p.value(1, 2.0)), (1.0, 1.0));
    }

    #[test]
    fn self_and_failures() {
        let t = vec![vec![Some(3.0), None], vec![Some(0.5), None]];
        let p = profile_from_metrics(names(2, "s"), names(2, "p"), &t).unwrap();
        assert!(p.curves[0].iter().all(|&v| v == 1.0));
        assert!(p.curves[1].iter().all(|&v| v == 0.0));
        assert_eq!(p.value(1, 1e300), 0.0);
    }

    #[test]
    fn grid_ends() {
        let g = log_grid(5.0, 10);
        assert_eq!((g[0], g[9]), (1.0, 5.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn one_solver_rejected() {
        assert!(profile_from_metrics(names(1, "s"), names(1, "p"), &[vec![Some(1.0)]]).is_err());
    }
}
