//! Result-directory layout and the fixed CSV formats.
//!
//! A results directory holds one subdirectory per function (registry key
//! with `:` replaced by `_`), each containing:
//!
//! * `runs.csv`   — one row per run: `run,seed,error,objective,nfe,switch_iteration`
//! * `stats.csv`  — the summary row: `function,runs,best,worst,median,mean,std`
//! * `trace_<i>.csv` — per-iteration traces (see `RunTrace::write_csv`)
//!
//! Floats are written with Rust's shortest round-trippable formatting and
//! directories are scanned in sorted order, so identical runs produce
//! byte-identical files and identical reads.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::benchmarks::ErrorValue;
use crate::error::{Error, Result};
use crate::hses::RunTrace;

use super::compare::FunctionResults;
use super::stats::StatsRow;

/// Directory-safe form of a function id.
pub fn sanitize_id(function: &str) -> String {
    function.replace([':', '/'], "_")
}

/// Writes `runs.csv` for one function's replication set.
pub fn write_runs_csv(path: &Path, function: &str, algorithm: &str, traces: &[RunTrace]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# qhses-runs,v1")?;
    writeln!(w, "# function,{function}")?;
    writeln!(w, "# algorithm,{algorithm}")?;
    writeln!(w, "run,seed,error,objective,nfe,switch_iteration")?;
    for (i, t) in traces.iter().enumerate() {
        writeln!(
            w,
            "{i},{},{},{},{},{}",
            t.seed,
            t.final_error.value(),
            t.best_objective,
            t.total_nfe,
            t.switch_iteration
        )?;
    }
    Ok(())
}

/// Reads a `runs.csv` back into a [`FunctionResults`].
pub fn read_runs_csv(path: &Path) -> Result<FunctionResults> {
    let text = fs::read_to_string(path)?;
    let mut function = None;
    let mut errors = Vec::new();
    let mut objectives = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# function,") {
            function = Some(rest.to_string());
            continue;
        }
        if line.starts_with('#') || line.starts_with("run,") || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::contract(format!(
                "{}: malformed runs.csv row {line:?}",
                path.display()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::contract(format!("bad number {s:?} in {}", path.display())))
        };
        errors.push(ErrorValue::from_raw(parse(fields[2])?));
        objectives.push(parse(fields[3])?);
    }
    let function = function.ok_or_else(|| {
        Error::contract(format!("{}: missing '# function,' header", path.display()))
    })?;
    if errors.is_empty() {
        return Err(Error::contract(format!("{}: no runs", path.display())));
    }
    Ok(FunctionResults {
        function,
        errors,
        objectives,
    })
}

/// Writes a `stats.csv` with a single summary row.
pub fn write_stats_csv(path: &Path, row: &StatsRow) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "function,runs,best,worst,median,mean,std")?;
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        row.function, row.runs, row.best, row.worst, row.median, row.mean, row.std
    )?;
    Ok(())
}

/// Persists one function's batch: runs.csv, stats.csv, and the traces.
pub fn write_function_results(
    results_dir: &Path,
    function: &str,
    algorithm: &str,
    traces: &[RunTrace],
    stats: &StatsRow,
) -> Result<PathBuf> {
    let dir = results_dir.join(sanitize_id(function));
    fs::create_dir_all(&dir)?;
    write_runs_csv(&dir.join("runs.csv"), function, algorithm, traces)?;
    write_stats_csv(&dir.join("stats.csv"), stats)?;
    for (i, trace) in traces.iter().enumerate() {
        trace.write_csv_file(&dir.join(format!("trace_{i:03}.csv")))?;
    }
    Ok(dir)
}

/// Loads every function's `runs.csv` under a results directory, in sorted
/// subdirectory order.
pub fn load_results_dir(dir: &Path) -> Result<Vec<FunctionResults>> {
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("runs.csv").is_file())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(Error::contract(format!(
            "{}: no function subdirectories with runs.csv",
            dir.display()
        )));
    }
    subdirs
        .iter()
        .map(|p| read_runs_csv(&p.join("runs.csv")))
        .collect()
}

/// Writes the per-epoch change-rate series of one training function.
pub fn write_convergence_csv(path: &Path, function: &str, rates: &[f64]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# qhses-convergence,v1")?;
    writeln!(w, "# function,{function}")?;
    writeln!(w, "epoch,change_rate")?;
    for (epoch, rate) in rates.iter().enumerate() {
        writeln!(w, "{},{}", epoch + 1, rate)?;
    }
    Ok(())
}

/// Reads a convergence CSV back into (function, rates).
pub fn read_convergence_csv(path: &Path) -> Result<(String, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut function = String::new();
    let mut rates = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# function,") {
            function = rest.to_string();
            continue;
        }
        if line.starts_with('#') || line.starts_with("epoch,") || line.trim().is_empty() {
            continue;
        }
        let value = line.split(',').nth(1).ok_or_else(|| {
            Error::contract(format!("{}: malformed row {line:?}", path.display()))
        })?;
        rates.push(value.parse::<f64>().map_err(|_| {
            Error::contract(format!("{}: bad change rate {value:?}", path.display()))
        })?);
    }
    Ok((function, rates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_problem, BaseKind, ProblemSpec};
    use crate::experiments::stats::summarize;
    use crate::hses::{run_hses, HsesConfig};

    #[test]
    fn runs_csv_round_trips() {
        let problem = make_problem(&ProblemSpec::new(BaseKind::Sphere, 10, 1)).unwrap();
        let config = HsesConfig {
            switch_iteration: 10,
            max_nfe: 5_000,
            population_size: 20,
            ..HsesConfig::for_dimension(10)
        };
        let traces: Vec<_> = (0..4)
            .map(|seed| run_hses(&problem, &config, seed).unwrap())
            .collect();
        let errors: Vec<ErrorValue> = traces.iter().map(|t| t.final_error).collect();
        let stats = summarize(problem.id(), &errors).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let written =
            write_function_results(dir.path(), problem.id(), "hses", &traces, &stats).unwrap();
        assert!(written.join("runs.csv").is_file());
        assert!(written.join("stats.csv").is_file());
        assert!(written.join("trace_003.csv").is_file());

        let loaded = load_results_dir(dir.path()).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].function, problem.id());
        assert_eq!(loaded[0].errors.len(), 4);
        for (orig, read) in traces.iter().zip(&loaded[0].objectives) {
            assert_eq!(orig.best_objective, *read);
        }
    }

    #[test]
    fn convergence_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("conv.csv");
        let rates = vec![1.5e-3, 7.2e-9, 0.0];
        write_convergence_csv(&path, "sphere:10:1", &rates).unwrap();
        let (function, loaded) = read_convergence_csv(&path).unwrap();
        assert_eq!(function, "sphere:10:1");
        assert_eq!(loaded, rates);
    }

    #[test]
    fn missing_headers_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        fs::write(&path, "run,seed,error,objective,nfe,switch_iteration\n").unwrap();
        assert!(read_runs_csv(&path).is_err());
    }
}
