use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::sweep::ExperimentResult;
use crate::error::{Error, Result};

/// `x` rounded to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal form of `x` after rounding to `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    format!("{}", round_sig(x, digits))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format_sig(v, 9)).unwrap_or_default()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(path))
}

/// Writes `summary.csv`, one `cdf_<N>_<threshold>.csv` per cell and
/// `result.json` into `dir`, returning the written paths.
pub fn emit(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.cells.is_empty() {
        return Err(Error::domain("result has no cells to emit"));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let mut summary = String::from(
        "scheduler,N,threshold,mean_T,mean_min_throughput,mean_sched_time_s,runs_ok,runs_failed\n",
    );
    for c in &result.cells {
        summary.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.scheduler,
            c.num_antennas,
            format_sig(c.threshold, 9),
            fmt_opt(c.mean_t),
            fmt_opt(c.mean_min_throughput),
            fmt_opt(c.mean_sched_time_s),
            c.runs_ok,
            c.runs_failed
        ));
    }
    let path = dir.join("summary.csv");
    write_file(&path, &summary)?;
    written.push(path);

    for c in &result.cells {
        let mut text = String::from("g_t,cdf\n");
        for (v, p) in &c.cdf {
            text.push_str(&format!("{v},{}\n", format_sig(*p, 9)));
        }
        let path = dir.join(format!(
            "cdf_{}_{}.csv",
            c.num_antennas,
            format_sig(c.threshold, 9)
        ));
        write_file(&path, &text)?;
        written.push(path);
    }

    let path = dir.join("result.json");
    write_file(&path, &result.to_json()?)?;
    written.push(path);
    Ok(written)
}
