//! A small Monte-Carlo sweep over thresholds and antenna counts, with the
//! per-instance best-threshold summary and file output.
//!
//! Run with `cargo run --release --example threshold_sweep [out_dir]`.

use groupcast::harness::{best_threshold_summary, emit, spearman};
use groupcast::{sweep, ExperimentConfig, Result, SchedulerKind, SystemConfig};

fn main() -> Result<()> {
    let mut config = ExperimentConfig::new(
        SystemConfig::uniform(8, 6, 2, 1),
        SchedulerKind::Gss,
        vec![0.1, 0.2, 0.3, 0.4, 0.5],
    );
    config.antenna_grid = vec![4, 8];
    config.num_drops = 3;
    config.num_realizations = 3;
    let result = sweep(&config)?;

    println!("N  alpha  mean T  mean min throughput");
    for cell in &result.cells {
        println!(
            "{:<2} {:<6} {:<7} {:.4}",
            cell.num_antennas,
            cell.threshold,
            cell.mean_t.unwrap_or(f64::NAN),
            cell.mean_min_throughput.unwrap_or(f64::NAN)
        );
    }
    for n in &config.antenna_grid {
        let (x, y): (Vec<f64>, Vec<f64>) = result
            .cells
            .iter()
            .filter(|c| c.num_antennas == *n)
            .filter_map(|c| Some((c.threshold, c.mean_t?)))
            .unzip();
        println!("N={n}: Spearman(alpha, mean T) = {:?}", spearman(&x, &y));
    }
    for row in best_threshold_summary(&result) {
        println!(
            "N={}: best-threshold mean throughput {:.4}, mean T at best {:.2}",
            row.num_antennas, row.mean_best_throughput, row.mean_t_at_best
        );
    }

    if let Some(dir) = std::env::args().nth(1) {
        for path in emit(&result, dir.as_ref())? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
