use std::fmt::Write;
use std::path::Path;

use super::config::{Resolved, RunConfig};
use super::{ensure_dir, write_file, CliError};
use crate::error::Error;
use crate::trajectory::{convergence_report, uniform_grid};

/// Decay table, fitted rate and summability partial sums per schedule.
/// Written to `<out>/report.txt` when `out` is given.
pub fn cmd_report(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let depths = &cfg.report.depths;
    if depths.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "report needs at least 2 depths, got {}",
            depths.len()
        ))
        .into());
    }
    let last = *depths.iter().max().expect("nonempty");
    let resolved = Resolved::new(cfg);
    let grid = uniform_grid::<f64>(cfg.report.grid);
    let mut text = String::new();
    for spec in &cfg.schedules {
        let sched = resolved.schedule(cfg, spec, last + 1)?;
        let r = convergence_report(&sched, &grid, depths)?;
        let w = &mut text;
        writeln!(w, "schedule {}", spec.name).unwrap();
        writeln!(w, "{:>6} {:>24} {:>24} {:>24}", "depth", "distance", "tail_bound", "partial_sum").unwrap();
        for (i, k) in r.depths.iter().enumerate() {
            writeln!(
                w,
                "{:>6} {:>24.16e} {:>24.16e} {:>24.16e}",
                k, r.distances[i], r.tail_bounds[i], r.partial_sums[i]
            )
            .unwrap();
        }
        match r.fitted_rate {
            Some(rate) => writeln!(w, "fitted_rate {rate:.16e}").unwrap(),
            None => writeln!(w, "fitted_rate none").unwrap(),
        }
        writeln!(w, "uniform_bound {:.16e}", r.uniform_bound).unwrap();
        writeln!(w, "summability_bound {:.16e}", r.summability_bound).unwrap();
        writeln!(w, "radius {:.16e}", r.radius).unwrap();
        writeln!(w, "max_sup_norm {:.16e}", r.max_sup_norm).unwrap();
        writeln!(w).unwrap();
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(dir.join("report.txt"), &text)?;
    }
    Ok(text)
}
