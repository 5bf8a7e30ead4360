use std::path::{Path, PathBuf};

use super::config::{RasterSource, Resolved, RunConfig};
use super::output::{pgm_string, write_csv_string};
use super::{ensure_dir, write_file, CliError};
use crate::ifs::{backward_set_trajectory, schedule_families, Bounds, PointCloud2D, Raster, DEFAULT_RASTER};
use crate::trajectory::{uniform_grid, OperatorSchedule, SampledFunction};

/// Writes `<name>.csv` (and `<name>.pgm` when enabled) for every schedule.
pub fn cmd_render(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let resolved = Resolved::new(cfg);
    let grid = uniform_grid::<f64>(cfg.grid);
    let mut written = Vec::new();
    for spec in &cfg.schedules {
        let sched = resolved.schedule(cfg, spec, 1)?;
        let samples = sched.sample_backward(&grid)?;
        if cfg.outputs.csv {
            written.push(write_file(out.join(format!("{}.csv", spec.name)), &write_csv_string(&samples))?);
        }
        if cfg.outputs.pgm {
            let raster = rasterize(cfg, &sched, &samples)?;
            written.push(write_file(out.join(format!("{}.pgm", spec.name)), &pgm_string(&raster))?);
        }
    }
    Ok(written)
}

fn rasterize(
    cfg: &RunConfig,
    sched: &OperatorSchedule<f64>,
    samples: &SampledFunction<f64>,
) -> Result<Raster<f64>, CliError> {
    let (w, h) = (cfg.raster.width, cfg.raster.height);
    match cfg.raster.source {
        RasterSource::Graph => {
            let pts: Vec<[f64; 2]> = samples.points().map(|(x, y)| [x, y]).collect();
            let mut r = Raster::new(w, h, Bounds::of(&pts).expect("nonempty grid"));
            r.plot_polyline(&pts);
            Ok(r)
        }
        RasterSource::Attractor => {
            let fams = schedule_families(sched, cfg.raster.steps.min(sched.depth()))?;
            let f0 = SampledFunction::from_fn(samples.grid().to_vec(), |x| sched.initial().value(x))?;
            let a0 = PointCloud2D::from_graph(&f0)?;
            let cloud = backward_set_trajectory(&fams, &a0, DEFAULT_RASTER)?.cloud;
            let mut r = Raster::new(w, h, cloud.bounds());
            r.plot_points(cloud.points());
            Ok(r)
        }
    }
}
