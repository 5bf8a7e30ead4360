//! CSV samples and plain PGM rasters.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::ifs::Raster;
use crate::trajectory::SampledFunction;

const PGM_LINE: usize = 70;

/// `x,value` rows with 17 significant digits.
pub fn write_csv_string(g: &SampledFunction<f64>) -> String {
    let mut out = String::with_capacity(48 * (g.len() + 1));
    out.push_str("x,value\n");
    for (x, v) in g.points() {
        writeln!(out, "{x:.16e},{v:.16e}").expect("writing to a String");
    }
    out
}

pub fn parse_csv(text: &str) -> Result<SampledFunction<f64>> {
    let mut lines = text.lines();
    if lines.next() != Some("x,value") {
        return Err(Error::Structural("CSV header must be `x,value`".into()));
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (n, line) in lines.enumerate() {
        let bad = || Error::Structural(format!("CSV row {}: `{line}`", n + 1));
        let (x, v) = line.split_once(',').ok_or_else(bad)?;
        xs.push(x.parse::<f64>().map_err(|_| bad())?);
        vs.push(v.parse::<f64>().map_err(|_| bad())?);
    }
    SampledFunction::new(xs, vs)
}

/// Plain (P2) graymap: background 255, occupied cells 0.
pub fn pgm_string(r: &Raster<f64>) -> String {
    let mut out = format!("P2 {} {} 255\n", r.width, r.height);
    for row in 0..r.height {
        let mut line = String::new();
        for col in 0..r.width {
            let v = if r.is_set(col, row) { "0" } else { "255" };
            if !line.is_empty() && line.len() + 1 + v.len() > PGM_LINE {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(v);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}
