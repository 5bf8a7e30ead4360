//! JSON run configuration.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::CliError;
use crate::catalog::{self, Named};
use crate::func::{AffineMap1D, Partition, ScalarFunc};
use crate::lp::{PNorm, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::rb_operator::RbOperator;
use crate::trajectory::OperatorSchedule;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorSpec>,
    pub schedules: Vec<ScheduleSpec>,
    /// Depth for schedules that do not set their own.
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Probe grid size for rendered samples.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub raster: RasterSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub report: ReportSpec,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Named(Named),
    General {
        partition: PartitionSpec,
        scalings: Vec<ScalarFunc<f64>>,
        q: Vec<ScalarFunc<f64>>,
        #[serde(default)]
        endpoints: Option<(f64, f64)>,
    },
    Interp {
        partition: PartitionSpec,
        scalings: Vec<ScalarFunc<f64>>,
        seed: ScalarFunc<f64>,
        #[serde(default)]
        base: Option<ScalarFunc<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    Halves,
    Quarters,
    Uniform(usize),
    Maps(Vec<AffineMap1D<f64>>),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub operator: String,
    #[serde(default = "one")]
    pub repeat: usize,
}

/// Blocks are cycled until `depth` levels exist.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub name: String,
    pub blocks: Vec<BlockSpec>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub initial: Option<ScalarFunc<f64>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default)]
    pub pgm: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { csv: true, pgm: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RasterSource {
    Graph,
    Attractor,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterSpec {
    #[serde(default = "default_raster")]
    pub width: usize,
    #[serde(default = "default_raster")]
    pub height: usize,
    #[serde(default = "default_source")]
    pub source: RasterSource,
    /// Hutchinson steps for attractor rasters.
    #[serde(default = "default_steps")]
    pub steps: usize,
}

impl Default for RasterSpec {
    fn default() -> Self {
        RasterSpec {
            width: default_raster(),
            height: default_raster(),
            source: default_source(),
            steps: default_steps(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Number(f64),
    Text(String),
}

impl PValue {
    pub fn to_pnorm(&self) -> Result<PNorm<f64>, crate::error::Error> {
        match self {
            PValue::Number(p) => PNorm::new(*p),
            PValue::Text(s) => s.parse(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpSpec {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_ps")]
    pub p: Vec<PValue>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Offset bound for the ball condition; skipped when absent.
    #[serde(default)]
    pub m: Option<f64>,
}

impl Default for LpSpec {
    fn default() -> Self {
        LpSpec {
            enabled: true,
            p: default_ps(),
            trials: default_trials(),
            m: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "yes")]
    pub joinup: bool,
    #[serde(default = "yes")]
    pub interpolation: bool,
    #[serde(default = "yes")]
    pub cauchy: bool,
    #[serde(default = "yes")]
    pub invariant_ball: bool,
    #[serde(default = "yes")]
    pub graph_attractor: bool,
    #[serde(default)]
    pub lp: LpSpec,
    #[serde(default = "yes")]
    pub oracle: bool,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            joinup: true,
            interpolation: true,
            cauchy: true,
            invariant_ball: true,
            graph_attractor: true,
            lp: LpSpec::default(),
            oracle: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSpec {
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    /// Probe grid for successive distances; `j / (n - 1)`.
    #[serde(default = "default_report_grid")]
    pub grid: usize,
}

impl Default for ReportSpec {
    fn default() -> Self {
        ReportSpec {
            depths: default_depths(),
            grid: default_report_grid(),
        }
    }
}

fn default_depth() -> usize {
    20
}
fn default_grid() -> usize {
    1025
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_raster() -> usize {
    512
}
fn default_source() -> RasterSource {
    RasterSource::Graph
}
fn default_steps() -> usize {
    20
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_ps() -> Vec<PValue> {
    vec![
        PValue::Number(0.5),
        PValue::Number(1.0),
        PValue::Number(2.0),
        PValue::Text("inf".into()),
    ]
}
fn default_depths() -> Vec<usize> {
    (5..=40).collect()
}
fn default_report_grid() -> usize {
    1001
}
fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}

const CATALOG_JSON: &str = include_str!("catalog.json");

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json_str(&text)
    }

    /// Every named operator, both alternating hybrids and the `x^2`
    /// interpolation schedule.
    pub fn catalog() -> Self {
        Self::from_json_str(CATALOG_JSON).expect("built-in catalog config is valid")
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |path: String, message: &str| {
            Err(CliError::Config {
                path,
                message: message.to_string(),
            })
        };
        if self.schedules.is_empty() {
            return bad("schedules".into(), "at least one schedule is required");
        }
        if self.grid < 2 {
            return bad("grid".into(), "grid needs at least 2 points");
        }
        if self.report.grid < 2 {
            return bad("report.grid".into(), "grid needs at least 2 points");
        }
        if self.depth == 0 {
            return bad("depth".into(), "depth must be at least 1");
        }
        if self.raster.width == 0 || self.raster.height == 0 || self.raster.steps == 0 {
            return bad("raster".into(), "raster sizes and steps must be positive");
        }
        if self.verify.lp.trials == 0 {
            return bad("verify.lp.trials".into(), "trials must be at least 1");
        }
        for (i, p) in self.verify.lp.p.iter().enumerate() {
            if let Err(e) = p.to_pnorm() {
                return bad(format!("verify.lp.p[{i}]"), &e.to_string());
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, s) in self.schedules.iter().enumerate() {
            let valid_name = !s.name.is_empty()
                && s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !valid_name {
                return bad(
                    format!("schedules[{i}].name"),
                    "names use ASCII letters, digits, '-' and '_'",
                );
            }
            if !names.insert(&s.name) {
                return bad(format!("schedules[{i}].name"), "duplicate schedule name");
            }
            if s.blocks.is_empty() {
                return bad(format!("schedules[{i}].blocks"), "at least one block is required");
            }
            if s.depth == Some(0) {
                return bad(format!("schedules[{i}].depth"), "depth must be at least 1");
            }
            for (j, b) in s.blocks.iter().enumerate() {
                if b.repeat == 0 {
                    return bad(format!("schedules[{i}].blocks[{j}].repeat"), "repeat must be at least 1");
                }
                if !self.operators.contains_key(&b.operator) && b.operator.parse::<Named>().is_err() {
                    return bad(
                        format!("schedules[{i}].blocks[{j}].operator"),
                        &format!("unknown operator `{}`", b.operator),
                    );
                }
            }
        }
        Ok(())
    }

    /// Replaces every schedule depth.
    pub fn override_depth(&mut self, depth: usize) {
        self.depth = depth;
        for s in &mut self.schedules {
            s.depth = Some(depth);
        }
    }
}

impl PartitionSpec {
    fn build(&self) -> crate::error::Result<Partition<f64>> {
        match self {
            PartitionSpec::Halves => Ok(Partition::halves()),
            PartitionSpec::Quarters => Ok(Partition::quarters()),
            PartitionSpec::Uniform(n) => Partition::uniform(*n),
            PartitionSpec::Maps(m) => Partition::new(m.clone()),
        }
    }
}

impl OperatorSpec {
    pub fn build(&self) -> crate::error::Result<RbOperator<f64>> {
        match self {
            OperatorSpec::Named(n) => Ok(catalog::make_named(*n).operator),
            OperatorSpec::General {
                partition,
                scalings,
                q,
                endpoints,
            } => {
                let op = RbOperator::build_general(partition.build()?, scalings.clone(), q.clone())?;
                match endpoints {
                    Some((a, b)) => op.with_endpoints(*a, *b),
                    None => Ok(op),
                }
            }
            OperatorSpec::Interp {
                partition,
                scalings,
                seed,
                base,
            } => match base {
                Some(b) => {
                    RbOperator::build_interp_with_base(partition.build()?, scalings.clone(), seed.clone(), b.clone())
                }
                None => RbOperator::build_interp(partition.build()?, scalings.clone(), seed.clone()),
            },
        }
    }
}

/// Operators of a config, built once; failures are kept for reporting.
pub struct Resolved {
    pub operators: BTreeMap<String, Result<Arc<RbOperator<f64>>, crate::error::Error>>,
}

impl Resolved {
    pub fn new(cfg: &RunConfig) -> Self {
        let mut operators: BTreeMap<String, Result<Arc<RbOperator<f64>>, crate::error::Error>> = cfg
            .operators
            .iter()
            .map(|(k, spec)| (k.clone(), spec.build().map(Arc::new)))
            .collect();
        for s in &cfg.schedules {
            for b in &s.blocks {
                if !operators.contains_key(&b.operator) {
                    if let Ok(n) = b.operator.parse::<Named>() {
                        operators.insert(b.operator.clone(), Ok(Arc::new(catalog::make_named(n).operator)));
                    }
                }
            }
        }
        Resolved { operators }
    }

    /// Builds `spec` with at least `min_depth` levels.
    pub fn schedule(
        &self,
        cfg: &RunConfig,
        spec: &ScheduleSpec,
        min_depth: usize,
    ) -> crate::error::Result<OperatorSchedule<f64>> {
        let mut pattern = Vec::with_capacity(spec.blocks.len());
        for b in &spec.blocks {
            match self.operators.get(&b.operator) {
                Some(Ok(op)) => pattern.push((Arc::clone(op), b.repeat)),
                Some(Err(e)) => {
                    return Err(crate::error::Error::Structural(format!(
                        "operator `{}` is invalid: {e}",
                        b.operator
                    )))
                }
                None => {
                    return Err(crate::error::Error::Structural(format!(
                        "unknown operator `{}`",
                        b.operator
                    )))
                }
            }
        }
        let depth = spec.depth.unwrap_or(cfg.depth).max(min_depth);
        OperatorSchedule::periodic(&pattern, depth, self.initial(spec))
    }

    pub fn initial(&self, spec: &ScheduleSpec) -> ScalarFunc<f64> {
        if let Some(f) = &spec.initial {
            return f.clone();
        }
        match spec.blocks[0].operator.parse::<Named>() {
            Ok(n) => catalog::default_initial(n),
            Err(_) => ScalarFunc::zero(),
        }
    }
}
