//! Run configuration.
//!
//! A config file is TOML with the tables below; key order is irrelevant and
//! unknown keys are rejected.
//!
//! ```toml
//! [grid]
//! n = 256           # nodes per side
//! side = 1.0
//!
//! [phase]
//! eps = 0.04
//! alpha = 0.5
//! dt = 4e-4         # default 0.25 eps^2
//! t_end = 0.25
//! snapshot_every = 100
//! mode = "lagged"   # or "projected"
//!
//! [init]
//! shape = "ellipse" # circle: center, radius; ellipse: center, a, b; strip: lo, hi
//! center = [0.5, 0.5]
//! a = 0.30
//! b = 0.20
//!
//! [track]
//! n = 256           # curve nodes
//! dt = 1e-6         # default 0.8 of the explicit bound
//! mode = "projected"
//!
//! [calib]
//! delta = 0.05      # default: curvature-limited tube radius
//!
//! [compare]
//! times = [0.0, 0.1, 0.25]   # default [0, t_end]
//!
//! [output]
//! dir = "runs/ellipse"
//! ```
//!
//! A sweep file is a run config plus
//!
//! ```toml
//! [sweep]
//! eps = [0.08, 0.04, 0.02]
//! grids = [256]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{default_tube_radius, max_tube_radius};
use crate::error::{Error, Result};
use crate::fields::PeriodicGrid;
use crate::phasefield::{PhaseLambdaMode, C_STAB, MIN_CELLS_PER_EPS};
use crate::sharpinterface::{stable_dt, Curve, LambdaMode, MIN_NODES};

use super::tolerances::DEFAULT_TOLERANCES;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_ENV: &str = "VPMCF_OUTPUT_DIR";

/// Fraction of the explicit front-tracking bound used when `track.dt` is unset.
pub const TRACK_DT_FRACTION: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub phase: PhaseConfig,
    pub init: InitConfig,
    #[serde(default)]
    pub track: TrackConfig,
    #[serde(default)]
    pub calib: CalibConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn unit_side() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    0.5
}

fn default_snapshot_every() -> usize {
    100
}

fn default_nodes() -> usize {
    256
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "unit_side")]
    pub side: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub eps: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub mode: PhaseLambdaMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitConfig {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        a: f64,
        b: f64,
    },
    /// Two straight interfaces at `y = lo` and `y = hi`.
    Strip {
        lo: f64,
        hi: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackConfig {
    #[serde(default = "default_nodes", alias = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub mode: LambdaMode,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            n: default_nodes(),
            dt: None,
            mode: LambdaMode::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default)]
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Maps a TOML error to the key it names (the first back-quoted token of
/// the message), or to `config` when there is none.
fn parse_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    let key = msg.split('`').nth(1).unwrap_or("config").to_string();
    Error::Config {
        key,
        reason: e.to_string().trim().to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

impl InitConfig {
    pub fn name(&self) -> &'static str {
        match self {
            InitConfig::Circle { .. } => "circle",
            InitConfig::Ellipse { .. } => "ellipse",
            InitConfig::Strip { .. } => "strip",
        }
    }

    /// The initial interface as a closed curve; `None` for the strip.
    pub fn curve(&self, nodes: usize) -> Result<Option<Curve>> {
        match *self {
            InitConfig::Circle { center, radius } => Curve::circle(center, radius, nodes).map(Some),
            InitConfig::Ellipse { center, a, b } => Curve::ellipse(center, a, b, nodes).map(Some),
            InitConfig::Strip { .. } => Ok(None),
        }
    }

    /// Half extents of the bounding box around `center`.
    fn extent(&self) -> Option<([f64; 2], [f64; 2])> {
        match *self {
            InitConfig::Circle { center, radius } => Some((center, [radius, radius])),
            InitConfig::Ellipse { center, a, b } => Some((center, [a, b])),
            InitConfig::Strip { .. } => None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(parse_error)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read_text(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.grid.n, self.grid.side).map_err(|e| invalid("grid.n", e.to_string()))
    }

    pub fn phase_dt(&self) -> f64 {
        self.phase
            .dt
            .unwrap_or(DEFAULT_TOLERANCES.dt_factor * self.phase.eps * self.phase.eps)
    }

    pub fn compare_times(&self) -> Vec<f64> {
        if self.compare.times.is_empty() {
            vec![0.0, self.phase.t_end]
        } else {
            self.compare.times.clone()
        }
    }

    /// Step size of the front tracker for `curve`.
    pub fn track_dt(&self, curve: &Curve) -> f64 {
        self.track.dt.unwrap_or(TRACK_DT_FRACTION * stable_dt(curve))
    }

    /// Tube radius of the calibrations of `curve`.
    pub fn delta(&self, curve: &Curve) -> Result<f64> {
        Ok(self.calib.delta.unwrap_or(default_tube_radius(curve, &self.grid()?)))
    }

    /// Checks every parameter and returns a copy with all defaults filled in.
    pub fn resolved(&self) -> Result<Self> {
        let grid = self.grid()?;
        if !(self.grid.side > 0.0 && self.grid.side.is_finite()) {
            return Err(invalid("grid.side", "must be positive"));
        }
        let p = &self.phase;
        if !(p.eps > 0.0 && p.eps.is_finite()) {
            return Err(invalid("phase.eps", "must be positive"));
        }
        if p.eps / grid.h() < MIN_CELLS_PER_EPS {
            return Err(invalid(
                "phase.eps",
                format!(
                    "eps = {} is under-resolved: eps/h = {:.3} < {MIN_CELLS_PER_EPS}",
                    p.eps,
                    p.eps / grid.h()
                ),
            ));
        }
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            return Err(invalid("phase.alpha", "must lie in (0, 1)"));
        }
        let dt = self.phase_dt();
        let bound = C_STAB * p.eps * p.eps;
        if !(dt > 0.0 && dt <= bound * (1.0 + 1e-12)) {
            return Err(invalid("phase.dt", format!("{dt:e} outside (0, {bound:e}]")));
        }
        if !(p.t_end > 0.0 && p.t_end.is_finite()) {
            return Err(invalid("phase.t_end", "must be positive"));
        }
        if p.snapshot_every == 0 {
            return Err(invalid("phase.snapshot_every", "must be at least 1"));
        }
        if self.track.n < MIN_NODES {
            return Err(invalid("track.n", format!("need at least {MIN_NODES} nodes")));
        }
        let mut out = self.clone();
        out.phase.dt = Some(dt);
        out.compare.times = self.compare_times();
        let side = self.grid.side;
        match self.init {
            InitConfig::Strip { lo, hi } => {
                if !(lo > 0.0 && lo < hi && hi < side) {
                    return Err(invalid(
                        "init",
                        format!("strip [{lo}, {hi}] must lie inside (0, {side})"),
                    ));
                }
            }
            _ => {
                let (center, half) = self.init.extent().expect("closed shape");
                if half.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
                    return Err(invalid("init", "shape radii must be positive"));
                }
                let curve = self
                    .init
                    .curve(self.track.n)
                    .map_err(|e| invalid("init", e.to_string()))?
                    .expect("closed shape");
                if let Some(d) = self.calib.delta {
                    let limit = max_tube_radius(&curve);
                    if !(d > 0.0 && d <= limit) {
                        return Err(invalid("calib.delta", format!("{d} outside (0, {limit}]")));
                    }
                }
                let delta = self.delta(&curve)?;
                for axis in 0..2 {
                    let (lo, hi) = (center[axis] - half[axis], center[axis] + half[axis]);
                    if lo < delta || hi > side - delta {
                        return Err(invalid(
                            "init",
                            format!(
                                "{} leaves the torus margin {delta:.4} along axis {axis}",
                                self.init.name()
                            ),
                        ));
                    }
                }
                let tdt = self.track_dt(&curve);
                if !(tdt > 0.0 && tdt <= stable_dt(&curve)) {
                    return Err(invalid(
                        "track.dt",
                        format!("{tdt:e} outside (0, {:e}]", stable_dt(&curve)),
                    ));
                }
                out.track.dt = Some(tdt);
                out.calib.delta = Some(delta);
            }
        }
        let times = &out.compare.times;
        if times.iter().any(|t| !(*t >= 0.0 && *t <= p.t_end * (1.0 + 1e-12))) {
            return Err(invalid("compare.times", format!("times must lie in [0, {}]", p.t_end)));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("compare.times", "times must be strictly increasing"));
        }
        Ok(out)
    }

    /// Output directory: `explicit`, else the [`OUTPUT_ENV`] variable, else
    /// `output.dir`.
    pub fn output_dir(&self, explicit: Option<&Path>) -> Result<PathBuf> {
        if let Some(p) = explicit {
            return Ok(p.to_path_buf());
        }
        if let Some(v) = std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()) {
            return Ok(PathBuf::from(v));
        }
        self.output.dir.clone().ok_or_else(|| {
            invalid(
                "output.dir",
                format!("no output directory: pass one or set {OUTPUT_ENV}"),
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    eps: Vec<f64>,
    #[serde(default)]
    grids: Vec<usize>,
}

/// An ε ladder over a base configuration; member time steps follow
/// `dt = 0.25 ε²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub base: RunConfig,
    pub eps_list: Vec<f64>,
    pub grid_list: Vec<usize>,
}

impl SweepPlan {
    pub fn new(base: RunConfig, eps_list: Vec<f64>, grid_list: Vec<usize>) -> Result<Self> {
        if eps_list.is_empty() {
            return Err(invalid("sweep.eps", "empty eps list"));
        }
        if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("sweep.eps", "eps must be strictly decreasing"));
        }
        if grid_list.is_empty() {
            return Err(invalid("sweep.grids", "empty grid list"));
        }
        let plan = Self {
            base,
            eps_list,
            grid_list,
        };
        for m in plan.members() {
            m.resolved()?;
        }
        Ok(plan)
    }

    /// Parses a run config with a `[sweep]` table; `grids` defaults to
    /// `[grid.n]`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(parse_error)?;
        let section = table
            .remove("sweep")
            .ok_or_else(|| invalid("sweep", "missing [sweep] table"))?;
        let section: SweepSection = section.try_into().map_err(parse_error)?;
        let base: RunConfig = table.try_into().map_err(parse_error)?;
        let grids = if section.grids.is_empty() {
            vec![base.grid.n]
        } else {
            section.grids
        };
        Self::new(base, section.eps, grids)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read_text(path)?)
    }

    /// Member configs, ε-major: for each ε every grid in order.
    pub fn members(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for &eps in &self.eps_list {
            for &n in &self.grid_list {
                let mut c = self.base.clone();
                c.grid.n = n;
                c.phase.eps = eps;
                c.phase.dt = Some(DEFAULT_TOLERANCES.dt_factor * eps * eps);
                out.push(c);
            }
        }
        out
    }
}
