//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::{self, CurveState, PerturbationMode};
use crate::dynamics::{Scheme, StepperConfig};
use crate::error::{Error, Result};
use crate::spectral::DealiasParams;
use crate::Vec2;

use super::files;

fn one() -> f64 {
    1.0
}

/// Starting configuration of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Circle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        theta: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    PerturbedCircle {
        #[serde(default = "one")]
        radius: f64,
        modes: Vec<PerturbationMode>,
    },
    ReparamCircle {
        #[serde(default = "one")]
        radius: f64,
        beta: f64,
    },
    /// A snapshot file; relative paths are resolved against the directory of
    /// the configuration file.
    File { path: PathBuf },
}

/// `true` / `false`, or explicit filter parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DealiasSetting {
    Enabled(bool),
    Params(DealiasParams),
}

impl DealiasSetting {
    pub fn resolve(self) -> Option<DealiasParams> {
        match self {
            DealiasSetting::Enabled(true) => Some(DealiasParams::default()),
            DealiasSetting::Enabled(false) => None,
            DealiasSetting::Params(p) => Some(p),
        }
    }
}

/// Rectangular lattice for velocity and pressure sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl FieldGrid {
    /// Lattice points, row by row in `y` and then `x`.
    pub fn points(&self) -> Vec<Vec2> {
        let coord = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(Vec2::new(
                    coord(self.xmin, self.xmax, self.nx, ix),
                    coord(self.ymin, self.ymax, self.ny, iy),
                ));
            }
        }
        out
    }
}

/// A validated run description. Serializing it gives the canonical form with
/// every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid_n: usize,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: DealiasSetting,
    pub lambda_abort: Option<f64>,
    pub initial: InitialCondition,
    pub snapshot_every: usize,
    pub output_dir: PathBuf,
    pub field_grid: Option<FieldGrid>,
}

/// What a user may write; absent keys take their defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_grid_n")]
    grid_n: usize,
    #[serde(default = "default_scheme")]
    scheme: Scheme,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "one")]
    t_end: f64,
    #[serde(default)]
    dealias: Option<DealiasSetting>,
    #[serde(default)]
    lambda_abort: Option<f64>,
    initial: InitialCondition,
    #[serde(default = "default_snapshot_every")]
    snapshot_every: usize,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    field_grid: Option<FieldGrid>,
}

fn default_grid_n() -> usize {
    256
}
fn default_scheme() -> Scheme {
    Scheme::ExpEuler
}
fn default_dt() -> f64 {
    1e-2
}
fn default_snapshot_every() -> usize {
    100
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("ibstring-out")
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a configuration document. Unknown keys are errors and
/// every error names the offending field path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_err(&path, e.into_inner().to_string())
    })?;
    let cfg = RunConfig {
        grid_n: raw.grid_n,
        scheme: raw.scheme,
        dt: raw.dt,
        t_end: raw.t_end,
        dealias: raw
            .dealias
            .unwrap_or(DealiasSetting::Enabled(raw.t_end > 1.0)),
        lambda_abort: raw.lambda_abort,
        initial: raw.initial,
        snapshot_every: raw.snapshot_every,
        output_dir: raw.output_dir,
        field_grid: raw.field_grid,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            return Err(config_err(
                "grid_n",
                format!("must be an even integer >= 8, got {}", self.grid_n),
            ));
        }
        self.stepper().validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => config_err(name, reason),
            other => other,
        })?;
        if let Some(g) = &self.field_grid {
            if g.nx == 0 || g.ny == 0 {
                return Err(config_err("field_grid", "nx and ny must be positive"));
            }
            if !(g.xmin <= g.xmax && g.ymin <= g.ymax) {
                return Err(config_err("field_grid", "empty rectangle"));
            }
        }
        match &self.initial {
            InitialCondition::Circle { radius, .. }
            | InitialCondition::PerturbedCircle { radius, .. }
            | InitialCondition::ReparamCircle { radius, .. }
                if !(*radius > 0.0) =>
            {
                Err(config_err("initial.radius", "must be positive"))
            }
            InitialCondition::ReparamCircle { beta, .. } if !(beta.abs() < 1.0) => {
                Err(config_err("initial.beta", "must satisfy |beta| < 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            scheme: self.scheme,
            dt: self.dt,
            t_end: self.t_end,
            dealias: self.dealias.resolve(),
            lambda_abort: self.lambda_abort,
            snapshot_every: self.snapshot_every,
        }
    }

    /// Canonical JSON with all defaults spelled out.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Builds the initial curve and checks that it is positively oriented and
    /// well stretched. `base` resolves relative snapshot paths.
    pub fn build_initial(&self, base: &Path) -> Result<CurveState> {
        let n = self.grid_n;
        let curve = match &self.initial {
            InitialCondition::Circle {
                radius,
                theta,
                center,
            } => curve::make_circle(n, *radius, *theta, Vec2::new(center[0], center[1]))?,
            InitialCondition::PerturbedCircle { radius, modes } => {
                curve::make_perturbed_circle(n, *radius, modes)?
            }
            InitialCondition::ReparamCircle { radius, beta } => {
                curve::make_reparam_circle(n, *radius, *beta)?
            }
            InitialCondition::File { path } => {
                let c = files::read_snapshot(&base.join(path)).map_err(|e| match e {
                    Error::Io(io) => config_err("initial.path", io.to_string()),
                    other => other,
                })?;
                if c.len() != n {
                    return Err(config_err(
                        "grid_n",
                        format!("snapshot has {} points but grid_n is {n}", c.len()),
                    ));
                }
                c
            }
        };
        if let Err(Error::Orientation { area }) = curve::enclosed_area(&curve) {
            return Err(config_err(
                "initial",
                format!("curve is not positively oriented (signed area {area:e})"),
            ));
        }
        let lambda = curve::well_stretched_constant(&curve);
        if !(lambda > 0.0) {
            return Err(config_err("initial", "curve is not well stretched"));
        }
        Ok(curve)
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
