//! Subcommand implementations. Each returns data; printing and exit codes
//! are left to the binary.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::curve::{self, CurveState};
use crate::dynamics::{self, DiagnosticsRow};
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::spectral;
use crate::stokeslet::{FlowSample, OffCurve};
use crate::Vec2;

use super::config::RunConfig;
use super::files;
use super::verify::{self, Level, VerifyReport};

#[derive(Clone, Debug)]
pub struct SimulateSummary {
    pub output_dir: PathBuf,
    pub steps: usize,
    pub last_row: Option<DiagnosticsRow>,
}

/// Runs a simulation, writing `config.json`, `diagnostics.csv`, the
/// snapshots, and `final.svg` (the last state reached, even after an abort)
/// into the output directory.
pub fn cmd_simulate(cfg: &RunConfig, initial: &CurveState) -> Result<SimulateSummary> {
    let dir = files::ensure_dir(&cfg.output_dir)?;
    files::write_text(&dir.join("config.json"), &cfg.to_canonical_json())?;
    let mut diag = files::DiagnosticsWriter::create(&dir.join("diagnostics.csv"))?;
    let mut last_row = None;
    let mut last_state = initial.clone();
    let mut steps = 0usize;
    let result = dynamics::run_with(
        initial,
        &cfg.stepper(),
        |row| {
            last_row = Some(*row);
            steps += 1;
            diag.write(row)
        },
        |step, _t, state| {
            last_state = state.clone();
            files::write_snapshot(&dir.join(files::snapshot_name(step)), state)
        },
    );
    diag.finish()?;
    let shown = match &result {
        Ok(state) => state.clone(),
        Err(_) => last_state,
    };
    let fit = equilibrium::closest_equilibrium(&shown).ok();
    files::write_text(&dir.join("final.svg"), &files::svg_text(&shown, fit.as_ref()))?;
    result?;
    Ok(SimulateSummary {
        output_dir: dir,
        steps: steps.saturating_sub(1),
        last_row,
    })
}

/// Samples velocity and pressure of the snapshot's flow on the configured
/// lattice and writes `field.csv` to the output directory. Lattice points
/// that coincide with a curve sample get NaN entries.
pub fn cmd_field(cfg: &RunConfig, snapshot: &Path) -> Result<PathBuf> {
    let grid = cfg.field_grid.ok_or_else(|| Error::Config {
        path: "field_grid".into(),
        message: "required by the field command".into(),
    })?;
    let curve = files::read_snapshot(snapshot)?;
    let off = OffCurve::new(&curve);
    let samples: Vec<FlowSample> = grid
        .points()
        .into_par_iter()
        .map(|x| match off.sample(x) {
            Ok(s) => Ok(s),
            Err(Error::OnCurve { .. }) => Ok(FlowSample {
                location: x,
                u: Vec2::new(f64::NAN, f64::NAN),
                p: f64::NAN,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let dir = files::ensure_dir(&cfg.output_dir)?;
    let path = dir.join("field.csv");
    files::write_text(&path, &files::field_text(&samples))?;
    Ok(path)
}

/// `k,eig_minus,eig_plus` for `k = 0..=kmax`.
pub fn cmd_spectrum(kmax: u32) -> String {
    files::spectrum_text(kmax)
}

#[derive(Clone, Debug)]
pub struct FitReport {
    pub fit: equilibrium::EquilibriumFit,
    pub dist_h1: f64,
    pub dist_h52: f64,
    pub first_order_residual: f64,
    pub energy: f64,
    pub lambda: f64,
}

impl FitReport {
    pub fn render(&self) -> String {
        let f = files::fmt_f64;
        format!(
            "theta_star = {}\nx_star = ({}, {})\nradius = {}\ndegenerate = {}\n\
             dist_h1 = {}\ndist_h52 = {}\nfirst_order_residual = {}\nenergy = {}\nlambda = {}\n",
            f(self.fit.theta_star),
            f(self.fit.x_star.x),
            f(self.fit.x_star.y),
            f(self.fit.radius),
            self.fit.degenerate,
            f(self.dist_h1),
            f(self.dist_h52),
            f(self.first_order_residual),
            f(self.energy),
            f(self.lambda),
        )
    }
}

pub fn cmd_fit(snapshot: &Path) -> Result<FitReport> {
    let y = files::read_snapshot(snapshot)?;
    let fit = equilibrium::closest_equilibrium(&y)?;
    let diff = y.samples() - &fit.samples;
    Ok(FitReport {
        dist_h1: spectral::sobolev_seminorm(&diff, 1.0),
        dist_h52: spectral::sobolev_seminorm(&diff, 2.5),
        first_order_residual: equilibrium::first_order_residual(&y, &fit),
        energy: curve::elastic_energy(&y),
        lambda: curve::well_stretched_constant(&y),
        fit,
    })
}

pub fn cmd_verify(level: Level) -> VerifyReport {
    verify::run_suite(level)
}
