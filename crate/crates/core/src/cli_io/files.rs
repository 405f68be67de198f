//! Plain-text file formats. Floats are written with 17 significant digits so
//! that every file round-trips exactly.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::curve::CurveState;
use crate::dynamics::DiagnosticsRow;
use crate::equilibrium::EquilibriumFit;
use crate::error::{Error, Result};
use crate::stokeslet::FlowSample;
use crate::Vec2;

pub const SNAPSHOT_MAGIC: &str = "# ibstring-curve v1";
pub const DIAGNOSTICS_HEADER: &str =
    "t,energy,dissipation,lambda,radius,area,dist_h1,dist_h52,theta_star,xstar_x,xstar_y";
pub const FIELD_HEADER: &str = "x,y,u,v,p";
pub const SPECTRUM_HEADER: &str = "k,eig_minus,eig_plus";

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:08}.csv")
}

pub fn write_snapshot(path: &Path, curve: &CurveState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(snapshot_text(curve).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn snapshot_text(curve: &CurveState) -> String {
    let x = curve.samples();
    let mut out = format!("{SNAPSHOT_MAGIC} N={}\n", x.len());
    for (j, p) in x.values().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", fmt_f64(x.node(j)), fmt_f64(p.x), fmt_f64(p.y));
    }
    out
}

pub fn read_snapshot(path: &Path) -> Result<CurveState> {
    let reader = BufReader::new(File::open(path)?);
    parse_snapshot(reader, path)
}

/// Parses snapshot text held in memory.
pub fn parse_snapshot_str(text: &str) -> Result<CurveState> {
    parse_snapshot(text.as_bytes(), Path::new("<memory>"))
}

fn parse_snapshot(reader: impl BufRead, path: &Path) -> Result<CurveState> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.ok_or_else(|| bad("empty file".into()))?;
    let n: usize = header
        .strip_prefix(SNAPSHOT_MAGIC)
        .and_then(|rest| rest.trim().strip_prefix("N="))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| bad(format!("expected `{SNAPSHOT_MAGIC} N=<N>`, got `{header}`")))?;
    let mut points = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(bad(format!("line {}: expected 3 fields", i + 2)));
        }
        let mut vals = [0.0; 3];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .parse()
                .map_err(|_| bad(format!("line {}: cannot parse `{f}`", i + 2)))?;
        }
        let expect = std::f64::consts::TAU * points.len() as f64 / n as f64;
        if (vals[0] - expect).abs() > 1e-9 {
            return Err(bad(format!(
                "line {}: parameter {} is not the uniform node {expect}",
                i + 2,
                vals[0]
            )));
        }
        points.push(Vec2::new(vals[1], vals[2]));
    }
    if points.len() != n {
        return Err(bad(format!("header announces {n} points, found {}", points.len())));
    }
    CurveState::from_points(points).map_err(|e| bad(e.to_string()))
}

/// Streams diagnostics rows to a CSV file.
pub struct DiagnosticsWriter {
    w: BufWriter<File>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{DIAGNOSTICS_HEADER}")?;
        Ok(Self { w })
    }

    pub fn write(&mut self, r: &DiagnosticsRow) -> Result<()> {
        writeln!(self.w, "{}", diagnostics_line(r))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

pub fn diagnostics_line(r: &DiagnosticsRow) -> String {
    [
        r.t,
        r.energy,
        r.dissipation,
        r.lambda,
        r.radius,
        r.area,
        r.dist_h1,
        r.dist_h52,
        r.theta_star,
        r.xstar.x,
        r.xstar.y,
    ]
    .iter()
    .map(|v| fmt_f64(*v))
    .collect::<Vec<_>>()
    .join(",")
}

/// Parses a diagnostics CSV written by [`DiagnosticsWriter`].
pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(DIAGNOSTICS_HEADER) {
        return Err(bad("missing diagnostics header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("line {}: bad number", i + 2)))?;
            if v.len() != 11 {
                return Err(bad(format!("line {}: expected 11 fields", i + 2)));
            }
            Ok(DiagnosticsRow {
                t: v[0],
                energy: v[1],
                dissipation: v[2],
                lambda: v[3],
                radius: v[4],
                area: v[5],
                dist_h1: v[6],
                dist_h52: v[7],
                theta_star: v[8],
                xstar: Vec2::new(v[9], v[10]),
            })
        })
        .collect()
}

pub fn field_text(samples: &[FlowSample]) -> String {
    let mut out = format!("{FIELD_HEADER}\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(s.location.x),
            fmt_f64(s.location.y),
            fmt_f64(s.u.x),
            fmt_f64(s.u.y),
            fmt_f64(s.p)
        );
    }
    out
}

pub fn spectrum_text(kmax: u32) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for k in 0..=kmax {
        let (lo, hi) = crate::equilibrium::mode_block(k as i64).eigenvalues;
        let _ = writeln!(out, "{k},{},{}", fmt_f64(lo), fmt_f64(hi));
    }
    out
}

/// 800×800 equal-aspect plot: the curve as a polyline and, if given, the
/// fitted circle dashed.
pub fn svg_text(curve: &CurveState, fit: Option<&EquilibriumFit>) -> String {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 40.0;
    let pts = curve.samples().values();
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    let mut include = |p: Vec2| {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    };
    pts.iter().for_each(|p| include(*p));
    if let Some(f) = fit {
        include(f.x_star - Vec2::repeat(f.radius));
        include(f.x_star + Vec2::repeat(f.radius));
    }
    let span = (hi - lo).max().max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let mid = (lo + hi) * 0.5;
    let map = |p: &Vec2| {
        (
            SIZE / 2.0 + (p.x - mid.x) * scale,
            SIZE / 2.0 - (p.y - mid.y) * scale,
        )
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">"
    );
    let _ = writeln!(out, "<rect width=\"800\" height=\"800\" fill=\"white\"/>");
    if let Some(f) = fit {
        let (cx, cy) = map(&f.x_star);
        let _ = writeln!(
            out,
            "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"gray\" stroke-width=\"1.5\" stroke-dasharray=\"8 6\"/>",
            f.radius * scale
        );
    }
    let mut poly = String::new();
    for p in pts.iter().chain(pts.first()) {
        let (x, y) = map(p);
        let _ = write!(poly, "{x:.3},{y:.3} ");
    }
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
        poly.trim_end()
    );
    out.push_str("</svg>\n");
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}
