//! CSV output and SVG snapshots.
//!
//! Floats are written with 17 significant digits, so reading a file back
//! gives the exact same bits.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::energy::{EnergyField, EnergyKind};
use crate::engine::{SeveranceEvent, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::lattice::Category;

pub const TRAJECTORY_HEADER: &str = "step,id,category,x,y";
pub const ENERGY_HEADER: &str = "step,id,kind,value";
pub const SEVERANCE_HEADER: &str = "step,owner,neighbor,shell";
pub const TRACK_HEADER: &str = "step,x,y,pe1";

/// Float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.snapshots {
        for (id, (p, c)) in s.positions.iter().zip(&s.categories).enumerate() {
            writeln!(w, "{},{id},{},{},{}", s.step, c.name(), fmt_f64(p.x), fmt_f64(p.y))?;
        }
    }
    Ok(())
}

pub fn write_severances<W: Write>(events: &[SeveranceEvent], mut w: W) -> Result<()> {
    writeln!(w, "{SEVERANCE_HEADER}")?;
    for e in events {
        writeln!(w, "{},{},{},{}", e.step, e.owner, e.neighbor, e.shell)?;
    }
    Ok(())
}

pub fn write_energy<W: Write>(fields: &[EnergyField], mut w: W) -> Result<()> {
    writeln!(w, "{ENERGY_HEADER}")?;
    for f in fields {
        for &(id, v) in &f.values {
            writeln!(w, "{},{id},{},{}", f.step, f.kind.name(), fmt_f64(v))?;
        }
    }
    Ok(())
}

pub fn write_trajectory_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_trajectory(traj, &mut w)?;
    Ok(w.flush()?)
}

pub fn write_severance_csv(events: &[SeveranceEvent], path: impl AsRef<Path>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_severances(events, &mut w)?;
    Ok(w.flush()?)
}

pub fn write_energy_csv(fields: &[EnergyField], path: impl AsRef<Path>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_energy(fields, &mut w)?;
    Ok(w.flush()?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRow {
    pub step: usize,
    pub position: Vec2,
    pub pe1: f64,
}

pub fn write_track_csv(rows: &[TrackRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    writeln!(w, "{TRACK_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.step,
            fmt_f64(r.position.x),
            fmt_f64(r.position.y),
            fmt_f64(r.pe1)
        )?;
    }
    Ok(w.flush()?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub id: usize,
    pub category: Category,
    pub position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub step: usize,
    pub id: usize,
    pub kind: EnergyKind,
    pub value: f64,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        format!("line {line}: {msg}"),
    ))
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => return Err(bad(1, format!("expected header `{header}`, got {other:?}"))),
    }
    Ok(lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 2, l.split(',').map(str::trim).collect())))
}

fn field<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(line, format!("cannot parse `{s}`")))
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    rows(text, TRAJECTORY_HEADER)?
        .map(|(n, f)| {
            if f.len() != 5 {
                return Err(bad(n, "expected 5 fields"));
            }
            Ok(TrajectoryRow {
                step: field(n, f[0])?,
                id: field(n, f[1])?,
                category: Category::from_name(f[2])
                    .ok_or_else(|| bad(n, format!("unknown category `{}`", f[2])))?,
                position: Vec2::new(field(n, f[3])?, field(n, f[4])?),
            })
        })
        .collect()
}

pub fn parse_energy_csv(text: &str) -> Result<Vec<EnergyRow>> {
    rows(text, ENERGY_HEADER)?
        .map(|(n, f)| {
            if f.len() != 4 {
                return Err(bad(n, "expected 4 fields"));
            }
            Ok(EnergyRow {
                step: field(n, f[0])?,
                id: field(n, f[1])?,
                kind: EnergyKind::from_name(f[2])
                    .ok_or_else(|| bad(n, format!("unknown kind `{}`", f[2])))?,
                value: field(n, f[3])?,
            })
        })
        .collect()
}

pub fn parse_severance_csv(text: &str) -> Result<Vec<SeveranceEvent>> {
    rows(text, SEVERANCE_HEADER)?
        .map(|(n, f)| {
            if f.len() != 4 {
                return Err(bad(n, "expected 4 fields"));
            }
            Ok(SeveranceEvent {
                step: field(n, f[0])?,
                owner: field(n, f[1])?,
                neighbor: field(n, f[2])?,
                shell: field(n, f[3])?,
            })
        })
        .collect()
}

pub const LEADER_COLOR: &str = "#d62728";
pub const FOLLOWER_COLOR: &str = "#1f77b4";
pub const FRAME_COLOR: &str = "#f2c500";
pub const FICTITIOUS_COLOR: &str = "#888888";

pub fn category_color(c: Category) -> &'static str {
    match c {
        Category::Leader => LEADER_COLOR,
        Category::Follower => FOLLOWER_COLOR,
        Category::Frame => FRAME_COLOR,
        Category::Fictitious => FICTITIOUS_COLOR,
    }
}

/// Blue (low) to red (high) through white.
pub fn ramp_color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let (r, g, b) = if t < 0.5 {
        let u = t * 2.0;
        (u, u, 1.0)
    } else {
        let u = (t - 0.5) * 2.0;
        (1.0, 1.0 - u, 1.0 - u)
    };
    let c = |v: f64| (v * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

#[derive(Debug, Clone, Default)]
pub struct SvgOptions<'a> {
    /// Colour leaders and followers by this field instead of by category.
    pub energy: Option<&'a EnergyField>,
    /// Fictitious stand-in positions, drawn hollow when given.
    pub fictitious: Option<&'a [Vec2]>,
    pub title: Option<String>,
}

const PX_PER_UNIT: f64 = 40.0;
const MARGIN: f64 = 30.0;
const LEGEND_H: f64 = 40.0;

/// One circle per particle, y pointing up.
pub fn render_snapshot_svg(positions: &[Vec2], categories: &[Category], opts: &SvgOptions) -> String {
    let ghosts = opts.fictitious.unwrap_or(&[]);
    let all = positions.iter().chain(ghosts).filter(|p| p.is_finite());
    let (lo, hi) = all.fold(
        (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN)),
        |(lo, hi), p| {
            (
                Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
                Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        },
    );
    let (lo, hi) = if lo.x > hi.x { (Vec2::ZERO, Vec2::ZERO) } else { (lo, hi) };
    let width = (hi.x - lo.x) * PX_PER_UNIT + 2.0 * MARGIN;
    let plot_h = (hi.y - lo.y) * PX_PER_UNIT + 2.0 * MARGIN;
    let legend = opts.energy.is_some();
    let height = plot_h + if legend { LEGEND_H } else { 0.0 };
    let sx = |x: f64| MARGIN + (x - lo.x) * PX_PER_UNIT;
    let sy = |y: f64| MARGIN + (hi.y - y) * PX_PER_UNIT;
    let r = 0.15 * PX_PER_UNIT;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(t) = &opts.title {
        let _ = writeln!(out, r#"<title>{}</title>"#, escape(t));
    }
    for g in ghosts {
        let _ = writeln!(
            out,
            r#"<circle class="fictitious" cx="{:.3}" cy="{:.3}" r="{r:.2}" fill="none" stroke="{FICTITIOUS_COLOR}"/>"#,
            sx(g.x),
            sy(g.y)
        );
    }
    let range = opts.energy.and_then(|e| e.min_max());
    for (id, (p, &c)) in positions.iter().zip(categories).enumerate() {
        let fill = match (opts.energy, range) {
            (Some(e), Some((min, max))) if c.is_body() => {
                let v = e.get(id).unwrap_or(min);
                let t = if max > min { (v - min) / (max - min) } else { 0.0 };
                ramp_color(t)
            }
            _ => category_color(c).to_string(),
        };
        let _ = writeln!(
            out,
            r#"<circle class="{}" data-id="{id}" cx="{:.3}" cy="{:.3}" r="{r:.2}" fill="{fill}"/>"#,
            c.name(),
            sx(p.x),
            sy(p.y)
        );
    }
    if let Some(e) = opts.energy {
        let (min, max) = range.unwrap_or((0.0, 0.0));
        let y = plot_h + 5.0;
        let bar_w = (width - 2.0 * MARGIN).max(60.0);
        let _ = writeln!(
            out,
            r#"<defs><linearGradient id="ramp"><stop offset="0" stop-color="{}"/><stop offset="0.5" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
            ramp_color(0.0),
            ramp_color(0.5),
            ramp_color(1.0)
        );
        let _ = writeln!(
            out,
            r#"<rect class="legend" x="{MARGIN}" y="{y:.1}" width="{bar_w:.1}" height="10" fill="url(#ramp)"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text class="legend-min" x="{MARGIN}" y="{:.1}" font-size="11">{} min={}</text>"#,
            y + 25.0,
            e.kind.name(),
            fmt_f64(min)
        );
        let _ = writeln!(
            out,
            r#"<text class="legend-max" x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">max={}</text>"#,
            MARGIN + bar_w,
            y + 25.0,
            fmt_f64(max)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_snapshot_svg(
    positions: &[Vec2],
    categories: &[Category],
    opts: &SvgOptions,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_all(render_snapshot_svg(positions, categories, opts).as_bytes())?;
    Ok(w.flush()?)
}
