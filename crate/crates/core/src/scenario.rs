//! Scenario files.
//!
//! A scenario is a flat `key = value` text file, one key per line, `#`
//! starting a comment. Every row of the classic test-description table has a
//! key; `leader` may repeat. See the README for the full key list.
//!
//! ```text
//! name = case_a
//! lattice = square
//! extent = 10x10
//! motion_steps = 10
//! total_steps = 400
//! leader = column_left velocity=0,0 steps=0..400 after=hold
//! leader = column_right velocity=0.35,0 steps=0..10 after=follower
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::fracture::FractureConfig;
use crate::geometry::Vec2;
use crate::lattice::{Extent, LatticeKind, LatticeSpec, Particle, REL_TOL};
use crate::neighbors::NeighborMetric;
use crate::rules::{AfterSchedule, FrameRule, LeaderSchedule, RuleConfig, RuleKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("`{key}`: {message}")]
    Constraint { key: String, message: String },
}

/// How a leader group is picked out of the body.
#[derive(Debug, Clone, PartialEq)]
pub enum LeaderSelector {
    /// Leftmost node of every row.
    ColumnLeft,
    /// Rightmost node of every row.
    ColumnRight,
    RowBottom,
    RowTop,
    Ids(Vec<usize>),
    /// Body node nearest to each coordinate.
    Nearest(Vec<Vec2>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderSpec {
    pub selector: LeaderSelector,
    pub velocity: Vec2,
    pub steps: Range<usize>,
    pub after: AfterSchedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub lattice: LatticeSpec,
    pub metric: NeighborMetric,
    /// Follower rule; carries the gradient order.
    pub rule: RuleConfig,
    pub frame_rule: FrameRule,
    pub leaders: Vec<LeaderSpec>,
    pub fracture: Option<FractureConfig>,
    /// Default end of a leader's motion when its line gives no `steps`.
    pub motion_steps: usize,
    pub total_steps: usize,
    pub snapshot_stride: usize,
    /// Particle worth following over time, if any.
    pub track: Option<usize>,
}

const KEYS: &[&str] = &[
    "name",
    "description",
    "lattice",
    "extent",
    "polygon",
    "spacing",
    "motion_steps",
    "total_steps",
    "neighbours",
    "gradient",
    "rule",
    "weight_distance",
    "poisson_k",
    "poisson_axis",
    "poisson_da_scale",
    "frame_rule",
    "fracture",
    "fracture_threshold",
    "fracture_threshold_2",
    "fictitious_lambda",
    "leader",
    "snapshot_stride",
    "track",
];

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    map: HashMap<&'static str, Entry>,
    leaders: Vec<Entry>,
}

impl Fields {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.map.get(key)
    }

    fn parsed<T>(
        &self,
        key: &str,
        f: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> std::result::Result<Option<T>, ScenarioError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(e) => f(&e.value).map(Some).map_err(|message| ScenarioError::InvalidValue {
                line: e.line,
                key: key.to_string(),
                message,
            }),
        }
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn count(s: &str) -> std::result::Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn point(s: &str) -> std::result::Result<Vec2, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("`{s}` is not an `x,y` pair"))?;
    Ok(Vec2::new(number(x)?, number(y)?))
}

fn range(s: &str) -> std::result::Result<Range<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("`{s}` is not a `start..end` range"))?;
    let r = count(a)?..count(b)?;
    if r.start > r.end {
        return Err(format!("empty range `{s}`"));
    }
    Ok(r)
}

fn parse_selector(s: &str) -> std::result::Result<LeaderSelector, String> {
    Ok(match s {
        "column_left" => LeaderSelector::ColumnLeft,
        "column_right" => LeaderSelector::ColumnRight,
        "row_bottom" => LeaderSelector::RowBottom,
        "row_top" => LeaderSelector::RowTop,
        _ => {
            if let Some(ids) = s.strip_prefix("ids:") {
                LeaderSelector::Ids(ids.split(',').map(count).collect::<std::result::Result<_, _>>()?)
            } else if let Some(pts) = s.strip_prefix("at:") {
                LeaderSelector::Nearest(pts.split(';').map(point).collect::<std::result::Result<_, _>>()?)
            } else {
                return Err(format!(
                    "unknown leader selector `{s}` (column_left, column_right, row_bottom, \
                     row_top, ids:<i,j,..>, at:<x,y;..>)"
                ));
            }
        }
    })
}

fn parse_leader(s: &str, default_steps: &Range<usize>) -> std::result::Result<LeaderSpec, String> {
    let mut parts = s.split_whitespace();
    let selector = parse_selector(parts.next().ok_or("empty leader line")?)?;
    let mut velocity = None;
    let mut steps = default_steps.clone();
    let mut after = AfterSchedule::Hold;
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected `option=value`, got `{part}`"))?;
        match k {
            "velocity" => velocity = Some(point(v)?),
            "steps" => steps = range(v)?,
            "after" => {
                after = match v {
                    "follower" => AfterSchedule::BecomeFollower,
                    "hold" => AfterSchedule::Hold,
                    _ => return Err(format!("`after` must be follower or hold, got `{v}`")),
                }
            }
            _ => return Err(format!("unknown leader option `{k}`")),
        }
    }
    Ok(LeaderSpec {
        selector,
        velocity: velocity.ok_or("leader needs velocity=<vx>,<vy>")?,
        steps,
        after,
    })
}

fn parse_metric(s: &str) -> std::result::Result<NeighborMetric, String> {
    let mut it = s.split_whitespace();
    let metric = match (it.next(), it.next()) {
        (Some("coordination"), None) => NeighborMetric::Coordination,
        (Some("chebyshev"), Some(r)) => NeighborMetric::ChebyshevRadius(number(r)?),
        (Some("euclidean"), Some(r)) => NeighborMetric::EuclideanRadius(number(r)?),
        _ => {
            return Err(format!(
                "`{s}` is not one of coordination, chebyshev <radius>, euclidean <radius>"
            ))
        }
    };
    if it.next().is_some() {
        return Err(format!("trailing text in `{s}`"));
    }
    Ok(metric)
}

fn parse_extent(s: &str) -> std::result::Result<(usize, usize), String> {
    let (c, r) = s
        .split_once('x')
        .ok_or_else(|| format!("`{s}` is not `<cols>x<rows>`"))?;
    Ok((count(c)?, count(r)?))
}

fn split_fields(text: &str) -> std::result::Result<Fields, ScenarioError> {
    let mut map = HashMap::new();
    let mut leaders = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or(ScenarioError::Syntax { line })?;
        let key = key.trim();
        let value = value.trim().to_string();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ScenarioError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if known == "leader" {
            leaders.push(Entry { line, value });
        } else if map.insert(known, Entry { line, value }).is_some() {
            return Err(ScenarioError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }
    Ok(Fields { map, leaders })
}

fn constraint(key: &str, line: Option<usize>, message: impl Into<String>) -> ScenarioError {
    let message = message.into();
    ScenarioError::Constraint {
        key: key.to_string(),
        message: match line {
            Some(l) => format!("line {l}: {message}"),
            None => message,
        },
    }
}

/// Parse and validate scenario text.
pub fn parse_scenario(text: &str) -> std::result::Result<Scenario, ScenarioError> {
    let f = split_fields(text)?;

    let mut missing = Vec::new();
    for key in ["name", "lattice", "total_steps"] {
        if f.get(key).is_none() {
            missing.push(key.to_string());
        }
    }
    if f.get("extent").is_none() && f.get("polygon").is_none() {
        missing.push("extent (or polygon)".to_string());
    }
    if !missing.is_empty() {
        return Err(ScenarioError::Missing(missing));
    }

    let name = f.get("name").map(|e| e.value.clone()).unwrap_or_default();
    let description = f.get("description").map(|e| e.value.clone());
    let kind = f
        .parsed("lattice", |s| match s {
            "square" => Ok(LatticeKind::Square),
            "hexagonal" => Ok(LatticeKind::Hexagonal),
            "oblique" | "rectangular" | "centered_rectangular" => {
                Err(format!("`{s}` lattices are not supported"))
            }
            _ => Err(format!("unknown lattice `{s}` (square, hexagonal)")),
        })?
        .unwrap_or(LatticeKind::Square);
    let spacing = f.parsed("spacing", number)?.unwrap_or(1.0);
    if spacing <= 0.0 {
        return Err(constraint("spacing", f.get("spacing").map(|e| e.line), "must be positive"));
    }
    let extent = match (f.get("extent"), f.get("polygon")) {
        (Some(_), Some(e)) => {
            return Err(constraint(
                "polygon",
                Some(e.line),
                "give either `extent` or `polygon`, not both",
            ))
        }
        (Some(_), None) => {
            let (cols, rows) = f.parsed("extent", parse_extent)?.unwrap_or_default();
            if cols < 2 || rows < 2 {
                return Err(constraint(
                    "extent",
                    f.get("extent").map(|e| e.line),
                    "need at least 2 nodes per axis",
                ));
            }
            Extent::Counts { cols, rows }
        }
        _ => {
            let pts = f
                .parsed("polygon", |s| s.split(';').map(point).collect::<std::result::Result<Vec<_>, _>>())?
                .unwrap_or_default();
            if pts.len() < 3 {
                return Err(constraint(
                    "polygon",
                    f.get("polygon").map(|e| e.line),
                    "a polygon needs at least 3 vertices",
                ));
            }
            Extent::Polygon(pts)
        }
    };
    let lattice = LatticeSpec {
        kind,
        spacing,
        extent,
    };

    let total_steps = f.parsed("total_steps", count)?.unwrap_or(0);
    let motion_steps = f.parsed("motion_steps", count)?.unwrap_or(total_steps);
    let snapshot_stride = f.parsed("snapshot_stride", count)?.unwrap_or(1);
    if snapshot_stride == 0 {
        return Err(constraint(
            "snapshot_stride",
            f.get("snapshot_stride").map(|e| e.line),
            "must be at least 1",
        ));
    }
    let gradient_order = f.parsed("gradient", count)?.unwrap_or(1);
    if !(1..=2).contains(&gradient_order) {
        return Err(constraint(
            "gradient",
            f.get("gradient").map(|e| e.line),
            "gradient order must be 1 or 2",
        ));
    }
    let metric = f.parsed("neighbours", parse_metric)?.unwrap_or(NeighborMetric::Coordination);

    let rule_kind = f
        .parsed("rule", |s| match s {
            "centroid" => Ok(RuleKind::Centroid),
            "weighted" => Ok(RuleKind::DistanceWeighted),
            "mixed" => Ok(RuleKind::MixedPoisson),
            _ => Err(format!("unknown rule `{s}` (centroid, weighted, mixed)")),
        })?
        .unwrap_or(RuleKind::Centroid);
    let weighted = f
        .parsed("weight_distance", |s| match s {
            "yes" => Ok(true),
            "no" => Ok(false),
            _ => Err(format!("`{s}` is not yes/no")),
        })?
        .unwrap_or(false);
    let rule_kind = match (weighted, rule_kind) {
        (false, k) => k,
        (true, RuleKind::Centroid | RuleKind::DistanceWeighted) => RuleKind::DistanceWeighted,
        (true, RuleKind::MixedPoisson) => {
            return Err(constraint(
                "weight_distance",
                f.get("weight_distance").map(|e| e.line),
                "distance weighting cannot be combined with rule = mixed",
            ))
        }
    };
    let poisson_k = f.parsed("poisson_k", number)?;
    let rule = match rule_kind {
        RuleKind::MixedPoisson => {
            let k = poisson_k.ok_or_else(|| {
                constraint("poisson_k", f.get("rule").map(|e| e.line), "required when rule = mixed")
            })?;
            let (axis_default, scale_default) = default_axis(&lattice);
            let axis = f.parsed("poisson_axis", number)?.unwrap_or(axis_default);
            let scale = f.parsed("poisson_da_scale", number)?.unwrap_or(scale_default);
            if scale <= 0.0 {
                return Err(constraint(
                    "poisson_da_scale",
                    f.get("poisson_da_scale").map(|e| e.line),
                    "must be positive",
                ));
            }
            RuleConfig::mixed(gradient_order, k, axis, scale)
        }
        other => {
            for key in ["poisson_k", "poisson_axis", "poisson_da_scale"] {
                if let Some(e) = f.get(key) {
                    return Err(constraint(key, Some(e.line), "only valid with rule = mixed"));
                }
            }
            RuleConfig {
                rule: other,
                ..RuleConfig::centroid(gradient_order)
            }
        }
    };

    let frame_rule = f
        .parsed("frame_rule", |s| match s {
            "average" => Ok(FrameRule::AverageOfAssigned),
            "first" => Ok(FrameRule::FirstAssigned),
            _ => Err(format!("unknown frame rule `{s}` (average, first)")),
        })?
        .unwrap_or_default();

    let fracture_on = f
        .parsed("fracture", |s| match s {
            "on" | "yes" => Ok(true),
            "off" | "no" => Ok(false),
            _ => Err(format!("`{s}` is not on/off")),
        })?
        .unwrap_or(false);
    let fracture = if fracture_on {
        let line = f.get("fracture").map(|e| e.line);
        let t1 = f.parsed("fracture_threshold", number)?.ok_or_else(|| {
            constraint(
                "fracture_threshold",
                line,
                "Limit distance for fracture is required when fracture = on",
            )
        })?;
        let t2 = f.parsed("fracture_threshold_2", number)?;
        if gradient_order == 2 && t2.is_none() {
            return Err(constraint(
                "fracture_threshold_2",
                line,
                "second-shell Limit distance for fracture is required with gradient = 2",
            ));
        }
        let lambda = f.parsed("fictitious_lambda", number)?.unwrap_or(1.0);
        let cfg = FractureConfig::new(t1, t2, lambda);
        cfg.validate(gradient_order)
            .map_err(|e| constraint("fracture_threshold", line, e.to_string()))?;
        Some(cfg)
    } else {
        for key in ["fracture_threshold", "fracture_threshold_2", "fictitious_lambda"] {
            if let Some(e) = f.get(key) {
                return Err(constraint(key, Some(e.line), "only valid with fracture = on"));
            }
        }
        None
    };

    let default_steps = 0..motion_steps;
    let leaders = f
        .leaders
        .iter()
        .map(|e| {
            parse_leader(&e.value, &default_steps).map_err(|message| ScenarioError::InvalidValue {
                line: e.line,
                key: "leader".into(),
                message,
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let track = f.parsed("track", count)?;

    Ok(Scenario {
        name,
        description,
        lattice,
        metric,
        rule,
        frame_rule,
        leaders,
        fracture,
        motion_steps,
        total_steps,
        snapshot_stride,
        track,
    })
}

/// Mid-height of the body and half its height.
fn default_axis(spec: &LatticeSpec) -> (f64, f64) {
    let (lo, hi) = match &spec.extent {
        Extent::Counts { rows, .. } => {
            let top = spec.position(crate::lattice::Site::new(0, *rows as i64 - 1)).y;
            (0.0, top)
        }
        Extent::Polygon(pts) => pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        }),
    };
    let half = ((hi - lo) * 0.5).max(spec.spacing);
    ((lo + hi) * 0.5, half)
}

impl Scenario {
    pub fn gradient_order(&self) -> usize {
        self.rule.gradient_order
    }

    /// Turn leader selectors into concrete schedules on `body`.
    pub fn resolve_leaders(&self, body: &[Particle]) -> Result<Vec<LeaderSchedule>> {
        self.leaders
            .iter()
            .map(|l| {
                Ok(LeaderSchedule {
                    leader_ids: l.selector.resolve(body, self.lattice.spacing)?,
                    velocity: l.velocity,
                    active_steps: l.steps.clone(),
                    after: l.after,
                })
            })
            .collect()
    }

    /// Canonical text form; `parse_scenario(&s.to_text()) == Ok(s)`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("name", self.name.clone());
        if let Some(d) = &self.description {
            kv("description", d.clone());
        }
        kv("lattice", self.lattice.kind.name().to_string());
        match &self.lattice.extent {
            Extent::Counts { cols, rows } => kv("extent", format!("{cols}x{rows}")),
            Extent::Polygon(pts) => kv(
                "polygon",
                pts.iter()
                    .map(|p| format!("{},{}", p.x, p.y))
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
        }
        kv("spacing", self.lattice.spacing.to_string());
        kv("motion_steps", self.motion_steps.to_string());
        kv("total_steps", self.total_steps.to_string());
        kv(
            "neighbours",
            match self.metric {
                NeighborMetric::Coordination => "coordination".to_string(),
                NeighborMetric::ChebyshevRadius(r) => format!("chebyshev {r}"),
                NeighborMetric::EuclideanRadius(r) => format!("euclidean {r}"),
            },
        );
        kv("gradient", self.rule.gradient_order.to_string());
        kv("rule", self.rule.rule.name().to_string());
        if self.rule.rule == RuleKind::MixedPoisson {
            kv("poisson_k", self.rule.poisson_k.to_string());
            kv("poisson_axis", self.rule.axis_y.to_string());
            kv("poisson_da_scale", self.rule.da_scale.to_string());
        }
        kv("frame_rule", self.frame_rule.name().to_string());
        match &self.fracture {
            None => kv("fracture", "off".into()),
            Some(c) => {
                kv("fracture", "on".into());
                kv("fracture_threshold", c.threshold_shell1.to_string());
                if let Some(t2) = c.threshold_shell2 {
                    kv("fracture_threshold_2", t2.to_string());
                }
                kv("fictitious_lambda", c.lambda.to_string());
            }
        }
        for l in &self.leaders {
            let sel = match &l.selector {
                LeaderSelector::ColumnLeft => "column_left".to_string(),
                LeaderSelector::ColumnRight => "column_right".to_string(),
                LeaderSelector::RowBottom => "row_bottom".to_string(),
                LeaderSelector::RowTop => "row_top".to_string(),
                LeaderSelector::Ids(ids) => format!(
                    "ids:{}",
                    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
                ),
                LeaderSelector::Nearest(pts) => format!(
                    "at:{}",
                    pts.iter()
                        .map(|p| format!("{},{}", p.x, p.y))
                        .collect::<Vec<_>>()
                        .join(";")
                ),
            };
            let after = match l.after {
                AfterSchedule::BecomeFollower => "follower",
                AfterSchedule::Hold => "hold",
            };
            kv(
                "leader",
                format!(
                    "{sel} velocity={},{} steps={}..{} after={after}",
                    l.velocity.x, l.velocity.y, l.steps.start, l.steps.end
                ),
            );
        }
        kv("snapshot_stride", self.snapshot_stride.to_string());
        if let Some(t) = self.track {
            kv("track", t.to_string());
        }
        out
    }
}

impl LeaderSelector {
    pub fn resolve(&self, body: &[Particle], spacing: f64) -> Result<Vec<usize>> {
        let tol = spacing * REL_TOL;
        let mut ids: Vec<usize> = match self {
            LeaderSelector::ColumnLeft | LeaderSelector::ColumnRight => {
                let mut by_row: HashMap<i64, usize> = HashMap::new();
                for p in body {
                    let slot = by_row.entry(p.site.row).or_insert(p.id);
                    let cur = &body[*slot];
                    let better = match self {
                        LeaderSelector::ColumnLeft => p.ref_position.x < cur.ref_position.x - tol,
                        _ => p.ref_position.x > cur.ref_position.x + tol,
                    };
                    if better {
                        *slot = p.id;
                    }
                }
                by_row.into_values().collect()
            }
            LeaderSelector::RowBottom | LeaderSelector::RowTop => {
                let rows = body.iter().map(|p| p.site.row);
                let target = match self {
                    LeaderSelector::RowBottom => rows.min(),
                    _ => rows.max(),
                };
                body.iter()
                    .filter(|p| Some(p.site.row) == target)
                    .map(|p| p.id)
                    .collect()
            }
            LeaderSelector::Ids(ids) => {
                for &id in ids {
                    if id >= body.len() {
                        return Err(Error::IdOutOfRange {
                            id,
                            len: body.len(),
                        });
                    }
                }
                ids.clone()
            }
            LeaderSelector::Nearest(pts) => pts
                .iter()
                .filter_map(|&q| {
                    body.iter()
                        .min_by(|a, b| {
                            a.ref_position
                                .distance(q)
                                .total_cmp(&b.ref_position.distance(q))
                        })
                        .map(|p| p.id)
                })
                .collect(),
        };
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }
}

/// Read and parse a scenario file.
pub fn load_scenario(path: impl AsRef<std::path::Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_scenario(&text)?)
}
