//! Local interaction rules.
//!
//! Followers are placed from their neighbours' positions, leaders move along
//! prescribed schedules and frame points copy the motion of the body nodes
//! assigned to them. All follower rules read an immutable snapshot and sum
//! neighbours in ascending id order, so results do not depend on evaluation order.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::fracture::effective_neighbors;
use crate::geometry::Vec2;
use crate::lattice::{Category, FrameAssignment};
use crate::neighbors::NeighborTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// Barycentre of the neighbours.
    Centroid,
    /// Neighbours weighted by their current distance, so stretched bonds pull harder.
    DistanceWeighted,
    /// Centroid in x, centroid plus a lateral coupling term in y.
    MixedPoisson,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Centroid => "centroid",
            RuleKind::DistanceWeighted => "weighted",
            RuleKind::MixedPoisson => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleConfig {
    pub rule: RuleKind,
    pub gradient_order: usize,
    /// Strength of the lateral coupling (mixed rule only).
    pub poisson_k: f64,
    /// Height of the specimen's central horizontal axis (mixed rule only).
    pub axis_y: f64,
    /// Normalisation length for the axis offset (mixed rule only).
    pub da_scale: f64,
}

impl RuleConfig {
    pub fn centroid(gradient_order: usize) -> Self {
        Self {
            rule: RuleKind::Centroid,
            gradient_order,
            poisson_k: 0.0,
            axis_y: 0.0,
            da_scale: 1.0,
        }
    }

    pub fn weighted(gradient_order: usize) -> Self {
        Self {
            rule: RuleKind::DistanceWeighted,
            ..Self::centroid(gradient_order)
        }
    }

    pub fn mixed(gradient_order: usize, poisson_k: f64, axis_y: f64, da_scale: f64) -> Self {
        Self {
            rule: RuleKind::MixedPoisson,
            gradient_order,
            poisson_k,
            axis_y,
            da_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.gradient_order) {
            return Err(Error::InvalidGradientOrder(self.gradient_order));
        }
        if self.rule == RuleKind::MixedPoisson {
            if !self.poisson_k.is_finite() || !self.axis_y.is_finite() {
                return Err(Error::InvalidRule("poisson K and axis must be finite".into()));
            }
            if !(self.da_scale.is_finite() && self.da_scale > 0.0) {
                return Err(Error::InvalidRule(format!(
                    "da scale must be positive, got {}",
                    self.da_scale
                )));
            }
        }
        Ok(())
    }

    /// Signed, normalised distance of a reference point from the central axis.
    pub fn da(&self, ref_position: Vec2) -> f64 {
        (self.axis_y - ref_position.y) / self.da_scale
    }
}

/// Read-only view of one step's configuration as seen by the follower rules.
#[derive(Debug, Clone, Copy)]
pub struct NeighborhoodView<'a> {
    pub positions: &'a [Vec2],
    pub ref_positions: &'a [Vec2],
    pub table: &'a NeighborTable,
    /// Placement factor of fictitious stand-ins.
    pub lambda: f64,
}

impl NeighborhoodView<'_> {
    pub fn effective(&self, j: usize) -> Vec<Vec2> {
        effective_neighbors(
            j,
            self.table,
            self.positions,
            self.ref_positions,
            self.lambda,
            self.table.gradient_order(),
        )
    }
}

/// Arithmetic mean of `points`, `None` when empty.
pub fn centroid(points: &[Vec2]) -> Option<Vec2> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for p in points {
        sx += p.x;
        sy += p.y;
    }
    Some(Vec2::new(sx / n, sy / n))
}

/// Distance-weighted mean of `points` as seen from `own`. `None` when empty
/// or when every point coincides with `own`.
pub fn distance_weighted(own: Vec2, points: &[Vec2]) -> Option<Vec2> {
    let mut wsum = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for &p in points {
        let w = p.distance(own);
        wsum += w;
        sx += w * p.x;
        sy += w * p.y;
    }
    if wsum > 0.0 {
        Some(Vec2::new(sx / wsum, sy / wsum))
    } else {
        None
    }
}

/// Centroid with the lateral coupling `K * (x_new - x_ref) * da` added to y.
pub fn mixed_poisson(points: &[Vec2], ref_position: Vec2, cfg: &RuleConfig) -> Option<Vec2> {
    let c = centroid(points)?;
    if cfg.poisson_k == 0.0 {
        return Some(c);
    }
    let dy = cfg.poisson_k * (c.x - ref_position.x) * cfg.da(ref_position);
    Some(Vec2::new(c.x, c.y + dy))
}

pub fn centroid_rule(j: usize, view: &NeighborhoodView) -> Option<Vec2> {
    centroid(&view.effective(j))
}

pub fn distance_weighted_rule(j: usize, view: &NeighborhoodView) -> Option<Vec2> {
    let pts = view.effective(j);
    distance_weighted(view.positions[j], &pts).or_else(|| {
        if !pts.is_empty() {
            log::warn!("particle {j}: all neighbours coincide, using the centroid");
        }
        centroid(&pts)
    })
}

pub fn mixed_poisson_rule(j: usize, view: &NeighborhoodView, cfg: &RuleConfig) -> Option<Vec2> {
    mixed_poisson(&view.effective(j), view.ref_positions[j], cfg)
}

/// New position of follower `j`; a follower with no effective neighbours holds.
pub fn follow(j: usize, view: &NeighborhoodView, cfg: &RuleConfig) -> Vec2 {
    let next = match cfg.rule {
        RuleKind::Centroid => centroid_rule(j, view),
        RuleKind::DistanceWeighted => distance_weighted_rule(j, view),
        RuleKind::MixedPoisson => mixed_poisson_rule(j, view, cfg),
    };
    next.unwrap_or(view.positions[j])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AfterSchedule {
    /// Turn into a follower once the schedule ends.
    BecomeFollower,
    /// Stay a leader, parked at the last scheduled position.
    Hold,
}

/// Constant-velocity motion of a set of leaders over `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderSchedule {
    pub leader_ids: Vec<usize>,
    /// Displacement per step.
    pub velocity: Vec2,
    pub active_steps: Range<usize>,
    pub after: AfterSchedule,
}

impl LeaderSchedule {
    pub fn is_active(&self, t: usize) -> bool {
        self.active_steps.contains(&t)
    }
}

/// Check that schedules over the same particle never overlap and that a
/// release is the last thing that happens to a leader.
pub fn validate_schedules(schedules: &[LeaderSchedule], len: usize) -> Result<()> {
    let mut spans: Vec<Vec<(Range<usize>, AfterSchedule)>> = vec![Vec::new(); len];
    for s in schedules {
        for &id in &s.leader_ids {
            if id >= len {
                return Err(Error::IdOutOfRange { id, len });
            }
            spans[id].push((s.active_steps.clone(), s.after));
        }
    }
    for (id, list) in spans.iter_mut().enumerate() {
        list.sort_by_key(|(r, _)| (r.start, r.end));
        for w in list.windows(2) {
            let (a, after_a) = &w[0];
            let (b, _) = &w[1];
            if b.start < a.end || *after_a == AfterSchedule::BecomeFollower {
                return Err(Error::OverlappingSchedules(id));
            }
        }
    }
    Ok(())
}

/// A change of category that happened at `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoryChange {
    pub step: usize,
    pub id: usize,
    pub from: Category,
    pub to: Category,
}

/// Move leaders for the advance from step `t` to `t + 1`.
///
/// Leaders whose releasing schedule ended at `t` become followers first and
/// do not move. Returns the category changes that fired.
pub fn apply_leader_motion(
    schedules: &[LeaderSchedule],
    t: usize,
    positions: &mut [Vec2],
    categories: &mut [Category],
) -> Result<Vec<CategoryChange>> {
    let mut changes = Vec::new();
    for s in schedules {
        if s.after == AfterSchedule::BecomeFollower && s.active_steps.end == t {
            for &id in &s.leader_ids {
                if categories[id] == Category::Leader {
                    categories[id] = Category::Follower;
                    changes.push(CategoryChange {
                        step: t,
                        id,
                        from: Category::Leader,
                        to: Category::Follower,
                    });
                }
            }
        }
    }
    for s in schedules.iter().filter(|s| s.is_active(t)) {
        for &id in &s.leader_ids {
            if categories[id] != Category::Leader {
                return Err(Error::NotALeader(id));
            }
            positions[id] += s.velocity;
        }
    }
    Ok(changes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FrameRule {
    /// Mean displacement of all assigned body nodes.
    #[default]
    AverageOfAssigned,
    /// Displacement of the lowest-id assigned node.
    FirstAssigned,
}

impl FrameRule {
    pub fn name(self) -> &'static str {
        match self {
            FrameRule::AverageOfAssigned => "average",
            FrameRule::FirstAssigned => "first",
        }
    }

    /// Displacement a frame point takes from its assignees.
    pub fn displacement(self, assigned_ids: &[usize], displacements: &[Vec2]) -> Vec2 {
        match self {
            FrameRule::FirstAssigned => assigned_ids
                .first()
                .map_or(Vec2::ZERO, |&id| displacements[id]),
            FrameRule::AverageOfAssigned => {
                if assigned_ids.is_empty() {
                    return Vec2::ZERO;
                }
                let mut sum = Vec2::ZERO;
                for &id in assigned_ids {
                    sum += displacements[id];
                }
                sum / assigned_ids.len() as f64
            }
        }
    }
}

/// Translate every frame point by the displacement its rule derives from this step's
/// body displacements.
pub fn apply_frame_rule(
    assignments: &[FrameAssignment],
    rule: FrameRule,
    displacements: &[Vec2],
    positions: &mut [Vec2],
) {
    for a in assignments {
        positions[a.frame_id] += rule.displacement(&a.assigned_ids, displacements);
    }
}
