//! Bravais-lattice discretization of a planar body and the frame that surrounds it.
//!
//! Lattice nodes are addressed by integer [`Site`] coordinates. Rows of the
//! hexagonal (triangular) lattice alternate a half-spacing offset so that a
//! rectangular block of sites stays rectangular on screen.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Vec2};

/// Relative tolerance applied to spacing-scaled comparisons.
pub const REL_TOL: f64 = 1e-9;

/// The plane Bravais lattices. Only `Square` and `Hexagonal` can be generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Square,
    Hexagonal,
    Oblique,
    Rectangular,
    CenteredRectangular,
}

impl LatticeKind {
    /// First-shell size of an interior node (Moore neighbourhood for the square lattice).
    pub fn coordination(self) -> usize {
        match self {
            LatticeKind::Hexagonal => 6,
            _ => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Hexagonal => "hexagonal",
            LatticeKind::Oblique => "oblique",
            LatticeKind::Rectangular => "rectangular",
            LatticeKind::CenteredRectangular => "centered_rectangular",
        }
    }

    fn ensure_supported(self) -> Result<()> {
        match self {
            LatticeKind::Square | LatticeKind::Hexagonal => Ok(()),
            other => Err(Error::UnsupportedLattice(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extent {
    /// A `cols x rows` block of nodes starting at the origin.
    Counts { cols: usize, rows: usize },
    /// Every node inside (or on the boundary of) a simple polygon.
    Polygon(Vec<Vec2>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub spacing: f64,
    pub extent: Extent,
}

impl LatticeSpec {
    pub fn square(cols: usize, rows: usize, spacing: f64) -> Self {
        Self {
            kind: LatticeKind::Square,
            spacing,
            extent: Extent::Counts { cols, rows },
        }
    }

    pub fn hexagonal(cols: usize, rows: usize, spacing: f64) -> Self {
        Self {
            kind: LatticeKind::Hexagonal,
            spacing,
            extent: Extent::Counts { cols, rows },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::InvalidSpacing(self.spacing));
        }
        self.kind.ensure_supported()?;
        if let Extent::Counts { cols, rows } = self.extent {
            if cols < 2 || rows < 2 {
                return Err(Error::ExtentTooSmall { cols, rows });
            }
        }
        Ok(())
    }

    /// Reference position of a lattice site.
    pub fn position(&self, site: Site) -> Vec2 {
        let s = self.spacing;
        match self.kind {
            LatticeKind::Hexagonal => Vec2::new(
                site.col as f64 * s + site.row.rem_euclid(2) as f64 * 0.5 * s,
                site.row as f64 * s * 3f64.sqrt() * 0.5,
            ),
            _ => Vec2::new(site.col as f64 * s, site.row as f64 * s),
        }
    }

    fn row_height(&self) -> f64 {
        match self.kind {
            LatticeKind::Hexagonal => self.spacing * 3f64.sqrt() * 0.5,
            _ => self.spacing,
        }
    }

    /// Sites one lattice step away: the Moore ring on the square lattice,
    /// the six nearest nodes on the hexagonal one.
    pub fn adjacent_sites(&self, site: Site) -> Vec<Site> {
        let Site { col, row } = site;
        match self.kind {
            LatticeKind::Hexagonal => {
                // odd rows sit half a spacing to the right
                let shift = if row.rem_euclid(2) == 0 { -1 } else { 0 };
                vec![
                    Site::new(col - 1, row),
                    Site::new(col + 1, row),
                    Site::new(col + shift, row - 1),
                    Site::new(col + shift + 1, row - 1),
                    Site::new(col + shift, row + 1),
                    Site::new(col + shift + 1, row + 1),
                ]
            }
            _ => {
                let mut out = Vec::with_capacity(8);
                for dr in -1..=1 {
                    for dc in -1..=1 {
                        if dr != 0 || dc != 0 {
                            out.push(Site::new(col + dc, row + dr));
                        }
                    }
                }
                out
            }
        }
    }
}

/// Integer lattice coordinates of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub col: i64,
    pub row: i64,
}

impl Site {
    pub const fn new(col: i64, row: i64) -> Self {
        Self { col, row }
    }

    fn scan_key(self) -> (i64, i64) {
        (self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Leader,
    Follower,
    Frame,
    Fictitious,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Leader => "leader",
            Category::Follower => "follower",
            Category::Frame => "frame",
            Category::Fictitious => "fictitious",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "leader" => Some(Category::Leader),
            "follower" => Some(Category::Follower),
            "frame" => Some(Category::Frame),
            "fictitious" => Some(Category::Fictitious),
            _ => None,
        }
    }

    /// Leaders and followers make up the body; frame and fictitious points do not.
    pub fn is_body(self) -> bool {
        matches!(self, Category::Leader | Category::Follower)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub ref_position: Vec2,
    pub category: Category,
    pub site: Site,
}

/// Frame point together with the body particles whose motion it copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAssignment {
    pub frame_id: usize,
    /// Ascending ids; never empty.
    pub assigned_ids: Vec<usize>,
}

/// Generate the body nodes described by `spec`, all as followers, numbered
/// row-major from the bottom-left.
pub fn generate_lattice(spec: &LatticeSpec) -> Result<Vec<Particle>> {
    spec.validate()?;
    match &spec.extent {
        Extent::Counts { cols, rows } => {
            let mut out = Vec::with_capacity(cols * rows);
            for row in 0..*rows as i64 {
                for col in 0..*cols as i64 {
                    let site = Site::new(col, row);
                    out.push(Particle {
                        id: out.len(),
                        ref_position: spec.position(site),
                        category: Category::Follower,
                        site,
                    });
                }
            }
            Ok(out)
        }
        Extent::Polygon(polygon) => discretize_body(polygon, spec),
    }
}

/// Lattice nodes inside or on the boundary of `polygon`.
pub fn discretize_body(polygon: &[Vec2], spec: &LatticeSpec) -> Result<Vec<Particle>> {
    if !(spec.spacing.is_finite() && spec.spacing > 0.0) {
        return Err(Error::InvalidSpacing(spec.spacing));
    }
    spec.kind.ensure_supported()?;
    if polygon.len() < 3 {
        return Err(Error::EmptyBody);
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in polygon {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let tol = spec.spacing * REL_TOL;
    let dy = spec.row_height();
    let row_lo = (ymin / dy).floor() as i64 - 1;
    let row_hi = (ymax / dy).ceil() as i64 + 1;
    let col_lo = (xmin / spec.spacing).floor() as i64 - 1;
    let col_hi = (xmax / spec.spacing).ceil() as i64 + 1;

    let mut out = Vec::new();
    for row in row_lo..=row_hi {
        for col in col_lo..=col_hi {
            let site = Site::new(col, row);
            let p = spec.position(site);
            if point_in_polygon(p, polygon, tol) {
                out.push(Particle {
                    id: out.len(),
                    ref_position: p,
                    category: Category::Follower,
                    site,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyBody);
    }
    Ok(out)
}

/// Frame particles built around a body.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub particles: Vec<Particle>,
    pub assignments: Vec<FrameAssignment>,
}

/// Surround `body` with `shells` rings of frame nodes.
///
/// Frame nodes are the lattice nodes outside the body within `shells`
/// lattice steps of it; their ids continue after the body ids. Each frame
/// node copies the body nodes nearest to it (ties kept, ascending id).
pub fn build_frame(body: &[Particle], spec: &LatticeSpec, shells: usize) -> Result<Frame> {
    if !(1..=2).contains(&shells) {
        return Err(Error::InvalidShells(shells));
    }
    let body_sites: HashSet<Site> = body.iter().map(|p| p.site).collect();

    let mut depth: HashMap<Site, usize> = body.iter().map(|p| (p.site, 0)).collect();
    let mut queue: VecDeque<Site> = body.iter().map(|p| p.site).collect();
    let mut frame_sites = Vec::new();
    while let Some(site) = queue.pop_front() {
        let d = depth[&site];
        if d == shells {
            continue;
        }
        for next in spec.adjacent_sites(site) {
            if !depth.contains_key(&next) {
                depth.insert(next, d + 1);
                queue.push_back(next);
                if !body_sites.contains(&next) {
                    frame_sites.push(next);
                }
            }
        }
    }
    frame_sites.sort_by_key(|s| s.scan_key());

    let tol = spec.spacing * REL_TOL;
    let mut particles = Vec::with_capacity(frame_sites.len());
    let mut assignments = Vec::with_capacity(frame_sites.len());
    for site in frame_sites {
        let id = body.len() + particles.len();
        let pos = spec.position(site);
        let nearest = body
            .iter()
            .map(|b| b.ref_position.distance(pos))
            .fold(f64::INFINITY, f64::min);
        let assigned_ids: Vec<usize> = body
            .iter()
            .filter(|b| b.ref_position.distance(pos) <= nearest + tol)
            .map(|b| b.id)
            .collect();
        particles.push(Particle {
            id,
            ref_position: pos,
            category: Category::Frame,
            site,
        });
        assignments.push(FrameAssignment {
            frame_id: id,
            assigned_ids,
        });
    }
    Ok(Frame {
        particles,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_corners_and_numbering() {
        let ps = generate_lattice(&LatticeSpec::square(10, 10, 1.0)).unwrap();
        assert_eq!(ps.len(), 100);
        assert_eq!(ps[0].ref_position, Vec2::new(0.0, 0.0));
        assert_eq!(ps[99].ref_position, Vec2::new(9.0, 9.0));
        // left to right, bottom to top
        assert_eq!(ps[67].ref_position, Vec2::new(7.0, 6.0));
        assert!(ps.iter().enumerate().all(|(i, p)| p.id == i));
    }

    #[test]
    fn minimal_square_grid() {
        let ps = generate_lattice(&LatticeSpec::square(2, 2, 1.0)).unwrap();
        let pts: Vec<_> = ps.iter().map(|p| (p.ref_position.x, p.ref_position.y)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
    }

    #[test]
    fn hexagonal_grid_matches_basis_construction() {
        // a1 = (1, 0), a2 = (1/2, sqrt(3)/2); row r, col c -> (c - r/2 floor) a1 + r a2
        let a1 = Vec2::new(1.0, 0.0);
        let a2 = Vec2::new(0.5, 3f64.sqrt() / 2.0);
        let ps = generate_lattice(&LatticeSpec::hexagonal(3, 3, 1.0)).unwrap();
        assert_eq!(ps.len(), 9);
        for r in 0..3i64 {
            for c in 0..3i64 {
                let expected = a1 * (c - r / 2) as f64 + a2 * r as f64;
                let got = ps[(r * 3 + c) as usize].ref_position;
                assert!((got - expected).norm() < 1e-12, "{got:?} vs {expected:?}");
            }
        }
        assert!((ps[3].ref_position.y - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(ps[3].ref_position.x, 0.5);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(matches!(
            generate_lattice(&LatticeSpec::square(10, 10, 0.0)),
            Err(Error::InvalidSpacing(_))
        ));
        assert!(matches!(
            generate_lattice(&LatticeSpec::square(10, 10, -1.0)),
            Err(Error::InvalidSpacing(_))
        ));
        assert!(matches!(
            generate_lattice(&LatticeSpec::square(1, 10, 1.0)),
            Err(Error::ExtentTooSmall { .. })
        ));
        let oblique = LatticeSpec {
            kind: LatticeKind::Oblique,
            ..LatticeSpec::square(3, 3, 1.0)
        };
        assert!(matches!(
            generate_lattice(&oblique),
            Err(Error::UnsupportedLattice(LatticeKind::Oblique))
        ));
    }

    #[test]
    fn polygon_bounding_square_equals_grid() {
        let spec = LatticeSpec::square(2, 2, 1.0);
        let poly = [
            Vec2::new(-0.5, -0.5),
            Vec2::new(9.5, -0.5),
            Vec2::new(9.5, 9.5),
            Vec2::new(-0.5, 9.5),
        ];
        let body = discretize_body(&poly, &spec).unwrap();
        let grid = generate_lattice(&LatticeSpec::square(10, 10, 1.0)).unwrap();
        assert_eq!(body, grid);
    }

    #[test]
    fn tiny_triangle_holds_one_node() {
        let spec = LatticeSpec::square(2, 2, 1.0);
        let tri = [Vec2::new(-0.3, -0.3), Vec2::new(0.4, -0.3), Vec2::new(-0.3, 0.4)];
        let body = discretize_body(&tri, &spec).unwrap();
        assert_eq!(body.len(), 1);
        assert_eq!(body[0].ref_position, Vec2::ZERO);
    }

    #[test]
    fn polygon_without_nodes_is_an_error() {
        let spec = LatticeSpec::square(2, 2, 1.0);
        let tri = [Vec2::new(0.2, 0.2), Vec2::new(0.6, 0.2), Vec2::new(0.2, 0.6)];
        assert!(matches!(discretize_body(&tri, &spec), Err(Error::EmptyBody)));
    }

    #[test]
    fn l_shape_matches_brute_force() {
        let spec = LatticeSpec::square(2, 2, 1.0);
        let l = [
            Vec2::new(-0.5, -0.5),
            Vec2::new(4.5, -0.5),
            Vec2::new(4.5, 1.5),
            Vec2::new(1.5, 1.5),
            Vec2::new(1.5, 4.5),
            Vec2::new(-0.5, 4.5),
        ];
        let body = discretize_body(&l, &spec).unwrap();
        // inside the L: rows 0-1 all columns, rows 2-4 columns 0-1
        let brute = (0..5)
            .flat_map(|r| (0..5).map(move |c| (c, r)))
            .filter(|&(c, r)| r <= 1 || c <= 1)
            .count();
        assert_eq!(body.len(), brute);
        assert_eq!(brute, 16);
    }

    fn ring_count(cols: i64, rows: i64, shells: i64) -> usize {
        // enumerate the enclosing box and drop the body block
        let mut n = 0;
        for r in -shells..rows + shells {
            for c in -shells..cols + shells {
                if !(0..cols).contains(&c) || !(0..rows).contains(&r) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn square_frame_counts() {
        let spec = LatticeSpec::square(10, 10, 1.0);
        let body = generate_lattice(&spec).unwrap();
        let f1 = build_frame(&body, &spec, 1).unwrap();
        assert_eq!(f1.particles.len(), ring_count(10, 10, 1));
        assert_eq!(f1.particles.len(), 44);
        let f2 = build_frame(&body, &spec, 2).unwrap();
        assert_eq!(f2.particles.len(), ring_count(10, 10, 2));
        assert!(f1.particles.iter().all(|p| p.category == Category::Frame));
        assert_eq!(f1.particles[0].id, 100);
    }

    #[test]
    fn frame_of_two_by_two() {
        let spec = LatticeSpec::square(2, 2, 1.0);
        let body = generate_lattice(&spec).unwrap();
        let frame = build_frame(&body, &spec, 1).unwrap();
        assert_eq!(frame.particles.len(), 12);
        let corner_of = |col, row| {
            let fp = frame
                .particles
                .iter()
                .find(|p| p.site == Site::new(col, row))
                .unwrap();
            frame.assignments[fp.id - 4].assigned_ids.clone()
        };
        assert_eq!(corner_of(-1, -1), vec![0]);
        assert_eq!(corner_of(2, -1), vec![1]);
        assert_eq!(corner_of(-1, 2), vec![2]);
        assert_eq!(corner_of(2, 2), vec![3]);
    }

    #[test]
    fn hexagonal_frame_matches_euclidean_enumeration() {
        for shells in 1..=2usize {
            let spec = LatticeSpec::hexagonal(6, 5, 1.0);
            let body = generate_lattice(&spec).unwrap();
            let frame = build_frame(&body, &spec, shells).unwrap();
            // on the triangular lattice, graph distance <= k  <=>  euclidean distance <= k for k <= 2
            let reach = shells as f64 + 1e-9;
            let mut brute = 0;
            for r in -4..10i64 {
                for c in -4..10i64 {
                    let site = Site::new(c, r);
                    if body.iter().any(|b| b.site == site) {
                        continue;
                    }
                    let p = spec.position(site);
                    if body.iter().any(|b| b.ref_position.distance(p) <= reach) {
                        brute += 1;
                    }
                }
            }
            assert_eq!(frame.particles.len(), brute, "shells = {shells}");
        }
    }

    #[test]
    fn hexagonal_top_frame_nodes_copy_two_followers() {
        let spec = LatticeSpec::hexagonal(6, 4, 1.0);
        let body = generate_lattice(&spec).unwrap();
        let frame = build_frame(&body, &spec, 1).unwrap();
        let multi = frame
            .assignments
            .iter()
            .filter(|a| a.assigned_ids.len() >= 2)
            .count();
        assert!(multi > 0);
        for a in &frame.assignments {
            assert!(!a.assigned_ids.is_empty());
            assert!(a.assigned_ids.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn invalid_shell_count() {
        let spec = LatticeSpec::square(3, 3, 1.0);
        let body = generate_lattice(&spec).unwrap();
        assert!(matches!(build_frame(&body, &spec, 3), Err(Error::InvalidShells(3))));
        assert!(matches!(build_frame(&body, &spec, 0), Err(Error::InvalidShells(0))));
    }
}
