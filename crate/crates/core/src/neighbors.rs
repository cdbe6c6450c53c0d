//! Lagrangian neighbour tables.
//!
//! Neighbourhoods are computed once on the reference configuration and never
//! regrown; the only thing that changes during a run is the per-bond state,
//! which fracture flips from `Active` to `Severed`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{chebyshev, euclidean, Vec2};
use crate::lattice::{Category, LatticeKind, LatticeSpec, Particle, Site, REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborMetric {
    /// Nodes within a Chebyshev radius.
    ChebyshevRadius(f64),
    /// The lattice's nearest nodes (Moore ring for square, six nearest for hexagonal).
    Coordination,
    /// Nodes within a Euclidean radius.
    EuclideanRadius(f64),
}

impl NeighborMetric {
    fn within(self, spec: &LatticeSpec, p: Vec2, q: Vec2) -> bool {
        let (dist, radius) = match self {
            NeighborMetric::ChebyshevRadius(r) => (chebyshev(p, q), r),
            NeighborMetric::EuclideanRadius(r) => (euclidean(p, q), r),
            NeighborMetric::Coordination => match spec.kind {
                LatticeKind::Hexagonal => (euclidean(p, q), spec.spacing),
                _ => (chebyshev(p, q), spec.spacing),
            },
        };
        dist <= radius * (1.0 + REL_TOL)
    }

    fn validate(self) -> Result<()> {
        match self {
            NeighborMetric::ChebyshevRadius(r) | NeighborMetric::EuclideanRadius(r)
                if !(r.is_finite() && r > 0.0) =>
            {
                Err(Error::InvalidMetric(format!("radius must be positive, got {r}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondState {
    Active,
    Severed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub neighbor: usize,
    /// 1 for the first shell, 2 for the second.
    pub shell: u8,
    pub state: BondState,
}

/// Per-particle bond lists. Only body particles own bonds; frame lists are empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborTable {
    bonds: Vec<Vec<Bond>>,
    gradient_order: usize,
}

impl NeighborTable {
    pub fn len(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty()
    }

    pub fn gradient_order(&self) -> usize {
        self.gradient_order
    }

    /// All bonds of `owner`, both shells, in ascending neighbour id.
    pub fn bonds(&self, owner: usize) -> &[Bond] {
        &self.bonds[owner]
    }

    pub fn first_shell(&self, owner: usize) -> Vec<usize> {
        self.shell(owner, 1)
    }

    pub fn second_shell(&self, owner: usize) -> Vec<usize> {
        self.shell(owner, 2)
    }

    fn shell(&self, owner: usize, shell: u8) -> Vec<usize> {
        self.bonds[owner]
            .iter()
            .filter(|b| b.shell == shell)
            .map(|b| b.neighbor)
            .collect()
    }

    pub fn bond(&self, owner: usize, neighbor: usize) -> Option<&Bond> {
        let list = &self.bonds[owner];
        list.binary_search_by_key(&neighbor, |b| b.neighbor)
            .ok()
            .map(|i| &list[i])
    }

    /// Mark `owner -> neighbor` as severed. Returns `true` if it was active.
    pub fn sever(&mut self, owner: usize, neighbor: usize) -> bool {
        let list = &mut self.bonds[owner];
        match list.binary_search_by_key(&neighbor, |b| b.neighbor) {
            Ok(i) if list[i].state == BondState::Active => {
                list[i].state = BondState::Severed;
                true
            }
            _ => false,
        }
    }

    pub fn severed_count(&self) -> usize {
        self.bonds
            .iter()
            .flatten()
            .filter(|b| b.state == BondState::Severed)
            .count()
    }

    /// Iterate every `(owner, bond)` pair.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Bond)> {
        self.bonds
            .iter()
            .enumerate()
            .flat_map(|(owner, list)| list.iter().map(move |b| (owner, b)))
    }
}

/// Expected first- and second-shell sizes for a node far from any boundary.
pub fn interior_shell_sizes(spec: &LatticeSpec, metric: NeighborMetric) -> (usize, usize) {
    let reach = match metric {
        NeighborMetric::ChebyshevRadius(r) | NeighborMetric::EuclideanRadius(r) => {
            (r / spec.spacing).ceil() as i64
        }
        NeighborMetric::Coordination => 1,
    };
    let half = 2 * reach + 2;
    let mut patch = Vec::new();
    for row in -2 * half..=2 * half {
        for col in -2 * half..=2 * half {
            patch.push(spec.position(Site::new(col, row)));
        }
    }
    let origin = spec.position(Site::new(0, 0));
    let near = |p: Vec2| -> Vec<Vec2> {
        patch
            .iter()
            .copied()
            .filter(|&q| q != p && metric.within(spec, p, q))
            .collect()
    };
    let first = near(origin);
    let mut second: Vec<Vec2> = Vec::new();
    for &k in &first {
        for q in near(k) {
            if q != origin && !first.contains(&q) && !second.contains(&q) {
                second.push(q);
            }
        }
    }
    (first.len(), second.len())
}

/// Build the neighbour table on the reference configuration.
///
/// `particles` must contain the body and its frame; the frame must have as
/// many shells as `gradient_order`. Every body particle is required to see a
/// full interior neighbourhood.
pub fn compute_neighbors(
    particles: &[Particle],
    spec: &LatticeSpec,
    metric: NeighborMetric,
    gradient_order: usize,
) -> Result<NeighborTable> {
    if !(1..=2).contains(&gradient_order) {
        return Err(Error::InvalidGradientOrder(gradient_order));
    }
    metric.validate()?;
    let n = particles.len();

    // Bucket by cell so the radius search stays local.
    let reach = match metric {
        NeighborMetric::ChebyshevRadius(r) | NeighborMetric::EuclideanRadius(r) => r,
        NeighborMetric::Coordination => spec.spacing,
    } * (1.0 + REL_TOL);
    let cell = reach.max(spec.spacing);
    let key = |p: Vec2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> = Default::default();
    for p in particles {
        buckets.entry(key(p.ref_position)).or_default().push(p.id);
    }
    let raw: Vec<Vec<usize>> = particles
        .iter()
        .map(|p| {
            let (cx, cy) = key(p.ref_position);
            let mut out = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = buckets.get(&(cx + dx, cy + dy)) {
                        out.extend(ids.iter().copied().filter(|&q| {
                            q != p.id
                                && metric.within(spec, p.ref_position, particles[q].ref_position)
                        }));
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect();

    let (expect_first, expect_second) = interior_shell_sizes(spec, metric);
    let mut bonds = vec![Vec::new(); n];
    for p in particles.iter().filter(|p| p.category.is_body()) {
        let j = p.id;
        let first = &raw[j];
        if first.len() < expect_first {
            return Err(Error::InadequateFrame {
                id: j,
                shell: 1,
                found: first.len(),
                expected: expect_first,
            });
        }
        let mut list: Vec<Bond> = first
            .iter()
            .map(|&k| Bond {
                neighbor: k,
                shell: 1,
                state: BondState::Active,
            })
            .collect();
        if gradient_order == 2 {
            let mut second: Vec<usize> = first
                .iter()
                .flat_map(|&k| raw[k].iter().copied())
                .filter(|&q| q != j && first.binary_search(&q).is_err())
                .collect();
            second.sort_unstable();
            second.dedup();
            if second.len() < expect_second {
                return Err(Error::InadequateFrame {
                    id: j,
                    shell: 2,
                    found: second.len(),
                    expected: expect_second,
                });
            }
            list.extend(second.into_iter().map(|k| Bond {
                neighbor: k,
                shell: 2,
                state: BondState::Active,
            }));
            list.sort_unstable_by_key(|b| b.neighbor);
        }
        bonds[j] = list;
    }
    Ok(NeighborTable {
        bonds,
        gradient_order,
    })
}

/// Breadth-first layer distance from `sources` over first-shell bonds between
/// body particles (bond state is ignored). `None` for unreachable or frame ids.
pub fn layer_distances(
    table: &NeighborTable,
    categories: &[Category],
    sources: &[usize],
) -> Vec<Option<usize>> {
    let mut dist = vec![None; table.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(j) = queue.pop_front() {
        let d = dist[j].unwrap_or(0);
        for b in table.bonds(j).iter().filter(|b| b.shell == 1) {
            let k = b.neighbor;
            if categories[k].is_body() && dist[k].is_none() {
                dist[k] = Some(d + 1);
                queue.push_back(k);
            }
        }
    }
    dist
}
