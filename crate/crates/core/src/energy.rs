//! Pseudo-energy diagnostics.
//!
//! `PE1` sums, over a particle's original neighbours, the squared change of
//! bond length from the reference configuration. `PE2` is the length of a
//! particle's displacement between two consecutive steps. Neither is a real
//! energy; they are strain and activity indicators used for contour plots.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::lattice::Category;
use crate::neighbors::NeighborTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyKind {
    Pe1,
    Pe2,
}

impl EnergyKind {
    pub fn name(self) -> &'static str {
        match self {
            EnergyKind::Pe1 => "pe1",
            EnergyKind::Pe2 => "pe2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pe1" => Some(EnergyKind::Pe1),
            "pe2" => Some(EnergyKind::Pe2),
            _ => None,
        }
    }
}

/// Per-particle values of one diagnostic at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyField {
    pub step: usize,
    pub kind: EnergyKind,
    /// `(id, value)` for leaders and followers, ascending id.
    pub values: Vec<(usize, f64)>,
}

impl EnergyField {
    pub fn get(&self, id: usize) -> Option<f64> {
        self.values
            .binary_search_by_key(&id, |(i, _)| *i)
            .ok()
            .map(|i| self.values[i].1)
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.values.iter().fold(None, |acc, &(_, v)| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// Id holding the largest value (lowest id on ties).
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &(id, v) in &self.values {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((id, v));
            }
        }
        best.map(|(id, _)| id)
    }
}

/// Squared bond-length change summed over every original neighbour of `j`,
/// severed bonds included; fictitious stand-ins never enter.
pub fn pe1(j: usize, positions: &[Vec2], ref_positions: &[Vec2], table: &NeighborTable) -> f64 {
    let order = table.gradient_order() as u8;
    table
        .bonds(j)
        .iter()
        .filter(|b| b.shell <= order)
        .map(|b| {
            let k = b.neighbor;
            let now = positions[k].distance(positions[j]);
            let then = ref_positions[k].distance(ref_positions[j]);
            (now - then) * (now - then)
        })
        .sum()
}

/// Displacement of `j` between step `t - 1` and step `t`.
pub fn pe2(t: usize, j: usize, positions: &[Vec2], previous: &[Vec2]) -> Result<f64> {
    if t == 0 {
        return Err(Error::NoPredecessor);
    }
    Ok(positions[j].distance(previous[j]))
}

/// Evaluate a diagnostic over every leader and follower.
///
/// `previous` is the configuration at `step - 1` and is only needed for PE2.
pub fn energy_field(
    kind: EnergyKind,
    step: usize,
    positions: &[Vec2],
    previous: Option<&[Vec2]>,
    ref_positions: &[Vec2],
    table: &NeighborTable,
    categories: &[Category],
) -> Result<EnergyField> {
    let ids = categories
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_body())
        .map(|(id, _)| id);
    let values = match kind {
        EnergyKind::Pe1 => ids
            .map(|j| (j, pe1(j, positions, ref_positions, table)))
            .collect(),
        EnergyKind::Pe2 => {
            let prev = previous.ok_or(if step == 0 {
                Error::NoPredecessor
            } else {
                Error::MissingStep(step - 1)
            })?;
            ids.map(|j| pe2(step, j, positions, prev).map(|v| (j, v)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(EnergyField { step, kind, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_frame, generate_lattice, LatticeSpec, Particle};
    use crate::neighbors::{compute_neighbors, NeighborMetric};

    fn setup() -> (Vec<Particle>, NeighborTable) {
        let spec = LatticeSpec::square(5, 5, 1.0);
        let mut ps = generate_lattice(&spec).unwrap();
        let frame = build_frame(&ps, &spec, 1).unwrap();
        ps.extend(frame.particles);
        let table = compute_neighbors(&ps, &spec, NeighborMetric::Coordination, 1).unwrap();
        (ps, table)
    }

    #[test]
    fn undeformed_pe1_is_zero() {
        let (ps, table) = setup();
        let r: Vec<Vec2> = ps.iter().map(|p| p.ref_position).collect();
        let cats: Vec<Category> = ps.iter().map(|p| p.category).collect();
        let f = energy_field(EnergyKind::Pe1, 0, &r, None, &r, &table, &cats).unwrap();
        assert_eq!(f.values.len(), 25);
        assert!(f.values.iter().all(|&(_, v)| v == 0.0));
        assert_eq!(f.min_max(), Some((0.0, 0.0)));
    }

    #[test]
    fn single_stretched_neighbour() {
        let (ps, table) = setup();
        let r: Vec<Vec2> = ps.iter().map(|p| p.ref_position).collect();
        let mut pos = r.clone();
        // corner 0 = (0,0); move its neighbour 1 = (1,0) out to (1.5,0)
        pos[1] = Vec2::new(1.5, 0.0);
        // bond 0-1 goes 1 -> 1.5; the other bonds of 0 are untouched
        assert!((pe1(0, &pos, &r, &table) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pe2_examples() {
        let prev = vec![Vec2::ZERO, Vec2::new(1.0, 1.0)];
        let now = vec![Vec2::new(3.0, 4.0), Vec2::new(1.0, 1.0)];
        assert_eq!(pe2(1, 0, &now, &prev).unwrap(), 5.0);
        assert_eq!(pe2(1, 1, &now, &prev).unwrap(), 0.0);
        assert!(matches!(pe2(0, 0, &now, &prev), Err(Error::NoPredecessor)));
    }

    #[test]
    fn pe2_field_needs_a_predecessor() {
        let (ps, table) = setup();
        let r: Vec<Vec2> = ps.iter().map(|p| p.ref_position).collect();
        let cats: Vec<Category> = ps.iter().map(|p| p.category).collect();
        assert!(energy_field(EnergyKind::Pe2, 0, &r, None, &r, &table, &cats).is_err());
        let f = energy_field(EnergyKind::Pe2, 1, &r, Some(&r), &r, &table, &cats).unwrap();
        assert!(f.values.iter().all(|&(_, v)| v == 0.0));
        assert_eq!(f.argmax(), Some(0));
    }
}
