//! Threshold fracture with fictitious stand-ins.
//!
//! A bond longer than its shell's threshold is severed for good. Each endpoint
//! that owns the bond gets a fictitious stand-in in place of the lost
//! neighbour, sitting at the owner's current position plus `lambda` times the
//! reference offset, so neighbour counts stay symmetric and a detached
//! fragment is pulled back toward its reference shape.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::neighbors::{BondState, NeighborTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractureConfig {
    pub threshold_shell1: f64,
    /// Required when the gradient order is 2.
    pub threshold_shell2: Option<f64>,
    /// 1 restores the reference offsets (elastic-like); smaller values let fragments shrink.
    pub lambda: f64,
}

impl FractureConfig {
    pub fn new(threshold_shell1: f64, threshold_shell2: Option<f64>, lambda: f64) -> Self {
        Self {
            threshold_shell1,
            threshold_shell2,
            lambda,
        }
    }

    pub fn validate(&self, gradient_order: usize) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.threshold_shell1) {
            return Err(Error::InvalidFracture(format!(
                "first-shell threshold must be positive, got {}",
                self.threshold_shell1
            )));
        }
        match self.threshold_shell2 {
            Some(t) if !positive(t) => {
                return Err(Error::InvalidFracture(format!(
                    "second-shell threshold must be positive, got {t}"
                )))
            }
            None if gradient_order == 2 => {
                return Err(Error::InvalidFracture(
                    "second gradient needs a second-shell threshold".into(),
                ))
            }
            _ => {}
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidFracture(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn threshold(&self, shell: u8) -> f64 {
        match shell {
            1 => self.threshold_shell1,
            _ => self.threshold_shell2.unwrap_or(self.threshold_shell1),
        }
    }
}

/// Ghost point replacing `severed_neighbor` in `owner`'s neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FictitiousStandIn {
    pub owner_id: usize,
    pub severed_neighbor_id: usize,
    pub shell: u8,
}

/// Sever every active bond longer than its threshold. Returns one stand-in per
/// newly severed `(owner, neighbour)` entry, in ascending owner then neighbour id.
pub fn check_and_sever(
    positions: &[Vec2],
    table: &mut NeighborTable,
    cfg: &FractureConfig,
) -> Vec<FictitiousStandIn> {
    let over: Vec<FictitiousStandIn> = table
        .iter()
        .filter(|(owner, b)| {
            b.state == BondState::Active
                && positions[*owner].distance(positions[b.neighbor]) > cfg.threshold(b.shell)
        })
        .map(|(owner, b)| FictitiousStandIn {
            owner_id: owner,
            severed_neighbor_id: b.neighbor,
            shell: b.shell,
        })
        .collect();
    for s in &over {
        table.sever(s.owner_id, s.severed_neighbor_id);
    }
    over
}

/// Every stand-in currently implied by the table.
pub fn standins(table: &NeighborTable) -> Vec<FictitiousStandIn> {
    table
        .iter()
        .filter(|(_, b)| b.state == BondState::Severed)
        .map(|(owner, b)| FictitiousStandIn {
            owner_id: owner,
            severed_neighbor_id: b.neighbor,
            shell: b.shell,
        })
        .collect()
}

pub fn fictitious_position(
    standin: &FictitiousStandIn,
    owner_current: Vec2,
    ref_positions: &[Vec2],
    lambda: f64,
) -> Vec2 {
    let offset = ref_positions[standin.severed_neighbor_id] - ref_positions[standin.owner_id];
    owner_current + offset * lambda
}

/// Neighbour positions `j` actually responds to: active neighbours where they
/// are, severed ones replaced by their stand-ins. Ordered by neighbour id.
pub fn effective_neighbors(
    j: usize,
    table: &NeighborTable,
    positions: &[Vec2],
    ref_positions: &[Vec2],
    lambda: f64,
    gradient_order: usize,
) -> Vec<Vec2> {
    let own = positions[j];
    table
        .bonds(j)
        .iter()
        .filter(|b| (b.shell as usize) <= gradient_order)
        .map(|b| match b.state {
            BondState::Active => positions[b.neighbor],
            BondState::Severed => own + (ref_positions[b.neighbor] - ref_positions[j]) * lambda,
        })
        .collect()
}
