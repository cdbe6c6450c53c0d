use thiserror::Error;

use crate::scenario::ScenarioError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),

    #[error("lattice extent {cols}x{rows} is too small (need at least 2 nodes per axis)")]
    ExtentTooSmall { cols: usize, rows: usize },

    #[error("{0:?} lattices are not supported")]
    UnsupportedLattice(crate::lattice::LatticeKind),

    #[error("body polygon contains no lattice node")]
    EmptyBody,

    #[error("frame shell count must be 1 or 2, got {0}")]
    InvalidShells(usize),

    #[error("gradient order must be 1 or 2, got {0}")]
    InvalidGradientOrder(usize),

    #[error(
        "particle {id} has {found} neighbours in shell {shell}, expected {expected}; \
         the frame is too thin for this neighbourhood"
    )]
    InadequateFrame {
        id: usize,
        shell: u8,
        found: usize,
        expected: usize,
    },

    #[error("invalid neighbour metric: {0}")]
    InvalidMetric(String),

    #[error("leader schedule references particle {0}, which is not a leader")]
    NotALeader(usize),

    #[error("particle id {id} out of range (have {len} particles)")]
    IdOutOfRange { id: usize, len: usize },

    #[error("leader schedules overlap on particle {0}")]
    OverlappingSchedules(usize),

    #[error("invalid rule configuration: {0}")]
    InvalidRule(String),

    #[error("invalid fracture configuration: {0}")]
    InvalidFracture(String),

    #[error("PE2 is undefined at step 0")]
    NoPredecessor,

    #[error("step {0} is not available in the trajectory")]
    MissingStep(usize),

    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
