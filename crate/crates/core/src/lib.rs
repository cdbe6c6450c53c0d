//! Position-based dynamics for lattice-discretized deformable bodies.
//!
//! A body is sampled on a square or hexagonal lattice and wrapped in a frame
//! of boundary points. Leaders follow prescribed motion, followers move by a
//! local rule over their fixed (Lagrangian) neighbours, and bonds can break
//! past a length threshold. Pseudo-energies give strain and activity maps.
//!
//! ```
//! use pbd_lattice::{parse_scenario, run};
//!
//! let scenario = parse_scenario(
//!     "name = demo\nlattice = square\nextent = 4x4\ntotal_steps = 3\n\
//!      leader = column_right velocity=0.1,0 steps=0..2\n",
//! )
//! .unwrap();
//! let traj = run(&scenario).unwrap();
//! assert_eq!(traj.snapshots.len(), 4);
//! ```

pub mod cli;
pub mod energy;
pub mod engine;
pub mod error;
pub mod fracture;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod neighbors;
pub mod rules;
pub mod scenario;

pub use energy::{energy_field, pe1, pe2, EnergyField, EnergyKind};
pub use engine::{
    energy_series, fragments, propagation_front, run, step, Model, SeveranceEvent, Simulation,
    SimulationState, Snapshot, StepReport, Trajectory,
};
pub use error::{Error, Result};
pub use fracture::{FictitiousStandIn, FractureConfig};
pub use geometry::Vec2;
pub use lattice::{
    build_frame, generate_lattice, Category, Extent, Frame, FrameAssignment, LatticeKind,
    LatticeSpec, Particle, Site,
};
pub use neighbors::{compute_neighbors, layer_distances, Bond, BondState, NeighborMetric, NeighborTable};
pub use rules::{AfterSchedule, FrameRule, LeaderSchedule, RuleConfig, RuleKind};
pub use scenario::{load_scenario, parse_scenario, LeaderSelector, LeaderSpec, Scenario, ScenarioError};
