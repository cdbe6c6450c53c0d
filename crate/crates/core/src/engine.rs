//! Time stepping.
//!
//! Each advance from step `t` to `t + 1` runs three sub-stages on the
//! configuration: leaders move along their schedules, every follower is
//! recomputed from one immutable snapshot taken after the leaders moved
//! (a Jacobi update), then frame points copy the displacement of their
//! assignees. A fracture check closes the step when fracture is enabled.

use rayon::prelude::*;

use crate::energy::{energy_field, EnergyField, EnergyKind};
use crate::error::{Error, Result};
use crate::fracture::{check_and_sever, FictitiousStandIn, FractureConfig};
use crate::geometry::Vec2;
use crate::lattice::{build_frame, generate_lattice, Category, FrameAssignment, LatticeSpec, Particle};
use crate::neighbors::{compute_neighbors, NeighborMetric, NeighborTable};
use crate::rules::{
    apply_frame_rule, apply_leader_motion, follow, validate_schedules, CategoryChange, FrameRule,
    LeaderSchedule, NeighborhoodView, RuleConfig,
};
use crate::scenario::Scenario;

/// Onset tolerance used to decide when a particle first moves.
pub const MOTION_TOL: f64 = 1e-12;

/// Everything about a run that does not change from step to step.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: LatticeSpec,
    /// Body particles (ids `0..body_count`) followed by the frame.
    pub particles: Vec<Particle>,
    pub body_count: usize,
    pub assignments: Vec<FrameAssignment>,
    pub rule: RuleConfig,
    pub frame_rule: FrameRule,
    pub schedules: Vec<LeaderSchedule>,
    pub fracture: Option<FractureConfig>,
    table: NeighborTable,
    ref_positions: Vec<Vec2>,
}

impl Model {
    /// Discretize the body, frame it with as many shells as the gradient order
    /// and build the neighbour table. `leaders` maps the body to its schedules.
    pub fn new(
        spec: LatticeSpec,
        metric: NeighborMetric,
        rule: RuleConfig,
        frame_rule: FrameRule,
        fracture: Option<FractureConfig>,
        leaders: impl FnOnce(&[Particle]) -> Result<Vec<LeaderSchedule>>,
    ) -> Result<Self> {
        rule.validate()?;
        if let Some(f) = &fracture {
            f.validate(rule.gradient_order)?;
        }
        let mut particles = generate_lattice(&spec)?;
        let body_count = particles.len();
        let schedules = leaders(&particles)?;
        validate_schedules(&schedules, body_count)?;
        for s in &schedules {
            for &id in &s.leader_ids {
                particles[id].category = Category::Leader;
            }
        }
        let frame = build_frame(&particles, &spec, rule.gradient_order)?;
        particles.extend(frame.particles);
        let table = compute_neighbors(&particles, &spec, metric, rule.gradient_order)?;
        let ref_positions = particles.iter().map(|p| p.ref_position).collect();
        Ok(Self {
            spec,
            particles,
            body_count,
            assignments: frame.assignments,
            rule,
            frame_rule,
            schedules,
            fracture,
            table,
            ref_positions,
        })
    }

    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        Self::new(
            scenario.lattice.clone(),
            scenario.metric,
            scenario.rule,
            scenario.frame_rule,
            scenario.fracture,
            |body| scenario.resolve_leaders(body),
        )
    }

    pub fn ref_positions(&self) -> &[Vec2] {
        &self.ref_positions
    }

    /// Neighbour table of the reference configuration (all bonds active).
    pub fn reference_table(&self) -> &NeighborTable {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.fracture.map_or(1.0, |f| f.lambda)
    }

    /// Ids named by any leader schedule.
    pub fn leader_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .schedules
            .iter()
            .flat_map(|s| s.leader_ids.iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn initial_state(&self) -> SimulationState {
        SimulationState {
            step: 0,
            positions: self.ref_positions.clone(),
            categories: self.particles.iter().map(|p| p.category).collect(),
            table: self.table.clone(),
        }
    }
}

/// The configuration at one step together with the mutable bond states.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub step: usize,
    pub positions: Vec<Vec2>,
    pub categories: Vec<Category>,
    pub table: NeighborTable,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub severed: Vec<FictitiousStandIn>,
    pub category_changes: Vec<CategoryChange>,
}

/// Advance `state` by one step in place.
///
/// With `parallel` set, followers are evaluated on the rayon pool; the result
/// is bit-identical to the serial evaluation.
pub fn step(model: &Model, state: &mut SimulationState, parallel: bool) -> Result<StepReport> {
    let t = state.step;
    let start = state.positions.clone();

    let category_changes =
        apply_leader_motion(&model.schedules, t, &mut state.positions, &mut state.categories)?;

    let followers: Vec<usize> = (0..model.body_count)
        .filter(|&j| state.categories[j] == Category::Follower)
        .collect();
    let updated = {
        let view = NeighborhoodView {
            positions: &state.positions,
            ref_positions: &model.ref_positions,
            table: &state.table,
            lambda: model.lambda(),
        };
        let eval = |&j: &usize| follow(j, &view, &model.rule);
        if parallel {
            followers.par_iter().map(eval).collect::<Vec<_>>()
        } else {
            followers.iter().map(eval).collect::<Vec<_>>()
        }
    };
    for (&j, p) in followers.iter().zip(updated) {
        state.positions[j] = p;
    }

    let displacements: Vec<Vec2> = state
        .positions
        .iter()
        .zip(&start)
        .map(|(&now, &before)| now - before)
        .collect();
    apply_frame_rule(
        &model.assignments,
        model.frame_rule,
        &displacements,
        &mut state.positions,
    );

    let severed = match &model.fracture {
        Some(cfg) => check_and_sever(&state.positions, &mut state.table, cfg),
        None => Vec::new(),
    };
    state.step = t + 1;
    Ok(StepReport {
        severed,
        category_changes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub positions: Vec<Vec2>,
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeveranceEvent {
    /// First step at which the bond is severed.
    pub step: usize,
    pub owner: usize,
    pub neighbor: usize,
    pub shell: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub stride: usize,
    pub snapshots: Vec<Snapshot>,
    pub severances: Vec<SeveranceEvent>,
    pub category_changes: Vec<CategoryChange>,
    /// Bond states after the last step.
    pub final_table: NeighborTable,
}

impl Trajectory {
    pub fn snapshot(&self, step: usize) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.snapshots[i])
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds at least C_0")
    }

    /// Position of `id` at every recorded step.
    pub fn track(&self, id: usize) -> Vec<(usize, Vec2)> {
        self.snapshots
            .iter()
            .map(|s| (s.step, s.positions[id]))
            .collect()
    }
}

/// A model plus its evolving state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: Model,
    pub state: SimulationState,
    pub parallel: bool,
}

impl Simulation {
    pub fn new(model: Model) -> Self {
        let state = model.initial_state();
        Self {
            model,
            state,
            parallel: false,
        }
    }

    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        Ok(Self::new(Model::from_scenario(scenario)?))
    }

    pub fn step(&mut self) -> Result<StepReport> {
        step(&self.model, &mut self.state, self.parallel)
    }

    /// Run `steps` advances, recording every `stride`-th configuration.
    pub fn run(&mut self, steps: usize, stride: usize) -> Result<Trajectory> {
        self.run_with(steps, stride, |_, _| Ok(()))
    }

    /// Like [`Simulation::run`], calling `observe(state, previous_positions)`
    /// after every advance.
    pub fn run_with(
        &mut self,
        steps: usize,
        stride: usize,
        mut observe: impl FnMut(&SimulationState, &[Vec2]) -> Result<()>,
    ) -> Result<Trajectory> {
        let stride = stride.max(1);
        let snap = |s: &SimulationState| Snapshot {
            step: s.step,
            positions: s.positions.clone(),
            categories: s.categories.clone(),
        };
        let mut traj = Trajectory {
            stride,
            snapshots: vec![snap(&self.state)],
            severances: Vec::new(),
            category_changes: Vec::new(),
            final_table: self.state.table.clone(),
        };
        for _ in 0..steps {
            let previous = self.state.positions.clone();
            let report = self.step()?;
            observe(&self.state, &previous)?;
            let t = self.state.step;
            traj.severances
                .extend(report.severed.iter().map(|s| SeveranceEvent {
                    step: t,
                    owner: s.owner_id,
                    neighbor: s.severed_neighbor_id,
                    shell: s.shell,
                }));
            traj.category_changes.extend(report.category_changes);
            if t % stride == 0 {
                traj.snapshots.push(snap(&self.state));
            }
        }
        traj.final_table = self.state.table.clone();
        Ok(traj)
    }
}

/// Run a scenario from its reference configuration.
pub fn run(scenario: &Scenario) -> Result<Trajectory> {
    let mut sim = Simulation::from_scenario(scenario)?;
    sim.run(scenario.total_steps, scenario.snapshot_stride)
}

/// Run a scenario and evaluate `kind` at every recorded step. PE2 has no
/// value at step 0, so its series starts at the first recorded step after it.
pub fn energy_series(scenario: &Scenario, kind: EnergyKind) -> Result<(Trajectory, Vec<EnergyField>)> {
    let mut sim = Simulation::from_scenario(scenario)?;
    let stride = scenario.snapshot_stride.max(1);
    let refs = sim.model.ref_positions.clone();
    let table = sim.model.table.clone();
    let mut fields = Vec::new();
    if kind == EnergyKind::Pe1 {
        let s = &sim.state;
        fields.push(energy_field(kind, 0, &s.positions, None, &refs, &table, &s.categories)?);
    }
    let traj = sim.run_with(scenario.total_steps, stride, |s, prev| {
        if s.step % stride == 0 {
            fields.push(energy_field(
                kind,
                s.step,
                &s.positions,
                Some(prev),
                &refs,
                &table,
                &s.categories,
            )?);
        }
        Ok(())
    })?;
    Ok((traj, fields))
}

/// First recorded step at which each of `ids` has moved away from its
/// initial position by more than [`MOTION_TOL`]. `None` if it never moves.
pub fn propagation_front(trajectory: &Trajectory, ids: &[usize]) -> Vec<Option<usize>> {
    let first = &trajectory.snapshots[0];
    ids.iter()
        .map(|&id| {
            trajectory
                .snapshots
                .iter()
                .find(|s| s.positions[id].distance(first.positions[id]) > MOTION_TOL)
                .map(|s| s.step)
        })
        .collect()
}

/// Connected components of body particles over active first-shell bonds.
/// Returns a component label per body id.
pub fn fragments(model: &Model, table: &NeighborTable) -> Vec<usize> {
    let n = model.body_count;
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for seed in 0..n {
        if label[seed] != usize::MAX {
            continue;
        }
        let mut stack = vec![seed];
        label[seed] = next;
        while let Some(j) = stack.pop() {
            for b in table.bonds(j) {
                if b.shell == 1
                    && b.neighbor < n
                    && b.state == crate::neighbors::BondState::Active
                    && label[b.neighbor] == usize::MAX
                {
                    label[b.neighbor] = next;
                    stack.push(b.neighbor);
                }
            }
        }
        next += 1;
    }
    label
}

/// Look up a snapshot or fail with [`Error::MissingStep`].
pub fn require_snapshot(trajectory: &Trajectory, step: usize) -> Result<&Snapshot> {
    trajectory.snapshot(step).ok_or(Error::MissingStep(step))
}
