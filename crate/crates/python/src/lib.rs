//! Python bindings for `pbd_lattice`.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use pbd_lattice as core;
use pbd_lattice::{EnergyKind, Vec2};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn xy(ps: &[Vec2]) -> Vec<(f64, f64)> {
    ps.iter().map(|p| (p.x, p.y)).collect()
}

fn kind(name: &str) -> PyResult<EnergyKind> {
    EnergyKind::from_name(name).ok_or_else(|| err(format!("unknown energy kind `{name}` (pe1, pe2)")))
}

/// A parsed scenario file.
#[pyclass(module = "pbd_lattice", skip_from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: core::Scenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        core::parse_scenario(text).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        core::load_scenario(path).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn total_steps(&self) -> usize {
        self.inner.total_steps
    }

    #[getter]
    fn gradient_order(&self) -> usize {
        self.inner.gradient_order()
    }

    #[getter]
    fn track(&self) -> Option<usize> {
        self.inner.track
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?}, total_steps={})", self.inner.name, self.inner.total_steps)
    }
}

/// Recorded snapshots of a run.
#[pyclass(module = "pbd_lattice")]
struct Trajectory {
    inner: core::Trajectory,
}

impl Trajectory {
    fn snap(&self, step: usize) -> PyResult<&core::Snapshot> {
        self.inner
            .snapshot(step)
            .ok_or_else(|| PyIndexError::new_err(format!("step {step} was not recorded")))
    }
}

#[pymethods]
impl Trajectory {
    #[getter]
    fn steps(&self) -> Vec<usize> {
        self.inner.snapshots.iter().map(|s| s.step).collect()
    }

    fn positions(&self, step: usize) -> PyResult<Vec<(f64, f64)>> {
        Ok(xy(&self.snap(step)?.positions))
    }

    fn categories(&self, step: usize) -> PyResult<Vec<String>> {
        Ok(self.snap(step)?.categories.iter().map(|c| c.name().to_string()).collect())
    }

    /// `(step, x, y)` for one particle at every recorded step.
    fn track(&self, id: usize) -> PyResult<Vec<(usize, f64, f64)>> {
        let n = self.inner.snapshots[0].positions.len();
        if id >= n {
            return Err(PyIndexError::new_err(format!("particle {id} out of range ({n})")));
        }
        Ok(self.inner.track(id).into_iter().map(|(t, p)| (t, p.x, p.y)).collect())
    }

    /// `(step, owner, neighbor, shell)` for every severed bond.
    #[getter]
    fn severances(&self) -> Vec<(usize, usize, usize, u8)> {
        self.inner
            .severances
            .iter()
            .map(|e| (e.step, e.owner, e.neighbor, e.shell))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.snapshots.len()
    }
}

/// A model with its evolving state.
#[pyclass(module = "pbd_lattice")]
struct Simulation {
    inner: core::Simulation,
    previous: Option<Vec<Vec2>>,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (scenario, parallel = false))]
    fn new(scenario: &Scenario, parallel: bool) -> PyResult<Self> {
        let mut inner = core::Simulation::from_scenario(&scenario.inner).map_err(err)?;
        inner.parallel = parallel;
        Ok(Self {
            inner,
            previous: None,
        })
    }

    /// Advance one step; returns the bonds severed in it as `(owner, neighbor, shell)`.
    fn step(&mut self) -> PyResult<Vec<(usize, usize, u8)>> {
        self.previous = Some(self.inner.state.positions.clone());
        let report = self.inner.step().map_err(err)?;
        Ok(report
            .severed
            .iter()
            .map(|s| (s.owner_id, s.severed_neighbor_id, s.shell))
            .collect())
    }

    #[pyo3(signature = (steps, stride = 1))]
    fn run(&mut self, steps: usize, stride: usize) -> PyResult<Trajectory> {
        let inner = self.inner.run(steps, stride).map_err(err)?;
        self.previous = None;
        Ok(Trajectory { inner })
    }

    #[getter]
    fn current_step(&self) -> usize {
        self.inner.state.step
    }

    #[getter]
    fn body_count(&self) -> usize {
        self.inner.model.body_count
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        xy(&self.inner.state.positions)
    }

    #[getter]
    fn reference_positions(&self) -> Vec<(f64, f64)> {
        xy(self.inner.model.ref_positions())
    }

    #[getter]
    fn categories(&self) -> Vec<String> {
        self.inner.state.categories.iter().map(|c| c.name().to_string()).collect()
    }

    /// `(id, value)` of `pe1` or `pe2` at the current step. PE2 needs the
    /// previous configuration, so it is only available right after `step()`.
    fn energy(&self, kind_name: &str) -> PyResult<Vec<(usize, f64)>> {
        let st = &self.inner.state;
        let f = core::energy_field(
            kind(kind_name)?,
            st.step,
            &st.positions,
            self.previous.as_deref(),
            self.inner.model.ref_positions(),
            self.inner.model.reference_table(),
            &st.categories,
        )
        .map_err(err)?;
        Ok(f.values)
    }
}

/// Run a scenario from its reference configuration.
#[pyfunction]
fn run(scenario: &Scenario) -> PyResult<Trajectory> {
    core::run(&scenario.inner).map(|inner| Trajectory { inner }).map_err(err)
}

/// Reference positions of a `cols` x `rows` square or hexagonal lattice.
#[pyfunction]
#[pyo3(signature = (kind, cols, rows, spacing = 1.0))]
fn generate_lattice(kind: &str, cols: usize, rows: usize, spacing: f64) -> PyResult<Vec<(f64, f64)>> {
    let spec = match kind {
        "square" => core::LatticeSpec::square(cols, rows, spacing),
        "hexagonal" => core::LatticeSpec::hexagonal(cols, rows, spacing),
        _ => return Err(err(format!("unknown lattice `{kind}` (square, hexagonal)"))),
    };
    let ps = core::generate_lattice(&spec).map_err(err)?;
    Ok(ps.iter().map(|p| (p.ref_position.x, p.ref_position.y)).collect())
}

#[pymodule]
fn pbd_lattice_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(generate_lattice, m)?)?;
    Ok(())
}
