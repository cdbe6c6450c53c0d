//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::energy::{energy_field, EnergyKind};
use crate::engine::{energy_series, run as run_scenario, Simulation};
use crate::error::{Error, Result};
use crate::fracture::{fictitious_position, standins};
use crate::io::{self, SvgOptions, TrackRow};
use crate::scenario::{load_scenario, Scenario};

#[derive(Debug, Parser)]
#[command(name = "pbd-lattice", version, about = "Lattice position-based dynamics runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Pe1,
    Pe2,
}

impl From<Kind> for EnergyKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Pe1 => EnergyKind::Pe1,
            Kind::Pe2 => EnergyKind::Pe2,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario; writes trajectory.csv and severance.csv.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Evaluate followers on the thread pool.
        #[arg(long)]
        parallel: bool,
    },
    /// Write a pseudo-energy field for every recorded step.
    Energy {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render one step as SVG.
    Plot {
        scenario: PathBuf,
        #[arg(long)]
        step: usize,
        #[arg(long, value_enum)]
        energy: Option<Kind>,
        /// Also draw fictitious stand-ins.
        #[arg(long)]
        debug: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time series of one point: step, x, y, PE1.
    Track {
        scenario: PathBuf,
        #[arg(long)]
        point: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and build a scenario without running it.
    Validate { scenario: PathBuf },
}

/// Run the CLI on `argv` (program name first) and return the exit code:
/// 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load(path: &Path) -> Result<Scenario> {
    load_scenario(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            scenario,
            out,
            parallel,
        } => {
            let sc = load(&scenario)?;
            let traj = if parallel {
                let mut sim = Simulation::from_scenario(&sc)?;
                sim.parallel = true;
                sim.run(sc.total_steps, sc.snapshot_stride)?
            } else {
                run_scenario(&sc)?
            };
            std::fs::create_dir_all(&out)?;
            io::write_trajectory_csv(&traj, out.join("trajectory.csv"))?;
            io::write_severance_csv(&traj.severances, out.join("severance.csv"))?;
            println!(
                "{}: {} steps, {} snapshots, {} severed bonds -> {}",
                sc.name,
                sc.total_steps,
                traj.snapshots.len(),
                traj.severances.len(),
                out.display()
            );
        }
        Command::Energy {
            scenario,
            kind,
            out,
        } => {
            let sc = load(&scenario)?;
            let kind = EnergyKind::from(kind);
            let (_, fields) = energy_series(&sc, kind)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("energy_{}.csv", kind.name()));
            io::write_energy_csv(&fields, &path)?;
            println!("{}: {} fields -> {}", sc.name, fields.len(), path.display());
        }
        Command::Plot {
            scenario,
            step,
            energy,
            debug,
            out,
        } => {
            let sc = load(&scenario)?;
            if step > sc.total_steps {
                return Err(Error::MissingStep(step));
            }
            let mut sim = Simulation::from_scenario(&sc)?;
            let mut previous = None;
            while sim.state.step < step {
                previous = Some(sim.state.positions.clone());
                sim.step()?;
            }
            let refs = sim.model.ref_positions().to_vec();
            let st = &sim.state;
            let field = energy
                .map(|k| {
                    energy_field(
                        k.into(),
                        step,
                        &st.positions,
                        previous.as_deref(),
                        &refs,
                        sim.model.reference_table(),
                        &st.categories,
                    )
                })
                .transpose()?;
            let ghosts: Vec<_> = if debug {
                standins(&st.table)
                    .iter()
                    .map(|s| fictitious_position(s, st.positions[s.owner_id], &refs, sim.model.lambda()))
                    .collect()
            } else {
                Vec::new()
            };
            let opts = SvgOptions {
                energy: field.as_ref(),
                fictitious: debug.then_some(ghosts.as_slice()),
                title: Some(format!("{} step {step}", sc.name)),
            };
            io::write_snapshot_svg(&st.positions, &st.categories, &opts, &out)?;
            println!("{} step {step} -> {}", sc.name, out.display());
        }
        Command::Track {
            scenario,
            point,
            out,
        } => {
            let sc = load(&scenario)?;
            let (traj, fields) = energy_series(&sc, EnergyKind::Pe1)?;
            let len = traj.snapshots[0].positions.len();
            if point >= len {
                return Err(Error::IdOutOfRange { id: point, len });
            }
            let rows: Vec<TrackRow> = traj
                .snapshots
                .iter()
                .zip(&fields)
                .map(|(s, f)| TrackRow {
                    step: s.step,
                    position: s.positions[point],
                    pe1: f.get(point).unwrap_or(0.0),
                })
                .collect();
            io::write_track_csv(&rows, &out)?;
            println!("{}: point {point}, {} rows -> {}", sc.name, rows.len(), out.display());
        }
        Command::Validate { scenario } => {
            let sc = load(&scenario)?;
            let sim = Simulation::from_scenario(&sc)?;
            let m = &sim.model;
            println!(
                "{}: ok ({} {} lattice, {} body + {} frame points, {} leaders, gradient {}, {} steps)",
                sc.name,
                sc.lattice.kind.name(),
                match &sc.lattice.extent {
                    crate::lattice::Extent::Counts { cols, rows } => format!("{cols}x{rows}"),
                    crate::lattice::Extent::Polygon(_) => "polygon".to_string(),
                },
                m.body_count,
                m.len() - m.body_count,
                m.leader_ids().len(),
                sc.gradient_order(),
                sc.total_steps
            );
        }
    }
    Ok(())
}
