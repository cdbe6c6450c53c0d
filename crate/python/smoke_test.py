"""Smoke test for the Python bindings.

Build and install first:  maturin build -m crates/python/Cargo.toml && pip install target/wheels/*.whl
"""
import math
import os

import pbd_lattice_py as pl

HERE = os.path.dirname(os.path.abspath(__file__))
SCENARIOS = os.path.join(HERE, "..", "crates", "core", "scenarios")


def test_lattice():
    sq = pl.generate_lattice("square", 4, 3)
    assert len(sq) == 12
    assert sq[5] == (1.0, 1.0)
    hexa = pl.generate_lattice("hexagonal", 4, 3)
    assert len(hexa) == 12
    assert hexa[4][0] == 0.5


def test_scenario_round_trip():
    sc = pl.Scenario.load(os.path.join(SCENARIOS, "case_a.scn"))
    assert sc.name == "case_a"
    assert sc.total_steps == 400
    assert sc.gradient_order == 1
    assert sc.track == 67
    again = pl.Scenario.parse(sc.to_text())
    assert again.to_text() == sc.to_text()


def test_bad_scenario_raises():
    try:
        pl.Scenario.parse("name = x\nlattice = square\nextent = 3x3\ntotal_steps = 1\nfracture = maybe\n")
    except ValueError as e:
        assert "line 5" in str(e)
    else:
        raise AssertionError("expected ValueError")


def test_simulation_matches_run():
    sc = pl.Scenario.load(os.path.join(SCENARIOS, "case_d.scn"))
    traj = pl.run(sc)
    assert traj.steps[0] == 0 and traj.steps[-1] == sc.total_steps
    assert len(traj.severances) > 0

    sim = pl.Simulation(sc)
    n = len(sim.positions)
    assert sim.reference_positions == traj.positions(0)
    for _ in range(12):
        sim.step()
    assert sim.current_step == 12
    assert sim.positions == traj.positions(12)
    assert sim.categories == traj.categories(12)

    pe2 = dict(sim.energy("pe2"))
    pe1 = dict(sim.energy("pe1"))
    assert len(pe1) == sim.body_count
    assert all(v >= 0.0 and math.isfinite(v) for v in pe2.values())

    track = traj.track(sc.track)
    assert len(track) == len(traj)
    assert track[12][1:] == traj.positions(12)[sc.track]
    try:
        traj.track(n)
    except IndexError:
        pass
    else:
        raise AssertionError("expected IndexError")


def test_parallel_is_identical():
    sc = pl.Scenario.load(os.path.join(SCENARIOS, "case_f.scn"))
    a = pl.Simulation(sc).run(30)
    b = pl.Simulation(sc, parallel=True).run(30)
    assert a.positions(30) == b.positions(30)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"{name}: ok")
