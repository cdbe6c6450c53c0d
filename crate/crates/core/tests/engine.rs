use pbd_lattice::rules::{follow, NeighborhoodView};
use pbd_lattice::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pulled(cols: usize, rows: usize, gradient: usize, v: Vec2, steps: usize) -> Scenario {
    parse_scenario(&format!(
        "name = pulled\nlattice = square\nextent = {cols}x{rows}\ntotal_steps = {steps}\n\
         gradient = {gradient}\n\
         leader = column_left velocity=0,0\n\
         leader = column_right velocity={},{} steps=0..{}\n",
        v.x,
        v.y,
        steps / 2
    ))
    .unwrap()
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
fn hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut h: Vec<Vec2> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

fn inside_hull(h: &[Vec2], q: Vec2, tol: f64) -> bool {
    (0..h.len()).all(|i| {
        let (a, b) = (h[i], h[(i + 1) % h.len()]);
        let edge = (b - a).norm();
        ((b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x)) / edge >= -tol
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn followers_stay_in_the_previous_hull(
        cols in 3usize..7,
        rows in 3usize..7,
        gradient in 1usize..3,
        vx in -0.5f64..0.5,
        vy in -0.5f64..0.5,
    ) {
        let sc = pulled(cols, rows, gradient, Vec2::new(vx, vy), 12);
        let model = Model::from_scenario(&sc).unwrap();
        let traj = run(&sc).unwrap();
        for w in traj.snapshots.windows(2) {
            let h = hull(&w[0].positions);
            for j in 0..model.body_count {
                if w[1].categories[j] == Category::Follower {
                    prop_assert!(inside_hull(&h, w[1].positions[j], 1e-9), "step {} particle {j}", w[1].step);
                }
            }
        }
    }

    #[test]
    fn rigid_translation_of_everything_commutes_with_a_step(
        dx in -5.0f64..5.0,
        dy in -5.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let model = Model::new(
            LatticeSpec::square(5, 4, 1.0),
            NeighborMetric::Coordination,
            RuleConfig::centroid(1),
            FrameRule::AverageOfAssigned,
            None,
            |_| Ok(Vec::new()),
        ).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Simulation::new(model);
        for p in a.state.positions.iter_mut() {
            *p += Vec2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        }
        let mut b = a.clone();
        let shift = Vec2::new(dx, dy);
        for p in b.state.positions.iter_mut() {
            *p += shift;
        }
        a.step().unwrap();
        b.step().unwrap();
        for (p, q) in a.state.positions.iter().zip(&b.state.positions) {
            prop_assert!((*q - *p - shift).norm() < 1e-9);
        }
    }
}

#[test]
fn followers_do_not_depend_on_evaluation_order() {
    let sc = pulled(8, 6, 2, Vec2::new(0.3, 0.1), 6);
    let mut sim = Simulation::from_scenario(&sc).unwrap();
    for _ in 0..3 {
        sim.step().unwrap();
    }
    let refs = sim.model.ref_positions().to_vec();
    let view = NeighborhoodView {
        positions: &sim.state.positions,
        ref_positions: &refs,
        table: &sim.state.table,
        lambda: 1.0,
    };
    let mut ids: Vec<usize> = (0..sim.model.body_count).collect();
    let serial: Vec<Vec2> = ids.iter().map(|&j| follow(j, &view, &sim.model.rule)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        ids.shuffle(&mut rng);
        for &j in &ids {
            let p = follow(j, &view, &sim.model.rule);
            assert_eq!(p.x.to_bits(), serial[j].x.to_bits());
            assert_eq!(p.y.to_bits(), serial[j].y.to_bits());
        }
    }
}

#[test]
fn released_leaders_become_followers_at_the_end_of_their_schedule() {
    let sc = parse_scenario(
        "name = r\nlattice = square\nextent = 5x5\ntotal_steps = 6\n\
         leader = column_right velocity=0.1,0 steps=0..3 after=follower\n",
    )
    .unwrap();
    let traj = run(&sc).unwrap();
    assert_eq!(traj.category_changes.len(), 5);
    assert!(traj.category_changes.iter().all(|c| c.step == 3 && c.to == Category::Follower));
    // the switch happens inside step 3 -> 4, before followers are recomputed
    assert_eq!(traj.snapshot(3).unwrap().categories[4], Category::Leader);
    assert_eq!(traj.snapshot(4).unwrap().categories[4], Category::Follower);
    // moved three times, then relaxes
    let x = traj.track(4);
    assert!((x[3].1.x - 4.3).abs() < 1e-12);
    assert!(x[4].1.x < x[3].1.x);
}

#[test]
fn held_leaders_park_after_their_schedule() {
    let sc = pulled(5, 5, 1, Vec2::new(0.2, 0.0), 8);
    let traj = run(&sc).unwrap();
    let xs: Vec<f64> = traj.track(4).iter().map(|(_, p)| p.x).collect();
    assert!((xs[4] - 4.8).abs() < 1e-12);
    assert!(xs[4..].iter().all(|&x| x == xs[4]));
}

#[test]
fn severance_events_name_both_directions() {
    let sc = parse_scenario(
        "name = f\nlattice = square\nextent = 6x6\ntotal_steps = 20\nfracture = on\n\
         fracture_threshold = 2\n\
         leader = column_left velocity=0,0\n\
         leader = column_right velocity=1,0 steps=0..5\n",
    )
    .unwrap();
    let model = Model::from_scenario(&sc).unwrap();
    let traj = run(&sc).unwrap();
    assert!(!traj.severances.is_empty());
    // frame points own no bonds, so only body-body bonds show up twice
    for e in traj.severances.iter().filter(|e| e.neighbor < model.body_count) {
        assert!(traj
            .severances
            .iter()
            .any(|f| f.owner == e.neighbor && f.neighbor == e.owner && f.step == e.step));
    }
    for e in &traj.severances {
        assert_eq!(traj.final_table.bond(e.owner, e.neighbor).unwrap().state, BondState::Severed);
    }
    let steps: Vec<usize> = traj.severances.iter().map(|e| e.step).collect();
    assert!(steps.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn energy_series_lines_up_with_the_snapshots() {
    let mut sc = pulled(4, 4, 1, Vec2::new(0.2, 0.0), 9);
    sc.snapshot_stride = 3;
    let (traj, pe1) = energy_series(&sc, EnergyKind::Pe1).unwrap();
    let steps: Vec<usize> = traj.snapshots.iter().map(|s| s.step).collect();
    assert_eq!(steps, vec![0, 3, 6, 9]);
    assert_eq!(pe1.iter().map(|f| f.step).collect::<Vec<_>>(), steps);
    let (_, pe2) = energy_series(&sc, EnergyKind::Pe2).unwrap();
    assert_eq!(pe2.iter().map(|f| f.step).collect::<Vec<_>>(), vec![3, 6, 9]);
    // PE2 is a one-step quantity even when snapshots are strided
    assert!((pe2[0].get(3).unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn hexagonal_run_is_symmetric_about_the_pull_axis() {
    let sc = parse_scenario(
        "name = h\nlattice = hexagonal\nextent = 6x5\ntotal_steps = 10\n\
         leader = column_left velocity=0,0\n\
         leader = column_right velocity=0.2,0 steps=0..5\n",
    )
    .unwrap();
    let traj = run(&sc).unwrap();
    let c0 = &traj.snapshots[0].positions;
    let last = traj.last();
    // rows 0 and 4 are mirror images (same offset parity)
    for c in 0..6 {
        let (a, b) = (c, 4 * 6 + c);
        let dya = last.positions[a].y - c0[a].y;
        let dyb = last.positions[b].y - c0[b].y;
        assert!((dya + dyb).abs() < 1e-10, "{c}: {dya} {dyb}");
    }
}
