//! Property tests for the structural invariants: serialization round-trips,
//! cube algebra, grid enclosure, quadrature monotonicity and constant
//! scale-invariance over randomized inputs.

use proptest::prelude::*;
use rholab::dyadic::ShiftedGrids;
use rholab::lattice::{average, io, maximal_ladder, Cube, CubeFamily, Lattice, LatticeField, Point, WeightField};
use rholab::maximal::m_rho_sigma;
use rholab::rho::CriticalRadius;
use rholab::weights::ap_constant;

fn finite_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e12..1e12f64,
        -1.0..1.0f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(1e-300),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_text_round_trip_is_bit_exact(values in prop::collection::vec(finite_f64(), 9)) {
        let lat = Lattice::closed_box(&[0.0], &[1.0], 0.125).unwrap();
        let f = LatticeField::from_samples(&lat, values).unwrap();
        let g = io::from_text(&io::to_text(&f)).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn dilate_composes_multiplicatively(
        cx in -10.0..10.0f64,
        r in 0.01..10.0f64,
        a in 0.1..4.0f64,
        b in 0.1..4.0f64,
    ) {
        let q = Cube::new(Point::new(&[cx]).unwrap(), r).unwrap();
        let two_step = q.dilate(a).unwrap().dilate(b).unwrap();
        let one_step = q.dilate(a * b).unwrap();
        prop_assert!((two_step.radius - one_step.radius).abs() <= 1e-12 * one_step.radius);
        prop_assert_eq!(two_step.center, one_step.center);
        prop_assert_eq!(q.dilate(1.0).unwrap(), q);
    }

    #[test]
    fn enclosing_grid_cell_within_triple_side(
        cx in -30.0..30.0f64,
        cy in -30.0..30.0f64,
        log_side in -6.0..5.0f64,
    ) {
        let grids = ShiftedGrids::new(2).unwrap();
        let side = 2f64.powf(log_side);
        let q = Cube::new(Point::new(&[cx, cy]).unwrap(), 2f64.sqrt() * side / 2.0).unwrap();
        let (_, q0) = grids.enclosing(&q).unwrap();
        prop_assert!(q.contained_in(&q0));
        prop_assert!(q0.side() <= 3.0 * q.side() * (1.0 + 1e-9));
    }

    #[test]
    fn dyadic_children_partition_owned_points(
        cx in -2.0..2.0f64,
        r in 0.3..2.0f64,
    ) {
        let lat = Lattice::closed_box(&[-4.0], &[4.0], 1.0 / 32.0).unwrap();
        let q = Cube::new(Point::new(&[cx]).unwrap(), r).unwrap();
        let parent = lat.owned_indices(&q);
        let kids = q.children();
        let mut owned = 0usize;
        for i in &parent {
            let owners = kids.iter().filter(|k| lat.owned_indices(k).contains(i)).count();
            prop_assert_eq!(owners, 1);
            owned += 1;
        }
        let child_total: usize = kids.iter().map(|k| lat.owned_count(k)).sum();
        prop_assert_eq!(child_total, owned);
    }

    #[test]
    fn measure_is_additive_and_monotone(split in 0.1..0.9f64) {
        let lat = Lattice::midpoint_box(&[0.0], &[1.0], 256).unwrap();
        let w = WeightField::from_fn(&lat, |p| 0.5 + p.coords()[0]).unwrap();
        let left = rholab::lattice::measure(&w, |p| p.coords()[0] < split);
        let right = rholab::lattice::measure(&w, |p| p.coords()[0] >= split);
        let all = rholab::lattice::measure(&w, |_| true);
        prop_assert!((left + right - all).abs() <= 1e-12 * all);
        let smaller = rholab::lattice::measure(&w, |p| p.coords()[0] < split * 0.5);
        prop_assert!(smaller <= left + 1e-15);
    }

    #[test]
    fn average_monotone_under_pointwise_domination(shift in 0.0..2.0f64) {
        let lat = Lattice::closed_box(&[0.0], &[1.0], 1.0 / 64.0).unwrap();
        let f = LatticeField::from_fn(&lat, |p| (7.0 * p.coords()[0]).sin()).unwrap();
        let g = f.map(|x| x + shift).unwrap();
        let w = WeightField::from_fn(&lat, |p| 1.0 + p.coords()[0]).unwrap();
        for r in [0.1, 0.3, 0.5] {
            let q = Cube::new(Point::new(&[0.5]).unwrap(), r).unwrap();
            let af = average(&f, &q, Some(&w)).unwrap();
            let ag = average(&g, &q, Some(&w)).unwrap();
            prop_assert!(af <= ag + 1e-12);
        }
    }

    #[test]
    fn ap_constant_scale_invariant(scale in 0.001..1000.0f64) {
        let lat = Lattice::midpoint_box(&[-2.0], &[2.0], 128).unwrap();
        let fam = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, 4.0)).unwrap();
        let rho = CriticalRadius::inverse_distance();
        let w = WeightField::from_fn(&lat, |p| (1.0 + p.norm()).powf(0.25)).unwrap();
        let ws = WeightField::new(w.field().map(|x| scale * x).unwrap()).unwrap();
        let c = ap_constant(&w, None, 2.0, 1.0, &rho, &fam).unwrap().value;
        let cs = ap_constant(&ws, None, 2.0, 1.0, &rho, &fam).unwrap().value;
        prop_assert!((c - cs).abs() <= 1e-12 * c);
    }

    #[test]
    fn maximal_sigma_monotone_and_positive_homogeneous(
        lambda in 0.1..10.0f64,
        s1 in 0.0..2.0f64,
        bump in 0.1..2.0f64,
    ) {
        let lat = Lattice::closed_box(&[-2.0], &[2.0], 1.0 / 16.0).unwrap();
        let fam = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, 4.0)).unwrap();
        let rho = CriticalRadius::inverse_distance();
        let f = LatticeField::from_fn(&lat, |p| (p.coords()[0] * 3.0).sin() + 0.1).unwrap();
        let s2 = s1 + bump;
        let m1 = m_rho_sigma(&f, &rho, s1, &fam).unwrap();
        let m2 = m_rho_sigma(&f, &rho, s2, &fam).unwrap();
        let scaled = m_rho_sigma(&f.map(|x| lambda * x).unwrap(), &rho, s1, &fam).unwrap();
        for i in 0..lat.len() {
            prop_assert!(m2.value(i).unwrap() <= m1.value(i).unwrap() * (1.0 + 1e-12));
            let want = lambda * m1.value(i).unwrap();
            prop_assert!((scaled.value(i).unwrap() - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }
}
