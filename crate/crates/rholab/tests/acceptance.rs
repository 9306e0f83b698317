//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantity (run with `--nocapture` to see them). Tolerances are
//! pinned in the assertions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rholab::dyadic::{cz_decompose, localized_mixed_check, ShiftedGrids};
use rholab::kernels::{
    check_size_ls, check_smoothness_ls, check_smoothness_pointwise, exponent_table,
    fit_size_pointwise, fit_smoothness_pointwise, AnnulusSampling, Kernel, PairSampling,
    TripleSampling,
};
use rholab::lattice::{average, maximal_ladder, Cube, CubeFamily, Lattice, LatticeField, Point, WeightField};
use rholab::maximal::{local_to_dyadic_domination, m_rho_sigma};
use rholab::rho::{shen_rho, CriticalRadius, ShenQuadrature};
use rholab::sweep::{
    negative_control, run_sweep, sigma_search, ExperimentConfig, FieldSpec, HypothesisProfile,
    LatticeSpec, OperatorSpec, RefinementMode, RhoSpec,
};
use rholab::weights::{relation_suite, RelationBench, Verdict};
use std::time::Instant;

/// Point-major brute force: for every lattice point, loop over every family
/// cube, re-test membership and take the max of the cube averages computed
/// through the shared quadrature primitive.
fn brute_force_classical(f: &LatticeField, family: &CubeFamily) -> Vec<f64> {
    let lat = f.lattice();
    let abs_f = f.map(|x| x.abs()).unwrap();
    let avgs: Vec<f64> = family
        .cubes
        .iter()
        .map(|q| average(&abs_f, q, None).unwrap())
        .collect();
    (0..lat.len())
        .map(|i| {
            let p = lat.point(i);
            family
                .cubes
                .iter()
                .zip(&avgs)
                .filter(|(q, _)| q.contains(&p))
                .map(|(_, a)| *a)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

#[test]
fn acceptance_01_reduction_identity() {
    let start = Instant::now();
    let rho = CriticalRadius::inverse_distance();
    let mut worst = 0.0f64;

    // d = 1, 64 points
    let lat1 = Lattice::closed_box(&[-4.0], &[4.0], 8.0 / 63.0).unwrap();
    assert_eq!(lat1.len(), 64);
    let fam1 = CubeFamily::exhaustive_lattice(&lat1, &maximal_ladder(&lat1, 8.0)).unwrap();
    let f1 = LatticeField::from_fn(&lat1, |p| {
        (3.0 * p.coords()[0]).sin().abs() + 0.25 * p.coords()[0].cos()
    })
    .unwrap();
    let m1 = m_rho_sigma(&f1, &rho, 0.0, &fam1).unwrap();
    let b1 = brute_force_classical(&f1, &fam1);
    for i in 0..lat1.len() {
        worst = worst.max((m1.value(i).unwrap() - b1[i]).abs());
    }

    // d = 2, 64^2 points
    let lat2 = Lattice::closed_box(&[-4.0, -4.0], &[4.0, 4.0], 8.0 / 63.0).unwrap();
    assert_eq!(lat2.len(), 64 * 64);
    let fam2 = CubeFamily::exhaustive_lattice(&lat2, &maximal_ladder(&lat2, 8.0)).unwrap();
    let f2 = LatticeField::from_fn(&lat2, |p| {
        let c = p.coords();
        (2.0 * c[0]).sin().abs() + (c[0] * c[1]).cos().abs()
    })
    .unwrap();
    let m2 = m_rho_sigma(&f2, &rho, 0.0, &fam2).unwrap();
    let b2 = brute_force_classical(&f2, &fam2);
    for i in 0..lat2.len() {
        worst = worst.max((m2.value(i).unwrap() - b2[i]).abs());
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst <= 1e-12, "max abs diff {worst}");
    assert!(elapsed < 10.0, "runtime {elapsed:.1} s exceeds 10 s");
    println!(
        "ACCEPTANCE 1: PASS - sigma = 0 reduction, max abs diff {worst:.2e} over d = 1, 2 ({elapsed:.2} s)"
    );
}

#[test]
fn acceptance_02_okikiolu_sweep() {
    for d in 1..=3usize {
        let grids = ShiftedGrids::new(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101 + d as u64);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let side = 2f64.powf(rng.gen_range(-8.0..6.0));
            let q = Cube::new(
                Point::new(&center).unwrap(),
                (d as f64).sqrt() * side / 2.0,
            )
            .unwrap();
            let (_, q0) = grids.enclosing(&q).expect("every cube must be enclosed");
            assert!(q.contained_in(&q0));
            worst = worst.max(q0.side() / q.side());
        }
        assert!(worst <= 3.0 + 1e-12, "d = {d}: worst ratio {worst}");
        println!(
            "ACCEPTANCE 2 (d = {d}): PASS - 1000/1000 cubes enclosed, worst side ratio {worst:.4}"
        );
    }
}

#[test]
fn acceptance_03_local_to_dyadic_domination() {
    for d in 1..=2usize {
        let (lat, n_trials) = if d == 1 {
            (
                Lattice::closed_box(&[-60.0], &[60.0], 0.125).unwrap(),
                100usize,
            )
        } else {
            (
                Lattice::closed_box(&[-30.0, -30.0], &[30.0, 30.0], 0.125).unwrap(),
                100usize,
            )
        };
        let grids = ShiftedGrids::new(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(211 + d as u64);
        let mut worst = f64::NEG_INFINITY;
        for trial in 0..n_trials {
            // random f >= 0: noise, sometimes spiky
            let spiky = trial % 3 == 0;
            let samples: Vec<f64> = (0..lat.len())
                .map(|_| {
                    if spiky {
                        if rng.gen_bool(0.05) {
                            rng.gen_range(5.0..10.0)
                        } else {
                            rng.gen_range(0.0..0.2)
                        }
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect();
            let f = LatticeField::from_samples(&lat, samples).unwrap();
            let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
            // 48 d Q must stay inside the lattice box
            let side = if d == 1 {
                rng.gen_range(0.4..1.0)
            } else {
                rng.gen_range(0.4..0.6)
            };
            let q = Cube::new(
                Point::new(&center).unwrap(),
                (d as f64).sqrt() * side / 2.0,
            )
            .unwrap();
            let rep = local_to_dyadic_domination(&f, &q, &grids).unwrap();
            assert!(
                rep.all_contained_in_48d,
                "d = {d} trial {trial}: a grid cube escapes 48dQ"
            );
            assert!(
                rep.max_violation <= 1e-12,
                "d = {d} trial {trial}: violation {}",
                rep.max_violation
            );
            assert!(rep.checked_points > 0);
            worst = worst.max(rep.max_violation);
        }
        println!(
            "ACCEPTANCE 3 (d = {d}): PASS - {n_trials} seeded (f, Q), worst violation {worst:.2e}, all grid cubes inside 48dQ"
        );
    }
}

#[test]
fn acceptance_04_cz_invariants() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut trials = 0usize;
    for d in 1..=2usize {
        let lat = if d == 1 {
            Lattice::midpoint_box(&[0.0], &[1.0], 256).unwrap()
        } else {
            Lattice::midpoint_box(&[0.0, 0.0], &[1.0, 1.0], 64).unwrap()
        };
        let root = lat.bounding_cube().unwrap();
        for trial in 0..50 {
            let f = LatticeField::from_samples(
                &lat,
                (0..lat.len()).map(|_| rng.gen_range(0.0..1.0)).collect(),
            )
            .unwrap();
            let unit_weight = trial % 2 == 0;
            let v = if unit_weight {
                WeightField::one(&lat).unwrap()
            } else {
                WeightField::new(
                    LatticeField::from_samples(
                        &lat,
                        (0..lat.len()).map(|_| rng.gen_range(0.4..2.5)).collect(),
                    )
                    .unwrap(),
                )
                .unwrap()
            };
            let avg = average(&f, &root, Some(&v)).unwrap();
            let t = avg * rng.gen_range(1.1..3.0);
            let dec = cz_decompose(&f, &root, &v, t).unwrap();
            // disjointness via ownership
            let mut seen = vec![false; lat.len()];
            for s in &dec.selected {
                for k in lat.owned_indices(&s.cube) {
                    assert!(!seen[k], "overlapping selected cubes");
                    seen[k] = true;
                }
            }
            // exact reconstruction: bad is defined as f - good pointwise
            for i in lat.owned_indices(&root) {
                assert_eq!(dec.bad_total().get(i), f.get(i) - dec.good().get(i));
                assert!(
                    (dec.good().get(i) + dec.bad_total().get(i) - f.get(i)).abs() <= 1e-12
                );
            }
            // mean-zero bad parts
            assert!(dec.mean_zero_defect(&f, &v) <= 1e-10);
            // t < avg_{P_i} <= gamma t and parent maximality came with the
            // stopping time; check the numbers
            for s in &dec.selected {
                assert!(s.weighted_avg > t);
                assert!(s.weighted_avg <= dec.gamma_realized * t * (1.0 + 1e-12));
            }
            assert!(dec.gamma_realized <= dec.doubling_measured * (1.0 + 1e-9));
            if unit_weight {
                assert!(
                    dec.gamma_realized <= 2f64.powi(d as i32) + 1e-9,
                    "d = {d}: gamma {} exceeds 2^d for v = 1",
                    dec.gamma_realized
                );
            }
            trials += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "runtime {elapsed:.1} s exceeds 30 s");
    println!(
        "ACCEPTANCE 4: PASS - {trials} seeded decompositions, all invariants hold ({elapsed:.2} s)"
    );
}

#[test]
fn acceptance_05_shen_closed_forms() {
    let quad = ShenQuadrature::default();
    let x = Point::new(&[0.0, 0.0, 0.0]).unwrap();
    let r1 = shen_rho(&|_: &Point| 1.0, &x, 3, &quad).unwrap();
    let exact = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
    assert!((r1 - exact).abs() <= 1e-3, "rho(V=1) = {r1}, exact {exact}");
    let r4 = shen_rho(&|_: &Point| 4.0, &x, 3, &quad).unwrap();
    assert!(
        (r4 - r1 / 2.0).abs() <= 1e-3,
        "rho(V=4) = {r4} should halve {r1}"
    );
    println!(
        "ACCEPTANCE 5: PASS - rho(V=1) = {r1:.6} vs {exact:.6}, rho(V=4) = {r4:.6} halves it"
    );
}

#[test]
fn acceptance_06_exponent_arithmetic() {
    // q = s(p-1)+1 cases
    let q_of = |p: f64, s: f64| s * (p - 1.0) + 1.0;
    assert_eq!(q_of(2.0, 2.0), 3.0);
    assert_eq!(q_of(3.0, 2.0), 5.0);
    // p0 = 6 at (q = 2, d = 3), exactly
    let t = exponent_table(2.0, 3, None).unwrap();
    assert_eq!(t.p0, Some(6.0));
    // p0 infinite at q >= d
    let t = exponent_table(3.0, 3, None).unwrap();
    assert_eq!(t.p0, None);
    let t = exponent_table(5.0, 3, None).unwrap();
    assert_eq!(t.p0, None);
    // q_gamma = 8 at (q = 4, d = 3, gamma = 1), exactly
    let t = exponent_table(4.0, 3, Some(1.0)).unwrap();
    assert_eq!(t.q_gamma, Some(8.0));
    println!("ACCEPTANCE 6: PASS - exponent arithmetic exact (q = 3, 5; p0 = 6, inf; q_gamma = 8)");
}

#[test]
fn acceptance_07_relation_suite() {
    let start = Instant::now();
    let bench = RelationBench::standard(256);
    let report = relation_suite(&bench).unwrap();
    assert_eq!(report.checks.len(), 12);
    for c in &report.checks {
        assert_eq!(
            c.verdict,
            Verdict::Pass,
            "{} failed: {} ({})",
            c.id,
            c.description,
            c.note
        );
    }
    // the engineered-exponent identities at s' = 2, eps = 1/4 are exact
    let r12 = report.checks.iter().find(|c| c.id == "r12").unwrap();
    assert_eq!(r12.lhs_constant, 6.0, "q' must be exactly 6");
    assert_eq!(r12.rhs_constant, 2.5, "alpha must be exactly 2.5");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "runtime {elapsed:.1} s exceeds 5 min");
    println!(
        "ACCEPTANCE 7: PASS - relations r1..r12 all pass on the standard bench; q' = 6, alpha = 2.5 exact ({elapsed:.2} s)"
    );
}

#[test]
fn acceptance_08_dyadic_weak_type_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(801);
    let lat = Lattice::midpoint_box(&[0.0], &[1.0], 1024).unwrap();
    let root = lat.bounding_cube().unwrap();
    let one = WeightField::one(&lat).unwrap();
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let f = if trial % 2 == 0 {
            LatticeField::from_samples(
                &lat,
                (0..lat.len()).map(|_| rng.gen_range(0.0..1.0)).collect(),
            )
            .unwrap()
        } else {
            let a = rng.gen_range(0.0..0.8);
            let b = a + rng.gen_range(0.05..0.2);
            LatticeField::from_fn(&lat, |p| {
                if p.coords()[0] >= a && p.coords()[0] <= b {
                    rng.clone().gen_range(1.0..4.0)
                } else {
                    0.0
                }
            })
            .unwrap()
        };
        let rec = localized_mixed_check(&f, &root, &one, &one, None).unwrap();
        worst = worst.max(rec.sup_ratio);
        assert!(
            rec.sup_ratio <= 1.0 + 1e-9,
            "trial {trial}: sup ratio {} breaks the dyadic weak-type bound",
            rec.sup_ratio
        );
    }
    println!(
        "ACCEPTANCE 8: PASS - unweighted localized sweeps, sup ratio at most {worst:.6} <= 1 + 1e-9"
    );
}

fn adapted_config() -> ExperimentConfig {
    ExperimentConfig {
        label: "adapted-weight stability".into(),
        rho: RhoSpec::InverseDistance,
        u: FieldSpec::PowerOnePlus { exponent: 0.3 },
        v: FieldSpec::PowerOnePlus { exponent: 0.2 },
        f: FieldSpec::Indicator { lo: -1.0, hi: 1.0 },
        operator: OperatorSpec::MaximalRhoSigma { sigma: 0.0 },
        lattice: LatticeSpec {
            low: vec![-10.0],
            high: vec![10.0],
            points_per_axis: 512,
            offset: false,
        },
        t_steps: 24,
        profile: HypothesisProfile::Maximal,
        refine_levels: 1,
        refinement: RefinementMode::HalveSpacing,
        seed: 9,
        override_precheck: false,
    }
}

#[test]
fn acceptance_09_mixed_sweep_stability() {
    let start = Instant::now();
    let cfg = adapted_config();
    let (sigma, rec) = sigma_search(&cfg).unwrap();
    assert!(sigma.is_some(), "no stable sigma found");
    assert!(
        rec.refinement_drift < 1.5,
        "drift {} across 2^9 -> 2^10",
        rec.refinement_drift
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "runtime {elapsed:.1} s exceeds 2 min");
    println!(
        "ACCEPTANCE 9: PASS - sigma* = {:?}, sup ratios {:?}, drift {:.4} ({elapsed:.2} s)",
        sigma.unwrap(),
        rec.sup_ratio_by_level,
        rec.refinement_drift
    );
}

#[test]
fn acceptance_10_sawyer_control() {
    let cfg = ExperimentConfig {
        label: "singular pair".into(),
        rho: RhoSpec::Classical,
        u: FieldSpec::PowerAbs { exponent: -0.5 },
        v: FieldSpec::PowerAbs { exponent: -0.5 },
        f: FieldSpec::Indicator { lo: -1.0, hi: 1.0 },
        operator: OperatorSpec::MaximalRhoSigma { sigma: 0.0 },
        lattice: LatticeSpec {
            low: vec![-10.0],
            high: vec![10.0],
            points_per_axis: 512,
            offset: true,
        },
        t_steps: 24,
        profile: HypothesisProfile::Maximal,
        refine_levels: 2,
        refinement: RefinementMode::HalveSpacing,
        seed: 9,
        override_precheck: true,
    };
    let rec = run_sweep(&cfg).unwrap();
    assert!(
        rec.refinement_drift < 1.5,
        "drift {} across two refinements",
        rec.refinement_drift
    );
    println!(
        "ACCEPTANCE 10: PASS - singular-pair sweep sup ratios {:?}, drift {:.4}",
        rec.sup_ratio_by_level, rec.refinement_drift
    );
}

#[test]
fn acceptance_11_negative_control() {
    let cfg = ExperimentConfig {
        label: "negative control".into(),
        rho: RhoSpec::Classical,
        u: FieldSpec::ExpAbs,
        v: FieldSpec::ExpAbs,
        f: FieldSpec::Indicator { lo: -1.0, hi: 1.0 },
        operator: OperatorSpec::MaximalRhoSigma { sigma: 0.0 },
        lattice: LatticeSpec {
            low: vec![-8.0],
            high: vec![8.0],
            points_per_axis: 256,
            offset: false,
        },
        t_steps: 24,
        profile: HypothesisProfile::Maximal,
        refine_levels: 2,
        refinement: RefinementMode::ExtendBox,
        seed: 9,
        override_precheck: true,
    };
    let (rec, fired) = negative_control(&cfg).unwrap();
    assert!(
        !rec.precheck.as_ref().unwrap().passed,
        "the hypothesis pre-check should reject exp(|x|)"
    );
    assert!(
        rec.growth >= 3.0,
        "growth {} below the 3x instability threshold",
        rec.growth
    );
    assert!(fired);
    println!(
        "ACCEPTANCE 11: PASS - exp(|x|) control: sup ratios {:?}, growth {:.1}x, detector fired",
        rec.sup_ratio_by_level, rec.growth
    );
}

#[test]
fn acceptance_12_kernel_self_consistency() {
    let dim = 1usize;
    let rho = CriticalRadius::inverse_distance();
    let kernel = Kernel::surrogate(dim, 4.0, rho.clone());
    let doubled = kernel.scaled(2.0);

    let pairs = PairSampling {
        low: vec![-4.0],
        high: vec![4.0],
        count: 2000,
        seed: 1201,
        min_separation: 1e-3,
    }
    .generate(1)
    .unwrap();
    // size fits at N <= 4 are finite (bounded by one for the surrogate)
    for n in [0.0, 1.0, 2.0, 4.0] {
        let (fit, _) = fit_size_pointwise(&kernel, dim, n, &pairs).unwrap();
        assert!(fit.is_finite() && fit <= 1.0 + 1e-12, "N = {n}: fit {fit}");
        let (fit2, _) = fit_size_pointwise(&doubled, dim, n, &pairs).unwrap();
        assert!(
            (fit2 - 2.0 * fit).abs() <= 1e-12 * fit2,
            "doubling at N = {n}: {fit2} vs {fit}"
        );
    }

    let triples = TripleSampling {
        low: vec![-4.0],
        high: vec![4.0],
        count: 2000,
        seed: 1202,
        min_scale: 1e-4,
    };
    let rep = check_smoothness_pointwise(&kernel, dim, 1.0, &triples).unwrap();
    assert!(rep.fitted.is_finite() && rep.passed, "smoothness: {rep:?}");
    let trips = triples.generate(1).unwrap();
    let (g1, _, _) = fit_smoothness_pointwise(&kernel, dim, 1.0, 0.0, &trips);
    let (g2, _, _) = fit_smoothness_pointwise(&doubled, dim, 1.0, 0.0, &trips);
    assert!((g2 - 2.0 * g1).abs() <= 1e-12 * g2);

    let annuli = AnnulusSampling {
        low: vec![-2.0],
        high: vec![2.0],
        r_ladder: vec![0.25, 0.5, 1.0],
        centers: 4,
        tests_per_annulus: 3,
        grid_per_axis: 512,
        seed: 1203,
    };
    let size_ls = check_size_ls(&kernel, dim, 2.0, 4.0, &annuli).unwrap();
    assert!(size_ls.fitted.is_finite(), "size (s=2): {size_ls:?}");
    let size_ls2 = check_size_ls(&doubled, dim, 2.0, 4.0, &annuli).unwrap();
    assert!((size_ls2.fitted - 2.0 * size_ls.fitted).abs() <= 1e-12 * size_ls2.fitted);
    let smooth_ls = check_smoothness_ls(&kernel, dim, 2.0, 1.0, 0.0, &annuli).unwrap();
    assert!(smooth_ls.fitted.is_finite(), "smoothness (s=2): {smooth_ls:?}");
    let smooth_ls2 = check_smoothness_ls(&doubled, dim, 2.0, 1.0, 0.0, &annuli).unwrap();
    assert!((smooth_ls2.fitted - 2.0 * smooth_ls.fitted).abs() <= 1e-12 * smooth_ls2.fitted);

    println!(
        "ACCEPTANCE 12: PASS - surrogate kernel (N0 = 4, delta = 1): pointwise size fits <= 1 for N <= 4, smoothness fit {:.4}, (s = 2) fits {:.4}/{:.4}, doubling exact to 1e-12",
        rep.fitted, size_ls.fitted, smooth_ls.fitted
    );
}
