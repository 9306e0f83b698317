//! Characteristic constants of the adapted weight classes: computation over
//! an enumerated cube family, the refinement-stability membership surrogate,
//! the epsilon-condition checker, and a divergence demonstration for a
//! weight outside its class.

use rholab::lattice::{maximal_ladder, Cube, CubeFamily, Lattice, WeightField};
use rholab::rho::CriticalRadius;
use rholab::weights::{
    a1_constant, ainf_eps_check, ap_constant, class_membership, rh_constant, ClassSpec,
    StabilityParams, StudyDomain, SubsetScheme, WeightExpr,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho = CriticalRadius::inverse_distance();
    let lat = Lattice::midpoint_box(&[-10.0], &[10.0], 512)?;
    let family = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, 20.0))?;

    let root = WeightField::from_fn(&lat, |p| p.norm().powf(0.5))?;
    let slow = WeightField::from_fn(&lat, |p| (1.0 + p.norm()).powf(0.3))?;
    println!("constants over {} cubes:", family.len());
    for theta in [0.0, 1.0] {
        let a2 = ap_constant(&root, None, 2.0, theta, &rho, &family)?;
        let a1 = a1_constant(&slow, None, theta, &rho, &family)?;
        let rh = rh_constant(&root, 2.0, theta, &rho, &family)?;
        let ri = rh_constant(&slow, f64::INFINITY, theta, &rho, &family)?;
        println!(
            "  theta = {theta}: [|x|^1/2]_A2 = {:.4}  [(1+|x|)^0.3]_A1 = {:.4}  [|x|^1/2]_RH2 = {:.4}  [(1+|x|)^0.3]_RHinf = {:.4}",
            a2.value, a1.value, rh.value, ri.value
        );
    }
    let a2 = ap_constant(&root, None, 2.0, 0.0, &rho, &family)?;
    if let Some(w) = a2.witness {
        println!(
            "  A2 witness cube: center {:?}, radius {:.4}",
            w.center.coords(),
            w.radius
        );
    }

    // epsilon-condition over dyadic subsets and sublevel sets
    let est = ainf_eps_check(&root, None, 0.0, 0.5, &rho, &family, &SubsetScheme::default())?;
    println!(
        "\nepsilon-condition of |x|^1/2 at eps = 1/2: {:.4} ({})",
        est.value,
        est.witness_detail.unwrap_or_default()
    );

    // membership surrogate: stable under refinement
    let domain = StudyDomain::fixed_box(vec![-10.0], vec![10.0], 128);
    let params = StabilityParams::default();
    let rep = class_membership(
        &domain,
        &rho,
        &WeightExpr::new("(1+|x|)^0.3", |p| (1.0 + p.norm()).powf(0.3)),
        None,
        ClassSpec::A1,
        &params,
    )?;
    println!(
        "\nmembership study: {} -> stable = {}, theta = {:?}, constants {:?}",
        rep.label, rep.stable, rep.theta, rep.constants
    );

    // divergence demonstration: |x|^{-2} is not in A_2 -- the constant on a
    // fixed central cube grows without bound as the lattice refines
    let rho_c = CriticalRadius::classical();
    let q = Cube::from_corners(&[-1.0], &[1.0])?;
    let fam = CubeFamily::custom(vec![q], "central cube")?;
    print!("divergence of [|x|^-2]_A2 under sharp refinement:");
    let mut constants = Vec::new();
    for n in [100usize, 10_000, 1_000_000] {
        let l = Lattice::midpoint_box(&[-1.0], &[1.0], n)?;
        let w = WeightField::from_fn(&l, |p| p.norm().powf(-2.0))?;
        let c = ap_constant(&w, None, 2.0, 0.0, &rho_c, &fam)?.value;
        print!("  {c:.3e}");
        constants.push(c);
    }
    println!(
        "\n  growth {:.1}x across the study (detector threshold 10x)",
        constants[2] / constants[0]
    );
    Ok(())
}
