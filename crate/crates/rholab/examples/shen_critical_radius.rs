//! The sup-formula critical radius of a potential in d = 3: bisection on the
//! scaled ball integral, checked against closed forms, plus antitonicity in
//! the potential and the reverse-Holder diagnostic for potentials.

use rholab::lattice::{Cube, CubeFamily, Lattice, LatticeField, Point};
use rholab::rho::{reverse_holder_constant, shen_rho_report, ShenQuadrature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quad = ShenQuadrature::default();
    let origin = Point::new(&[0.0, 0.0, 0.0])?;

    let d1 = shen_rho_report(&|_: &Point| 1.0, &origin, 3, &quad)?;
    let exact = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
    println!("V = 1:     rho(0) = {:.6}  (exact {exact:.6})", d1.rho);
    let d4 = shen_rho_report(&|_: &Point| 4.0, &origin, 3, &quad)?;
    println!(
        "V = 4:     rho(0) = {:.6}  (half of the above: {:.6})",
        d4.rho,
        d1.rho / 2.0
    );
    let dq = shen_rho_report(
        &|p: &Point| p.coords().iter().map(|c| c * c).sum::<f64>(),
        &origin,
        3,
        &quad,
    )?;
    println!(
        "V = |x|^2: rho(0) = {:.6}  (exact (5/4pi)^(1/4) = {:.6}), F(rho) = {:.9}, monotonicity violations: {}",
        dq.rho,
        (5.0 / (4.0 * std::f64::consts::PI)).powf(0.25),
        dq.f_at_rho,
        dq.monotonicity_violations
    );

    // antitone in the potential
    let off = Point::new(&[0.4, -0.3, 0.1])?;
    let small = shen_rho_report(&|p: &Point| 0.5 + p.norm(), &off, 3, &quad)?;
    let large = shen_rho_report(&|p: &Point| 2.0 + p.norm(), &off, 3, &quad)?;
    println!(
        "\nantitone:  rho[V = 0.5+|x|] = {:.4} >= rho[V = 2+|x|] = {:.4}",
        small.rho, large.rho
    );

    // reverse-Holder constants of sampled potentials
    let lat = Lattice::midpoint_box(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], 24)?;
    let v = LatticeField::from_fn(&lat, |p| p.norm() * p.norm())?;
    let family = CubeFamily::custom(
        vec![
            Cube::from_corners(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0])?,
            Cube::from_corners(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0])?,
            Cube::from_corners(&[-0.5, -0.5, -0.5], &[0.5, 0.5, 0.5])?,
        ],
        "probe cubes",
    )?;
    for q in [2.0, 3.0] {
        println!(
            "RH_{q} constant of |x|^2 on [-1,1]^3 over probe cubes: {:.4}",
            reverse_holder_constant(&v, q, &family)?
        );
    }
    Ok(())
}
