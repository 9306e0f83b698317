//! Greedy critical covering: centers picked in lattice order until the box
//! is covered by the critical cubes Q(x_j, rho(x_j)), with overlap counts of
//! the dilated cubes and the fitted overlap growth exponent.

use rholab::lattice::Lattice;
use rholab::rho::{critical_covering, CriticalRadius};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sigma_ladder = [1.0, 2.0, 4.0, 8.0];

    let lat = Lattice::closed_box(&[0.0], &[10.0], 1.0 / 32.0)?;
    let rep = critical_covering(&CriticalRadius::constant(1.0), &lat, &sigma_ladder)?;
    println!(
        "rho = 1 on [0,10]: {} centers, covered = {}",
        rep.centers.len(),
        rep.covered
    );

    let lat = Lattice::closed_box(&[-10.0], &[10.0], 20.0 / 1024.0)?;
    let rep = critical_covering(&CriticalRadius::inverse_distance(), &lat, &sigma_ladder)?;
    println!(
        "\nrho = 1/(1+|x|) on [-10,10]: {} centers, covered = {}",
        rep.centers.len(),
        rep.covered
    );
    println!("  sigma   max overlap");
    for (s, c) in &rep.max_overlap {
        println!("  {s:<7} {c}");
    }
    println!("  fitted overlap exponent N1 = {:.3}", rep.n1_fit);

    let lat2 = Lattice::closed_box(&[-6.0, -6.0], &[6.0, 6.0], 12.0 / 192.0)?;
    let rep2 = critical_covering(&CriticalRadius::inverse_distance(), &lat2, &sigma_ladder)?;
    println!(
        "\nsame rho on [-6,6]^2: {} centers, covered = {}, N1 = {:.3}",
        rep2.centers.len(),
        rep2.covered,
        rep2.n1_fit
    );
    Ok(())
}
