//! Iterative construction of weights with small adapted one-weight constant:
//! summing scaled iterates of the penalized maximal operator tames even a
//! nearly-degenerate indicator weight down to constant about two.

use rholab::lattice::{maximal_ladder, CubeFamily, Lattice, LatticeField, WeightField};
use rholab::rho::CriticalRadius;
use rholab::weights::{a1_constant, rubio_de_francia_a1};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lat = Lattice::midpoint_box(&[0.0], &[1.0], 512)?;
    let family = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, 1.0))?;
    let rho = CriticalRadius::classical();

    let w = WeightField::new(LatticeField::from_fn(&lat, |p| {
        if p.coords()[0] <= 0.25 {
            1.0 + 1e-3
        } else {
            1e-3
        }
    })?)?;
    let before = a1_constant(&w, None, 0.0, &rho, &family)?.value;
    println!("input weight (indicator + 1e-3): A_1 constant = {before:.1}");

    for k in [4usize, 8, 16] {
        let built = rubio_de_francia_a1(&w, &rho, 0.0, k, &family)?;
        let after = a1_constant(&built, None, 0.0, &rho, &family)?.value;
        let dominates = (0..lat.len()).all(|i| built.get(i) >= w.get(i));
        println!("built with {k:>2} iterations: A_1 constant = {after:.4}  (>= input pointwise: {dominates})");
    }

    // with the adapted penalty and a varying critical radius
    let rho = CriticalRadius::inverse_distance();
    let built = rubio_de_francia_a1(&w, &rho, 1.0, 12, &family)?;
    let after = a1_constant(&built, None, 1.0, &rho, &family)?.value;
    println!("adapted (theta = 1) builder: constant = {after:.4}");
    Ok(())
}
