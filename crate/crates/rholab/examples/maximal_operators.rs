//! The penalized maximal operator and its relatives: reduction to the
//! classical operator at zero penalty, monotonicity in the penalty, the
//! minimal operator, the dyadic variant, and the subcritical/supercritical
//! split with its measured comparability constant.

use rholab::lattice::{maximal_ladder, CubeFamily, Lattice, LatticeField, WeightField};
use rholab::maximal::{dyadic_maximal, glob_loc_split, m_rho_sigma, minimal_m};
use rholab::rho::CriticalRadius;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lat = Lattice::closed_box(&[-4.0], &[4.0], 8.0 / 256.0)?;
    let family = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, 8.0))?;
    println!(
        "family: {} cubes (singleton scale through box scale)",
        family.len()
    );
    let f = LatticeField::from_fn(&lat, |p| {
        if p.coords()[0].abs() <= 1.0 {
            1.0
        } else {
            0.0
        }
    })?;
    let rho = CriticalRadius::inverse_distance();

    let m0 = m_rho_sigma(&f, &rho, 0.0, &family)?;
    let m1 = m_rho_sigma(&f, &rho, 1.0, &family)?;
    let m4 = m_rho_sigma(&f, &rho, 4.0, &family)?;
    let mn = minimal_m(&f, &rho, 1.0, &family)?;
    println!("\n  x       M^0 f    M^1 f    M^4 f    minimal");
    for i in (0..lat.len()).step_by(32) {
        println!(
            "  {:>5.2}   {:.4}   {:.4}   {:.4}   {:.4}",
            lat.point(i).coords()[0],
            m0.value(i).unwrap(),
            m1.value(i).unwrap(),
            m4.value(i).unwrap(),
            mn.value(i).unwrap()
        );
    }

    let split = glob_loc_split(&f, &rho, 1.0, &family)?;
    println!(
        "\nsplit at r <= rho(center): local part empty = {}, global part empty = {}",
        split.loc_empty, split.glob_empty
    );
    println!(
        "pointwise M <= loc + glob holds up to {:.2e}; max(loc,glob)/M <= {:.4} (theory allows 2^sigma = 2)",
        split.upper_slack - 1.0,
        split.comparability
    );

    // weighted dyadic maximal on the box tree
    let w = WeightField::from_fn(&lat, |p| 1.0 + p.coords()[0].abs())?;
    let root = lat.bounding_cube()?;
    let dy = dyadic_maximal(&f, &root, Some(&w), None)?;
    let dy0 = dyadic_maximal(&f, &root, Some(&w), Some(0))?;
    println!(
        "\nweighted dyadic maximal at x = 0: {:.4} (depth 0 gives the root average {:.4})",
        dy.value(lat.len() / 2).unwrap(),
        dy0.value(lat.len() / 2).unwrap()
    );
    Ok(())
}
