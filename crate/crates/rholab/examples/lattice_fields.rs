//! The quadrature substrate: lattices, cubes, weighted averages, measures of
//! singular weights, and the bit-exact text serialization of sampled fields.

use rholab::lattice::{average, io, measure, Cube, Lattice, LatticeField, WeightField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // plain and weighted averages against closed forms
    let lat = Lattice::midpoint_box(&[0.0], &[1.0], 1024)?;
    let f = LatticeField::from_fn(&lat, |p| p.coords()[0] * p.coords()[0])?;
    let w = WeightField::from_fn(&lat, |p| p.coords()[0])?;
    let q = Cube::from_corners(&[0.0], &[1.0])?;
    println!(
        "avg of x^2 on [0,1]            = {:.6}   (exact 1/3)",
        average(&f, &q, None)?
    );
    println!(
        "x-weighted avg of x^2 on [0,1] = {:.6}   (exact 1/2)",
        average(&f, &q, Some(&w))?
    );

    // measure of a singular weight on an offset lattice
    let lat2 = Lattice::midpoint_box(&[-1.0], &[1.0], 2048)?;
    let sing = WeightField::from_fn(&lat2, |p| p.coords()[0].abs().powf(-0.5))?;
    println!(
        "integral of |x|^-1/2 on [-1,1] = {:.4}   (exact 4)",
        measure(&sing, |_| true)
    );

    // serialization round-trip is bit-exact
    let text = io::to_text(&f);
    let back = io::from_text(&text)?;
    let exact = f
        .samples()
        .iter()
        .zip(back.samples())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!(
        "text round-trip of {} samples bit-exact: {exact}",
        f.samples().len()
    );
    println!("\nfirst lines of the format:");
    for line in text.lines().take(7) {
        println!("  {line}");
    }
    Ok(())
}
