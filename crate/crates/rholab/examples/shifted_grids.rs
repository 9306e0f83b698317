//! The 3^d shifted dyadic grids: all cells have dyadic sides, levels nest,
//! and every cube is enclosed by a cell of at most three times its side in
//! at least one grid.

use rholab::config::grids_self_check;
use rholab::dyadic::ShiftedGrids;
use rholab::lattice::{Cube, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for d in 1..=3usize {
        let grids = ShiftedGrids::new(d)?;
        println!("d = {d}: {} grids, shifts in {{0, 1/3, 2/3}}^d", grids.count());
        let (n, worst) = grids_self_check(d, 1000, 42 + d as u64)?;
        println!("  {n} random cubes enclosed, worst side ratio {worst:.4} (bound 3)");
    }

    // a concrete interval and its enclosing cell in each level
    let grids = ShiftedGrids::new(1)?;
    let q = Cube::from_corners(&[0.1], &[0.6])?;
    let (g, q0) = grids.enclosing(&q)?;
    println!(
        "\n[0.1, 0.6] is enclosed by grid {g} (shift {:?}) in [{:.4}, {:.4}], side {:.4}",
        grids.shift(g),
        q0.min_corner().coords()[0],
        q0.max_corner().coords()[0],
        q0.side()
    );

    // towers are nested
    let p = Point::new(&[0.37])?;
    print!("tower of x = 0.37 in grid {g}, levels 0..-4: sides");
    for level in (-4..=0).rev() {
        let cell = grids.cell_of(g, level, &p);
        print!(" {:.4}", grids.geometry(&cell).side());
    }
    println!();
    Ok(())
}
