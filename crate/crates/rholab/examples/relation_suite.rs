//! Runs the weight-class relation suite on the standard one-dimensional
//! bench: rho = 1/(1+|x|) on [-10, 10] with the singular / slowly-growing
//! weight quartet, and prints one verdict line per relation.

use rholab::weights::{relation_suite, RelationBench};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let start = std::time::Instant::now();
    let bench = RelationBench::standard(256);
    let report = relation_suite(&bench)?;
    println!("relation suite on the standard bench (n0 = 256, 3 refinement levels)\n");
    for c in &report.checks {
        println!(
            "{:4} {:?}  lhs = {:.6e}  rhs = {:.6e}  -- {}",
            c.id, c.verdict, c.lhs_constant, c.rhs_constant, c.description
        );
        println!("      {}", c.note);
    }
    println!(
        "\nall pass: {} ({:.1} s)",
        report.all_pass(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
