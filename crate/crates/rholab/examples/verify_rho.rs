//! Falsification test of the two-sided variation bound for three radius
//! functions: a constant, the slowly varying 1/(1+|x|), and the rapidly
//! growing exp(|x|^2) which no admissible constant can tame.

use rholab::rho::{verify_variation, CriticalRadius, VariationSampling};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sampling = VariationSampling::default();
    let cases = [
        (CriticalRadius::constant(2.0), [-10.0], [10.0]),
        (CriticalRadius::inverse_distance(), [-10.0], [10.0]),
        (CriticalRadius::gaussian_growth(), [-3.0], [3.0]),
    ];
    for (rho, low, high) in cases {
        let rep = verify_variation(&rho, &low, &high, &sampling)?;
        println!(
            "{:12}  C0 = {:>12.4}  N0 = {}  satisfied = {:5}  ({} pairs, cap {})",
            rho.label, rep.c0_fit, rep.n0_fit, rep.satisfied, rep.pairs_checked, rep.c0_cap
        );
        println!(
            "              worst pair: x = {:?}, y = {:?}",
            rep.worst_pair.0.coords(),
            rep.worst_pair.1.coords()
        );
    }

    // scaling by gamma <= 1 never worsens the fitted constant
    let rho = CriticalRadius::inverse_distance();
    let base = verify_variation(&rho, &[-10.0], &[10.0], &sampling)?;
    let half = verify_variation(&rho.scaled(0.5)?, &[-10.0], &[10.0], &sampling)?;
    println!(
        "\nscaling: C0(rho) = {:.6}, C0(rho/2) = {:.6} (never larger)",
        base.c0_fit, half.c0_fit
    );
    Ok(())
}
