//! Kernel condition checks: pointwise and annulus-integral size and
//! smoothness fits for the built-in kernels, truncated kernel application
//! with odd-kernel cancellation, and the exponent tables tying potentials to
//! operator types.

use rholab::kernels::{
    apply_kernel, check_size_ls, check_size_pointwise, check_smoothness_ls,
    check_smoothness_pointwise, exponent_table, AnnulusSampling, Kernel, PairSampling,
    TripleSampling,
};
use rholab::lattice::{Lattice, LatticeField};
use rholab::rho::CriticalRadius;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho = CriticalRadius::inverse_distance();
    let pairs = PairSampling {
        low: vec![-4.0],
        high: vec![4.0],
        count: 1000,
        seed: 7,
        min_separation: 1e-3,
    };
    let triples = TripleSampling {
        low: vec![-4.0],
        high: vec![4.0],
        count: 1000,
        seed: 8,
        min_scale: 1e-4,
    };
    let annuli = AnnulusSampling {
        low: vec![-2.0],
        high: vec![2.0],
        r_ladder: vec![0.25, 0.5, 1.0],
        centers: 4,
        tests_per_annulus: 3,
        grid_per_axis: 512,
        seed: 9,
    };

    println!("kernel                    size(N=2)    smooth(d=1)  size_s2(N=4)  smooth_s2");
    for kernel in [
        Kernel::surrogate(1, 4.0, rho.clone()),
        Kernel::power_decay(1, 4.0, rho.clone()),
        Kernel::riesz_classical(1),
        Kernel::gaussian(),
        Kernel::x_only(),
        Kernel::zero(),
    ] {
        let size = check_size_pointwise(&kernel, 1, 2.0, &pairs)?;
        let smooth = check_smoothness_pointwise(&kernel, 1, 1.0, &triples)?;
        let size_ls = check_size_ls(&kernel, 1, 2.0, 4.0, &annuli)?;
        let smooth_ls = check_smoothness_ls(&kernel, 1, 2.0, 1.0, 0.0, &annuli)?;
        println!(
            "{:24}  {:<11.4e}  {:<11.4e}  {:<12.4e}  {:<10.4e}",
            kernel.label, size.fitted, smooth.fitted, size_ls.fitted, smooth_ls.fitted
        );
    }

    // odd-kernel cancellation under truncated application
    let lat = Lattice::closed_box(&[-1.0], &[1.0], 2.0 / 128.0)?;
    let f = LatticeField::from_fn(&lat, |p| p.coords()[0].abs())?;
    let t = apply_kernel(&Kernel::hilbert(), &f, lat.spacing())?;
    println!(
        "\ntruncated odd kernel on an even function: value at the symmetry point = {:.2e}",
        t.get(lat.len() / 2)
    );

    // exponent bookkeeping for the associated operator families
    println!("\n q    d   gamma   p0       type(2nd)  q/gamma  q_gamma");
    for (q, gamma) in [(2.0, None), (3.0, None), (4.0, Some(1.0)), (2.5, Some(0.75))] {
        let t = exponent_table(q, 3, gamma)?;
        println!(
            " {:<4} {}   {:<5}  {:<8} {:<9}  {:<7}  {:?}",
            t.q,
            t.d,
            gamma.map(|g| g.to_string()).unwrap_or_default(),
            t.p0.map(|p| format!("{p:.3}")).unwrap_or_else(|| "inf".into()),
            t.q_for_second_order,
            t.q_over_gamma.map(|p| format!("{p:.3}")).unwrap_or_default(),
            t.q_gamma
        );
    }
    Ok(())
}
