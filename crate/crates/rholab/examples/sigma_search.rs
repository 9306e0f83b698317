//! Search over the dyadic penalty-exponent ladder for the smallest sigma
//! whose mixed sweep is refinement-stable, after the hypothesis pre-check.

use rholab::sweep::{
    sigma_search, ExperimentConfig, FieldSpec, HypothesisProfile, LatticeSpec, OperatorSpec,
    RefinementMode, RhoSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        label: "sigma search".into(),
        rho: RhoSpec::InverseDistance,
        u: FieldSpec::PowerOnePlus { exponent: 0.3 },
        v: FieldSpec::PowerOnePlus { exponent: 0.2 },
        f: FieldSpec::Indicator { lo: -1.0, hi: 1.0 },
        operator: OperatorSpec::MaximalRhoSigma { sigma: 0.0 },
        lattice: LatticeSpec {
            low: vec![-10.0],
            high: vec![10.0],
            points_per_axis: 512,
            offset: false,
        },
        t_steps: 24,
        profile: HypothesisProfile::Maximal,
        refine_levels: 1,
        refinement: RefinementMode::HalveSpacing,
        seed: 7,
        override_precheck: false,
    };
    let (sigma, rec) = sigma_search(&cfg)?;
    println!("sigma* = {sigma:?}");
    println!(
        "sup ratios by level: {:?}  drift {:.4}",
        rec.sup_ratio_by_level, rec.refinement_drift
    );
    if let Some(pre) = &rec.precheck {
        println!("pre-checks:");
        for item in &pre.items {
            println!(
                "  {:24} stable = {:5}  theta = {:?}  constants {:?}",
                item.name, item.stable, item.theta, item.constants
            );
        }
    }
    println!("\nladder rows at the finest level:");
    println!("  t            uv(level set)  ratio");
    for row in rec.rows.iter().step_by(3) {
        println!("  {:<11.4e}  {:<13.6}  {:.6}", row.t, row.lhs, row.ratio);
    }
    Ok(())
}
