//! Degree-8 expansion of the Ishigami function: moments, total Sobol
//! indices and a 95% interval, next to the analytic values.

use std::f64::consts::PI;

use chargeuq::inputs::{sample_standard, Design, Distribution, ParameterSpace, UncertainParameter};
use chargeuq::orthopoly::BasisSet;
use chargeuq::pce::{fit_least_squares, moments, sobol_total, surrogate_quantiles};

fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin()
}

fn main() -> chargeuq::Result<()> {
    let params = ["x1", "x2", "x3"]
        .iter()
        .map(|n| UncertainParameter::new(n, "-", 0.0, Distribution::uniform(-PI, PI)?))
        .collect::<chargeuq::Result<Vec<_>>>()?;
    let space = ParameterSpace::new(params)?;
    let samples = sample_standard(&space, 1000, 1, Design::LatinHypercube)?;
    let y: Vec<f64> = samples.to_physical(&space)?.rows().map(ishigami).collect();
    let basis = BasisSet::total_degree(space.families(), 8)?;
    let model = fit_least_squares(&samples, &y, &basis, 0.2)?;

    let m = moments(&model);
    let var = 49.0 / 8.0 + 0.1 * PI.powi(4) / 5.0 + 0.01 * PI.powi(8) / 18.0 + 0.5;
    let v1 = 0.5 * (1.0 + 0.1 * PI.powi(4) / 5.0).powi(2);
    let v13 = 0.01 * PI.powi(8) * (1.0 / 18.0 - 1.0 / 50.0);
    println!("P = {}, validation R2 = {:?}", basis.cardinality(), model.r_squared);
    println!("mean {:.4} (exact 3.5), std {:.4} (exact {:.4})", m.mean, m.std, var.sqrt());
    let exact = [(v1 + v13) / var, 49.0 / 8.0 / var, v13 / var];
    for ((name, s), e) in sobol_total(&model)?.iter().zip(exact) {
        println!("S_T[{name}] = {s:.4} (exact {e:.4})");
    }
    let ci = surrogate_quantiles(&model, &space, 0.95, 10_000, 7)?;
    println!("95% interval [{:.3}, {:.3}], normal approximation [{:.3}, {:.3}]", ci.lower, ci.upper, ci.normal_lower, ci.normal_upper);
    Ok(())
}
