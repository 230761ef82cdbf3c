//! Any deterministic map from parameters to QoI series can stand in for the
//! cell model. Here a two-parameter heating curve runs through the full
//! campaign, gate and violation machinery.

use std::collections::BTreeMap;

use chargeuq::battery::{Protocol, Qoi, Termination};
use chargeuq::inputs::{Distribution, ParameterSpace, UncertainParameter};
use chargeuq::pipeline::{run_campaign, violation_probability, CampaignConfig, Constraint, FnModel, ModelRun};

fn heating(p: &Protocol, _names: &[String], x: &[f64]) -> chargeuq::Result<ModelRun> {
    let (h, z) = (x[0], x[1]);
    let t: Vec<f64> = (0..=100)
        .map(|k| {
            let s = k as f64 / 100.0;
            298.15 + p.c_rate * 13.0 * s * (1.0 - 0.5 * s) / h + 1.2 * z * s
        })
        .collect();
    let mut series = BTreeMap::new();
    series.insert(Qoi::Temperature, t);
    Ok(ModelRun {
        series,
        end_time: 1000.0,
        switch_time: None,
        termination: Termination::SocReached,
    })
}

fn main() -> chargeuq::Result<()> {
    let space = ParameterSpace::new(vec![
        UncertainParameter::new("h", "-", 1.0, Distribution::uniform(0.8, 1.2)?)?,
        UncertainParameter::new("z", "-", 0.0, Distribution::gaussian(0.0, 1.0)?)?,
    ])?;
    let protocol = Protocol::fast();
    let cfg = CampaignConfig {
        n_train: 80,
        degree: 3,
        qois: vec![Qoi::Temperature],
        ..CampaignConfig::new(space, protocol.clone())
    };
    let result = run_campaign(&cfg, &FnModel(heating))?;
    let temp = result.qoi(Qoi::Temperature).expect("requested channel");
    for p in temp.points.iter().step_by(20) {
        let ci = p.ci.expect("smooth channel passes the gate");
        println!(
            "t = {:5.0} s: [{:.2}, {:.2}] K, R2 {:.5}, S_T {:.3?}",
            p.time,
            ci.lower,
            ci.upper,
            p.r_squared.unwrap_or(f64::NAN),
            p.sobol
        );
    }
    let vp = violation_probability(&result, &protocol)?;
    let s = vp.get(Constraint::Temperature).expect("temperature constraint");
    println!("max P(T >= {} K) = {:.4} at {} s", protocol.t_max, s.max, s.max_time);
    Ok(())
}
