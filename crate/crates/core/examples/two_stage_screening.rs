//! Pilot campaign on all 24 parameters at degree 1, total-Sobol screening,
//! then the degree-2 campaign on the screened subspace.

use chargeuq::battery::Protocol;
use chargeuq::inputs::build_reference_space;
use chargeuq::pipeline::{run_two_stage, BatteryModel, CampaignConfig, DEFAULT_SCREEN_THRESHOLD};

fn main() -> chargeuq::Result<()> {
    env_logger::init();
    let cfg = CampaignConfig::new(build_reference_space(), Protocol::fast());
    let (pilot, main) = run_two_stage(&cfg, &BatteryModel::default(), 1, DEFAULT_SCREEN_THRESHOLD)?;
    println!(
        "pilot: {} parameters, P = {}, {:.2} s",
        pilot.parameters.len(),
        pilot.basis.cardinality(),
        pilot.timing.total
    );
    println!("screened at S_T > {DEFAULT_SCREEN_THRESHOLD}: {:?}", main.parameters);
    println!(
        "main: P = {}, {:.2} s, warnings {:?}",
        main.basis.cardinality(),
        main.timing.total,
        main.warnings
    );
    Ok(())
}
