//! Wall-clock of a 300-run surrogate campaign on the screened space against
//! a 3000-run Monte Carlo baseline on the full space.

use chargeuq::battery::Protocol;
use chargeuq::inputs::{build_reference_space, SCREENED_REFERENCE_NAMES};
use chargeuq::pipeline::{compare_budget, run_campaign, run_mc_baseline, BatteryModel, CampaignConfig, DEFAULT_MC_RUNS};

fn main() -> chargeuq::Result<()> {
    let full = build_reference_space();
    let model = BatteryModel::default();
    let pce = run_campaign(
        &CampaignConfig::new(full.restrict(&SCREENED_REFERENCE_NAMES)?, Protocol::fast()),
        &model,
    )?;
    let mc = run_mc_baseline(&CampaignConfig::new(full, Protocol::fast()), DEFAULT_MC_RUNS, &model)?;
    let b = compare_budget(&pce, &mc);
    println!("{}", serde_json::to_string_pretty(&b)?);
    Ok(())
}
