//! Grid search over C-rate and voltage limit for the fastest protocol whose
//! violation probability stays below epsilon.

use chargeuq::battery::Protocol;
use chargeuq::inputs::{build_reference_space, SCREENED_REFERENCE_NAMES};
use chargeuq::pipeline::{tune_protocol, BatteryModel, CampaignConfig, TuneGrid};

fn main() -> chargeuq::Result<()> {
    env_logger::init();
    let eps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.05);
    // the degradation threshold stays at 4.1 V while the switching voltage moves
    let base = Protocol {
        v_limit: Some(4.1),
        ..Protocol::fast()
    };
    let space = build_reference_space().restrict(&SCREENED_REFERENCE_NAMES)?;
    let cfg = CampaignConfig::new(space, base.clone());
    let grid = TuneGrid::product(&[2.0, 2.2], &[4.08, 4.1]);
    let report = tune_protocol(&base, eps, &grid, &cfg, &BatteryModel::default(), true)?;
    for c in &report.candidates {
        println!(
            "{:.1}C / {:.2} V: max P {:.4?} ({:?}), nominal end {:.1?} s",
            c.c_rate, c.v_max, c.max_probability, c.worst, c.nominal_end_time
        );
    }
    match report.selected_protocol {
        Some(p) => println!("selected {:.1}C / {:.2} V", p.c_rate, p.v_max),
        None => println!("nothing below {eps}"),
    }
    Ok(())
}
