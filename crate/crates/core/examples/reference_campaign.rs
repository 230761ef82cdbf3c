//! Surrogate campaign on the screened 11-parameter space at the fast
//! protocol, written to `target/reference_campaign/`.

use std::path::Path;

use chargeuq::battery::{Protocol, Qoi};
use chargeuq::inputs::{build_reference_space, SCREENED_REFERENCE_NAMES};
use chargeuq::pipeline::{export, run_campaign, violation_probability, BatteryModel, CampaignConfig, Constraint};

fn main() -> chargeuq::Result<()> {
    env_logger::init();
    let protocol = std::env::args()
        .nth(1)
        .map_or(Protocol::fast(), |a| if a == "moderate" { Protocol::moderate() } else { Protocol::fast() });
    let space = build_reference_space().restrict(&SCREENED_REFERENCE_NAMES)?;
    let cfg = CampaignConfig::new(space, protocol.clone());
    let result = run_campaign(&cfg, &BatteryModel::default())?;
    let vp = violation_probability(&result, &protocol)?;

    println!(
        "{:.1}C / {:.2} V: nominal switch {:?} s, end {:.1} s",
        protocol.c_rate, protocol.v_max, result.nominal.switch_time, result.nominal.end_time
    );
    println!("terminations: {:?}, failed runs: {}", result.terminations, result.failed_runs.len());
    let temp = result.qoi(Qoi::Temperature).expect("temperature channel");
    let peak = temp.nominal.iter().copied().fold(f64::MIN, f64::max);
    let above: Vec<f64> = temp
        .included()
        .filter(|p| p.ci.is_some_and(|c| c.upper > protocol.t_max))
        .map(|p| p.time)
        .collect();
    println!(
        "nominal peak {peak:.2} K; CI upper bound above {} K at {} points ({:?} .. {:?} s)",
        protocol.t_max,
        above.len(),
        above.first(),
        above.last()
    );
    for q in &result.qois {
        println!("{}: {} of {} points gated out", q.qoi.name(), q.excluded_count(), q.points.len());
    }
    for c in Constraint::ALL {
        if let Some(s) = vp.get(c) {
            println!("max P({} violated) = {:.4} at {} s", c.name(), s.max, s.max_time);
        }
    }
    println!("screened: {:?}", result.screened);
    println!("timing: {:?}", result.timing);
    let dir = Path::new("target").join("reference_campaign");
    export::write_bundle(&result, Some(&vp), &dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
