//! Plain Monte Carlo over the 24-parameter space: empirical 95% bands and
//! per-time histograms. Pass the run count as the first argument.

use chargeuq::battery::{Protocol, Qoi};
use chargeuq::inputs::build_reference_space;
use chargeuq::pipeline::{run_mc_baseline, BatteryModel, CampaignConfig};

fn main() -> chargeuq::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(500);
    let cfg = CampaignConfig::new(build_reference_space(), Protocol::fast());
    let mc = run_mc_baseline(&cfg, runs, &BatteryModel::default())?;
    println!("{} runs in {:.2} s, terminations {:?}", mc.n_runs, mc.seconds, mc.terminations);
    let t = mc.qoi(Qoi::Temperature).expect("temperature channel");
    for k in (0..mc.times.len()).step_by(15) {
        println!(
            "t = {:5.0} s: median {:.2} K, band [{:.2}, {:.2}], histogram {:?}",
            mc.times[k], t.median[k], t.lower[k], t.upper[k], t.histograms[k].counts
        );
    }
    Ok(())
}
