//! Nominal CC-CV charges at the two reference protocols.

use chargeuq::battery::{nominal_cell, simulate_cccv, violation_check, Protocol, SolverOptions};

fn main() -> chargeuq::Result<()> {
    let cell = nominal_cell();
    let opts = SolverOptions::default();
    for protocol in [Protocol::fast(), Protocol::moderate()] {
        let start = std::time::Instant::now();
        let r = simulate_cccv(&cell, &protocol, &opts)?;
        let peak = r.series.iter().map(|s| s.temperature).fold(f64::MIN, f64::max);
        let min_eta = r.series.iter().map(|s| s.eta_pl).fold(f64::MAX, f64::min);
        println!(
            "{:.1}C / {:.2} V: switch {:?} s, end {:.1} s ({}), peak T {:.2} K, min eta_pl {:.4} V, {:.2?}",
            protocol.c_rate,
            protocol.v_max,
            r.switch_time.map(|t| (t * 10.0).round() / 10.0),
            r.end_time,
            r.termination.label(),
            peak,
            min_eta,
            start.elapsed()
        );
        println!("  violations: {:?}", violation_check(&r, &protocol));
    }
    Ok(())
}
