//! Latin-hypercube design over the 24-parameter reference space, mapped to
//! physical values and written as CSV to stdout.

use chargeuq::inputs::{build_reference_space, sample_standard, Design};

fn main() -> chargeuq::Result<()> {
    let space = build_reference_space();
    for p in space.params() {
        eprintln!("{:8} {:>10} {:?}", p.name, p.unit, p.dist);
    }
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let standard = sample_standard(&space, n, 42, Design::LatinHypercube)?;
    let physical = standard.to_physical(&space)?;
    eprintln!("{} rows, {} redraws", physical.n_rows(), physical.redraws);
    physical.write_csv(std::io::stdout().lock())
}
