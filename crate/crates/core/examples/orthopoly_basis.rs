//! Orthonormal Hermite and Legendre values, total-degree multi-indices and
//! one design-matrix row.

use chargeuq::orthopoly::{total_degree_count, BasisSet, PolynomialFamily};

fn main() -> chargeuq::Result<()> {
    let mut he = [0.0; 5];
    let mut le = [0.0; 5];
    PolynomialFamily::HermiteProbabilists.eval_all(0.7, &mut he);
    PolynomialFamily::Legendre.eval_all(0.7, &mut le);
    println!("hermite  psi_0..4(0.7) = {he:.5?}");
    println!("legendre psi_0..4(0.7) = {le:.5?}");

    for (n, p) in [(3, 2), (11, 2), (24, 1), (24, 2)] {
        println!("n = {n:2}, p = {p}: P = {}", total_degree_count(n, p));
    }

    let basis = BasisSet::total_degree(vec![PolynomialFamily::HermiteProbabilists, PolynomialFamily::Legendre], 2)?;
    let row = basis.eval_row(&[0.5, -0.25])?;
    for (alpha, v) in basis.indices().iter().zip(&row) {
        println!("  {:?} -> {v:+.5}", alpha.degrees());
    }
    println!("{}", serde_json::to_string(&basis)?);
    Ok(())
}
