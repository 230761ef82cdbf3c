mod support;

use chargeuq::inputs::{sample_standard, Design, Distribution, ParameterSpace, SampleMatrix, UncertainParameter};
use chargeuq::orthopoly::{BasisSet, PolynomialFamily};
use chargeuq::pce::{
    fit_least_squares, moments, sobol_total, surrogate_quantiles, PceModel, SurrogateDraws,
};
use proptest::prelude::*;

use support::explicit_expansion;

fn space_for(families: &[PolynomialFamily]) -> ParameterSpace {
    let params = families
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let dist = match f {
                PolynomialFamily::HermiteProbabilists => Distribution::gaussian(1.0, 0.5).unwrap(),
                PolynomialFamily::Legendre => Distribution::uniform(-2.0, 3.0).unwrap(),
            };
            UncertainParameter::new(&format!("x{i}"), "-", 0.0, dist).unwrap()
        })
        .collect();
    ParameterSpace::new(params).unwrap()
}

fn in_span_target(basis: &BasisSet, coefs: &[f64], samples: &SampleMatrix) -> Vec<f64> {
    let hermite: Vec<bool> = basis
        .families()
        .iter()
        .map(|f| *f == PolynomialFamily::HermiteProbabilists)
        .collect();
    let idx: Vec<&[u32]> = basis.indices().iter().map(|a| a.degrees()).collect();
    samples.rows().map(|x| explicit_expansion(&hermite, &idx, coefs, x)).collect()
}

fn families(max_dim: usize) -> impl Strategy<Value = Vec<PolynomialFamily>> {
    prop::collection::vec(
        prop_oneof![Just(PolynomialFamily::HermiteProbabilists), Just(PolynomialFamily::Legendre)],
        1..=max_dim,
    )
}

/// Families, degree and a coefficient vector sized to the basis.
fn expansion() -> impl Strategy<Value = (Vec<PolynomialFamily>, usize, Vec<f64>)> {
    (families(4), 1usize..=3).prop_flat_map(|(f, p)| {
        let n = BasisSet::total_degree(f.clone(), p).unwrap().cardinality();
        (Just(f), Just(p), prop::collection::vec(-2.0..2.0f64, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn in_span_targets_are_recovered((fams, p, coefs) in expansion(), seed in any::<u64>()) {
        let basis = BasisSet::total_degree(fams.clone(), p).unwrap();
        let space = space_for(&fams);
        let n = 3 * basis.cardinality() + 10;
        let s = sample_standard(&space, n, seed, Design::LatinHypercube).unwrap();
        let y = in_span_target(&basis, &coefs, &s);
        let m = fit_least_squares(&s, &y, &basis, 0.2).unwrap();
        for (a, b) in m.coefficients.iter().zip(&coefs) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
        prop_assert!((m.r_squared.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn scaling_outputs_scales_coefficients(
        (fams, p, coefs) in expansion(),
        c in prop_oneof![-50.0..-0.1f64, 0.1..50.0f64],
        seed in any::<u64>(),
    ) {
        let basis = BasisSet::total_degree(fams.clone(), p).unwrap();
        let space = space_for(&fams);
        let s = sample_standard(&space, 2 * basis.cardinality() + 10, seed, Design::LatinHypercube).unwrap();
        // a non-polynomial output so the fit is not exact
        let y: Vec<f64> = in_span_target(&basis, &coefs, &s)
            .iter()
            .zip(s.rows())
            .map(|(v, x)| v + (3.0 * x[0]).sin())
            .collect();
        let cy: Vec<f64> = y.iter().map(|v| c * v).collect();
        let m = fit_least_squares(&s, &y, &basis, 0.2).unwrap();
        let mc = fit_least_squares(&s, &cy, &basis, 0.2).unwrap();
        let scale = m.coefficients.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in m.coefficients.iter().zip(&mc.coefficients) {
            prop_assert!((c * a - b).abs() <= 1e-12 * c.abs() * scale.max(1.0));
        }
        let (v, vc) = (moments(&m).variance, moments(&mc).variance);
        prop_assert!((c * c * v - vc).abs() <= 1e-12 * vc.max(1e-300));
        if let (Ok(a), Ok(b)) = (sobol_total(&m), sobol_total(&mc)) {
            for (x, y) in a.indices.iter().zip(&b.indices) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantiles_are_ordered((fams, p, coefs) in expansion(), seed in any::<u64>(), level in 0.5..0.99f64) {
        let basis = BasisSet::total_degree(fams.clone(), p).unwrap();
        let m = PceModel::from_coefficients(basis, coefs, Vec::new()).unwrap();
        let ci = surrogate_quantiles(&m, &space_for(&fams), level, 500, seed).unwrap();
        prop_assert!(ci.lower <= ci.median && ci.median <= ci.upper);
        prop_assert!(ci.normal_lower <= ci.normal_upper);
        prop_assert_eq!(ci.n_eval_samples, 500);
    }

    #[test]
    fn sobol_indices_are_shares((fams, p, coefs) in expansion()) {
        let basis = BasisSet::total_degree(fams, p).unwrap();
        let m = PceModel::from_coefficients(basis, coefs, Vec::new()).unwrap();
        let s = sobol_total(&m).unwrap();
        prop_assert!(s.indices.iter().all(|&v| (-1e-15..=1.0 + 1e-12).contains(&v)));
        // totals count interactions once per member, so they sum to at least one
        prop_assert!(s.indices.iter().sum::<f64>() >= 1.0 - 1e-12);
        let mo = moments(&m);
        prop_assert!((mo.std * mo.std - mo.variance).abs() <= 1e-12 * mo.variance.max(1e-300));
    }

    #[test]
    fn additive_models_have_totals_summing_to_one(
        (fams, p, coefs) in expansion(),
    ) {
        let basis = BasisSet::total_degree(fams, p).unwrap();
        let additive: Vec<f64> = basis
            .indices()
            .iter()
            .zip(&coefs)
            .map(|(alpha, a)| if alpha.degrees().iter().filter(|&&d| d > 0).count() > 1 { 0.0 } else { *a })
            .collect();
        let m = PceModel::from_coefficients(basis, additive, Vec::new()).unwrap();
        let s = sobol_total(&m).unwrap();
        prop_assert!((s.indices.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn moments_agree_with_a_million_surrogate_draws() {
    let fams = vec![PolynomialFamily::HermiteProbabilists, PolynomialFamily::Legendre];
    let basis = BasisSet::total_degree(fams.clone(), 2).unwrap();
    let coefs = vec![1.5, 0.8, -0.6, 0.3, 0.25, -0.4];
    let m = PceModel::from_coefficients(basis.clone(), coefs, Vec::new()).unwrap();
    let mo = moments(&m);
    let n = 1_000_000;
    let draws = SurrogateDraws::new(&space_for(&fams), &basis, n, 5).unwrap();
    let v = draws.evaluate(&m.coefficients);
    let nf = n as f64;
    let mean = v.iter().sum::<f64>() / nf;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let se_mean = (var / nf).sqrt();
    let se_var = ((m4 - var * var) / nf).sqrt();
    assert!((mean - mo.mean).abs() < 3.0 * se_mean, "{mean} vs {}", mo.mean);
    assert!((var - mo.variance).abs() < 3.0 * se_var, "{var} vs {}", mo.variance);
}

#[test]
fn sobol_of_a_product_matches_closed_form() {
    // y = a x1 + b x2 + c x1 x2 on orthonormal inputs: V = a²+b²+c²
    let fams = vec![PolynomialFamily::Legendre; 2];
    let basis = BasisSet::total_degree(fams, 2).unwrap();
    let (a, b, c) = (1.0, 2.0, 0.5);
    let mut coefs = vec![0.0; basis.cardinality()];
    for (k, alpha) in basis.indices().iter().enumerate() {
        coefs[k] = match alpha.degrees() {
            [1, 0] => a,
            [0, 1] => b,
            [1, 1] => c,
            _ => 0.0,
        };
    }
    let m = PceModel::from_coefficients(basis, coefs, vec!["x1".into(), "x2".into()]).unwrap();
    let s = sobol_total(&m).unwrap();
    let v = a * a + b * b + c * c;
    assert!((s.get("x1").unwrap() - (a * a + c * c) / v).abs() < 1e-14);
    assert!((s.get("x2").unwrap() - (b * b + c * c) / v).abs() < 1e-14);
}

#[test]
fn batched_intervals_equal_single_ones() {
    let fams = vec![PolynomialFamily::Legendre, PolynomialFamily::HermiteProbabilists];
    let basis = BasisSet::total_degree(fams.clone(), 3).unwrap();
    let draws = SurrogateDraws::new(&space_for(&fams), &basis, 2000, 3).unwrap();
    let a: Vec<f64> = (0..basis.cardinality()).map(|k| (k as f64 * 0.7).sin()).collect();
    let b: Vec<f64> = (0..basis.cardinality()).map(|k| (k as f64 * 1.3).cos()).collect();
    let batch = draws.ci_batch(&[&a, &b], 0.9);
    for (ci, c) in batch.iter().zip([&a, &b]) {
        let one = draws.ci(c, 0.9);
        assert!((ci.lower - one.lower).abs() < 1e-12);
        assert!((ci.upper - one.upper).abs() < 1e-12);
        assert!((ci.median - one.median).abs() < 1e-12);
    }
}
