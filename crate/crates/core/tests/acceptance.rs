//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Extra arguments filter criteria by number or name.

mod support;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use chargeuq::battery::{
    nominal_cell, simulate_cccv, violation_check, CellParameters, Phase, Protocol, Qoi, SimResult, SolverOptions,
    Termination,
};
use chargeuq::inputs::{build_reference_space, sample_standard, Design, Distribution, ParameterSpace, UncertainParameter};
use chargeuq::orthopoly::{total_degree_count, total_degree_indices, BasisSet, PolynomialFamily};
use chargeuq::pce::{fit_least_squares, moments, sobol_total};
use chargeuq::pipeline::{
    compare_budget, export, run_campaign, run_mc_baseline, tune_protocol, violation_probability, BatteryModel,
    CampaignConfig, CampaignResult, FileConfig, FnModel, ModelRun, TuneGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use support::models::hash01;
use support::{binomial_table, explicit_expansion, gauss_rule, ishigami, normal_cdf, qmc_reference};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: f64, limit: f64) -> bool {
    elapsed < limit
}

fn config(name: &str) -> FileConfig {
    FileConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)).expect("shipped config")
}

fn basis_orthonormality() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for fam in [PolynomialFamily::HermiteProbabilists, PolynomialFamily::Legendre] {
        let (x, w) = gauss_rule(fam == PolynomialFamily::HermiteProbabilists, 64);
        let mut vals = vec![[0.0; 11]; x.len()];
        for (v, &xi) in vals.iter_mut().zip(&x) {
            fam.eval_all(xi, v);
        }
        for i in 0..=10 {
            for j in 0..=10 {
                let g: f64 = vals.iter().zip(&w).map(|(v, wk)| wk * v[i] * v[j]).sum();
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    let t = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-10 && within(t, 1.0),
        format!("max |<psi_i,psi_j> - delta_ij| = {worst:.2e} over 64-node rules, {t:.3} s"),
    )
}

fn cardinality() -> Verdict {
    let start = Instant::now();
    let pascal = binomial_table(20);
    let mut bad = Vec::new();
    for n in 1..=10 {
        for p in 0..=5 {
            let enumerated = total_degree_indices(n, p).unwrap().len() as u128;
            if enumerated != pascal[n + p][p] || total_degree_count(n, p) != pascal[n + p][p] {
                bad.push((n, p));
            }
        }
    }
    let p11 = total_degree_indices(11, 2).unwrap().len();
    let t = start.elapsed().as_secs_f64();
    verdict(
        bad.is_empty() && p11 == 78 && within(t, 1.0),
        format!("60 (n, p) pairs checked, mismatches {bad:?}; n=11, p=2 gives {p11}; {t:.3} s"),
    )
}

fn exact_recovery() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut coef_err, mut r2_err): (f64, f64) = (0.0, 0.0);
    for case in 0..20 {
        let dim = rng.random_range(1..=5);
        let hermite: Vec<bool> = (0..dim).map(|_| rng.random_bool(0.5)).collect();
        let p = rng.random_range(1..=4);
        let params = hermite
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let d = if h {
                    Distribution::gaussian(0.0, 2.0).unwrap()
                } else {
                    Distribution::uniform(-3.0, 1.0).unwrap()
                };
                UncertainParameter::new(&format!("x{i}"), "-", 0.0, d).unwrap()
            })
            .collect();
        let space = ParameterSpace::new(params).unwrap();
        let basis = BasisSet::total_degree(space.families(), p).unwrap();
        let coefs: Vec<f64> = (0..basis.cardinality()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let samples = sample_standard(&space, 2 * basis.cardinality() + 20, case, Design::LatinHypercube).unwrap();
        let idx: Vec<&[u32]> = basis.indices().iter().map(|a| a.degrees()).collect();
        let y: Vec<f64> = samples.rows().map(|x| explicit_expansion(&hermite, &idx, &coefs, x)).collect();
        let m = fit_least_squares(&samples, &y, &basis, 0.2).unwrap();
        for (a, b) in m.coefficients.iter().zip(&coefs) {
            coef_err = coef_err.max((a - b).abs());
        }
        r2_err = r2_err.max((m.r_squared.unwrap_or(f64::NAN) - 1.0).abs());
    }
    let t = start.elapsed().as_secs_f64();
    verdict(
        coef_err < 1e-9 && r2_err < 1e-8 && within(t, 10.0),
        format!("20 cases: max coefficient error {coef_err:.2e}, max |R2 - 1| {r2_err:.2e}, {t:.2} s"),
    )
}

fn moment_sobol_oracle() -> Verdict {
    let start = Instant::now();
    let params = (1..=3)
        .map(|i| UncertainParameter::new(&format!("x{i}"), "-", 0.0, Distribution::uniform(-PI, PI).unwrap()).unwrap())
        .collect();
    let space = ParameterSpace::new(params).unwrap();
    let samples = sample_standard(&space, 1000, 8, Design::LatinHypercube).unwrap();
    let y: Vec<f64> = samples.to_physical(&space).unwrap().rows().map(ishigami).collect();
    let basis = BasisSet::total_degree(space.families(), 8).unwrap();
    let model = fit_least_squares(&samples, &y, &basis, 0.2).unwrap();
    let mo = moments(&model);
    let s = sobol_total(&model).unwrap();

    let reference = qmc_reference(
        ishigami,
        |u, x| {
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi = -PI + 2.0 * PI * ui;
            }
        },
        3,
        1_000_000,
    );
    let mean_err = (mo.mean - reference.mean).abs() / reference.mean.abs();
    let std_err = (mo.std - reference.std).abs() / reference.std;
    let sobol_err = s
        .indices
        .iter()
        .zip(&reference.total)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let t = start.elapsed().as_secs_f64();
    verdict(
        mean_err < 0.01 && std_err < 0.05 && sobol_err < 0.02 && within(t, 120.0),
        format!(
            "mean {:.4} vs {:.4} ({:.2}%), std {:.4} vs {:.4} ({:.2}%), S_T {:?} vs {:?} (max diff {sobol_err:.4}), {t:.2} s",
            mo.mean,
            reference.mean,
            100.0 * mean_err,
            mo.std,
            reference.std,
            100.0 * std_err,
            s.indices.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>(),
            reference.total.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>(),
        ),
    )
}

fn coulomb_gap(r: &SimResult, cell: &CellParameters, protocol: &Protocol) -> f64 {
    let dsoc = r.final_sample.soc - protocol.soc_start;
    let counted = r.integrated_charge() / (3600.0 * cell.constants.capacity);
    (dsoc - counted).abs() / dsoc
}

fn simulator_conservation() -> Verdict {
    let opts = SolverOptions {
        record_steps: true,
        ..SolverOptions::default()
    };
    let mut cases: Vec<(CellParameters, Protocol)> = vec![
        (nominal_cell(), Protocol::fast()),
        (nominal_cell(), Protocol::moderate()),
        (nominal_cell(), Protocol { c_rate: 1.5, ..Protocol::fast() }),
        (nominal_cell(), Protocol { c_rate: 1.8, ..Protocol::fast() }),
    ];
    let space = build_reference_space();
    let s = sample_standard(&space, 8, 5, Design::LatinHypercube).unwrap().to_physical(&space).unwrap();
    for row in s.rows() {
        cases.push((CellParameters::with_overrides(&space.names(), row).unwrap(), Protocol::fast()));
    }
    let (mut gap, mut track, mut slowest): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut identical = true;
    let mut tally = std::collections::BTreeMap::new();
    for (cell, p) in &cases {
        let start = Instant::now();
        let r = simulate_cccv(cell, p, &opts).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        identical &= simulate_cccv(cell, p, &opts).unwrap() == r;
        *tally.entry(r.termination.label()).or_insert(0) += 1;
        if r.termination == Termination::SolverFailure {
            continue;
        }
        gap = gap.max(coulomb_gap(&r, cell, p));
        for st in r.steps.iter().filter(|st| st.phase == Phase::Cv) {
            track = track.max((st.voltage - p.v_max).abs());
        }
    }
    verdict(
        gap < 1e-3 && track < 1e-4 && identical && slowest < 5.0,
        format!(
            "{} runs {tally:?}: coulomb gap {:.2e}, CV deviation {track:.2e} V, bit-identical {identical}, slowest {slowest:.3} s",
            cases.len(),
            gap
        ),
    )
}

fn peak_temperature(r: &SimResult) -> f64 {
    r.series.iter().map(|s| s.temperature).fold(f64::MIN, f64::max)
}

/// Retained-point extremes: (max upper V, max upper T, min lower eta).
fn ci_extremes(r: &CampaignResult) -> (f64, f64, f64) {
    let fold = |q: Qoi, f: &dyn Fn(&chargeuq::pce::CiBound) -> f64, max: bool| {
        r.qoi(q)
            .unwrap()
            .included()
            .filter_map(|p| p.ci.as_ref().map(f))
            .fold(if max { f64::MIN } else { f64::MAX }, |a, b| if max { a.max(b) } else { a.min(b) })
    };
    (
        fold(Qoi::Voltage, &|c| c.upper, true),
        fold(Qoi::Temperature, &|c| c.upper, true),
        fold(Qoi::EtaPl, &|c| c.lower, false),
    )
}

fn qualitative_reproduction() -> Verdict {
    let start = Instant::now();
    let fast_cfg = config("reference.toml");
    let nominal = simulate_cccv(&nominal_cell(), &fast_cfg.protocol, &fast_cfg.solver).unwrap();
    let sw = nominal.switch_time.unwrap_or(f64::NAN);
    let a = (sw - 711.2).abs() <= 0.15 * 711.2 && (nominal.end_time - 1086.2).abs() <= 0.15 * 1086.2;

    let fast = run_campaign(&fast_cfg.campaign().unwrap(), &BatteryModel::new(fast_cfg.solver.clone())).unwrap();
    let peak = peak_temperature(&nominal);
    let t_max = fast_cfg.protocol.t_max;
    let temps = fast.qoi(Qoi::Temperature).unwrap();
    let above: Vec<f64> = temps
        .points
        .iter()
        .filter(|p| p.time <= nominal.end_time && p.ci.is_some_and(|c| c.upper > t_max))
        .map(|p| p.time)
        .collect();
    let b = peak < t_max && !above.is_empty();

    let mod_cfg = config("moderate.json");
    let moderate = run_campaign(&mod_cfg.campaign().unwrap(), &BatteryModel::new(mod_cfg.solver.clone())).unwrap();
    let mod_nominal = simulate_cccv(&nominal_cell(), &mod_cfg.protocol, &mod_cfg.solver).unwrap();
    let (v_hi, t_hi, eta_lo) = ci_extremes(&moderate);
    let limit = mod_cfg.protocol.voltage_limit();
    let p_mod = violation_probability(&moderate, &mod_cfg.protocol).unwrap();
    let c = v_hi <= limit + 1e-4
        && t_hi < mod_cfg.protocol.t_max
        && eta_lo > mod_cfg.protocol.eta_min
        && !violation_check(&mod_nominal, &mod_cfg.protocol).any()
        && moderate.nominal.end_time > fast.nominal.end_time;
    let t = start.elapsed().as_secs_f64();
    let window = match (above.first(), above.last()) {
        (Some(lo), Some(hi)) => format!("{lo:.0}-{hi:.0} s"),
        _ => "none".into(),
    };
    verdict(
        a && b && c && within(t, 1800.0),
        format!(
            "(a) switch {sw:.1} s, end {:.1} s [{}]; (b) nominal peak {peak:.2} K, CI upper above {t_max} K in {window} during charge [{}]; \
             (c) 2.0C/4.08 V CI max V {v_hi:.4}, max T {t_hi:.2} K, min eta {eta_lo:.4} V, max P {:.4}, end {:.1} vs {:.1} s [{}]; {t:.1} s",
            nominal.end_time,
            if a { "ok" } else { "off" },
            if b { "ok" } else { "off" },
            p_mod.max,
            moderate.nominal.end_time,
            fast.nominal.end_time,
            if c { "ok" } else { "off" },
        ),
    )
}

fn budget_ratio() -> Verdict {
    let cfg = config("reference.toml");
    let model = BatteryModel::new(cfg.solver.clone());
    let pce = run_campaign(&cfg.campaign().unwrap(), &model).unwrap();
    let mc = run_mc_baseline(&cfg.mc_campaign().unwrap(), 3000, &model).unwrap();
    let b = compare_budget(&pce, &mc);
    verdict(
        b.ratio <= 0.2 && b.pce_dimension == 11 && b.mc_dimension == 24 && b.pce_surrogate_evaluations == 10_000,
        format!(
            "surrogate {:.2} s ({} runs, {} parameters, P = {}) vs Monte Carlo {:.2} s ({} runs, {} parameters): ratio {:.3}",
            b.pce_seconds, b.pce_simulations, b.pce_dimension, b.pce_terms, b.mc_seconds, b.mc_simulations, b.mc_dimension, b.ratio
        ),
    )
}

fn noise_run(_: &Protocol, _: &[String], x: &[f64]) -> chargeuq::Result<ModelRun> {
    let mut series = std::collections::BTreeMap::new();
    for (salt, q) in Qoi::ALL.into_iter().enumerate() {
        let s = (0..121).map(|k| hash01(x, (salt * 1000 + k) as u64)).collect();
        series.insert(q, s);
    }
    Ok(ModelRun {
        series,
        end_time: 1200.0,
        switch_time: None,
        termination: Termination::SocReached,
    })
}

fn gate_discipline() -> Verdict {
    let start = Instant::now();
    let cfg = config("reference.toml").campaign().unwrap();
    let r = run_campaign(&cfg, &FnModel(noise_run)).unwrap();
    let (mut gated, mut total, mut leaked) = (0, 0, 0);
    for q in &r.qois {
        for p in &q.points {
            total += 1;
            if p.r_squared.is_none_or(|v| v < 0.8) {
                gated += 1;
            }
            if p.excluded && (p.ci.is_some() || p.sobol.is_some() || p.moments.is_some()) {
                leaked += 1;
            }
        }
    }
    let dir = std::env::temp_dir().join(format!("chargeuq-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut blank_rows = true;
    for path in export::write_qoi_csvs(&r, &dir).unwrap() {
        let mut rd = csv::Reader::from_path(path).unwrap();
        for rec in rd.records() {
            let rec = rec.unwrap();
            if &rec[5] == "1" {
                blank_rows &= rec[2].is_empty() && rec[3].is_empty();
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    let share = gated as f64 / total as f64;
    let t = start.elapsed().as_secs_f64();
    verdict(
        share >= 0.95 && leaked == 0 && blank_rows && within(t, 300.0),
        format!(
            "{gated}/{total} points below R2 0.8 ({:.1}%), {leaked} gated points with CI/Sobol, blank CSV bounds {blank_rows}, {t:.2} s",
            100.0 * share
        ),
    )
}

const SIGMA: f64 = 1.5;

fn peak_of(p: &Protocol) -> f64 {
    298.15 + 5.5 * p.c_rate + 10.0 * (p.v_max - 4.0)
}

/// Temperature `T_amb + (peak - T_amb + σ z) g(t)` with `g` peaking at
/// 600 s; the violation probability is largest where `g = 1`.
fn gaussian_heating(p: &Protocol, names: &[String], x: &[f64]) -> chargeuq::Result<ModelRun> {
    let z = x[names.iter().position(|n| n == "z").unwrap()];
    let t = (0..121)
        .map(|k| {
            let g = (-((10.0 * k as f64 - 600.0) / 300.0).powi(2)).exp();
            298.15 + (peak_of(p) - 298.15 + SIGMA * z) * g
        })
        .collect();
    let mut series = std::collections::BTreeMap::new();
    series.insert(Qoi::Temperature, t);
    Ok(ModelRun {
        series,
        end_time: 1200.0,
        switch_time: None,
        termination: Termination::SocReached,
    })
}

fn tuner_contract() -> Verdict {
    let start = Instant::now();
    let space = ParameterSpace::new(vec![
        UncertainParameter::new("z", "-", 0.0, Distribution::gaussian(0.0, 1.0).unwrap()).unwrap(),
        UncertainParameter::new("w", "-", 0.0, Distribution::uniform(-1.0, 1.0).unwrap()).unwrap(),
    ])
    .unwrap();
    let cfg = CampaignConfig {
        n_train: 60,
        qois: vec![Qoi::Temperature],
        ..CampaignConfig::new(space, Protocol::fast())
    };
    let eps = 0.05;
    let grid = TuneGrid::product(&[1.6, 1.8, 2.0, 2.2, 2.4], &[4.1, 4.2]);
    let base = Protocol::fast();
    let closed: Vec<f64> = grid
        .candidates()
        .iter()
        .map(|&(c_rate, v_max)| 1.0 - normal_cdf((base.t_max - peak_of(&Protocol { c_rate, v_max, ..base.clone() })) / SIGMA))
        .collect();
    let expected = closed.iter().position(|&p| p < eps);
    let clear_margin = closed.iter().all(|p| (p - eps).abs() > 0.01);
    let report = tune_protocol(&base, eps, &grid, &cfg, &FnModel(gaussian_heating), true).unwrap();
    let err = report
        .candidates
        .iter()
        .zip(&closed)
        .map(|(c, p)| (c.max_probability.unwrap() - p).abs())
        .fold(0.0, f64::max);
    let t = start.elapsed().as_secs_f64();
    let chosen = report.selected.map(|i| (report.candidates[i].c_rate, report.candidates[i].v_max));
    let sel_err = report.selected.map(|i| (report.candidates[i].max_probability.unwrap() - closed[i]).abs());
    verdict(
        expected.is_some() && report.selected == expected && clear_margin && sel_err.is_some_and(|e| e < 0.01) && within(t, 60.0),
        format!(
            "selected {chosen:?} (expected index {expected:?}), reported {:.4} vs closed form {:.4}, max error over grid {err:.4}, {t:.2} s",
            report.selected.and_then(|i| report.candidates[i].max_probability).unwrap_or(f64::NAN),
            expected.map_or(f64::NAN, |i| closed[i]),
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("basis orthonormality", basis_orthonormality),
        ("multi-index cardinality", cardinality),
        ("exact recovery", exact_recovery),
        ("moment and Sobol oracle", moment_sobol_oracle),
        ("simulator conservation", simulator_conservation),
        ("qualitative reproduction", qualitative_reproduction),
        ("budget ratio", budget_ratio),
        ("gate discipline", gate_discipline),
        ("tuner contract", tuner_contract),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filters.is_empty() && !filters.iter().any(|f| *f == n.to_string() || name.contains(f.as_str())) {
            continue;
        }
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!("criterion {n} ({name}): {} - {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
