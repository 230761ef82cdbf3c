//! Analytic stand-ins for the cell model.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chargeuq::battery::{Protocol, Qoi, Termination};
use chargeuq::inputs::{Distribution, ParameterSpace, UncertainParameter};
use chargeuq::pipeline::ModelRun;
use chargeuq::Result;

pub const STEPS: usize = 21;

pub fn tau(k: usize) -> f64 {
    k as f64 / (STEPS - 1) as f64
}

/// `a ~ U(0.5, 1.5)`, `b ~ U(-1, 1)`, `z ~ N(0, 1)`.
pub fn abz_space() -> ParameterSpace {
    ParameterSpace::new(vec![
        UncertainParameter::new("a", "-", 1.0, Distribution::uniform(0.5, 1.5).unwrap()).unwrap(),
        UncertainParameter::new("b", "-", 0.0, Distribution::uniform(-1.0, 1.0).unwrap()).unwrap(),
        UncertainParameter::new("z", "-", 0.0, Distribution::gaussian(0.0, 1.0).unwrap()).unwrap(),
    ])
    .unwrap()
}

pub fn run(series: [Vec<f64>; 3]) -> ModelRun {
    let [v, t, e] = series;
    let mut m = BTreeMap::new();
    m.insert(Qoi::Voltage, v);
    m.insert(Qoi::Temperature, t);
    m.insert(Qoi::EtaPl, e);
    ModelRun {
        end_time: 10.0 * (STEPS - 1) as f64,
        switch_time: None,
        series: m,
        termination: Termination::SocReached,
    }
}

pub fn value(names: &[String], x: &[f64], name: &str, nominal: f64) -> f64 {
    names.iter().position(|n| n == name).map_or(nominal, |i| x[i])
}

/// Smooth three-parameter response; the C-rate scales the heating.
pub fn smooth_series(protocol: &Protocol, names: &[String], x: &[f64]) -> [Vec<f64>; 3] {
    let a = value(names, x, "a", 1.0);
    let b = value(names, x, "b", 0.0);
    let z = value(names, x, "z", 0.0);
    let c = protocol.c_rate / 2.2;
    let v = (0..STEPS).map(|k| 3.7 + 0.3 * tau(k) + 0.02 * a * tau(k) + 0.01 * b * b * tau(k)).collect();
    let t = (0..STEPS)
        .map(|k| 298.15 + 8.0 * c * tau(k) * (0.3 * b).exp() + 0.5 * z * tau(k))
        .collect();
    let e = (0..STEPS).map(|k| 0.2 - 0.1 * tau(k) * a + 0.002 * z.sin()).collect();
    [v, t, e]
}

pub fn smooth_model(protocol: &Protocol, names: &[String], x: &[f64]) -> Result<ModelRun> {
    Ok(run(smooth_series(protocol, names, x)))
}

/// Deterministic pseudo-random value in [0, 1) from the input bits.
pub fn hash01(x: &[f64], salt: u64) -> f64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ salt;
    for v in x {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    (h >> 11) as f64 / (1u64 << 53) as f64
}
