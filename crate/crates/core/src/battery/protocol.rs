//! CC-CV charging engine with event location and the fixed 10 s output grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::model::{Outputs, Spme, State, SOC, TEMP};
use super::params::CellParameters;
use super::solver::{brent, dopri_step, step_factor};
use crate::error::{Error, Result};

/// Spacing of the output grid, s.
pub const GRID_STEP: f64 = 10.0;
/// Tolerance on the voltage constraint check, V.
pub const VOLTAGE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    pub c_rate: f64,
    /// CC→CV switching voltage, V.
    pub v_max: f64,
    /// Voltage above which degradation accelerates; defaults to `v_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_limit: Option<f64>,
    /// Temperature that stops charging, K.
    pub t_max: f64,
    /// Plating overpotential that stops charging, V.
    pub eta_min: f64,
    pub soc_start: f64,
    pub soc_target: f64,
    /// Longest allowed charge, s.
    pub time_cap: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            c_rate: 2.2,
            v_max: 4.1,
            v_limit: None,
            t_max: 313.15,
            eta_min: 0.0,
            soc_start: 0.2,
            soc_target: 0.8,
            time_cap: 2400.0,
        }
    }
}

impl Protocol {
    /// 2.2C to 4.1 V, 20 → 80 %.
    pub fn fast() -> Self {
        Protocol::default()
    }

    /// 2.0C to 4.08 V with the degradation threshold kept at 4.1 V.
    pub fn moderate() -> Self {
        Protocol {
            c_rate: 2.0,
            v_max: 4.08,
            v_limit: Some(4.1),
            ..Protocol::default()
        }
    }

    pub fn voltage_limit(&self) -> f64 {
        self.v_limit.unwrap_or(self.v_max)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProtocol(m));
        if !(self.c_rate > 0.0 && self.c_rate.is_finite()) {
            return bad(format!("c_rate {} must be positive", self.c_rate));
        }
        if !(self.v_max > 0.0) {
            return bad(format!("v_max {} must be positive", self.v_max));
        }
        if !(self.time_cap > 0.0) {
            return bad(format!("time_cap {} must be positive", self.time_cap));
        }
        if !(self.soc_start < self.soc_target && self.soc_target <= 1.0 && self.soc_start >= 0.0) {
            return bad(format!(
                "need 0 <= soc_start < soc_target <= 1, got {} and {}",
                self.soc_start, self.soc_target
            ));
        }
        if !(self.t_max > 0.0) {
            return bad(format!("t_max {} must be positive", self.t_max));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step, s.
    pub max_step: f64,
    /// Smallest step before giving up, s.
    pub min_step: f64,
    /// Relative tolerance of the CV current solve.
    pub current_tol: f64,
    /// Bisection iterations when locating an event.
    pub event_iterations: usize,
    /// Keep every accepted step in [`SimResult::steps`].
    pub record_steps: bool,
    /// Scale heat generation; 0 switches the thermal source off.
    pub heat_scale: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-6,
            abs_tol: 1e-8,
            max_step: 1.0,
            min_step: 1e-9,
            current_tol: 1e-10,
            event_iterations: 20,
            record_steps: false,
            heat_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cc,
    Cv,
    Done,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Cc => "CC",
            Phase::Cv => "CV",
            Phase::Done => "done",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    SocReached,
    TMaxHit,
    EtaMinHit,
    TimeCap,
    SolverFailure,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::SocReached => "soc_reached",
            Termination::TMaxHit => "t_max_hit",
            Termination::EtaMinHit => "eta_min_hit",
            Termination::TimeCap => "time_cap",
            Termination::SolverFailure => "solver_failure",
        }
    }
}

/// One row of the output series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    /// Current density, A/m², positive while charging.
    pub current: f64,
    pub voltage: f64,
    pub temperature: f64,
    pub eta_pl: f64,
    pub soc: f64,
    pub phase: Phase,
    /// Row repeats the terminal values after the run ended.
    pub held: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qoi {
    Voltage,
    Temperature,
    EtaPl,
}

impl Qoi {
    pub const ALL: [Qoi; 3] = [Qoi::Voltage, Qoi::Temperature, Qoi::EtaPl];

    pub fn name(self) -> &'static str {
        match self {
            Qoi::Voltage => "voltage",
            Qoi::Temperature => "temperature",
            Qoi::EtaPl => "eta_pl",
        }
    }

    pub fn of(self, s: &Sample) -> f64 {
        match self {
            Qoi::Voltage => s.voltage,
            Qoi::Temperature => s.temperature,
            Qoi::EtaPl => s.eta_pl,
        }
    }
}

impl std::str::FromStr for Qoi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Qoi::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown QoI `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Uniform grid from t = 0 to the time cap.
    pub series: Vec<Sample>,
    pub switch_time: Option<f64>,
    pub end_time: f64,
    pub termination: Termination,
    /// Stopped early by the temperature or plating limit.
    pub censored: bool,
    /// State at `end_time`.
    pub final_sample: Sample,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Sample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl SimResult {
    /// Charge passed up to `end_time` by trapezoidal integration of the stored series, A s/m².
    pub fn integrated_charge(&self) -> f64 {
        let live: Vec<&Sample> = self.series.iter().filter(|s| !s.held && s.time <= self.end_time).collect();
        let mut q = 0.0;
        for w in live.windows(2) {
            q += 0.5 * (w[0].current + w[1].current) * (w[1].time - w[0].time);
        }
        if let Some(last) = live.last() {
            let f = &self.final_sample;
            q += 0.5 * (last.current + f.current) * (f.time - last.time);
        }
        q
    }

    /// Writes `time,current,voltage,temperature,eta_pl,soc,phase,censored`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["time", "current", "voltage", "temperature", "eta_pl", "soc", "phase", "censored"])?;
        for s in &self.series {
            out.write_record([
                format!("{}", s.time),
                format!("{:.10e}", s.current),
                format!("{:.10}", s.voltage),
                format!("{:.8}", s.temperature),
                format!("{:.10}", s.eta_pl),
                format!("{:.10}", s.soc),
                s.phase.label().to_string(),
                (s.held as u8).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

struct Engine<'a> {
    model: Spme,
    protocol: &'a Protocol,
    opts: &'a SolverOptions,
    i_cc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Soc,
    Temperature,
    Plating,
    Switch,
}

impl Engine<'_> {
    fn current(&self, y: &State, phase: Phase) -> std::result::Result<f64, String> {
        match phase {
            Phase::Cc => Ok(self.i_cc),
            Phase::Done => Ok(0.0),
            Phase::Cv => self.cv_current(y),
        }
    }

    fn cv_current(&self, y: &State) -> std::result::Result<f64, String> {
        let v_max = self.protocol.v_max;
        let g = |i: f64| self.model.outputs(y, i).voltage - v_max;
        if g(0.0) >= 0.0 {
            return Ok(0.0);
        }
        let mut hi = self.i_cc;
        let mut expansions = 0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            expansions += 1;
            if expansions > 10 {
                return Err("CV current bracket not found".into());
            }
        }
        brent(g, 0.0, hi, self.opts.current_tol * self.i_cc, 200)
            .ok_or_else(|| "CV current solve did not converge".to_string())
    }

    fn rhs(&self, y: &State, phase: Phase) -> std::result::Result<State, String> {
        let i = self.current(y, phase)?;
        let mut dy = self.model.rhs(y, i);
        if self.opts.heat_scale != 1.0 {
            let heat = self.model.outputs(y, i).heat;
            dy[TEMP] -= (1.0 - self.opts.heat_scale) * heat / self.model.cell().areal_heat_capacity();
        }
        Ok(dy)
    }

    fn sample(&self, t: f64, y: &State, phase: Phase) -> std::result::Result<(Sample, Outputs), String> {
        let i = self.current(y, phase)?;
        let o = self.model.outputs(y, i);
        Ok((
            Sample {
                time: t,
                current: i,
                voltage: o.voltage,
                temperature: y[TEMP],
                eta_pl: o.eta_pl,
                soc: y[SOC],
                phase,
                held: false,
            },
            o,
        ))
    }

    /// First event that fires at this state, in priority order.
    fn fired(&self, s: &Sample, phase: Phase) -> Option<Event> {
        let p = self.protocol;
        if s.soc >= p.soc_target {
            Some(Event::Soc)
        } else if s.temperature >= p.t_max {
            Some(Event::Temperature)
        } else if s.eta_pl <= p.eta_min {
            Some(Event::Plating)
        } else if phase == Phase::Cc && s.voltage >= p.v_max {
            Some(Event::Switch)
        } else {
            None
        }
    }

    fn step(&self, t: f64, y: &State, h: f64, phase: Phase) -> std::result::Result<(State, f64), String> {
        let mut f = |_t: f64, y: &State| self.rhs(y, phase);
        let o = dopri_step(&mut f, t, y, h, self.opts.rel_tol, self.opts.abs_tol)?;
        Ok((o.y, o.error))
    }

    fn check_state(&self, y: &State, o: &Outputs) -> std::result::Result<(), String> {
        if !y.iter().all(|v| v.is_finite()) {
            return Err("non-finite state".into());
        }
        if !(0.0..=1.05).contains(&y[SOC]) {
            return Err(format!("state of charge {} left the guard band", y[SOC]));
        }
        if y[TEMP] <= 0.0 {
            return Err("non-positive temperature".into());
        }
        for th in [o.theta_p_surface, o.theta_n_surface] {
            if !(th > 0.0 && th < 1.0) {
                return Err(format!("surface stoichiometry {th} left (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Runs a CC-CV charge of `cell` under `protocol`.
///
/// Invalid cells and protocols are rejected before integration. Numerical
/// trouble during integration ends the run with
/// [`Termination::SolverFailure`] rather than an error.
pub fn simulate_cccv(cell: &CellParameters, protocol: &Protocol, opts: &SolverOptions) -> Result<SimResult> {
    protocol.validate()?;
    let model = Spme::new(cell)?;
    let i_cc = protocol.c_rate * model.one_c();
    let y0 = model.initial_state(protocol.soc_start)?;
    let engine = Engine {
        model,
        protocol,
        opts,
        i_cc,
    };
    Ok(run(&engine, y0))
}

fn run(engine: &Engine<'_>, y0: State) -> SimResult {
    let p = engine.protocol;
    let opts = engine.opts;
    let n_grid = (p.time_cap / GRID_STEP).floor() as usize;
    let mut series = Vec::with_capacity(n_grid + 1);
    let mut steps = Vec::new();
    let mut phase = Phase::Cc;
    let mut switch_time = None;
    let mut t = 0.0;
    let mut y = y0;
    let mut next_k = 1usize;
    let mut h = opts.max_step;

    let fail = |series: Vec<Sample>, steps: Vec<Sample>, t: f64, last: Sample, msg: String, switch_time| {
        finish(series, steps, n_grid, switch_time, t, Termination::SolverFailure, last, Some(msg))
    };

    let (mut last, _) = match engine.sample(0.0, &y, phase) {
        Ok(s) => s,
        Err(e) => {
            let blank = Sample {
                time: 0.0,
                current: 0.0,
                voltage: f64::NAN,
                temperature: y[TEMP],
                eta_pl: f64::NAN,
                soc: y[SOC],
                phase: Phase::Done,
                held: false,
            };
            return fail(vec![blank], steps, 0.0, blank, e, None);
        }
    };
    // constraints already active at the start
    match engine.fired(&last, phase) {
        Some(Event::Switch) => {
            phase = Phase::Cv;
            switch_time = Some(0.0);
            match engine.sample(0.0, &y, phase) {
                Ok((s, _)) => last = s,
                Err(e) => return fail(vec![last], steps, 0.0, last, e, switch_time),
            }
        }
        Some(ev) => {
            series.push(last);
            return finish(series, steps, n_grid, None, 0.0, termination_of(ev), last, None);
        }
        None => {}
    }
    series.push(last);
    if opts.record_steps {
        steps.push(last);
    }

    loop {
        let grid_t = next_k as f64 * GRID_STEP;
        let stop_t = grid_t.min(p.time_cap);
        let landing = h >= stop_t - t;
        let h_try = if landing { stop_t - t } else { h };

        let (y_new, err) = match engine.step(t, &y, h_try, phase) {
            Ok(v) => v,
            Err(e) => return fail(series, steps, t, last, e, switch_time),
        };
        if !(err <= 1.0) {
            h = h_try * step_factor(if err.is_finite() { err } else { 1e10 });
            if h < opts.min_step {
                return fail(series, steps, t, last, format!("step size underflow at t = {t}"), switch_time);
            }
            continue;
        }
        let t_new = if landing { stop_t } else { t + h_try };
        let (mut s_new, o_new) = match engine.sample(t_new, &y_new, phase) {
            Ok(v) => v,
            Err(e) => return fail(series, steps, t, last, e, switch_time),
        };
        if let Err(e) = engine.check_state(&y_new, &o_new) {
            return fail(series, steps, t, last, e, switch_time);
        }

        if engine.fired(&s_new, phase).is_some() {
            // bisect on the fraction of the accepted step
            let (mut lo, mut hi) = (0.0, h_try);
            let mut y_hi = y_new;
            let mut s_hi = s_new;
            for _ in 0..opts.event_iterations {
                let mid = 0.5 * (lo + hi);
                let (y_mid, _) = match engine.step(t, &y, mid, phase) {
                    Ok(v) => v,
                    Err(e) => return fail(series, steps, t, last, e, switch_time),
                };
                let (s_mid, _) = match engine.sample(t + mid, &y_mid, phase) {
                    Ok(v) => v,
                    Err(e) => return fail(series, steps, t, last, e, switch_time),
                };
                if engine.fired(&s_mid, phase).is_some() {
                    hi = mid;
                    y_hi = y_mid;
                    s_hi = s_mid;
                } else {
                    lo = mid;
                }
            }
            let t_event = if hi == h_try { t_new } else { t + hi };
            s_hi.time = t_event;
            let event = engine.fired(&s_hi, phase).expect("bracket end fires");
            t = t_event;
            y = y_hi;
            if opts.record_steps {
                steps.push(s_hi);
            }
            if event == Event::Switch {
                phase = Phase::Cv;
                switch_time = Some(t);
                h = opts.max_step.min(1e-3_f64.max(h_try));
                last = match engine.sample(t, &y, phase) {
                    Ok((s, _)) => s,
                    Err(e) => return fail(series, steps, t, s_hi, e, switch_time),
                };
                if t == grid_t {
                    series.push(last);
                    next_k += 1;
                }
                continue;
            }
            if t == grid_t {
                series.push(s_hi);
            }
            return finish(series, steps, n_grid, switch_time, t, termination_of(event), s_hi, None);
        }

        t = t_new;
        y = y_new;
        s_new.time = t;
        last = s_new;
        if opts.record_steps {
            steps.push(s_new);
        }
        h = (h_try * step_factor(err)).min(opts.max_step);
        if landing {
            h = h.max(opts.max_step.min(h_try));
            if t == grid_t {
                series.push(s_new);
                next_k += 1;
            }
            if t >= p.time_cap {
                return finish(series, steps, n_grid, switch_time, t, Termination::TimeCap, s_new, None);
            }
        }
    }
}

fn termination_of(e: Event) -> Termination {
    match e {
        Event::Soc => Termination::SocReached,
        Event::Temperature => Termination::TMaxHit,
        Event::Plating => Termination::EtaMinHit,
        Event::Switch => unreachable!("switching does not end a run"),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    mut series: Vec<Sample>,
    steps: Vec<Sample>,
    n_grid: usize,
    switch_time: Option<f64>,
    end_time: f64,
    termination: Termination,
    last: Sample,
    failure: Option<String>,
) -> SimResult {
    let mut held = last;
    held.phase = Phase::Done;
    held.held = true;
    while series.len() <= n_grid {
        held.time = series.len() as f64 * GRID_STEP;
        series.push(held);
    }
    if let Some(msg) = &failure {
        log::debug!("simulation failed at t = {end_time}: {msg}");
    }
    SimResult {
        series,
        switch_time,
        end_time,
        termination,
        censored: matches!(termination, Termination::TMaxHit | Termination::EtaMinHit),
        final_sample: last,
        steps,
        failure,
    }
}

/// One channel of the output grid.
pub fn qoi_extract(result: &SimResult, qoi: Qoi) -> Result<Vec<f64>> {
    if result.termination == Termination::SolverFailure {
        return Err(Error::SimulationFailed(
            result.failure.clone().unwrap_or_else(|| "solver failure".into()),
        ));
    }
    Ok(result.series.iter().map(|s| qoi.of(s)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStatus {
    pub violated: bool,
    pub first_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub voltage: ConstraintStatus,
    pub temperature: ConstraintStatus,
    pub plating: ConstraintStatus,
}

impl ViolationReport {
    pub fn any(&self) -> bool {
        self.voltage.violated || self.temperature.violated || self.plating.violated
    }
}

/// Checks the recorded (non-held) samples against the degradation limits.
pub fn violation_check(result: &SimResult, protocol: &Protocol) -> ViolationReport {
    let live = result
        .series
        .iter()
        .chain(result.steps.iter())
        .filter(|s| !s.held)
        .chain(std::iter::once(&result.final_sample));
    let mut first = [None::<f64>; 3];
    let v_lim = protocol.voltage_limit() + VOLTAGE_TOL;
    for s in live {
        let hits = [
            s.voltage > v_lim,
            s.temperature >= protocol.t_max,
            s.eta_pl <= protocol.eta_min,
        ];
        for (slot, hit) in first.iter_mut().zip(hits) {
            if hit {
                *slot = Some(slot.map_or(s.time, |t: f64| t.min(s.time)));
            }
        }
    }
    let status = |t: Option<f64>| ConstraintStatus {
        violated: t.is_some(),
        first_time: t,
    };
    ViolationReport {
        voltage: status(first[0]),
        temperature: status(first[1]),
        plating: status(first[2]),
    }
}
