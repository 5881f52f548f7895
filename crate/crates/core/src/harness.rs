//! Scenario files, closed-loop orchestration and reporting.
//!
//! Every dynamics step advances the grid, renders each load bus frequency to
//! a 10 kHz waveform, feeds the bus PMU and passes its frames to the bus
//! relay. Relay commands take effect at the start of the following step.

use crate::grid::{
    bus_frequency, calibrate_inertia, BusPerturbation, Event, Generator, GridError, GridModel, Load,
};
use crate::pmu::{write_frames_csv, EstimatorConfig, Frame, PmuError, PmuStream};
use crate::relay::{write_commands_csv, Command, RelayConfig, RelayError, RelayState, Scheme};
use crate::signal::{SignalError, SynthesisParams, Synthesizer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

/// Largest tolerated pre-contingency imbalance, per unit of online synchronous capacity.
const BALANCE_TOL_PU: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Pmu(#[from] PmuError),
    #[error(transparent)]
    Relay(#[from] RelayError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no load-shedding command was issued")]
    NoTrigger,
}

impl HarnessError {
    /// True for errors caused by the scenario content rather than the environment.
    pub fn is_invalid_scenario(&self) -> bool {
        matches!(
            self,
            HarnessError::InvalidScenario(_)
                | HarnessError::Grid(_)
                | HarnessError::Pmu(_)
                | HarnessError::Relay(_)
                | HarnessError::Signal(_)
                | HarnessError::Json(_)
        )
    }
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::InvalidScenario(msg.into())
}

/// Damped oscillation added to every bus, with phases spread evenly over buses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationConfig {
    pub amplitude_hz: f64,
    pub tau_s: f64,
    pub osc_hz: f64,
    pub phase_offset_rad: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { amplitude_hz: 0.0, tau_s: 2.0, osc_hz: 1.0, phase_offset_rad: 0.0 }
    }
}

impl PerturbationConfig {
    pub fn for_bus(&self, index: usize, buses: usize) -> BusPerturbation {
        BusPerturbation {
            amplitude_hz: self.amplitude_hz,
            tau_s: self.tau_s,
            osc_hz: self.osc_hz,
            phase_rad: self.phase_offset_rad + 2.0 * PI * index as f64 / buses.max(1) as f64,
        }
    }
}

/// Inertia calibration against a reference trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub target_rocof_hzps: f64,
    /// Generators whose loss defines the reference; defaults to the units
    /// tripped at the first event time.
    #[serde(default)]
    pub trip: Option<Vec<String>>,
}

fn default_f0() -> f64 {
    crate::NOMINAL_FREQUENCY
}
fn default_damping() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    0.001
}
fn default_one() -> f64 {
    1.0
}
fn default_trace_interval() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_f0")]
    pub f0: f64,
    #[serde(default = "default_damping")]
    pub damping_pu: f64,
    pub fleet: Vec<Generator>,
    pub loads: Vec<Load>,
    #[serde(default)]
    pub events: Vec<Event>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub duration_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    /// Relay timing and thresholds; the `scheme` field inside is ignored.
    #[serde(default)]
    pub relay: RelayConfig,
    #[serde(default)]
    pub calibration: Option<Calibration>,
    /// Used only when no calibration is given.
    #[serde(default = "default_one")]
    pub inertia_scale: f64,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default = "default_trace_interval")]
    pub trace_interval_s: f64,
}

fn default_scheme() -> Scheme {
    Scheme::None
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        Self { scheme, ..self.clone() }
    }

    fn steps_per(&self, interval: f64) -> Option<usize> {
        let n = (interval / self.dt_s).round();
        ((n * self.dt_s - interval).abs() < 1e-9 && n >= 1.0).then_some(n as usize)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(invalid("duration_s must be positive"));
        }
        if !(self.dt_s > 0.0 && self.dt_s <= crate::grid::MAX_DT) {
            return Err(invalid(format!("dt_s {} outside (0, 0.01]", self.dt_s)));
        }
        if self.steps_per(self.trace_interval_s).is_none() {
            return Err(invalid("trace_interval_s must be a whole number of steps"));
        }
        if !(self.f0 > 0.0) || !(self.damping_pu >= 0.0) {
            return Err(invalid("f0 must be positive and damping non-negative"));
        }
        if self.loads.is_empty() {
            return Err(invalid("at least one load bus is required"));
        }
        for (i, l) in self.loads.iter().enumerate() {
            if l.bus.is_empty() || !l.bus.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(invalid(format!("bus label '{}' must be alphanumeric", l.bus)));
            }
            if self.loads[..i].iter().any(|o| o.bus == l.bus) {
                return Err(invalid(format!("duplicate load bus '{}'", l.bus)));
            }
        }
        for e in &self.events {
            if !(e.time >= 0.0) {
                return Err(invalid("event times must be non-negative"));
            }
        }
        if !(self.perturbation.tau_s > 0.0) || self.perturbation.amplitude_hz < 0.0 {
            return Err(invalid("perturbation needs tau_s > 0 and amplitude_hz >= 0"));
        }
        self.estimator.validate()?;
        RelayConfig { scheme: self.scheme, ..self.relay.clone() }.validate()?;
        if let Some(c) = &self.calibration {
            if let Some(ids) = &c.trip {
                for id in ids {
                    if !self.fleet.iter().any(|g| &g.id == id) {
                        return Err(GridError::UnknownGenerator(id.clone()).into());
                    }
                }
            }
        } else if !(self.inertia_scale > 0.0) {
            return Err(invalid("inertia_scale must be positive"));
        }
        let model = self.build_model()?;
        let state = model.initial_state();
        for e in &self.events {
            model.apply_event(&mut state.clone(), e)?;
        }
        let residual = model.power_balance_mw(&state);
        if residual.abs() > BALANCE_TOL_PU * state.s_sys.max(1.0) {
            return Err(invalid(format!("initial power imbalance of {residual:.6} MW")));
        }
        Ok(())
    }

    /// Time of the first event, if any.
    pub fn contingency_time(&self) -> Option<f64> {
        self.events.iter().map(|e| e.time).reduce(f64::min)
    }

    fn calibration_trip(&self, c: &Calibration) -> Vec<String> {
        if let Some(ids) = &c.trip {
            return ids.clone();
        }
        let Some(t0) = self.contingency_time() else {
            return Vec::new();
        };
        self.events
            .iter()
            .filter(|e| e.time == t0)
            .filter_map(|e| match &e.kind {
                crate::grid::EventKind::GeneratorTrip { id } => Some(id.clone()),
                _ => None,
            })
            .collect()
    }

    /// Reference trip used for calibration: (tripped MW, surviving units).
    pub fn reference_trip(&self) -> Option<(f64, Vec<Generator>)> {
        let c = self.calibration.as_ref()?;
        let ids = self.calibration_trip(c);
        let tripped = self
            .fleet
            .iter()
            .filter(|g| g.online && ids.contains(&g.id))
            .map(|g| g.pm_setpoint_mw)
            .sum();
        let surviving = self.fleet.iter().filter(|g| g.online && !ids.contains(&g.id)).cloned().collect();
        Some((tripped, surviving))
    }

    pub fn effective_inertia_scale(&self) -> Result<f64, HarnessError> {
        match (&self.calibration, self.reference_trip()) {
            (Some(c), Some((tripped, surviving))) => {
                Ok(calibrate_inertia(c.target_rocof_hzps, tripped, &surviving, self.f0)?)
            }
            _ => Ok(self.inertia_scale),
        }
    }

    pub fn build_model(&self) -> Result<GridModel, HarnessError> {
        let scale = self.effective_inertia_scale()?;
        Ok(GridModel::new(self.f0, self.damping_pu, self.fleet.clone(), self.loads.clone())?
            .with_inertia_scale(scale))
    }
}

/// Per-bus traces.
#[derive(Debug, Clone, PartialEq)]
pub struct BusTrace {
    pub bus: String,
    pub frames: Vec<Frame>,
    /// Bus frequency at the trace times, Hz.
    pub frequency: Vec<f64>,
    /// Serve factor changes as (time, percent), starting with (0, 100).
    pub serve: Vec<(f64, u8)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Traces {
    pub time: Vec<f64>,
    pub coi_frequency: Vec<f64>,
    pub buses: Vec<BusTrace>,
    /// Total shed power as a stair trace with a duplicate point at every change, MW.
    pub shed_mw: Vec<(f64, f64)>,
    /// Commands stamped with the time they took effect.
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario: String,
    pub scheme: Scheme,
    pub nadir_frequency_hz: f64,
    pub nadir_time_s: f64,
    pub contingency_time_s: Option<f64>,
    /// COI df/dt over the first step after the contingency.
    pub initial_rocof_hzps: Option<f64>,
    /// 100 minus the smallest serve factor reached by any bus.
    pub max_ls_factor_pct: u8,
    pub duration_s: f64,
    /// Full restoration was never reached.
    pub incomplete: bool,
    pub first_trigger_latency_s: Option<f64>,
    pub curtailed_energy_mwh: f64,
    pub collapse: bool,
    pub collapse_time_s: Option<f64>,
    pub inertia_scale: f64,
    pub final_frequency_hz: f64,
    pub command_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub metrics: Metrics,
    pub traces: Traces,
}

/// Σ ∫ shed power dt by the trapezoidal rule over `(time s, MW)` points, in MWh.
pub fn curtailed_energy(points: &[(f64, f64)]) -> f64 {
    let mws: f64 = points.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    mws / 3600.0
}

/// Time from the first event to the first shedding command.
pub fn first_trigger_latency(report: &ScenarioReport) -> Result<f64, HarnessError> {
    let first = report.traces.commands.iter().find(|c| c.reason.is_shed()).ok_or(HarnessError::NoTrigger)?;
    Ok(first.time - report.metrics.contingency_time_s.unwrap_or(0.0))
}

struct BusPipeline {
    synth: Synthesizer,
    pmu: PmuStream,
    relay: RelayState,
    perturb: BusPerturbation,
    samples: Vec<f64>,
    frames: Vec<Frame>,
}

/// Runs one scenario in closed loop.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport, HarnessError> {
    s.validate()?;
    let model = s.build_model()?;
    let mut state = model.initial_state();
    let mut events: Vec<Event> = s.events.clone();
    events.sort_by(|a, b| a.time.total_cmp(&b.time));

    let n_bus = s.loads.len();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let relay_cfg = RelayConfig { scheme: s.scheme, ..s.relay.clone() };
    let mut buses = Vec::with_capacity(n_bus);
    for (i, load) in s.loads.iter().enumerate() {
        let perturb = s.perturbation.for_bus(i, n_bus);
        let params = SynthesisParams {
            amplitude: 1.0,
            phase0: rng.random_range(-PI..PI),
            noise_std: s.noise_std,
            seed: s.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1),
            sample_rate: s.estimator.sample_rate,
        };
        buses.push(BusPipeline {
            synth: Synthesizer::new(0.0, bus_frequency(&model, &state, &perturb), &params)?,
            pmu: PmuStream::new(s.estimator, 0.0)?,
            relay: RelayState::new(load.bus.clone(), relay_cfg.clone())?,
            perturb,
            samples: Vec::new(),
            frames: Vec::new(),
        });
    }

    let dt = s.dt_s;
    let steps = (s.duration_s / dt).round() as usize;
    let stride = s.steps_per(s.trace_interval_s).expect("validated");
    let contingency = s.contingency_time();

    let mut traces = Traces {
        buses: s
            .loads
            .iter()
            .map(|l| BusTrace { bus: l.bus.clone(), frames: Vec::new(), frequency: Vec::new(), serve: vec![(0.0, 100)] })
            .collect(),
        ..Traces::default()
    };
    let shed_now = |model: &GridModel, st: &crate::grid::GridState, t: f64| {
        (0..n_bus)
            .map(|i| model.nominal_load_mw(st, i, t) * (100 - st.serve_pct[i]) as f64 / 100.0)
            .sum::<f64>()
    };
    let mut shed_level = shed_now(&model, &state, 0.0);
    traces.shed_mw.push((0.0, shed_level));

    let record = |traces: &mut Traces, buses: &[BusPipeline], st: &crate::grid::GridState| {
        traces.time.push(st.t);
        traces.coi_frequency.push(st.frequency(model.f0));
        for (b, p) in traces.buses.iter_mut().zip(buses) {
            b.frequency.push(bus_frequency(&model, st, &p.perturb));
        }
    };
    record(&mut traces, &buses, &state);

    let (mut nadir, mut nadir_time) = (state.frequency(s.f0), 0.0);
    let mut initial_rocof = None;
    let mut collapse_time = None;
    let mut next_event = 0;
    let mut pending: Vec<(usize, Command)> = Vec::new();

    for k in 0..steps {
        let t = k as f64 * dt;
        let due_end = events[next_event..].iter().take_while(|e| e.time <= t + 0.5 * dt).count();
        let due = &events[next_event..next_event + due_end];
        next_event += due_end;

        let mut shed_cmds = Vec::with_capacity(pending.len());
        for (i, mut cmd) in pending.drain(..) {
            cmd.time = t;
            shed_cmds.push((i, cmd.serve_factor));
            traces.buses[i].serve.push((t, cmd.serve_factor));
            traces.commands.push(cmd);
        }

        let before = state.delta_f;
        state = model.step(&state, due, &shed_cmds, dt)?;
        state.t = (k + 1) as f64 * dt;
        if !due.is_empty() && initial_rocof.is_none() {
            initial_rocof = Some((state.delta_f - before) / dt);
        }

        // Shed power is held over the step just taken.
        let level = shed_now(&model, &state, t);
        if level != shed_level {
            traces.shed_mw.push((t, shed_level));
            traces.shed_mw.push((t, level));
            shed_level = level;
        }

        let f = state.frequency(s.f0);
        if f < nadir {
            nadir = f;
            nadir_time = state.t;
        }

        for (i, p) in buses.iter_mut().enumerate() {
            let fb = bus_frequency(&model, &state, &p.perturb);
            p.samples.clear();
            p.synth.extend_to(state.t, fb, &mut p.samples);
            p.frames.clear();
            p.pmu.push(&p.samples, &mut p.frames);
            for fr in &p.frames {
                if let Some(cmd) = p.relay.on_frame(fr) {
                    pending.push((i, cmd));
                }
            }
            traces.buses[i].frames.extend_from_slice(&p.frames);
        }

        if (k + 1) % stride == 0 {
            record(&mut traces, &buses, &state);
        }
        if state.collapsed {
            collapse_time = Some(state.t);
            break;
        }
    }
    let end = state.t;
    traces.shed_mw.push((end, shed_level));

    let metrics = summarize(s, &model, &state, &traces, nadir, nadir_time, initial_rocof, collapse_time, contingency)?;
    Ok(ScenarioReport { metrics, traces })
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    s: &Scenario,
    model: &GridModel,
    state: &crate::grid::GridState,
    traces: &Traces,
    nadir: f64,
    nadir_time: f64,
    initial_rocof: Option<f64>,
    collapse_time: Option<f64>,
    contingency: Option<f64>,
) -> Result<Metrics, HarnessError> {
    let min_serve = traces.buses.iter().flat_map(|b| b.serve.iter().map(|p| p.1)).min().unwrap_or(100);
    let first_shed = traces.commands.iter().find(|c| c.reason.is_shed()).map(|c| c.time);
    let last_lr = traces.commands.iter().rev().find(|c| !c.reason.is_shed()).map(|c| c.time);
    let restored = state.serve_pct.iter().all(|&p| p == 100);
    let (duration, incomplete) = match first_shed {
        None => (0.0, false),
        Some(t0) if restored => (last_lr.unwrap_or(t0) - t0, false),
        Some(t0) => (last_lr.unwrap_or(state.t) - t0, true),
    };
    Ok(Metrics {
        scenario: s.name.clone(),
        scheme: s.scheme,
        nadir_frequency_hz: nadir,
        nadir_time_s: nadir_time,
        contingency_time_s: contingency,
        initial_rocof_hzps: initial_rocof,
        max_ls_factor_pct: 100 - min_serve,
        duration_s: duration,
        incomplete,
        first_trigger_latency_s: first_shed.map(|t| t - contingency.unwrap_or(0.0)),
        curtailed_energy_mwh: curtailed_energy(&traces.shed_mw),
        collapse: collapse_time.is_some(),
        collapse_time_s: collapse_time,
        inertia_scale: model.inertia_scale,
        final_frequency_hz: state.frequency(s.f0),
        command_count: traces.commands.len(),
    })
}

/// Runs `schemes` on the same scenario in parallel; results follow the input order.
pub fn compare_schemes(s: &Scenario, schemes: &[Scheme]) -> Result<Vec<ScenarioReport>, HarnessError> {
    if schemes.is_empty() {
        return Err(invalid("at least one scheme is required"));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = schemes
            .iter()
            .map(|&sc| {
                let scenario = s.with_scheme(sc);
                scope.spawn(move || run_scenario(&scenario))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    })
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `metrics.json`, `commands.csv`, `frames_<bus>.csv`, `frequency_<bus>.csv`
/// and `frequency_coi.csv` into `dir`.
pub fn write_report(report: &ScenarioReport, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    let mut w = create(&dir.join("metrics.json"))?;
    serde_json::to_writer_pretty(&mut w, &report.metrics)?;
    writeln!(w)?;
    w.flush()?;

    let mut w = create(&dir.join("commands.csv"))?;
    write_commands_csv(&report.traces.commands, &mut w)?;
    w.flush()?;

    let tr = &report.traces;
    let mut w = create(&dir.join("frequency_coi.csv"))?;
    write_series(&mut w, &tr.time, &tr.coi_frequency)?;
    for b in &tr.buses {
        let mut w = create(&dir.join(format!("frames_{}.csv", b.bus)))?;
        write_frames_csv(&b.frames, &mut w)?;
        w.flush()?;
        let mut w = create(&dir.join(format!("frequency_{}.csv", b.bus)))?;
        write_series(&mut w, &tr.time, &b.frequency)?;
    }
    Ok(())
}

fn write_series<W: Write>(w: &mut W, time: &[f64], freq: &[f64]) -> io::Result<()> {
    writeln!(w, "time_s,freq_hz")?;
    for (t, f) in time.iter().zip(freq) {
        writeln!(w, "{t:.14e},{f:.14e}")?;
    }
    w.flush()
}

/// One row per scheme: nadir, max LS factor, duration, energy and flags.
pub fn write_summary_csv<W: Write>(reports: &[ScenarioReport], mut w: W) -> io::Result<()> {
    writeln!(w, "scheme,nadir_hz,max_ls_pct,duration_s,energy_mwh,incomplete,collapse")?;
    for r in reports {
        let m = &r.metrics;
        writeln!(
            w,
            "{},{:.14e},{},{:.14e},{:.14e},{},{}",
            m.scheme, m.nadir_frequency_hz, m.max_ls_factor_pct, m.duration_s, m.curtailed_energy_mwh, m.incomplete, m.collapse
        )?;
    }
    Ok(())
}

/// Writes each report under `dir/<scheme>/` plus `summary.csv` and `metrics.json`.
pub fn write_comparison(reports: &[ScenarioReport], dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    for r in reports {
        write_report(r, &dir.join(r.metrics.scheme.as_str()))?;
    }
    let mut w = create(&dir.join("summary.csv"))?;
    write_summary_csv(reports, &mut w)?;
    w.flush()?;
    let metrics: Vec<&Metrics> = reports.iter().map(|r| &r.metrics).collect();
    let mut w = create(&dir.join("metrics.json"))?;
    serde_json::to_writer_pretty(&mut w, &metrics)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Bundled scenario reproducing a 1 GW loss.
pub const SCENARIO_1_JSON: &str = include_str!("../scenarios/scenario1.json");
/// Bundled scenario reproducing a 1.5 GW loss.
pub const SCENARIO_2_JSON: &str = include_str!("../scenarios/scenario2.json");

pub fn bundled_scenario_1() -> Scenario {
    Scenario::from_json_str(SCENARIO_1_JSON).expect("bundled scenario 1 is valid")
}

pub fn bundled_scenario_2() -> Scenario {
    Scenario::from_json_str(SCENARIO_2_JSON).expect("bundled scenario 2 is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_of_rectangle() {
        // 100 MW at 95% for 36 s.
        let pts = [(0.0, 0.0), (10.0, 0.0), (10.0, 5.0), (46.0, 5.0), (46.0, 0.0), (60.0, 0.0)];
        assert!((curtailed_energy(&pts) - 0.05).abs() < 1e-15);
        assert_eq!(curtailed_energy(&[(0.0, 0.0), (60.0, 0.0)]), 0.0);
        assert_eq!(curtailed_energy(&[]), 0.0);
    }

    #[test]
    fn perturbation_phases_spread_over_buses() {
        let p = PerturbationConfig { amplitude_hz: 0.01, ..Default::default() };
        let a = p.for_bus(0, 4);
        let b = p.for_bus(1, 4);
        assert_eq!(a.amplitude_hz, b.amplitude_hz);
        assert!((b.phase_rad - a.phase_rad - PI / 2.0).abs() < 1e-15);
    }
}
