//! Center-of-inertia frequency model of a generator fleet.
//!
//! One swing equation carries the system frequency deviation; each
//! synchronous unit adds droop governor and turbine states. Generator trips
//! and load steps are applied only at step boundaries, and the continuous
//! states are advanced with classical fourth-order Runge–Kutta.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Frequency below which a run is flagged as collapsed, Hz.
pub const COLLAPSE_HZ: f64 = 45.0;
/// Largest admissible integration step, s.
pub const MAX_DT: f64 = 0.01;

/// Number of dynamic states carried per generator.
const GOV_STATES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("time step {0} s outside (0, 0.01]")]
    InvalidStep(f64),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("unknown load bus '{0}'")]
    UnknownBus(String),
    #[error("invalid generator '{id}': {reason}")]
    InvalidGenerator { id: String, reason: String },
    #[error("calibration needs a positive {0}")]
    InvalidCalibration(&'static str),
    #[error("no synchronous inertia survives the contingency")]
    EmptyFleet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantType {
    Thermal,
    Hydro,
    Wind,
}

/// Primary-control dynamics of a synchronous unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GovernorModel {
    /// Droop through a single first-order lag.
    FirstOrder { time_constant_s: f64 },
    /// Gate servo with transient droop compensation feeding a water column
    /// with water-hammer (non-minimum-phase) response.
    Hydro {
        servo_time_s: f64,
        water_time_s: f64,
        /// Ratio of temporary to permanent droop (≥ 1).
        temporary_droop_ratio: f64,
        reset_time_s: f64,
    },
    /// Valve servo feeding a high-pressure stage and a reheater lag.
    ThermalReheat { servo_time_s: f64, reheat_time_s: f64, hp_fraction: f64 },
}

impl GovernorModel {
    fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        match *self {
            GovernorModel::FirstOrder { time_constant_s } => positive("time constant", time_constant_s),
            GovernorModel::Hydro { servo_time_s, water_time_s, temporary_droop_ratio, reset_time_s } => {
                positive("servo time", servo_time_s)?;
                positive("water time", water_time_s)?;
                positive("reset time", reset_time_s)?;
                if temporary_droop_ratio < 1.0 {
                    return Err("temporary droop ratio must be at least 1".into());
                }
                Ok(())
            }
            GovernorModel::ThermalReheat { servo_time_s, reheat_time_s, hp_fraction } => {
                positive("servo time", servo_time_s)?;
                positive("reheat time", reheat_time_s)?;
                if !(0.0..=1.0).contains(&hp_fraction) {
                    return Err("hp fraction must lie in [0, 1]".into());
                }
                Ok(())
            }
        }
    }

    /// Slowest time constant of the model, s.
    pub fn settling_time_constant(&self) -> f64 {
        match *self {
            GovernorModel::FirstOrder { time_constant_s } => time_constant_s,
            GovernorModel::Hydro { servo_time_s, water_time_s, temporary_droop_ratio, reset_time_s } => {
                servo_time_s.max(0.5 * water_time_s).max(temporary_droop_ratio * reset_time_s)
            }
            GovernorModel::ThermalReheat { servo_time_s, reheat_time_s, .. } => {
                servo_time_s.max(reheat_time_s)
            }
        }
    }
}

/// Time series sampled at a fixed step and held between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { mw: f64 },
    Samples { step_s: f64, mw: Vec<f64> },
    /// `base + amplitude·sin(2π·t_k/period + phase)` evaluated at whole seconds `t_k`.
    FlatRipple { base_mw: f64, amplitude_mw: f64, period_s: f64, phase_rad: f64 },
}

impl Profile {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Profile::Constant { mw } => *mw,
            Profile::Samples { step_s, mw } => {
                if mw.is_empty() {
                    return 0.0;
                }
                let idx = (t.max(0.0) / step_s + 1e-9).floor() as usize;
                mw[idx.min(mw.len() - 1)]
            }
            Profile::FlatRipple { base_mw, amplitude_mw, period_s, phase_rad } => {
                let tk = (t.max(0.0) + 1e-9).floor();
                base_mw + amplitude_mw * (2.0 * PI * tk / period_s + phase_rad).sin()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub plant_type: PlantType,
    #[serde(default)]
    pub bus: Option<u32>,
    pub capacity_mva: f64,
    /// Inertia constant on own rating, s.
    #[serde(default)]
    pub inertia_h: f64,
    #[serde(default = "default_droop")]
    pub droop: f64,
    #[serde(default)]
    pub governor: Option<GovernorModel>,
    #[serde(default)]
    pub headroom_mw: f64,
    #[serde(default = "default_true")]
    pub online: bool,
    /// Pre-contingency dispatch; wind units use `wind_profile` instead.
    #[serde(default)]
    pub pm_setpoint_mw: f64,
    #[serde(default)]
    pub wind_profile: Option<Profile>,
}

fn default_droop() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

impl Generator {
    pub fn is_synchronous(&self) -> bool {
        self.plant_type != PlantType::Wind
    }

    fn validate(&self) -> Result<(), GridError> {
        let fail = |reason: String| Err(GridError::InvalidGenerator { id: self.id.clone(), reason });
        if !(self.capacity_mva > 0.0) {
            return fail(format!("capacity {} MVA must be positive", self.capacity_mva));
        }
        if !(self.inertia_h >= 0.0) {
            return fail("inertia must be non-negative".into());
        }
        if self.headroom_mw < 0.0 || self.pm_setpoint_mw < 0.0 {
            return fail("headroom and setpoint must be non-negative".into());
        }
        if self.is_synchronous() {
            if !(self.droop > 0.0 && self.droop <= 1.0) {
                return fail(format!("droop {} outside (0, 1]", self.droop));
            }
            if let Some(g) = &self.governor {
                g.validate().or_else(fail)?;
            }
        } else if self.inertia_h != 0.0 || self.governor.is_some() {
            return fail("wind units carry no inertia and no governor".into());
        }
        Ok(())
    }

    /// Output at time `t` given the dynamic state (MW).
    fn output(&self, state: &GenState, t: f64) -> f64 {
        if !state.online {
            return 0.0;
        }
        if !self.is_synchronous() {
            return self.wind_profile.as_ref().map_or(self.pm_setpoint_mw, |p| p.value_at(t));
        }
        self.pm_setpoint_mw + self.pm_deviation(&state.x)
    }

    fn pm_deviation(&self, x: &[f64; GOV_STATES]) -> f64 {
        let dev = match self.governor {
            None => 0.0,
            Some(GovernorModel::FirstOrder { .. }) => x[0],
            Some(GovernorModel::Hydro { .. }) => -2.0 * x[1] + 3.0 * x[2],
            Some(GovernorModel::ThermalReheat { hp_fraction, .. }) => {
                hp_fraction * x[0] + (1.0 - hp_fraction) * x[1]
            }
        };
        dev.clamp(-self.pm_setpoint_mw, self.headroom_mw)
    }

    /// Governor state derivatives for a frequency deviation `delta_f` (Hz).
    fn derivatives(&self, x: &[f64; GOV_STATES], delta_f: f64, f0: f64) -> [f64; GOV_STATES] {
        let gain = self.capacity_mva / self.droop / f0;
        let target = |df: f64| (-gain * df).clamp(-self.pm_setpoint_mw, self.headroom_mw);
        match self.governor {
            None => [0.0; GOV_STATES],
            Some(GovernorModel::FirstOrder { time_constant_s }) => {
                [(target(delta_f) - x[0]) / time_constant_s, 0.0, 0.0]
            }
            Some(GovernorModel::Hydro { servo_time_s, water_time_s, temporary_droop_ratio, reset_time_s }) => {
                let r = temporary_droop_ratio;
                let seen = delta_f / r + (1.0 - 1.0 / r) * x[0];
                [
                    (delta_f - x[0]) / (r * reset_time_s),
                    (target(seen) - x[1]) / servo_time_s,
                    (x[1] - x[2]) / (0.5 * water_time_s),
                ]
            }
            Some(GovernorModel::ThermalReheat { servo_time_s, reheat_time_s, .. }) => [
                (target(delta_f) - x[0]) / servo_time_s,
                (x[0] - x[1]) / reheat_time_s,
                0.0,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: String,
    pub p_nominal: Profile,
    /// Carried for completeness; the dynamics ignore reactive power.
    #[serde(default)]
    pub q_nominal: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    GeneratorTrip { id: String },
    LoadStep { bus: String, mw: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Per-bus damped oscillation superimposed on the COI frequency, restarted at
/// every event.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BusPerturbation {
    pub amplitude_hz: f64,
    pub tau_s: f64,
    pub osc_hz: f64,
    pub phase_rad: f64,
}

impl BusPerturbation {
    pub fn value(&self, since_event: f64) -> f64 {
        if self.amplitude_hz == 0.0 || since_event < 0.0 {
            return 0.0;
        }
        self.amplitude_hz
            * (-since_event / self.tau_s).exp()
            * (2.0 * PI * self.osc_hz * since_event + self.phase_rad).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenState {
    pub online: bool,
    x: [f64; GOV_STATES],
}

/// Dynamic state of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub t: f64,
    /// COI frequency deviation, Hz.
    pub delta_f: f64,
    /// Inertia constant of the online synchronous fleet on `s_sys`, s (scaled).
    pub h_sys: f64,
    /// Online synchronous capacity, MVA.
    pub s_sys: f64,
    pub gens: Vec<GenState>,
    /// Serve factor per load, percent of nominal.
    pub serve_pct: Vec<u8>,
    pub load_offset_mw: Vec<f64>,
    pub collapsed: bool,
    pub last_event_time: Option<f64>,
}

impl GridState {
    pub fn frequency(&self, f0: f64) -> f64 {
        f0 + self.delta_f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    pub f0: f64,
    /// Frequency damping on the synchronous base, per unit.
    pub damping_pu: f64,
    /// Global multiplier on every inertia constant.
    pub inertia_scale: f64,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

impl GridModel {
    pub fn new(
        f0: f64,
        damping_pu: f64,
        generators: Vec<Generator>,
        loads: Vec<Load>,
    ) -> Result<Self, GridError> {
        for (i, g) in generators.iter().enumerate() {
            g.validate()?;
            if generators[..i].iter().any(|o| o.id == g.id) {
                return Err(GridError::InvalidGenerator { id: g.id.clone(), reason: "duplicate id".into() });
            }
        }
        Ok(Self { f0, damping_pu, inertia_scale: 1.0, generators, loads })
    }

    pub fn with_inertia_scale(mut self, scale: f64) -> Self {
        self.inertia_scale = scale;
        self
    }

    pub fn generator_index(&self, id: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.id == id)
    }

    pub fn load_index(&self, bus: &str) -> Option<usize> {
        self.loads.iter().position(|l| l.bus == bus)
    }

    pub fn initial_state(&self) -> GridState {
        let gens = self
            .generators
            .iter()
            .map(|g| GenState { online: g.online, x: [0.0; GOV_STATES] })
            .collect();
        let mut state = GridState {
            t: 0.0,
            delta_f: 0.0,
            h_sys: 0.0,
            s_sys: 0.0,
            gens,
            serve_pct: vec![100; self.loads.len()],
            load_offset_mw: vec![0.0; self.loads.len()],
            collapsed: false,
            last_event_time: None,
        };
        self.refresh_aggregates(&mut state);
        state
    }

    fn refresh_aggregates(&self, state: &mut GridState) {
        let (mut hs, mut s) = (0.0, 0.0);
        for (g, st) in self.generators.iter().zip(&state.gens) {
            if st.online && g.is_synchronous() {
                hs += g.inertia_h * self.inertia_scale * g.capacity_mva;
                s += g.capacity_mva;
            }
        }
        state.s_sys = s;
        state.h_sys = if s > 0.0 { hs / s } else { 0.0 };
    }

    pub fn nominal_load_mw(&self, state: &GridState, i: usize, t: f64) -> f64 {
        self.loads[i].p_nominal.value_at(t) + state.load_offset_mw[i]
    }

    pub fn served_load_mw(&self, state: &GridState, t: f64) -> f64 {
        (0..self.loads.len())
            .map(|i| self.nominal_load_mw(state, i, t) * state.serve_pct[i] as f64 / 100.0)
            .sum()
    }

    pub fn generation_mw(&self, state: &GridState, t: f64) -> f64 {
        self.generators.iter().zip(&state.gens).map(|(g, st)| g.output(st, t)).sum()
    }

    /// Mechanical power of every generator, MW.
    pub fn generator_outputs(&self, state: &GridState) -> Vec<f64> {
        self.generators.iter().zip(&state.gens).map(|(g, st)| g.output(st, state.t)).collect()
    }

    /// Generation minus served load, MW (positive means surplus).
    pub fn power_balance_mw(&self, state: &GridState) -> f64 {
        self.generation_mw(state, state.t) - self.served_load_mw(state, state.t)
    }

    /// Applies an event immediately, regardless of its timestamp.
    pub fn apply_event(&self, state: &mut GridState, event: &Event) -> Result<(), GridError> {
        match &event.kind {
            EventKind::GeneratorTrip { id } => {
                let i = self.generator_index(id).ok_or_else(|| GridError::UnknownGenerator(id.clone()))?;
                state.gens[i].online = false;
                state.gens[i].x = [0.0; GOV_STATES];
                self.refresh_aggregates(state);
            }
            EventKind::LoadStep { bus, mw } => {
                let i = self.load_index(bus).ok_or_else(|| GridError::UnknownBus(bus.clone()))?;
                state.load_offset_mw[i] += mw;
            }
        }
        state.last_event_time = Some(state.t);
        Ok(())
    }

    /// Right-hand side of the continuous dynamics at frozen algebraic inputs.
    fn rhs(&self, state: &GridState, y: &[f64], imbalance_mw: f64, dy: &mut [f64]) {
        let delta_f = y[0];
        let mut pm_dev = 0.0;
        for (i, (g, st)) in self.generators.iter().zip(&state.gens).enumerate() {
            let base = 1 + i * GOV_STATES;
            let x: [f64; GOV_STATES] = y[base..base + GOV_STATES].try_into().unwrap();
            if st.online && g.is_synchronous() {
                pm_dev += g.pm_deviation(&x);
                let d = g.derivatives(&x, delta_f, self.f0);
                dy[base..base + GOV_STATES].copy_from_slice(&d);
            } else {
                dy[base..base + GOV_STATES].fill(0.0);
            }
        }
        let m = 2.0 * state.h_sys * state.s_sys / self.f0;
        dy[0] = if m > 0.0 {
            (imbalance_mw + pm_dev - self.damping_pu * state.s_sys * delta_f / self.f0) / m
        } else {
            0.0
        };
    }

    /// Advances one step: events and serve-factor commands take effect at the
    /// start of the step, then the continuous states are integrated over `dt`.
    pub fn step(
        &self,
        state: &GridState,
        events_due: &[Event],
        shed_commands: &[(usize, u8)],
        dt: f64,
    ) -> Result<GridState, GridError> {
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(GridError::InvalidStep(dt));
        }
        let mut next = state.clone();
        for e in events_due {
            self.apply_event(&mut next, e)?;
        }
        for &(load, pct) in shed_commands {
            if load >= next.serve_pct.len() {
                return Err(GridError::UnknownBus(load.to_string()));
            }
            next.serve_pct[load] = pct;
        }

        // Setpoints, wind and load are held over the step.
        let t = next.t;
        let wind: f64 = self
            .generators
            .iter()
            .zip(&next.gens)
            .filter(|(g, _)| !g.is_synchronous())
            .map(|(g, st)| g.output(st, t))
            .sum();
        let setpoints: f64 = self
            .generators
            .iter()
            .zip(&next.gens)
            .filter(|(g, st)| st.online && g.is_synchronous())
            .map(|(g, _)| g.pm_setpoint_mw)
            .sum();
        let imbalance = setpoints + wind - self.served_load_mw(&next, t);

        let dim = 1 + self.generators.len() * GOV_STATES;
        let mut y = Vec::with_capacity(dim);
        y.push(next.delta_f);
        for st in &next.gens {
            y.extend_from_slice(&st.x);
        }
        let mut k = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
        let mut tmp = vec![0.0; dim];
        self.rhs(&next, &y, imbalance, &mut k[0]);
        for (stage, h) in [(1, 0.5 * dt), (2, 0.5 * dt), (3, dt)] {
            for j in 0..dim {
                tmp[j] = y[j] + h * k[stage - 1][j];
            }
            let (done, rest) = k.split_at_mut(stage);
            let _ = done;
            self.rhs(&next, &tmp, imbalance, &mut rest[0]);
        }
        for j in 0..dim {
            y[j] += dt / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
        }
        next.delta_f = y[0];
        for (i, st) in next.gens.iter_mut().enumerate() {
            st.x.copy_from_slice(&y[1 + i * GOV_STATES..1 + (i + 1) * GOV_STATES]);
        }
        next.t = t + dt;
        if next.frequency(self.f0) < COLLAPSE_HZ {
            next.collapsed = true;
        }
        Ok(next)
    }

    /// Initial |df/dt| right after `state`, with governors not yet responding.
    pub fn instantaneous_rocof(&self, state: &GridState) -> f64 {
        let m = 2.0 * state.h_sys * state.s_sys / self.f0;
        if m > 0.0 {
            self.power_balance_mw(state) / m
        } else {
            0.0
        }
    }
}

/// Frequency seen at a load bus: COI frequency plus the bus perturbation.
pub fn bus_frequency(model: &GridModel, state: &GridState, perturb: &BusPerturbation) -> f64 {
    let since = state.last_event_time.map_or(-1.0, |te| state.t - te);
    state.frequency(model.f0) + perturb.value(since)
}

/// Σ H·S over synchronous units, MVA·s.
fn stored_energy(fleet: &[Generator]) -> f64 {
    fleet.iter().filter(|g| g.is_synchronous()).map(|g| g.inertia_h * g.capacity_mva).sum()
}

/// Global multiplier on every inertia constant that makes the post-trip
/// |df/dt| of `surviving` equal `target_rocof`.
pub fn calibrate_inertia(
    target_rocof: f64,
    tripped_mw: f64,
    surviving: &[Generator],
    f0: f64,
) -> Result<f64, GridError> {
    if !(target_rocof > 0.0) {
        return Err(GridError::InvalidCalibration("target ROCOF"));
    }
    if !(tripped_mw > 0.0) {
        return Err(GridError::InvalidCalibration("tripped power"));
    }
    let hs = stored_energy(surviving);
    if !(hs > 0.0) {
        return Err(GridError::EmptyFleet);
    }
    Ok(f0 * tripped_mw / (2.0 * hs * target_rocof))
}

/// Post-trip |df/dt| predicted by the swing equation for a given inertia scale.
pub fn predicted_initial_rocof(tripped_mw: f64, surviving: &[Generator], scale: f64, f0: f64) -> f64 {
    f0 * tripped_mw / (2.0 * stored_energy(surviving) * scale)
}
