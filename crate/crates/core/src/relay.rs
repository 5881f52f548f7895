//! Distributed under-frequency load shedding and load restoration relays.
//!
//! Each load bus runs one [`RelayState`] fed by its own PMU frames. Shedding
//! is driven either by frequency or by ROCOF, restoration always by
//! frequency, and relays never talk to each other.

use crate::pmu::Frame;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use thiserror::Error;

/// Number of serve-factor levels, including 100%.
pub const LEVELS: usize = 7;

/// Small tolerance on timer comparisons, well below the 20 ms frame spacing.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelayError {
    #[error("threshold table: {0}")]
    Table(String),
    #[error("unknown scheme '{0}' (expected none, f_ls, rocof_a or rocof_b)")]
    UnknownScheme(String),
    #[error("relay config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    None,
    FLs,
    RocofA,
    RocofB,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::None, Scheme::FLs, Scheme::RocofA, Scheme::RocofB];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::FLs => "f_ls",
            Scheme::RocofA => "rocof_a",
            Scheme::RocofB => "rocof_b",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = RelayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s.trim())
            .ok_or_else(|| RelayError::UnknownScheme(s.to_string()))
    }
}

/// Serve factors and the thresholds that move between them.
///
/// Shedding rows are indexed by the level they shed down to (1..=6, stored
/// at 0..6); the restoration row is indexed by the level it restores up to
/// (0..=5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub factors: [u8; LEVELS],
    pub rocof_a: [f64; LEVELS - 1],
    pub rocof_b: [f64; LEVELS - 1],
    pub f_ls: [f64; LEVELS - 1],
    pub f_lr: [f64; LEVELS - 1],
}

impl Default for ThresholdTable {
    fn default() -> Self {
        Self {
            factors: [100, 95, 90, 85, 75, 60, 50],
            rocof_a: [0.2, 0.4, 0.6, 0.7, 1.0, 1.3],
            rocof_b: [0.2, 0.3, 0.4, 0.5, 1.0, 1.3],
            f_ls: [48.9, 48.8, 48.6, 48.4, 48.2, 48.0],
            f_lr: [49.75, 49.6, 49.5, 49.4, 49.2, 49.0],
        }
    }
}

impl ThresholdTable {
    pub fn validate(&self) -> Result<(), RelayError> {
        let strictly = |name: &str, v: &[f64], increasing: bool| {
            let ok = v.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
            if ok && v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                let dir = if increasing { "increasing" } else { "decreasing" };
                Err(RelayError::Table(format!("{name} must be strictly {dir}")))
            }
        };
        if !self.factors.windows(2).all(|w| w[1] < w[0]) || self.factors[0] != 100 {
            return Err(RelayError::Table("factors must start at 100 and strictly decrease".into()));
        }
        strictly("rocof_a", &self.rocof_a, true)?;
        strictly("rocof_b", &self.rocof_b, true)?;
        strictly("f_ls", &self.f_ls, false)?;
        strictly("f_lr", &self.f_lr, false)?;
        if self.rocof_a[0] <= 0.0 || self.rocof_b[0] <= 0.0 {
            return Err(RelayError::Table("ROCOF thresholds are magnitudes and must be positive".into()));
        }
        Ok(())
    }

    /// ROCOF magnitudes for a ROCOF scheme, `None` otherwise.
    pub fn rocof_row(&self, scheme: Scheme) -> Option<&[f64; LEVELS - 1]> {
        match scheme {
            Scheme::RocofA => Some(&self.rocof_a),
            Scheme::RocofB => Some(&self.rocof_b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelayConfig {
    pub scheme: Scheme,
    pub table: ThresholdTable,
    /// Time ROCOF must stay beyond a threshold before shedding, s.
    pub rocof_delay_s: f64,
    /// Consecutive frames below an f-LS threshold before shedding.
    pub f_ls_debounce_frames: usize,
    /// Consecutive frames above the f-LR threshold before restoring.
    pub lr_debounce_frames: usize,
    /// Minimum spacing between restoration steps, s.
    pub lr_delay_s: f64,
    /// Minimum time since the last active shedding condition before restoring, s.
    pub shed_settle_s: f64,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::None,
            table: ThresholdTable::default(),
            rocof_delay_s: 0.5,
            f_ls_debounce_frames: 2,
            lr_debounce_frames: 2,
            lr_delay_s: 5.0,
            shed_settle_s: 5.0,
        }
    }
}

impl RelayConfig {
    pub fn for_scheme(scheme: Scheme) -> Self {
        Self { scheme, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), RelayError> {
        self.table.validate()?;
        if !(self.rocof_delay_s >= 0.0 && self.lr_delay_s >= 0.0 && self.shed_settle_s >= 0.0) {
            return Err(RelayError::Config("delays must be non-negative".into()));
        }
        if self.f_ls_debounce_frames == 0 || self.lr_debounce_frames == 0 {
            return Err(RelayError::Config("debounce needs at least one frame".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "snake_case")]
pub enum Reason {
    LsRocof(usize),
    LsFreq(usize),
    Lr(usize),
}

impl Reason {
    pub fn is_shed(&self) -> bool {
        !matches!(self, Reason::Lr(_))
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::LsRocof(k) => write!(f, "ls_rocof({k})"),
            Reason::LsFreq(k) => write!(f, "ls_freq({k})"),
            Reason::Lr(k) => write!(f, "lr({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub bus: String,
    pub serve_factor: u8,
    pub reason: Reason,
    pub time: f64,
}

/// Per-bus relay. Frames must be fed in timestamp order.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayState {
    bus: String,
    cfg: RelayConfig,
    level: usize,
    /// Start of the current uninterrupted run beyond each ROCOF threshold.
    held_since: [Option<f64>; LEVELS - 1],
    /// Most recent valid frequencies, newest last.
    recent: VecDeque<f64>,
    last_shed_active: Option<f64>,
    lr_lockout_until: f64,
}

impl RelayState {
    pub fn new(bus: impl Into<String>, cfg: RelayConfig) -> Result<Self, RelayError> {
        cfg.validate()?;
        let depth = cfg.f_ls_debounce_frames.max(cfg.lr_debounce_frames);
        Ok(Self {
            bus: bus.into(),
            cfg,
            level: 0,
            held_since: [None; LEVELS - 1],
            recent: VecDeque::with_capacity(depth),
            last_shed_active: None,
            lr_lockout_until: f64::NEG_INFINITY,
        })
    }

    pub fn bus(&self) -> &str {
        &self.bus
    }

    pub fn config(&self) -> &RelayConfig {
        &self.cfg
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn serve_factor(&self) -> u8 {
        self.cfg.table.factors[self.level]
    }

    pub fn lr_lockout_until(&self) -> f64 {
        self.lr_lockout_until
    }

    pub fn reset(&mut self) {
        self.level = 0;
        self.held_since = [None; LEVELS - 1];
        self.recent.clear();
        self.last_shed_active = None;
        self.lr_lockout_until = f64::NEG_INFINITY;
    }

    /// Deepest level whose ROCOF threshold has been held for the full delay.
    fn rocof_trigger(&mut self, frame: &Frame) -> usize {
        let Some(row) = self.cfg.table.rocof_row(self.cfg.scheme) else {
            return 0;
        };
        if !frame.rocof_valid {
            return 0;
        }
        let now = frame.timestamp;
        let mut deepest = 0;
        for (i, thr) in row.iter().enumerate() {
            if frame.rocof <= -thr {
                let since = *self.held_since[i].get_or_insert(now);
                if now - since >= self.cfg.rocof_delay_s - TIME_EPS {
                    deepest = i + 1;
                }
            } else {
                self.held_since[i] = None;
            }
        }
        deepest
    }

    /// Extreme of the newest `n` frequencies, or `None` before `n` arrived.
    fn recent_extreme(&self, n: usize, max: bool) -> Option<f64> {
        if self.recent.len() < n {
            return None;
        }
        let it = self.recent.iter().rev().take(n).copied();
        Some(if max { it.fold(f64::NEG_INFINITY, f64::max) } else { it.fold(f64::INFINITY, f64::min) })
    }

    fn freq_trigger(&self) -> usize {
        if self.cfg.scheme != Scheme::FLs {
            return 0;
        }
        let Some(highest) = self.recent_extreme(self.cfg.f_ls_debounce_frames, true) else {
            return 0;
        };
        self.cfg.table.f_ls.iter().rposition(|&thr| highest <= thr).map_or(0, |i| i + 1)
    }

    /// Processes one frame and returns the command it causes, if any.
    pub fn on_frame(&mut self, frame: &Frame) -> Option<Command> {
        if !frame.valid || !frame.frequency.is_finite() {
            return None;
        }
        let now = frame.timestamp;
        let depth = self.cfg.f_ls_debounce_frames.max(self.cfg.lr_debounce_frames);
        if self.recent.len() == depth {
            self.recent.pop_front();
        }
        self.recent.push_back(frame.frequency);

        let (trigger, reason): (usize, fn(usize) -> Reason) = match self.cfg.scheme {
            Scheme::RocofA | Scheme::RocofB => (self.rocof_trigger(frame), Reason::LsRocof),
            Scheme::FLs => (self.freq_trigger(), Reason::LsFreq),
            Scheme::None => (0, Reason::LsFreq),
        };
        if trigger > 0 {
            self.last_shed_active = Some(now);
        }
        if trigger > self.level {
            self.level = trigger;
            return Some(self.command(reason(trigger), now));
        }

        if self.level > 0 {
            let gate = self.cfg.table.f_lr[self.level - 1];
            let settled = self.last_shed_active.map_or(true, |t| now - t >= self.cfg.shed_settle_s - TIME_EPS);
            let unlocked = now >= self.lr_lockout_until - TIME_EPS;
            let high = self.recent_extreme(self.cfg.lr_debounce_frames, false).is_some_and(|lo| lo >= gate);
            if settled && unlocked && high {
                self.level -= 1;
                self.lr_lockout_until = now + self.cfg.lr_delay_s;
                return Some(self.command(Reason::Lr(self.level), now));
            }
        }
        None
    }

    fn command(&self, reason: Reason, time: f64) -> Command {
        Command { bus: self.bus.clone(), serve_factor: self.serve_factor(), reason, time }
    }
}

/// Writes a command log as `time_s,bus,serve_factor_pct,reason`.
pub fn write_commands_csv<W: Write>(commands: &[Command], mut w: W) -> io::Result<()> {
    writeln!(w, "time_s,bus,serve_factor_pct,reason")?;
    for c in commands {
        writeln!(w, "{:.14e},{},{},{}", c.time, c.bus, c.serve_factor, c.reason)?;
    }
    Ok(())
}
