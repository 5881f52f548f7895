//! Point-on-wave voltage synthesis.
//!
//! Waveforms are produced from a piecewise-linear frequency trajectory. The
//! instantaneous phase is the exact integral of the trajectory (quadratic per
//! segment), so the synthesized tone carries no integration error of its own.

use std::f64::consts::{PI, SQRT_2};
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use thiserror::Error;

use crate::pmu::DEFAULT_REPORTING_RATE;

/// Default point-on-wave sampling rate, samples/s.
pub const DEFAULT_SAMPLE_RATE: u32 = 10_000;

/// Admissible frequency band for trajectories, Hz.
pub const MIN_TRAJECTORY_HZ: f64 = 40.0;
pub const MAX_TRAJECTORY_HZ: f64 = 60.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("trajectory needs at least one breakpoint")]
    EmptyTrajectory,
    #[error("breakpoint {index} at t={time} s is not after its predecessor")]
    NonMonotone { index: usize, time: f64 },
    #[error("breakpoint {index} frequency {freq} Hz outside [40, 60] Hz")]
    FrequencyOutOfRange { index: usize, freq: f64 },
    #[error("duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("noise standard deviation must be non-negative and finite, got {0}")]
    InvalidNoise(f64),
    #[error("sample rate {0} is not a positive multiple of the {DEFAULT_REPORTING_RATE} fps reporting rate")]
    InvalidSampleRate(u32),
}

/// Piecewise-linear frequency trajectory `f(t)`.
///
/// Before the first breakpoint and after the last one the frequency is held
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrajectory {
    breakpoints: Vec<(f64, f64)>,
    /// Phase in cycles accumulated from the first breakpoint up to each breakpoint.
    cumulative: Vec<f64>,
}

impl FrequencyTrajectory {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self, SignalError> {
        if breakpoints.is_empty() {
            return Err(SignalError::EmptyTrajectory);
        }
        for (index, &(time, freq)) in breakpoints.iter().enumerate() {
            if !(MIN_TRAJECTORY_HZ..=MAX_TRAJECTORY_HZ).contains(&freq) {
                return Err(SignalError::FrequencyOutOfRange { index, freq });
            }
            if index > 0 && !(time > breakpoints[index - 1].0) {
                return Err(SignalError::NonMonotone { index, time });
            }
        }
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        cumulative.push(0.0);
        for w in breakpoints.windows(2) {
            let (ta, fa) = w[0];
            let (tb, fb) = w[1];
            let last = *cumulative.last().unwrap();
            cumulative.push(last + 0.5 * (fa + fb) * (tb - ta));
        }
        Ok(Self { breakpoints, cumulative })
    }

    pub fn constant(freq: f64, duration: f64) -> Result<Self, SignalError> {
        Self::new(vec![(0.0, freq), (duration, freq)])
    }

    /// Linear ramp from `f_start` to `f_end` at `rate` Hz/s, starting at t = 0.
    pub fn ramp(f_start: f64, f_end: f64, rate: f64) -> Result<Self, SignalError> {
        let duration = ((f_end - f_start) / rate).abs();
        Self::new(vec![(0.0, f_start), (duration, f_end)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn start_time(&self) -> f64 {
        self.breakpoints[0].0
    }

    pub fn end_time(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].0
    }

    /// Index of the segment containing `t` (`None` outside the breakpoint span).
    fn segment(&self, t: f64) -> Option<usize> {
        if t < self.start_time() || t >= self.end_time() {
            return None;
        }
        let idx = self.breakpoints.partition_point(|&(bt, _)| bt <= t);
        Some(idx - 1)
    }

    pub fn frequency_at(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(i) => {
                let (ta, fa) = self.breakpoints[i];
                let (tb, fb) = self.breakpoints[i + 1];
                fa + (fb - fa) * (t - ta) / (tb - ta)
            }
            None if t < self.start_time() => self.breakpoints[0].1,
            None => self.breakpoints[self.breakpoints.len() - 1].1,
        }
    }

    /// Slope of the trajectory at `t`, Hz/s.
    pub fn rocof_at(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(i) => {
                let (ta, fa) = self.breakpoints[i];
                let (tb, fb) = self.breakpoints[i + 1];
                (fb - fa) / (tb - ta)
            }
            None => 0.0,
        }
    }

    /// Instantaneous phase `∫ f dτ` from the first breakpoint to `t`, in cycles.
    pub fn phase_cycles_at(&self, t: f64) -> f64 {
        let start = self.start_time();
        if t <= start {
            return self.breakpoints[0].1 * (t - start);
        }
        match self.segment(t) {
            Some(i) => {
                let (ta, fa) = self.breakpoints[i];
                let (tb, fb) = self.breakpoints[i + 1];
                let slope = (fb - fa) / (tb - ta);
                let tau = t - ta;
                self.cumulative[i] + fa * tau + 0.5 * slope * tau * tau
            }
            None => {
                let last = self.breakpoints.len() - 1;
                self.cumulative[last] + self.breakpoints[last].1 * (t - self.end_time())
            }
        }
    }
}

/// Uniformly sampled real waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub sample_rate: u32,
    /// Time of `samples[0]`, seconds.
    pub t0: f64,
    pub samples: Vec<f64>,
}

impl SampleStream {
    pub fn time_of(&self, index: usize) -> f64 {
        self.t0 + index as f64 / self.sample_rate as f64
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Debug dump as `time_s,value_pu`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time_s,value_pu")?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{:.9},{:.12e}", self.time_of(i), v)?;
        }
        Ok(())
    }

    /// Multiplies every sample by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            sample_rate: self.sample_rate,
            t0: self.t0,
            samples: self.samples.iter().map(|v| v * k).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisParams {
    /// RMS amplitude, per unit.
    pub amplitude: f64,
    /// Phase offset, rad.
    pub phase0: f64,
    /// Standard deviation of additive Gaussian noise, per unit.
    pub noise_std: f64,
    pub seed: u64,
    pub sample_rate: u32,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            phase0: 0.0,
            noise_std: 0.0,
            seed: 0,
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

impl SynthesisParams {
    fn validate(&self) -> Result<(), SignalError> {
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(SignalError::InvalidNoise(self.noise_std));
        }
        if self.sample_rate == 0 || self.sample_rate % DEFAULT_REPORTING_RATE != 0 {
            return Err(SignalError::InvalidSampleRate(self.sample_rate));
        }
        Ok(())
    }
}

/// Streaming phase-continuous synthesizer.
///
/// The trajectory is supplied one linear segment at a time through
/// [`Synthesizer::extend_to`]; every sample whose time falls before the end of
/// the segment is emitted. Batch [`synthesize`] and the closed-loop harness
/// both go through this type, so they produce identical samples.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    sample_rate: f64,
    t0: f64,
    peak: f64,
    phase0: f64,
    noise: Option<(ChaCha8Rng, Normal<f64>)>,
    next_index: u64,
    seg_t: f64,
    seg_f: f64,
    /// Phase at `seg_t`, cycles, reduced to [0, 1).
    seg_phase: f64,
}

impl Synthesizer {
    pub fn new(t0: f64, f_start: f64, params: &SynthesisParams) -> Result<Self, SignalError> {
        params.validate()?;
        let noise = (params.noise_std > 0.0).then(|| {
            (
                ChaCha8Rng::seed_from_u64(params.seed),
                Normal::new(0.0, params.noise_std).expect("validated noise std"),
            )
        });
        Ok(Self {
            sample_rate: params.sample_rate as f64,
            t0,
            peak: params.amplitude * SQRT_2,
            phase0: params.phase0,
            noise,
            next_index: 0,
            seg_t: t0,
            seg_f: f_start,
            seg_phase: 0.0,
        })
    }

    /// Number of samples emitted so far.
    pub fn emitted(&self) -> u64 {
        self.next_index
    }

    /// Continues the trajectory linearly to `(t_end, f_end)` and appends all
    /// samples with time `< t_end` to `out`.
    pub fn extend_to(&mut self, t_end: f64, f_end: f64, out: &mut Vec<f64>) {
        let len = t_end - self.seg_t;
        if len <= 0.0 {
            return;
        }
        let slope = (f_end - self.seg_f) / len;
        let end_index = (((t_end - self.t0) * self.sample_rate) - 1e-6).ceil().max(0.0) as u64;
        while self.next_index < end_index {
            let t = self.t0 + self.next_index as f64 / self.sample_rate;
            let tau = t - self.seg_t;
            let cycles = self.seg_phase + self.seg_f * tau + 0.5 * slope * tau * tau;
            let mut v = self.peak * (2.0 * PI * cycles.fract() + self.phase0).cos();
            if let Some((rng, dist)) = self.noise.as_mut() {
                v += rng.sample(*dist);
            }
            out.push(v);
            self.next_index += 1;
        }
        let advanced = self.seg_phase + self.seg_f * len + 0.5 * slope * len * len;
        self.seg_phase = advanced - advanced.floor();
        self.seg_t = t_end;
        self.seg_f = f_end;
    }
}

/// Synthesizes `duration` seconds of `amplitude·√2·cos(2π·Φ(t) + phase0) + noise`
/// starting at the first breakpoint of `traj`.
pub fn synthesize(
    traj: &FrequencyTrajectory,
    params: &SynthesisParams,
    duration: f64,
) -> Result<SampleStream, SignalError> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(SignalError::InvalidDuration(duration));
    }
    let t0 = traj.start_time();
    let bps = traj.breakpoints();
    let mut synth = Synthesizer::new(t0, bps[0].1, params)?;
    let t_stop = t0 + duration;
    let mut samples = Vec::with_capacity((duration * params.sample_rate as f64).ceil() as usize);
    for &(t, f) in &bps[1..] {
        if t >= t_stop {
            synth.extend_to(t_stop, traj.frequency_at(t_stop), &mut samples);
            break;
        }
        synth.extend_to(t, f, &mut samples);
    }
    let last = bps[bps.len() - 1];
    if last.0 < t_stop {
        synth.extend_to(t_stop, last.1, &mut samples);
    }
    Ok(SampleStream { sample_rate: params.sample_rate, t0, samples })
}

/// The 45 → 55 Hz, +1 Hz/s, 1 pu noise-free frequency ramp.
pub fn ramp_test_signal() -> (SampleStream, FrequencyTrajectory) {
    let traj = FrequencyTrajectory::ramp(45.0, 55.0, 1.0).expect("static ramp is valid");
    let stream = synthesize(&traj, &SynthesisParams::default(), traj.end_time())
        .expect("static ramp parameters are valid");
    (stream, traj)
}
