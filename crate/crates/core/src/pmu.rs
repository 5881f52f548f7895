//! P-class PMU model.
//!
//! Synchrophasor, frequency and ROCOF are estimated from a Hann-windowed DFT
//! with three-point interpolation, refined by iteratively subtracting the
//! spectral image of the negative-frequency component (enhanced IpDFT). ROCOF
//! is the finite difference of two consecutive frequency estimates.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{ramp_test_signal, synthesize, FrequencyTrajectory, SampleStream, SynthesisParams};
use crate::NOMINAL_FREQUENCY;

pub const DEFAULT_REPORTING_RATE: u32 = 50;

/// Band searched for the fundamental, Hz.
const SEARCH_BAND: (f64, f64) = (40.0, 60.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmuError {
    #[error("no signal: window has zero energy")]
    NoSignal,
    #[error("window has {got} samples, estimator expects {expected}")]
    WindowLength { expected: usize, got: usize },
    #[error("stream of {got} samples is shorter than one {window}-sample window")]
    StreamTooShort { window: usize, got: usize },
    #[error("invalid estimator configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Observation window in nominal cycles.
    pub window_cycles: u32,
    pub sample_rate: u32,
    /// Rounds of negative-image compensation.
    pub eipdft_iterations: u32,
    pub reporting_rate: u32,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            window_cycles: 3,
            sample_rate: crate::signal::DEFAULT_SAMPLE_RATE,
            eipdft_iterations: 2,
            reporting_rate: DEFAULT_REPORTING_RATE,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), PmuError> {
        if self.window_cycles == 0 || self.sample_rate == 0 || self.reporting_rate == 0 {
            return Err(PmuError::Config("window, sample rate and reporting rate must be positive".into()));
        }
        let window = self.window_cycles as f64 * self.sample_rate as f64 / NOMINAL_FREQUENCY;
        if window.fract() != 0.0 {
            return Err(PmuError::Config(format!("window of {window} samples is not integral")));
        }
        if self.sample_rate % self.reporting_rate != 0 {
            return Err(PmuError::Config(format!(
                "sample rate {} is not a multiple of reporting rate {}",
                self.sample_rate, self.reporting_rate
            )));
        }
        Ok(())
    }

    pub fn window_len(&self) -> usize {
        (self.window_cycles as u64 * self.sample_rate as u64 / NOMINAL_FREQUENCY as u64) as usize
    }

    /// Samples between consecutive frames.
    pub fn hop_len(&self) -> usize {
        (self.sample_rate / self.reporting_rate) as usize
    }

    pub fn window_duration(&self) -> f64 {
        self.window_len() as f64 / self.sample_rate as f64
    }

    pub fn report_interval(&self) -> f64 {
        1.0 / self.reporting_rate as f64
    }
}

/// Phasor estimate of one window, phase referred to the window center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasorEstimate {
    /// RMS magnitude, per unit.
    pub magnitude: f64,
    /// Instantaneous phase of the fundamental at the window center, rad in (−π, π].
    pub phase: f64,
    pub frequency: f64,
}

/// One PMU report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    /// Window center, s.
    pub timestamp: f64,
    pub magnitude: f64,
    /// Synchrophasor angle relative to a nominal-frequency reference, rad in (−π, π].
    pub phase: f64,
    pub frequency: f64,
    pub rocof: f64,
    /// False for the first frame of a stream and for frames following an invalid one.
    pub rocof_valid: bool,
    /// False when estimation failed for this window.
    pub valid: bool,
}

impl Frame {
    fn invalid(timestamp: f64) -> Self {
        Self {
            timestamp,
            magnitude: f64::NAN,
            phase: f64::NAN,
            frequency: f64::NAN,
            rocof: 0.0,
            rocof_valid: false,
            valid: false,
        }
    }
}

/// ROCOF as the finite difference of consecutive frequency estimates.
pub fn rocof(current: f64, previous: f64, interval: f64) -> f64 {
    (current - previous) / interval
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Dirichlet kernel `Σ_{n<N} e^{−j2πνn/N}`.
fn dirichlet(nu: f64, n: f64) -> Complex64 {
    let den = (PI * nu / n).sin();
    if den.abs() < 1e-12 {
        return Complex64::new(n, 0.0);
    }
    let mag = (PI * nu).sin() / den;
    Complex64::from_polar(mag, -PI * nu * (n - 1.0) / n)
}

/// Estimator with precomputed window and DFT kernels for one configuration.
#[derive(Debug, Clone)]
pub struct Estimator {
    cfg: EstimatorConfig,
    n: usize,
    window: Vec<f64>,
    window_sum: f64,
    /// Bins evaluated, contiguous from `first_bin`.
    first_bin: usize,
    kernels: Vec<Vec<Complex64>>,
    /// Inclusive range of bins searched for the spectral peak.
    search: (usize, usize),
}

impl Estimator {
    pub fn new(cfg: EstimatorConfig) -> Result<Self, PmuError> {
        cfg.validate()?;
        let n = cfg.window_len();
        let nf = n as f64;
        let window: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / nf).cos()).collect();
        let window_sum = window.iter().sum();
        let spacing = cfg.sample_rate as f64 / nf;
        let lo = ((SEARCH_BAND.0 - 0.5 * spacing) / spacing).ceil().max(2.0) as usize;
        let hi = ((SEARCH_BAND.1 + 0.5 * spacing) / spacing).floor() as usize;
        let hi = hi.max(lo);
        let first_bin = lo - 1;
        let kernels = (first_bin..=hi + 1)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let arg = -2.0 * PI * ((k * i) % n) as f64 / nf;
                        Complex64::new(arg.cos(), arg.sin()) * window[i]
                    })
                    .collect()
            })
            .collect();
        Ok(Self { cfg, n, window, window_sum, first_bin, kernels, search: (lo, hi) })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Normalized window spectrum: `W(ν)/W(0)`.
    fn kernel(&self, nu: f64) -> Complex64 {
        let n = self.n as f64;
        (dirichlet(nu, n) * 0.5 - dirichlet(nu - 1.0, n) * 0.25 - dirichlet(nu + 1.0, n) * 0.25)
            / (0.5 * n)
    }

    /// Returns `(peak bin, fractional offset)` from three-point interpolation.
    fn interpolate(&self, spec: &[Complex64]) -> (usize, f64) {
        let (lo, hi) = self.search;
        let mut peak = lo;
        for k in lo..=hi {
            if spec[k - self.first_bin].norm() > spec[peak - self.first_bin].norm() {
                peak = k;
            }
        }
        let i = peak - self.first_bin;
        let (a, b, c) = (spec[i - 1].norm(), spec[i].norm(), spec[i + 1].norm());
        let delta = 2.0 * (c - a) / (a + 2.0 * b + c);
        (peak, delta)
    }

    pub fn estimate(&self, samples: &[f64]) -> Result<PhasorEstimate, PmuError> {
        if samples.len() != self.n {
            return Err(PmuError::WindowLength { expected: self.n, got: samples.len() });
        }
        if samples.iter().all(|&x| x == 0.0) {
            return Err(PmuError::NoSignal);
        }
        let raw: Vec<Complex64> = self
            .kernels
            .iter()
            .map(|kern| {
                kern.iter().zip(samples).map(|(k, &x)| k * x).sum::<Complex64>() / self.window_sum
            })
            .collect();
        if raw.iter().all(|x| x.norm() == 0.0) {
            return Err(PmuError::NoSignal);
        }

        let (mut peak, mut delta) = self.interpolate(&raw);
        let mut amp = raw[peak - self.first_bin] / self.kernel(-delta);
        let mut spec = raw.clone();
        for _ in 0..self.cfg.eipdft_iterations {
            let nu = peak as f64 + delta;
            for (i, x) in spec.iter_mut().enumerate() {
                let k = (self.first_bin + i) as f64;
                *x = raw[i] - amp.conj() * self.kernel(k + nu);
            }
            (peak, delta) = self.interpolate(&spec);
            amp = spec[peak - self.first_bin] / self.kernel(-delta);
        }
        if !(amp.norm() > 0.0) || !delta.is_finite() {
            return Err(PmuError::NoSignal);
        }
        let nu = peak as f64 + delta;
        Ok(PhasorEstimate {
            magnitude: std::f64::consts::SQRT_2 * amp.norm(),
            phase: wrap_angle(amp.arg() + PI * nu),
            frequency: nu * self.cfg.sample_rate as f64 / self.n as f64,
        })
    }
}

/// Single-window estimate; builds a throwaway [`Estimator`].
pub fn estimate_frame(window: &[f64], cfg: &EstimatorConfig) -> Result<PhasorEstimate, PmuError> {
    Estimator::new(*cfg)?.estimate(window)
}

/// Streaming PMU: accepts samples in arbitrary chunks and emits frames in order.
#[derive(Debug, Clone)]
pub struct PmuStream {
    est: Estimator,
    t0: f64,
    buffer: Vec<f64>,
    /// Absolute index of `buffer[0]`.
    buffer_start: u64,
    next_frame: u64,
    prev_frequency: Option<f64>,
}

impl PmuStream {
    pub fn new(cfg: EstimatorConfig, t0: f64) -> Result<Self, PmuError> {
        Ok(Self {
            est: Estimator::new(cfg)?,
            t0,
            buffer: Vec::new(),
            buffer_start: 0,
            next_frame: 0,
            prev_frequency: None,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        self.est.config()
    }

    /// Center time of frame `k`.
    pub fn frame_time(&self, k: u64) -> f64 {
        let cfg = self.est.config();
        let center = k * cfg.hop_len() as u64 + (cfg.window_len() / 2) as u64;
        self.t0 + center as f64 / cfg.sample_rate as f64
    }

    pub fn push(&mut self, samples: &[f64], out: &mut Vec<Frame>) {
        self.buffer.extend_from_slice(samples);
        let cfg = *self.est.config();
        let (n, hop) = (cfg.window_len(), cfg.hop_len() as u64);
        loop {
            let start = self.next_frame * hop;
            let offset = (start - self.buffer_start) as usize;
            if offset + n > self.buffer.len() {
                break;
            }
            let timestamp = self.frame_time(self.next_frame);
            let frame = match self.est.estimate(&self.buffer[offset..offset + n]) {
                Ok(p) => {
                    let reference = 2.0 * PI * (NOMINAL_FREQUENCY * timestamp).fract();
                    let (r, rocof_valid) = match self.prev_frequency {
                        Some(prev) => (rocof(p.frequency, prev, cfg.report_interval()), true),
                        None => (0.0, false),
                    };
                    self.prev_frequency = Some(p.frequency);
                    Frame {
                        timestamp,
                        magnitude: p.magnitude,
                        phase: wrap_angle(p.phase - reference),
                        frequency: p.frequency,
                        rocof: r,
                        rocof_valid,
                        valid: true,
                    }
                }
                Err(_) => {
                    self.prev_frequency = None;
                    Frame::invalid(timestamp)
                }
            };
            out.push(frame);
            self.next_frame += 1;
        }
        let keep_from = self.next_frame * hop;
        let drop = (keep_from - self.buffer_start) as usize;
        if drop > 0 && drop <= self.buffer.len() {
            self.buffer.drain(..drop);
            self.buffer_start = keep_from;
        }
    }
}

/// Runs the PMU over a whole stream: one frame per 20 ms hop, window-centered timestamps.
pub fn run_pmu(stream: &SampleStream, cfg: &EstimatorConfig) -> Result<Vec<Frame>, PmuError> {
    let cfg = EstimatorConfig { sample_rate: stream.sample_rate, ..*cfg };
    let mut pmu = PmuStream::new(cfg, stream.t0)?;
    let n = cfg.window_len();
    if stream.samples.len() < n {
        return Err(PmuError::StreamTooShort { window: n, got: stream.samples.len() });
    }
    let mut frames = Vec::with_capacity((stream.samples.len() - n) / cfg.hop_len() + 1);
    pmu.push(&stream.samples, &mut frames);
    Ok(frames)
}

/// Accuracy metrics against a known trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Max |frequency error|, Hz.
    pub max_fe: f64,
    /// Max |ROCOF error|, Hz/s.
    pub max_rfe: f64,
    /// Standard deviation of ROCOF estimates, Hz/s.
    pub rocof_std: f64,
    pub mean_rocof: f64,
    /// Max total vector error, fraction.
    pub max_tve: f64,
    pub frames_scored: usize,
}

/// Scores frames against the generating trajectory, skipping frames within two
/// window lengths of either end of the trajectory.
pub fn score_frames(
    frames: &[Frame],
    traj: &FrequencyTrajectory,
    params: &SynthesisParams,
    cfg: &EstimatorConfig,
    stream_end: f64,
) -> ErrorReport {
    let guard = 2.0 * cfg.window_duration();
    let (t_lo, t_hi) = (traj.start_time() + guard, stream_end - guard);
    let mut max_fe: f64 = 0.0;
    let mut max_rfe: f64 = 0.0;
    let mut max_tve: f64 = 0.0;
    let mut rocofs = Vec::new();
    let mut scored = 0;
    for f in frames.iter().filter(|f| f.valid && f.timestamp >= t_lo && f.timestamp <= t_hi) {
        scored += 1;
        max_fe = max_fe.max((f.frequency - traj.frequency_at(f.timestamp)).abs());
        let true_phase = 2.0 * PI * traj.phase_cycles_at(f.timestamp).fract() + params.phase0
            - 2.0 * PI * (NOMINAL_FREQUENCY * f.timestamp).fract();
        let truth = Complex64::from_polar(params.amplitude, true_phase);
        let est = Complex64::from_polar(f.magnitude, f.phase);
        max_tve = max_tve.max((est - truth).norm() / truth.norm());
        if f.rocof_valid {
            max_rfe = max_rfe.max((f.rocof - traj.rocof_at(f.timestamp)).abs());
            rocofs.push(f.rocof);
        }
    }
    let (mean_rocof, rocof_std) = mean_std(&rocofs);
    ErrorReport { max_fe, max_rfe, rocof_std, mean_rocof, max_tve, frames_scored: scored }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Frequency ramp test: 45 → 55 Hz at 1 Hz/s.
pub fn compliance_ramp_test(cfg: &EstimatorConfig) -> Result<ErrorReport, PmuError> {
    let (stream, traj) = ramp_test_signal();
    let frames = run_pmu(&stream, cfg)?;
    Ok(score_frames(&frames, &traj, &SynthesisParams::default(), cfg, stream.t0 + stream.duration()))
}

/// Steady-state test at a fixed frequency, scored the same way as the ramp test.
pub fn compliance_steady_test(
    cfg: &EstimatorConfig,
    frequency: f64,
    duration: f64,
) -> Result<ErrorReport, PmuError> {
    let traj = FrequencyTrajectory::constant(frequency, duration)
        .map_err(|e| PmuError::Config(e.to_string()))?;
    let params = SynthesisParams { sample_rate: cfg.sample_rate, ..Default::default() };
    let stream = synthesize(&traj, &params, duration).map_err(|e| PmuError::Config(e.to_string()))?;
    let frames = run_pmu(&stream, cfg)?;
    Ok(score_frames(&frames, &traj, &params, cfg, duration))
}

/// Writes frames as `timestamp_s,mag_pu,phase_rad,freq_hz,rocof_hzps,valid`.
pub fn write_frames_csv<W: Write>(frames: &[Frame], mut w: W) -> io::Result<()> {
    writeln!(w, "timestamp_s,mag_pu,phase_rad,freq_hz,rocof_hzps,valid")?;
    for f in frames {
        writeln!(
            w,
            "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{}",
            f.timestamp,
            f.magnitude,
            f.phase,
            f.frequency,
            f.rocof,
            u8::from(f.valid && f.rocof_valid)
        )?;
    }
    Ok(())
}
