//! Checkers shared by the property tests and the acceptance target.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use ufls_core::grid::{Event, EventKind, Generator, GovernorModel, GridModel, Load, PlantType, Profile};
use ufls_core::pmu::Frame;
use ufls_core::relay::{Command, RelayConfig, RelayState, Scheme, ThresholdTable};

pub const HOP: f64 = 0.02;

pub fn frame(t: f64, f: f64, rocof: Option<f64>) -> Frame {
    Frame {
        timestamp: t,
        magnitude: 1.0,
        phase: 0.0,
        frequency: f,
        rocof: rocof.unwrap_or(0.0),
        rocof_valid: rocof.is_some(),
        valid: true,
    }
}

/// Frames for a frequency sequence, ROCOF by finite difference.
pub fn frames_from_freqs(t0: f64, freqs: &[f64]) -> Vec<Frame> {
    freqs
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let rocof = (k > 0).then(|| (f - freqs[k - 1]) / HOP);
            frame(t0 + k as f64 * HOP, f, rocof)
        })
        .collect()
}

/// A frequency path made of random constant-ROCOF segments inside [47, 51] Hz,
/// with occasional invalid frames.
pub fn random_stream(seed: u64, n: usize) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freqs = Vec::with_capacity(n);
    let mut f = 50.0;
    while freqs.len() < n {
        let rate: f64 = rng.random_range(-1.6..1.0);
        let len = rng.random_range(5..150);
        for _ in 0..len {
            f = (f + rate * HOP).clamp(47.0, 51.0);
            freqs.push(f);
        }
    }
    freqs.truncate(n);
    let mut frames = frames_from_freqs(0.0, &freqs);
    for k in 1..n {
        if rng.random::<f64>() < 0.01 {
            frames[k].valid = false;
            frames[k].frequency = f64::NAN;
        }
    }
    frames
}

pub fn relay(scheme: Scheme) -> RelayState {
    RelayState::new("1", RelayConfig::for_scheme(scheme)).expect("default config is valid")
}

pub fn drive(relay: &mut RelayState, frames: &[Frame]) -> Vec<Command> {
    frames.iter().filter_map(|f| relay.on_frame(f)).collect()
}

/// Restoration raises the serve factor by one step per command, every level
/// change matches the relay level, and LR commands are at least 5 s apart.
pub fn check_ratchet(scheme: Scheme, frames: &[Frame]) -> Result<(), String> {
    let table = ThresholdTable::default();
    let mut r = relay(scheme);
    let mut prev_level = 0usize;
    let mut last_lr: Option<f64> = None;
    for f in frames {
        let before = r.level();
        let Some(cmd) = r.on_frame(f) else {
            if r.level() != before {
                return Err(format!("level changed silently at t={}", f.timestamp));
            }
            continue;
        };
        let level = table.factors.iter().position(|&x| x == cmd.serve_factor).ok_or("unknown factor")?;
        if level != r.level() {
            return Err(format!("command factor {} disagrees with level {}", cmd.serve_factor, r.level()));
        }
        if cmd.reason.is_shed() {
            if level <= prev_level {
                return Err(format!("shed command without deeper level at t={}", cmd.time));
            }
        } else {
            if level + 1 != prev_level {
                return Err(format!("restoration skipped a step at t={}", cmd.time));
            }
            if let Some(t) = last_lr {
                if cmd.time - t < 5.0 - 1e-9 {
                    return Err(format!("LR commands {:.3} s apart at t={}", cmd.time - t, cmd.time));
                }
            }
            if (r.lr_lockout_until() - cmd.time - 5.0).abs() > 1e-9 {
                return Err("lockout is not 5 s after the LR step".into());
            }
            last_lr = Some(cmd.time);
        }
        prev_level = level;
    }
    Ok(())
}

/// Scheme A's level never exceeds scheme B's on the same frame stream.
pub fn check_dominance(frames: &[Frame]) -> Result<(), String> {
    let (mut a, mut b) = (relay(Scheme::RocofA), relay(Scheme::RocofB));
    for f in frames {
        a.on_frame(f);
        b.on_frame(f);
        if a.level() > b.level() {
            return Err(format!("A level {} > B level {} at t={}", a.level(), b.level(), f.timestamp));
        }
    }
    Ok(())
}

/// Delay from a ROCOF step to `-r` (taking effect at `t_step`) to the first
/// shed command, feeding exact-ROCOF frames.
pub fn step_latency(scheme: Scheme, r: f64, t_step: f64) -> Option<f64> {
    let mut relay = relay(scheme);
    let mut f = 50.0;
    for k in 0..500 {
        let t = k as f64 * HOP;
        let rocof = if t >= t_step - 1e-12 { -r } else { 0.0 };
        f += rocof * HOP;
        if let Some(cmd) = relay.on_frame(&frame(t, f, (k > 0).then_some(rocof))) {
            return Some(cmd.time - t_step);
        }
    }
    None
}

/// Commands emitted over `n` nominal frames with estimator-level noise.
pub fn quiescence_commands(scheme: Scheme, n: usize, seed: u64) -> usize {
    // Frequency noise whose finite-difference ROCOF has a 15 mHz/s deviation,
    // the compliance-test level.
    let sigma_f = 0.015 * HOP / std::f64::consts::SQRT_2;
    let noise = Normal::new(0.0, sigma_f).expect("positive sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut relay = relay(scheme);
    let mut prev: Option<f64> = None;
    let mut count = 0;
    for k in 0..n {
        let f = 50.0 + noise.sample(&mut rng);
        let rocof = prev.map(|p| (f - p) / HOP);
        prev = Some(f);
        if relay.on_frame(&frame(k as f64 * HOP, f, rocof)).is_some() {
            count += 1;
        }
    }
    count
}

fn oracle_model(damping: f64, governor: Option<GovernorModel>) -> GridModel {
    let g = Generator {
        id: "G".into(),
        plant_type: PlantType::Thermal,
        bus: None,
        capacity_mva: 1000.0,
        inertia_h: 5.0,
        droop: 0.05,
        governor,
        headroom_mw: 1e6,
        online: true,
        pm_setpoint_mw: 500.0,
        wind_profile: None,
    };
    let load = Load { bus: "L".into(), p_nominal: Profile::Constant { mw: 500.0 }, q_nominal: None };
    GridModel::new(50.0, damping, vec![g], vec![load]).expect("valid oracle model")
}

/// Largest |Δf − exact| over t ∈ [1, 10] s after a 100 MW load step on one
/// 1000 MVA, H = 5 s machine, for a damped ungoverned case and an undamped
/// first-order-governor case, both with closed-form solutions.
pub fn single_machine_oracle_error() -> f64 {
    let (s, h, dp, f0, dt) = (1000.0, 5.0, 100.0, 50.0, 0.001);
    let step = [Event { time: 0.0, kind: EventKind::LoadStep { bus: "L".into(), mw: dp } }];
    let worst = |model: GridModel, exact: &dyn Fn(f64) -> f64| {
        let mut st = model.initial_state();
        let mut err: f64 = 0.0;
        for k in 0..10_000 {
            st = model.step(&st, if k == 0 { &step } else { &[] }, &[], dt).unwrap();
            let t = (k + 1) as f64 * dt;
            if t >= 1.0 {
                err = err.max((st.delta_f - exact(t)).abs());
            }
        }
        err
    };

    // 2HS/f0·Δf' = −ΔP − D·S/f0·Δf
    let d = 2.0;
    let damped = worst(oracle_model(d, None), &|t| -dp * f0 / (d * s) * (1.0 - (-d * t / (2.0 * h)).exp()));

    // M·Δf' = p − ΔP, T·p' = −K·Δf − p
    let t_gov = 0.5;
    let m = 2.0 * h * s / f0;
    let k = s / (0.05 * f0);
    let alpha = 1.0 / (2.0 * t_gov);
    let wd = (k / (m * t_gov) - alpha * alpha).sqrt();
    let ss = -dp / k;
    let b = (-dp / m - alpha * ss) / wd;
    let governed = worst(
        oracle_model(0.0, Some(GovernorModel::FirstOrder { time_constant_s: t_gov })),
        &|t| ss + (-alpha * t).exp() * (-ss * (wd * t).cos() + b * (wd * t).sin()),
    );
    damped.max(governed)
}
