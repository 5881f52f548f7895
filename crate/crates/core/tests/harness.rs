use std::fs;
use ufls_core::grid::{EventKind, Profile};
use ufls_core::harness::{
    bundled_scenario_1, bundled_scenario_2, compare_schemes, first_trigger_latency, run_scenario, write_report,
    HarnessError, Metrics, Scenario,
};
use ufls_core::relay::Scheme;

fn short(s: Scenario, seconds: f64) -> Scenario {
    Scenario { duration_s: seconds, ..s }
}

#[test]
fn no_contingency_means_no_commands() {
    let mut s = short(bundled_scenario_1(), 10.0).with_scheme(Scheme::RocofB);
    s.events.clear();
    let r = run_scenario(&s).unwrap();
    assert!(r.traces.commands.is_empty());
    assert!(r.metrics.nadir_frequency_hz > 49.999, "{}", r.metrics.nadir_frequency_hz);
    assert_eq!(r.metrics.curtailed_energy_mwh, 0.0);
    assert_eq!(r.metrics.duration_s, 0.0);
    assert_eq!(r.metrics.max_ls_factor_pct, 0);
    assert!(matches!(first_trigger_latency(&r), Err(HarnessError::NoTrigger)));
}

fn rejected(s: &Scenario) -> bool {
    Scenario::from_json_str(&s.to_json()).is_err_and(|e| e.is_invalid_scenario())
}

#[test]
fn malformed_scenarios_are_rejected() {
    let base = bundled_scenario_1();
    assert!(!rejected(&base));

    let mut dup = base.clone();
    dup.loads[1].bus = dup.loads[0].bus.clone();
    assert!(rejected(&dup));

    let mut unbalanced = base.clone();
    unbalanced.fleet[0].pm_setpoint_mw += 10.0;
    assert!(rejected(&unbalanced));

    let mut ghost = base.clone();
    ghost.events[0].kind = EventKind::GeneratorTrip { id: "nope".into() };
    assert!(rejected(&ghost));

    let mut coarse = base.clone();
    coarse.dt_s = 0.05;
    assert!(rejected(&coarse));

    let mut label = base.clone();
    label.loads[0].bus = "bus 3".into();
    assert!(rejected(&label));

    assert!(Scenario::from_json_str("{\"name\": 1}").is_err_and(|e| e.is_invalid_scenario()));
}

#[test]
fn json_round_trip() {
    for s in [bundled_scenario_1(), bundled_scenario_2()] {
        assert_eq!(Scenario::from_json_str(&s.to_json()).unwrap(), s);
    }
}

#[test]
fn load_ripple_cancels_across_buses() {
    let s = bundled_scenario_1();
    for t in [0.0, 1.0, 7.0, 29.0, 61.5] {
        let total: f64 = s.loads.iter().map(|l| l.p_nominal.value_at(t)).sum();
        let base: f64 = s
            .loads
            .iter()
            .map(|l| match &l.p_nominal {
                Profile::FlatRipple { base_mw, .. } => *base_mw,
                p => p.value_at(0.0),
            })
            .sum();
        assert!((total - base).abs() < 1e-6, "t={t}: {total} vs {base}");
    }
}

/// A shorter run is a prefix of a longer one.
#[test]
fn truncation_preserves_the_past() {
    let s = bundled_scenario_1().with_scheme(Scheme::FLs);
    let long = run_scenario(&short(s.clone(), 16.0)).unwrap();
    let cut = run_scenario(&short(s, 9.0)).unwrap();
    let n = cut.traces.time.len();
    assert_eq!(&long.traces.time[..n], &cut.traces.time[..]);
    assert_eq!(&long.traces.coi_frequency[..n], &cut.traces.coi_frequency[..]);
    let early: Vec<_> = long.traces.commands.iter().filter(|c| c.time < 9.0).cloned().collect();
    assert_eq!(early, cut.traces.commands);
    for (a, b) in long.traces.buses.iter().zip(&cut.traces.buses) {
        assert_eq!(&a.frames[..b.frames.len()], &b.frames[..]);
    }
}

#[test]
fn report_directory_is_complete() {
    let r = run_scenario(&short(bundled_scenario_1().with_scheme(Scheme::RocofA), 8.0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_report(&r, dir.path()).unwrap();

    let metrics: Metrics = serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics, r.metrics);

    let lines = |name: String| fs::read_to_string(dir.path().join(name)).unwrap().lines().count();
    assert_eq!(lines("commands.csv".into()), r.traces.commands.len() + 1);
    assert_eq!(lines("frequency_coi.csv".into()), r.traces.time.len() + 1);
    for b in &r.traces.buses {
        assert_eq!(lines(format!("frames_{}.csv", b.bus)), b.frames.len() + 1);
        assert_eq!(lines(format!("frequency_{}.csv", b.bus)), r.traces.time.len() + 1);
    }
}

#[test]
fn commands_apply_thirty_ms_after_the_frame() {
    let r = run_scenario(&short(bundled_scenario_1().with_scheme(Scheme::RocofA), 8.0)).unwrap();
    assert!(!r.traces.commands.is_empty());
    for c in &r.traces.commands {
        let trace = r.traces.buses.iter().find(|b| b.bus == c.bus).unwrap();
        // The frame that caused the command is centred 30 ms earlier.
        let centre = c.time - 0.03;
        assert!(trace.frames.iter().any(|f| (f.timestamp - centre).abs() < 1e-6), "{c:?}");
    }
}

#[test]
fn commands_and_serve_traces_agree() {
    let r = run_scenario(&short(bundled_scenario_1().with_scheme(Scheme::FLs), 40.0)).unwrap();
    let mut from_traces: Vec<(String, f64, u8)> = r
        .traces
        .buses
        .iter()
        .flat_map(|b| b.serve[1..].iter().map(|&(t, pct)| (b.bus.clone(), t, pct)))
        .collect();
    let mut from_log: Vec<(String, f64, u8)> =
        r.traces.commands.iter().map(|c| (c.bus.clone(), c.time, c.serve_factor)).collect();
    let key = |a: &(String, f64, u8), b: &(String, f64, u8)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    from_traces.sort_by(key);
    from_log.sort_by(key);
    assert!(!from_log.is_empty());
    assert_eq!(from_traces, from_log);
}

#[test]
fn comparisons_keep_order_and_repeat_exactly() {
    let s = short(bundled_scenario_1(), 12.0);
    let order = [Scheme::FLs, Scheme::None, Scheme::RocofA];
    let first = compare_schemes(&s, &order).unwrap();
    let second = compare_schemes(&s, &order).unwrap();
    let schemes: Vec<Scheme> = first.iter().map(|r| r.metrics.scheme).collect();
    assert_eq!(schemes, order);
    assert_eq!(first, second);
    assert!(compare_schemes(&s, &[]).is_err());
}

#[test]
fn protection_never_deepens_the_nadir() {
    for s in [bundled_scenario_1(), bundled_scenario_2()] {
        let reports = compare_schemes(&short(s, 30.0), &Scheme::ALL).unwrap();
        let none = reports[0].metrics.nadir_frequency_hz;
        for r in &reports[1..] {
            assert!(r.metrics.nadir_frequency_hz >= none, "{}: {}", r.metrics.scheme, r.metrics.nadir_frequency_hz);
        }
    }
}
