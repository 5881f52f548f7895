mod common;

use common::*;
use proptest::prelude::*;
use ufls_core::relay::{Scheme, ThresholdTable};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ratchet_holds_for_every_scheme(seed in any::<u64>(), n in 200usize..4000) {
        let frames = random_stream(seed, n);
        for scheme in Scheme::ALL {
            prop_assert_eq!(check_ratchet(scheme, &frames), Ok(()), "{}", scheme);
        }
    }

    #[test]
    fn lower_thresholds_shed_at_least_as_much(seed in any::<u64>(), n in 200usize..4000) {
        prop_assert_eq!(check_dominance(&random_stream(seed, n)), Ok(()));
    }

    #[test]
    fn rocof_delay_is_between_500_and_520_ms(
        level in 0usize..6,
        excess in 0.01f64..0.3,
        t_step in 1.0f64..2.0,
        b in any::<bool>(),
    ) {
        let scheme = if b { Scheme::RocofB } else { Scheme::RocofA };
        let table = ThresholdTable::default();
        let thr = table.rocof_row(scheme).unwrap()[level];
        let lat = step_latency(scheme, thr + excess, t_step).expect("step must trigger");
        prop_assert!((0.5 - 1e-9..0.52 + 1e-9).contains(&lat), "latency {lat}");
    }

    #[test]
    fn identical_streams_give_identical_commands(seed in any::<u64>()) {
        let frames = random_stream(seed, 3000);
        for scheme in Scheme::ALL {
            let first = drive(&mut relay(scheme), &frames);
            let mut r = relay(scheme);
            let second = drive(&mut r, &frames);
            prop_assert_eq!(&first, &second);
            r.reset();
            prop_assert_eq!(&first, &drive(&mut r, &frames));
        }
    }

    #[test]
    fn serve_factor_stays_in_table(seed in any::<u64>()) {
        let table = ThresholdTable::default();
        for scheme in Scheme::ALL {
            let mut r = relay(scheme);
            for f in random_stream(seed, 2000) {
                r.on_frame(&f);
                prop_assert!(table.factors.contains(&r.serve_factor()));
            }
        }
    }
}

#[test]
fn million_nominal_frames_stay_quiet() {
    for (i, scheme) in Scheme::ALL.into_iter().enumerate() {
        assert_eq!(quiescence_commands(scheme, 1_000_000, i as u64), 0, "{scheme}");
    }
}

#[test]
fn sub_threshold_rocof_never_trips() {
    for scheme in [Scheme::RocofA, Scheme::RocofB] {
        assert_eq!(step_latency(scheme, 0.19, 1.0), None);
    }
}
