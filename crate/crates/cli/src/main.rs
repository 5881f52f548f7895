//! Command-line front end for the UFLS simulator.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use ufls_core::grid::predicted_initial_rocof;
use ufls_core::harness::{
    compare_schemes, run_scenario, write_comparison, write_report, write_summary_csv, HarnessError, Scenario,
};
use ufls_core::pmu::{compliance_ramp_test, compliance_steady_test, run_pmu, write_frames_csv, EstimatorConfig};
use ufls_core::relay::Scheme;
use ufls_core::signal::ramp_test_signal;

const EXIT_INVALID: u8 = 2;
const EXIT_COLLAPSE: u8 = 3;

#[derive(Parser)]
#[command(name = "ufls", version, about = "Grid frequency, PMU and load-shedding relay simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario under one scheme.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scheme stored in the scenario file.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario under several schemes and tabulate the metrics.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "rocof_a,rocof_b,f_ls")]
        schemes: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// PMU compliance tests.
    PmuTest {
        #[arg(value_enum)]
        test: PmuTest,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inertia scale that produces a target post-trip fall rate.
    Calibrate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        target_rocof: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PmuTest {
    Ramp,
}

fn parse_schemes(names: &[String]) -> Result<Vec<Scheme>, HarnessError> {
    names
        .iter()
        .map(|n| n.parse::<Scheme>().map_err(HarnessError::from))
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Simulate { scenario, scheme, out } => {
            let mut s = Scenario::from_path(&scenario)?;
            if let Some(name) = scheme {
                s = s.with_scheme(name.parse()?);
            }
            let report = run_scenario(&s)?;
            write_report(&report, &out)?;
            println!("{}", serde_json::to_string_pretty(&report.metrics)?);
            Ok(if report.metrics.collapse { ExitCode::from(EXIT_COLLAPSE) } else { ExitCode::SUCCESS })
        }
        Command::Compare { scenario, schemes, out } => {
            let s = Scenario::from_path(&scenario)?;
            let reports = compare_schemes(&s, &parse_schemes(&schemes)?)?;
            write_comparison(&reports, &out)?;
            write_summary_csv(&reports, std::io::stdout().lock())?;
            let collapse = reports.iter().any(|r| r.metrics.collapse);
            Ok(if collapse { ExitCode::from(EXIT_COLLAPSE) } else { ExitCode::SUCCESS })
        }
        Command::PmuTest { test: PmuTest::Ramp, out } => {
            let cfg = EstimatorConfig::default();
            let ramp = compliance_ramp_test(&cfg)?;
            let steady = compliance_steady_test(&cfg, ufls_core::NOMINAL_FREQUENCY, 10.0)?;
            fs::create_dir_all(&out)?;
            let (stream, _) = ramp_test_signal();
            let frames = run_pmu(&stream, &cfg)?;
            write_frames_csv(&frames, BufWriter::new(File::create(out.join("frames_ramp.csv"))?))?;
            let summary = serde_json::json!({ "ramp": ramp, "steady_nominal": steady });
            fs::write(out.join("pmu_compliance.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Calibrate { scenario, target_rocof } => {
            let mut s = Scenario::from_path(&scenario)?;
            let mut cal = s.calibration.clone().unwrap_or(ufls_core::harness::Calibration {
                target_rocof_hzps: target_rocof,
                trip: None,
            });
            cal.target_rocof_hzps = target_rocof;
            s.calibration = Some(cal);
            let scale = s.effective_inertia_scale()?;
            let (tripped, surviving) = s.reference_trip().expect("calibration set");
            let summary = serde_json::json!({
                "inertia_scale": scale,
                "tripped_mw": tripped,
                "predicted_initial_rocof_hzps": predicted_initial_rocof(tripped, &surviving, scale, s.f0),
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).context("ufls") {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let invalid = e.downcast_ref::<HarnessError>().is_some_and(HarnessError::is_invalid_scenario);
            ExitCode::from(if invalid { EXIT_INVALID } else { 1 })
        }
    }
}
