//! `ldv-lab`: runs vibrometer scenarios and writes their reports.
//!
//! Exit status is 0 when every result is within its tolerance, 1 when a
//! result falls outside it and 2 on any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ldv_core::harness::{
    calibration_rows, calibration_suite, component_suite, emit_calibration, emit_report, emit_spectrum_data,
    find_scenario, run_many, run_scenario_detailed, Execution, Format, ScenarioRun,
};
use ldv_core::{NoiseConfig, RandomSeed, Result};

#[derive(Parser)]
#[command(name = "ldv-lab", version, about = "Heterodyne laser Doppler vibrometer simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report and spectra.
    Simulate {
        /// Scenario file; the built-in scenarios are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: String,
        /// Overrides the scenario's own seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Run the 11-point calibration sweep.
    Calibrate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Run the component suite and write the comparison report with spectra.
    Compare {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Write one channel's spectrum for a scenario as CSV.
    Spectrum {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Channel::Ldv)]
        channel: Channel,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Channel {
    Ldv,
    Accel,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| ldv_core::Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_runs(runs: &[ScenarioRun], out: &Path, format: Format) -> Result<()> {
    create_dir(out)?;
    let reports: Vec<_> = runs.iter().map(|r| r.report.clone()).collect();
    emit_report(&reports, format, &out.join(format!("report.{}", format.extension())))?;
    for r in runs {
        let name = &r.report.component;
        emit_spectrum_data(&r.ldv_spectrum, &out.join(format!("{name}-ldv-spectrum.csv")))?;
        emit_spectrum_data(&r.accel_spectrum, &out.join(format!("{name}-accel-spectrum.csv")))?;
    }
    Ok(())
}

fn summarize(run: &ScenarioRun, pass: bool) {
    let r = &run.report;
    eprintln!(
        "{:<20} truth {:>7.2} Hz  ldv {:>8.3} Hz  accel {:>8.3} Hz  {}",
        r.component,
        r.truth_frequency,
        r.ldv_frequency,
        r.accel_frequency,
        if pass { "ok" } else { "OUT OF TOLERANCE" }
    );
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            scenario,
            seed,
            out,
            format,
        } => {
            let mut s = find_scenario(config.as_deref(), &scenario)?;
            if let Some(seed) = seed {
                s.seed = RandomSeed::new(seed);
            }
            let run = run_scenario_detailed(&s)?;
            let pass = run.within(&s.tolerances);
            summarize(&run, pass);
            write_runs(std::slice::from_ref(&run), &out, format.into())?;
            Ok(pass)
        }
        Command::Calibrate { seed, out, format } => {
            let runs = run_many(
                &calibration_suite(RandomSeed::new(seed), &NoiseConfig::default()),
                Execution::Parallel,
            )?;
            let rows = calibration_rows(&runs);
            for row in &rows {
                eprintln!(
                    "{:>6.1} Hz  indicated {:>8.3} Hz  ±{:.2}  {}",
                    row.applied_frequency,
                    row.indicated_frequency,
                    row.tolerance,
                    if row.pass() { "ok" } else { "OUT OF TOLERANCE" }
                );
            }
            create_dir(&out)?;
            let format = Format::from(format);
            emit_calibration(&rows, format, &out.join(format!("calibration.{}", format.extension())))?;
            Ok(rows.iter().all(|r| r.pass()))
        }
        Command::Compare { seed, out, format } => {
            let suite = component_suite(RandomSeed::new(seed));
            let runs = run_many(&suite, Execution::Parallel)?;
            let mut pass = true;
            for (run, s) in runs.iter().zip(&suite) {
                let ok = run.within(&s.tolerances);
                summarize(run, ok);
                pass &= ok;
            }
            write_runs(&runs, &out, format.into())?;
            Ok(pass)
        }
        Command::Spectrum {
            config,
            scenario,
            seed,
            channel,
            out,
        } => {
            let mut s = find_scenario(config.as_deref(), &scenario)?;
            if let Some(seed) = seed {
                s.seed = RandomSeed::new(seed);
            }
            let run = run_scenario_detailed(&s)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                create_dir(dir)?;
            }
            let spec = match channel {
                Channel::Ldv => &run.ldv_spectrum,
                Channel::Accel => &run.accel_spectrum,
            };
            emit_spectrum_data(spec, &out)?;
            let pass = run.within(&s.tolerances);
            summarize(&run, pass);
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(2)
        }
    }
}
