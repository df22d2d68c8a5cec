//! One pass/fail line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use common::{ks_exponential, psd_slope, rms, welch_psd, wrap, TestRng};
use ldv_core::demod::{unwrap_phase, PhaseUnwrapper};
use ldv_core::dsp::{
    compute_spectrum_padded, design_fir, dft, henderson_smooth, henderson_weights, peak_frequency, FilterSpec, Window,
    ANALYSIS_PAD,
};
use ldv_core::harness::{
    air_filter_40hz, calibration_rows, calibration_suite, emit_calibration, emit_report, emit_spectrum_data,
    run_component_suite_with, run_many, run_scenario, CalibrationRow, Execution, Format, ScenarioRun,
};
use ldv_core::motion::synth_kinematics;
use ldv_core::noise::{gen_flicker_noise, gen_speckle_multiplier, speckle_interval, NoiseSource};
use ldv_core::optics::{synth_detector_signal, synth_fields, Interferometer};
use ldv_core::{DetectorConfig, MotionProfile, NoiseConfig, NoiseKind, OpticalConfig, RandomSeed, TimeSeries};

const SEED: RandomSeed = RandomSeed::new(2024);
const E: f64 = 1.602_176_634e-19;
const KB: f64 = 1.380_649e-23;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<T>(e: impl std::fmt::Display) -> Result<T, String> {
    Err(e.to_string())
}

/// Shared calibration output: criterion 1 runs it, criteria 4 and 8 reuse it.
struct Calibration {
    rows: Vec<CalibrationRow>,
}

fn criterion_1(cal: &mut Option<Calibration>) -> Outcome {
    let start = Instant::now();
    let runs = run_many(&calibration_suite(SEED, &NoiseConfig::default()), Execution::Parallel).or_else(fail)?;
    let secs = start.elapsed().as_secs_f64();
    let rows = calibration_rows(&runs);
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass())
        .map(|r| format!("{} Hz read {:.3}", r.applied_frequency, r.indicated_frequency))
        .collect();
    let worst = rows
        .iter()
        .map(|r| (r.indicated_frequency - r.applied_frequency).abs() / r.tolerance)
        .fold(0.0, f64::max);
    let n = rows.len();
    *cal = Some(Calibration { rows });
    check(
        failed.is_empty() && n == 11 && secs < 120.0,
        format!(
            "{}/{n} rows in tolerance, worst {worst:.3} of band, {secs:.1} s {failed:?}",
            n - failed.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let runs = run_component_suite_with(SEED, Execution::Parallel).or_else(fail)?;
    let mut lines = Vec::new();
    let mut ok = runs.len() == 4;
    for r in runs.iter().map(|r| &r.report) {
        let pass = r.ldv_error().abs() <= 0.15 && r.accel_error().abs() <= 0.5 && r.cross_channel_spread() <= 1.0;
        ok &= pass;
        lines.push(format!(
            "{} {}/{:.2}/{:.2}",
            r.component, r.truth_frequency, r.ldv_frequency, r.accel_frequency
        ));
    }
    check(ok, lines.join(", "))
}

fn criterion_3() -> Outcome {
    let r = run_scenario(&air_filter_40hz().with_seed(SEED)).or_else(fail)?;
    check(
        (39.85..=40.15).contains(&r.ldv_frequency),
        format!("LDV {:.3} Hz", r.ldv_frequency),
    )
}

fn criterion_4(cal: &Option<Calibration>) -> Outcome {
    let runs = run_many(&calibration_suite(SEED, &NoiseConfig::noiseless()), Execution::Parallel).or_else(fail)?;
    let rel = |r: &CalibrationRow| (r.recovered_displacement / r.applied_displacement - 1.0).abs();
    let clean = calibration_rows(&runs).iter().map(rel).fold(0.0, f64::max);
    let noisy = match cal {
        Some(c) => c.rows.iter().map(rel).fold(0.0, f64::max),
        None => return Err("calibration run unavailable".into()),
    };
    check(
        clean < 0.01 && noisy < 0.05,
        format!("worst relative error {clean:.2e} noiseless, {noisy:.2e} default noise"),
    )
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // (a) Shot and thermal against their closed forms.
    let (fs, dc) = (4e6, 6e-4);
    let n = 1_000_000;
    let cfg = NoiseConfig::only(&[NoiseKind::Shot, NoiseKind::Thermal]);
    let c = NoiseSource::new(&cfg, dc, fs, 0, n, SEED)
        .or_else(fail)?
        .components(0, n);
    let shot = (2.0 * E * dc * fs / 2.0).sqrt();
    let load =
        cfg.amp_input_resistance * cfg.detector_resistance / (cfg.amp_input_resistance + cfg.detector_resistance);
    let thermal = (4.0 * KB * cfg.temperature * fs / 2.0 / load).sqrt();
    let (ds, dt) = (rms(&c.shot) / shot - 1.0, rms(&c.thermal) / thermal - 1.0);
    ok &= ds.abs() < 0.01 && dt.abs() < 0.01;
    notes.push(format!("(a) shot {ds:+.4} thermal {dt:+.4}"));

    // (b) Flicker spectral slope.
    let fs = 1e5;
    let mut slopes = Vec::new();
    for beta in [0.8, 1.0, 1.2] {
        let cfg = NoiseConfig {
            flicker_beta: beta,
            ..NoiseConfig::default()
        };
        let x = gen_flicker_noise(1e-3, &cfg, 1 << 20, fs, SEED).or_else(fail)?;
        let (f, p) = welch_psd(&x.samples, fs, 1 << 14);
        let slope = psd_slope(&f, &p, 50.0, fs / 8.0);
        ok &= (slope + beta).abs() < 0.1;
        slopes.push(format!("{slope:.3}"));
    }
    notes.push(format!("(b) slopes {}", slopes.join("/")));

    // (c) Speckle marginal.
    let cfg = NoiseConfig {
        speckle_correlation_time: 1e-3,
        ..NoiseConfig::all_enabled()
    };
    let fs = 4e3;
    let interval = speckle_interval(&cfg, fs).or_else(fail)?;
    let m = gen_speckle_multiplier(&cfg, 100_000 * interval, fs, SEED).or_else(fail)?;
    let blocks: Vec<f64> = m.samples.chunks(interval).map(|c| c[0]).collect();
    let d = ks_exponential(&blocks);
    ok &= d < 0.01 && blocks.len() == 100_000;
    notes.push(format!("(c) KS {d:.4}"));

    // (d) Default configuration on a calibration-grade detector.
    let fs = 12.8e6;
    let model = Interferometer::new(&OpticalConfig::with_carrier(fs / 4.0), &DetectorConfig::new(fs)).or_else(fail)?;
    let n = 1 << 20;
    let cfg = NoiseConfig::default();
    let c = NoiseSource::new(&cfg, model.dc_current(), fs, 0, n, SEED)
        .or_else(fail)?
        .components(0, n);
    let white: Vec<f64> = c.shot.iter().zip(&c.thermal).map(|(a, b)| a + b).collect();
    let other: Vec<f64> = (0..n)
        .map(|i| {
            let ac = model.current(i as i64, 0.0) - model.dc_current();
            c.flicker[i] + ac * (c.speckle[i].sqrt() - 1.0)
        })
        .collect();
    let ratio = rms(&white) / rms(&other).max(f64::MIN_POSITIVE);
    ok &= ratio > 1.0;
    notes.push(format!("(d) white/other {ratio:.1}"));

    check(ok, notes.join(", "))
}

fn criterion_6() -> Outcome {
    let n = 512;
    let half = n as f64 / 2.0;
    let mut rng = TestRng::new(6);
    let mut leak: f64 = 0.0;
    let mut pair_err: f64 = 0.0;
    for _ in 0..20 {
        let k0 = 1 + (rng.uniform() * (n / 2 - 2) as f64) as usize;
        let sine: Vec<f64> = (0..n).map(|i| (TAU * (k0 * i) as f64 / n as f64).sin()).collect();
        let cosine: Vec<f64> = (0..n).map(|i| (TAU * (k0 * i) as f64 / n as f64).cos()).collect();
        let (s, c) = (dft(&sine), dft(&cosine));
        // Sine: imaginary pair -N/2 at k0 and +N/2 at N-k0. Cosine: real pair +N/2.
        for e in [
            s[k0].re,
            s[k0].im + half,
            s[n - k0].re,
            s[n - k0].im - half,
            c[k0].re - half,
            c[k0].im,
            c[n - k0].re - half,
            c[n - k0].im,
        ] {
            pair_err = pair_err.max(e.abs() / half);
        }
        for k in (0..n).filter(|&k| k != k0 && k != n - k0) {
            leak = leak.max(s[k].norm().max(c[k].norm()) / half);
        }
    }
    let mut parseval: f64 = 0.0;
    for _ in 0..50 {
        let len = 1 + (rng.uniform() * 2000.0) as usize;
        let x: Vec<f64> = (0..len).map(|_| rng.gaussian() * 10.0).collect();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let spectral = dft(&x).iter().map(|z| z.norm_sqr()).sum::<f64>() / len as f64;
        parseval = parseval.max((energy - spectral).abs() / energy);
    }
    check(
        leak < 1e-10 && pair_err < 1e-10 && parseval < 1e-9,
        format!("leakage {leak:.1e}, line-pair error {pair_err:.1e}, Parseval {parseval:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = TestRng::new(7);
    let fs = 4e6;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let optical = OpticalConfig {
            wavelength: rng.range(400e-9, 1600e-9),
            bragg_shift: 1e6,
            mixing_efficiency: 1.0,
            reflectivity: rng.range(0.01, 1.0),
            intensity_measurement: rng.range(1e-5, 1e-2),
            intensity_reference: rng.range(1e-5, 1e-2),
            loss_reference: rng.range(0.1, 1.0),
            loss_measurement: rng.range(0.1, 1.0),
        };
        let detector = DetectorConfig {
            responsivity: 1.0,
            ..DetectorConfig::new(fs)
        };
        let profile = MotionProfile::sinusoid(rng.range(1e-7, 5e-6), rng.range(10.0, 200.0));
        let kin = synth_kinematics(&profile, fs, 2e-3).or_else(fail)?;
        let fields = synth_fields(&kin, &optical).or_else(fail)?;
        let current = synth_detector_signal(&kin, &optical, &detector).or_else(fail)?;
        for (a, b) in fields.superposed_intensity().iter().zip(&current.samples) {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    check(
        worst < 1e-12,
        format!("worst relative difference {worst:.1e} over 10 configurations"),
    )
}

fn write_suite(dir: &Path, runs: &[ScenarioRun]) -> Result<(), String> {
    let reports: Vec<_> = runs.iter().map(|r| r.report.clone()).collect();
    emit_report(&reports, Format::Csv, &dir.join("report.csv")).or_else(fail)?;
    emit_report(&reports, Format::Json, &dir.join("report.json")).or_else(fail)?;
    for r in runs {
        emit_spectrum_data(&r.ldv_spectrum, &dir.join(format!("{}-ldv.csv", r.report.component))).or_else(fail)?;
        emit_spectrum_data(
            &r.accel_spectrum,
            &dir.join(format!("{}-accel.csv", r.report.component)),
        )
        .or_else(fail)?;
    }
    Ok(())
}

fn same_files(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .or_else(fail)?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()
        .or_else(fail)?;
    names.sort();
    for name in &names {
        let x = std::fs::read(a.join(name)).or_else(fail)?;
        let y = std::fs::read(b.join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        if x != y {
            return Err(format!("{name:?} differs"));
        }
    }
    Ok(names.len())
}

fn criterion_8(cal: &Option<Calibration>) -> Outcome {
    let root = tempfile::tempdir().or_else(fail)?;
    let dirs: Vec<_> = ["first", "second", "serial"]
        .iter()
        .map(|d| root.path().join(d))
        .collect();
    for (dir, execution) in dirs
        .iter()
        .zip([Execution::Parallel, Execution::Parallel, Execution::Serial])
    {
        std::fs::create_dir(dir).or_else(fail)?;
        write_suite(dir, &run_component_suite_with(SEED, execution).or_else(fail)?)?;
    }
    let files = same_files(&dirs[0], &dirs[1])?;
    same_files(&dirs[0], &dirs[2])?;

    // The calibration table from criterion 1 ran in parallel; repeat it serially.
    let parallel = match cal {
        Some(c) => &c.rows,
        None => return Err("calibration run unavailable".into()),
    };
    let serial = calibration_rows(
        &run_many(&calibration_suite(SEED, &NoiseConfig::default()), Execution::Serial).or_else(fail)?,
    );
    for (name, rows) in [("parallel", parallel), ("serial", &serial)] {
        for format in [Format::Csv, Format::Json] {
            emit_calibration(
                rows,
                format,
                &root.path().join(format!("{name}.{}", format.extension())),
            )
            .or_else(fail)?;
        }
    }
    for ext in ["csv", "json"] {
        let a = std::fs::read(root.path().join(format!("parallel.{ext}"))).or_else(fail)?;
        let b = std::fs::read(root.path().join(format!("serial.{ext}"))).or_else(fail)?;
        if a != b {
            return Err(format!("calibration {ext} differs between serial and parallel"));
        }
    }
    Ok(format!(
        "{files} component files identical across runs and modes, calibration tables identical"
    ))
}

/// |H(f)| by direct summation.
fn gain_at(taps: &[f64], f: f64) -> f64 {
    let (re, im) = taps.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, h)| {
        let a = -TAU * f * n as f64;
        (re + h * a.cos(), im + h * a.sin())
    });
    re.hypot(im)
}

fn criterion_9() -> Outcome {
    let mut rng = TestRng::new(9);
    let mut notes = Vec::new();

    // Unwrap inverts wrap for steps below π.
    let mut unwrap_err: f64 = 0.0;
    for _ in 0..200 {
        let mut x = vec![rng.range(-3.0, 3.0)];
        for _ in 0..500 {
            let last = *x.last().unwrap();
            x.push(last + rng.range(-3.1, 3.1));
        }
        let wrapped = TimeSeries::new(1.0, x.iter().map(|&p| wrap(p)).collect()).or_else(fail)?;
        let whole = unwrap_phase(&wrapped);
        let mut u = PhaseUnwrapper::new();
        for ((w, s), t) in wrapped.samples.iter().zip(&whole.samples).zip(&x) {
            unwrap_err = unwrap_err.max((u.push(*w) - t).abs()).max((s - t).abs());
        }
    }
    notes.push(format!("unwrap {unwrap_err:.1e}"));

    // Henderson reproduces cubics; 13-term centre weight.
    let mut cubic_err: f64 = 0.0;
    for _ in 0..100 {
        let half = 2 + (rng.uniform() * 10.0) as usize;
        let c: Vec<f64> = (0..4).map(|_| rng.range(-1.0, 1.0)).collect();
        let x: Vec<f64> = (0..80)
            .map(|i| {
                let t = i as f64 / 10.0 - 4.0;
                c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t
            })
            .collect();
        let y = henderson_smooth(&TimeSeries::new(1.0, x.clone()).or_else(fail)?, 2 * half + 1).or_else(fail)?;
        for (a, b) in y.samples[half..80 - half].iter().zip(&x[half..80 - half]) {
            cubic_err = cubic_err.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    let centre = henderson_weights(13).or_else(fail)?[6];
    notes.push(format!("cubic {cubic_err:.1e}, centre {centre:.6}"));

    // Designed filters meet their stopband specification.
    let mut margin = f64::INFINITY;
    for _ in 0..40 {
        let (fc, tw, atten) = (rng.range(0.05, 0.35), rng.range(0.02, 0.06), rng.range(30.0, 90.0));
        let taps = design_fir(&FilterSpec::lowpass(fc, tw, atten), 1.0).or_else(fail)?;
        for i in 0..=400 {
            let f = fc + tw / 2.0 + (0.5 - fc - tw / 2.0) * i as f64 / 400.0;
            margin = margin.min(-20.0 * gain_at(&taps, f).log10() - atten);
        }
    }
    notes.push(format!("FIR stopband margin {margin:+.2} dB"));

    // Peak estimator bias at 30 dB SNR.
    let (fs, n) = (1000.0, 4096);
    let df = fs / n as f64;
    let mut bias: f64 = 0.0;
    for _ in 0..100 {
        let f = (300.0 + rng.uniform()) * df;
        let sigma = (0.5f64 / 1000.0).sqrt();
        let phase = rng.range(0.0, TAU);
        let x: Vec<f64> = (0..n)
            .map(|i| (TAU * f * i as f64 / fs + phase).sin() + sigma * rng.gaussian())
            .collect();
        let spec = compute_spectrum_padded(&TimeSeries::new(fs, x).or_else(fail)?, Window::Hann, ANALYSIS_PAD)
            .or_else(fail)?;
        let p = peak_frequency(&spec, (f - 5.0 * df, f + 5.0 * df)).or_else(fail)?;
        bias = bias.max(((p.frequency - f) / df).abs());
    }
    notes.push(format!("peak bias {bias:.4} bin"));

    check(
        unwrap_err < 1e-9 && cubic_err < 1e-9 && (centre - 0.2402).abs() < 2e-4 && margin >= -1e-9 && bias < 0.01,
        notes.join(", "),
    )
}

fn main() {
    let mut cal = None;
    let results = [
        ("calibration sweep", criterion_1(&mut cal)),
        ("component suite", criterion_2()),
        ("40 Hz air filter", criterion_3()),
        ("displacement round trip", criterion_4(&cal)),
        ("noise fidelity", criterion_5()),
        ("FFT identities", criterion_6()),
        ("field/intensity equivalence", criterion_7()),
        ("determinism", criterion_8(&cal)),
        ("property suites", criterion_9()),
    ];
    let mut failed = 0;
    for (i, (name, result)) in results.iter().enumerate() {
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
