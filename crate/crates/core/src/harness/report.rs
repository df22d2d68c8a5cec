//! Report types and their CSV / JSON serialization.

use std::fmt::Write as _;
use std::path::Path;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::dsp::Spectrum;
use crate::error::{Error, Result};

pub const REPORT_CSV_HEADER: &str = "component,truth_hz,ldv_hz,accel_hz,ldv_err_hz,accel_err_hz,amplitude_m";
pub const CALIBRATION_CSV_HEADER: &str =
    "applied_hz,applied_displacement_m,indicated_hz,tolerance_hz,pass,recovered_displacement_m";
pub const SPECTRUM_CSV_HEADER: &str = "frequency_hz,magnitude,phase_rad";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Three-way frequency comparison for one component. The errors are derived
/// on demand and never stored.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ComparisonReport {
    pub component: String,
    pub truth_frequency: f64,
    pub ldv_frequency: f64,
    pub accel_frequency: f64,
    pub displacement_amplitude_recovered: f64,
}

impl ComparisonReport {
    pub fn ldv_error(&self) -> f64 {
        self.ldv_frequency - self.truth_frequency
    }

    pub fn accel_error(&self) -> f64 {
        self.accel_frequency - self.truth_frequency
    }

    pub fn cross_channel_spread(&self) -> f64 {
        (self.ldv_frequency - self.accel_frequency).abs()
    }
}

impl Serialize for ComparisonReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ComparisonReport", 7)?;
        st.serialize_field("component", &self.component)?;
        st.serialize_field("truth_frequency", &self.truth_frequency)?;
        st.serialize_field("ldv_frequency", &self.ldv_frequency)?;
        st.serialize_field("accel_frequency", &self.accel_frequency)?;
        st.serialize_field("ldv_error", &self.ldv_error())?;
        st.serialize_field("accel_error", &self.accel_error())?;
        st.serialize_field(
            "displacement_amplitude_recovered",
            &self.displacement_amplitude_recovered,
        )?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct CalibrationRow {
    pub applied_frequency: f64,
    pub applied_displacement: f64,
    pub indicated_frequency: f64,
    pub tolerance: f64,
    pub recovered_displacement: f64,
}

impl CalibrationRow {
    pub fn pass(&self) -> bool {
        (self.indicated_frequency - self.applied_frequency).abs() <= self.tolerance
    }
}

impl Serialize for CalibrationRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CalibrationRow", 6)?;
        st.serialize_field("applied_frequency", &self.applied_frequency)?;
        st.serialize_field("applied_displacement", &self.applied_displacement)?;
        st.serialize_field("indicated_frequency", &self.indicated_frequency)?;
        st.serialize_field("tolerance", &self.tolerance)?;
        st.serialize_field("pass", &self.pass())?;
        st.serialize_field("recovered_displacement", &self.recovered_displacement)?;
        st.end()
    }
}

/// Seventeen significant digits: exact round trip for every f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn reports_to_csv(reports: &[ComparisonReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.component),
            num(r.truth_frequency),
            num(r.ldv_frequency),
            num(r.accel_frequency),
            num(r.ldv_error()),
            num(r.accel_error()),
            num(r.displacement_amplitude_recovered)
        );
    }
    out
}

pub fn calibration_to_csv(rows: &[CalibrationRow]) -> String {
    let mut out = String::from(CALIBRATION_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.applied_frequency),
            num(r.applied_displacement),
            num(r.indicated_frequency),
            num(r.tolerance),
            r.pass(),
            num(r.recovered_displacement)
        );
    }
    out
}

pub fn spectrum_to_csv(spec: &Spectrum) -> String {
    let mut out = String::with_capacity(64 * spec.len());
    out.push_str(SPECTRUM_CSV_HEADER);
    out.push('\n');
    for ((f, m), p) in spec.frequency_axis.iter().zip(&spec.magnitude).zip(&spec.phase) {
        let _ = writeln!(out, "{},{},{}", num(*f), num(*m), num(*p));
    }
    out
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn emit_report(reports: &[ComparisonReport], format: Format, path: &Path) -> Result<()> {
    match format {
        Format::Csv => write(path, &reports_to_csv(reports)),
        Format::Json => write(path, &to_json(reports)),
    }
}

pub fn emit_calibration(rows: &[CalibrationRow], format: Format, path: &Path) -> Result<()> {
    match format {
        Format::Csv => write(path, &calibration_to_csv(rows)),
        Format::Json => write(path, &to_json(rows)),
    }
}

pub fn emit_spectrum_data(spec: &Spectrum, path: &Path) -> Result<()> {
    write(path, &spectrum_to_csv(spec))
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Splits off the leading text column, which may be quoted.
fn split_first_field(line: &str) -> Option<(String, &str)> {
    let Some(body) = line.strip_prefix('"') else {
        return Some(match line.split_once(',') {
            Some((a, b)) => (a.to_string(), b),
            None => (line.to_string(), ""),
        });
    };
    let mut field = String::new();
    let mut chars = body.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '"' {
            field.push(c);
        } else if matches!(chars.peek(), Some(&(_, '"'))) {
            field.push('"');
            chars.next();
        } else {
            let rest = &body[i + 1..];
            return Some((field, rest.strip_prefix(',').unwrap_or(rest)));
        }
    }
    None
}

fn parse_row(path: &Path, line_no: usize, line: &str, width: usize) -> Result<Vec<String>> {
    let (first, rest) =
        split_first_field(line).ok_or_else(|| parse_error(path, format!("line {line_no}: unterminated quote")))?;
    let mut fields = vec![first];
    fields.extend(rest.split(',').map(str::to_string));
    if fields.len() != width {
        return Err(parse_error(
            path,
            format!("line {line_no}: expected {width} fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn float(path: &Path, line_no: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| parse_error(path, format!("line {line_no}: `{s}` is not a number")))
}

fn check_header(path: &Path, text: &str, header: &str) -> Result<()> {
    if text.lines().next() != Some(header) {
        return Err(parse_error(path, format!("expected header `{header}`")));
    }
    Ok(())
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ComparisonReport>> {
    let text = read(path)?;
    check_header(path, &text, REPORT_CSV_HEADER)?;
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, line)| {
            let f = parse_row(path, i + 1, line, 7)?;
            let r = ComparisonReport {
                component: f[0].clone(),
                truth_frequency: float(path, i + 1, &f[1])?,
                ldv_frequency: float(path, i + 1, &f[2])?,
                accel_frequency: float(path, i + 1, &f[3])?,
                displacement_amplitude_recovered: float(path, i + 1, &f[6])?,
            };
            if float(path, i + 1, &f[4])? != r.ldv_error() || float(path, i + 1, &f[5])? != r.accel_error() {
                return Err(parse_error(
                    path,
                    format!("line {}: stored errors disagree with estimates", i + 1),
                ));
            }
            Ok(r)
        })
        .collect()
}

pub fn read_calibration_csv(path: &Path) -> Result<Vec<CalibrationRow>> {
    let text = read(path)?;
    check_header(path, &text, CALIBRATION_CSV_HEADER)?;
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(parse_error(path, format!("line {}: expected 6 fields", i + 1)));
            }
            Ok(CalibrationRow {
                applied_frequency: float(path, i + 1, f[0])?,
                applied_displacement: float(path, i + 1, f[1])?,
                indicated_frequency: float(path, i + 1, f[2])?,
                tolerance: float(path, i + 1, f[3])?,
                recovered_displacement: float(path, i + 1, f[5])?,
            })
        })
        .collect()
}

/// Spectrum CSV columns: frequency, magnitude, phase.
pub fn read_spectrum_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let text = read(path)?;
    check_header(path, &text, SPECTRUM_CSV_HEADER)?;
    let (mut f, mut m, mut p) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_error(path, format!("line {}: expected 3 fields", i + 1)));
        }
        f.push(float(path, i + 1, cols[0])?);
        m.push(float(path, i + 1, cols[1])?);
        p.push(float(path, i + 1, cols[2])?);
    }
    Ok((f, m, p))
}
