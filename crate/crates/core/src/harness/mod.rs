//! Scenario orchestration: runs the LDV and accelerometer channels end to
//! end, reproduces the calibration sweep and the component comparison, and
//! writes reports.

mod report;
mod run;
mod scenario;

pub use report::{
    calibration_to_csv, emit_calibration, emit_report, emit_spectrum_data, read_calibration_csv, read_report_csv,
    read_spectrum_csv, reports_to_csv, spectrum_to_csv, CalibrationRow, ComparisonReport, Format,
    CALIBRATION_CSV_HEADER, REPORT_CSV_HEADER, SPECTRUM_CSV_HEADER,
};
pub use run::{
    calibration_rows, calibration_suite, component_suite, ldv_spectrum, run_accel_channel, run_calibration_table,
    run_calibration_table_with, run_component_suite, run_component_suite_with, run_ldv_channel, run_many, run_scenario,
    run_scenario_detailed, thread_count, Execution, ScenarioRun,
};
pub use scenario::{
    air_filter_40hz, builtin_scenarios, calibration_scenario, component_scenarios, find_scenario, load_scenarios,
    parse_scenarios, DemodOverrides, DetectorOverrides, OpticalOverrides, ResolvedScenario, Scenario, Tolerances,
    CALIBRATION_ROWS, DEFAULT_DURATION, DEFAULT_HENDERSON_TERMS,
};
