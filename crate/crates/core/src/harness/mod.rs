//! Scenario files, batch runs and output files.

mod output;
mod run;
mod scenario;

pub use output::{
    approx_csv, compare_csv, error_report_text, metadata_header, oracle_csv, validity_text,
    APPROX_COLUMNS,
};
pub use run::{
    compute_error_report, oracle_samples, run, BodyErrors, ErrorReport, Mode, OracleSample,
    Quantity, QuantityError, RunOutcome, EXIT_INTERNAL, EXIT_INVALID, EXIT_OK, EXIT_TRUNCATED,
};
pub use scenario::{
    file_safe, load_scenario, parse_scenario, BodySpec, Scenario, ScenarioError, ScenarioOptions,
    TimesSpec,
};
