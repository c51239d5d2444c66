//! Scenario sets, suite execution and reports.

mod config;
mod report;
mod results;
mod scenarios;
mod suite;

pub use config::{ConfigError, SuiteConfig};
pub use report::{
    build_report, emit_report, mean_profiles, paired_scenarios, summary_text, GroupSummary, Report, SweepPoint,
    REFERENCE_BALANCED_DELAY, REFERENCE_DELAY, REFERENCE_IMBALANCED_DELAY, REFERENCE_MOVEMENT_6, REFERENCE_QUEUE,
};
pub use results::{ResultRow, ResultsParseError, ResultsTable, RowMetrics, COLUMNS, RESULTS_HEADER};
pub use scenarios::{
    generate_scenarios, GenerateError, GeneratorConfig, ScenarioKind, ScenarioParseError, ScenarioRecord,
    ScenarioSet, BASE_SHARES, CANONICAL_SEED, SCENARIO_HEADER,
};
pub use suite::{
    profiles_from_tsv, profiles_to_tsv, run_suite, run_unit, selected, write_run, ProfileRow, SuiteError, SuiteRun,
    UnitResult, PROFILE_HEADER,
};

use std::path::Path;

use crate::model::{default_params, build_topology};

/// Loads the configured scenario file or generates the set from the seed.
pub fn load_scenarios(cfg: &SuiteConfig) -> Result<ScenarioSet, String> {
    match &cfg.scenarios {
        Some(p) => read_scenarios(p),
        None => generate_scenarios(&cfg.generator(), &build_topology(), &default_params()).map_err(|e| e.to_string()),
    }
}

pub fn read_scenarios(path: &Path) -> Result<ScenarioSet, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ScenarioSet::from_tsv(&text).map_err(|e| format!("{}: {e}", path.display()))
}
