//! Verification suites, blow-up scenarios and report emission behind the `ccf` CLI.

pub mod calibrate;
pub mod config;
pub mod report;
pub mod scenarios;
pub mod suites;

pub use calibrate::LadderCheck;
pub use config::{parse_ladder, Corruption, RunConfig, Suite};
pub use report::{Environment, Format, Record, Report, SCHEMA_VERSION};
pub use scenarios::{run_l2_blowup, run_mult_exp, threshold_profile};
pub use suites::{
    extension_run, propagator_oracle, run_calculus_check, run_calculus_suite, CalculusCheck, run_duhamel_suite, run_extension_suite, run_identity_suite,
    run_kernel_suite, run_suite,
};
