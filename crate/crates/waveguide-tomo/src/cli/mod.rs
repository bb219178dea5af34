//! Command-line front end: scenario files, presets, and the four
//! subcommands (`simulate`, `reconstruct`, `sweep`, `validate`) behind the
//! one thin binary. Everything here is plumbing over the library modules;
//! the file formats are the only logic of its own.

mod commands;
mod output;
mod scenario;

pub use commands::{run, Cli, Command, RunArgs, SweepArgs};
pub use output::{
    fmt_num, observables_path, resolve_out_path, summary_path, OBSERVABLES_HEADER, OUTDIR_ENV,
    SWEEP_HEADER, TRAJECTORY_HEADER,
};
pub use scenario::{
    load, GridOverrides, Preset, ProtocolOverrides, PulseSpec, RawScenario, Scenario, ScenarioEcho,
};
