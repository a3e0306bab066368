//! Run configuration, the five commands, and report rendering.

mod cli;
mod commands;
mod config;
mod render;

pub use cli::{execute, main_entry, run_config, Cli, Command, Flags};
pub use commands::{
    attack_checks, cmd_attack, cmd_cost, cmd_decide, cmd_trace, cmd_verify, cost_table, sweep,
    Check, CostRow, CostTable, DecideResult, Mismatch, Relation, Report, Results, SweepSummary,
    Timing, TraceResult,
};
pub use config::{Format, Mode, RunConfig, DEFAULT_COST_TS};
pub use render::render;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
}

/// JSON Schema (draft 7) that every `--format json` report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");
