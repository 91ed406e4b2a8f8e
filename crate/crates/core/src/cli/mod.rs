//! Plain `key = value` run configurations, one pipeline per `command`, and
//! CSV/JSON export.
//!
//! ```text
//! metric = round_s3
//! R = 1
//! command = expand
//! P = 0,0,0
//! eps_grid = 0.2,0.1,0.05,0.025
//! ```
//!
//! Lists are comma-separated and `#` starts a comment. Each run writes its
//! tables, `report.json` and `manifest.json` into `output_dir`; the tables
//! depend only on the configuration.

mod config;
mod dispatch;
mod export;

pub use config::{Command, RunConfig, DEFAULT_BAND, DEFAULT_OUTPUT_DIR};
pub use dispatch::{dispatch, dispatch_with, with_output_dir, RunManifest, Timing};
pub use export::{
    expansion_table, float, hawking_table, leaves_table, Table, EXPAND_HEADER, HAWKING_HEADER,
    LEAVES_HEADER,
};
