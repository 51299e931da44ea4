//! Command-line front end: spec-file parsing, command dispatch and report
//! rendering.

pub mod app;
pub mod render;
pub mod spec;

pub use app::{run, Cli, Command, Format, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};
pub use render::{render_json, render_text};
pub use spec::{CHECK_NAMES, parse_spec, render_spec, SpecError};
