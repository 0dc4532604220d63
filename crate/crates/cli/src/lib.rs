//! Library surface of the `phonotype` binary, exposed so integration tests
//! can drive argument parsing, manifests, and schema validation directly.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod schema;

use serde_json::json;

/// Stderr logger honoring `--quiet` and `--json-logs`.
pub struct Logger {
    pub quiet: bool,
    pub json: bool,
}

impl Logger {
    pub fn info(&self, message: &str) {
        if self.quiet {
            return;
        }
        if self.json {
            eprintln!("{}", json!({"level": "info", "message": message}));
        } else {
            eprintln!("[phonotype] {message}");
        }
    }
}
