//! Stdout reporting that tolerates closed pipes.

use std::io::Write;

/// Prints one line to stdout. When the consumer has closed the pipe
/// (`head`, a quit pager), the command's work is already done, so the
/// process ends quietly instead of reporting a failure.
pub fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{text}").is_err() {
        std::process::exit(0);
    }
}

/// Serializes and prints a JSON report.
pub fn emit_json(value: &serde_json::Value) {
    emit(&serde_json::to_string_pretty(value).expect("report serializes"));
}
