//! Command-line front end: manifest I/O, canonical reports and dispatch.

pub mod commands;
pub mod io;
pub mod report;

use clap::Parser;
use serde_json::json;

use crate::commands::{command_name, execute, Cli, CliError};
use crate::report::to_canonical_string;

/// Outcome of one invocation: exit code, stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => Output { code: 0, stdout: report.render(), stderr: String::new() },
        Err(e) => error_output(command_name(&cli.command), &e),
    }
}

fn error_output(command: &str, e: &CliError) -> Output {
    let body = json!({
        "command": command,
        "error": { "kind": e.kind(), "reason": e.reason(), "message": e.to_string() },
    });
    let mut stdout = to_canonical_string(&body);
    stdout.push('\n');
    Output { code: e.exit_code(), stdout, stderr: format!("error: {e}\n") }
}
