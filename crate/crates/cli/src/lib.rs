//! Batch analysis of channels described in JSON.

mod emit;
mod report;
mod request;

pub use emit::{emit, format_float, to_json, to_text, Format};
pub use report::{run, AnalysisReport, ChannelReport, CommandError};
pub use request::{parse_request, parse_request_with, AnalysisRequest, Command, Overrides, RequestChannel};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid request: {0}")]
    Request(String),
    #[error("channel {index}: {source}")]
    Channel {
        index: usize,
        #[source]
        source: perbound::Error,
    },
    #[error(transparent)]
    Tolerance(#[from] perbound::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Exit status for a completed run: 0 without per-channel errors, 1 otherwise.
pub fn exit_code(report: &AnalysisReport) -> i32 {
    if report.error_count() == 0 {
        0
    } else {
        1
    }
}

/// Exit status for requests that could not be read or parsed.
pub const USAGE_EXIT: i32 = 2;
