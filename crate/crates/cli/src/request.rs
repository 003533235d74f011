use serde::Deserialize;

use perbound::{Channel, ChannelDescriptor, ToleranceConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Validate,
    Spectrum,
    Decompose,
    Boundary,
    Classify,
    All,
}

impl Command {
    pub const ANALYSES: [Command; 5] = [
        Command::Validate,
        Command::Spectrum,
        Command::Decompose,
        Command::Boundary,
        Command::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Spectrum => "spectrum",
            Command::Decompose => "decompose",
            Command::Boundary => "boundary",
            Command::Classify => "classify",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequest {
    channels: Vec<ChannelDescriptor>,
    #[serde(default)]
    commands: Vec<Command>,
    #[serde(default)]
    tolerances: Option<ToleranceConfig>,
    #[serde(default)]
    seed: u64,
}

/// Command-line values that take precedence over the request document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub commands: Vec<Command>,
    pub eq_tol: Option<f64>,
    pub peripheral_tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RequestChannel {
    pub label: String,
    pub channel: Channel,
}

#[derive(Debug, Clone)]
pub struct AnalysisRequest {
    pub channels: Vec<RequestChannel>,
    /// Distinct analyses in canonical order, with `all` expanded.
    pub commands: Vec<Command>,
    pub tolerances: ToleranceConfig,
    pub seed: u64,
}

pub fn parse_request(text: &str) -> Result<AnalysisRequest, CliError> {
    parse_request_with(text, &Overrides::default())
}

pub fn parse_request_with(text: &str, overrides: &Overrides) -> Result<AnalysisRequest, CliError> {
    let raw: RawRequest = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut tolerances = raw.tolerances.unwrap_or_default();
    if let Some(eq) = overrides.eq_tol {
        tolerances.eq_tol = eq;
    }
    if let Some(p) = overrides.peripheral_tol {
        tolerances.peripheral_tol = p;
    }
    tolerances.validate()?;

    let requested = if overrides.commands.is_empty() {
        raw.commands
    } else {
        overrides.commands.clone()
    };
    let commands: Vec<Command> = Command::ANALYSES
        .into_iter()
        .filter(|c| requested.contains(c) || requested.contains(&Command::All))
        .collect();
    if commands.is_empty() {
        return Err(CliError::Request("at least one command is required".into()));
    }
    if raw.channels.is_empty() {
        return Err(CliError::Request("at least one channel is required".into()));
    }

    let channels = raw
        .channels
        .iter()
        .enumerate()
        .map(|(index, desc)| {
            desc.to_channel(&tolerances)
                .map(|channel| RequestChannel {
                    label: desc.label(),
                    channel,
                })
                .map_err(|source| CliError::Channel { index, source })
        })
        .collect::<Result<_, _>>()?;

    Ok(AnalysisRequest {
        channels,
        commands,
        tolerances,
        seed: overrides.seed.unwrap_or(raw.seed),
    })
}
