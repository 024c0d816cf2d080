use std::fmt;

use potrel_core::law::LawError;
use potrel_core::monitor::MonitorError;
use potrel_core::relevance::RelevanceError;
use potrel_core::sites::SiteError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<LawError> for CliError {
    fn from(e: LawError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<SiteError> for CliError {
    fn from(e: SiteError) -> Self {
        match e {
            SiteError::Overflow(_) | SiteError::Domain(_) => CliError::Domain(e.to_string()),
            SiteError::Invalid { .. } | SiteError::Json { .. } | SiteError::Io { .. } => {
                CliError::Io(e.to_string())
            }
        }
    }
}

impl From<MonitorError> for CliError {
    fn from(e: MonitorError) -> Self {
        match e {
            MonitorError::Parse { .. } | MonitorError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<RelevanceError> for CliError {
    fn from(e: RelevanceError) -> Self {
        match e {
            RelevanceError::Schema { .. }
            | RelevanceError::Invariant { .. }
            | RelevanceError::Encoding { .. }
            | RelevanceError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
