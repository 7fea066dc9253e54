//! Domain-error surface of the binary: every failure becomes one JSON line
//! on stderr and exit code 1.

use std::fmt;

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.message, "kind": self.kind }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

macro_rules! from_error {
    ($type:ty, $kind:literal) => {
        impl From<$type> for CliError {
            fn from(err: $type) -> Self {
                CliError::new($kind, err.to_string())
            }
        }
    };
}

from_error!(latentlens::archive::ArchiveError, "archive");
from_error!(latentlens::curation::CurationError, "curation");
from_error!(latentlens::editing::EditError, "editing");
from_error!(latentlens::stylespace::StyleSpaceError, "stylespace");
from_error!(latentlens::metrics::MetricsError, "metrics");
from_error!(latentlens::synth::SynthError, "synth");
from_error!(std::io::Error, "io");
from_error!(serde_json::Error, "json");
