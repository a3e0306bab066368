use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Circle;

pub const DEFAULT_COST_TS: &[usize] = &[4, 8, 16, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Decide,
    Verify,
    Attack,
    Cost,
    Trace,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Decide => "decide",
            Mode::Verify => "verify",
            Mode::Attack => "attack",
            Mode::Cost => "cost",
            Mode::Trace => "trace",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Parse(format!("unknown format `{s}` (text, json, csv)"))),
        }
    }
}

/// Fully resolved settings for one command. Echoed into every report so
/// the run can be repeated exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice: Option<Circle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<Circle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice2: Option<Circle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    pub trials: u64,
    pub decoys: usize,
    pub samples: u64,
    pub shots: u64,
    pub exhaustive: bool,
    pub ts: Vec<usize>,
    pub seed: u64,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            t: 2,
            alice: None,
            bob: None,
            alice2: None,
            strategy: None,
            trials: 10_000,
            decoys: 1,
            samples: 1000,
            shots: 1000,
            exhaustive: false,
            ts: DEFAULT_COST_TS.to_vec(),
            seed: 0,
            format: Format::Text,
            out: None,
        }
    }

    pub fn alice(&self) -> Result<Circle> {
        self.alice
            .ok_or_else(|| Error::InvalidParams(format!("{} needs --alice x,y,r", self.mode)))
    }

    pub fn bob(&self) -> Result<Circle> {
        self.bob
            .ok_or_else(|| Error::InvalidParams(format!("{} needs --bob x,y,r", self.mode)))
    }
}
