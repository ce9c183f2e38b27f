use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell region, defined implicitly by the evaluator through SIR quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    #[serde(rename = "center")]
    CellCenter,
    #[serde(rename = "median")]
    CellMedian,
    #[serde(rename = "edge")]
    CellEdge,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::CellCenter, Region::CellMedian, Region::CellEdge];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::CellCenter => "center",
            Region::CellMedian => "median",
            Region::CellEdge => "edge",
        }
    }

    pub fn ordinal(self) -> usize {
        match self {
            Region::CellCenter => 0,
            Region::CellMedian => 1,
            Region::CellEdge => 2,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "center" | "cc" => Ok(Region::CellCenter),
            "median" | "cm" => Ok(Region::CellMedian),
            "edge" | "ce" => Ok(Region::CellEdge),
            other => Err(Error::Config(format!("unknown region {other:?}"))),
        }
    }
}
