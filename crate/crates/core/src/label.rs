use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The seven rhetorical roles a sentence of a judgment can play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Facts: the chronology of events leading to the case.
    #[serde(rename = "FAC")]
    Fac,
    /// Ruling by a lower court.
    #[serde(rename = "RLC")]
    Rlc,
    /// Argument of the contending parties.
    #[serde(rename = "ARG")]
    Arg,
    /// Statute citation or quotation.
    #[serde(rename = "STA")]
    Sta,
    /// Precedent: prior case law.
    #[serde(rename = "PRE")]
    Pre,
    /// Ratio of the decision.
    #[serde(rename = "RATIO")]
    Ratio,
    /// Ruling by the present court.
    #[serde(rename = "RPC")]
    Rpc,
}

/// Number of labels.
pub const K: usize = 7;

impl Label {
    pub const ALL: [Label; K] = [
        Label::Fac,
        Label::Rlc,
        Label::Arg,
        Label::Sta,
        Label::Pre,
        Label::Ratio,
        Label::Rpc,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Fac => "FAC",
            Label::Rlc => "RLC",
            Label::Arg => "ARG",
            Label::Sta => "STA",
            Label::Pre => "PRE",
            Label::Ratio => "RATIO",
            Label::Rpc => "RPC",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown label `{s}`")))
    }
}
