//! Verification campaigns over a bound table and the exact oracle.

mod campaigns;
mod fixtures;
pub mod mesh;
mod qsums;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use campaigns::{
    a1_cap, a3_cap, a4_cap, l_values, pair_value, triple_value, verify_a1, verify_a1_with, verify_a2, verify_a2_with,
    verify_a3, verify_a3_with, CampaignOptions,
};
pub use fixtures::{t2_configuration, t3_configuration, verify_fixtures, verify_theorems};
pub use qsums::verify_qsums;

use crate::dptable::{verify_stash, BoundTable};
use crate::error::{Error, Result};
use crate::report::VerificationReport;

/// Subtracted from table-side values before comparing with a target.
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Campaign {
    A1,
    A2,
    A3,
    Qsums,
    Stash,
    Fixtures,
    Theorems,
}

impl Campaign {
    pub fn default_delta(self) -> Option<f64> {
        match self {
            Campaign::A1 => Some(0.005),
            Campaign::A2 => Some(0.03),
            Campaign::A3 => Some(0.01),
            _ => None,
        }
    }

    pub fn needs_table(self) -> bool {
        !matches!(self, Campaign::Fixtures | Campaign::Theorems)
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a1" => Ok(Campaign::A1),
            "a2" => Ok(Campaign::A2),
            "a3" => Ok(Campaign::A3),
            "qsums" => Ok(Campaign::Qsums),
            "stash" => Ok(Campaign::Stash),
            "fixtures" => Ok(Campaign::Fixtures),
            "theorems" => Ok(Campaign::Theorems),
            _ => Err(Error::parse(s, "expected a1, a2, a3, qsums, stash, fixtures or theorems")),
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Campaign::A1 => "a1",
            Campaign::A2 => "a2",
            Campaign::A3 => "a3",
            Campaign::Qsums => "qsums",
            Campaign::Stash => "stash",
            Campaign::Fixtures => "fixtures",
            Campaign::Theorems => "theorems",
        })
    }
}

/// Runs one campaign; `delta` defaults to the campaign's own mesh step.
pub fn run_campaign(
    campaign: Campaign,
    table: Option<&BoundTable>,
    delta: Option<f64>,
    opts: &CampaignOptions,
) -> Result<VerificationReport> {
    let table = || {
        table.ok_or_else(|| Error::InvalidParameter(format!("campaign {campaign} needs a table")))
    };
    let delta = delta.or(campaign.default_delta()).unwrap_or(0.0);
    match campaign {
        Campaign::A1 => verify_a1_with(table()?, delta, opts),
        Campaign::A2 => verify_a2_with(table()?, delta, opts),
        Campaign::A3 => verify_a3_with(table()?, delta, opts),
        Campaign::Qsums => verify_qsums(table()?),
        Campaign::Stash => Ok(verify_stash(table()?)),
        Campaign::Fixtures => verify_fixtures(),
        Campaign::Theorems => verify_theorems(opts.theorem_samples, opts.seed),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

pub fn emit_report(report: &VerificationReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => {
            let mut buf = Vec::new();
            report.write_text(&mut buf)?;
            Ok(String::from_utf8_lossy(&buf).into_owned())
        }
    }
}
