//! Machine-readable campaign reports.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Some bound was not strong enough; nothing contradicts the oracle.
    TooWeak,
    /// A claimed lower bound exceeds an exact value.
    Unsound,
    /// Premises failed, so no conclusion was checked.
    Skipped,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Skipped => 0,
            Status::TooWeak => 1,
            Status::Unsound => 3,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::TooWeak => "too_weak",
            Status::Unsound => "unsound",
            Status::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportItem {
    pub description: String,
    pub target: f64,
    pub achieved: f64,
    pub margin: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unsound: bool,
    /// Pass/fail only; the margin carries no size and is left out of the summary.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ReportItem {
    /// `achieved >= target` after subtracting `slack` from `achieved`.
    pub fn at_least(description: impl Into<String>, achieved: f64, target: f64, slack: f64) -> Self {
        let margin = achieved - slack - target;
        ReportItem {
            description: description.into(),
            target,
            achieved,
            margin,
            pass: margin >= 0.0,
            unsound: false,
            exact: false,
            detail: None,
        }
    }

    /// Strict `achieved > target` after subtracting `slack`.
    pub fn above(description: impl Into<String>, achieved: f64, target: f64, slack: f64) -> Self {
        let margin = achieved - slack - target;
        ReportItem {
            pass: margin > 0.0,
            ..Self::at_least(description, achieved, target, slack)
        }
    }

    /// `achieved <= limit`; a violation is recorded as unsound.
    pub fn at_most(description: impl Into<String>, achieved: f64, limit: f64) -> Self {
        let margin = limit - achieved;
        ReportItem {
            description: description.into(),
            target: limit,
            achieved,
            margin,
            pass: margin >= 0.0,
            unsound: margin < 0.0,
            exact: false,
            detail: None,
        }
    }

    pub fn exact(description: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        ReportItem {
            description: description.into(),
            target: 1.0,
            achieved: if ok { 1.0 } else { 0.0 },
            margin: if ok { 0.0 } else { -1.0 },
            pass: ok,
            unsound: false,
            exact: true,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn flag_unsound(mut self) -> Self {
        self.unsound = !self.pass;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub unsound: usize,
    pub min_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub campaign: String,
    pub status: Status,
    pub summary: Summary,
    pub config: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub items: Vec<ReportItem>,
}

impl VerificationReport {
    pub fn new(campaign: impl Into<String>) -> Self {
        VerificationReport {
            campaign: campaign.into(),
            status: Status::Pass,
            summary: Summary::default(),
            config: BTreeMap::new(),
            notes: Vec::new(),
            items: Vec::new(),
        }
    }

    pub fn config(mut self, key: &str, value: impl Serialize) -> Self {
        self.set_config(key, value);
        self
    }

    pub fn set_config(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.config.insert(key.to_string(), v);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn push(&mut self, item: ReportItem) {
        self.summary.total += 1;
        if item.pass {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        if item.unsound {
            self.summary.unsound += 1;
        }
        if !item.exact && item.margin.is_finite() {
            self.summary.min_margin = Some(match self.summary.min_margin {
                Some(m) => m.min(item.margin),
                None => item.margin,
            });
        }
        self.items.push(item);
        self.refresh_status();
    }

    /// Marks the campaign as skipped because its premises failed.
    pub fn skip(&mut self, reason: impl Into<String>) {
        self.notes.push(reason.into());
        self.status = Status::Skipped;
    }

    fn refresh_status(&mut self) {
        if self.status == Status::Skipped {
            return;
        }
        self.status = if self.summary.unsound > 0 {
            Status::Unsound
        } else if self.summary.failed > 0 {
            Status::TooWeak
        } else {
            Status::Pass
        };
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failing(&self) -> impl Iterator<Item = &ReportItem> {
        self.items.iter().filter(|i| !i.pass)
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "{}: {} ({}/{} passed{})",
            self.campaign,
            self.status,
            self.summary.passed,
            self.summary.total,
            self.summary
                .min_margin
                .map(|m| format!(", min margin {m:.6}"))
                .unwrap_or_default()
        )?;
        for n in &self.notes {
            writeln!(w, "  note: {n}")?;
        }
        for item in &self.items {
            if !item.pass || self.items.len() <= 40 {
                writeln!(
                    w,
                    "  [{}] {}: achieved {:.9} target {:.9} margin {:+.3e}{}",
                    if item.pass { "ok" } else if item.unsound { "UNSOUND" } else { "FAIL" },
                    item.description,
                    item.achieved,
                    item.target,
                    item.margin,
                    item.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_campaign_round_trips() {
        let r = VerificationReport::new("empty");
        let back = VerificationReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(r, back);
        assert!(r.passed());
    }

    #[test]
    fn single_failure_sets_status() {
        let mut r = VerificationReport::new("one").config("delta", 0.01);
        r.push(ReportItem::above("x", 0.1, 0.2, 1e-9));
        assert_eq!(r.status, Status::TooWeak);
        assert_eq!(r.exit_code(), 1);
        let back = VerificationReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn unsound_dominates() {
        let mut r = VerificationReport::new("u");
        r.push(ReportItem::above("weak", 0.1, 0.2, 0.0));
        r.push(ReportItem::at_most("bound vs exact", 0.3, 0.25));
        assert_eq!(r.status, Status::Unsound);
        assert_eq!(r.exit_code(), 3);
        assert_eq!(r.summary.unsound, 1);
    }

    #[test]
    fn schema_echo_keeps_config_order() {
        let r = VerificationReport::new("cfg").config("zeta", 1).config("alpha", "x");
        let json = r.to_json().unwrap();
        assert!(json.find("alpha").unwrap() < json.find("zeta").unwrap());
    }
}
