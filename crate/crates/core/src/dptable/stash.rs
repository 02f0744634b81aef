use serde::Serialize;

use super::BoundTable;
use crate::exact::rational;
use crate::oracle::{exact_tail, TailQuery, WeightVector};
use crate::report::{ReportItem, VerificationReport};

/// Subtracted from table values before comparing with a target.
pub const STASH_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StashEntry {
    pub a: f64,
    pub x: f64,
    pub target: f64,
    pub target_label: &'static str,
    /// `D > target` rather than `D >= target`.
    pub strict: bool,
}

pub fn stash_entries() -> Vec<StashEntry> {
    let r = 0.3 / 0.51f64.sqrt();
    let e = |a, x, target, target_label, strict| StashEntry {
        a,
        x,
        target,
        target_label,
        strict,
    };
    vec![
        e(0.35, 0.35, 0.25, "1/4", true),
        e(0.3, 1.0, 3.0 / 32.0, "3/32", true),
        e(r, r, 3.0 / 16.0, "3/16", true),
        e(0.4, 1.0, 1.0 / 12.0, "1/12", true),
        e(0.5, 0.5, 1.0 / 6.0, "1/6", true),
        e(0.34, 1.42, 0.04, "0.04", true),
        e(0.43, 1.42, 0.03, "0.03", true),
        e(0.51, 1.01, 1.0 / 16.0, "1/16", false),
    ]
}

/// Checks the eight stored bounds, and closes `D(0.51, 1.01) <= 1/16` with the
/// four-halves witness.
pub fn verify_stash(t: &BoundTable) -> VerificationReport {
    let g = t.grid();
    let mut report = VerificationReport::new("stash")
        .config("delta", format!("{}/{}", g.delta_num, g.delta_den))
        .config("iterations", g.iterations)
        .config("integrator", t.provenance.integrator.to_string())
        .config("slack", STASH_SLACK);
    for e in stash_entries() {
        let desc = format!(
            "D({:.6}, {:.6}) {} {}",
            e.a,
            e.x,
            if e.strict { ">" } else { ">=" },
            e.target_label
        );
        let item = match t.query(e.a, e.x) {
            Ok(v) if e.strict => ReportItem::above(desc, v, e.target, STASH_SLACK),
            // equality entry: the slack goes to the target side
            Ok(v) => ReportItem::at_least(desc, v, e.target, -STASH_SLACK),
            Err(err) => ReportItem::exact(desc, false, err.to_string()),
        };
        report.push(item);
    }
    let witness = WeightVector::from_rationals(&vec![rational(1, 2); 4])
        .and_then(|w| exact_tail(&w, &TailQuery::gt(rational(101, 100))));
    match witness {
        Ok(p) => {
            let exact = p.to_string();
            report.push(ReportItem::exact(
                "witness [1/2 x4]: Pr[X > 1.01] = 1/16",
                exact == "1/16",
                exact,
            ));
            if let Ok(v) = t.query(0.51, 1.01) {
                report.push(
                    ReportItem::at_most("D(0.51, 1.01) <= witness", v - STASH_SLACK, p.to_f64())
                        .with_detail("max weight 1/2 <= 0.51"),
                );
            }
        }
        Err(err) => report.push(ReportItem::exact("witness [1/2 x4]", false, err.to_string())),
    }
    report
}
