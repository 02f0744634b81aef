use super::SLACK;
use crate::dptable::BoundTable;
use crate::error::Result;
use crate::report::{ReportItem, VerificationReport};

/// `(coefficient, x)` terms of `sum c D(a, x)` plus a constant.
struct QSum {
    name: &'static str,
    a: f64,
    constant: f64,
    terms: &'static [(f64, f64)],
}

const SUMS: [QSum; 3] = [
    QSum {
        name: "first family",
        a: 0.216,
        constant: 0.0,
        terms: &[(1.0, 0.032), (2.0, 0.828), (1.0, 0.858), (1.0, 1.634), (2.0, 1.654), (1.0, 2.452)],
    },
    QSum {
        name: "second family",
        a: 0.41,
        constant: 793.0 / 2048.0,
        terms: &[(2.0, 0.828), (1.0, 0.858), (1.0, 1.634), (2.0, 1.654), (1.0, 2.452)],
    },
    QSum {
        name: "third family",
        a: 0.41,
        constant: 2.0 * 37.0 / 256.0,
        terms: &[(1.0, 0.032), (1.0, 0.858), (1.0, 1.634), (2.0, 1.654), (1.0, 2.452)],
    },
];

pub fn verify_qsums(t: &BoundTable) -> Result<VerificationReport> {
    let g = t.grid();
    let mut report = VerificationReport::new("qsums")
        .config("table_delta", format!("{}/{}", g.delta_num, g.delta_den))
        .config("table_iterations", g.iterations)
        .config("slack", SLACK);
    for s in &SUMS {
        let mut total = s.constant;
        for &(c, x) in s.terms {
            total += c * t.query(s.a, x)?;
        }
        report.push(ReportItem::at_least(format!("{} at a = {}: sum >= 3/4", s.name, s.a), total, 0.75, SLACK));
    }
    let tail = t.query(0.41, 2.452)?;
    report.push(ReportItem::exact("D(0.41, 2.452) = 0", tail == 0.0, format!("{tail:e}")));
    let scaled = (7.0 / 40.0) / (1599.0f64 / 2400.0).sqrt();
    report.push(
        ReportItem::at_most("(7/40)/sqrt(1599/2400) <= 0.216", scaled, 0.216)
            .with_detail("leading-weight scaling"),
    );
    Ok(report)
}
