//! Runs every verification campaign against a saved table.
//!
//! cargo run --release --example campaigns -- PATH

use rademacher_tails::dptable::load_table;
use rademacher_tails::verify::{run_campaign, Campaign, CampaignOptions};

fn main() -> rademacher_tails::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(path) => Some(load_table(path)?),
        None => {
            eprintln!("no table given; running the table-free campaigns only");
            None
        }
    };
    let opts = CampaignOptions::default();
    let all = [Campaign::Fixtures, Campaign::Theorems, Campaign::Stash, Campaign::Qsums, Campaign::A1, Campaign::A2, Campaign::A3];
    for c in all {
        if c.needs_table() && table.is_none() {
            continue;
        }
        let report = run_campaign(c, table.as_ref(), None, &opts)?;
        println!("{:<9} {:<9} {}/{}", c.to_string(), report.status.to_string(), report.summary.passed, report.summary.total);
    }
    Ok(())
}
