//! Builds a bound table and checks the stored values.
//!
//! cargo run --release --example build_table -- [DELTA] [ITERATIONS] [OUT] [D0_CACHE]

use std::path::PathBuf;

use rademacher_tails::dptable::{build_table_with, parse_delta, save_table, verify_stash, BuildOptions, GridSpec};

fn main() -> rademacher_tails::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (num, den) = parse_delta(args.first().map(String::as_str).unwrap_or("1/50"))?;
    let iterations = args.get(1).map_or(Ok(10), |s| s.parse()).unwrap_or(10);
    let grid = GridSpec::new(num, den, iterations)?;
    let opts = BuildOptions {
        d0_cache: args.get(3).map(PathBuf::from),
        progress: true,
        ..BuildOptions::default()
    };
    let table = build_table_with(&grid, &opts)?;
    if let Some(log) = &table.log {
        println!("{}", serde_json::to_string_pretty(log)?);
    }
    if let Some(out) = args.get(2) {
        save_table(&table, out)?;
        println!("wrote {out}");
    }
    verify_stash(&table).write_text(std::io::stdout())?;
    Ok(())
}
