//! Builds a coarse table in memory, saves it, and reads a few cells back.
//!
//! cargo run --release --example query_table -- [DELTA]

use rademacher_tails::dptable::{build_table, load_table, parse_delta, save_table, GridSpec};

fn main() -> rademacher_tails::Result<()> {
    let delta = std::env::args().nth(1).unwrap_or_else(|| "1/40".into());
    let (num, den) = parse_delta(&delta)?;
    let table = build_table(&GridSpec::new(num, den, 10)?)?;
    let path = std::env::temp_dir().join("rdmc-example.rdmc");
    save_table(&table, &path)?;
    let back = load_table(&path)?;
    println!("{} round trip identical: {}", back.grid(), back.values() == table.values());
    for (a, x) in [(0.35, 0.35), (0.3, 1.0), (0.5, 0.5), (0.9, -0.5), (0.2, 3.2)] {
        println!("D({a}, {x}) >= {:.6}", back.query(a, x)?);
    }
    if let Some(log) = &table.log {
        println!("fixed-point delta {:.2e}", log.fixed_point_delta);
    }
    Ok(())
}
