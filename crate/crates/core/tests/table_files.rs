use rademacher_tails::dptable::{build_table, load_table, load_table_checked, save_table, BoundTable, GridSpec, FORMAT_VERSION};
use rademacher_tails::Error;

fn coarse() -> BoundTable {
    build_table(&GridSpec::new(1, 20, 2).unwrap()).unwrap()
}

#[test]
fn save_and_load_are_inverse() {
    let t = coarse();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.rdmc");
    save_table(&t, &path).unwrap();
    let back = load_table_checked(&path, t.grid()).unwrap();
    assert_eq!(back.values(), t.values());
    assert_eq!(back.grid(), t.grid());
    assert_eq!(back.provenance.integrator, t.provenance.integrator);
    assert_eq!(back.max_abs_diff(&t).unwrap(), 0.0);
}

#[test]
fn damaged_files_are_rejected() {
    let t = coarse();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.rdmc");
    save_table(&t, &path).unwrap();
    let good = std::fs::read(&path).unwrap();

    let mut flipped = good.clone();
    let last = flipped.len() - 20;
    flipped[last] ^= 1;
    std::fs::write(&path, &flipped).unwrap();
    assert!(matches!(load_table(&path), Err(Error::Checksum { .. })));

    let mut version = good.clone();
    version[4..8].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
    std::fs::write(&path, &version).unwrap();
    assert!(matches!(load_table(&path), Err(Error::Version { .. })));

    let mut magic = good.clone();
    magic[0] = b'X';
    std::fs::write(&path, &magic).unwrap();
    assert!(matches!(load_table(&path), Err(Error::TableFormat { .. })));

    std::fs::write(&path, &good[..good.len() / 2]).unwrap();
    assert!(load_table(&path).is_err());
}

#[test]
fn grid_mismatch_is_reported() {
    let t = coarse();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.rdmc");
    save_table(&t, &path).unwrap();
    let other = GridSpec::new(1, 20, 3).unwrap();
    assert!(matches!(load_table_checked(&path, &other), Err(Error::GridMismatch(_))));
}

#[test]
fn queries_outside_the_grid() {
    let t = coarse();
    assert_eq!(t.query(0.5, 3.0).unwrap(), 0.0);
    assert_eq!(t.query(0.5, 10.0).unwrap(), 0.0);
    assert!(t.query(0.5, -3.5).unwrap() >= 0.5);
    assert!(t.query(0.0, 0.0).is_err() || t.query(0.0, 0.0).unwrap() <= 0.5);
    assert!(t.query(1.5, 0.0).is_err());
    assert!(t.query(f64::NAN, 0.0).is_err());
}
