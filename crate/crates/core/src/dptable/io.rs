use std::fs;
use std::path::Path;

use crc::{Crc, CRC_64_XZ};

use super::{BoundTable, GridSpec, Provenance};
use crate::error::{Error, Result};
use crate::prawitz::Integrator;

pub const MAGIC: &[u8; 4] = b"RDMC";
pub const FORMAT_VERSION: u32 = 1;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 4 * 8 + 4 + 1;
/// Range bounds are stored in quarters.
const A_RANGE: (i64, i64) = (0, 4);
const X_RANGE: (i64, i64) = (-12, 12);

pub fn save_table(t: &BoundTable, path: impl AsRef<Path>) -> Result<()> {
    let g = t.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * t.values().len() + 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&g.delta_num.to_le_bytes());
    buf.extend_from_slice(&g.delta_den.to_le_bytes());
    for q in [A_RANGE.0, A_RANGE.1, X_RANGE.0, X_RANGE.1] {
        buf.extend_from_slice(&q.to_le_bytes());
    }
    buf.extend_from_slice(&g.iterations.to_le_bytes());
    buf.push(t.provenance.integrator.tag());
    for v in t.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let sum = CRC64.checksum(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_table(path: impl AsRef<Path>) -> Result<BoundTable> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let fail = |reason: &str| Error::TableFormat {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(fail("not a table file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let computed_over = |end: usize| CRC64.checksum(&bytes[..end]);
    if bytes.len() < HEADER_LEN + 8 {
        let end = bytes.len().saturating_sub(8);
        return Err(Error::Checksum {
            stored: read_u64(&bytes, end).unwrap_or(0),
            computed: computed_over(end),
        });
    }
    let end = bytes.len() - 8;
    let stored = read_u64(&bytes, end).unwrap();
    let computed = computed_over(end);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    let mut r = Reader { bytes: &bytes, pos: 8 };
    let num = r.u64();
    let den = r.u64();
    let ranges = [r.i64(), r.i64(), r.i64(), r.i64()];
    if ranges != [A_RANGE.0, A_RANGE.1, X_RANGE.0, X_RANGE.1] {
        return Err(fail("unsupported a/x ranges"));
    }
    let iterations = u32::from_le_bytes(r.take(4).try_into().unwrap());
    let tag = r.take(1)[0];
    let integrator = Integrator::from_tag(tag).ok_or_else(|| fail("unknown integrator tag"))?;
    let grid = if iterations == 0 {
        GridSpec::new(num, den, 1)?.with_iterations(0)
    } else {
        GridSpec::new(num, den, iterations)?
    };
    if grid.delta_num != num || grid.delta_den != den {
        return Err(fail("delta is not in lowest terms"));
    }
    let body = &bytes[HEADER_LEN..end];
    if body.len() != 8 * grid.cells() {
        return Err(fail("value count does not match the grid"));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    BoundTable::from_parts(
        grid,
        values,
        Provenance {
            integrator,
            max_error_budget: None,
        },
    )
}

/// Loads a table and refuses it unless its header matches `expected`.
pub fn load_table_checked(path: impl AsRef<Path>, expected: &GridSpec) -> Result<BoundTable> {
    let t = load_table(path)?;
    if t.grid() != expected {
        return Err(Error::GridMismatch(format!("file has {}, requested {}", t.grid(), expected)));
    }
    Ok(t)
}

fn read_u64(bytes: &[u8], at: usize) -> Option<u64> {
    bytes
        .get(at..at + 8)
        .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> &'a [u8] {
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        s
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take(8).try_into().unwrap())
    }

    fn i64(&mut self) -> i64 {
        i64::from_le_bytes(self.take(8).try_into().unwrap())
    }
}
