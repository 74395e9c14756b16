//! PFLD field files: the magic `PFLD0001`, a single-line JSON header
//! terminated by `\n`, then `N^d` little-endian `f64` samples in row-major
//! order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Field, Grid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PFLD0001";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub d: usize,
    pub n: usize,
    pub support: f64,
    pub description: String,
}

pub fn write_field(out: &mut impl Write, field: &Field, description: &str) -> Result<()> {
    let header = Header {
        d: field.grid().dim(),
        n: field.grid().n(),
        support: field.support(),
        description: description.to_string(),
    };
    out.write_all(MAGIC)?;
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_field(input: &mut impl BufRead) -> Result<(Field, Header)> {
    let mut magic = [0u8; 8];
    input
        .read_exact(&mut magic)
        .map_err(|_| Error::Format("file is shorter than the magic number".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic number".into()));
    }
    let mut line = Vec::new();
    input.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("unterminated header".into()));
    }
    let header: Header = serde_json::from_slice(&line)
        .map_err(|e| Error::Format(format!("header: {e}")))?;
    let grid = Grid::new(header.d, header.n)?;
    let mut raw = vec![0u8; 8 * grid.len()];
    input
        .read_exact(&mut raw)
        .map_err(|_| Error::Format("truncated sample data".into()))?;
    let mut extra = [0u8; 1];
    if input.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((Field::from_samples(grid, values, header.support), header))
}
