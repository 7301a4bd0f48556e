//! Flat binary and CSV export of realizations.
//!
//! Binary layout (all little-endian): `d: u64`, `N: u64`, `h: f64`, `seed: u64`,
//! then `(2N+1)^d` values as `f64` in row-major order.

use std::io::{Read, Write};

use super::{FieldRealization, GeneratorTag, Grid};
use crate::error::{Error, Result};

const CSV_NODE_LIMIT: usize = 1_000_000;

pub fn write_binary<W: Write>(field: &FieldRealization, mut out: W) -> Result<()> {
    let g = field.grid();
    out.write_all(&(g.dim() as u64).to_le_bytes())?;
    out.write_all(&(g.half_extent() as u64).to_le_bytes())?;
    out.write_all(&g.step().to_le_bytes())?;
    out.write_all(&field.seed().to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a realization written by [`write_binary`]. The generator is not part of
/// the format; `generator` is attached as given.
pub fn read_binary<R: Read>(mut input: R, generator: GeneratorTag) -> Result<FieldRealization> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let d = u64::from_le_bytes(next(&mut input)?) as usize;
    let n = u64::from_le_bytes(next(&mut input)?) as usize;
    let h = f64::from_le_bytes(next(&mut input)?);
    let seed = u64::from_le_bytes(next(&mut input)?);
    let grid = Grid::new(d, h, n)?;
    let mut values = Vec::with_capacity(grid.node_count());
    for _ in 0..grid.node_count() {
        values.push(f64::from_le_bytes(next(&mut input)?));
    }
    FieldRealization::new(grid, values, seed, generator)
}

/// Writes `s1[,s2],value` rows with a header.
pub fn write_csv<W: Write>(field: &FieldRealization, mut out: W) -> Result<()> {
    let g = field.grid();
    if g.node_count() > CSV_NODE_LIMIT {
        return Err(Error::Input(format!(
            "grid of {} nodes is too large for CSV export",
            g.node_count()
        )));
    }
    if g.dim() == 1 {
        writeln!(out, "s1,value")?;
    } else {
        writeln!(out, "s1,s2,value")?;
    }
    for (p, v) in field.values().iter().enumerate() {
        let s = g.point(p);
        let coords: Vec<String> = s.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{},{v:.16e}", coords.join(","))?;
    }
    Ok(())
}
