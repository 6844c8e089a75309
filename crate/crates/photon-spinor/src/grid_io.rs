//! Flat binary and CSV layouts for grid fields.
//!
//! Binary layout, all little-endian:
//! ```text
//! magic   b"PSGF"      4 bytes
//! version u32          = 1
//! dims    3 × u64
//! spacing 3 × f64
//! origin  3 × f64
//! time    f64
//! rep     u8           0 = chiral, 1 = standard
//! bound   u8           0 = unspecified, 1 = periodic, 2 = one-sided
//! payload nodes × 6 × (re f64, im f64), node order (i, j, k) with k fastest
//! ```

use std::io::{Read, Write};

use crate::algebra::{Representation, Spinor, C64};
use crate::error::{Error, Result};
use crate::field::{Boundary, Grid, SpinorGridField};
use crate::report::fmt_f64;

const MAGIC: &[u8; 4] = b"PSGF";
const VERSION: u32 = 1;

pub fn write_binary(field: &SpinorGridField, mut w: impl Write) -> Result<()> {
    let g = &field.grid;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for d in g.dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for x in g.spacing.iter().chain(g.origin.iter()).chain(std::iter::once(&field.time)) {
        w.write_all(&x.to_le_bytes())?;
    }
    w.write_all(&[field.rep.tag(), g.boundary.tag()])?;
    let mut buf = Vec::with_capacity(field.values.len() * 96);
    for v in &field.values {
        for z in v.iter() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<SpinorGridField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidGrid("not a spinor grid file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::InvalidGrid(format!("unsupported grid file version {version}")));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let v = u64::from_le_bytes(read_array(&mut r)?);
        *d = usize::try_from(v).map_err(|_| Error::InvalidGrid(format!("dimension {v} too large")))?;
    }
    let mut f = [0.0f64; 7];
    for x in f.iter_mut() {
        *x = f64::from_le_bytes(read_array(&mut r)?);
    }
    let [rep_tag, b_tag] = read_array::<2>(&mut r)?;
    let rep = Representation::from_tag(rep_tag).ok_or_else(|| Error::InvalidGrid(format!("unknown representation tag {rep_tag}")))?;
    let boundary = Boundary::from_tag(b_tag).ok_or_else(|| Error::InvalidGrid(format!("unknown boundary tag {b_tag}")))?;
    let grid = Grid::new([f[3], f[4], f[5]], [f[0], f[1], f[2]], dims, boundary)?;
    let n = grid.len();
    let mut payload = vec![0u8; n.checked_mul(96).ok_or_else(|| Error::InvalidGrid("grid too large".into()))?];
    r.read_exact(&mut payload)?;
    let mut values = Vec::with_capacity(n);
    for node in payload.chunks_exact(96) {
        values.push(Spinor::from_fn(|c, _| {
            let o = c * 16;
            let re = f64::from_le_bytes(node[o..o + 8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(node[o + 8..o + 16].try_into().expect("8 bytes"));
            C64::new(re, im)
        }));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::InvalidGrid("trailing bytes after payload".into()));
    }
    Ok(SpinorGridField { grid, rep, time: f[6], values })
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

/// One row per node: `i,j,k,x,y,z,re0,im0,…,re5,im5`, preceded by a comment line
/// carrying the grid header.
pub fn write_csv(field: &SpinorGridField, mut w: impl Write) -> Result<()> {
    let g = &field.grid;
    writeln!(
        w,
        "# dims={} {} {} spacing={} {} {} origin={} {} {} time={} rep={} boundary={}",
        g.dims[0],
        g.dims[1],
        g.dims[2],
        fmt_f64(g.spacing[0]),
        fmt_f64(g.spacing[1]),
        fmt_f64(g.spacing[2]),
        fmt_f64(g.origin[0]),
        fmt_f64(g.origin[1]),
        fmt_f64(g.origin[2]),
        fmt_f64(field.time),
        field.rep.tag(),
        g.boundary.tag()
    )?;
    let mut header = String::from("i,j,k,x,y,z");
    for c in 0..6 {
        header.push_str(&format!(",re{c},im{c}"));
    }
    writeln!(w, "{header}")?;
    for (idx, v) in field.values.iter().enumerate() {
        let n = g.unindex(idx);
        let x = g.coords(idx);
        let mut line = format!("{},{},{},{},{},{}", n[0], n[1], n[2], fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(x[2]));
        for z in v.iter() {
            line.push(',');
            line.push_str(&fmt_f64(z.re));
            line.push(',');
            line.push_str(&fmt_f64(z.im));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_csv(src: &str) -> Result<SpinorGridField> {
    let mut lines = src.lines();
    let head = lines.next().ok_or_else(|| Error::InvalidGrid("empty CSV".into()))?;
    let nums: Vec<&str> = head
        .trim_start_matches('#')
        .split_whitespace()
        .flat_map(|tok| tok.split('=').next_back())
        .collect();
    let field = |i: usize| -> Result<&str> {
        nums.get(i).copied().ok_or_else(|| Error::InvalidGrid("truncated CSV header".into()))
    };
    let pf = |i: usize| -> Result<f64> { field(i)?.parse().map_err(|_| Error::InvalidGrid(format!("bad header value '{}'", nums[i]))) };
    let pu = |i: usize| -> Result<usize> { field(i)?.parse().map_err(|_| Error::InvalidGrid(format!("bad header value '{}'", nums[i]))) };
    // dims (3), spacing (3), origin (3), time, rep, boundary → tokens laid out as in write_csv
    let dims = [pu(0)?, pu(1)?, pu(2)?];
    let spacing = [pf(3)?, pf(4)?, pf(5)?];
    let origin = [pf(6)?, pf(7)?, pf(8)?];
    let time = pf(9)?;
    let rep = Representation::from_tag(pu(10)? as u8).ok_or_else(|| Error::InvalidGrid("bad rep tag".into()))?;
    let boundary = Boundary::from_tag(pu(11)? as u8).ok_or_else(|| Error::InvalidGrid("bad boundary tag".into()))?;
    let grid = Grid::new(origin, spacing, dims, boundary)?;
    lines.next();
    let mut values = vec![Spinor::zeros(); grid.len()];
    let mut seen = 0usize;
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 18 {
            return Err(Error::InvalidGrid(format!("row {} has {} columns, expected 18", ln + 3, cols.len())));
        }
        let ix: Vec<usize> = cols[..3]
            .iter()
            .map(|c| c.trim().parse().map_err(|_| Error::InvalidGrid(format!("bad index in row {}", ln + 3))))
            .collect::<Result<_>>()?;
        if ix[0] >= dims[0] || ix[1] >= dims[1] || ix[2] >= dims[2] {
            return Err(Error::InvalidGrid(format!("index out of range in row {}", ln + 3)));
        }
        let vals: Vec<f64> = cols[6..]
            .iter()
            .map(|c| c.trim().parse().map_err(|_| Error::InvalidGrid(format!("bad number in row {}", ln + 3))))
            .collect::<Result<_>>()?;
        values[grid.index(ix[0], ix[1], ix[2])] = Spinor::from_fn(|c, _| C64::new(vals[2 * c], vals[2 * c + 1]));
        seen += 1;
    }
    if seen != grid.len() {
        return Err(Error::GridMismatch(format!("CSV has {seen} rows for {} nodes", grid.len())));
    }
    Ok(SpinorGridField { grid, rep, time, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{synthesize_field, ModeCoefficients};

    fn sample() -> SpinorGridField {
        let g = Grid::periodic_box([6.0, 6.0, 3.0], [5, 6, 5]).unwrap();
        let k = [2.0 * std::f64::consts::PI / 6.0, 0.0, 2.0 * std::f64::consts::PI / 3.0];
        synthesize_field(&ModeCoefficients::single(k, 2, C64::new(0.4, 0.1)), Representation::Chiral, g, 0.25).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 24 + 56 + 2 + f.values.len() * 96);
        assert_eq!(read_binary(&buf[..]).unwrap(), f);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        assert_eq!(read_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), f);
    }

    #[test]
    fn corrupt_input_rejected() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_binary(&bad[..]).is_err());
        buf.push(0);
        assert!(read_binary(&buf[..]).is_err());
    }
}
