//! Uncompressed raster series files.
//!
//! `GRD1` layout (little-endian): magic `GRD1`, rows u32, cols u32, tau u32,
//! value width u8 (always 32), endianness u8 (0 = little), then `tau` frames
//! of `rows * cols` i32 values, each frame row-major.

use std::path::Path;

use super::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::raster::Raster;

pub const GRID_MAGIC: &[u8; 4] = b"GRD1";
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 1 + 1;

pub fn encode_grid(series: &[Raster]) -> Result<Vec<u8>> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot write an empty series".into()))?;
    let dim = |v: usize, what: &str| u32::try_from(v).map_err(|_| Error::DimensionOverflow(format!("{what} = {v}")));
    let mut w = ByteWriter::new();
    w.put_bytes(GRID_MAGIC);
    w.put_u32(dim(first.rows(), "rows")?);
    w.put_u32(dim(first.cols(), "cols")?);
    w.put_u32(dim(series.len(), "tau")?);
    w.put_u8(32);
    w.put_u8(0);
    for m in series {
        first.check_same_shape(m)?;
        for &v in m.values() {
            w.put_i32(v);
        }
    }
    Ok(w.into_bytes())
}

pub fn decode_grid(bytes: &[u8]) -> Result<Vec<Raster>> {
    let mut r = ByteReader::new(bytes);
    r.expect_magic(GRID_MAGIC)?;
    if r.remaining() < HEADER_LEN - 4 {
        return Err(Error::Truncated {
            needed: HEADER_LEN - 4 - r.remaining(),
        });
    }
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let tau = r.u32()? as usize;
    let width = r.u8()?;
    let endian = r.u8()?;
    if width != 32 || endian != 0 {
        return Err(Error::Format(format!(
            "unsupported value width {width} / endianness {endian}"
        )));
    }
    if rows == 0 || cols == 0 || tau == 0 {
        return Err(Error::Format(format!("empty grid {rows}x{cols}x{tau}")));
    }
    let cells = rows
        .checked_mul(cols)
        .filter(|c| c.checked_mul(tau).and_then(|n| n.checked_mul(4)).is_some())
        .ok_or_else(|| Error::DimensionOverflow(format!("{rows}x{cols}x{tau}")))?;
    let needed = cells * tau * 4;
    if r.remaining() < needed {
        return Err(Error::Truncated {
            needed: needed - r.remaining(),
        });
    }
    let mut series = Vec::with_capacity(tau);
    for _ in 0..tau {
        let raw = r.take(cells * 4)?;
        let values = raw
            .chunks_exact(4)
            .map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        series.push(Raster::new(rows, cols, values)?);
    }
    r.finish()?;
    Ok(series)
}

pub fn write_grid(path: impl AsRef<Path>, series: &[Raster]) -> Result<()> {
    std::fs::write(path, encode_grid(series)?)?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<Vec<Raster>> {
    decode_grid(&std::fs::read(path)?)
}

/// Parses one frame: one line per row, comma-separated integers.
pub fn parse_csv_frame(text: &str) -> Result<Raster> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<i32>()
                    .map_err(|e| Error::Format(format!("line {}: bad value {:?}: {e}", lineno + 1, f.trim())))
            })
            .collect::<Result<Vec<i32>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("CSV frame has no rows".into()));
    }
    Raster::from_rows(&rows)
}

pub fn read_csv_frame(path: impl AsRef<Path>) -> Result<Raster> {
    parse_csv_frame(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tiny_roundtrip() {
        let s = vec![Raster::filled(1, 1, -9).unwrap()];
        let bytes = encode_grid(&s).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 4);
        assert_eq!(decode_grid(&bytes).unwrap(), s);
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(decode_grid(b""), Err(Error::BadMagic { .. })));
        assert!(matches!(decode_grid(b"NOPE...."), Err(Error::BadMagic { .. })));

        let s = vec![Raster::filled(2, 3, 1).unwrap(); 2];
        let bytes = encode_grid(&s).unwrap();
        assert!(matches!(
            decode_grid(&bytes[..bytes.len() - 1]),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(decode_grid(&bytes[..10]), Err(Error::Truncated { .. })));

        let mut huge = ByteWriter::new();
        huge.put_bytes(GRID_MAGIC);
        huge.put_u32(u32::MAX);
        huge.put_u32(u32::MAX);
        huge.put_u32(u32::MAX);
        huge.put_u8(32);
        huge.put_u8(0);
        assert!(matches!(
            decode_grid(&huge.into_bytes()),
            Err(Error::DimensionOverflow(_))
        ));

        assert!(encode_grid(&[]).is_err());
        let mixed = vec![Raster::filled(2, 2, 0).unwrap(), Raster::filled(2, 3, 0).unwrap()];
        assert!(matches!(encode_grid(&mixed), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn csv_frames() {
        let m = parse_csv_frame("1, 2,3\n4,5,-6\n\n").unwrap();
        assert_eq!(m, Raster::from_rows(&[vec![1, 2, 3], vec![4, 5, -6]]).unwrap());
        assert!(parse_csv_frame("1,2\n3").is_err());
        assert!(parse_csv_frame("1,x").is_err());
        assert!(parse_csv_frame("").is_err());
    }

    proptest! {
        #[test]
        fn grid_roundtrip(rows in 1usize..6, cols in 1usize..6, tau in 1usize..4, seed in any::<u64>()) {
            let mut x = seed;
            let series: Vec<Raster> = (0..tau).map(|_| Raster::from_fn(rows, cols, |_, _| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (x >> 32) as i32
            }).unwrap()).collect();
            let bytes = encode_grid(&series).unwrap();
            prop_assert_eq!(decode_grid(&bytes).unwrap(), series);
        }
    }
}
