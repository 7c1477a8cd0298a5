//! Container files for compressed structures.
//!
//! All integers are little-endian.
//!
//! `K2R1` (single raster):
//!
//! | bytes | field |
//! |-------|-------|
//! | 4 | magic `K2R1` |
//! | 2 | version (1) |
//! | .. | k2-raster block |
//!
//! `TK2R` (temporal):
//!
//! | bytes | field |
//! |-------|-------|
//! | 4 | magic `TK2R` |
//! | 2 | version (1) |
//! | 4 | k |
//! | 4 | t_delta (0 = adaptive snapshot placement) |
//! | 4 | tau |
//! | 4 | rows |
//! | 4 | cols |
//! | 17 x tau | directory: kind u8 (0 snapshot, 1 delta), offset u64, length u64 |
//! | .. | frame blocks, in frame order |
//!
//! Offsets are relative to the first byte after the directory, and blocks
//! are contiguous. A delta frame refers to the nearest preceding snapshot.
//!
//! k2-raster block: k u32, side u64, rows u32, cols u32, root_min i32,
//! root_max i32, then `T`, `Lmax`, `Lmin`.
//!
//! Delta block: k u32, side u64, rows u32, cols u32, root kind u8
//! (0 internal, 1 shift, 2 uniform), root max gap u64 (zigzag), root min gap
//! u64 (zigzag), then `T`, `eqB`, `Lmax`, `Lmin`.
//!
//! Bitvector: bit length u64, then `ceil(len / 8)` bytes, bit `i` in byte
//! `i / 8` at bit `i % 8`; padding bits are zero.
//!
//! DAC sequence: level count u8, then per level: chunk width u8, value
//! count u64, chunks packed LSB-first into `ceil(count * width / 8)` bytes,
//! continuation bitvector.

use std::path::Path;

use super::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::k2raster::K2Raster;
use crate::tk2raster::{Frame, K2RasterDelta, TK2Raster};

pub const K2R_MAGIC: &[u8; 4] = b"K2R1";
pub const TK2_MAGIC: &[u8; 4] = b"TK2R";
pub const FORMAT_VERSION: u16 = 1;

pub(crate) const K2R_PREAMBLE_LEN: usize = 4 + 2;
const TK2_FIXED_HEADER_LEN: usize = 4 + 2 + 5 * 4;
const DIR_ENTRY_LEN: usize = 1 + 8 + 8;

const KIND_SNAPSHOT: u8 = 0;
const KIND_DELTA: u8 = 1;

pub(crate) fn tk2_header_len(tau: usize) -> usize {
    TK2_FIXED_HEADER_LEN + tau * DIR_ENTRY_LEN
}

/// Either kind of container, as detected from the magic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Container {
    Single(K2Raster),
    Temporal(TK2Raster),
}

pub fn serialize_k2raster(s: &K2Raster) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.put_bytes(K2R_MAGIC);
    w.put_u16(FORMAT_VERSION);
    s.write_to(&mut w);
    w.into_bytes()
}

pub fn deserialize_k2raster(bytes: &[u8]) -> Result<K2Raster> {
    let mut r = ByteReader::new(bytes);
    r.expect_magic(K2R_MAGIC)?;
    check_version(r.u16()?)?;
    let s = K2Raster::read_from(&mut r)?;
    r.finish()?;
    Ok(s)
}

pub fn serialize(s: &TK2Raster) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.put_bytes(TK2_MAGIC);
    w.put_u16(FORMAT_VERSION);
    w.put_u32(s.k() as u32);
    w.put_u32(s.t_delta() as u32);
    w.put_u32(s.tau() as u32);
    w.put_u32(s.rows() as u32);
    w.put_u32(s.cols() as u32);
    let mut offset = 0u64;
    for f in s.frames() {
        let len = f.encoded_len() as u64;
        w.put_u8(if f.is_snapshot() { KIND_SNAPSHOT } else { KIND_DELTA });
        w.put_u64(offset);
        w.put_u64(len);
        offset += len;
    }
    for f in s.frames() {
        let before = w.len();
        match f {
            Frame::Snapshot(snap) => snap.write_to(&mut w),
            Frame::Delta { tree, .. } => tree.write_to(&mut w),
        }
        debug_assert_eq!(w.len() - before, f.encoded_len());
    }
    w.into_bytes()
}

pub fn deserialize(bytes: &[u8]) -> Result<TK2Raster> {
    let mut r = ByteReader::new(bytes);
    r.expect_magic(TK2_MAGIC)?;
    check_version(r.u16()?)?;
    let k = r.u32()? as usize;
    let t_delta = r.u32()? as usize;
    let tau = r.u32()? as usize;
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    if tau == 0 {
        return Err(Error::Format("container holds no frames".into()));
    }

    let mut dir = Vec::with_capacity(tau.min(r.remaining() / DIR_ENTRY_LEN + 1));
    let mut expected_offset = 0usize;
    for i in 0..tau {
        let kind = r.u8()?;
        let offset = r.len_u64()?;
        let len = r.len_u64()?;
        if kind != KIND_SNAPSHOT && kind != KIND_DELTA {
            return Err(Error::CorruptBlockTable(format!("frame {i}: unknown kind {kind}")));
        }
        let snapshot = kind == KIND_SNAPSHOT;
        if i == 0 && !snapshot {
            return Err(Error::CorruptBlockTable("frame 0 must be a snapshot".into()));
        }
        if t_delta > 0 && snapshot != (i % t_delta == 0) {
            return Err(Error::CorruptBlockTable(format!(
                "frame {i}: kind does not match t_delta {t_delta}"
            )));
        }
        if offset != expected_offset {
            return Err(Error::CorruptBlockTable(format!(
                "frame {i}: offset {offset}, expected {expected_offset}"
            )));
        }
        expected_offset = offset
            .checked_add(len)
            .ok_or_else(|| Error::CorruptBlockTable(format!("frame {i}: length overflow")))?;
        dir.push((snapshot, len));
    }
    if r.remaining() < expected_offset {
        return Err(Error::Truncated {
            needed: expected_offset - r.remaining(),
        });
    }
    if r.remaining() > expected_offset {
        return Err(Error::CorruptBlockTable(format!(
            "{} bytes not covered by the frame directory",
            r.remaining() - expected_offset
        )));
    }

    let mut frames = Vec::with_capacity(tau);
    let mut reference = 0;
    for (i, &(snapshot, len)) in dir.iter().enumerate() {
        let mut block = ByteReader::new(r.take(len)?);
        let frame = if snapshot {
            reference = i;
            Frame::Snapshot(K2Raster::read_from(&mut block)?)
        } else {
            Frame::Delta {
                reference,
                tree: K2RasterDelta::read_from(&mut block)?,
            }
        };
        block
            .finish()
            .map_err(|_| Error::CorruptBlockTable(format!("frame {i}: block length mismatch")))?;
        let (fk, fr, fc) = match &frame {
            Frame::Snapshot(s) => (s.k(), s.rows(), s.cols()),
            Frame::Delta { tree, .. } => (tree.k(), tree.rows(), tree.cols()),
        };
        if (fk, fr, fc) != (k, rows, cols) {
            return Err(Error::Format(format!(
                "frame {i} is {fr}x{fc} with k={fk}, header says {rows}x{cols} with k={k}"
            )));
        }
        frames.push(frame);
    }
    Ok(TK2Raster::from_parts(k, t_delta, rows, cols, frames))
}

/// Detects the container kind from the magic and decodes it.
pub fn deserialize_any(bytes: &[u8]) -> Result<Container> {
    match bytes.get(..4) {
        Some(m) if m == K2R_MAGIC => deserialize_k2raster(bytes).map(Container::Single),
        _ => deserialize(bytes).map(Container::Temporal),
    }
}

fn check_version(v: u16) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(v));
    }
    Ok(())
}

pub fn write_container(path: impl AsRef<Path>, s: &TK2Raster) -> Result<()> {
    std::fs::write(path, serialize(s))?;
    Ok(())
}

pub fn read_container(path: impl AsRef<Path>) -> Result<TK2Raster> {
    deserialize(&std::fs::read(path)?)
}
