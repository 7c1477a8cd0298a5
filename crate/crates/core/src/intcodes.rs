//! Zigzag mapping for signed gaps and Directly Addressable Codes.
//!
//! A [`DacSequence`] splits every value into fixed-width chunks. Level 0
//! holds the lowest chunk of every value; level `l + 1` holds the next chunk
//! of only those values that did not fit in `l + 1` chunks. A continuation
//! bitvector per level marks which values carry on, and `rank1` on it maps a
//! value's position at one level to its position at the next.

use crate::bitvector::{BitBuilder, RankBitVector};
use crate::dataio::codec::{ByteReader, ByteWriter};
use crate::error::{check_index, Error, Result};

/// Chunk width used by every structure in this crate.
pub const DEFAULT_CHUNK_WIDTH: u8 = 8;

/// Maps `x >= 0` to `2x` and `x < 0` to `2|x| - 1`.
#[inline]
pub fn zigzag_encode(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

#[inline]
pub fn zigzag_decode(u: u64) -> i64 {
    ((u >> 1) as i64) ^ -((u & 1) as i64)
}

/// Fixed-width unsigned integers packed LSB-first into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PackedInts {
    words: Vec<u64>,
    width: u32,
    len: usize,
}

impl PackedInts {
    fn new(width: u32, len: usize) -> Self {
        let bits = len * width as usize;
        Self {
            words: vec![0; bits.div_ceil(64)],
            width,
            len,
        }
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    fn set(&mut self, i: usize, v: u64) {
        let v = v & self.mask();
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        self.words[w] |= v << off;
        if off + self.width as usize > 64 {
            self.words[w + 1] |= v >> (64 - off);
        }
    }

    #[inline]
    fn get(&self, i: usize) -> u64 {
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let mut v = self.words[w] >> off;
        if off + self.width as usize > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        v & self.mask()
    }

    fn payload_bytes(&self) -> usize {
        (self.len * self.width as usize).div_ceil(8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct DacLevel {
    chunks: PackedInts,
    more: RankBitVector,
}

/// Variable-length non-negative integer sequence with direct access.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DacSequence {
    levels: Vec<DacLevel>,
    len: usize,
}

impl DacSequence {
    pub fn build(values: &[u64], chunk_width: u8) -> Result<Self> {
        if chunk_width == 0 || chunk_width > 64 {
            return Err(Error::InvalidArgument(format!(
                "chunk width must be in 1..=64, got {chunk_width}"
            )));
        }
        let width = u32::from(chunk_width);
        let mut levels = Vec::new();
        // Values still being split, already shifted down by the consumed chunks.
        let mut current: Vec<u64> = values.to_vec();
        while !current.is_empty() {
            let mut chunks = PackedInts::new(width, current.len());
            let mut more = BitBuilder::new();
            let mut next = Vec::new();
            for (i, &v) in current.iter().enumerate() {
                chunks.set(i, v);
                let rest = v.checked_shr(width).unwrap_or(0);
                more.push(rest != 0);
                if rest != 0 {
                    next.push(rest);
                }
            }
            levels.push(DacLevel {
                chunks,
                more: more.finish(),
            });
            current = next;
        }
        Ok(Self {
            levels,
            len: values.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn access(&self, i: usize) -> Result<u64> {
        check_index(i, self.len)?;
        Ok(self.get(i))
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> u64 {
        let mut pos = i;
        let mut value = 0u64;
        let mut shift = 0u32;
        for level in &self.levels {
            value |= level.chunks.get(pos) << shift;
            if !level.more.bit(pos) {
                break;
            }
            pos = level.more.rank1_unchecked(pos);
            shift += level.chunks.width;
        }
        value
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bits of chunk payload plus continuation bits over all levels.
    pub fn payload_bits(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.chunks.len * l.chunks.width as usize + l.more.len())
            .sum()
    }

    pub(crate) fn encoded_len(&self) -> usize {
        1 + self
            .levels
            .iter()
            .map(|l| 1 + 8 + l.chunks.payload_bytes() + l.more.encoded_len())
            .sum::<usize>()
    }

    /// Level count, then per level: chunk width, value count, packed
    /// chunks, continuation bitvector.
    pub(crate) fn write_to(&self, w: &mut ByteWriter) {
        w.put_u8(self.levels.len() as u8);
        for level in &self.levels {
            w.put_u8(level.chunks.width as u8);
            w.put_u64(level.chunks.len as u64);
            let nbytes = level.chunks.payload_bytes();
            for i in 0..nbytes {
                w.put_u8((level.chunks.words[i / 8] >> ((i % 8) * 8)) as u8);
            }
            level.more.write_to(w);
        }
    }

    pub(crate) fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let nlevels = r.u8()? as usize;
        let mut levels = Vec::with_capacity(nlevels);
        let mut expected = None;
        for _ in 0..nlevels {
            let width = u32::from(r.u8()?);
            if width == 0 || width > 64 {
                return Err(Error::Format(format!("bad DAC chunk width {width}")));
            }
            let len = r.len_u64()?;
            if let Some(e) = expected {
                if len != e {
                    return Err(Error::Format("DAC level length mismatch".into()));
                }
            }
            if len == 0 {
                return Err(Error::Format("empty DAC level".into()));
            }
            let bits = len
                .checked_mul(width as usize)
                .ok_or_else(|| Error::DimensionOverflow("DAC level".into()))?;
            let bytes = r.take(bits.div_ceil(8))?;
            let mut chunks = PackedInts::new(width, len);
            for (i, &b) in bytes.iter().enumerate() {
                chunks.words[i / 8] |= u64::from(b) << ((i % 8) * 8);
            }
            let more = RankBitVector::read_from(r)?;
            if more.len() != len {
                return Err(Error::Format("DAC continuation length mismatch".into()));
            }
            expected = Some(more.count_ones());
            levels.push(DacLevel { chunks, more });
        }
        if expected.unwrap_or(0) != 0 {
            return Err(Error::Format("DAC last level has continuation bits".into()));
        }
        let len = levels.first().map_or(0, |l| l.chunks.len);
        Ok(Self { levels, len })
    }
}
