//! Plain bit vector with a rank directory and select support.
//!
//! `rank_b(i)` counts the bits equal to `b` in positions `[0, i)`, so
//! `rank_b(0) == 0`. Positions are 0-based. `select1(j)` takes a 1-based
//! ordinal and returns the position of the `j`-th set bit.

use crate::dataio::codec::{ByteReader, ByteWriter};
use crate::error::{check_index, Error, Result};

const WORD_BITS: usize = 64;
/// Words per superblock; one absolute count is stored per superblock.
const SUPER_WORDS: usize = 8;

/// Append-only bit buffer used while building a [`RankBitVector`].
#[derive(Debug, Default, Clone)]
pub struct BitBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD_BITS) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % WORD_BITS);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> RankBitVector {
        RankBitVector::from_words(self.words, self.len)
    }
}

/// Immutable bit sequence answering access, rank and select.
#[derive(Clone, PartialEq, Eq)]
pub struct RankBitVector {
    words: Vec<u64>,
    len: usize,
    /// `supers[s]` = number of ones in words `[0, s * SUPER_WORDS)`.
    supers: Vec<u64>,
    ones: usize,
}

impl std::fmt::Debug for RankBitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RankBitVector")
            .field("len", &self.len)
            .field("ones", &self.ones)
            .finish()
    }
}

impl Default for RankBitVector {
    fn default() -> Self {
        Self::from_words(Vec::new(), 0)
    }
}

impl FromIterator<bool> for RankBitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut b = BitBuilder::new();
        for bit in iter {
            b.push(bit);
        }
        b.finish()
    }
}

impl RankBitVector {
    /// Builds from a sequence of bits.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        bits.into_iter().collect()
    }

    fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.truncate(len.div_ceil(WORD_BITS));
        if !len.is_multiple_of(WORD_BITS) {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % WORD_BITS)) - 1;
        }
        let mut supers = Vec::with_capacity(words.len() / SUPER_WORDS + 1);
        let mut acc = 0u64;
        for (i, w) in words.iter().enumerate() {
            if i % SUPER_WORDS == 0 {
                supers.push(acc);
            }
            acc += u64::from(w.count_ones());
        }
        supers.push(acc);
        Self {
            words,
            len,
            supers,
            ones: acc as usize,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    pub fn access(&self, i: usize) -> Result<bool> {
        check_index(i, self.len)?;
        Ok(self.bit(i))
    }

    pub fn rank1(&self, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len + 1,
            });
        }
        Ok(self.rank1_unchecked(i))
    }

    pub fn rank0(&self, i: usize) -> Result<usize> {
        self.rank1(i).map(|r| i - r)
    }

    pub fn select1(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.ones {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.ones + 1,
            });
        }
        Ok(self.select1_unchecked(j))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub(crate) fn rank1_unchecked(&self, i: usize) -> usize {
        debug_assert!(i <= self.len);
        let word = i / WORD_BITS;
        let sup = word / SUPER_WORDS;
        let mut r = self.supers[sup] as usize;
        for w in &self.words[sup * SUPER_WORDS..word] {
            r += w.count_ones() as usize;
        }
        let rem = i % WORD_BITS;
        if rem != 0 {
            r += (self.words[word] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        r
    }

    #[inline]
    pub(crate) fn rank0_unchecked(&self, i: usize) -> usize {
        i - self.rank1_unchecked(i)
    }

    fn select1_unchecked(&self, j: usize) -> usize {
        // Last superblock whose preceding count is < j.
        let target = j as u64;
        let sup = self.supers.partition_point(|&c| c < target) - 1;
        let mut remaining = (target - self.supers[sup]) as u32;
        let mut word = sup * SUPER_WORDS;
        loop {
            let c = self.words[word].count_ones();
            if c >= remaining {
                break;
            }
            remaining -= c;
            word += 1;
        }
        let mut w = self.words[word];
        for _ in 1..remaining {
            w &= w - 1;
        }
        word * WORD_BITS + w.trailing_zeros() as usize
    }

    pub(crate) fn encoded_len(&self) -> usize {
        8 + self.len.div_ceil(8)
    }

    /// Length as u64, then the bits packed LSB-first into whole bytes.
    pub(crate) fn write_to(&self, w: &mut ByteWriter) {
        w.put_u64(self.len as u64);
        let nbytes = self.len.div_ceil(8);
        for i in 0..nbytes {
            w.put_u8((self.words[i / 8] >> ((i % 8) * 8)) as u8);
        }
    }

    pub(crate) fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let len = r.len_u64()?;
        let nbytes = len.div_ceil(8);
        let bytes = r.take(nbytes)?;
        let mut words = vec![0u64; len.div_ceil(WORD_BITS)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= u64::from(b) << ((i % 8) * 8);
        }
        if len % 8 != 0 && bytes[nbytes - 1] >> (len % 8) != 0 {
            return Err(Error::Format("nonzero padding bits in bitvector".into()));
        }
        Ok(Self::from_words(words, len))
    }
}
