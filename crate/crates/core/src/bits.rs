//! Fixed-width bit vectors used for row contents and host-side data.
//!
//! Bits are addressed by column index. The byte serialization is row-major
//! and LSB-first within each byte: column 0 maps to bit 0 of byte 0.

use std::fmt;

use rand::Rng;

const WORD_BITS: usize = 64;

/// A fixed-length vector of bits (one DRAM row, or host data of any width).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    /// All-zero row of `len` bits.
    pub fn zeros(len: usize) -> Self {
        BitRow {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// All-one row of `len` bits.
    pub fn ones(len: usize) -> Self {
        let mut row = BitRow::zeros(len);
        for w in &mut row.words {
            *w = u64::MAX;
        }
        row.mask_tail();
        row
    }

    /// Row filled with a single bit value.
    pub fn filled(len: usize, bit: bool) -> Self {
        if bit {
            BitRow::ones(len)
        } else {
            BitRow::zeros(len)
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut row = BitRow::zeros(len);
        for col in 0..len {
            row.set(col, f(col));
        }
        row
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        BitRow::from_fn(bits.len(), |i| bits[i])
    }

    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut row = BitRow {
            len,
            words: (0..len.div_ceil(WORD_BITS)).map(|_| rng.gen()).collect(),
        };
        row.mask_tail();
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, col: usize) -> bool {
        assert!(col < self.len, "column {col} out of range (len {})", self.len);
        self.words[col / WORD_BITS] >> (col % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, col: usize, bit: bool) {
        assert!(col < self.len, "column {col} out of range (len {})", self.len);
        let mask = 1u64 << (col % WORD_BITS);
        if bit {
            self.words[col / WORD_BITS] |= mask;
        } else {
            self.words[col / WORD_BITS] &= !mask;
        }
    }

    /// Column-wise complement.
    pub fn complement(&self) -> Self {
        let mut out = BitRow {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.mask_tail();
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Packs into bytes, LSB-first within each byte; the tail byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = (self.words[i / 8] >> (i % 8 * 8)) as u8;
        }
        out
    }

    /// Inverse of [`BitRow::to_bytes`]. `len` selects how many bits are meaningful.
    pub fn from_bytes(len: usize, bytes: &[u8]) -> Self {
        assert!(
            bytes.len() >= len.div_ceil(8),
            "need {} bytes for {len} bits, got {}",
            len.div_ceil(8),
            bytes.len()
        );
        let mut row = BitRow::zeros(len);
        for (i, &b) in bytes.iter().enumerate().take(len.div_ceil(8)) {
            row.words[i / 8] |= (b as u64) << (i % 8 * 8);
        }
        row.mask_tail();
        row
    }

    /// Concatenates rows into one long vector.
    pub fn concat(rows: &[BitRow]) -> Self {
        let len = rows.iter().map(|r| r.len).sum();
        let mut out = BitRow::zeros(len);
        let mut at = 0;
        for r in rows {
            for col in 0..r.len {
                out.set(at + col, r.get(col));
            }
            at += r.len;
        }
        out
    }

    /// Splits into `count` chunks of `chunk_len` bits (total must match).
    pub fn split(&self, chunk_len: usize) -> Vec<BitRow> {
        assert!(chunk_len > 0 && self.len.is_multiple_of(chunk_len));
        (0..self.len / chunk_len)
            .map(|i| BitRow::from_fn(chunk_len, |c| self.get(i * chunk_len + c)))
            .collect()
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow[{}; ", self.len)?;
        for i in 0..self.len.min(64) {
            write!(f, "{}", self.get(i) as u8)?;
        }
        if self.len > 64 {
            write!(f, "…")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn byte_packing_is_lsb_first() {
        // 0xA5 = 0b1010_0101, so columns 0,2,5,7 are set.
        let row = BitRow::from_bytes(8, &[0xA5]);
        let set: Vec<usize> = (0..8).filter(|&c| row.get(c)).collect();
        assert_eq!(set, vec![0, 2, 5, 7]);
        assert_eq!(row.to_bytes(), vec![0xA5]);
    }

    #[test]
    fn complement_respects_length() {
        let row = BitRow::zeros(10);
        let inv = row.complement();
        assert_eq!(inv.count_ones(), 10);
        assert_eq!(inv.to_bytes(), vec![0xFF, 0x03]);
    }

    #[test]
    fn concat_and_split_round_trip() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let rows: Vec<BitRow> = (0..5).map(|_| BitRow::random(256, &mut rng)).collect();
        let joined = BitRow::concat(&rows);
        assert_eq!(joined.split(256), rows);
    }

    proptest! {
        #[test]
        fn bytes_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..600)) {
            let row = BitRow::from_bits(&bits);
            let back = BitRow::from_bytes(row.len(), &row.to_bytes());
            prop_assert_eq!(row, back);
        }

        #[test]
        fn double_complement_is_identity(bits in proptest::collection::vec(any::<bool>(), 1..300)) {
            let row = BitRow::from_bits(&bits);
            prop_assert_eq!(row.complement().complement(), row);
        }
    }
}
