//! Bitstrings of arbitrary length with XOR, slicing, and concatenation.
//!
//! Bits are stored most-significant-first within each byte, so the hex
//! rendering of a byte-aligned string reads left to right. Unused padding
//! bits in the final byte are always zero.

use std::fmt;
use std::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    /// All-zero string of `len` bits.
    pub fn zeros(len: usize) -> Self {
        Bits {
            bytes: vec![0; len.div_ceil(8)],
            len,
        }
    }

    /// Uniformly random string of `len` bits.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut b = Bits { bytes, len };
        b.mask_padding();
        b
    }

    /// Builds from exactly `len.div_ceil(8)` bytes. Padding bits in the
    /// last byte are cleared.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::InvalidParameter(format!(
                "{} bytes cannot hold exactly {} bits",
                bytes.len(),
                len
            )));
        }
        let mut b = Bits {
            bytes: bytes.to_vec(),
            len,
        };
        b.mask_padding();
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    fn set_bit(&mut self, i: usize, value: bool) {
        let mask = 0x80 >> (i % 8);
        if value {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    fn mask_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xFFu8 << (8 - rem);
            }
        }
    }

    /// Bitwise XOR of two equal-length strings.
    pub fn xor(&self, other: &Bits) -> Result<Bits> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Bits {
            bytes,
            len: self.len,
        })
    }

    /// XOR `other` into `self` in place.
    pub fn xor_assign(&mut self, other: &Bits) -> Result<()> {
        *self = self.xor(other)?;
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = Bits::zeros(self.len + other.len);
        if self.len % 8 == 0 {
            out.bytes[..self.bytes.len()].copy_from_slice(&self.bytes);
            for i in 0..other.len {
                out.set_bit(self.len + i, other.bit(i));
            }
        } else {
            for i in 0..self.len {
                out.set_bit(i, self.bit(i));
            }
            for i in 0..other.len {
                out.set_bit(self.len + i, other.bit(i));
            }
        }
        out
    }

    /// Copy of the bit range `range`.
    pub fn slice(&self, range: Range<usize>) -> Bits {
        assert!(range.start <= range.end && range.end <= self.len);
        let len = range.end - range.start;
        let mut out = Bits::zeros(len);
        if range.start % 8 == 0 {
            let first = range.start / 8;
            let nbytes = len.div_ceil(8);
            out.bytes.copy_from_slice(&self.bytes[first..first + nbytes]);
            out.mask_padding();
        } else {
            for i in 0..len {
                out.set_bit(i, self.bit(range.start + i));
            }
        }
        out
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[{}; {}]", self.len, self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zeros_and_random_respect_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for len in [0, 1, 4, 7, 8, 9, 13, 64, 448] {
            let z = Bits::zeros(len);
            assert_eq!(z.len(), len);
            assert!(z.is_zero());
            let r = Bits::random(len, &mut rng);
            assert_eq!(r.len(), len);
            assert_eq!(r.as_bytes().len(), len.div_ceil(8));
        }
    }

    #[test]
    fn padding_bits_stay_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let b = Bits::random(13, &mut rng);
            assert_eq!(b.as_bytes()[1] & 0b0000_0111, 0);
        }
        let b = Bits::from_bytes(&[0xFF], 4).unwrap();
        assert_eq!(b.as_bytes(), &[0xF0]);
    }

    #[test]
    fn xor_rejects_mismatched_lengths() {
        let a = Bits::zeros(8);
        let b = Bits::zeros(9);
        assert!(matches!(a.xor(&b), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn concat_and_slice_round_trip() {
        let a = Bits::from_bytes(&[0x3C], 8).unwrap();
        let b = Bits::from_bytes(&[0xA5], 8).unwrap();
        let joined = a.concat(&b);
        assert_eq!(joined.to_hex(), "3ca5");
        assert_eq!(joined.slice(0..8), a);
        assert_eq!(joined.slice(8..16), b);

        let odd = Bits::from_bytes(&[0b1010_0000], 3).unwrap();
        let j2 = odd.concat(&b);
        assert_eq!(j2.len(), 11);
        assert_eq!(j2.slice(0..3), odd);
        assert_eq!(j2.slice(3..11), b);
    }

    proptest! {
        #[test]
        fn xor_is_involutive(seed in any::<u64>(), len in 0usize..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Bits::random(len, &mut rng);
            let b = Bits::random(len, &mut rng);
            let c = a.xor(&b).unwrap();
            prop_assert_eq!(c.xor(&b).unwrap(), a.clone());
            prop_assert_eq!(a.xor(&a).unwrap().is_zero(), true);
        }

        #[test]
        fn concat_slice_identity(seed in any::<u64>(), l1 in 0usize..100, l2 in 0usize..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Bits::random(l1, &mut rng);
            let b = Bits::random(l2, &mut rng);
            let j = a.concat(&b);
            prop_assert_eq!(j.len(), l1 + l2);
            prop_assert_eq!(j.slice(0..l1), a);
            prop_assert_eq!(j.slice(l1..l1 + l2), b);
        }
    }
}
