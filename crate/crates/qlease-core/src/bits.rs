//! Fixed-length bit strings used for circuit inputs, locks, and payloads.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

/// A bit string of fixed length. Index 0 is the leftmost (most significant)
/// bit in the written form, so `Bits::from_str_radix2("1010")` has bit 0 set
/// to 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bits(Vec<u8>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits(vec![0; len])
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Bits(bits)
    }

    /// Lowest `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut bits = vec![0u8; len];
        for (i, b) in bits.iter_mut().enumerate() {
            *b = ((value >> (len - 1 - i)) & 1) as u8;
        }
        Bits(bits)
    }

    pub fn to_u64(&self) -> u64 {
        debug_assert!(self.len() <= 64);
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn random(len: usize, rng: &mut impl RngCore) -> Self {
        let mut bits = vec![0u8; len];
        for b in bits.iter_mut() {
            *b = (rng.next_u32() & 1) as u8;
        }
        Bits(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u8) {
        self.0[i] = v & 1;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, u8> {
        self.0.iter()
    }

    /// Zero-extend (on the right) to `len`; truncating is an error in debug.
    pub fn padded_to(&self, len: usize) -> Self {
        debug_assert!(len >= self.len());
        let mut bits = self.0.clone();
        bits.resize(len, 0);
        Bits(bits)
    }

    /// First `len` bits.
    pub fn truncated_to(&self, len: usize) -> Self {
        Bits(self.0[..len].to_vec())
    }

    pub fn concat(&self, other: &Bits) -> Self {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Bits(bits)
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        Bits(self.0[start..end].to_vec())
    }

    /// Pack into bytes, first bit in the high position of the first byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            out[i / 8] |= b << (7 - (i % 8));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        debug_assert!(len <= bytes.len() * 8);
        let mut bits = vec![0u8; len];
        for (i, b) in bits.iter_mut().enumerate() {
            *b = (bytes[i / 8] >> (7 - (i % 8))) & 1;
        }
        Bits(bits)
    }

    pub fn to_binary_string(&self) -> String {
        self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    /// All 2^len bit strings in counting order; caller keeps `len` small.
    pub fn enumerate_all(len: usize) -> impl Iterator<Item = Bits> {
        debug_assert!(len <= 24);
        (0u64..(1u64 << len)).map(move |v| Bits::from_u64(v, len))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({})", self.to_binary_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u64_round_trip_preserves_msb_first_order() {
        let b = Bits::from_u64(0b1010, 4);
        assert_eq!(b.as_slice(), &[1, 0, 1, 0]);
        assert_eq!(b.to_u64(), 0b1010);
    }

    #[test]
    fn byte_packing_round_trips() {
        let b = Bits::from_u64(0b11_0100_1101, 10);
        assert_eq!(Bits::from_bytes(&b.to_bytes(), 10), b);
    }

    #[test]
    fn padding_and_truncation() {
        let b = Bits::from_u64(0b101, 3);
        let p = b.padded_to(6);
        assert_eq!(p.as_slice(), &[1, 0, 1, 0, 0, 0]);
        assert_eq!(p.truncated_to(3), b);
    }
}
