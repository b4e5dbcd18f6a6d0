//! Fixed-length bitstrings with canonical byte packing.
//!
//! Keys, inputs, outputs, and derivation strings are all bitstrings whose
//! lengths need not be byte multiples (a challenge bit, a 2k+1-bit seed).
//! `Bits` packs them MSB-first into bytes and keeps the unused tail bits of
//! the last byte zero, so equal bitstrings have equal packed forms.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    len: usize,
    bytes: Vec<u8>,
}

fn packed_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

impl Bits {
    pub fn new() -> Self {
        Bits::default()
    }

    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            bytes: vec![0u8; packed_len(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits {
            len,
            bytes: vec![0xFFu8; packed_len(len)],
        };
        b.mask_tail();
        b
    }

    /// Whole bytes, length is `8 * bytes.len()`.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Bits {
            len: bytes.len() * 8,
            bytes: bytes.to_vec(),
        }
    }

    /// Reconstruct from packed form; rejects nonzero padding bits so the
    /// packed representation stays canonical.
    pub fn from_packed(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if bytes.len() != packed_len(len) {
            return Err(Error::LengthMismatch(format!(
                "packed form of {len} bits needs {} bytes, got {}",
                packed_len(len),
                bytes.len()
            )));
        }
        let rem = len % 8;
        if rem != 0 {
            let mask = 0xFFu8 >> rem;
            if bytes[bytes.len() - 1] & mask != 0 {
                return Err(Error::LengthMismatch(
                    "nonzero padding bits in packed bitstring".into(),
                ));
            }
        }
        Ok(Bits { len, bytes })
    }

    pub fn from_bools(bools: &[bool]) -> Self {
        let mut b = Bits::new();
        for &v in bools {
            b.push(v);
        }
        b
    }

    /// Parse a literal like "10110011".
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut b = Bits::new();
        for c in s.chars() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                _ => return Err(Error::LengthMismatch(format!("bad bit char {c:?}"))),
            }
        }
        Ok(b)
    }

    /// The `width` low bits of `value`, most significant first.
    pub fn from_u64_be(value: u64, width: usize) -> Self {
        assert!(width <= 64);
        let mut b = Bits::new();
        for i in (0..width).rev() {
            b.push((value >> i) & 1 == 1);
        }
        b
    }

    pub fn random(rng: &mut RngStream, len: usize) -> Self {
        let mut bytes = vec![0u8; packed_len(len)];
        rng.fill_bytes(&mut bytes);
        let mut b = Bits { len, bytes };
        b.mask_tail();
        b
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

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 1 << (7 - self.len % 8);
        }
        self.len += 1;
    }

    pub fn extend_bits(&mut self, other: &Bits) {
        if self.len % 8 == 0 {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
        } else {
            for i in 0..other.len {
                self.push(other.get(i));
            }
        }
    }

    pub fn concat(parts: &[&Bits]) -> Self {
        let mut out = Bits::new();
        for p in parts {
            out.extend_bits(p);
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        assert!(start + len <= self.len, "slice out of range");
        if start % 8 == 0 {
            let mut bytes = self.bytes[start / 8..start / 8 + packed_len(len)].to_vec();
            let mut b = Bits { len, bytes: std::mem::take(&mut bytes) };
            b.mask_tail();
            return b;
        }
        let mut b = Bits::new();
        for i in 0..len {
            b.push(self.get(start + i));
        }
        b
    }

    pub fn xor(&self, other: &Bits) -> Result<Bits> {
        if self.len != other.len {
            return Err(Error::LengthMismatch(format!(
                "xor of {} and {} bits",
                self.len, other.len
            )));
        }
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Bits { len: self.len, bytes })
    }

    pub fn to_u64_be(&self) -> u64 {
        assert!(self.len <= 64);
        let mut v = 0u64;
        for i in 0..self.len {
            v = (v << 1) | self.get(i) as u64;
        }
        v
    }

    pub fn packed(&self) -> &[u8] {
        &self.bytes
    }

    pub fn hex(&self) -> String {
        let mut s = String::with_capacity(self.bytes.len() * 2);
        for b in &self.bytes {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            let last = self.bytes.len() - 1;
            self.bytes[last] &= 0xFFu8 << (8 - rem);
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "Bits({})", self.bit_string())
        } else {
            write!(f, "Bits({} bits, {}..)", self.len, self.slice(0, 32).bit_string())
        }
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bits {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.bytes.cmp(&other.bytes))
    }
}

/// Length-prefixed tuple encoding: each field is a 32-bit big-endian bit
/// count followed by the field's bits. Parsing is unambiguous and the
/// encoding is injective on field sequences.
pub fn encode_fields(fields: &[&Bits]) -> Bits {
    let mut out = Bits::new();
    for f in fields {
        out.extend_bits(&Bits::from_u64_be(f.len() as u64, 32));
        out.extend_bits(f);
    }
    out
}

/// Inverse of [`encode_fields`]; requires exactly `count` fields consuming
/// the whole string.
pub fn decode_fields(bits: &Bits, count: usize) -> Result<Vec<Bits>> {
    let mut fields = Vec::with_capacity(count);
    let mut pos = 0usize;
    for _ in 0..count {
        if pos + 32 > bits.len() {
            return Err(Error::LengthMismatch("truncated field length prefix".into()));
        }
        let n = bits.slice(pos, 32).to_u64_be() as usize;
        pos += 32;
        if pos + n > bits.len() {
            return Err(Error::LengthMismatch("field payload overruns string".into()));
        }
        fields.push(bits.slice(pos, n));
        pos += n;
    }
    if pos != bits.len() {
        return Err(Error::LengthMismatch("trailing bits after last field".into()));
    }
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_get_roundtrip() {
        let b = Bits::from_bit_string("10110011").unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(b.packed(), &[0xB3]);
        assert_eq!(b.bit_string(), "10110011");
    }

    #[test]
    fn odd_length_padding_is_zero() {
        let b = Bits::from_bit_string("101").unwrap();
        assert_eq!(b.packed(), &[0b1010_0000]);
        assert!(Bits::from_packed(vec![0b1010_0000], 3).is_ok());
        assert!(Bits::from_packed(vec![0b1010_1000], 3).is_err());
    }

    #[test]
    fn u64_conversion() {
        let b = Bits::from_u64_be(35, 8);
        assert_eq!(b.bit_string(), "00100011");
        assert_eq!(b.to_u64_be(), 35);
        assert_eq!(Bits::from_u64_be(1, 1).to_u64_be(), 1);
    }

    #[test]
    fn slice_and_concat() {
        let b = Bits::from_bit_string("110100101").unwrap();
        let l = b.slice(0, 4);
        let r = b.slice(4, 5);
        assert_eq!(l.bit_string(), "1101");
        assert_eq!(r.bit_string(), "00101");
        assert_eq!(Bits::concat(&[&l, &r]), b);
    }

    #[test]
    fn xor_masks() {
        let a = Bits::from_bit_string("1100").unwrap();
        let b = Bits::from_bit_string("1010").unwrap();
        assert_eq!(a.xor(&b).unwrap().bit_string(), "0110");
        assert!(a.xor(&Bits::from_bit_string("11").unwrap()).is_err());
    }

    #[test]
    fn field_tuple_roundtrip() {
        let q = Bits::from_bit_string("1011").unwrap();
        let qp = Bits::from_bit_string("0").unwrap();
        let a = Bits::new();
        let enc = encode_fields(&[&q, &qp, &a]);
        let dec = decode_fields(&enc, 3).unwrap();
        assert_eq!(dec, vec![q, qp, a]);
        assert!(decode_fields(&enc, 2).is_err());
    }

    #[test]
    fn ordering_is_length_then_lex() {
        let a = Bits::from_bit_string("01").unwrap();
        let b = Bits::from_bit_string("10").unwrap();
        assert!(a < b);
        let c = Bits::from_bit_string("111").unwrap();
        assert!(b < c);
    }
}
