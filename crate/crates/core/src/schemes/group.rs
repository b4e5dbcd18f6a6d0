//! Generic-group bilinear pairing over a prime order w.
//!
//! Both source and target group elements are represented by their discrete
//! logarithms relative to fixed generators (gamma for G1, h = e(gamma,
//! gamma) for G2). The group law is exponent addition mod w and the pairing
//! multiplies exponents, which makes bilinearity and non-degeneracy exact.
//! The engine knows the exponents; everything outside this module handles
//! elements only through their tagged byte encodings.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const TAG_G1: u8 = 0x11;
pub const TAG_G2: u8 = 0x12;

/// Encoded group element width: tag byte plus 8-byte big-endian exponent.
pub const ELT_BITS: usize = 72;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct G1Elt(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct G2Elt(pub u64);

fn mul_mod(a: u64, b: u64, w: u64) -> u64 {
    ((a as u128 * b as u128) % w as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, w: u64) -> u64 {
    let mut acc = 1u64 % w;
    base %= w;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, w);
        }
        base = mul_mod(base, base, w);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[derive(Clone, Debug)]
pub struct GenericGroupCtx {
    w: u64,
    msg_len: usize,
}

impl GenericGroupCtx {
    pub fn new(w: u64) -> Result<Self> {
        if w < 3 || !is_prime_u64(w) {
            return Err(Error::Config(format!("group order {w} is not an odd prime")));
        }
        let msg_len = 63 - w.leading_zeros() as usize;
        Ok(GenericGroupCtx { w, msg_len })
    }

    pub fn order(&self) -> u64 {
        self.w
    }

    /// Message/mask length l = floor(log2 w).
    pub fn msg_len(&self) -> usize {
        self.msg_len
    }

    pub fn g1(&self, exp: u64) -> G1Elt {
        G1Elt(exp % self.w)
    }

    pub fn g2(&self, exp: u64) -> G2Elt {
        G2Elt(exp % self.w)
    }

    /// The fixed G1 generator.
    pub fn g1_generator(&self) -> G1Elt {
        G1Elt(1)
    }

    pub fn g1_mul(&self, a: G1Elt, b: G1Elt) -> G1Elt {
        G1Elt((a.0 + b.0) % self.w)
    }

    pub fn g1_pow(&self, a: G1Elt, s: u64) -> G1Elt {
        G1Elt(mul_mod(a.0, s % self.w, self.w))
    }

    pub fn g2_mul(&self, a: G2Elt, b: G2Elt) -> G2Elt {
        G2Elt((a.0 + b.0) % self.w)
    }

    pub fn g2_pow(&self, a: G2Elt, s: u64) -> G2Elt {
        G2Elt(mul_mod(a.0, s % self.w, self.w))
    }

    /// The bilinear map: e(gamma^a, gamma^b) = h^(ab mod w).
    pub fn pairing(&self, a: G1Elt, b: G1Elt) -> G2Elt {
        G2Elt(mul_mod(a.0, b.0, self.w))
    }

    pub fn random_g1(&self, rng: &mut RngStream) -> G1Elt {
        G1Elt(rng.below(self.w))
    }

    /// Uniform over G1 minus the identity.
    pub fn random_g1_nonidentity(&self, rng: &mut RngStream) -> G1Elt {
        G1Elt(1 + rng.below(self.w - 1))
    }

    pub fn encode_g1(&self, a: G1Elt) -> Bits {
        let mut bytes = vec![TAG_G1];
        bytes.extend_from_slice(&a.0.to_be_bytes());
        Bits::from_bytes(&bytes)
    }

    pub fn encode_g2(&self, a: G2Elt) -> Bits {
        let mut bytes = vec![TAG_G2];
        bytes.extend_from_slice(&a.0.to_be_bytes());
        Bits::from_bytes(&bytes)
    }

    pub fn decode_g1(&self, bits: &Bits) -> Result<G1Elt> {
        let exp = self.decode_tagged(bits, TAG_G1)?;
        Ok(G1Elt(exp))
    }

    pub fn decode_g2(&self, bits: &Bits) -> Result<G2Elt> {
        let exp = self.decode_tagged(bits, TAG_G2)?;
        Ok(G2Elt(exp))
    }

    fn decode_tagged(&self, bits: &Bits, tag: u8) -> Result<u64> {
        if bits.len() != ELT_BITS {
            return Err(Error::InvalidElement(format!(
                "expected {ELT_BITS}-bit element, got {} bits",
                bits.len()
            )));
        }
        let bytes = bits.packed();
        if bytes[0] != tag {
            return Err(Error::InvalidElement(format!(
                "wrong group tag 0x{:02x}",
                bytes[0]
            )));
        }
        let exp = u64::from_be_bytes(bytes[1..9].try_into().unwrap());
        if exp >= self.w {
            return Err(Error::InvalidElement(format!(
                "exponent {exp} not reduced mod {}",
                self.w
            )));
        }
        Ok(exp)
    }

    /// Total decoding used inside family evaluators, which must accept any
    /// string of the right length: the tag is ignored and the exponent is
    /// reduced mod w.
    pub fn decode_g1_lenient(&self, bits: &Bits) -> G1Elt {
        debug_assert_eq!(bits.len(), ELT_BITS);
        let bytes = bits.packed();
        G1Elt(u64::from_be_bytes(bytes[1..9].try_into().unwrap()) % self.w)
    }
}
