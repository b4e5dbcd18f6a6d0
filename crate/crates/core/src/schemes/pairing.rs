//! Pairing-based symmetric encryption and its public-key twin.
//!
//! Key generation picks a generator g and a secret x in G1; encryption of an
//! l-bit message m under randomness alpha is (H(e(x^alpha, g)) xor m,
//! g^alpha) and decryption recomputes the mask from c2 and x. The companion
//! family F carries y = e(x, g) in G2 instead of x and masks with H(y^alpha);
//! for matching keys F and E compute identical ciphertexts, which is what
//! makes F a faithful stand-in for E with the secret replaced by public
//! material.

use crate::bits::{decode_fields, encode_fields, Bits};
use crate::error::{Error, Result};
use crate::family::{EvalCtx, Family};
use crate::rng::RngStream;
use crate::schemes::group::{G1Elt, G2Elt, GenericGroupCtx, ELT_BITS};
use sha2::{Digest, Sha256};

pub const FAMILY_E: &str = "pairing-e";
pub const FAMILY_F: &str = "pairing-f";
pub const FAMILY_D: &str = "pairing-d";
pub const FAMILY_C: &str = "pairing-c";

const PAIRING_ID: &[u8] = b"ggm-pairing-v1";
const G1_ID: &[u8] = b"G1";
const G2_ID: &[u8] = b"G2";
const HASH_ID: &[u8] = b"sha256-trunc";

/// H: G2 -> {0,1}^l, a domain-separated digest of the canonical encoding.
pub fn hash_mask(ctx: &GenericGroupCtx, elt: G2Elt) -> Bits {
    let mut h = Sha256::new();
    h.update(b"wbc-arena/H/v1");
    h.update(ctx.order().to_be_bytes());
    h.update(ctx.encode_g2(elt).packed());
    let digest = h.finalize();
    Bits::from_bytes(&digest[..8]).slice(0, ctx.msg_len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncKey {
    pub w: u64,
    pub g: G1Elt,
    pub x: G1Elt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObfKey {
    pub w: u64,
    pub g: G1Elt,
    pub y: G2Elt,
}

fn common_fields(w: u64, ctx: &GenericGroupCtx, g: G1Elt) -> [Bits; 6] {
    [
        Bits::from_bytes(PAIRING_ID),
        Bits::from_bytes(G1_ID),
        Bits::from_bytes(G2_ID),
        Bits::from_u64_be(w, 64),
        ctx.encode_g1(g),
        Bits::from_bytes(HASH_ID),
    ]
}

fn decode_common(fields: &[Bits]) -> Result<(u64, GenericGroupCtx, G1Elt)> {
    if fields[0] != Bits::from_bytes(PAIRING_ID)
        || fields[1] != Bits::from_bytes(G1_ID)
        || fields[2] != Bits::from_bytes(G2_ID)
        || fields[5] != Bits::from_bytes(HASH_ID)
    {
        return Err(Error::KeyRejected);
    }
    if fields[3].len() != 64 {
        return Err(Error::KeyRejected);
    }
    let w = fields[3].to_u64_be();
    let ctx = GenericGroupCtx::new(w).map_err(|_| Error::KeyRejected)?;
    let g = ctx.decode_g1(&fields[4]).map_err(|_| Error::KeyRejected)?;
    if g.0 == 0 {
        return Err(Error::KeyRejected);
    }
    Ok((w, ctx, g))
}

impl EncKey {
    pub fn encode(&self) -> Bits {
        let ctx = GenericGroupCtx::new(self.w).expect("key holds a valid order");
        let c = common_fields(self.w, &ctx, self.g);
        let x = ctx.encode_g1(self.x);
        encode_fields(&[&c[0], &c[1], &c[2], &c[3], &c[4], &c[5], &x])
    }

    pub fn decode(bits: &Bits) -> Result<EncKey> {
        let fields = decode_fields(bits, 7).map_err(|_| Error::KeyRejected)?;
        let (w, ctx, g) = decode_common(&fields)?;
        let x = ctx.decode_g1(&fields[6]).map_err(|_| Error::KeyRejected)?;
        if x.0 == 0 {
            return Err(Error::KeyRejected);
        }
        Ok(EncKey { w, g, x })
    }
}

impl ObfKey {
    pub fn encode(&self) -> Bits {
        let ctx = GenericGroupCtx::new(self.w).expect("key holds a valid order");
        let c = common_fields(self.w, &ctx, self.g);
        let y = ctx.encode_g2(self.y);
        encode_fields(&[&c[0], &c[1], &c[2], &c[3], &c[4], &c[5], &y])
    }

    pub fn decode(bits: &Bits) -> Result<ObfKey> {
        let fields = decode_fields(bits, 7).map_err(|_| Error::KeyRejected)?;
        let (w, ctx, g) = decode_common(&fields)?;
        let y = ctx.decode_g2(&fields[6]).map_err(|_| Error::KeyRejected)?;
        Ok(ObfKey { w, g, y })
    }
}

/// Key generation: g uniform over G1 minus identity, x likewise (the
/// identity is excluded from both so neither exponent is degenerate).
pub fn keygen(ctx: &GenericGroupCtx, rng: &mut RngStream) -> EncKey {
    EncKey {
        w: ctx.order(),
        g: ctx.random_g1_nonidentity(rng),
        x: ctx.random_g1_nonidentity(rng),
    }
}

/// Key generation from an explicit random tape, for experiment key
/// derivation: same gamma, same key.
pub fn keygen_from_gamma(ctx: &GenericGroupCtx, gamma: &Bits) -> EncKey {
    let mut data = ctx.order().to_be_bytes().to_vec();
    data.extend_from_slice(&(gamma.len() as u64).to_be_bytes());
    data.extend_from_slice(gamma.packed());
    let mut stream = RngStream::from_digest("pairing-keygen", &data);
    keygen(ctx, &mut stream)
}

/// Challenge-oracle randomness: a beta tape is stretched to one exponent.
pub fn alpha_from_beta(ctx: &GenericGroupCtx, beta: &Bits) -> u64 {
    let mut data = ctx.order().to_be_bytes().to_vec();
    data.extend_from_slice(&(beta.len() as u64).to_be_bytes());
    data.extend_from_slice(beta.packed());
    let mut stream = RngStream::from_digest("pairing-beta", &data);
    stream.below(ctx.order())
}

/// E(key, m, alpha) = (H(e(x^alpha, g)) xor m, g^alpha).
pub fn e_encrypt(key: &EncKey, m: &Bits, alpha: u64) -> Result<(Bits, Bits)> {
    let ctx = GenericGroupCtx::new(key.w).map_err(|_| Error::KeyRejected)?;
    if m.len() != ctx.msg_len() {
        return Err(Error::LengthMismatch(format!(
            "message must be {} bits, got {}",
            ctx.msg_len(),
            m.len()
        )));
    }
    if alpha >= key.w {
        return Err(Error::InvalidElement(format!("alpha {alpha} not below {}", key.w)));
    }
    let mask = hash_mask(&ctx, ctx.pairing(ctx.g1_pow(key.x, alpha), key.g));
    let c1 = mask.xor(m)?;
    let c2 = ctx.encode_g1(ctx.g1_pow(key.g, alpha));
    Ok((c1, c2))
}

/// D(key, c1, c2) = H(e(c2, x)) xor c1.
pub fn d_decrypt(key: &EncKey, c1: &Bits, c2: &Bits) -> Result<Bits> {
    let ctx = GenericGroupCtx::new(key.w).map_err(|_| Error::KeyRejected)?;
    if c1.len() != ctx.msg_len() {
        return Err(Error::LengthMismatch(format!(
            "c1 must be {} bits, got {}",
            ctx.msg_len(),
            c1.len()
        )));
    }
    let c2 = ctx.decode_g1(c2)?;
    let mask = hash_mask(&ctx, ctx.pairing(c2, key.x));
    mask.xor(c1)
}

/// F(key', m, alpha) = (H(y^alpha) xor m, g^alpha).
pub fn f_encrypt(key: &ObfKey, m: &Bits, alpha: u64) -> Result<(Bits, Bits)> {
    let ctx = GenericGroupCtx::new(key.w).map_err(|_| Error::KeyRejected)?;
    if m.len() != ctx.msg_len() {
        return Err(Error::LengthMismatch(format!(
            "message must be {} bits, got {}",
            ctx.msg_len(),
            m.len()
        )));
    }
    if alpha >= key.w {
        return Err(Error::InvalidElement(format!("alpha {alpha} not below {}", key.w)));
    }
    let mask = hash_mask(&ctx, ctx.g2_pow(key.y, alpha));
    let c1 = mask.xor(m)?;
    let c2 = ctx.encode_g1(ctx.g1_pow(key.g, alpha));
    Ok((c1, c2))
}

/// The obfuscating key map: x in G1 is replaced by y = e(x, g) in G2.
pub fn obfuscate_key(key: &EncKey) -> Result<ObfKey> {
    let ctx = GenericGroupCtx::new(key.w).map_err(|_| Error::KeyRejected)?;
    Ok(ObfKey {
        w: key.w,
        g: key.g,
        y: ctx.pairing(key.x, key.g),
    })
}

// ---------------------------------------------------------------------------
// Obfuscators
// ---------------------------------------------------------------------------

pub const OBF_PAIRING: &str = "pairing";
pub const OBF_PAIRING_BROKEN: &str = "pairing-broken";

/// The obfuscator for the encryption family: parse the key, move the secret
/// into the target group as y = e(x, g), and emit the twin family's member.
/// x itself does not appear in the output key.
pub fn pairing_obfuscator() -> crate::obfuscation::Obfuscator {
    crate::obfuscation::Obfuscator::new(
        OBF_PAIRING,
        crate::poly::Poly::linear(64, 1),
        crate::poly::Poly::linear(8, 1),
        std::sync::Arc::new(|_family, key, _ctx, _rng| {
            let enc = EncKey::decode(key)?;
            let okey = obfuscate_key(&enc)?;
            Ok(crate::program::ProgramValue::Native {
                family_id: FAMILY_F.to_string(),
                key: okey.encode(),
            })
        }),
    )
}

/// Broken fixture: emits the twin member with y off by one group element,
/// so the mask disagrees on essentially every input.
pub fn pairing_broken_obfuscator() -> crate::obfuscation::Obfuscator {
    crate::obfuscation::Obfuscator::new(
        OBF_PAIRING_BROKEN,
        crate::poly::Poly::linear(64, 1),
        crate::poly::Poly::linear(8, 1),
        std::sync::Arc::new(|_family, key, _ctx, _rng| {
            let enc = EncKey::decode(key)?;
            let ctx = GenericGroupCtx::new(enc.w).map_err(|_| Error::KeyRejected)?;
            let mut okey = obfuscate_key(&enc)?;
            okey.y = ctx.g2_mul(okey.y, ctx.g2(1));
            Ok(crate::program::ProgramValue::Native {
                family_id: FAMILY_F.to_string(),
                key: okey.encode(),
            })
        }),
    )
}

// ---------------------------------------------------------------------------
// Family wrappers
// ---------------------------------------------------------------------------

/// Shared layout for the encryptors: input is m || alpha (l + 64 bits),
/// output is c1 || c2 (l + 72 bits). Alpha is read as a 64-bit integer and
/// reduced mod w so the evaluator is total on its input space.
fn split_enc_input(ctx: &GenericGroupCtx, input: &Bits) -> (Bits, u64) {
    let l = ctx.msg_len();
    let m = input.slice(0, l);
    let alpha = input.slice(l, 64).to_u64_be() % ctx.order();
    (m, alpha)
}

pub struct EFamily {
    ctx: GenericGroupCtx,
    key_bits: usize,
}

impl EFamily {
    pub fn new(ctx: GenericGroupCtx) -> Self {
        let probe = EncKey {
            w: ctx.order(),
            g: G1Elt(1),
            x: G1Elt(1),
        };
        let key_bits = probe.encode().len();
        EFamily { ctx, key_bits }
    }

    pub fn group(&self) -> &GenericGroupCtx {
        &self.ctx
    }
}

impl Family for EFamily {
    fn family_id(&self) -> &str {
        FAMILY_E
    }

    fn natural_k(&self) -> Option<usize> {
        Some(self.key_bits)
    }

    fn min_k(&self) -> usize {
        self.key_bits
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        matches!(EncKey::decode(key), Ok(k) if k.w == self.ctx.order())
    }

    fn input_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len() + 64
    }

    fn output_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len() + ELT_BITS
    }

    fn step_bound(&self, _key_len: usize) -> u64 {
        8
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        let k = EncKey::decode(key).expect("validated key");
        let (m, alpha) = split_enc_input(&self.ctx, input);
        let (c1, c2) = e_encrypt(&k, &m, alpha).expect("total on valid inputs");
        (Bits::concat(&[&c1, &c2]), 8)
    }

    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        if k != self.key_bits {
            return Err(Error::Unsamplable { k });
        }
        Ok(keygen(&self.ctx, rng).encode())
    }
}

pub struct FFamily {
    ctx: GenericGroupCtx,
    key_bits: usize,
}

impl FFamily {
    pub fn new(ctx: GenericGroupCtx) -> Self {
        let probe = ObfKey {
            w: ctx.order(),
            g: G1Elt(1),
            y: G2Elt(1),
        };
        let key_bits = probe.encode().len();
        FFamily { ctx, key_bits }
    }
}

impl Family for FFamily {
    fn family_id(&self) -> &str {
        FAMILY_F
    }

    fn natural_k(&self) -> Option<usize> {
        Some(self.key_bits)
    }

    fn min_k(&self) -> usize {
        self.key_bits
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        matches!(ObfKey::decode(key), Ok(k) if k.w == self.ctx.order())
    }

    fn input_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len() + 64
    }

    fn output_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len() + ELT_BITS
    }

    fn step_bound(&self, _key_len: usize) -> u64 {
        8
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        let k = ObfKey::decode(key).expect("validated key");
        let (m, alpha) = split_enc_input(&self.ctx, input);
        let (c1, c2) = f_encrypt(&k, &m, alpha).expect("total on valid inputs");
        (Bits::concat(&[&c1, &c2]), 8)
    }

    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        if k != self.key_bits {
            return Err(Error::Unsamplable { k });
        }
        let enc = keygen(&self.ctx, rng);
        Ok(obfuscate_key(&enc).expect("valid key").encode())
    }
}

/// Decryption as a family: input c1 || c2, output the recovered message.
/// c2 is decoded leniently (exponent mod w, tag ignored) so the evaluator
/// stays total; the typed [`d_decrypt`] API is the strict variant.
pub struct DFamily {
    ctx: GenericGroupCtx,
    key_bits: usize,
}

impl DFamily {
    pub fn new(ctx: GenericGroupCtx) -> Self {
        let key_bits = EFamily::new(ctx.clone()).key_bits;
        DFamily { ctx, key_bits }
    }
}

impl Family for DFamily {
    fn family_id(&self) -> &str {
        FAMILY_D
    }

    fn natural_k(&self) -> Option<usize> {
        Some(self.key_bits)
    }

    fn min_k(&self) -> usize {
        self.key_bits
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        matches!(EncKey::decode(key), Ok(k) if k.w == self.ctx.order())
    }

    fn input_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len() + ELT_BITS
    }

    fn output_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len()
    }

    fn step_bound(&self, _key_len: usize) -> u64 {
        8
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        let k = EncKey::decode(key).expect("validated key");
        let l = self.ctx.msg_len();
        let c1 = input.slice(0, l);
        let c2 = self.ctx.decode_g1_lenient(&input.slice(l, ELT_BITS));
        let mask = hash_mask(&self.ctx, self.ctx.pairing(c2, k.x));
        (mask.xor(&c1).expect("lengths match"), 8)
    }

    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        if k != self.key_bits {
            return Err(Error::Unsamplable { k });
        }
        Ok(keygen(&self.ctx, rng).encode())
    }
}

/// Challenge oracle: key <b, key, beta>, input <m0, m1>, output
/// E(key, beta, m_b). Stateless; repeat queries get the same answer.
pub struct CFamily {
    ctx: GenericGroupCtx,
}

impl CFamily {
    pub fn new(ctx: GenericGroupCtx) -> Self {
        CFamily { ctx }
    }

    fn parse_key(&self, key: &Bits) -> Result<(bool, EncKey, Bits)> {
        let fields = decode_fields(key, 3).map_err(|_| Error::KeyRejected)?;
        if fields[0].len() != 1 || fields[2].is_empty() {
            return Err(Error::KeyRejected);
        }
        let enc = EncKey::decode(&fields[1])?;
        if enc.w != self.ctx.order() {
            return Err(Error::KeyRejected);
        }
        Ok((fields[0].get(0), enc, fields[2].clone()))
    }

    pub fn make_key(b: bool, enc: &EncKey, beta: &Bits) -> Bits {
        let b_bits = Bits::from_u64_be(b as u64, 1);
        encode_fields(&[&b_bits, &enc.encode(), beta])
    }
}

impl Family for CFamily {
    fn family_id(&self) -> &str {
        FAMILY_C
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        self.parse_key(key).is_ok()
    }

    fn input_len(&self, _key_len: usize) -> usize {
        2 * self.ctx.msg_len()
    }

    fn output_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len() + ELT_BITS
    }

    fn step_bound(&self, _key_len: usize) -> u64 {
        12
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        let (b, enc, beta) = self.parse_key(key).expect("validated key");
        let l = self.ctx.msg_len();
        let m = if b {
            input.slice(l, l)
        } else {
            input.slice(0, l)
        };
        let alpha = alpha_from_beta(&self.ctx, &beta);
        let (c1, c2) = e_encrypt(&enc, &m, alpha).expect("total on valid inputs");
        (Bits::concat(&[&c1, &c2]), 12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_ctx() -> GenericGroupCtx {
        GenericGroupCtx::new(101).unwrap()
    }

    #[test]
    fn hand_computed_ciphertext() {
        // w = 101, g = gamma, x = g^5, alpha = 7, m = 0
        let ctx = small_ctx();
        let key = EncKey {
            w: 101,
            g: ctx.g1(1),
            x: ctx.g1(5),
        };
        let m = Bits::zeros(ctx.msg_len());
        let (c1, c2) = e_encrypt(&key, &m, 7).unwrap();
        // e(x^7, g) has exponent 5*7 = 35; the mask is H of that element.
        let expected_mask = hash_mask(&ctx, ctx.g2(35));
        assert_eq!(c1, expected_mask);
        assert_eq!(c2, ctx.encode_g1(ctx.g1(7)));
    }

    #[test]
    fn xor_structure_of_c1() {
        let ctx = small_ctx();
        let mut rng = RngStream::new(3, 0);
        let key = keygen(&ctx, &mut rng);
        let m = rng.bits(ctx.msg_len());
        let zero = Bits::zeros(ctx.msg_len());
        let (c1_m, _) = e_encrypt(&key, &m, 42).unwrap();
        let (c1_0, _) = e_encrypt(&key, &zero, 42).unwrap();
        assert_eq!(c1_m.xor(&c1_0).unwrap(), m);
    }

    #[test]
    fn decrypt_inverts_encrypt() {
        let ctx = small_ctx();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..200 {
            let key = keygen(&ctx, &mut rng);
            let m = rng.bits(ctx.msg_len());
            let alpha = rng.below(101);
            let (c1, c2) = e_encrypt(&key, &m, alpha).unwrap();
            assert_eq!(d_decrypt(&key, &c1, &c2).unwrap(), m);
        }
    }

    #[test]
    fn f_matches_e_under_obfuscated_key() {
        let ctx = small_ctx();
        let mut rng = RngStream::new(5, 0);
        let key = keygen(&ctx, &mut rng);
        let fkey = obfuscate_key(&key).unwrap();
        for _ in 0..200 {
            let m = rng.bits(ctx.msg_len());
            let alpha = rng.below(101);
            assert_eq!(
                e_encrypt(&key, &m, alpha).unwrap(),
                f_encrypt(&fkey, &m, alpha).unwrap()
            );
        }
    }

    #[test]
    fn wrong_y_diverges() {
        let ctx = small_ctx();
        let mut rng = RngStream::new(6, 0);
        let key = keygen(&ctx, &mut rng);
        let good = obfuscate_key(&key).unwrap();
        let bad = ObfKey {
            y: ctx.g2_mul(good.y, ctx.g2(1)),
            ..good
        };
        let mut mismatches = 0;
        for _ in 0..50 {
            let m = rng.bits(ctx.msg_len());
            let alpha = rng.below(101);
            if f_encrypt(&bad, &m, alpha).unwrap() != e_encrypt(&key, &m, alpha).unwrap() {
                mismatches += 1;
            }
        }
        assert!(mismatches >= 45);
    }

    #[test]
    fn tampered_c2_garbles_message() {
        let ctx = small_ctx();
        let mut rng = RngStream::new(7, 0);
        let key = keygen(&ctx, &mut rng);
        let m = rng.bits(ctx.msg_len());
        let (c1, c2) = e_encrypt(&key, &m, 9).unwrap();
        let tampered = ctx.encode_g1(ctx.g1_mul(ctx.decode_g1(&c2).unwrap(), ctx.g1(1)));
        assert_ne!(d_decrypt(&key, &c1, &tampered).unwrap(), m);
    }

    #[test]
    fn key_encodings_parse_and_reject_cross_kind() {
        let ctx = small_ctx();
        let mut rng = RngStream::new(8, 0);
        let key = keygen(&ctx, &mut rng);
        let bits = key.encode();
        assert_eq!(EncKey::decode(&bits).unwrap(), key);
        assert!(ObfKey::decode(&bits).is_err());
        let okey = obfuscate_key(&key).unwrap();
        assert!(EncKey::decode(&okey.encode()).is_err());
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let ctx = small_ctx();
        let mut rng = RngStream::new(9, 0);
        let key = keygen(&ctx, &mut rng);
        let m = Bits::zeros(ctx.msg_len());
        assert!(e_encrypt(&key, &m, 101).is_err());
        assert!(e_encrypt(&key, &m, 0).is_ok());
    }
}
