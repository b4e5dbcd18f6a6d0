//! Serializable, step-budgeted executable programs.
//!
//! A `ProgramValue` is the currency of the framework: obfuscators emit them,
//! adversaries submit them to validating oracles, learners return them. A
//! program is either a `Native` reference to a registered family with an
//! embedded key, or an explicit input-to-output `Table`. Table lookups on
//! absent entries return the all-zero output, so every program computes a
//! total function on its declared input length.

use std::collections::BTreeMap;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::family::{eval_family, EvalCtx};
use crate::rng::RngStream;

pub const TAG_NATIVE: u8 = 0x01;
pub const TAG_TABLE: u8 = 0x02;

/// Exhaustive equality checks are allowed up to this many input bits.
pub const EXHAUSTIVE_CAP_BITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgramValue {
    Native {
        family_id: String,
        key: Bits,
    },
    Table {
        in_len: u32,
        out_len: u32,
        entries: BTreeMap<Bits, Bits>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalStatus {
    Ok,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOutcome {
    pub status: EvalStatus,
    pub output: Option<Bits>,
    pub steps_used: u64,
}

impl EvalOutcome {
    pub fn ok(output: Bits, steps_used: u64) -> Self {
        EvalOutcome {
            status: EvalStatus::Ok,
            output: Some(output),
            steps_used,
        }
    }

    pub fn exceeded(budget: u64) -> Self {
        EvalOutcome {
            status: EvalStatus::BudgetExceeded,
            output: None,
            steps_used: budget,
        }
    }
}

impl ProgramValue {
    pub fn table(in_len: u32, out_len: u32, entries: BTreeMap<Bits, Bits>) -> Result<Self> {
        for (k, v) in &entries {
            if k.len() != in_len as usize || v.len() != out_len as usize {
                return Err(Error::MalformedProgram(
                    "table entry length disagrees with declared lengths".into(),
                ));
            }
        }
        Ok(ProgramValue::Table {
            in_len,
            out_len,
            entries,
        })
    }

    /// Input bit-length the program accepts. Native programs take it from
    /// the named family, so they need the registry.
    pub fn declared_input_len(&self, ctx: &EvalCtx) -> Result<usize> {
        match self {
            ProgramValue::Native { family_id, key } => {
                let fam = ctx.registry().get(family_id)?;
                Ok(fam.input_len(key.len()))
            }
            ProgramValue::Table { in_len, .. } => Ok(*in_len as usize),
        }
    }

    /// Byte length of the canonical serialization.
    pub fn program_size(&self) -> usize {
        serialize_program(self).len()
    }

    /// Serialize and zero-pad to a fixed byte width, for submission to
    /// oracles with a fixed input length.
    pub fn to_padded_input(&self, total_bits: usize) -> Result<Bits> {
        assert!(total_bits % 8 == 0, "program inputs are byte aligned");
        let bytes = serialize_program(self);
        if bytes.len() * 8 > total_bits {
            return Err(Error::MalformedProgram(format!(
                "program of {} bytes does not fit {} input bits",
                bytes.len(),
                total_bits
            )));
        }
        let mut padded = bytes;
        padded.resize(total_bits / 8, 0);
        Ok(Bits::from_bytes(&padded))
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

/// Canonical wire format:
/// tag byte (0x01 Native, 0x02 Table) || u32 family-id byte length ||
/// family-id bytes || u32 payload byte length || payload.
///
/// Native payload: u32 key bit length || packed key bits.
/// Table payload: u32 in_len || u32 out_len || u32 entry count || entries
/// as packed input then packed output, sorted ascending by input.
pub fn serialize_program(p: &ProgramValue) -> Vec<u8> {
    let mut out = Vec::new();
    match p {
        ProgramValue::Native { family_id, key } => {
            out.push(TAG_NATIVE);
            put_u32(&mut out, family_id.len() as u32);
            out.extend_from_slice(family_id.as_bytes());
            let mut payload = Vec::new();
            put_u32(&mut payload, key.len() as u32);
            payload.extend_from_slice(key.packed());
            put_u32(&mut out, payload.len() as u32);
            out.extend_from_slice(&payload);
        }
        ProgramValue::Table {
            in_len,
            out_len,
            entries,
        } => {
            out.push(TAG_TABLE);
            put_u32(&mut out, 0);
            let mut payload = Vec::new();
            put_u32(&mut payload, *in_len);
            put_u32(&mut payload, *out_len);
            put_u32(&mut payload, entries.len() as u32);
            for (k, v) in entries {
                payload.extend_from_slice(k.packed());
                payload.extend_from_slice(v.packed());
            }
            put_u32(&mut out, payload.len() as u32);
            out.extend_from_slice(&payload);
        }
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::MalformedProgram("truncated program bytes".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn deserialize_inner(bytes: &[u8]) -> Result<(ProgramValue, usize)> {
    let mut c = Cursor {
        data: bytes,
        pos: 0,
    };
    let tag = c.u8()?;
    let fid_len = c.u32()? as usize;
    if fid_len > 1024 {
        return Err(Error::MalformedProgram("family id too long".into()));
    }
    let fid = std::str::from_utf8(c.take(fid_len)?)
        .map_err(|_| Error::MalformedProgram("family id is not utf-8".into()))?
        .to_string();
    let payload_len = c.u32()? as usize;
    let payload_end = c.pos + payload_len;
    let value = match tag {
        TAG_NATIVE => {
            let key_bits = c.u32()? as usize;
            let packed = c.take(key_bits.div_ceil(8))?;
            let key = Bits::from_packed(packed.to_vec(), key_bits)
                .map_err(|e| Error::MalformedProgram(e.to_string()))?;
            ProgramValue::Native {
                family_id: fid,
                key,
            }
        }
        TAG_TABLE => {
            if fid_len != 0 {
                return Err(Error::MalformedProgram("table programs carry no family id".into()));
            }
            let in_len = c.u32()?;
            let out_len = c.u32()?;
            let count = c.u32()? as usize;
            if count > 1 << 20 {
                return Err(Error::MalformedProgram("table entry count too large".into()));
            }
            let in_bytes = (in_len as usize).div_ceil(8);
            let out_bytes = (out_len as usize).div_ceil(8);
            let mut entries = BTreeMap::new();
            let mut prev: Option<Bits> = None;
            for _ in 0..count {
                let k = Bits::from_packed(c.take(in_bytes)?.to_vec(), in_len as usize)
                    .map_err(|e| Error::MalformedProgram(e.to_string()))?;
                let v = Bits::from_packed(c.take(out_bytes)?.to_vec(), out_len as usize)
                    .map_err(|e| Error::MalformedProgram(e.to_string()))?;
                if let Some(p) = &prev {
                    if *p >= k {
                        return Err(Error::MalformedProgram(
                            "table entries not strictly ascending".into(),
                        ));
                    }
                }
                prev = Some(k.clone());
                entries.insert(k, v);
            }
            ProgramValue::Table {
                in_len,
                out_len,
                entries,
            }
        }
        other => {
            return Err(Error::MalformedProgram(format!(
                "unknown program tag 0x{other:02x}"
            )))
        }
    };
    if c.pos != payload_end {
        return Err(Error::MalformedProgram(
            "payload length disagrees with content".into(),
        ));
    }
    Ok((value, c.pos))
}

pub fn deserialize_program(bytes: &[u8]) -> Result<ProgramValue> {
    let (value, consumed) = deserialize_inner(bytes)?;
    if consumed != bytes.len() {
        return Err(Error::MalformedProgram("trailing bytes after program".into()));
    }
    Ok(value)
}

/// Parse a program from a fixed-width, zero-padded oracle input.
pub fn deserialize_padded_program(bytes: &[u8]) -> Result<ProgramValue> {
    let (value, consumed) = deserialize_inner(bytes)?;
    if bytes[consumed..].iter().any(|&b| b != 0) {
        return Err(Error::MalformedProgram("nonzero padding after program".into()));
    }
    Ok(value)
}

/// Run a program under a step budget. Never diverges: either the program
/// halts within the budget and the output is returned, or the outcome is
/// `BudgetExceeded` with `steps_used` capped at the budget.
pub fn eval_program(
    program: &ProgramValue,
    input: &Bits,
    budget: u64,
    ctx: &EvalCtx,
) -> Result<EvalOutcome> {
    match program {
        ProgramValue::Native { family_id, key } => {
            let fam = ctx
                .registry()
                .get(family_id)
                .map_err(|_| Error::MalformedProgram(format!("unknown family {family_id:?}")))?;
            if !fam.key_is_valid(key) {
                return Err(Error::MalformedProgram("embedded key rejected".into()));
            }
            let (out, steps) = eval_family(fam.as_ref(), key, input, ctx)?;
            if steps > budget {
                Ok(EvalOutcome::exceeded(budget))
            } else {
                Ok(EvalOutcome::ok(out, steps))
            }
        }
        ProgramValue::Table {
            in_len,
            out_len,
            entries,
        } => {
            if input.len() != *in_len as usize {
                return Err(Error::InputLengthMismatch {
                    expected: *in_len as usize,
                    got: input.len(),
                });
            }
            let steps = 1u64;
            if steps > budget {
                return Ok(EvalOutcome::exceeded(budget));
            }
            let out = entries
                .get(input)
                .cloned()
                .unwrap_or_else(|| Bits::zeros(*out_len as usize));
            Ok(EvalOutcome::ok(out, steps))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqualityMode {
    Exhaustive,
    Sampled(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqualityBasis {
    /// Every input checked (or canonical forms identical): authoritative.
    Exhaustive,
    /// No disagreement found on n uniform inputs: not authoritative.
    Sampled(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqualityReport {
    pub equal: bool,
    pub basis: EqualityBasis,
}

impl EqualityBasis {
    pub fn is_authoritative(&self) -> bool {
        matches!(self, EqualityBasis::Exhaustive)
    }
}

/// Functional equality of two programs on a common input length.
///
/// Identical canonical serializations short-circuit to authoritative
/// equality (the encoding is injective and evaluation is deterministic).
/// Otherwise Exhaustive mode enumerates every input up to the domain cap,
/// and Sampled mode draws n inputs from a stream derived from both programs
/// so the verdict is reproducible.
pub fn exact_equal(
    p1: &ProgramValue,
    p2: &ProgramValue,
    input_len: usize,
    mode: EqualityMode,
    ctx: &EvalCtx,
) -> Result<EqualityReport> {
    let b1 = serialize_program(p1);
    let b2 = serialize_program(p2);
    if b1 == b2 {
        return Ok(EqualityReport {
            equal: true,
            basis: EqualityBasis::Exhaustive,
        });
    }
    let agree = |input: &Bits| -> bool {
        let o1 = eval_program(p1, input, u64::MAX, ctx);
        let o2 = eval_program(p2, input, u64::MAX, ctx);
        match (o1, o2) {
            (Ok(a), Ok(b)) => a.output == b.output,
            _ => false,
        }
    };
    match mode {
        EqualityMode::Exhaustive => {
            if input_len > EXHAUSTIVE_CAP_BITS {
                return Err(Error::DomainTooLarge { input_len });
            }
            for v in 0..(1u64 << input_len) {
                let input = Bits::from_u64_be(v, input_len);
                if !agree(&input) {
                    return Ok(EqualityReport {
                        equal: false,
                        basis: EqualityBasis::Exhaustive,
                    });
                }
            }
            Ok(EqualityReport {
                equal: true,
                basis: EqualityBasis::Exhaustive,
            })
        }
        EqualityMode::Sampled(n) => {
            let mut seed_data = b1;
            seed_data.extend_from_slice(&b2);
            seed_data.extend_from_slice(&(input_len as u64).to_be_bytes());
            let mut rng = RngStream::from_digest("exact-equal", &seed_data);
            for _ in 0..n {
                let input = rng.bits(input_len);
                if !agree(&input) {
                    return Ok(EqualityReport {
                        equal: false,
                        basis: EqualityBasis::Sampled(n),
                    });
                }
            }
            Ok(EqualityReport {
                equal: true,
                basis: EqualityBasis::Sampled(n),
            })
        }
    }
}
