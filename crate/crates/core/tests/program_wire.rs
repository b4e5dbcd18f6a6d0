//! Wire format and budgeted evaluation of programs: goldens for the byte
//! layout, canonicity properties, and the equality checker.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;

use wbc_arena::arena::Arena;
use wbc_arena::bits::Bits;
use wbc_arena::error::Error;
use wbc_arena::family::{EvalCtx, FamilyRegistry};
use wbc_arena::program::{
    deserialize_program, eval_program, exact_equal, serialize_program, EqualityBasis,
    EqualityMode, EvalStatus, ProgramValue,
};
use wbc_arena::rng::RngStream;

fn arena_ctx(seed: u64) -> (Arena, EvalCtx) {
    let arena = Arena::with_defaults();
    let ctx = arena.eval_ctx(seed, "test-env", 0);
    (arena, ctx)
}

fn empty_ctx() -> EvalCtx {
    EvalCtx::new(Arc::new(FamilyRegistry::new()), RngStream::new(0, 0))
}

#[test]
fn native_wire_layout_golden() {
    let p = ProgramValue::Native {
        family_id: "xor".into(),
        key: Bits::from_bit_string("101").unwrap(),
    };
    let bytes = serialize_program(&p);
    // tag, id length, id, payload length, payload = bit count + packed bits
    let expected = [
        0x01, // native tag
        0x00, 0x00, 0x00, 0x03, // family id byte length
        b'x', b'o', b'r', // family id
        0x00, 0x00, 0x00, 0x05, // payload byte length
        0x00, 0x00, 0x00, 0x03, // key bit length
        0b1010_0000, // packed key bits
    ];
    assert_eq!(bytes, expected);
    assert_eq!(deserialize_program(&bytes).unwrap(), p);
}

#[test]
fn table_wire_layout_golden() {
    let mut entries = BTreeMap::new();
    entries.insert(
        Bits::from_bit_string("00").unwrap(),
        Bits::from_bit_string("1").unwrap(),
    );
    let p = ProgramValue::table(2, 1, entries).unwrap();
    let bytes = serialize_program(&p);
    let expected = [
        0x02, // table tag
        0x00, 0x00, 0x00, 0x00, // empty family id
        0x00, 0x00, 0x00, 0x0E, // payload byte length
        0x00, 0x00, 0x00, 0x02, // input bits
        0x00, 0x00, 0x00, 0x01, // output bits
        0x00, 0x00, 0x00, 0x01, // entry count
        0x00,        // packed input 00
        0b1000_0000, // packed output 1
    ];
    assert_eq!(bytes, expected);
    assert_eq!(deserialize_program(&bytes).unwrap(), p);
}

#[test]
fn malformed_bytes_are_rejected() {
    // unknown tag
    assert!(matches!(
        deserialize_program(&[0x03, 0, 0, 0, 0, 0, 0, 0, 0]),
        Err(Error::MalformedProgram(_))
    ));
    // trailing bytes
    let p = ProgramValue::Native {
        family_id: "xor".into(),
        key: Bits::from_u64_be(5, 4),
    };
    let mut bytes = serialize_program(&p);
    bytes.push(0xFF);
    assert!(deserialize_program(&bytes).is_err());
    // table with unsorted entries: build sorted bytes then swap entries
    let mut entries = BTreeMap::new();
    entries.insert(Bits::from_u64_be(0, 4), Bits::from_u64_be(1, 4));
    entries.insert(Bits::from_u64_be(1, 4), Bits::from_u64_be(2, 4));
    let t = ProgramValue::table(4, 4, entries).unwrap();
    let mut bytes = serialize_program(&t);
    let n = bytes.len();
    bytes.swap(n - 4, n - 2);
    bytes.swap(n - 3, n - 1);
    assert!(deserialize_program(&bytes).is_err());
}

#[test]
fn native_delegates_to_family() {
    let (arena, ctx) = arena_ctx(1);
    let mut rng = RngStream::new(2, 0);
    let family = arena.family("prf").unwrap();
    let key = family.sample_key(16, &mut rng).unwrap();
    let p = ProgramValue::Native {
        family_id: "prf".into(),
        key: key.clone(),
    };
    let input = rng.bits(16);
    let outcome = eval_program(&p, &input, 1 << 20, &ctx).unwrap();
    let (expected, steps) =
        wbc_arena::family::eval_family(family.as_ref(), &key, &input, &ctx).unwrap();
    assert_eq!(outcome.output, Some(expected));
    assert_eq!(outcome.steps_used, steps);
}

#[test]
fn absent_table_entries_default_to_zeros() {
    let ctx = empty_ctx();
    let mut entries = BTreeMap::new();
    entries.insert(
        Bits::from_bit_string("00").unwrap(),
        Bits::from_bit_string("1").unwrap(),
    );
    let p = ProgramValue::table(2, 1, entries).unwrap();
    let hit = eval_program(&p, &Bits::from_bit_string("00").unwrap(), 10, &ctx).unwrap();
    assert_eq!(hit.output.unwrap().bit_string(), "1");
    let miss = eval_program(&p, &Bits::from_bit_string("01").unwrap(), 10, &ctx).unwrap();
    assert_eq!(miss.output.unwrap().bit_string(), "0");
}

#[test]
fn budget_dominates_native_evaluation() {
    let (arena, ctx) = arena_ctx(3);
    let _ = arena;
    // the identity member needs 1 + len steps; budget 1 cannot cover it
    let p = ProgramValue::Native {
        family_id: "identity".into(),
        key: Bits::from_u64_be(0xAA, 8),
    };
    let input = Bits::from_u64_be(0x31, 8);
    let outcome = eval_program(&p, &input, 1, &ctx).unwrap();
    assert_eq!(outcome.status, EvalStatus::BudgetExceeded);
    assert!(outcome.output.is_none());
    assert_eq!(outcome.steps_used, 1);
    let ok = eval_program(&p, &input, 9, &ctx).unwrap();
    assert_eq!(ok.status, EvalStatus::Ok);
    assert_eq!(ok.steps_used, 9);
}

#[test]
fn steps_used_independent_of_budget_when_ok() {
    let (_, ctx) = arena_ctx(4);
    let p = ProgramValue::Native {
        family_id: "xor".into(),
        key: Bits::from_u64_be(0x5A, 8),
    };
    let input = Bits::from_u64_be(0x0F, 8);
    let tight = eval_program(&p, &input, 9, &ctx).unwrap();
    let loose = eval_program(&p, &input, 1 << 30, &ctx).unwrap();
    assert_eq!(tight.status, EvalStatus::Ok);
    assert_eq!(tight.steps_used, loose.steps_used);
    assert_eq!(tight.output, loose.output);
}

#[test]
fn exact_equal_reflexive_and_detects_single_point() {
    let (arena, ctx) = arena_ctx(5);
    let mut rng = RngStream::new(6, 0);
    let family = arena.family("xor").unwrap();
    let key = family.sample_key(8, &mut rng).unwrap();
    let native = ProgramValue::Native {
        family_id: "xor".into(),
        key: key.clone(),
    };
    let same = exact_equal(&native, &native.clone(), 8, EqualityMode::Exhaustive, &ctx).unwrap();
    assert!(same.equal);
    assert_eq!(same.basis, EqualityBasis::Exhaustive);

    // full table of the member, one entry flipped
    let mut entries = BTreeMap::new();
    for v in 0..256u64 {
        let a = Bits::from_u64_be(v, 8);
        let out = a.xor(&key).unwrap();
        entries.insert(a, out);
    }
    let flipped = Bits::from_u64_be(17, 8);
    let bad = entries[&flipped].xor(&Bits::from_u64_be(1, 8)).unwrap();
    entries.insert(flipped, bad);
    let table = ProgramValue::table(8, 8, entries).unwrap();
    let diff = exact_equal(&native, &table, 8, EqualityMode::Exhaustive, &ctx).unwrap();
    assert!(!diff.equal);
}

#[test]
fn exact_equal_sampled_matches_twin_families() {
    let (arena, ctx) = arena_ctx(7);
    let mut rng = RngStream::new(8, 0);
    let e_family = arena.family("pairing-e").unwrap();
    let key = e_family
        .sample_key(e_family.natural_k().unwrap(), &mut rng)
        .unwrap();
    let enc = wbc_arena::schemes::pairing::EncKey::decode(&key).unwrap();
    let okey = wbc_arena::schemes::pairing::obfuscate_key(&enc).unwrap();
    let p_e = ProgramValue::Native {
        family_id: "pairing-e".into(),
        key,
    };
    let p_f = ProgramValue::Native {
        family_id: "pairing-f".into(),
        key: okey.encode(),
    };
    let in_len = e_family.input_len(e_family.natural_k().unwrap());
    let report = exact_equal(&p_e, &p_f, in_len, EqualityMode::Sampled(1000), &ctx).unwrap();
    assert!(report.equal);
    assert_eq!(report.basis, EqualityBasis::Sampled(1000));

    // exhaustive mode refuses the 95-bit domain
    assert!(matches!(
        exact_equal(&p_e, &p_f, in_len, EqualityMode::Exhaustive, &ctx),
        Err(Error::DomainTooLarge { .. })
    ));
}

#[test]
fn serialization_is_injective_on_random_programs() {
    let mut rng = RngStream::new(9, 0);
    let mut seen = HashSet::new();
    let mut values = HashSet::new();
    for _ in 0..10_000 {
        let len = 1 + rng.below(64) as usize;
        let key = rng.bits(len);
        let p = ProgramValue::Native {
            family_id: if rng.bit() { "xor".into() } else { "prf".into() },
            key: key.clone(),
        };
        let bytes = serialize_program(&p);
        let fresh_value = values.insert((
            match &p {
                ProgramValue::Native { family_id, .. } => family_id.clone(),
                _ => unreachable!(),
            },
            key,
        ));
        let fresh_bytes = seen.insert(bytes);
        assert_eq!(fresh_value, fresh_bytes, "serialization collided or duplicated");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn native_roundtrip(key_bits in proptest::collection::vec(any::<bool>(), 1..200),
                        id in "[a-z][a-z0-9-]{0,12}") {
        let p = ProgramValue::Native {
            family_id: id,
            key: Bits::from_bools(&key_bits),
        };
        let bytes = serialize_program(&p);
        prop_assert_eq!(deserialize_program(&bytes).unwrap(), p);
    }

    #[test]
    fn table_roundtrip(seed in any::<u64>(), in_len in 1usize..8, out_len in 1usize..8) {
        let mut rng = RngStream::new(seed, 0);
        let mut entries = BTreeMap::new();
        for _ in 0..rng.below(16) {
            let a = rng.bits(in_len);
            let v = rng.bits(out_len);
            entries.insert(a, v);
        }
        let p = ProgramValue::table(in_len as u32, out_len as u32, entries).unwrap();
        let bytes = serialize_program(&p);
        prop_assert_eq!(deserialize_program(&bytes).unwrap(), p);
    }

    #[test]
    fn padded_form_strips_cleanly(key_bits in proptest::collection::vec(any::<bool>(), 1..64)) {
        let p = ProgramValue::Native {
            family_id: "prf".into(),
            key: Bits::from_bools(&key_bits),
        };
        let padded = p.to_padded_input(8192).unwrap();
        let parsed =
            wbc_arena::program::deserialize_padded_program(padded.packed()).unwrap();
        prop_assert_eq!(parsed, p);
    }
}
