use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::params::generate_prime_chain_split;

fn context() -> CkksContext {
    let chain = generate_prime_chain_split(1 << 11, 3, 2, 30, 30).unwrap();
    let params = CkksParams::new(4, 40, chain).unwrap();
    CkksContext::new(params, NttBackend::Butterfly).unwrap()
}

fn random_values(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn decrypt_decode(ctx: &CkksContext, ct: &Ciphertext, sk: &SecretKey) -> Vec<Complex64> {
    ctx.decode(&ctx.decrypt(ct, sk).unwrap()).unwrap()
}

#[test]
fn encode_decode_roundtrip() {
    let ctx = context();
    let z = random_values(ctx.slots(), 1);
    let pt = ctx.encode_default(&z).unwrap();
    assert!(slot_error(&ctx.decode(&pt).unwrap(), &z) < 1e-9);
}

#[test]
fn encode_rejects_too_many_values() {
    let ctx = context();
    let z = random_values(ctx.slots() + 1, 1);
    assert!(matches!(
        ctx.encode_default(&z),
        Err(Error::TooManyValues { .. })
    ));
}

#[test]
fn encode_rejects_overflowing_scale() {
    let ctx = context();
    let z = random_values(4, 1);
    assert!(matches!(
        ctx.encode(&z, 2f64.powi(40), 0),
        Err(Error::ScaleOverflow)
    ));
}

#[test]
fn encrypt_decrypt_roundtrip() {
    let ctx = context();
    let keys = keygen(&ctx, 7, &[]).unwrap();
    let z = random_values(ctx.slots(), 2);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let ct = ctx
        .encrypt(&ctx.encode_default(&z).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let err = slot_error(&decrypt_decode(&ctx, &ct, &keys.secret), &z);
    assert!(err < 2f64.powi(-20), "error {err}");
}

#[test]
fn keygen_is_deterministic_with_fixed_weight() {
    let ctx = context();
    let k1 = keygen(&ctx, 11, &[1]).unwrap();
    let k2 = keygen(&ctx, 11, &[1]).unwrap();
    assert_eq!(k1.secret, k2.secret);
    assert_eq!(k1.public, k2.public);
    assert_eq!(k1.relin, k2.relin);
    assert_eq!(k1.secret.hamming_weight(), ctx.n() / 2);
    assert_ne!(keygen(&ctx, 12, &[]).unwrap().secret, k1.secret);
}

#[test]
fn fresh_encryptions_differ() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let pt = ctx.encode_default(&random_values(8, 4)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let c1 = ctx.encrypt(&pt, &keys.public, &mut rng).unwrap();
    let c2 = ctx.encrypt(&pt, &keys.public, &mut rng).unwrap();
    assert_ne!(c1, c2);
}

#[test]
fn hadd_is_commutative_and_correct() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let x = random_values(ctx.slots(), 7);
    let y = random_values(ctx.slots(), 8);
    let cx = ctx
        .encrypt(&ctx.encode_default(&x).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let cy = ctx
        .encrypt(&ctx.encode_default(&y).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let s1 = ctx.hadd(&cx, &cy).unwrap();
    assert_eq!(s1, ctx.hadd(&cy, &cx).unwrap());
    let want: Vec<_> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
    assert!(slot_error(&decrypt_decode(&ctx, &s1, &keys.secret), &want) < 2f64.powi(-19));
}

#[test]
fn hadd_rejects_mismatched_scale_and_level() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let z = random_values(4, 7);
    let c1 = ctx
        .encrypt(&ctx.encode_default(&z).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let c2 = ctx
        .encrypt(
            &ctx.encode(&z, 2f64.powi(39), 3).unwrap(),
            &keys.public,
            &mut rng,
        )
        .unwrap();
    assert!(matches!(ctx.hadd(&c1, &c2), Err(Error::Scale(..))));
    let c3 = ctx.drop_to_level(&c1, 2).unwrap();
    assert!(matches!(ctx.hadd(&c1, &c3), Err(Error::Level(..))));
}

#[test]
fn cmult_by_ones_then_rescale() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let z = random_values(ctx.slots(), 10);
    let ct = ctx
        .encrypt(&ctx.encode_default(&z).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let ones = vec![Complex64::new(1.0, 0.0); ctx.slots()];
    let prod = ctx.cmult(&ct, &ctx.encode_default(&ones).unwrap()).unwrap();
    let out = ctx.rescale(&prod).unwrap();
    assert_eq!(out.level, ct.level - 1);
    let err = slot_error(&decrypt_decode(&ctx, &out, &keys.secret), &z);
    assert!(err < 2f64.powi(-18), "error {err}");
}

#[test]
fn hmult_then_rescale() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let x = random_values(ctx.slots(), 12);
    let y = random_values(ctx.slots(), 13);
    let cx = ctx
        .encrypt(&ctx.encode_default(&x).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let cy = ctx
        .encrypt(&ctx.encode_default(&y).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let prod = ctx
        .rescale(&ctx.hmult(&cx, &cy, &keys.relin).unwrap())
        .unwrap();
    let want: Vec<_> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let err = slot_error(&decrypt_decode(&ctx, &prod, &keys.secret), &want);
    assert!(err < 2f64.powi(-18), "error {err}");
}

#[test]
fn rotation_shifts_slots_left() {
    let ctx = context();
    let slots = ctx.slots();
    let keys = keygen(&ctx, 1, &[1, 5, slots - 5]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let z = random_values(slots, 15);
    let ct = ctx
        .encrypt(&ctx.encode_default(&z).unwrap(), &keys.public, &mut rng)
        .unwrap();

    let r1 = ctx.hrotate(&ct, 1, keys.rotation_key(1).unwrap()).unwrap();
    let want: Vec<_> = (0..slots).map(|i| z[(i + 1) % slots]).collect();
    let err = slot_error(&decrypt_decode(&ctx, &r1, &keys.secret), &want);
    assert!(err < 2f64.powi(-18), "error {err}");

    let r5 = ctx.hrotate(&ct, 5, keys.rotation_key(5).unwrap()).unwrap();
    let back = ctx
        .hrotate(&r5, slots - 5, keys.rotation_key(slots - 5).unwrap())
        .unwrap();
    let err = slot_error(&decrypt_decode(&ctx, &back, &keys.secret), &z);
    assert!(err < 2f64.powi(-18), "error {err}");
}

#[test]
fn rotation_needs_a_key() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    assert!(matches!(keys.rotation_key(3), Err(Error::MissingKey(_))));
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    assert!(matches!(
        ctx.gen_rotation_key(&keys.secret, ctx.slots(), &mut rng),
        Err(Error::Range(_))
    ));
}

#[test]
fn conjugation_conjugates_slots() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(16);
    let z = random_values(ctx.slots(), 17);
    let ct = ctx
        .encrypt(&ctx.encode_default(&z).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let out = ctx.hconjugate(&ct, &keys.conjugation).unwrap();
    let want: Vec<_> = z.iter().map(|c| c.conj()).collect();
    let err = slot_error(&decrypt_decode(&ctx, &out, &keys.secret), &want);
    assert!(err < 2f64.powi(-18), "error {err}");
}

#[test]
fn self_switch_preserves_plaintext() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(18);
    let ident = ctx
        .gen_switching_key(&keys.secret.s, &keys.secret, &mut rng)
        .unwrap();
    let z = random_values(ctx.slots(), 19);
    let ct = ctx
        .encrypt(&ctx.encode_default(&z).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let (k0, k1) = ctx.key_switch(&ct.a, &ident).unwrap();
    let switched = Ciphertext {
        b: crate::kernels::ele_add(&ct.b, &k0).unwrap(),
        a: k1,
        ..ct.clone()
    };
    let err = slot_error(&decrypt_decode(&ctx, &switched, &keys.secret), &z);
    assert!(err < 2f64.powi(-19), "error {err}");
}

#[test]
fn rescale_metadata_and_exhaustion() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(20);
    let z = random_values(4, 21);
    let ct = ctx
        .encrypt(&ctx.encode_default(&z).unwrap(), &keys.public, &mut rng)
        .unwrap();
    let top = ctx.params().chain().q_values()[3] as f64;
    let r = ctx.rescale(&ct).unwrap();
    assert_eq!(r.level, 2);
    assert_eq!(r.b.basis(), ctx.level_basis(2));
    assert_eq!(r.scale, ct.scale / top);
    let bottom = ctx.drop_to_level(&ct, 0).unwrap();
    assert!(matches!(ctx.rescale(&bottom), Err(Error::LevelExhausted)));
}

#[test]
fn serialization_roundtrip_and_rejection() {
    let ctx = context();
    let keys = keygen(&ctx, 1, &[]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(22);
    let ct = ctx
        .encrypt(
            &ctx.encode_default(&random_values(4, 23)).unwrap(),
            &keys.public,
            &mut rng,
        )
        .unwrap();
    for obj in [
        Serialized::Ciphertext(ct.clone()),
        Serialized::PublicKey(keys.public.clone()),
        Serialized::SwitchingKey(keys.relin.clone()),
    ] {
        let mut buf = Vec::new();
        write_object(&mut buf, ctx.params(), &obj).unwrap();
        assert_eq!(&buf[..5], b"TFHE1");
        assert_eq!(read_object(buf.as_slice(), ctx.params()).unwrap(), obj);
    }

    let mut buf = Vec::new();
    write_object(&mut buf, ctx.params(), &Serialized::Ciphertext(ct)).unwrap();
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(read_object(bad.as_slice(), ctx.params()).is_err());
    assert!(read_object(&buf[..buf.len() - 1], ctx.params()).is_err());
    let other = CkksParams::preset("set_a").unwrap();
    assert!(read_object(buf.as_slice(), &other).is_err());
}
