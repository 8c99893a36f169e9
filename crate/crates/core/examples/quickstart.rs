use ckks_kernels::ckks::{keygen, CkksContext};
use ckks_kernels::{CkksParams, NttBackend};
use num_complex::Complex64;
use rand::SeedableRng;

fn main() -> ckks_kernels::Result<()> {
    let params = CkksParams::preset("default")?;
    let ctx = CkksContext::new(params, NttBackend::Gemm)?;
    let keys = keygen(&ctx, 7, &[1])?;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(8);

    let x: Vec<Complex64> = (0..ctx.slots())
        .map(|i| Complex64::new(i as f64 / 1e4, 0.0))
        .collect();
    let ct = ctx.encrypt(&ctx.encode_default(&x)?, &keys.public, &mut rng)?;
    let sq = ctx.rescale(&ctx.hmult(&ct, &ct, &keys.relin)?)?;
    let left = ctx.hrotate(&sq, 1, keys.rotation_key(1)?)?;
    let out = ctx.decode(&ctx.decrypt(&left, &keys.secret)?)?;

    for i in 0..4 {
        let want = x[(i + 1) % x.len()].re.powi(2);
        println!("slot {i}: {:.9} (expected {want:.9})", out[i].re);
    }
    Ok(())
}
