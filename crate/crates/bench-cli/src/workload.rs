//! Encrypted dot product: one product, then a rotate-and-add reduction.

use std::collections::BTreeMap;
use std::time::Instant;

use ckks_kernels::ckks::{keygen, CkksContext};
use ckks_kernels::{CkksParams, NttBackend};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::{CliError, CliResult};

/// Uniform points of the unit disk, deterministic in `seed`.
pub fn unit_values(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Complex64::from_polar(
                rng.gen::<f64>().sqrt(),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct DotReport {
    pub preset_n: usize,
    pub length: usize,
    pub backend: String,
    pub expected: f64,
    pub result: f64,
    /// `|result - expected| / |expected|`, or the absolute error when `expected` is 0.
    pub error: f64,
    pub wall_ms: f64,
    pub op_counts: BTreeMap<&'static str, usize>,
}

/// Dot product of two random vectors in `[0, 1)` (or zeros) of `length` entries.
pub fn dot_product(
    params: CkksParams,
    backend: NttBackend,
    length: usize,
    zeros: bool,
    seed: u64,
) -> CliResult<DotReport> {
    let slots = params.slots();
    if length == 0 || length > slots {
        return Err(CliError::Usage(format!("length must be in 1..={slots}")));
    }
    if params.l_max() < 1 {
        return Err(CliError::Failed(
            "the reduction needs at least one rescale level".into(),
        ));
    }
    let steps = length.next_power_of_two().trailing_zeros() as usize;
    let rotations: Vec<usize> = (0..steps).map(|k| 1 << k).collect();
    let ctx = CkksContext::new(params, backend)?;
    let keys = keygen(&ctx, seed, &rotations)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
    let draw = |rng: &mut ChaCha20Rng| -> Vec<f64> {
        (0..length)
            .map(|_| if zeros { 0.0 } else { rng.gen::<f64>() })
            .collect()
    };
    let x = draw(&mut rng);
    let y = draw(&mut rng);
    let expected: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let as_slots =
        |v: &[f64]| -> Vec<Complex64> { v.iter().map(|&r| Complex64::new(r, 0.0)).collect() };

    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let start = Instant::now();
    let cx = ctx.encrypt(&ctx.encode_default(&as_slots(&x))?, &keys.public, &mut rng)?;
    let cy = ctx.encrypt(&ctx.encode_default(&as_slots(&y))?, &keys.public, &mut rng)?;
    *counts.entry("encrypt").or_default() += 2;
    let mut acc = ctx.rescale(&ctx.hmult(&cx, &cy, &keys.relin)?)?;
    *counts.entry("hmult").or_default() += 1;
    *counts.entry("rescale").or_default() += 1;
    for &r in &rotations {
        let rotated = ctx.hrotate(&acc, r, keys.rotation_key(r)?)?;
        acc = ctx.hadd(&acc, &rotated)?;
        *counts.entry("hrotate").or_default() += 1;
        *counts.entry("hadd").or_default() += 1;
    }
    let slots_out = ctx.decode(&ctx.decrypt(&acc, &keys.secret)?)?;
    *counts.entry("decrypt").or_default() += 1;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let result = slots_out[0].re;
    let abs = (result - expected).abs();
    let error = if expected != 0.0 {
        abs / expected.abs()
    } else {
        abs
    };
    Ok(DotReport {
        preset_n: ctx.n(),
        length,
        backend: backend.name().into(),
        expected,
        result,
        error,
        wall_ms,
        op_counts: counts,
    })
}
