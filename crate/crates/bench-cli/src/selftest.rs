//! Correctness suites run against a parameter preset.

use std::time::Instant;

use ckks_kernels::batch::{batched_apply, BatchBuffer, BatchKernel};
use ckks_kernels::ckks::{keygen, sampling, slot_error, CkksContext};
use ckks_kernels::kernels::hada_mult;
use ckks_kernels::modarith::Modulus;
use ckks_kernels::ntt::{
    ntt_forward, ntt_inverse, ntt_oracle, Direction, TcuProbe, TwiddleFactorSet,
};
use ckks_kernels::rns::{crt_compose_centered, Domain, RnsPolynomial};
use ckks_kernels::{CkksParams, NttBackend};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::workload::unit_values;

type Suite = Result<String, String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_row(rng: &mut ChaCha20Rng, n: usize, q: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

fn oracle_degrees(params: &CkksParams) -> Vec<usize> {
    [16usize, 64, 256, 1024]
        .into_iter()
        .filter(|&n| n <= params.n())
        .collect()
}

fn twiddles(n: usize, primes: &[u32], fault: bool) -> Result<TwiddleFactorSet, String> {
    let mut tw = TwiddleFactorSet::new(n, primes).map_err(fail)?;
    if fault {
        tw.inject_fault();
    }
    Ok(tw)
}

fn ntt_suite(params: &CkksParams, backend: NttBackend, seed: u64, fault: bool) -> Suite {
    let primes = params.chain().all_values();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut checked = 0;
    for n in oracle_degrees(params) {
        let tw = twiddles(n, &primes, fault)?;
        for &q in &primes {
            let table = tw.table(q).map_err(fail)?;
            for _ in 0..4 {
                let a = random_row(&mut rng, n, q);
                let mut got = a.clone();
                table.forward(&mut got, backend).map_err(fail)?;
                if got != ntt_oracle(&a, q, table.psi()) {
                    return Err(format!("forward mismatch at n={n} q={q}"));
                }
                table.inverse(&mut got, backend).map_err(fail)?;
                if got != a {
                    return Err(format!("inverse mismatch at n={n} q={q}"));
                }
                checked += 1;
            }
        }
    }
    // full degree: agreement with the butterfly reference and exact inversion
    let n = params.n();
    let tw = twiddles(n, &primes, fault)?;
    for &q in primes.iter().take(2) {
        let table = tw.table(q).map_err(fail)?;
        let a = random_row(&mut rng, n, q);
        let mut reference = a.clone();
        table
            .forward(&mut reference, NttBackend::Butterfly)
            .map_err(fail)?;
        let mut got = a.clone();
        table.forward(&mut got, backend).map_err(fail)?;
        if got != reference {
            return Err(format!("full-degree mismatch at q={q}"));
        }
        table.inverse(&mut got, backend).map_err(fail)?;
        if got != a {
            return Err(format!("full-degree inverse mismatch at q={q}"));
        }
        checked += 1;
    }
    Ok(format!("{checked} transforms match the direct evaluation"))
}

fn segmented_suite(params: &CkksParams, seed: u64, fault: bool) -> Suite {
    let primes = params.chain().all_values();
    let n = params.n().min(1024);
    let tw = twiddles(n, &primes, fault)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut probe = TcuProbe::default();
    for &q in &primes {
        let table = tw.table(q).map_err(fail)?;
        let mut a = random_row(&mut rng, n, q);
        table
            .run_probed(&mut a, Direction::Forward, &mut probe)
            .map_err(fail)?;
        table
            .run_probed(&mut a, Direction::Inverse, &mut probe)
            .map_err(fail)?;
    }
    if probe.clean() {
        Ok(format!(
            "{} byte GEMMs, max operand {}, max accumulator {}",
            probe.gemm_calls, probe.max_operand, probe.max_accumulator
        ))
    } else {
        Err(format!("{probe:?}"))
    }
}

fn schoolbook(a: &[u32], b: &[u32], m: &Modulus) -> Vec<u32> {
    let n = a.len();
    let mut out = vec![0u32; n];
    for i in 0..n {
        for j in 0..n {
            let p = m.mul(a[i], b[j]);
            let k = (i + j) % n;
            out[k] = if i + j < n {
                m.add(out[k], p)
            } else {
                m.sub(out[k], p)
            };
        }
    }
    out
}

fn convolution_suite(params: &CkksParams, backend: NttBackend, seed: u64, fault: bool) -> Suite {
    let n = 256.min(params.n());
    let q = params.chain().q_values()[0];
    let tw = twiddles(n, &[q], fault)?;
    let m = Modulus::new(q);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let a = random_row(&mut rng, n, q);
        let b = random_row(&mut rng, n, q);
        let pa = RnsPolynomial::from_rows(n, &[q], Domain::Coefficient, a.clone()).map_err(fail)?;
        let pb = RnsPolynomial::from_rows(n, &[q], Domain::Coefficient, b.clone()).map_err(fail)?;
        let fa = ntt_forward(&pa, &tw, backend).map_err(fail)?;
        let fb = ntt_forward(&pb, &tw, backend).map_err(fail)?;
        let c = ntt_inverse(&hada_mult(&fa, &fb).map_err(fail)?, &tw, backend).map_err(fail)?;
        if c.row(0) != schoolbook(&a, &b, &m).as_slice() {
            return Err(format!("product differs from schoolbook at n={n}"));
        }
    }
    Ok(format!(
        "8 products at n={n} match schoolbook multiplication"
    ))
}

fn crt_suite(params: &CkksParams, seed: u64) -> Suite {
    let basis = params.chain().q_values();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let coeffs: Vec<i64> = (0..64)
        .map(|_| rng.gen_range(-(1i64 << 40)..(1i64 << 40)))
        .collect();
    let poly = RnsPolynomial::from_signed(&coeffs, &basis);
    let back = crt_compose_centered(&poly).map_err(fail)?;
    for (c, b) in coeffs.iter().zip(&back) {
        if c.to_string() != b.to_string() {
            return Err(format!("{c} came back as {b}"));
        }
    }
    Ok(format!(
        "64 signed coefficients over {} primes",
        basis.len()
    ))
}

/// Roundtrip bound `2^(20 - scale_bits)`: `2^-20` at the default 40-bit scale, looser
/// for presets with a smaller scale. Products and rotations get four times as much.
fn roundtrip_tol(params: &CkksParams) -> f64 {
    2f64.powi(20 - params.scale_bits() as i32)
}

fn ckks_suite(params: &CkksParams, backend: NttBackend, seed: u64) -> Suite {
    let ctx = CkksContext::new(params.clone(), backend).map_err(fail)?;
    let keys = keygen(&ctx, seed, &[1]).map_err(fail)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed + 1);
    let slots = ctx.slots();
    let x = unit_values(slots, seed + 2);
    let y = unit_values(slots, seed + 3);
    let enc = |z: &[_], rng: &mut ChaCha20Rng| -> Result<_, String> {
        let pt = ctx.encode_default(z).map_err(fail)?;
        ctx.encrypt(&pt, &keys.public, rng).map_err(fail)
    };
    let open = |ct: &_| -> Result<Vec<_>, String> {
        ctx.decode(&ctx.decrypt(ct, &keys.secret).map_err(fail)?)
            .map_err(fail)
    };
    let cx = enc(&x, &mut rng)?;
    let cy = enc(&y, &mut rng)?;

    let e_rt = slot_error(&open(&cx)?, &x);
    let sum: Vec<_> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
    let e_add = slot_error(&open(&ctx.hadd(&cx, &cy).map_err(fail)?)?, &sum);
    let rotated: Vec<_> = (0..slots).map(|i| x[(i + 1) % slots]).collect();
    let rot = ctx
        .hrotate(&cx, 1, keys.rotation_key(1).map_err(fail)?)
        .map_err(fail)?;
    let e_rot = slot_error(&open(&rot)?, &rotated);
    let tol = roundtrip_tol(params);
    let mut detail = format!("roundtrip {e_rt:.2e}, hadd {e_add:.2e}, hrotate {e_rot:.2e}");
    let mut ok = e_rt < tol && e_add < 2.0 * tol && e_rot < 4.0 * tol;
    if ctx.max_level() >= 1 {
        let prod: Vec<_> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
        let m = ctx.hmult(&cx, &cy, &keys.relin).map_err(fail)?;
        let e_mul = slot_error(&open(&ctx.rescale(&m).map_err(fail)?)?, &prod);
        detail.push_str(&format!(", hmult {e_mul:.2e}"));
        ok &= e_mul < 4.0 * tol;
    }
    detail.push_str(&format!(" (bound {tol:.2e})"));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn batch_suite(params: &CkksParams, backend: NttBackend, seed: u64, fault: bool) -> Suite {
    let n = params.n();
    let basis = params.chain().q_values();
    let tw = twiddles(n, &basis, fault)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let items: Vec<_> = (0..4)
        .map(|_| sampling::uniform(n, &basis, Domain::Coefficient, &mut rng))
        .collect();
    let buf = BatchBuffer::pack(&items).map_err(fail)?;
    if buf.unpack() != items {
        return Err("pack/unpack changed the items".into());
    }
    let batched = batched_apply(&buf, BatchKernel::Ntt, &tw, backend)
        .map_err(fail)?
        .unpack();
    for (b, item) in items.iter().enumerate() {
        if batched[b] != ntt_forward(item, &tw, backend).map_err(fail)? {
            return Err(format!("batched NTT differs for item {b}"));
        }
    }
    Ok("4 batched NTTs are bit-identical to sequential ones".into())
}

/// Runs every suite; returns whether all passed.
pub fn run(params: &CkksParams, backends: &[NttBackend], seed: u64, fault: bool) -> bool {
    let mut all = true;
    let mut line = |name: String, started: Instant, result: Suite| {
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("[PASS] {name}: {d} ({secs:.1}s)"),
            Err(d) => {
                all = false;
                println!("[FAIL] {name}: {d} ({secs:.1}s)");
            }
        }
    };
    let t = Instant::now();
    line("crt".into(), t, crt_suite(params, seed));
    let t = Instant::now();
    line(
        "segmented-constraints".into(),
        t,
        segmented_suite(params, seed, fault),
    );
    for &backend in backends {
        let t = Instant::now();
        line(
            format!("ntt-oracle[{backend}]"),
            t,
            ntt_suite(params, backend, seed, fault),
        );
        let t = Instant::now();
        line(
            format!("convolution[{backend}]"),
            t,
            convolution_suite(params, backend, seed, fault),
        );
        let t = Instant::now();
        line(
            format!("batching[{backend}]"),
            t,
            batch_suite(params, backend, seed, fault),
        );
        let t = Instant::now();
        line(
            format!("ckks[{backend}]"),
            t,
            ckks_suite(params, backend, seed),
        );
    }
    println!(
        "selftest: {}",
        if all { "all suites passed" } else { "FAILED" }
    );
    all
}
