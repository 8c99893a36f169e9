//! Throughput measurements over batch sizes and ring degrees.

use std::time::Instant;

use ckks_kernels::batch::{batched_apply, plan_batch_size, BatchBuffer, BatchKernel, PlanOp};
use ckks_kernels::ckks::{keygen, sampling, Ciphertext, CkksContext};
use ckks_kernels::ntt::TwiddleFactorSet;
use ckks_kernels::params::generate_prime_chain_split;
use ckks_kernels::rns::Domain;
use ckks_kernels::{CkksParams, NttBackend};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::report::Row;
use crate::workload::unit_values;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchOp {
    Ntt,
    Intt,
    ForbeniusMap,
    Hmult,
    Hadd,
    Hrotate,
    Rescale,
    Cmult,
}

impl BenchOp {
    pub fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "ntt" => Self::Ntt,
            "intt" => Self::Intt,
            "forbenius_map" => Self::ForbeniusMap,
            "hmult" => Self::Hmult,
            "hadd" => Self::Hadd,
            "hrotate" => Self::Hrotate,
            "rescale" => Self::Rescale,
            "cmult" => Self::Cmult,
            _ => return Err(CliError::Usage(format!("unknown operation {s:?}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ntt => "ntt",
            Self::Intt => "intt",
            Self::ForbeniusMap => "forbenius_map",
            Self::Hmult => "hmult",
            Self::Hadd => "hadd",
            Self::Hrotate => "hrotate",
            Self::Rescale => "rescale",
            Self::Cmult => "cmult",
        }
    }

    fn plan_op(self) -> PlanOp {
        match self {
            Self::Ntt => PlanOp::Ntt,
            Self::Intt => PlanOp::Intt,
            Self::ForbeniusMap => PlanOp::ForbeniusMap,
            Self::Hmult => PlanOp::Hmult,
            Self::Hadd => PlanOp::Hadd,
            Self::Hrotate => PlanOp::Hrotate,
            Self::Rescale => PlanOp::Rescale,
            Self::Cmult => PlanOp::Cmult,
        }
    }
}

pub struct Config {
    pub op: BenchOp,
    pub batch_sizes: Vec<usize>,
    pub reps: usize,
    pub threads: usize,
    pub seed: u64,
    pub budget: u64,
}

/// Same chain shape as `base` at ring degree `n`.
pub fn params_for_degree(base: &CkksParams, n: usize) -> CliResult<CkksParams> {
    if n == base.n() {
        return Ok(base.clone());
    }
    let chain = base.chain();
    let bits = |v: &[u32]| v.first().map_or(30, |q| 32 - q.leading_zeros());
    let q_bits = bits(&chain.q_values());
    let p_bits = bits(&chain.p_values());
    let chain = generate_prime_chain_split(n, base.l_max(), base.k(), q_bits, p_bits)?;
    Ok(CkksParams::new(base.dnum(), base.scale_bits(), chain)?)
}

/// Median wall time in milliseconds of `reps` calls after one warm-up call.
fn median_ms<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    f();
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2.0
    }
}

pub fn bench(params: &CkksParams, backend: NttBackend, cfg: &Config) -> CliResult<Vec<Row>> {
    let level = params.l_max();
    let row = |batch: usize, wall: Option<f64>| Row {
        op: cfg.op.name().into(),
        backend: backend.name().into(),
        n: params.n(),
        level,
        batch,
        threads: cfg.threads,
        reps: cfg.reps,
        wall_ms_median: wall,
        ops_per_sec: wall.map(|w| batch as f64 * 1000.0 / w),
    };
    let max_batch = plan_batch_size(cfg.budget, params, cfg.op.plan_op(), usize::MAX).unwrap_or(0);
    let mut runner = Runner::new(params, backend, cfg)?;
    let mut rows = Vec::new();
    for &b in &cfg.batch_sizes {
        if b == 0 || b > max_batch {
            eprintln!(
                "skipping {} at batch {b}: the memory plan allows at most {max_batch}",
                cfg.op.name()
            );
            rows.push(row(b, None));
            continue;
        }
        let wall = runner.time(b, cfg.reps)?;
        rows.push(row(b, Some(wall)));
    }
    Ok(rows)
}

enum Runner {
    Kernel {
        op: BenchOp,
        params: CkksParams,
        backend: NttBackend,
        tw: TwiddleFactorSet,
        rng: ChaCha20Rng,
    },
    Scheme {
        op: BenchOp,
        ctx: Box<CkksContext>,
        keys: Box<ckks_kernels::ckks::KeySet>,
        x: Ciphertext,
        y: Ciphertext,
    },
}

impl Runner {
    fn new(params: &CkksParams, backend: NttBackend, cfg: &Config) -> CliResult<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        Ok(match cfg.op {
            BenchOp::Ntt | BenchOp::Intt | BenchOp::ForbeniusMap => Runner::Kernel {
                op: cfg.op,
                params: params.clone(),
                backend,
                tw: TwiddleFactorSet::new(params.n(), &params.chain().q_values())?,
                rng,
            },
            op => {
                let ctx = CkksContext::new(params.clone(), backend)?;
                let rotations: &[usize] = if op == BenchOp::Hrotate { &[1] } else { &[] };
                let keys = keygen(&ctx, cfg.seed, rotations)?;
                let mut enc = |seed| -> CliResult<Ciphertext> {
                    let pt = ctx.encode_default(&unit_values(ctx.slots(), seed))?;
                    Ok(ctx.encrypt(&pt, &keys.public, &mut rng)?)
                };
                let x = enc(cfg.seed.wrapping_add(1))?;
                let y = enc(cfg.seed.wrapping_add(2))?;
                Runner::Scheme {
                    op,
                    ctx: Box::new(ctx),
                    keys: Box::new(keys),
                    x,
                    y,
                }
            }
        })
    }

    fn time(&mut self, batch: usize, reps: usize) -> CliResult<f64> {
        match self {
            Runner::Kernel {
                op,
                params,
                backend,
                tw,
                rng,
            } => {
                let domain = if *op == BenchOp::Ntt {
                    Domain::Coefficient
                } else {
                    Domain::Ntt
                };
                let basis = params.chain().q_values();
                let items: Vec<_> = (0..batch)
                    .map(|_| sampling::uniform(params.n(), &basis, domain, rng))
                    .collect();
                let buf = BatchBuffer::pack(&items)?;
                let kernel = match op {
                    BenchOp::Ntt => BatchKernel::Ntt,
                    BenchOp::Intt => BatchKernel::Intt,
                    _ => BatchKernel::ForbeniusMap(1),
                };
                let mut failure = None;
                let wall = median_ms(reps, || {
                    if let Err(e) = batched_apply(&buf, kernel, tw, *backend) {
                        failure = Some(e);
                    }
                });
                match failure {
                    Some(e) => Err(e.into()),
                    None => Ok(wall),
                }
            }
            Runner::Scheme {
                op,
                ctx,
                keys,
                x,
                y,
            } => {
                let (ctx, keys, x, y, op) = (&**ctx, &**keys, &*x, &*y, *op);
                let pt = ctx.encode_default(&unit_values(ctx.slots(), 7))?;
                let rot = if op == BenchOp::Hrotate {
                    Some(keys.rotation_key(1)?)
                } else {
                    None
                };
                let one = |_: usize| -> ckks_kernels::Result<Ciphertext> {
                    match op {
                        BenchOp::Hmult => ctx.hmult(x, y, &keys.relin),
                        BenchOp::Hadd => ctx.hadd(x, y),
                        BenchOp::Hrotate => ctx.hrotate(x, 1, rot.expect("rotation key")),
                        BenchOp::Rescale => ctx.rescale(x),
                        BenchOp::Cmult => ctx.cmult(x, &pt),
                        _ => unreachable!("kernel ops use the batch buffer"),
                    }
                };
                let mut failure = None;
                let wall = median_ms(reps, || {
                    let out: Vec<_> = (0..batch).into_par_iter().map(one).collect();
                    if let Some(Err(e)) = out.into_iter().find(|r| r.is_err()) {
                        failure = Some(e);
                    }
                });
                match failure {
                    Some(e) => Err(e.into()),
                    None => Ok(wall),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_names_roundtrip() {
        for name in [
            "ntt",
            "intt",
            "forbenius_map",
            "hmult",
            "hadd",
            "hrotate",
            "rescale",
            "cmult",
        ] {
            assert_eq!(BenchOp::parse(name).unwrap().name(), name);
        }
        assert!(BenchOp::parse("fft").is_err());
    }

    #[test]
    fn degree_substitution_keeps_shape() {
        let base = CkksParams::preset("set_a").unwrap();
        let p = params_for_degree(&base, 2048).unwrap();
        assert_eq!(p.n(), 2048);
        assert_eq!(p.l_max(), base.l_max());
        assert_eq!(p.k(), base.k());
        assert_eq!(p.scale_bits(), base.scale_bits());
        let bits = |q: u32| 32 - q.leading_zeros();
        assert_eq!(
            bits(p.chain().q_values()[0]),
            bits(base.chain().q_values()[0])
        );
    }

    #[test]
    fn median_of_samples() {
        let mut calls = 0;
        let m = median_ms(4, || calls += 1);
        assert_eq!(calls, 5);
        assert!(m >= 0.0);
    }
}
