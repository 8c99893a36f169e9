//! Operation-level batching in `(L, B, N)` layout.
//!
//! `B` operands at the same level are packed so that every level index owns one
//! contiguous block of `B·N` residues; a kernel then walks each block with the
//! twiddle table of that level's prime shared by all `B` items.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::frobenius_permutation;
use crate::modarith::Modulus;
use crate::ntt::{NttBackend, TwiddleFactorSet};
use crate::params::CkksParams;
use crate::rns::{Domain, RnsPolynomial};

#[derive(Debug, Clone, PartialEq)]
pub struct BatchBuffer {
    n: usize,
    batch: usize,
    basis: Vec<u32>,
    domain: Domain,
    data: Vec<u32>,
}

impl BatchBuffer {
    pub fn pack(items: &[RnsPolynomial]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Batch("cannot pack an empty batch".into()))?;
        for (i, it) in items.iter().enumerate() {
            if it.n() != first.n() || it.basis() != first.basis() || it.domain() != first.domain() {
                return Err(Error::Batch(format!(
                    "item {i} differs from item 0 in degree, basis or domain"
                )));
            }
        }
        let (n, batch, levels) = (first.n(), items.len(), first.row_count());
        let mut data = Vec::with_capacity(levels * batch * n);
        for l in 0..levels {
            for it in items {
                data.extend_from_slice(it.row(l));
            }
        }
        Ok(Self {
            n,
            batch,
            basis: first.basis().to_vec(),
            domain: first.domain(),
            data,
        })
    }

    pub fn unpack(&self) -> Vec<RnsPolynomial> {
        (0..self.batch)
            .map(|b| {
                let mut data = Vec::with_capacity(self.level_count() * self.n);
                for l in 0..self.level_count() {
                    data.extend_from_slice(self.item_row(l, b));
                }
                RnsPolynomial::from_rows(self.n, &self.basis, self.domain, data)
                    .expect("packed rows are reduced")
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn batch_size(&self) -> usize {
        self.batch
    }
    pub fn level_count(&self) -> usize {
        self.basis.len()
    }
    pub fn basis(&self) -> &[u32] {
        &self.basis
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    /// The `B·N` residues of level `l`.
    pub fn level_region(&self, l: usize) -> &[u32] {
        let len = self.batch * self.n;
        &self.data[l * len..(l + 1) * len]
    }

    pub fn item_row(&self, l: usize, b: usize) -> &[u32] {
        let start = (l * self.batch + b) * self.n;
        &self.data[start..start + self.n]
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n
            || self.batch != other.batch
            || self.basis != other.basis
            || self.domain != other.domain
        {
            return Err(Error::Batch(
                "operand buffers differ in shape, basis or domain".into(),
            ));
        }
        Ok(())
    }
}

/// `(B, L, N)` to `(L, B, N)`: element `(b, l, i)` moves to `(l, b, i)`.
pub fn reorder_layout(src: &[u32], batch: usize, levels: usize, n: usize) -> Vec<u32> {
    transpose_blocks(src, batch, levels, n)
}

/// `(L, B, N)` back to `(B, L, N)`.
pub fn reverse_reorder(src: &[u32], batch: usize, levels: usize, n: usize) -> Vec<u32> {
    transpose_blocks(src, levels, batch, n)
}

// Transpose a rows×cols grid of n-element blocks.
fn transpose_blocks(src: &[u32], rows: usize, cols: usize, n: usize) -> Vec<u32> {
    assert_eq!(
        src.len(),
        rows * cols * n,
        "buffer length does not match its shape"
    );
    let mut out = vec![0u32; src.len()];
    for r in 0..rows {
        for c in 0..cols {
            let from = (r * cols + c) * n;
            let to = (c * rows + r) * n;
            out[to..to + n].copy_from_slice(&src[from..from + n]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub enum BatchKernel<'a> {
    Ntt,
    Intt,
    HadaMult(&'a BatchBuffer),
    EleAdd(&'a BatchBuffer),
    EleSub(&'a BatchBuffer),
    ForbeniusMap(usize),
}

impl BatchKernel<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ntt => "ntt",
            Self::Intt => "intt",
            Self::HadaMult(_) => "hada_mult",
            Self::EleAdd(_) => "ele_add",
            Self::EleSub(_) => "ele_sub",
            Self::ForbeniusMap(_) => "forbenius_map",
        }
    }
}

/// Apply `kernel` to every item; item `b` of the result equals the unbatched
/// kernel on item `b`.
pub fn batched_apply(
    buf: &BatchBuffer,
    kernel: BatchKernel<'_>,
    tw: &TwiddleFactorSet,
    backend: NttBackend,
) -> Result<BatchBuffer> {
    let n = buf.n;
    let mut out = buf.clone();
    let region = buf.batch * n;
    match kernel {
        BatchKernel::Ntt | BatchKernel::Intt => {
            let (want, next) = match kernel {
                BatchKernel::Ntt => (Domain::Coefficient, Domain::Ntt),
                _ => (Domain::Ntt, Domain::Coefficient),
            };
            buf.domain.expect(want)?;
            if tw.n() != n {
                return Err(Error::Shape(format!(
                    "twiddles for n={}, buffer has n={n}",
                    tw.n()
                )));
            }
            let tables = buf
                .basis
                .iter()
                .map(|&q| tw.table(q))
                .collect::<Result<Vec<_>>>()?;
            out.data
                .par_chunks_mut(n)
                .enumerate()
                .try_for_each(|(idx, row)| {
                    let t = tables[idx / buf.batch];
                    match kernel {
                        BatchKernel::Ntt => t.forward(row, backend),
                        _ => t.inverse(row, backend),
                    }
                })?;
            out.domain = next;
        }
        BatchKernel::HadaMult(other) | BatchKernel::EleAdd(other) | BatchKernel::EleSub(other) => {
            buf.check_compatible(other)?;
            if matches!(kernel, BatchKernel::HadaMult(_)) {
                buf.domain.expect(Domain::Ntt)?;
            }
            out.data
                .par_chunks_mut(n)
                .zip(other.data.par_chunks(n))
                .enumerate()
                .for_each(|(idx, (row, rhs))| {
                    let m = Modulus::new(buf.basis[idx * n / region]);
                    for (x, &y) in row.iter_mut().zip(rhs) {
                        *x = match kernel {
                            BatchKernel::HadaMult(_) => m.mul(*x, y),
                            BatchKernel::EleAdd(_) => m.add(*x, y),
                            _ => m.sub(*x, y),
                        };
                    }
                });
        }
        BatchKernel::ForbeniusMap(r) => {
            buf.domain.expect(Domain::Ntt)?;
            if r >= n / 2 {
                return Err(Error::Range(format!(
                    "rotation index {r} not below {}",
                    n / 2
                )));
            }
            let perm = frobenius_permutation(r, n);
            out.data
                .par_chunks_mut(n)
                .zip(buf.data.par_chunks(n))
                .for_each(|(row, src)| {
                    for (x, &p) in src.iter().zip(&perm) {
                        row[p] = *x;
                    }
                });
        }
    }
    Ok(out)
}

/// Operations the planner knows working sets for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanOp {
    Ntt,
    Intt,
    HadaMult,
    EleAdd,
    EleSub,
    ForbeniusMap,
    Hadd,
    Cmult,
    Rescale,
    Hmult,
    Hrotate,
}

impl PlanOp {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "ntt" => Self::Ntt,
            "intt" => Self::Intt,
            "hada_mult" => Self::HadaMult,
            "ele_add" => Self::EleAdd,
            "ele_sub" => Self::EleSub,
            "forbenius_map" => Self::ForbeniusMap,
            "hadd" => Self::Hadd,
            "cmult" => Self::Cmult,
            "rescale" => Self::Rescale,
            "hmult" => Self::Hmult,
            "hrotate" => Self::Hrotate,
            _ => return Err(Error::Parameter(format!("unknown operation {name:?}"))),
        })
    }
}

pub const DEFAULT_MAX_BATCH: usize = 1024;

/// Bytes one batch item needs for `op`.
///
/// With `P = (L+1)·N·4` (one polynomial over `Q_L`) and `E = (L+1+K)·N·4` (one
/// polynomial over `Q_L ∪ P`):
///
/// | op | working set |
/// |---|---|
/// | ntt, intt | 2P (input, output) |
/// | hada_mult, ele_add, ele_sub, forbenius_map | 3P |
/// | hadd | 6P (two ciphertexts in, one out) |
/// | cmult | 5P |
/// | rescale | 4P |
/// | hmult | 9P + (dnum+2)·E (tensor terms, raised digits, two accumulators) |
/// | hrotate | 6P + (dnum+2)·E |
pub fn working_set_bytes(params: &CkksParams, op: PlanOp) -> u64 {
    let n = params.n() as u64;
    let p = (params.l_max() as u64 + 1) * n * 4;
    let ext = (params.l_max() + 1 + params.k()) as u64 * n * 4;
    let ks = (params.dnum() as u64 + 2) * ext;
    match op {
        PlanOp::Ntt | PlanOp::Intt => 2 * p,
        PlanOp::HadaMult | PlanOp::EleAdd | PlanOp::EleSub | PlanOp::ForbeniusMap => 3 * p,
        PlanOp::Hadd => 6 * p,
        PlanOp::Cmult => 5 * p,
        PlanOp::Rescale => 4 * p,
        PlanOp::Hmult => 9 * p + ks,
        PlanOp::Hrotate => 6 * p + ks,
    }
}

/// Largest power of two `B ≤ max_batch` with `B` working sets inside the budget.
pub fn plan_batch_size(
    available_bytes: u64,
    params: &CkksParams,
    op: PlanOp,
    max_batch: usize,
) -> Result<usize> {
    let unit = working_set_bytes(params, op);
    if available_bytes < unit {
        return Err(Error::Capacity(format!(
            "{available_bytes} bytes is below one working set of {unit} bytes"
        )));
    }
    let fit = available_bytes / unit;
    let cap = max_batch.max(1) as u64;
    let limit = fit.min(cap);
    Ok(1usize << (63 - limit.leading_zeros()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(seed: u32, basis: &[u32], n: usize) -> RnsPolynomial {
        let data = basis
            .iter()
            .flat_map(|&q| (0..n as u32).map(move |i| (i.wrapping_mul(2654435761) ^ seed) % q))
            .collect();
        RnsPolynomial::from_rows(n, basis, Domain::Coefficient, data).unwrap()
    }

    #[test]
    fn single_item_is_a_copy() {
        let p = poly(1, &[17, 97], 8);
        let buf = BatchBuffer::pack(std::slice::from_ref(&p)).unwrap();
        assert_eq!(buf.data(), p.data());
        assert_eq!(buf.unpack(), vec![p]);
    }

    #[test]
    fn level_regions_are_contiguous() {
        let items: Vec<_> = (0..3).map(|s| poly(s, &[17, 97], 8)).collect();
        let buf = BatchBuffer::pack(&items).unwrap();
        for l in 0..2 {
            assert_eq!(buf.level_region(l).len(), 3 * 8);
            for (b, item) in items.iter().enumerate() {
                assert_eq!(&buf.level_region(l)[b * 8..(b + 1) * 8], item.row(l));
            }
        }
    }

    #[test]
    fn heterogeneous_items_are_rejected() {
        let a = poly(1, &[17, 97], 8);
        let b = poly(1, &[17], 8);
        assert!(matches!(BatchBuffer::pack(&[a, b]), Err(Error::Batch(_))));
        assert!(matches!(BatchBuffer::pack(&[]), Err(Error::Batch(_))));
    }

    #[test]
    fn reorder_moves_blocks() {
        // B=2, L+1=3, N=2
        let src: Vec<u32> = (0..12).collect();
        let out = reorder_layout(&src, 2, 3, 2);
        assert_eq!(out, vec![0, 1, 6, 7, 2, 3, 8, 9, 4, 5, 10, 11]);
        assert_eq!(reverse_reorder(&out, 2, 3, 2), src);
        assert_eq!(reorder_layout(&src, 1, 6, 2), src);
    }

    #[test]
    fn planner_bounds() {
        let params = CkksParams::preset("set_a").unwrap();
        let unit = working_set_bytes(&params, PlanOp::Ntt);
        assert_eq!(
            plan_batch_size(unit, &params, PlanOp::Ntt, 1024).unwrap(),
            1
        );
        assert_eq!(
            plan_batch_size(3 * unit, &params, PlanOp::Ntt, 1024).unwrap(),
            2
        );
        assert_eq!(
            plan_batch_size(u64::MAX, &params, PlanOp::Ntt, 1024).unwrap(),
            1024
        );
        assert!(matches!(
            plan_batch_size(unit - 1, &params, PlanOp::Ntt, 1024),
            Err(Error::Capacity(_))
        ));
    }
}
