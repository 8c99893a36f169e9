//! Byte-segmented matrix products emulating 8-bit-operand / 32-bit-accumulator units.
//!
//! A 32-bit matrix `M` is split into four byte planes with `M = sum_b 2^(8b) M_b`.
//! Products of two split matrices become 16 plane-by-plane products whose entries
//! stay below `k * 255^2`; for inner dimension `k <= 2^15` that is below 2^31. The
//! partials are then recombined modulo q with the weights `2^(8(a+b))`.
//!
//! Pipeline for one transform of an `n1 x n2` input `X`:
//!   1. segment `X` into column-major planes `T_b`
//!   2. `O_ab = W1_a * T_b` (16 byte products)
//!   3. fuse the `O_ab` mod q, multiply element-wise by `w2`, re-segment into `T'_b`
//!   4. `O'_ab = T'_b * W3_a` (16 byte products)
//!   5. fuse the `O'_ab` mod q into a row-major result

use rayon::prelude::*;

use super::gemm::read_out;
use super::plan::{NttPlan, MAX_INNER_DIM};
use super::twiddle::TwiddleMatrices;
use crate::error::{Error, Result};
use crate::modarith::Modulus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    RowMajor,
    ColMajor,
}

/// A matrix of unsigned bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteMatrix {
    rows: usize,
    cols: usize,
    layout: Layout,
    data: Vec<u8>,
}

impl ByteMatrix {
    pub fn new(rows: usize, cols: usize, layout: Layout, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} bytes for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            layout,
            data,
        })
    }

    pub fn identity(n: usize, layout: Layout) -> Self {
        let mut data = vec![0u8; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self {
            rows: n,
            cols: n,
            layout,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn layout(&self) -> Layout {
        self.layout
    }
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        match self.layout {
            Layout::RowMajor => self.data[i * self.cols + j],
            Layout::ColMajor => self.data[j * self.rows + i],
        }
    }

    /// Same matrix stored in `layout` (a transposed copy when it differs).
    pub fn to_layout(&self, layout: Layout) -> ByteMatrix {
        if layout == self.layout {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.data.len());
        match layout {
            Layout::RowMajor => {
                for i in 0..self.rows {
                    data.extend((0..self.cols).map(|j| self.get(i, j)));
                }
            }
            Layout::ColMajor => {
                for j in 0..self.cols {
                    data.extend((0..self.rows).map(|i| self.get(i, j)));
                }
            }
        }
        ByteMatrix {
            rows: self.rows,
            cols: self.cols,
            layout,
            data,
        }
    }

    fn max_element(&self) -> u8 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

/// Row-major matrix of signed 32-bit accumulators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct I32Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i32>,
}

impl I32Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }
}

/// Counters gathered from instrumented byte products.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TcuProbe {
    pub gemm_calls: u64,
    pub multiplies: u64,
    pub max_operand: u32,
    /// Largest accumulator value reached (exact, from a 64-bit shadow sum).
    pub max_accumulator: i64,
    /// Outputs whose exact value does not fit a signed 32-bit accumulator.
    pub accumulator_violations: u64,
    /// Multiplies with an operand of 2^8 or more.
    pub operand_violations: u64,
}

impl TcuProbe {
    pub fn merge(&mut self, other: &TcuProbe) {
        self.gemm_calls += other.gemm_calls;
        self.multiplies += other.multiplies;
        self.max_operand = self.max_operand.max(other.max_operand);
        self.max_accumulator = self.max_accumulator.max(other.max_accumulator);
        self.accumulator_violations += other.accumulator_violations;
        self.operand_violations += other.operand_violations;
    }

    pub fn clean(&self) -> bool {
        self.accumulator_violations == 0 && self.operand_violations == 0
    }
}

/// Split a row-major `rows x cols` u32 matrix into four byte planes; plane `b`
/// holds bits `8b..8b+8` of every element.
pub fn segment_matrix(m: &[u32], rows: usize, cols: usize, layout: Layout) -> [ByteMatrix; 4] {
    assert_eq!(m.len(), rows * cols, "matrix shape");
    std::array::from_fn(|b| {
        let shift = 8 * b;
        let data = match layout {
            Layout::RowMajor => m.iter().map(|&x| (x >> shift) as u8).collect(),
            Layout::ColMajor => {
                let mut d = Vec::with_capacity(m.len());
                for j in 0..cols {
                    d.extend((0..rows).map(|i| (m[i * cols + j] >> shift) as u8));
                }
                d
            }
        };
        ByteMatrix {
            rows,
            cols,
            layout,
            data,
        }
    })
}

/// Inverse of [`segment_matrix`], returning a row-major u32 matrix.
pub fn fuse_planes(planes: &[ByteMatrix; 4]) -> Vec<u32> {
    let (rows, cols) = (planes[0].rows, planes[0].cols);
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(
                (0..4)
                    .map(|b| (planes[b].get(i, j) as u32) << (8 * b))
                    .sum(),
            );
        }
    }
    out
}

fn check_shapes(a: &ByteMatrix, b: &ByteMatrix) -> Result<()> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if a.cols > MAX_INNER_DIM {
        return Err(Error::OverflowRisk {
            inner: a.cols,
            limit: MAX_INNER_DIM,
        });
    }
    Ok(())
}

/// Exact product of two byte matrices with 32-bit signed accumulation.
///
/// No modular reduction happens here; outputs may exceed any modulus.
pub fn tcu_gemm(a: &ByteMatrix, b: &ByteMatrix) -> Result<I32Matrix> {
    check_shapes(a, b)?;
    let a = a.to_layout(Layout::RowMajor);
    let b = b.to_layout(Layout::ColMajor);
    let k = a.cols;
    let mut out = I32Matrix::zero(a.rows, b.cols);
    for (i, out_row) in out.data.chunks_mut(b.cols.max(1)).enumerate() {
        let a_row = &a.data[i * k..(i + 1) * k];
        for (j, o) in out_row.iter_mut().enumerate() {
            let b_col = &b.data[j * k..(j + 1) * k];
            *o = dot_u8(a_row, b_col);
        }
    }
    Ok(out)
}

#[inline]
fn dot_u8(x: &[u8], y: &[u8]) -> i32 {
    x.iter()
        .zip(y)
        .fold(0i32, |s, (&p, &q)| s.wrapping_add(p as i32 * q as i32))
}

/// [`tcu_gemm`] plus a 64-bit shadow computation recording accumulator extremes.
pub fn tcu_gemm_probed(a: &ByteMatrix, b: &ByteMatrix, probe: &mut TcuProbe) -> Result<I32Matrix> {
    let out = tcu_gemm(a, b)?;
    let ar = a.to_layout(Layout::RowMajor);
    let bc = b.to_layout(Layout::ColMajor);
    let k = ar.cols;
    probe.gemm_calls += 1;
    probe.multiplies += (ar.rows * bc.cols * k) as u64;
    let max_op = ar.max_element().max(bc.max_element()) as u32;
    probe.max_operand = probe.max_operand.max(max_op);
    if max_op >= 256 {
        probe.operand_violations += 1;
    }
    for i in 0..ar.rows {
        let a_row = &ar.data[i * k..(i + 1) * k];
        for j in 0..bc.cols {
            let b_col = &bc.data[j * k..(j + 1) * k];
            let exact: i64 = a_row
                .iter()
                .zip(b_col)
                .map(|(&p, &q)| p as i64 * q as i64)
                .sum();
            probe.max_accumulator = probe.max_accumulator.max(exact);
            if exact > i32::MAX as i64 || exact != out.data[i * bc.cols + j] as i64 {
                probe.accumulator_violations += 1;
            }
        }
    }
    Ok(out)
}

/// `sum_{a,b} (o_ab mod q) * 2^(8(a+b)) mod q`, element-wise, for partials indexed
/// `a * 4 + b`. Returns a row-major u32 matrix.
pub fn fuse_partials(o: &[I32Matrix], q: &Modulus) -> Vec<u32> {
    assert_eq!(o.len(), 16, "expected 16 partial products");
    let len = o[0].data.len();
    let shifts: [u32; 7] = std::array::from_fn(|s| q.pow(2, 8 * s as u64));
    let mut out = vec![0u32; len];
    for (e, dst) in out.iter_mut().enumerate() {
        let mut acc = 0u64;
        for (s, &w) in shifts.iter().enumerate() {
            let mut class = 0u64;
            for a in 0..4usize {
                if s >= a && s - a < 4 {
                    // accumulators are non-negative by construction
                    class += o[a * 4 + (s - a)].data[e] as u32 as u64;
                }
            }
            acc += q.mul(q.reduce(class), w) as u64;
        }
        *dst = q.reduce(acc);
    }
    out
}

/// `(fused .* w2) mod q`, re-segmented into column-major planes.
pub fn hadamard_stage(
    fused: &[u32],
    w2: &[u32],
    rows: usize,
    cols: usize,
    q: &Modulus,
) -> Result<[ByteMatrix; 4]> {
    if fused.len() != rows * cols || w2.len() != rows * cols {
        return Err(Error::Shape(format!(
            "hadamard operands {} and {} for {rows}x{cols}",
            fused.len(),
            w2.len()
        )));
    }
    let prod: Vec<u32> = fused.iter().zip(w2).map(|(&x, &w)| q.mul(x, w)).collect();
    Ok(segment_matrix(&prod, rows, cols, Layout::ColMajor))
}

/// Byte planes of the two twiddle matrices that enter byte products: `w1` as the
/// row-major left operand of stage 2, `w3` as the column-major right operand of stage 4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedTwiddles {
    pub w1: [ByteMatrix; 4],
    pub w3: [ByteMatrix; 4],
}

pub fn segment_twiddles(tw: &TwiddleMatrices) -> SegmentedTwiddles {
    let NttPlan { n1, n2, .. } = tw.plan;
    SegmentedTwiddles {
        w1: segment_matrix(&tw.w1, n1, n1, Layout::RowMajor),
        w3: segment_matrix(&tw.w3, n2, n2, Layout::ColMajor),
    }
}

fn gemm_maybe_probed(
    a: &ByteMatrix,
    b: &ByteMatrix,
    probe: Option<&mut TcuProbe>,
) -> Result<I32Matrix> {
    match probe {
        Some(p) => tcu_gemm_probed(a, b, p),
        None => tcu_gemm(a, b),
    }
}

/// Runs the 16 independent plane products; `run(a, b)` computes partial `a * 4 + b`.
/// Any execution order yields the same partials.
fn partial_products<F>(run: F, probe: Option<&mut TcuProbe>) -> Result<Vec<I32Matrix>>
where
    F: Fn(usize, usize, Option<&mut TcuProbe>) -> Result<I32Matrix> + Sync,
{
    let probing = probe.is_some();
    let results: Vec<(I32Matrix, TcuProbe)> = (0..16usize)
        .into_par_iter()
        .map(|idx| {
            let mut local = TcuProbe::default();
            let m = run(idx / 4, idx % 4, probing.then_some(&mut local))?;
            Ok((m, local))
        })
        .collect::<Result<_>>()?;
    if let Some(p) = probe {
        for (_, local) in &results {
            p.merge(local);
        }
    }
    Ok(results.into_iter().map(|(m, _)| m).collect())
}

/// Five-stage transform of one row (see module docs).
pub(crate) fn transform(
    input: &[u32],
    seg: &SegmentedTwiddles,
    tw: &TwiddleMatrices,
    q: &Modulus,
    out_scale: Option<u32>,
    mut probe: Option<&mut TcuProbe>,
) -> Result<Vec<u32>> {
    let NttPlan { n1, n2, .. } = tw.plan;
    // Stage 1
    let t = segment_matrix(input, n1, n2, Layout::ColMajor);
    // Stage 2
    let o = partial_products(
        |a, b, p| gemm_maybe_probed(&seg.w1[a], &t[b], p),
        probe.as_deref_mut(),
    )?;
    // Stage 3
    let fused = fuse_partials(&o, q);
    let t2 = hadamard_stage(&fused, &tw.w2, n1, n2, q)?;
    // Stage 4
    let o2 = partial_products(
        |a, b, p| gemm_maybe_probed(&t2[b], &seg.w3[a], p),
        probe,
    )?;
    // Stage 5
    let d = fuse_partials(&o2, q);
    Ok(read_out(&d, n1, n2, q, out_scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_slicing() {
        let planes = segment_matrix(&[0x12345678], 1, 1, Layout::RowMajor);
        let bytes: Vec<u8> = planes.iter().map(|p| p.get(0, 0)).collect();
        assert_eq!(bytes, vec![0x78, 0x56, 0x34, 0x12]);
        let zero = segment_matrix(&[0], 1, 1, Layout::ColMajor);
        assert!(zero.iter().all(|p| p.get(0, 0) == 0));
    }

    #[test]
    fn small_elements_fill_only_plane_zero() {
        let m: Vec<u32> = (0..12).map(|x| x * 20).collect();
        let planes = segment_matrix(&m, 3, 4, Layout::ColMajor);
        assert!(planes[1..].iter().all(|p| p.data().iter().all(|&x| x == 0)));
        assert_eq!(fuse_planes(&planes), m);
    }

    #[test]
    fn boundary_roundtrip() {
        let m = vec![0, 1, 255, 1 << 16, u32::MAX, 0x8000_0000];
        for layout in [Layout::RowMajor, Layout::ColMajor] {
            assert_eq!(fuse_planes(&segment_matrix(&m, 2, 3, layout)), m);
        }
    }

    #[test]
    fn gemm_identity_and_single() {
        let m = ByteMatrix::new(3, 3, Layout::RowMajor, (1..=9).collect()).unwrap();
        let out = tcu_gemm(&ByteMatrix::identity(3, Layout::RowMajor), &m).unwrap();
        assert_eq!(out.data, (1..=9).collect::<Vec<i32>>());
        let x = ByteMatrix::new(1, 1, Layout::RowMajor, vec![255]).unwrap();
        assert_eq!(tcu_gemm(&x, &x).unwrap().data, vec![65025]);
    }

    #[test]
    fn gemm_errors() {
        let a = ByteMatrix::new(2, 3, Layout::RowMajor, vec![0; 6]).unwrap();
        assert!(matches!(tcu_gemm(&a, &a), Err(Error::Shape(_))));
        let wide = ByteMatrix::new(
            1,
            MAX_INNER_DIM + 1,
            Layout::RowMajor,
            vec![0; MAX_INNER_DIM + 1],
        )
        .unwrap();
        let tall = ByteMatrix::new(
            MAX_INNER_DIM + 1,
            1,
            Layout::ColMajor,
            vec![0; MAX_INNER_DIM + 1],
        )
        .unwrap();
        assert!(matches!(
            tcu_gemm(&wide, &tall),
            Err(Error::OverflowRisk { .. })
        ));
    }

    #[test]
    fn worst_case_accumulator_fits() {
        let k = MAX_INNER_DIM;
        let a = ByteMatrix::new(1, k, Layout::RowMajor, vec![255; k]).unwrap();
        let b = ByteMatrix::new(k, 1, Layout::ColMajor, vec![255; k]).unwrap();
        let mut probe = TcuProbe::default();
        let out = tcu_gemm_probed(&a, &b, &mut probe).unwrap();
        assert_eq!(out.data[0] as i64, k as i64 * 65025);
        assert!(probe.clean());
        assert!(probe.max_accumulator < 1 << 31);
    }

    #[test]
    fn fuse_trivial_cases() {
        let q = Modulus::new(97);
        let zeros = vec![I32Matrix::zero(2, 2); 16];
        assert_eq!(fuse_partials(&zeros, &q), vec![0; 4]);
        let mut only00 = zeros.clone();
        only00[0].data = vec![100, 200, 5, 96];
        assert_eq!(fuse_partials(&only00, &q), vec![3, 6, 5, 96]);
    }

    #[test]
    fn hadamard_trivial_cases() {
        let q = Modulus::new(97);
        let fused = vec![1, 50, 96, 0];
        let planes = hadamard_stage(&fused, &[1; 4], 2, 2, &q).unwrap();
        assert_eq!(fuse_planes(&planes), fused);
        assert!(planes.iter().all(|p| p.layout() == Layout::ColMajor));
        let zero = hadamard_stage(&[0; 4], &[5; 4], 2, 2, &q).unwrap();
        assert!(zero.iter().all(|p| p.data().iter().all(|&x| x == 0)));
        assert!(hadamard_stage(&[0; 3], &[5; 4], 2, 2, &q).is_err());
    }
}
