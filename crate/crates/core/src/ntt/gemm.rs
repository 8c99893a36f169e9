//! Matrix products over Z_q with 64-bit accumulation and deferred reduction.

use super::plan::NttPlan;
use super::twiddle::TwiddleMatrices;
use crate::modarith::Modulus;

/// Number of products that can be added to a reduced accumulator before it must be
/// reduced again: the largest `t` with `(q-1) + t (q-1)^2 <= 2^64 - 1`.
pub fn reduction_interval(q: u32) -> usize {
    let r = (q - 1) as u128;
    if r == 0 {
        return usize::MAX;
    }
    let t = (u64::MAX as u128 - r) / (r * r);
    t.min(usize::MAX as u128) as usize
}

/// `(a * b) mod q` for `a: m x k` and `b: k x n`, row-major.
pub fn gemm_mod(a: &[u32], b: &[u32], m: usize, k: usize, n: usize, q: &Modulus) -> Vec<u32> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let interval = reduction_interval(q.value()).max(1);
    let mut out = vec![0u32; m * n];
    let mut acc = vec![0u64; n];
    for (i, out_row) in out.chunks_mut(n).enumerate() {
        acc.fill(0);
        let a_row = &a[i * k..(i + 1) * k];
        let mut since_reduce = 0;
        for (l, &av) in a_row.iter().enumerate() {
            if since_reduce == interval {
                for x in acc.iter_mut() {
                    *x = q.reduce(*x) as u64;
                }
                since_reduce = 0;
            }
            let b_row = &b[l * n..(l + 1) * n];
            let av = av as u64;
            for (x, &bv) in acc.iter_mut().zip(b_row) {
                *x += av * bv as u64;
            }
            since_reduce += 1;
        }
        for (o, &x) in out_row.iter_mut().zip(&acc) {
            *o = q.reduce(x);
        }
    }
    out
}

/// `((w1 * X) .* w2) * w3` followed by the transposed read-out.
pub(crate) fn transform(
    input: &[u32],
    tw: &TwiddleMatrices,
    q: &Modulus,
    out_scale: Option<u32>,
) -> Vec<u32> {
    let NttPlan { n1, n2, .. } = tw.plan;
    let mut c = gemm_mod(&tw.w1, input, n1, n1, n2, q);
    for (x, &w) in c.iter_mut().zip(&tw.w2) {
        *x = q.mul(*x, w);
    }
    let d = gemm_mod(&c, &tw.w3, n1, n2, n2, q);
    read_out(&d, n1, n2, q, out_scale)
}

/// `out[k1 + n1*k2] = D[k1][k2]`, optionally scaled.
pub(crate) fn read_out(
    d: &[u32],
    n1: usize,
    n2: usize,
    q: &Modulus,
    out_scale: Option<u32>,
) -> Vec<u32> {
    let mut out = vec![0u32; n1 * n2];
    for k1 in 0..n1 {
        for k2 in 0..n2 {
            let v = d[k1 * n2 + k2];
            out[k1 + n1 * k2] = match out_scale {
                Some(s) => q.mul(v, s),
                None => v,
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals() {
        assert!(reduction_interval((1 << 30) - 1) >= 16);
        assert!(reduction_interval(1 << 24) >= 1 << 15);
        assert_eq!(reduction_interval(u32::MAX), 1);
    }

    #[test]
    fn small_product() {
        let q = Modulus::new(17);
        // [[1,2],[3,4]] * [[5,6],[7,8]] = [[19,22],[43,50]]
        let c = gemm_mod(&[1, 2, 3, 4], &[5, 6, 7, 8], 2, 2, 2, &q);
        assert_eq!(c, vec![2, 5, 9, 16]);
    }

    #[test]
    fn wide_primes_do_not_overflow() {
        let q = Modulus::new(4294967291); // largest 32-bit prime
        let k = 64;
        let a = vec![q.value() - 1; k];
        let b = vec![q.value() - 1; k];
        let c = gemm_mod(&a, &b, 1, k, 1, &q);
        // (-1)(-1) summed k times
        assert_eq!(c[0], k as u32);
    }
}
