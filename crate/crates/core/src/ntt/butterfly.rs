//! In-place radix-2 reference transform: Cooley-Tukey forward, Gentleman-Sande inverse.

use crate::modarith::Modulus;

/// Powers `root^{bitrev(i)}` for `i < n`.
pub(crate) fn bit_reversed_powers(m: &Modulus, root: u32, n: usize) -> Vec<u32> {
    let bits = n.trailing_zeros();
    let mut natural = Vec::with_capacity(n);
    let mut x = 1u32;
    for _ in 0..n {
        natural.push(x);
        x = m.mul(x, root);
    }
    (0..n).map(|i| natural[bit_reverse(i, bits)]).collect()
}

#[inline]
pub(crate) fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        return 0;
    }
    i.reverse_bits() >> (usize::BITS - bits)
}

pub(crate) fn bit_reverse_permute(a: &mut [u32]) {
    let bits = a.len().trailing_zeros();
    for i in 0..a.len() {
        let j = bit_reverse(i, bits);
        if i < j {
            a.swap(i, j);
        }
    }
}

/// Forward transform; natural-order input, natural-order output.
pub(crate) fn forward(a: &mut [u32], m: &Modulus, psi_rev: &[u32]) {
    let n = a.len();
    let mut t = n;
    let mut groups = 1;
    while groups < n {
        t >>= 1;
        for i in 0..groups {
            let s = psi_rev[groups + i];
            let (lo, hi) = a[2 * i * t..2 * i * t + 2 * t].split_at_mut(t);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let x = *u;
                let y = m.mul(*v, s);
                *u = m.add(x, y);
                *v = m.sub(x, y);
            }
        }
        groups <<= 1;
    }
    bit_reverse_permute(a);
}

/// Inverse transform including the final `n^{-1}` scaling.
pub(crate) fn inverse(a: &mut [u32], m: &Modulus, psi_inv_rev: &[u32], n_inv: u32) {
    let n = a.len();
    bit_reverse_permute(a);
    let mut t = 1;
    let mut groups = n;
    while groups > 1 {
        let h = groups >> 1;
        for i in 0..h {
            let s = psi_inv_rev[h + i];
            let (lo, hi) = a[2 * i * t..2 * i * t + 2 * t].split_at_mut(t);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let x = *u;
                let y = *v;
                *u = m.add(x, y);
                *v = m.mul(m.sub(x, y), s);
            }
        }
        t <<= 1;
        groups = h;
    }
    for x in a.iter_mut() {
        *x = m.mul(*x, n_inv);
    }
}
