//! Reference implementations shared by the integration tests. Everything here is
//! written from the definitions with plain `%` arithmetic and shares no code with
//! the library's fast paths.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

pub fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    (a as u128 * b as u128 % q as u128) as u64
}

pub fn powmod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, q);
        }
        base = mulmod(base, base, q);
        exp >>= 1;
    }
    acc
}

pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `psi` has multiplicative order exactly `2n`.
pub fn is_primitive_2n_root(psi: u64, n: usize, q: u64) -> bool {
    powmod(psi, n as u64, q) == q - 1
}

/// `A_k = sum_j a_j psi^{(2k+1) j} mod q`, straight from the definition.
pub fn direct_ntt(a: &[u32], q: u32, psi: u32) -> Vec<u32> {
    let n = a.len();
    let two_n = 2 * n;
    let pows: Vec<u64> = (0..two_n as u64)
        .map(|e| powmod(psi as u64, e, q as u64))
        .collect();
    (0..n)
        .map(|k| {
            let step = 2 * k + 1;
            let mut e = 0usize;
            let mut acc = 0u128;
            for &x in a {
                acc += x as u128 * pows[e] as u128;
                e = (e + step) % two_n;
            }
            (acc % q as u128) as u32
        })
        .collect()
}

/// `a * b mod (X^n + 1, q)`.
pub fn schoolbook_negacyclic(a: &[u32], b: &[u32], q: u32) -> Vec<u32> {
    let n = a.len();
    let q = q as u64;
    let mut out = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            let p = mulmod(a[i] as u64, b[j] as u64, q);
            let k = i + j;
            if k < n {
                out[k] = (out[k] + p) % q;
            } else {
                out[k - n] = (out[k - n] + q - p) % q;
            }
        }
    }
    out.into_iter().map(|x| x as u32).collect()
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, q: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

/// Uniform points of the closed unit disk.
pub fn unit_disk<R: Rng>(rng: &mut R, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            let r = rng.gen::<f64>().sqrt();
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r, t)
        })
        .collect()
}

/// Plain row-major `m x k` by `k x n` product over the integers.
pub fn matmul_i64(a: &[i64], b: &[i64], m: usize, k: usize, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; m * n];
    for i in 0..m {
        for t in 0..k {
            for j in 0..n {
                out[i * n + j] += a[i * k + t] * b[t * n + j];
            }
        }
    }
    out
}
