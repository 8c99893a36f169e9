//! Prime search, primitive roots and negacyclic roots of unity.

use crate::error::{Error, Result};
use crate::modarith::Modulus;

const MR_WITNESSES: [u64; 7] = [2, 3, 5, 7, 11, 13, 17];

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Miller-Rabin with a fixed witness set; deterministic for all n < 3.4e14.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of the multiplicative group mod the prime `q`.
pub fn primitive_root(q: u32) -> Result<u32> {
    if !is_prime(q as u64) {
        return Err(Error::Parameter(format!("{q} is not prime")));
    }
    if q == 2 {
        return Ok(1);
    }
    let m = Modulus::new(q);
    let factors = prime_factors(q as u64 - 1);
    (2..q)
        .find(|&g| factors.iter().all(|&f| m.pow(g, (q as u64 - 1) / f) != 1))
        .ok_or_else(|| Error::Parameter(format!("no primitive root mod {q}")))
}

/// A primitive 2n-th root of unity mod `q`, derived from the smallest primitive root
/// as `g^((q-1)/2n)`.
pub fn find_negacyclic_root(q: u32, n: usize) -> Result<u32> {
    let two_n = 2 * n as u64;
    if !n.is_power_of_two() || !(q as u64 - 1).is_multiple_of(two_n) {
        return Err(Error::Parameter(format!(
            "{q} is not congruent to 1 mod {two_n}"
        )));
    }
    let g = primitive_root(q)?;
    let psi = Modulus::new(q).pow(g, (q as u64 - 1) / two_n);
    Ok(psi)
}

/// Descending search below `2^bits` over candidates `== 1 (mod 2n)`, skipping
/// anything in `exclude`. Returns exactly `count` primes of exactly `bits` bits.
pub fn search_primes(n: usize, bits: u32, count: usize, exclude: &[u32]) -> Result<Vec<u32>> {
    if bits > 32 {
        return Err(Error::Range(format!("prime width {bits} exceeds 32 bits")));
    }
    if !n.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "degree {n} is not a power of two"
        )));
    }
    let two_n = 2 * n as u64;
    let top = 1u64 << bits;
    let floor = 1u64 << (bits - 1);
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    if two_n >= top {
        return Err(Error::Parameter(format!(
            "no {bits}-bit primes congruent to 1 mod {two_n}"
        )));
    }
    let mut candidate = top - two_n + 1;
    while candidate >= floor {
        if is_prime(candidate) && !exclude.contains(&(candidate as u32)) {
            out.push(candidate as u32);
            if out.len() == count {
                return Ok(out);
            }
        }
        if candidate < two_n {
            break;
        }
        candidate -= two_n;
    }
    Err(Error::Parameter(format!(
        "only {} of {count} requested {bits}-bit primes congruent to 1 mod {two_n} exist",
        out.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        let primes: Vec<u64> = (0..60).filter(|&x| is_prime(x)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(!is_prime(561)); // Carmichael
        assert!(is_prime(4294967291));
    }

    #[test]
    fn root_for_17() {
        assert_eq!(primitive_root(17).unwrap(), 3);
        assert_eq!(find_negacyclic_root(17, 4).unwrap(), 9);
        assert!(find_negacyclic_root(17, 16).is_err());
    }

    #[test]
    fn search_rejects_wide() {
        assert!(matches!(
            search_primes(16, 33, 1, &[]),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn search_exhaustion() {
        // 2n = 2^15: exactly 19 qualifying 23-bit primes exist.
        assert_eq!(search_primes(1 << 14, 23, 19, &[]).unwrap().len(), 19);
        assert!(matches!(
            search_primes(1 << 14, 23, 20, &[]),
            Err(Error::Parameter(_))
        ));
    }
}
