//! Word-size modular arithmetic for primes below 2^32.

use serde::{Deserialize, Serialize};

/// A modulus `q < 2^32` with a precomputed Barrett constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "u32", into = "u32")]
pub struct Modulus {
    q: u32,
    // floor(2^64 / q)
    ratio: u64,
}

impl From<u32> for Modulus {
    fn from(q: u32) -> Self {
        Modulus::new(q)
    }
}

impl From<Modulus> for u32 {
    fn from(m: Modulus) -> u32 {
        m.q
    }
}

impl Modulus {
    /// Panics if `q < 2`.
    pub fn new(q: u32) -> Self {
        assert!(q >= 2, "modulus must be at least 2");
        let ratio = ((1u128 << 64) / q as u128) as u64;
        Self { q, ratio }
    }

    #[inline]
    pub fn value(&self) -> u32 {
        self.q
    }

    /// Bit length of q.
    pub fn bits(&self) -> u32 {
        32 - self.q.leading_zeros()
    }

    /// Barrett reduction of an arbitrary 64-bit value.
    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        let qhat = ((x as u128 * self.ratio as u128) >> 64) as u64;
        let mut r = x - qhat * self.q as u64;
        if r >= self.q as u64 {
            r -= self.q as u64;
        }
        debug_assert!(r < self.q as u64);
        r as u32
    }

    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u32 {
        (x % self.q as u128) as u32
    }

    /// Reduce a signed value to its canonical residue.
    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u32 {
        x.rem_euclid(self.q as i64) as u32
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u32 {
        x.rem_euclid(self.q as i128) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        if s >= self.q as u64 {
            (s - self.q as u64) as u32
        } else {
            s as u32
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.q as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut result = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    /// Inverse by Fermat's little theorem; only meaningful for prime q and a != 0.
    pub fn inv(&self, a: u32) -> u32 {
        self.pow(a, self.q as u64 - 2)
    }

    /// Centered representative in (-q/2, q/2].
    #[inline]
    pub fn center(&self, a: u32) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }
}
