//! Secret, error and mask distributions.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::rns::{Domain, RnsPolynomial};

pub const SIGMA: f64 = 3.2;
pub const TAIL_CUT: f64 = 6.0 * SIGMA;

/// Ternary vector with exactly `h` nonzero entries.
pub fn ternary_fixed_weight<R: Rng + ?Sized>(n: usize, h: usize, rng: &mut R) -> Vec<i64> {
    let mut out = vec![0i64; n];
    for i in sample(rng, n, h.min(n)) {
        out[i] = if rng.gen::<bool>() { 1 } else { -1 };
    }
    out
}

/// Ternary vector with P(0) = 1/2, P(+1) = P(-1) = 1/4.
pub fn ternary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i64> {
    (0..n)
        .map(|_| match rng.gen_range(0..4u8) {
            0 => -1,
            1 => 1,
            _ => 0,
        })
        .collect()
}

/// Rounded Gaussian with standard deviation [`SIGMA`], truncated at 6 sigma.
pub fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i64> {
    let normal = Normal::new(0.0, SIGMA).expect("valid sigma");
    (0..n)
        .map(|_| loop {
            let x: f64 = normal.sample(rng);
            if x.abs() <= TAIL_CUT {
                break x.round() as i64;
            }
        })
        .collect()
}

/// Uniform residues in every row; uniform in either domain.
pub fn uniform<R: Rng + ?Sized>(
    n: usize,
    basis: &[u32],
    domain: Domain,
    rng: &mut R,
) -> RnsPolynomial {
    let mut data = Vec::with_capacity(n * basis.len());
    for &q in basis {
        data.extend((0..n).map(|_| rng.gen_range(0..q)));
    }
    RnsPolynomial::from_rows(n, basis, domain, data).expect("residues in range")
}
