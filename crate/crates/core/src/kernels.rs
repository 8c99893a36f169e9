//! Element-wise kernels over RNS polynomials. Each row is processed independently.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modarith::Modulus;
use crate::rns::{Domain, RnsPolynomial};

pub use crate::rns::{fast_basis_conv as conv, BasisConverter};

fn check_pair(a: &RnsPolynomial, b: &RnsPolynomial) -> Result<()> {
    if a.n() != b.n() || a.basis() != b.basis() {
        return Err(Error::Basis(format!(
            "operands over {:?} (n={}) and {:?} (n={})",
            a.basis(),
            a.n(),
            b.basis(),
            b.n()
        )));
    }
    b.domain().expect(a.domain())
}

fn zip_rows(
    a: &RnsPolynomial,
    b: &RnsPolynomial,
    f: impl Fn(&Modulus, u32, u32) -> u32 + Sync,
) -> Result<RnsPolynomial> {
    check_pair(a, b)?;
    let mut out = a.clone();
    out.par_rows_mut().enumerate().for_each(|(i, (q, row))| {
        let m = Modulus::new(q);
        for (x, &y) in row.iter_mut().zip(b.row(i)) {
            *x = f(&m, *x, y);
        }
    });
    Ok(out)
}

/// Hadamard product `c_i = a_i * b_i mod q`.
pub fn hada_mult(a: &RnsPolynomial, b: &RnsPolynomial) -> Result<RnsPolynomial> {
    zip_rows(a, b, |m, x, y| m.mul(x, y))
}

pub fn ele_add(a: &RnsPolynomial, b: &RnsPolynomial) -> Result<RnsPolynomial> {
    zip_rows(a, b, |m, x, y| m.add(x, y))
}

pub fn ele_sub(a: &RnsPolynomial, b: &RnsPolynomial) -> Result<RnsPolynomial> {
    zip_rows(a, b, |m, x, y| m.sub(x, y))
}

pub fn ele_neg(a: &RnsPolynomial) -> RnsPolynomial {
    let mut out = a.clone();
    out.par_rows_mut().for_each(|(q, row)| {
        let m = Modulus::new(q);
        row.iter_mut().for_each(|x| *x = m.neg(*x));
    });
    out
}

/// Multiply row `i` by `scalars[i]`.
pub fn mul_row_scalars(a: &RnsPolynomial, scalars: &[u32]) -> Result<RnsPolynomial> {
    if scalars.len() != a.row_count() {
        return Err(Error::Shape(format!(
            "{} scalars for {} rows",
            scalars.len(),
            a.row_count()
        )));
    }
    let mut out = a.clone();
    out.par_rows_mut().enumerate().for_each(|(i, (q, row))| {
        let m = Modulus::new(q);
        let s = scalars[i] % q;
        row.iter_mut().for_each(|x| *x = m.mul(*x, s));
    });
    Ok(out)
}

/// Galois element `5^r mod 2n`.
pub fn galois_element(r: usize, n: usize) -> usize {
    let two_n = 2 * n as u64;
    let mut g = 1u64;
    for _ in 0..r {
        g = g * 5 % two_n;
    }
    g as usize
}

/// `pi_r(x) = ([5^r (2x+1)]_{2n} - 1) / 2` for every x in [0, n).
pub fn frobenius_permutation(r: usize, n: usize) -> Vec<usize> {
    let g = galois_element(r, n);
    let two_n = 2 * n;
    (0..n).map(|x| (g * (2 * x + 1) % two_n - 1) / 2).collect()
}

/// Frobenius map by index `r` on an NTT-domain polynomial: output position
/// `pi_r(i)` receives input position `i`.
pub fn forbenius_map(a: &RnsPolynomial, r: usize) -> Result<RnsPolynomial> {
    a.domain().expect(Domain::Ntt)?;
    let n = a.n();
    if r >= n / 2 {
        return Err(Error::Range(format!(
            "rotation index {r} not below {}",
            n / 2
        )));
    }
    let perm = frobenius_permutation(r, n);
    let mut out = a.clone();
    out.par_rows_mut().enumerate().for_each(|(i, (_, row))| {
        let src = a.row(i);
        for (x, &p) in src.iter().zip(&perm) {
            row[p] = *x;
        }
    });
    Ok(out)
}

/// The automorphism `X -> X^{-1}`.
///
/// Coefficient domain: `a'_0 = a_0`, `a'_i = -a_{n-i}`. NTT domain: index reversal.
pub fn conjugate(a: &RnsPolynomial) -> RnsPolynomial {
    let n = a.n();
    let domain = a.domain();
    let mut out = a.clone();
    out.par_rows_mut().enumerate().for_each(|(i, (q, row))| {
        let src = a.row(i);
        match domain {
            Domain::Coefficient => {
                let m = Modulus::new(q);
                row[0] = src[0];
                for j in 1..n {
                    row[j] = m.neg(src[n - j]);
                }
            }
            Domain::Ntt => {
                for j in 0..n {
                    row[j] = src[n - 1 - j];
                }
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(q: u32, vals: &[u32], domain: Domain) -> RnsPolynomial {
        RnsPolynomial::from_rows(vals.len(), &[q], domain, vals.to_vec()).unwrap()
    }

    #[test]
    fn hadamard_small() {
        let a = poly(7, &[2, 3], Domain::Ntt);
        let b = poly(7, &[4, 5], Domain::Ntt);
        assert_eq!(hada_mult(&a, &b).unwrap().row(0), &[1, 1]);
        let ones = poly(7, &[1, 1], Domain::Ntt);
        assert_eq!(hada_mult(&a, &ones).unwrap(), a);
    }

    #[test]
    fn add_sub_identities() {
        let a = poly(7, &[2, 6, 0], Domain::Coefficient);
        let z = RnsPolynomial::zero(3, &[7], Domain::Coefficient);
        assert_eq!(ele_add(&a, &z).unwrap(), a);
        assert!(ele_sub(&a, &a).unwrap().is_zero());
        assert_eq!(ele_add(&a, &ele_neg(&a)).unwrap(), z);
    }

    #[test]
    fn mismatches() {
        let a = poly(7, &[2, 6], Domain::Coefficient);
        let b = poly(11, &[2, 6], Domain::Coefficient);
        let c = poly(7, &[2, 6], Domain::Ntt);
        assert!(matches!(ele_add(&a, &b), Err(Error::Basis(_))));
        assert!(matches!(hada_mult(&a, &c), Err(Error::Domain { .. })));
        assert!(matches!(forbenius_map(&a, 0), Err(Error::Domain { .. })));
        assert!(matches!(forbenius_map(&c, 1), Err(Error::Range(_))));
    }

    #[test]
    fn frobenius_zero_is_identity() {
        assert_eq!(frobenius_permutation(0, 16), (0..16).collect::<Vec<_>>());
        let a = poly(17, &[1, 2, 3, 4], Domain::Ntt);
        assert_eq!(forbenius_map(&a, 0).unwrap(), a);
    }

    #[test]
    fn conjugate_coefficients() {
        let a = poly(17, &[1, 2, 3, 4], Domain::Coefficient);
        assert_eq!(conjugate(&a).row(0), &[1, 13, 14, 15]);
        assert_eq!(conjugate(&conjugate(&a)), a);
        let z = RnsPolynomial::zero(4, &[17], Domain::Ntt);
        assert_eq!(conjugate(&z), z);
    }
}
