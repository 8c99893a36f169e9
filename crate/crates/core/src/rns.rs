//! Residue-number-system polynomials and basis conversion.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modarith::Modulus;

/// Representation of the residue rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Coefficient,
    Ntt,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Coefficient => "coefficient",
            Domain::Ntt => "ntt",
        }
    }

    pub(crate) fn expect(self, expected: Domain) -> Result<()> {
        if self != expected {
            return Err(Error::Domain {
                expected: expected.name(),
                found: self.name(),
            });
        }
        Ok(())
    }
}

/// A degree-`n` polynomial stored as one row of residues per basis prime.
///
/// Rows are laid out contiguously: row `i` occupies `data[i*n..(i+1)*n]` and holds
/// residues modulo `basis[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPolynomial {
    n: usize,
    basis: Vec<u32>,
    domain: Domain,
    data: Vec<u32>,
}

impl RnsPolynomial {
    pub fn zero(n: usize, basis: &[u32], domain: Domain) -> Self {
        Self {
            n,
            basis: basis.to_vec(),
            domain,
            data: vec![0; n * basis.len()],
        }
    }

    /// Build from raw rows; every residue must be below its prime.
    pub fn from_rows(n: usize, basis: &[u32], domain: Domain, data: Vec<u32>) -> Result<Self> {
        if data.len() != n * basis.len() {
            return Err(Error::Shape(format!(
                "{} residues for {} rows of length {n}",
                data.len(),
                basis.len()
            )));
        }
        for (row, &q) in data.chunks(n.max(1)).zip(basis) {
            if let Some(bad) = row.iter().find(|&&x| x >= q) {
                return Err(Error::Range(format!("residue {bad} not below {q}")));
            }
        }
        Ok(Self {
            n,
            basis: basis.to_vec(),
            domain,
            data,
        })
    }

    /// Rows from signed small coefficients (e.g. ternary or Gaussian samples).
    pub fn from_signed(coeffs: &[i64], basis: &[u32]) -> Self {
        let n = coeffs.len();
        let mut data = Vec::with_capacity(n * basis.len());
        for &q in basis {
            let m = Modulus::new(q);
            data.extend(coeffs.iter().map(|&c| m.reduce_i64(c)));
        }
        Self {
            n,
            basis: basis.to_vec(),
            domain: Domain::Coefficient,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn basis(&self) -> &[u32] {
        &self.basis
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn row_count(&self) -> usize {
        self.basis.len()
    }
    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
    pub fn row_mut(&mut self, i: usize) -> &mut [u32] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    /// Each row paired with its modulus.
    pub fn rows(&self) -> impl Iterator<Item = (u32, &[u32])> {
        self.basis.iter().copied().zip(self.data.chunks(self.n))
    }

    pub fn par_rows_mut(&mut self) -> impl IndexedParallelIterator<Item = (u32, &mut [u32])> {
        let basis = &self.basis;
        self.data
            .par_chunks_mut(self.n)
            .enumerate()
            .map(move |(i, row)| (basis[i], row))
    }

    pub(crate) fn set_domain(&mut self, domain: Domain) {
        self.domain = domain;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Keep only the rows whose prime is in `primes` (in that order).
    pub fn select_rows(&self, primes: &[u32]) -> Result<Self> {
        let mut data = Vec::with_capacity(primes.len() * self.n);
        for p in primes {
            let i = self
                .basis
                .iter()
                .position(|b| b == p)
                .ok_or_else(|| Error::Basis(format!("prime {p} not in basis")))?;
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            n: self.n,
            basis: primes.to_vec(),
            domain: self.domain,
            data,
        })
    }

    /// The first `count` rows.
    pub fn truncate_rows(&self, count: usize) -> Self {
        Self {
            n: self.n,
            basis: self.basis[..count].to_vec(),
            domain: self.domain,
            data: self.data[..count * self.n].to_vec(),
        }
    }

    /// Concatenate the rows of two polynomials with disjoint bases.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.domain != other.domain {
            return Err(Error::Basis(
                "cannot concatenate incompatible polynomials".into(),
            ));
        }
        let mut basis = self.basis.clone();
        basis.extend_from_slice(&other.basis);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            n: self.n,
            basis,
            domain: self.domain,
            data,
        })
    }

    /// Debug dump: one CSV line per prime, `prime,c0,c1,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (q, row) in self.rows() {
            write!(out, "{q}").unwrap();
            for x in row {
                write!(out, ",{x}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Precomputed CRT constants for a basis.
#[derive(Debug, Clone)]
pub struct CrtBasis {
    primes: Vec<u32>,
    product: BigUint,
    // Q / q_i
    q_hat: Vec<BigUint>,
    // (Q / q_i)^{-1} mod q_i
    q_hat_inv: Vec<u32>,
}

impl CrtBasis {
    pub fn new(primes: &[u32]) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Parameter("empty RNS basis".into()));
        }
        let product: BigUint = primes.iter().map(|&q| BigUint::from(q)).product();
        let q_hat: Vec<BigUint> = primes.iter().map(|&q| &product / q).collect();
        let q_hat_inv = primes
            .iter()
            .zip(&q_hat)
            .map(|(&q, h)| {
                let m = Modulus::new(q);
                m.inv(biguint_mod(h, q))
            })
            .collect();
        Ok(Self {
            primes: primes.to_vec(),
            product,
            q_hat,
            q_hat_inv,
        })
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn product(&self) -> &BigUint {
        &self.product
    }

    /// Unique value in [0, Q) with the given residues.
    pub fn compose(&self, residues: &[u32]) -> BigUint {
        let mut acc = BigUint::zero();
        for (i, &r) in residues.iter().enumerate() {
            let m = Modulus::new(self.primes[i]);
            let t = m.mul(r, self.q_hat_inv[i]);
            if t != 0 {
                acc += &self.q_hat[i] * t;
            }
        }
        acc % &self.product
    }

    /// Representative in (-Q/2, Q/2].
    pub fn compose_centered(&self, residues: &[u32]) -> BigInt {
        let v = self.compose(residues);
        let half = &self.product >> 1u32;
        if v > half {
            BigInt::from_biguint(Sign::Minus, &self.product - v)
        } else {
            BigInt::from_biguint(Sign::Plus, v)
        }
    }
}

pub(crate) fn biguint_mod(x: &BigUint, q: u32) -> u32 {
    let r = x % q;
    r.to_u32_digits().first().copied().unwrap_or(0)
}

pub(crate) fn bigint_mod(x: &BigInt, q: u32) -> u32 {
    let r = biguint_mod(x.magnitude(), q);
    if x.sign() == Sign::Minus && r != 0 {
        q - r
    } else {
        r
    }
}

/// Row `i` = `coeffs mod basis[i]`, coefficient domain.
pub fn crt_decompose(coeffs: &[BigUint], basis: &[u32]) -> Result<RnsPolynomial> {
    if basis.is_empty() {
        return Err(Error::Parameter("empty RNS basis".into()));
    }
    let n = coeffs.len();
    let mut data = Vec::with_capacity(n * basis.len());
    for &q in basis {
        data.extend(coeffs.iter().map(|c| biguint_mod(c, q)));
    }
    Ok(RnsPolynomial {
        n,
        basis: basis.to_vec(),
        domain: Domain::Coefficient,
        data,
    })
}

/// Signed coefficients stored as canonical residues.
pub fn crt_decompose_signed(coeffs: &[BigInt], basis: &[u32]) -> Result<RnsPolynomial> {
    if basis.is_empty() {
        return Err(Error::Parameter("empty RNS basis".into()));
    }
    let n = coeffs.len();
    let mut data = Vec::with_capacity(n * basis.len());
    for &q in basis {
        data.extend(coeffs.iter().map(|c| bigint_mod(c, q)));
    }
    Ok(RnsPolynomial {
        n,
        basis: basis.to_vec(),
        domain: Domain::Coefficient,
        data,
    })
}

/// Inverse of [`crt_decompose`].
pub fn crt_compose(poly: &RnsPolynomial) -> Result<Vec<BigUint>> {
    poly.domain.expect(Domain::Coefficient)?;
    let crt = CrtBasis::new(&poly.basis)?;
    Ok(column_iter(poly).map(|col| crt.compose(&col)).collect())
}

/// Inverse of [`crt_decompose_signed`]: representatives in (-Q/2, Q/2].
pub fn crt_compose_centered(poly: &RnsPolynomial) -> Result<Vec<BigInt>> {
    poly.domain.expect(Domain::Coefficient)?;
    let crt = CrtBasis::new(&poly.basis)?;
    let cols: Vec<Vec<u32>> = column_iter(poly).collect();
    Ok(cols
        .par_iter()
        .map(|col| crt.compose_centered(col))
        .collect())
}

fn column_iter(poly: &RnsPolynomial) -> impl Iterator<Item = Vec<u32>> + '_ {
    (0..poly.n).map(move |j| {
        (0..poly.basis.len())
            .map(|i| poly.data[i * poly.n + j])
            .collect()
    })
}

/// Fast (approximate) conversion from one basis to another.
///
/// For source primes `q_i` with product `Q`, each target residue is
/// `sum_i [a_i * (Q/q_i)^{-1}]_{q_i} * (Q/q_i) mod p_j`. The lifted integer may exceed
/// the exact value by `e * Q` with `0 <= e < |source|`.
#[derive(Debug, Clone)]
pub struct BasisConverter {
    source: Vec<u32>,
    target: Vec<u32>,
    q_hat_inv: Vec<u32>,
    // [j][i] = (Q/q_i) mod p_j
    q_hat_mod_target: Vec<Vec<u32>>,
}

impl BasisConverter {
    pub fn new(source: &[u32], target: &[u32]) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::Parameter("empty target basis".into()));
        }
        let crt = CrtBasis::new(source)?;
        let q_hat_mod_target = target
            .iter()
            .map(|&p| crt.q_hat.iter().map(|h| biguint_mod(h, p)).collect())
            .collect();
        Ok(Self {
            source: source.to_vec(),
            target: target.to_vec(),
            q_hat_inv: crt.q_hat_inv,
            q_hat_mod_target,
        })
    }

    pub fn source(&self) -> &[u32] {
        &self.source
    }

    pub fn target(&self) -> &[u32] {
        &self.target
    }

    pub fn convert(&self, poly: &RnsPolynomial) -> Result<RnsPolynomial> {
        poly.domain.expect(Domain::Coefficient)?;
        if poly.basis != self.source {
            return Err(Error::Basis(
                "input basis differs from converter source".into(),
            ));
        }
        let n = poly.n;
        // y_i = [a_i * qhat_i^{-1}]_{q_i}
        let mut y = vec![0u32; n * self.source.len()];
        for (i, &q) in self.source.iter().enumerate() {
            let m = Modulus::new(q);
            let inv = self.q_hat_inv[i];
            for (dst, &a) in y[i * n..(i + 1) * n].iter_mut().zip(poly.row(i)) {
                *dst = m.mul(a, inv);
            }
        }
        let mut out = RnsPolynomial::zero(n, &self.target, Domain::Coefficient);
        out.par_rows_mut().enumerate().for_each(|(j, (p, row))| {
            let m = Modulus::new(p);
            if let Some(i) = self.source.iter().position(|&q| q == p) {
                // shared prime: the residue is known exactly
                row.copy_from_slice(poly.row(i));
                return;
            }
            let weights = &self.q_hat_mod_target[j];
            let mut acc = vec![0u128; n];
            for (i, &w) in weights.iter().enumerate() {
                for (a, &yv) in acc.iter_mut().zip(&y[i * n..(i + 1) * n]) {
                    *a += yv as u128 * w as u128;
                }
            }
            for (dst, a) in row.iter_mut().zip(acc) {
                *dst = m.reduce_u128(a);
            }
        });
        Ok(out)
    }
}

pub fn fast_basis_conv(poly: &RnsPolynomial, target: &[u32]) -> Result<RnsPolynomial> {
    BasisConverter::new(&poly.basis, target)?.convert(poly)
}

/// Split the rows into `dnum` consecutive slices of `alpha = rows/dnum` rows.
pub fn gks_decompose(poly: &RnsPolynomial, dnum: usize) -> Result<Vec<RnsPolynomial>> {
    poly.domain.expect(Domain::Coefficient)?;
    let rows = poly.basis.len();
    if dnum == 0 || !rows.is_multiple_of(dnum) {
        return Err(Error::Parameter(format!(
            "{rows} rows cannot be split into {dnum} slices"
        )));
    }
    let alpha = rows / dnum;
    Ok(split_rows(poly, alpha))
}

/// Consecutive slices of at most `alpha` rows (the last may be shorter).
pub(crate) fn split_rows(poly: &RnsPolynomial, alpha: usize) -> Vec<RnsPolynomial> {
    let n = poly.n;
    poly.basis
        .chunks(alpha)
        .enumerate()
        .map(|(j, primes)| RnsPolynomial {
            n,
            basis: primes.to_vec(),
            domain: poly.domain,
            data: poly.data[j * alpha * n..(j * alpha + primes.len()) * n].to_vec(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_23() {
        let p = crt_decompose(&[BigUint::from(23u32)], &[17, 13]).unwrap();
        assert_eq!(p.row(0), &[6]);
        assert_eq!(p.row(1), &[10]);
        assert_eq!(crt_compose(&p).unwrap(), vec![BigUint::from(23u32)]);
    }

    #[test]
    fn zero_and_single_prime() {
        let z = crt_decompose(&vec![BigUint::zero(); 4], &[17, 13]).unwrap();
        assert!(z.is_zero());
        assert!(crt_compose(&z).unwrap().iter().all(|x| x.is_zero()));
        let p = RnsPolynomial::from_rows(3, &[17], Domain::Coefficient, vec![1, 5, 16]).unwrap();
        let c: Vec<u32> = crt_compose(&p)
            .unwrap()
            .iter()
            .map(|x| biguint_mod(x, 1 << 31))
            .collect();
        assert_eq!(c, vec![1, 5, 16]);
    }

    #[test]
    fn errors() {
        assert!(crt_decompose(&[BigUint::from(1u32)], &[]).is_err());
        let mut p = RnsPolynomial::zero(4, &[17], Domain::Ntt);
        assert!(matches!(crt_compose(&p), Err(Error::Domain { .. })));
        p.set_domain(Domain::Coefficient);
        assert!(fast_basis_conv(&p, &[]).is_err());
        assert!(RnsPolynomial::from_rows(2, &[17], Domain::Coefficient, vec![1, 17]).is_err());
        let four = RnsPolynomial::zero(2, &[17, 41, 73, 97], Domain::Coefficient);
        assert!(gks_decompose(&four, 3).is_err());
    }

    #[test]
    fn gks_slices() {
        let data: Vec<u32> = (0..8).collect();
        let p = RnsPolynomial::from_rows(2, &[17, 41, 73, 97], Domain::Coefficient, data).unwrap();
        let one = gks_decompose(&p, 1).unwrap();
        assert_eq!(one, vec![p.clone()]);
        let two = gks_decompose(&p, 2).unwrap();
        assert_eq!(two[0].basis(), &[17, 41]);
        assert_eq!(two[1].row(1), &[6, 7]);
        assert_eq!(two[0].concat(&two[1]).unwrap(), p);
    }

    #[test]
    fn conv_single_source_is_exact() {
        let p = RnsPolynomial::from_rows(3, &[97], Domain::Coefficient, vec![0, 50, 96]).unwrap();
        let out = fast_basis_conv(&p, &[17, 13]).unwrap();
        assert_eq!(out.row(0), &[0, 50 % 17, 96 % 17]);
        assert_eq!(out.row(1), &[0, 50 % 13, 96 % 13]);
    }

    #[test]
    fn csv_dump() {
        let p =
            RnsPolynomial::from_rows(2, &[17, 13], Domain::Coefficient, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(p.to_csv(), "17,1,2\n13,3,4\n");
    }
}
