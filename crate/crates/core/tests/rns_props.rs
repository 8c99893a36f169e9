mod common;

use ckks_kernels::params::search_primes;
use ckks_kernels::rns::{
    crt_compose, crt_compose_centered, crt_decompose, crt_decompose_signed, fast_basis_conv,
    gks_decompose, CrtBasis, Domain, RnsPolynomial,
};
use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn basis(count: usize, bits: u32) -> Vec<u32> {
    search_primes(16, bits, count, &[]).unwrap()
}

fn product(primes: &[u32]) -> BigUint {
    primes.iter().fold(BigUint::one(), |acc, &q| acc * q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn crt_roundtrip_in_range(count in 1usize..6, bits in 20u32..=32, seed: u64) {
        let primes = basis(count, bits);
        let q = product(&primes);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let coeffs: Vec<BigUint> = (0..16).map(|_| rng.gen_biguint_below(&q)).collect();
        let poly = crt_decompose(&coeffs, &primes).unwrap();
        for (i, &p) in primes.iter().enumerate() {
            for (c, &r) in coeffs.iter().zip(poly.row(i)) {
                prop_assert_eq!(c % p, BigUint::from(r));
            }
        }
        prop_assert_eq!(crt_compose(&poly).unwrap(), coeffs);
    }

    #[test]
    fn centered_roundtrip(count in 1usize..6, seed: u64) {
        let primes = basis(count, 30);
        let half: BigInt = BigInt::from(product(&primes)) / 2u32;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let coeffs: Vec<BigInt> = (0..16).map(|_| rng.gen_bigint_range(&-half.clone(), &half)).collect();
        let poly = crt_decompose_signed(&coeffs, &primes).unwrap();
        prop_assert_eq!(crt_compose_centered(&poly).unwrap(), coeffs);
    }

    #[test]
    fn conversion_error_is_a_small_multiple(src_count in 1usize..5, seed: u64) {
        let all = basis(src_count + 6, 30);
        let (source, target) = all.split_at(src_count);
        let qs = product(source);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let coeffs: Vec<BigUint> = (0..16).map(|_| rng.gen_biguint_below(&qs)).collect();
        let poly = crt_decompose(&coeffs, source).unwrap();
        let conv = fast_basis_conv(&poly, target).unwrap();
        let lifted = CrtBasis::new(target).unwrap();
        for (idx, c) in coeffs.iter().enumerate() {
            let residues: Vec<u32> = (0..target.len()).map(|j| conv.row(j)[idx]).collect();
            let v = lifted.compose(&residues);
            prop_assert!(&v >= c);
            let diff = &v - c;
            prop_assert!((&diff % &qs).is_zero());
            prop_assert!(diff / &qs < BigUint::from(src_count));
        }
    }

    #[test]
    fn gks_slices_concatenate_back(dnum in 1usize..4, alpha in 1usize..3, seed: u64) {
        let primes = basis(dnum * alpha, 28);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data = primes.iter().flat_map(|&q| common::random_vec(&mut rng, 16, q)).collect();
        let poly = RnsPolynomial::from_rows(16, &primes, Domain::Coefficient, data).unwrap();
        let slices = gks_decompose(&poly, dnum).unwrap();
        prop_assert_eq!(slices.len(), dnum);
        let joined = slices[1..].iter().fold(slices[0].clone(), |acc, s| acc.concat(s).unwrap());
        prop_assert_eq!(joined, poly);
    }
}

#[test]
fn shared_primes_are_copied() {
    let primes = basis(4, 30);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let data = primes[..2]
        .iter()
        .flat_map(|&q| common::random_vec(&mut rng, 16, q))
        .collect();
    let poly = RnsPolynomial::from_rows(16, &primes[..2], Domain::Coefficient, data).unwrap();
    let conv = fast_basis_conv(&poly, &primes).unwrap();
    assert_eq!(conv.row(0), poly.row(0));
    assert_eq!(conv.row(1), poly.row(1));
}

#[test]
fn conversion_rejects_ntt_input() {
    let primes = basis(2, 30);
    let poly = RnsPolynomial::zero(16, &primes[..1], Domain::Ntt);
    assert!(fast_basis_conv(&poly, &primes[1..]).is_err());
}
