mod common;

use ckks_kernels::kernels::{
    conjugate, ele_add, ele_sub, forbenius_map, frobenius_permutation, hada_mult,
};
use ckks_kernels::params::search_primes;
use ckks_kernels::rns::{Domain, RnsPolynomial};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn random_poly(n: usize, primes: &[u32], domain: Domain, seed: u64) -> RnsPolynomial {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let data = primes
        .iter()
        .flat_map(|&q| random_vec(&mut rng, n, q))
        .collect();
    RnsPolynomial::from_rows(n, primes, domain, data).unwrap()
}

#[test]
fn frobenius_permutation_is_a_bijection() {
    let n = 1 << 10;
    for r in 0..n / 2 {
        let perm = frobenius_permutation(r, n);
        let mut seen = vec![false; n];
        for &p in &perm {
            assert!(!seen[p], "r={r} repeats {p}");
            seen[p] = true;
        }
    }
}

#[test]
fn frobenius_index_formula() {
    let n = 64usize;
    for r in 0..n / 2 {
        let g = powmod(5, r as u64, 2 * n as u64) as usize;
        let perm = frobenius_permutation(r, n);
        for x in 0..n {
            assert_eq!(2 * perm[x] + 1, g * (2 * x + 1) % (2 * n));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frobenius_maps_compose(r in 0usize..128, s in 0usize..128, seed: u64) {
        let n = 256;
        let q = search_primes(n, 30, 1, &[]).unwrap();
        let a = random_poly(n, &q, Domain::Ntt, seed);
        let both = forbenius_map(&forbenius_map(&a, r).unwrap(), s).unwrap();
        let direct = forbenius_map(&a, (r + s) % (n / 2)).unwrap();
        prop_assert_eq!(both, direct);
    }

    #[test]
    fn elementwise_kernels_follow_definitions(seed: u64) {
        let n = 32;
        let primes = search_primes(n, 31, 2, &[]).unwrap();
        let a = random_poly(n, &primes, Domain::Ntt, seed);
        let b = random_poly(n, &primes, Domain::Ntt, seed ^ 1);
        let prod = hada_mult(&a, &b).unwrap();
        let sum = ele_add(&a, &b).unwrap();
        let diff = ele_sub(&a, &b).unwrap();
        for (i, &q) in primes.iter().enumerate() {
            let q64 = q as u64;
            for k in 0..n {
                let (x, y) = (a.row(i)[k] as u64, b.row(i)[k] as u64);
                prop_assert_eq!(prod.row(i)[k] as u64, mulmod(x, y, q64));
                prop_assert_eq!(sum.row(i)[k] as u64, (x + y) % q64);
                prop_assert_eq!(diff.row(i)[k] as u64, (x + q64 - y) % q64);
            }
        }
    }

    #[test]
    fn conjugation_commutes_with_the_transform(seed: u64) {
        let n = 64;
        let primes = search_primes(n, 30, 1, &[]).unwrap();
        let tw = ckks_kernels::ntt::TwiddleFactorSet::new(n, &primes).unwrap();
        let a = random_poly(n, &primes, Domain::Coefficient, seed);
        let backend = ckks_kernels::NttBackend::Butterfly;
        let via_coeff = ckks_kernels::ntt::ntt_forward(&conjugate(&a), &tw, backend).unwrap();
        let via_ntt = conjugate(&ckks_kernels::ntt::ntt_forward(&a, &tw, backend).unwrap());
        prop_assert_eq!(via_coeff, via_ntt.clone());
        prop_assert_eq!(conjugate(&via_ntt), ckks_kernels::ntt::ntt_forward(&a, &tw, backend).unwrap());
    }
}

#[test]
fn mismatched_operands_are_rejected() {
    let primes = search_primes(16, 30, 2, &[]).unwrap();
    let a = random_poly(16, &primes, Domain::Ntt, 1);
    let b = random_poly(16, &primes[..1], Domain::Ntt, 2);
    let c = random_poly(16, &primes, Domain::Coefficient, 3);
    assert!(hada_mult(&a, &b).is_err());
    assert!(hada_mult(&a, &c).is_err());
    assert!(forbenius_map(&c, 1).is_err());
    assert!(forbenius_map(&a, 8).is_err());
}
