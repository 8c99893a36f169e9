//! Direct O(n^2) evaluation of the negacyclic transform.

use crate::modarith::Modulus;

fn psi_powers(m: &Modulus, psi: u32, n: usize) -> Vec<u32> {
    let mut pw = Vec::with_capacity(2 * n);
    let mut x = 1u32;
    for _ in 0..2 * n {
        pw.push(x);
        x = m.mul(x, psi);
    }
    pw
}

/// `A_k = sum_j a_j * psi^((2k+1) j) mod q`, natural order in and out.
pub fn ntt_oracle(a: &[u32], q: u32, psi: u32) -> Vec<u32> {
    let n = a.len();
    let m = Modulus::new(q);
    let pw = psi_powers(&m, psi, n);
    let mask = 2 * n - 1;
    (0..n)
        .map(|k| {
            let step = 2 * k + 1;
            let mut e = 0usize;
            let mut acc = 0u128;
            for &x in a {
                acc += x as u128 * pw[e] as u128;
                e = (e + step) & mask;
            }
            m.reduce_u128(acc)
        })
        .collect()
}

/// `a_j = n^{-1} sum_k A_k * psi^(-(2k+1) j) mod q`.
pub fn intt_oracle(a: &[u32], q: u32, psi: u32) -> Vec<u32> {
    let n = a.len();
    let m = Modulus::new(q);
    let pw = psi_powers(&m, m.inv(psi), n);
    let n_inv = m.inv((n as u64 % q as u64) as u32);
    let mask = 2 * n - 1;
    (0..n)
        .map(|j| {
            let mut acc = 0u128;
            for (k, &x) in a.iter().enumerate() {
                acc += x as u128 * pw[((2 * k + 1) * j) & mask] as u128;
            }
            m.mul(m.reduce_u128(acc), n_inv)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_maps_to_ones() {
        assert_eq!(ntt_oracle(&[1, 0, 0, 0], 17, 9), vec![1, 1, 1, 1]);
        assert_eq!(ntt_oracle(&[0; 4], 17, 9), vec![0; 4]);
    }

    #[test]
    fn x_maps_to_odd_powers() {
        // a(X) = X evaluates to psi^(2k+1)
        let out = ntt_oracle(&[0, 1, 0, 0], 17, 9);
        let m = Modulus::new(17);
        let want: Vec<u32> = (0..4).map(|k| m.pow(9, 2 * k + 1)).collect();
        assert_eq!(out, want);
    }

    #[test]
    fn inverse_oracle_roundtrip() {
        let a = vec![3, 16, 0, 7, 1, 2, 9, 11];
        let q = 97; // 97 = 1 mod 16
        let psi = crate::params::find_negacyclic_root(q, 8).unwrap();
        assert_eq!(intt_oracle(&ntt_oracle(&a, q, psi), q, psi), a);
    }
}
