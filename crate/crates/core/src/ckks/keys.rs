//! Secret, public and switching keys.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::sampling;
use super::CkksContext;
use crate::error::{Error, Result};
use crate::kernels::{conjugate, ele_add, ele_neg, forbenius_map, hada_mult};
use crate::modarith::Modulus;
use crate::ntt::ntt_forward;
use crate::rns::{Domain, RnsPolynomial};

/// Ternary secret of fixed Hamming weight, held in NTT form over `Q_L ∪ P`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    pub coeffs: Vec<i64>,
    pub s: RnsPolynomial,
}

impl SecretKey {
    pub fn hamming_weight(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    /// `s` restricted to the given primes.
    pub(crate) fn restricted(&self, primes: &[u32]) -> Result<RnsPolynomial> {
        self.s.select_rows(primes)
    }
}

/// An encryption of zero over `Q_L`: `b = -a*s + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    pub b: RnsPolynomial,
    pub a: RnsPolynomial,
}

/// `dnum` pairs `(b_j, a_j)` over `Q_L ∪ P` in NTT form with
/// `b_j = -a_j*s + e_j + P * [Q_j-indicator] * s'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingKey {
    pub pairs: Vec<(RnsPolynomial, RnsPolynomial)>,
}

#[derive(Debug, Clone)]
pub struct KeySet {
    pub secret: SecretKey,
    pub public: PublicKey,
    pub relin: SwitchingKey,
    pub rotation: BTreeMap<usize, SwitchingKey>,
    pub conjugation: SwitchingKey,
}

impl KeySet {
    pub fn rotation_key(&self, r: usize) -> Result<&SwitchingKey> {
        self.rotation
            .get(&r)
            .ok_or_else(|| Error::MissingKey(format!("rotation by {r}")))
    }
}

impl CkksContext {
    fn small_ntt(&self, coeffs: &[i64], basis: &[u32]) -> Result<RnsPolynomial> {
        ntt_forward(
            &RnsPolynomial::from_signed(coeffs, basis),
            self.twiddles(),
            self.backend(),
        )
    }

    pub fn gen_secret_key<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SecretKey> {
        let n = self.n();
        let coeffs = sampling::ternary_fixed_weight(n, n / 2, rng);
        let s = self.small_ntt(&coeffs, &self.key_basis())?;
        Ok(SecretKey { coeffs, s })
    }

    pub fn gen_public_key<R: Rng + ?Sized>(
        &self,
        sk: &SecretKey,
        rng: &mut R,
    ) -> Result<PublicKey> {
        let basis = self.level_basis(self.max_level()).to_vec();
        let a = sampling::uniform(self.n(), &basis, Domain::Ntt, rng);
        let e = self.small_ntt(&sampling::gaussian(self.n(), rng), &basis)?;
        let s = sk.restricted(&basis)?;
        let b = ele_add(&ele_neg(&hada_mult(&a, &s)?), &e)?;
        Ok(PublicKey { b, a })
    }

    /// Key switching from `from` (NTT form over `Q_L ∪ P`) to `sk`.
    pub fn gen_switching_key<R: Rng + ?Sized>(
        &self,
        from: &RnsPolynomial,
        sk: &SecretKey,
        rng: &mut R,
    ) -> Result<SwitchingKey> {
        let basis = self.key_basis();
        if from.basis() != basis.as_slice() {
            return Err(Error::Basis("switching source must be over Q_L ∪ P".into()));
        }
        from.domain().expect(Domain::Ntt)?;
        let alpha = self.params().alpha();
        let mut pairs = Vec::with_capacity(self.params().dnum());
        for j in 0..self.params().dnum() {
            let a = sampling::uniform(self.n(), &basis, Domain::Ntt, rng);
            let e = self.small_ntt(&sampling::gaussian(self.n(), rng), &basis)?;
            let mut b = ele_add(&ele_neg(&hada_mult(&a, &sk.s)?), &e)?;
            for i in j * alpha..(j + 1) * alpha {
                let m = Modulus::new(basis[i]);
                let factor = self.p_mod_q[i];
                let src = from.row(i).to_vec();
                for (x, s) in b.row_mut(i).iter_mut().zip(src) {
                    *x = m.add(*x, m.mul(s, factor));
                }
            }
            pairs.push((b, a));
        }
        Ok(SwitchingKey { pairs })
    }

    pub fn gen_relin_key<R: Rng + ?Sized>(
        &self,
        sk: &SecretKey,
        rng: &mut R,
    ) -> Result<SwitchingKey> {
        let s2 = hada_mult(&sk.s, &sk.s)?;
        self.gen_switching_key(&s2, sk, rng)
    }

    pub fn gen_rotation_key<R: Rng + ?Sized>(
        &self,
        sk: &SecretKey,
        r: usize,
        rng: &mut R,
    ) -> Result<SwitchingKey> {
        if r >= self.slots() {
            return Err(Error::Range(format!(
                "rotation index {r} not below {}",
                self.slots()
            )));
        }
        let rotated = forbenius_map(&sk.s, r)?;
        self.gen_switching_key(&rotated, sk, rng)
    }

    pub fn gen_conjugation_key<R: Rng + ?Sized>(
        &self,
        sk: &SecretKey,
        rng: &mut R,
    ) -> Result<SwitchingKey> {
        self.gen_switching_key(&conjugate(&sk.s), sk, rng)
    }
}

/// All keys, deterministic in `seed`.
pub fn keygen(ctx: &CkksContext, seed: u64, rotations: &[usize]) -> Result<KeySet> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let secret = ctx.gen_secret_key(&mut rng)?;
    let public = ctx.gen_public_key(&secret, &mut rng)?;
    let relin = ctx.gen_relin_key(&secret, &mut rng)?;
    let mut rotation = BTreeMap::new();
    for &r in rotations {
        if rotation.contains_key(&r) {
            continue;
        }
        rotation.insert(r, ctx.gen_rotation_key(&secret, r, &mut rng)?);
    }
    let conjugation = ctx.gen_conjugation_key(&secret, &mut rng)?;
    Ok(KeySet {
        secret,
        public,
        relin,
        rotation,
        conjugation,
    })
}
