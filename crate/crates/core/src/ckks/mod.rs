//! The CKKS scheme built from the kernel layer.
//!
//! Conventions: a ciphertext is `(b, a)` with `b = -a*s + m + e`, so decryption is
//! `b + a*s`. Ciphertexts and plaintexts live in the NTT domain between operations;
//! rescaling and basis conversion round-trip through the coefficient domain
//! internally. Level `l` means the basis `q_0..=q_l`.

mod encoding;
mod keys;
mod ops;
pub mod sampling;
mod serialize;

use std::sync::{Arc, OnceLock};

pub use encoding::{slot_error, Encoder};
pub use keys::{keygen, KeySet, PublicKey, SecretKey, SwitchingKey};
pub use serialize::{read_object, write_object, Serialized};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modarith::Modulus;
use crate::ntt::{NttBackend, TwiddleFactorSet};
use crate::params::CkksParams;
use crate::rns::{BasisConverter, RnsPolynomial};

#[derive(Debug, Clone, PartialEq)]
pub struct Plaintext {
    pub poly: RnsPolynomial,
    pub scale: f64,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub b: RnsPolynomial,
    pub a: RnsPolynomial,
    pub scale: f64,
    pub level: usize,
}

impl Ciphertext {
    pub fn basis(&self) -> &[u32] {
        self.b.basis()
    }

    fn check_shape(&self) {
        debug_assert_eq!(self.b.basis(), self.a.basis());
        debug_assert_eq!(self.b.domain(), self.a.domain());
        debug_assert_eq!(self.b.row_count(), self.level + 1);
    }
}

/// Basis converters used by key switching at one level.
#[derive(Debug)]
struct LevelConverters {
    // slice j of Q_l -> Q_l ∪ P
    mod_up: Vec<BasisConverter>,
    // P -> Q_l
    mod_down: BasisConverter,
}

/// Parameters plus every precomputed table the scheme needs.
#[derive(Debug)]
pub struct CkksContext {
    params: Arc<CkksParams>,
    backend: NttBackend,
    tw: TwiddleFactorSet,
    encoder: Encoder,
    q: Vec<u32>,
    p: Vec<u32>,
    // P^{-1} mod q_i and P mod q_i
    p_inv_mod_q: Vec<u32>,
    p_mod_q: Vec<u32>,
    converters: Vec<OnceLock<LevelConverters>>,
}

impl CkksContext {
    pub fn new(params: CkksParams, backend: NttBackend) -> Result<Self> {
        let tw = TwiddleFactorSet::for_chain(params.chain())?;
        let q = params.chain().q_values();
        let p = params.chain().p_values();
        let mut p_mod_q = Vec::with_capacity(q.len());
        let mut p_inv_mod_q = Vec::with_capacity(q.len());
        for &qi in &q {
            let m = Modulus::new(qi);
            let pm = p.iter().fold(1u32, |acc, &pk| m.mul(acc, pk % qi));
            p_mod_q.push(pm);
            p_inv_mod_q.push(m.inv(pm));
        }
        let levels = q.len();
        Ok(Self {
            encoder: Encoder::new(params.n()),
            params: Arc::new(params),
            backend,
            tw,
            q,
            p,
            p_inv_mod_q,
            p_mod_q,
            converters: (0..levels).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn params(&self) -> &CkksParams {
        &self.params
    }
    pub fn backend(&self) -> NttBackend {
        self.backend
    }
    pub fn twiddles(&self) -> &TwiddleFactorSet {
        &self.tw
    }
    pub fn n(&self) -> usize {
        self.params.n()
    }
    pub fn slots(&self) -> usize {
        self.params.slots()
    }
    pub fn max_level(&self) -> usize {
        self.params.l_max()
    }

    /// `q_0..=q_level`.
    pub fn level_basis(&self, level: usize) -> &[u32] {
        &self.q[..=level]
    }

    pub fn special_basis(&self) -> &[u32] {
        &self.p
    }

    /// `q_0..=q_level` followed by the special primes.
    pub fn extended_basis(&self, level: usize) -> Vec<u32> {
        let mut b = self.q[..=level].to_vec();
        b.extend_from_slice(&self.p);
        b
    }

    /// `Q_L ∪ P`, the basis of keys.
    pub fn key_basis(&self) -> Vec<u32> {
        self.extended_basis(self.max_level())
    }

    fn converters(&self, level: usize) -> Result<&LevelConverters> {
        if let Some(c) = self.converters[level].get() {
            return Ok(c);
        }
        let ext = self.extended_basis(level);
        let mod_up = self.q[..=level]
            .chunks(self.params.alpha())
            .map(|slice| BasisConverter::new(slice, &ext))
            .collect::<Result<Vec<_>>>()?;
        let mod_down = BasisConverter::new(&self.p, &self.q[..=level])?;
        Ok(self.converters[level].get_or_init(|| LevelConverters { mod_up, mod_down }))
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.max_level() {
            return Err(Error::Level(level, self.max_level()));
        }
        Ok(())
    }

    pub fn encode(&self, values: &[Complex64], scale: f64, level: usize) -> Result<Plaintext> {
        self.check_level(level)?;
        let coeffs = self.encoder.embed_inverse(values, scale, self.slots())?;
        let basis = self.level_basis(level);
        let poly = encoding::coeffs_to_rns(&coeffs, basis)?;
        let poly = crate::ntt::ntt_forward(&poly, &self.tw, self.backend)?;
        Ok(Plaintext { poly, scale, level })
    }

    /// Encode at the default scale and the top level.
    pub fn encode_default(&self, values: &[Complex64]) -> Result<Plaintext> {
        self.encode(values, self.params.default_scale(), self.max_level())
    }

    pub fn decode(&self, pt: &Plaintext) -> Result<Vec<Complex64>> {
        let coeff = crate::ntt::ntt_inverse(&pt.poly, &self.tw, self.backend)?;
        let ints = crate::rns::crt_compose_centered(&coeff)?;
        Ok(self.encoder.embed(&ints, pt.scale))
    }
}

#[cfg(test)]
mod tests;
