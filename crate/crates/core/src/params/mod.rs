//! Scheme parameters: the prime chain, its roots, and named presets.

mod preset;
mod prime;

pub use preset::{Preset, PRESETS};
pub use prime::{find_negacyclic_root, is_prime, primitive_root, search_primes};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::modarith::Modulus;

pub const MIN_DEGREE: usize = 1 << 10;
pub const MAX_DEGREE: usize = 1 << 18;

/// One prime of the chain with the roots needed by the NTT of degree `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeEntry {
    pub value: u32,
    /// Smallest primitive root mod `value`.
    pub g: u32,
    /// Primitive 2n-th root of unity.
    pub psi: u32,
    pub psi_inv: u32,
    /// n^{-1} mod `value`.
    pub n_inv: u32,
}

impl PrimeEntry {
    pub fn new(value: u32, n: usize) -> Result<Self> {
        if !is_prime(value as u64) {
            return Err(Error::Parameter(format!("{value} is not prime")));
        }
        let psi = find_negacyclic_root(value, n)?;
        let g = primitive_root(value)?;
        let m = Modulus::new(value);
        Ok(Self {
            value,
            g,
            psi,
            psi_inv: m.inv(psi),
            n_inv: m.inv((n as u64 % value as u64) as u32),
        })
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.value)
    }
}

/// Ciphertext primes `q_0..q_L` followed by special primes `p_0..p_{K-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusChain {
    pub n: usize,
    pub q: Vec<PrimeEntry>,
    pub p: Vec<PrimeEntry>,
}

impl ModulusChain {
    /// Validate caller-supplied primes and compute their roots.
    pub fn from_primes(n: usize, q: &[u32], p: &[u32]) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::Parameter(format!(
                "degree {n} is not a power of two"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &r in q.iter().chain(p) {
            if !seen.insert(r) {
                return Err(Error::Parameter(format!("prime {r} appears twice")));
            }
        }
        let q = q
            .iter()
            .map(|&r| PrimeEntry::new(r, n))
            .collect::<Result<Vec<_>>>()?;
        let p = p
            .iter()
            .map(|&r| PrimeEntry::new(r, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, q, p })
    }

    pub fn q_values(&self) -> Vec<u32> {
        self.q.iter().map(|e| e.value).collect()
    }

    pub fn p_values(&self) -> Vec<u32> {
        self.p.iter().map(|e| e.value).collect()
    }

    /// All primes, q first.
    pub fn all_values(&self) -> Vec<u32> {
        self.q.iter().chain(&self.p).map(|e| e.value).collect()
    }

    pub fn entry(&self, prime: u32) -> Option<&PrimeEntry> {
        self.q.iter().chain(&self.p).find(|e| e.value == prime)
    }

    /// Sum of the bit lengths of all primes.
    pub fn total_bits(&self) -> u32 {
        self.q
            .iter()
            .chain(&self.p)
            .map(|e| 32 - e.value.leading_zeros())
            .sum()
    }

    /// log2 of the product of all primes.
    pub fn log_pq(&self) -> f64 {
        self.q
            .iter()
            .chain(&self.p)
            .map(|e| (e.value as f64).log2())
            .sum()
    }
}

/// `L+1+K` primes of `bit_size` bits, each `== 1 (mod 2n)`, found by a descending
/// search from `2^bit_size`.
pub fn generate_prime_chain(
    n: usize,
    l_max: usize,
    k: usize,
    bit_size: u32,
) -> Result<ModulusChain> {
    generate_prime_chain_split(n, l_max, k, bit_size, bit_size)
}

/// Like [`generate_prime_chain`] with a separate width for the special primes.
pub fn generate_prime_chain_split(
    n: usize,
    l_max: usize,
    k: usize,
    q_bits: u32,
    p_bits: u32,
) -> Result<ModulusChain> {
    let q = search_primes(n, q_bits, l_max + 1, &[])?;
    let p = search_primes(n, p_bits, k, &q)?;
    ModulusChain::from_primes(n, &q, &p)
}

/// All scheme parameters. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CkksParams {
    n: usize,
    l_max: usize,
    k: usize,
    dnum: usize,
    alpha: usize,
    scale_bits: u32,
    chain: ModulusChain,
}

impl CkksParams {
    pub fn new(dnum: usize, scale_bits: u32, chain: ModulusChain) -> Result<Self> {
        let n = chain.n;
        if !n.is_power_of_two() || !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
            return Err(Error::Parameter(format!(
                "degree {n} must be a power of two in [2^10, 2^18]"
            )));
        }
        if chain.q.is_empty() {
            return Err(Error::Parameter("empty ciphertext modulus chain".into()));
        }
        let levels = chain.q.len();
        if dnum == 0 || !levels.is_multiple_of(dnum) {
            return Err(Error::Parameter(format!(
                "L+1 = {levels} is not divisible by dnum = {dnum}"
            )));
        }
        if scale_bits == 0 || scale_bits > 62 {
            return Err(Error::Parameter(format!(
                "scale_bits {scale_bits} out of range"
            )));
        }
        let alpha = levels / dnum;
        let params = Self {
            n,
            l_max: levels - 1,
            k: chain.p.len(),
            dnum,
            alpha,
            scale_bits,
            chain,
        };
        if params.k > 0 {
            let p = params.special_product();
            let max_slice = (0..dnum).map(|j| params.slice_product(j)).max().unwrap();
            if p <= max_slice {
                return Err(Error::Parameter(
                    "special modulus P must exceed every decomposition slice Q_j".into(),
                ));
            }
        }
        Ok(params)
    }

    /// Build from a named preset (see [`PRESETS`]).
    pub fn preset(name: &str) -> Result<Self> {
        Preset::by_name(name)?.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn l_max(&self) -> usize {
        self.l_max
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn dnum(&self) -> usize {
        self.dnum
    }
    pub fn alpha(&self) -> usize {
        self.alpha
    }
    pub fn scale_bits(&self) -> u32 {
        self.scale_bits
    }
    pub fn default_scale(&self) -> f64 {
        2f64.powi(self.scale_bits as i32)
    }
    pub fn chain(&self) -> &ModulusChain {
        &self.chain
    }
    pub fn slots(&self) -> usize {
        self.n / 2
    }

    /// Q_j, the product of the primes in decomposition slice j.
    pub fn slice_product(&self, j: usize) -> BigUint {
        self.chain.q[j * self.alpha..(j + 1) * self.alpha]
            .iter()
            .map(|e| BigUint::from(e.value))
            .product()
    }

    pub fn special_product(&self) -> BigUint {
        self.chain
            .p
            .iter()
            .map(|e| BigUint::from(e.value))
            .product()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ParamsDoc::from(self)).expect("params serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ParamsDoc =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        doc.try_into()
    }

    /// SHA-256 over the canonical JSON form; tags serialized objects.
    pub fn hash(&self) -> [u8; 32] {
        let compact = serde_json::to_string(&ParamsDoc::from(self)).expect("params serialize");
        Sha256::digest(compact.as_bytes()).into()
    }
}

#[derive(Serialize, Deserialize)]
struct PrimeDoc {
    value: String,
    g: String,
    psi: String,
    psi_inv: String,
    n_inv: String,
}

#[derive(Serialize, Deserialize)]
struct ChainDoc {
    q: Vec<PrimeDoc>,
    p: Vec<PrimeDoc>,
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    n: usize,
    l_max: usize,
    k: usize,
    dnum: usize,
    alpha: usize,
    scale_bits: u32,
    chain: ChainDoc,
}

impl From<&PrimeEntry> for PrimeDoc {
    fn from(e: &PrimeEntry) -> Self {
        Self {
            value: e.value.to_string(),
            g: e.g.to_string(),
            psi: e.psi.to_string(),
            psi_inv: e.psi_inv.to_string(),
            n_inv: e.n_inv.to_string(),
        }
    }
}

impl From<&CkksParams> for ParamsDoc {
    fn from(p: &CkksParams) -> Self {
        Self {
            n: p.n,
            l_max: p.l_max,
            k: p.k,
            dnum: p.dnum,
            alpha: p.alpha,
            scale_bits: p.scale_bits,
            chain: ChainDoc {
                q: p.chain.q.iter().map(PrimeDoc::from).collect(),
                p: p.chain.p.iter().map(PrimeDoc::from).collect(),
            },
        }
    }
}

fn parse_u32(s: &str) -> Result<u32> {
    s.parse()
        .map_err(|_| Error::Serialization(format!("bad integer {s:?}")))
}

impl TryFrom<ParamsDoc> for CkksParams {
    type Error = Error;

    fn try_from(doc: ParamsDoc) -> Result<Self> {
        let q = doc
            .chain
            .q
            .iter()
            .map(|e| parse_u32(&e.value))
            .collect::<Result<Vec<_>>>()?;
        let p = doc
            .chain
            .p
            .iter()
            .map(|e| parse_u32(&e.value))
            .collect::<Result<Vec<_>>>()?;
        let chain = ModulusChain::from_primes(doc.n, &q, &p)?;
        // Stored roots must agree with the recomputed ones.
        for (entry, stored) in chain
            .q
            .iter()
            .chain(&chain.p)
            .zip(doc.chain.q.iter().chain(&doc.chain.p))
        {
            let fields = [
                (entry.g, &stored.g),
                (entry.psi, &stored.psi),
                (entry.psi_inv, &stored.psi_inv),
                (entry.n_inv, &stored.n_inv),
            ];
            for (want, got) in fields {
                if parse_u32(got)? != want {
                    return Err(Error::Parameter(format!(
                        "stored root data for prime {} is inconsistent",
                        entry.value
                    )));
                }
            }
        }
        let params = CkksParams::new(doc.dnum, doc.scale_bits, chain)?;
        if params.l_max != doc.l_max || params.k != doc.k || params.alpha != doc.alpha {
            return Err(Error::Parameter(
                "l_max/k/alpha disagree with the prime lists".into(),
            ));
        }
        Ok(params)
    }
}
