//! Negacyclic number-theoretic transform with three interchangeable backends.
//!
//! All backends compute `A_k = sum_j a_j psi^((2k+1) j) mod q` in natural order and
//! agree bit for bit:
//! - [`NttBackend::Butterfly`]: in-place radix-2 reference.
//! - [`NttBackend::Gemm`]: three matrix products over Z_q with 64-bit accumulators.
//! - [`NttBackend::Segmented`]: the same products split into 8-bit planes with
//!   32-bit accumulation.

mod butterfly;
mod gemm;
mod oracle;
mod plan;
mod segmented;
mod twiddle;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

pub use gemm::{gemm_mod, reduction_interval};
pub use oracle::{intt_oracle, ntt_oracle};
pub use plan::{build_ntt_plan, NttPlan, MAX_INNER_DIM};
pub use segmented::{
    fuse_partials, fuse_planes, hadamard_stage, segment_matrix, segment_twiddles, tcu_gemm,
    tcu_gemm_probed, ByteMatrix, I32Matrix, Layout, SegmentedTwiddles, TcuProbe,
};
pub use twiddle::{build_twiddles, Direction, TwiddleMatrices};

use crate::error::{Error, Result};
use crate::modarith::Modulus;
use crate::params::{find_negacyclic_root, ModulusChain};
use crate::rns::{Domain, RnsPolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NttBackend {
    #[default]
    Butterfly,
    Gemm,
    Segmented,
}

impl NttBackend {
    pub const ALL: [NttBackend; 3] = [
        NttBackend::Butterfly,
        NttBackend::Gemm,
        NttBackend::Segmented,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NttBackend::Butterfly => "butterfly",
            NttBackend::Gemm => "gemm",
            NttBackend::Segmented => "segmented",
        }
    }
}

impl fmt::Display for NttBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NttBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "butterfly" => Ok(NttBackend::Butterfly),
            "gemm" => Ok(NttBackend::Gemm),
            "segmented" => Ok(NttBackend::Segmented),
            _ => Err(Error::Parameter(format!("unknown NTT backend {s:?}"))),
        }
    }
}

/// Everything needed to transform rows of length `n` modulo one prime.
///
/// Matrix tables are built on first use by the backend that needs them.
#[derive(Debug)]
pub struct NttTable {
    modulus: Modulus,
    plan: NttPlan,
    psi: u32,
    n_inv: u32,
    psi_rev: Vec<u32>,
    psi_inv_rev: Vec<u32>,
    forward: OnceLock<TwiddleMatrices>,
    inverse: OnceLock<TwiddleMatrices>,
    forward_seg: OnceLock<SegmentedTwiddles>,
    inverse_seg: OnceLock<SegmentedTwiddles>,
}

impl NttTable {
    pub fn new(q: u32, n: usize) -> Result<Self> {
        Self::with_root(q, n, find_negacyclic_root(q, n)?)
    }

    pub fn with_root(q: u32, n: usize, psi: u32) -> Result<Self> {
        let plan = NttPlan::new(n)?;
        let modulus = Modulus::new(q);
        if modulus.pow(psi, n as u64) != q - 1 {
            return Err(Error::Parameter(format!(
                "{psi} is not a primitive {}-th root mod {q}",
                2 * n
            )));
        }
        let psi_inv = modulus.inv(psi);
        Ok(Self {
            modulus,
            plan,
            psi,
            n_inv: modulus.inv((n as u64 % q as u64) as u32),
            psi_rev: butterfly::bit_reversed_powers(&modulus, psi, n),
            psi_inv_rev: butterfly::bit_reversed_powers(&modulus, psi_inv, n),
            forward: OnceLock::new(),
            inverse: OnceLock::new(),
            forward_seg: OnceLock::new(),
            inverse_seg: OnceLock::new(),
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }
    pub fn plan(&self) -> NttPlan {
        self.plan
    }
    pub fn psi(&self) -> u32 {
        self.psi
    }
    pub fn n_inv(&self) -> u32 {
        self.n_inv
    }

    pub fn twiddles(&self, direction: Direction) -> &TwiddleMatrices {
        let cell = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        cell.get_or_init(|| TwiddleMatrices::build(self.plan, &self.modulus, self.psi, direction))
    }

    pub fn segmented(&self, direction: Direction) -> &SegmentedTwiddles {
        let cell = match direction {
            Direction::Forward => &self.forward_seg,
            Direction::Inverse => &self.inverse_seg,
        };
        cell.get_or_init(|| segment_twiddles(self.twiddles(direction)))
    }

    fn check_len(&self, a: &[u32]) -> Result<()> {
        if a.len() != self.plan.n {
            return Err(Error::Shape(format!(
                "row of length {} for a length-{} transform",
                a.len(),
                self.plan.n
            )));
        }
        Ok(())
    }

    pub fn forward(&self, a: &mut [u32], backend: NttBackend) -> Result<()> {
        self.run(a, backend, Direction::Forward, None)
    }

    pub fn inverse(&self, a: &mut [u32], backend: NttBackend) -> Result<()> {
        self.run(a, backend, Direction::Inverse, None)
    }

    /// Segmented transform with every byte product instrumented.
    pub fn run_probed(
        &self,
        a: &mut [u32],
        direction: Direction,
        probe: &mut TcuProbe,
    ) -> Result<()> {
        self.run(a, NttBackend::Segmented, direction, Some(probe))
    }

    fn run(
        &self,
        a: &mut [u32],
        backend: NttBackend,
        direction: Direction,
        probe: Option<&mut TcuProbe>,
    ) -> Result<()> {
        self.check_len(a)?;
        let out_scale = match direction {
            Direction::Forward => None,
            Direction::Inverse => Some(self.n_inv),
        };
        match backend {
            NttBackend::Butterfly => match direction {
                Direction::Forward => butterfly::forward(a, &self.modulus, &self.psi_rev),
                Direction::Inverse => {
                    butterfly::inverse(a, &self.modulus, &self.psi_inv_rev, self.n_inv)
                }
            },
            NttBackend::Gemm => {
                let out = gemm::transform(a, self.twiddles(direction), &self.modulus, out_scale);
                a.copy_from_slice(&out);
            }
            NttBackend::Segmented => {
                let out = segmented::transform(
                    a,
                    self.segmented(direction),
                    self.twiddles(direction),
                    &self.modulus,
                    out_scale,
                    probe,
                )?;
                a.copy_from_slice(&out);
            }
        }
        Ok(())
    }

    fn inject_fault(&mut self) {
        let q = self.modulus;
        self.psi_rev[1] = q.add(self.psi_rev[1], 1);
        let _ = self.twiddles(Direction::Forward);
        let tw = self.forward.get_mut().expect("initialized");
        tw.w2[1] = q.add(tw.w2[1], 1);
        self.forward_seg = OnceLock::new();
    }
}

/// Transform tables for every prime of a basis at one length `n`. Shared read-only
/// by all transforms, batched or not.
#[derive(Debug)]
pub struct TwiddleFactorSet {
    n: usize,
    tables: Vec<NttTable>,
    index: HashMap<u32, usize>,
}

impl TwiddleFactorSet {
    pub fn new(n: usize, primes: &[u32]) -> Result<Self> {
        let tables = primes
            .iter()
            .map(|&q| NttTable::new(q, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_tables(n, tables))
    }

    /// Tables for every prime of a chain, using the chain's stored roots.
    pub fn for_chain(chain: &ModulusChain) -> Result<Self> {
        let tables = chain
            .q
            .iter()
            .chain(&chain.p)
            .map(|e| NttTable::with_root(e.value, chain.n, e.psi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_tables(chain.n, tables))
    }

    fn from_tables(n: usize, tables: Vec<NttTable>) -> Self {
        let index = tables
            .iter()
            .enumerate()
            .map(|(i, t)| (t.modulus.value(), i))
            .collect();
        Self { n, tables, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn primes(&self) -> Vec<u32> {
        self.tables.iter().map(|t| t.modulus.value()).collect()
    }

    pub fn table(&self, q: u32) -> Result<&NttTable> {
        self.index
            .get(&q)
            .map(|&i| &self.tables[i])
            .ok_or_else(|| Error::Parameter(format!("no twiddle factors for prime {q}")))
    }

    /// Perturb the first table so that every backend produces wrong output.
    #[doc(hidden)]
    pub fn inject_fault(&mut self) {
        if let Some(t) = self.tables.first_mut() {
            t.inject_fault();
        }
    }

    fn check(&self, poly: &RnsPolynomial) -> Result<Vec<&NttTable>> {
        if poly.n() != self.n {
            return Err(Error::Shape(format!(
                "polynomial degree {} but tables for {}",
                poly.n(),
                self.n
            )));
        }
        poly.basis().iter().map(|&q| self.table(q)).collect()
    }
}

fn transform_poly(
    poly: &RnsPolynomial,
    tw: &TwiddleFactorSet,
    backend: NttBackend,
    direction: Direction,
) -> Result<RnsPolynomial> {
    let (from, to) = match direction {
        Direction::Forward => (Domain::Coefficient, Domain::Ntt),
        Direction::Inverse => (Domain::Ntt, Domain::Coefficient),
    };
    poly.domain().expect(from)?;
    let tables = tw.check(poly)?;
    let mut out = poly.clone();
    out.par_rows_mut()
        .zip(tables.par_iter())
        .try_for_each(|((_, row), table)| table.run(row, backend, direction, None))?;
    out.set_domain(to);
    Ok(out)
}

/// Coefficient domain to NTT domain, row by row.
pub fn ntt_forward(
    poly: &RnsPolynomial,
    tw: &TwiddleFactorSet,
    backend: NttBackend,
) -> Result<RnsPolynomial> {
    transform_poly(poly, tw, backend, Direction::Forward)
}

/// NTT domain back to coefficient domain, including the `n^{-1}` factor.
pub fn ntt_inverse(
    poly: &RnsPolynomial,
    tw: &TwiddleFactorSet,
    backend: NttBackend,
) -> Result<RnsPolynomial> {
    transform_poly(poly, tw, backend, Direction::Inverse)
}

/// Instrumented segmented transform of a whole polynomial.
pub fn ntt_probed(
    poly: &RnsPolynomial,
    tw: &TwiddleFactorSet,
    direction: Direction,
    probe: &mut TcuProbe,
) -> Result<RnsPolynomial> {
    let (from, to) = match direction {
        Direction::Forward => (Domain::Coefficient, Domain::Ntt),
        Direction::Inverse => (Domain::Ntt, Domain::Coefficient),
    };
    poly.domain().expect(from)?;
    let tables = tw.check(poly)?;
    let mut out = poly.clone();
    for (i, table) in tables.iter().enumerate() {
        table.run_probed(out.row_mut(i), direction, probe)?;
    }
    out.set_domain(to);
    Ok(out)
}
