//! RNS-CKKS homomorphic encryption assembled from a small set of reusable
//! arithmetic kernels.
//!
//! Layers, bottom up:
//! - [`modarith`]: word-size modular arithmetic.
//! - [`params`]: prime chains, roots of unity, named parameter presets.
//! - [`rns`]: residue polynomials, CRT and fast basis conversion.
//! - [`ntt`]: the negacyclic transform with butterfly, GEMM and byte-segmented
//!   GEMM backends.
//! - [`kernels`]: Hadamard product, element-wise add/sub, Frobenius map, conjugation.
//! - [`ckks`]: encoding, keys, encryption and the homomorphic operations.
//! - [`batch`]: `(L, B, N)` packing of same-level operands and batched kernels.

pub mod batch;
pub mod ckks;
pub mod error;
pub mod kernels;
pub mod modarith;
pub mod ntt;
pub mod params;
pub mod rns;

pub use error::{Error, Result};
pub use ntt::NttBackend;
pub use params::CkksParams;
pub use rns::{Domain, RnsPolynomial};
