//! Twiddle-factor matrices for the matrix-product formulation of the transform.

use super::plan::NttPlan;
use crate::modarith::Modulus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `w1` is `n1 x n1`, `w2` is `n1 x n2`, `w3` is `n2 x n2`; all row-major.
///
/// With the input reshaped row-major into an `n1 x n2` matrix `X`, the transform is
/// `D = ((w1 * X) .* w2) * w3 (mod q)` and output index `k1 + n1*k2` reads `D[k1][k2]`.
/// Forward entries (psi of order 2n):
///   w1[i][j] = psi_{2n1}^{2ij+j}, w2[i][j] = psi^{2ij+j}, w3[i][j] = psi_{2n2}^{2ij}.
/// Inverse entries use phi = psi^{-1} with the odd-power twist on the output index:
///   w1[i][j] = phi_{2n1}^{2ij}, w2[i][j] = phi^{2ij+i}, w3[i][j] = phi_{2n2}^{2ij+j}.
/// The inverse's n^{-1} factor is applied by the backend at the output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwiddleMatrices {
    pub plan: NttPlan,
    pub direction: Direction,
    pub w1: Vec<u32>,
    pub w2: Vec<u32>,
    pub w3: Vec<u32>,
}

impl TwiddleMatrices {
    pub fn build(plan: NttPlan, modulus: &Modulus, psi: u32, direction: Direction) -> Self {
        let NttPlan { n, n1, n2 } = plan;
        let two_n = 2 * n;
        let root = match direction {
            Direction::Forward => psi,
            Direction::Inverse => modulus.inv(psi),
        };
        let mut pw = Vec::with_capacity(two_n);
        let mut x = 1u32;
        for _ in 0..two_n {
            pw.push(x);
            x = modulus.mul(x, root);
        }
        let at = |e: usize| pw[e % two_n];
        let mut w1 = Vec::with_capacity(n1 * n1);
        let mut w2 = Vec::with_capacity(n1 * n2);
        let mut w3 = Vec::with_capacity(n2 * n2);
        match direction {
            Direction::Forward => {
                for i in 0..n1 {
                    for j in 0..n1 {
                        w1.push(at(n2 * (2 * i * j + j)));
                    }
                }
                for i in 0..n1 {
                    for j in 0..n2 {
                        w2.push(at(2 * i * j + j));
                    }
                }
                for i in 0..n2 {
                    for j in 0..n2 {
                        w3.push(at(n1 * 2 * i * j));
                    }
                }
            }
            Direction::Inverse => {
                for i in 0..n1 {
                    for j in 0..n1 {
                        w1.push(at(n2 * 2 * i * j));
                    }
                }
                for i in 0..n1 {
                    for j in 0..n2 {
                        w2.push(at(2 * i * j + i));
                    }
                }
                for i in 0..n2 {
                    for j in 0..n2 {
                        w3.push(at(n1 * (2 * i * j + j)));
                    }
                }
            }
        }
        Self {
            plan,
            direction,
            w1,
            w2,
            w3,
        }
    }
}

pub fn build_twiddles(plan: NttPlan, q: u32, psi: u32, direction: Direction) -> TwiddleMatrices {
    TwiddleMatrices::build(plan, &Modulus::new(q), psi, direction)
}
