//! Canonical-embedding encoder.
//!
//! Slot `j` holds the evaluation at `zeta^{e_j}` with `zeta = exp(i pi / n)` and
//! `e_j = 5^{-j} mod 2n`; the conjugate evaluations are filled with conjugated
//! values so the coefficient vector is real. With this ordering, the Frobenius map
//! of index `r` rotates slots left by `r`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::modarith::Modulus;
use crate::rns::RnsPolynomial;

pub struct Encoder {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // zeta^i
    twist: Vec<Complex64>,
    slot_index: Vec<usize>,
    conj_index: Vec<usize>,
}

impl std::fmt::Debug for Encoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Encoder").field("n", &self.n).finish()
    }
}

fn inverse_of_five(two_n: usize) -> usize {
    (1..two_n)
        .step_by(2)
        .find(|x| x * 5 % two_n == 1)
        .expect("5 is a unit")
}

impl Encoder {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let two_n = 2 * n;
        let g = inverse_of_five(two_n);
        let slots = n / 2;
        let mut slot_index = Vec::with_capacity(slots);
        let mut conj_index = Vec::with_capacity(slots);
        let mut e = 1usize;
        for _ in 0..slots {
            slot_index.push((e - 1) / 2);
            conj_index.push((two_n - e - 1) / 2);
            e = e * g % two_n;
        }
        let twist = (0..n)
            .map(|i| Complex64::from_polar(1.0, std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            twist,
            slot_index,
            conj_index,
        }
    }

    /// Real coefficients `m_i` with `m(zeta^{e_j}) = scale * values[j]`, rounded.
    pub(crate) fn embed_inverse(
        &self,
        values: &[Complex64],
        scale: f64,
        slots: usize,
    ) -> Result<Vec<i128>> {
        if values.len() > slots {
            return Err(Error::TooManyValues {
                given: values.len(),
                slots,
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Parameter(format!("invalid scale {scale}")));
        }
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, &z) in values.iter().enumerate() {
            buf[self.slot_index[j]] = z * scale;
            buf[self.conj_index[j]] = z.conj() * scale;
        }
        self.forward.process(&mut buf);
        buf.iter()
            .zip(&self.twist)
            .map(|(s, t)| {
                let c = (s * t.conj()).re / n as f64;
                if !c.is_finite() || c.abs() >= 2f64.powi(126) {
                    return Err(Error::ScaleOverflow);
                }
                Ok(c.round() as i128)
            })
            .collect()
    }

    /// Slot values of the integer polynomial divided by `scale`.
    pub(crate) fn embed(&self, coeffs: &[BigInt], scale: f64) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.twist)
            .map(|(c, t)| t * (c.to_f64().unwrap_or(f64::NAN) / scale))
            .collect();
        self.inverse.process(&mut buf);
        self.slot_index.iter().map(|&k| buf[k]).collect()
    }
}

/// Residue rows for signed coefficients; rejects values at or beyond `Q/2`.
pub(crate) fn coeffs_to_rns(coeffs: &[i128], basis: &[u32]) -> Result<RnsPolynomial> {
    let log_q: f64 = basis.iter().map(|&q| (q as f64).log2()).sum();
    let max = coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    if max != 0 && (max as f64).log2() >= log_q - 1.0 {
        return Err(Error::ScaleOverflow);
    }
    let n = coeffs.len();
    let mut data = Vec::with_capacity(n * basis.len());
    for &q in basis {
        let m = Modulus::new(q);
        data.extend(coeffs.iter().map(|&c| m.reduce_i128(c)));
    }
    RnsPolynomial::from_rows(n, basis, crate::rns::Domain::Coefficient, data)
}

/// `max_j |got_j - want_j| / max_j |want_j|`; the absolute error when `want` is zero.
pub fn slot_error(got: &[Complex64], want: &[Complex64]) -> f64 {
    let abs = got
        .iter()
        .zip(want)
        .map(|(g, w)| (g - w).norm())
        .fold(0.0, f64::max);
    let norm = want.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if norm > 0.0 {
        abs / norm
    } else {
        abs
    }
}
