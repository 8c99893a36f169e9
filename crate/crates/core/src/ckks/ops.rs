//! Encryption and the homomorphic operations.

use rand::Rng;

use super::keys::{PublicKey, SecretKey, SwitchingKey};
use super::{sampling, Ciphertext, CkksContext, Plaintext};
use crate::error::{Error, Result};
use crate::kernels::{conjugate, ele_add, ele_sub, forbenius_map, hada_mult, mul_row_scalars};
use crate::modarith::Modulus;
use crate::ntt::{ntt_forward, ntt_inverse};
use crate::rns::{split_rows, Domain, RnsPolynomial};

impl CkksContext {
    fn check_prefix(&self, poly: &RnsPolynomial) -> Result<usize> {
        let rows = poly.row_count();
        if rows == 0 || rows > self.q.len() || poly.basis() != &self.q[..rows] {
            return Err(Error::Basis(format!(
                "basis {:?} is not a prefix of the ciphertext chain",
                poly.basis()
            )));
        }
        Ok(rows - 1)
    }

    pub fn encrypt<R: Rng + ?Sized>(
        &self,
        pt: &Plaintext,
        pk: &PublicKey,
        rng: &mut R,
    ) -> Result<Ciphertext> {
        let level = pt.level;
        if level > self.max_level() || pt.poly.row_count() != level + 1 {
            return Err(Error::Level(level, pt.poly.row_count()));
        }
        pt.poly.domain().expect(Domain::Ntt)?;
        let basis = self.level_basis(level);
        let n = self.n();
        let v = ntt_forward(
            &RnsPolynomial::from_signed(&sampling::ternary(n, rng), basis),
            self.twiddles(),
            self.backend(),
        )?;
        let e0 = RnsPolynomial::from_signed(&sampling::gaussian(n, rng), basis);
        let e1 = RnsPolynomial::from_signed(&sampling::gaussian(n, rng), basis);
        let e0 = ntt_forward(&e0, self.twiddles(), self.backend())?;
        let e1 = ntt_forward(&e1, self.twiddles(), self.backend())?;
        let pk_b = pk.b.truncate_rows(level + 1);
        let pk_a = pk.a.truncate_rows(level + 1);
        let b = ele_add(&ele_add(&hada_mult(&v, &pk_b)?, &e0)?, &pt.poly)?;
        let a = ele_add(&hada_mult(&v, &pk_a)?, &e1)?;
        Ok(Ciphertext {
            b,
            a,
            scale: pt.scale,
            level,
        })
    }

    pub fn decrypt(&self, ct: &Ciphertext, sk: &SecretKey) -> Result<Plaintext> {
        ct.check_shape();
        let s = sk.restricted(ct.basis())?;
        let poly = ele_add(&ct.b, &hada_mult(&ct.a, &s)?)?;
        Ok(Plaintext {
            poly,
            scale: ct.scale,
            level: ct.level,
        })
    }

    fn check_same(&self, x: &Ciphertext, y: &Ciphertext) -> Result<()> {
        if x.level != y.level {
            return Err(Error::Level(x.level, y.level));
        }
        if x.scale != y.scale {
            return Err(Error::Scale(x.scale, y.scale));
        }
        Ok(())
    }

    pub fn hadd(&self, x: &Ciphertext, y: &Ciphertext) -> Result<Ciphertext> {
        self.check_same(x, y)?;
        Ok(Ciphertext {
            b: ele_add(&x.b, &y.b)?,
            a: ele_add(&x.a, &y.a)?,
            scale: x.scale,
            level: x.level,
        })
    }

    pub fn hsub(&self, x: &Ciphertext, y: &Ciphertext) -> Result<Ciphertext> {
        self.check_same(x, y)?;
        Ok(Ciphertext {
            b: ele_sub(&x.b, &y.b)?,
            a: ele_sub(&x.a, &y.a)?,
            scale: x.scale,
            level: x.level,
        })
    }

    /// Ciphertext times plaintext; the scales multiply.
    pub fn cmult(&self, ct: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext> {
        if ct.level != pt.level {
            return Err(Error::Level(ct.level, pt.level));
        }
        Ok(Ciphertext {
            b: hada_mult(&ct.b, &pt.poly)?,
            a: hada_mult(&ct.a, &pt.poly)?,
            scale: ct.scale * pt.scale,
            level: ct.level,
        })
    }

    /// Re-encrypt `d` (NTT form over `Q_l`) from the key's source secret to the
    /// target secret: `c0 + c1*s ≈ d*s'`.
    ///
    /// Decompose into slices of `alpha` primes, raise each slice to `Q_l ∪ P`, take
    /// the inner product with the key pairs, and divide by `P` on the way down.
    pub fn key_switch(
        &self,
        d: &RnsPolynomial,
        ksk: &SwitchingKey,
    ) -> Result<(RnsPolynomial, RnsPolynomial)> {
        d.domain().expect(Domain::Ntt)?;
        let level = self.check_prefix(d)?;
        let alpha = self.params().alpha();
        let slices_needed = (level + 1).div_ceil(alpha);
        if ksk.pairs.len() < slices_needed {
            return Err(Error::Basis(format!(
                "switching key has {} pairs, {slices_needed} needed",
                ksk.pairs.len()
            )));
        }
        let ext = self.extended_basis(level);
        let convs = self.converters(level)?;
        let tw = self.twiddles();
        let backend = self.backend();

        // Dcomp
        let d_coeff = ntt_inverse(d, tw, backend)?;
        let digits = split_rows(&d_coeff, alpha);

        let mut acc: Option<(RnsPolynomial, RnsPolynomial)> = None;
        for (j, digit) in digits.iter().enumerate() {
            // ModUp
            let raised = convs.mod_up[j].convert(digit)?;
            let raised = ntt_forward(&raised, tw, backend)?;
            // Inner product
            let (kb, ka) = &ksk.pairs[j];
            if kb.basis() != self.key_basis().as_slice() {
                return Err(Error::Basis("switching key is not over Q_L ∪ P".into()));
            }
            let kb = kb.select_rows(&ext)?;
            let ka = ka.select_rows(&ext)?;
            let t0 = hada_mult(&raised, &kb)?;
            let t1 = hada_mult(&raised, &ka)?;
            acc = Some(match acc {
                None => (t0, t1),
                Some((s0, s1)) => (ele_add(&s0, &t0)?, ele_add(&s1, &t1)?),
            });
        }
        let (c0, c1) = acc.expect("at least one digit");
        Ok((self.mod_down(&c0, level)?, self.mod_down(&c1, level)?))
    }

    /// `(x_Q - Conv_{P->Q}([x]_P)) * P^{-1}` for `x` over `Q_l ∪ P` in NTT form.
    fn mod_down(&self, x: &RnsPolynomial, level: usize) -> Result<RnsPolynomial> {
        let tw = self.twiddles();
        let backend = self.backend();
        let q_part = x.truncate_rows(level + 1);
        let p_part = x.select_rows(self.special_basis())?;
        let p_coeff = ntt_inverse(&p_part, tw, backend)?;
        let lifted = self.converters(level)?.mod_down.convert(&p_coeff)?;
        let lifted = ntt_forward(&lifted, tw, backend)?;
        mul_row_scalars(&ele_sub(&q_part, &lifted)?, &self.p_inv_mod_q[..=level])
    }

    /// Tensor product followed by relinearization; the scales multiply.
    pub fn hmult(
        &self,
        x: &Ciphertext,
        y: &Ciphertext,
        relin: &SwitchingKey,
    ) -> Result<Ciphertext> {
        self.check_same(x, y)?;
        x.b.domain().expect(Domain::Ntt)?;
        y.b.domain().expect(Domain::Ntt)?;
        let d0 = hada_mult(&x.b, &y.b)?;
        let d1 = ele_add(&hada_mult(&x.b, &y.a)?, &hada_mult(&x.a, &y.b)?)?;
        let d2 = hada_mult(&x.a, &y.a)?;
        let (k0, k1) = self.key_switch(&d2, relin)?;
        Ok(Ciphertext {
            b: ele_add(&d0, &k0)?,
            a: ele_add(&d1, &k1)?,
            scale: x.scale * y.scale,
            level: x.level,
        })
    }

    /// Rotate slots left by `r` (slot `i` receives slot `i + r`).
    pub fn hrotate(&self, ct: &Ciphertext, r: usize, key: &SwitchingKey) -> Result<Ciphertext> {
        let b = forbenius_map(&ct.b, r)?;
        let a = forbenius_map(&ct.a, r)?;
        let (k0, k1) = self.key_switch(&a, key)?;
        Ok(Ciphertext {
            b: ele_add(&b, &k0)?,
            a: k1,
            scale: ct.scale,
            level: ct.level,
        })
    }

    /// Complex-conjugate every slot.
    pub fn hconjugate(&self, ct: &Ciphertext, key: &SwitchingKey) -> Result<Ciphertext> {
        let b = conjugate(&ct.b);
        let a = conjugate(&ct.a);
        let (k0, k1) = self.key_switch(&a, key)?;
        Ok(Ciphertext {
            b: ele_add(&b, &k0)?,
            a: k1,
            scale: ct.scale,
            level: ct.level,
        })
    }

    /// Divide by the top prime `q_l` with rounding and drop it.
    pub fn rescale(&self, ct: &Ciphertext) -> Result<Ciphertext> {
        if ct.level == 0 {
            return Err(Error::LevelExhausted);
        }
        let top = self.q[ct.level];
        Ok(Ciphertext {
            b: self.rescale_poly(&ct.b)?,
            a: self.rescale_poly(&ct.a)?,
            scale: ct.scale / top as f64,
            level: ct.level - 1,
        })
    }

    fn rescale_poly(&self, x: &RnsPolynomial) -> Result<RnsPolynomial> {
        let level = self.check_prefix(x)?;
        let tw = self.twiddles();
        let backend = self.backend();
        let top_q = self.q[level];
        let top_m = Modulus::new(top_q);
        let domain = x.domain();
        let mut top = x.row(level).to_vec();
        if domain == Domain::Ntt {
            tw.table(top_q)?.inverse(&mut top, backend)?;
        }
        let centered: Vec<i64> = top.iter().map(|&c| top_m.center(c)).collect();
        let mut out = x.truncate_rows(level);
        let remaining = self.q[..level].to_vec();
        let results: Vec<Result<()>> = {
            use rayon::prelude::*;
            out.par_rows_mut()
                .enumerate()
                .map(|(i, (qi, row))| {
                    let m = Modulus::new(qi);
                    let mut t: Vec<u32> = centered.iter().map(|&c| m.reduce_i64(c)).collect();
                    if domain == Domain::Ntt {
                        tw.table(remaining[i])?.forward(&mut t, backend)?;
                    }
                    let inv = m.inv(top_q % qi);
                    for (r, tv) in row.iter_mut().zip(t) {
                        *r = m.mul(m.sub(*r, tv), inv);
                    }
                    Ok(())
                })
                .collect()
        };
        results.into_iter().collect::<Result<()>>()?;
        Ok(out)
    }

    /// Drop primes down to `level` without scaling.
    pub fn drop_to_level(&self, ct: &Ciphertext, level: usize) -> Result<Ciphertext> {
        if level > ct.level {
            return Err(Error::Level(level, ct.level));
        }
        Ok(Ciphertext {
            b: ct.b.truncate_rows(level + 1),
            a: ct.a.truncate_rows(level + 1),
            scale: ct.scale,
            level,
        })
    }
}
