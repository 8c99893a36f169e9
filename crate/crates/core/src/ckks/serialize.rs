//! Length-prefixed binary format for ciphertexts, plaintexts and keys.
//!
//! Layout: `b"TFHE1"`, payload length as u64 LE, then the payload: the 32-byte
//! parameter hash, a kind byte, level (u32), scale (f64 bits), polynomial count
//! (u32), and each polynomial as `n`, basis length, primes, domain byte and rows
//! of little-endian u32.

use std::io::{Read, Write};

use super::keys::{PublicKey, SwitchingKey};
use super::{Ciphertext, Plaintext};
use crate::error::{Error, Result};
use crate::params::CkksParams;
use crate::rns::{Domain, RnsPolynomial};

const MAGIC: &[u8; 5] = b"TFHE1";

#[derive(Debug, Clone, PartialEq)]
pub enum Serialized {
    Plaintext(Plaintext),
    Ciphertext(Ciphertext),
    PublicKey(PublicKey),
    SwitchingKey(SwitchingKey),
}

impl Serialized {
    fn kind(&self) -> u8 {
        match self {
            Self::Plaintext(_) => 1,
            Self::Ciphertext(_) => 2,
            Self::PublicKey(_) => 3,
            Self::SwitchingKey(_) => 4,
        }
    }

    fn parts(&self) -> (usize, f64, Vec<&RnsPolynomial>) {
        match self {
            Self::Plaintext(p) => (p.level, p.scale, vec![&p.poly]),
            Self::Ciphertext(c) => (c.level, c.scale, vec![&c.b, &c.a]),
            Self::PublicKey(k) => (0, 0.0, vec![&k.b, &k.a]),
            Self::SwitchingKey(k) => (0, 0.0, k.pairs.iter().flat_map(|(b, a)| [b, a]).collect()),
        }
    }
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn write_poly(buf: &mut Vec<u8>, p: &RnsPolynomial) {
    put_u32(buf, p.n() as u32);
    put_u32(buf, p.row_count() as u32);
    for &q in p.basis() {
        put_u32(buf, q);
    }
    buf.push(match p.domain() {
        Domain::Coefficient => 0,
        Domain::Ntt => 1,
    });
    for &c in p.data() {
        put_u32(buf, c);
    }
}

pub fn write_object<W: Write>(mut w: W, params: &CkksParams, obj: &Serialized) -> Result<()> {
    let (level, scale, polys) = obj.parts();
    let mut payload = Vec::new();
    payload.extend_from_slice(&params.hash());
    payload.push(obj.kind());
    put_u32(&mut payload, level as u32);
    payload.extend_from_slice(&scale.to_bits().to_le_bytes());
    put_u32(&mut payload, polys.len() as u32);
    for p in polys {
        write_poly(&mut payload, p);
    }
    let io = |e: std::io::Error| Error::Serialization(e.to_string());
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(payload.len() as u64).to_le_bytes())
        .map_err(io)?;
    w.write_all(&payload).map_err(io)?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Serialization("truncated payload".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn poly(&mut self) -> Result<RnsPolynomial> {
        let n = self.u32()? as usize;
        let rows = self.u32()? as usize;
        let basis = (0..rows).map(|_| self.u32()).collect::<Result<Vec<_>>>()?;
        let domain = match self.u8()? {
            0 => Domain::Coefficient,
            1 => Domain::Ntt,
            d => return Err(Error::Serialization(format!("unknown domain tag {d}"))),
        };
        let count = n
            .checked_mul(rows)
            .ok_or_else(|| Error::Serialization("polynomial size overflows".into()))?;
        let bytes = self.take(count.saturating_mul(4))?;
        let data = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        RnsPolynomial::from_rows(n, &basis, domain, data)
            .map_err(|e| Error::Serialization(e.to_string()))
    }
}

pub fn read_object<R: Read>(mut r: R, params: &CkksParams) -> Result<Serialized> {
    let io = |e: std::io::Error| Error::Serialization(e.to_string());
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Serialization("bad magic bytes".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len).map_err(io)?;
    let len = u64::from_le_bytes(len);
    let mut payload = Vec::new();
    r.take(len).read_to_end(&mut payload).map_err(io)?;
    if payload.len() as u64 != len {
        return Err(Error::Serialization(format!(
            "payload length {} does not match header {len}",
            payload.len()
        )));
    }
    let mut c = Cursor {
        buf: &payload,
        pos: 0,
    };
    if c.take(32)? != params.hash() {
        return Err(Error::Serialization("parameter hash mismatch".into()));
    }
    let kind = c.u8()?;
    let level = c.u32()? as usize;
    let scale = f64::from_bits(c.u64()?);
    let count = c.u32()? as usize;
    let polys = (0..count).map(|_| c.poly()).collect::<Result<Vec<_>>>()?;
    if c.pos != payload.len() {
        return Err(Error::Serialization("trailing bytes in payload".into()));
    }
    let bad_count = || Error::Serialization(format!("kind {kind} with {count} polynomials"));
    let mut it = polys.into_iter();
    Ok(match (kind, count) {
        (1, 1) => Serialized::Plaintext(Plaintext {
            poly: it.next().unwrap(),
            scale,
            level,
        }),
        (2, 2) => Serialized::Ciphertext(Ciphertext {
            b: it.next().unwrap(),
            a: it.next().unwrap(),
            scale,
            level,
        }),
        (3, 2) => Serialized::PublicKey(PublicKey {
            b: it.next().unwrap(),
            a: it.next().unwrap(),
        }),
        (4, c) if c % 2 == 0 && c > 0 => {
            let mut pairs = Vec::with_capacity(c / 2);
            while let (Some(b), Some(a)) = (it.next(), it.next()) {
                pairs.push((b, a));
            }
            Serialized::SwitchingKey(SwitchingKey { pairs })
        }
        (1..=4, _) => return Err(bad_count()),
        _ => return Err(Error::Serialization(format!("unknown object kind {kind}"))),
    })
}
