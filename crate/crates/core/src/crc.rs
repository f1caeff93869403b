//! Bitwise CRC over bit vectors, used by CRC-aided list decoding.

use crate::error::{Error, Result};

/// CRC generator polynomial written with its leading term, e.g. `0x107` for
/// `x^8 + x^2 + x + 1`. Zero initial register, no reflection, no final XOR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Crc {
    poly: u64,
}

impl Crc {
    pub fn new(poly: u64) -> Result<Self> {
        if poly < 2 || poly >> 33 != 0 {
            return Err(Error::Range(format!(
                "crc polynomial {poly:#x} must have degree 1..=32"
            )));
        }
        if poly & 1 == 0 {
            return Err(Error::Range(format!(
                "crc polynomial {poly:#x} must have a constant term"
            )));
        }
        Ok(Self { poly })
    }

    pub fn poly(&self) -> u64 {
        self.poly
    }

    pub fn width(&self) -> usize {
        63 - self.poly.leading_zeros() as usize
    }

    /// Remainder bits, most significant first.
    pub fn remainder(&self, bits: &[u8]) -> Vec<u8> {
        let w = self.width();
        let top = 1u64 << w;
        let mut reg = 0u64;
        for &b in bits {
            let fb = ((reg >> (w - 1)) & 1) ^ u64::from(b & 1);
            reg = (reg << 1) & (top - 1);
            if fb == 1 {
                reg ^= self.poly & (top - 1);
            }
        }
        (0..w).rev().map(|i| ((reg >> i) & 1) as u8).collect()
    }

    /// `message || remainder(message)`.
    pub fn attach(&self, message: &[u8]) -> Vec<u8> {
        let mut out = message.to_vec();
        out.extend(self.remainder(message));
        out
    }

    /// True when the trailing `width` bits are the CRC of the rest.
    pub fn check(&self, bits: &[u8]) -> bool {
        let w = self.width();
        if bits.len() < w {
            return false;
        }
        let (msg, tail) = bits.split_at(bits.len() - w);
        self.remainder(msg) == tail
    }
}
