//! Arithmetic in GF(2^8).
//!
//! Elements are bytes; each bit is a coefficient of a polynomial over GF(2)
//! of degree at most 7. Addition is XOR. Multiplication is polynomial
//! multiplication reduced modulo x^8 + x^4 + x^3 + x^2 + 1 (0x11D), the
//! polynomial conventionally used by Reed-Solomon codecs. With this
//! polynomial `2 * 0x80 = 0x1D`.
//!
//! Multiplication and inversion go through log/exp tables built at compile
//! time with generator 2.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub};

use thiserror::Error;

/// Full reduction polynomial, including the x^8 term.
pub const POLY: u16 = 0x11D;

static EXP: [u8; 512] = build_exp();
static LOG: [u8; 256] = build_log();

const fn build_exp() -> [u8; 512] {
    let mut table = [0u8; 512];
    let mut val: u16 = 1;
    let mut i = 0;
    while i < 255 {
        table[i] = val as u8;
        table[i + 255] = val as u8;
        val <<= 1;
        if val & 0x100 != 0 {
            val ^= POLY;
        }
        i += 1;
    }
    table[510] = table[0];
    table[511] = table[1];
    table
}

const fn build_log() -> [u8; 256] {
    let mut table = [0u8; 256];
    let mut val: u16 = 1;
    let mut i = 0;
    while i < 255 {
        table[val as usize] = i as u8;
        val <<= 1;
        if val & 0x100 != 0 {
            val ^= POLY;
        }
        i += 1;
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("zero has no multiplicative inverse in GF(256)")]
    ZeroInverse,
}

/// An element of GF(256).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    #[inline]
    pub const fn new(v: u8) -> Self {
        Self(v)
    }

    #[inline]
    pub const fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse. Fails for zero.
    pub fn inv(self) -> Result<Self, GfError> {
        if self.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(Self(EXP[255 - LOG[self.0 as usize] as usize]))
    }

    /// `self ^ e` by repeated multiplication through the log table.
    pub fn pow(self, e: u32) -> Self {
        if e == 0 {
            return Self::ONE;
        }
        if self.0 == 0 {
            return Self::ZERO;
        }
        let l = (LOG[self.0 as usize] as u64 * e as u64) % 255;
        Self(EXP[l as usize])
    }
}

/// Product of two field elements.
#[inline]
pub fn gf_mul(a: Gf256, b: Gf256) -> Gf256 {
    if a.0 == 0 || b.0 == 0 {
        return Gf256::ZERO;
    }
    Gf256(EXP[LOG[a.0 as usize] as usize + LOG[b.0 as usize] as usize])
}

/// Inverse of a nonzero field element.
#[inline]
pub fn gf_inv(a: Gf256) -> Result<Gf256, GfError> {
    a.inv()
}

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256({:#04x})", self.0)
    }
}

impl From<u8> for Gf256 {
    fn from(v: u8) -> Self {
        Self(v)
    }
}

impl Add for Gf256 {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf256 {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Self) {
        self.0 ^= rhs.0;
    }
}

impl Sub for Gf256 {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl Mul for Gf256 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        gf_mul(self, rhs)
    }
}

impl MulAssign for Gf256 {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = gf_mul(*self, rhs);
    }
}

impl Div for Gf256 {
    type Output = Self;
    /// Panics on division by zero; use [`Gf256::inv`] for a checked path.
    #[inline]
    fn div(self, rhs: Self) -> Self {
        gf_mul(self, rhs.inv().expect("division by zero in GF(256)"))
    }
}

/// `dst[i] ^= c * src[i]` over whole byte slices.
pub fn mul_add_slice(dst: &mut [u8], src: &[u8], c: Gf256) {
    debug_assert_eq!(dst.len(), src.len());
    if c.is_zero() {
        return;
    }
    if c == Gf256::ONE {
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= *s;
        }
        return;
    }
    let lc = LOG[c.0 as usize] as usize;
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d ^= EXP[lc + LOG[s as usize] as usize];
        }
    }
}
