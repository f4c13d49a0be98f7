//! Binary-field arithmetic used by the S-box generator and its oracles.

use std::fmt;

/// Reduction polynomial of the AES field, x^8 + x^4 + x^3 + x + 1.
pub const AES_POLY: u16 = 0x11B;

/// Element of GF(2^8) modulo [`AES_POLY`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub fn mul(self, other: Gf256) -> Gf256 {
        let (mut a, mut b, mut p) = (self.0, other.0, 0u8);
        while b != 0 {
            if b & 1 != 0 {
                p ^= a;
            }
            let carry = a & 0x80;
            a <<= 1;
            if carry != 0 {
                a ^= (AES_POLY & 0xff) as u8;
            }
            b >>= 1;
        }
        Gf256(p)
    }

    pub fn pow(self, mut e: u32) -> Gf256 {
        let (mut base, mut acc) = (self, Gf256(1));
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, with 0 mapped to 0.
    pub fn inverse(self) -> Gf256 {
        self.pow(254)
    }
}

/// GF(2^4) with a configurable degree-4 reduction polynomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Gf16Field {
    poly: u8,
}

impl Gf16Field {
    /// Field defined by `poly` (bit 4 set). Irreducibility is not checked
    /// here; see [`is_irreducible`].
    pub const fn new(poly: u8) -> Self {
        Gf16Field { poly }
    }

    pub fn poly(&self) -> u8 {
        self.poly
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        let (mut a, mut b, mut p) = (a & 0xf, b & 0xf, 0u8);
        while b != 0 {
            if b & 1 != 0 {
                p ^= a;
            }
            a <<= 1;
            if a & 0x10 != 0 {
                a ^= self.poly;
            }
            b >>= 1;
        }
        p
    }

    pub fn square(&self, a: u8) -> u8 {
        self.mul(a, a)
    }

    /// `a^14`, which is the inverse for nonzero `a` and 0 for 0.
    pub fn inverse(&self, a: u8) -> u8 {
        let a2 = self.square(a);
        let a4 = self.square(a2);
        let a8 = self.square(a4);
        self.mul(self.mul(a8, a4), a2)
    }

    /// `x^k mod poly` as a 4-bit mask, for `k < 8`.
    pub fn reduce_power(&self, k: u32) -> u8 {
        let mut v = 1u8;
        for _ in 0..k {
            v <<= 1;
            if v & 0x10 != 0 {
                v ^= self.poly;
            }
        }
        v
    }
}

/// Irreducibility over GF(2) by trial division, for polynomials up to degree 8.
pub fn is_irreducible(poly: u16) -> bool {
    let deg = 15 - poly.leading_zeros() as i32;
    if deg < 1 {
        return false;
    }
    for d in 2u16..(1 << (deg / 2 + 1)) {
        let dd = 15 - d.leading_zeros() as i32;
        if dd >= 1 && dd <= deg / 2 && poly_mod(poly, d) == 0 {
            return false;
        }
    }
    true
}

fn poly_mod(mut a: u16, b: u16) -> u16 {
    let db = 15 - b.leading_zeros() as i32;
    loop {
        let da = 15 - a.leading_zeros() as i32;
        if a == 0 || da < db {
            return a;
        }
        a ^= b << (da - db);
    }
}

/// 8x8 matrix over GF(2). Row `i` is a mask over input bits; output bit `i`
/// is the parity of `row[i] & x`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitMatrix8 {
    pub rows: [u8; 8],
}

impl BitMatrix8 {
    pub const IDENTITY: BitMatrix8 = BitMatrix8 {
        rows: [1, 2, 4, 8, 16, 32, 64, 128],
    };

    /// Matrix whose column `j` is `cols[j]`, the image of basis vector `j`.
    pub fn from_columns(cols: [u8; 8]) -> Self {
        let mut rows = [0u8; 8];
        for (j, c) in cols.iter().enumerate() {
            for (i, row) in rows.iter_mut().enumerate() {
                if (c >> i) & 1 == 1 {
                    *row |= 1 << j;
                }
            }
        }
        BitMatrix8 { rows }
    }

    pub fn apply(&self, x: u8) -> u8 {
        self.rows.iter().enumerate().fold(0u8, |acc, (i, r)| {
            acc | ((((r & x).count_ones() & 1) as u8) << i)
        })
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn mul(&self, other: &BitMatrix8) -> BitMatrix8 {
        let mut rows = [0u8; 8];
        for (i, row) in rows.iter_mut().enumerate() {
            for j in 0..8 {
                if (self.rows[i] >> j) & 1 == 1 {
                    *row ^= other.rows[j];
                }
            }
        }
        BitMatrix8 { rows }
    }

    /// Gauss-Jordan inverse, `None` when singular.
    pub fn inverse(&self) -> Option<BitMatrix8> {
        let mut a = self.rows;
        let mut inv = BitMatrix8::IDENTITY.rows;
        for col in 0..8 {
            let pivot = (col..8).find(|&r| (a[r] >> col) & 1 == 1)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..8 {
                if r != col && (a[r] >> col) & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Some(BitMatrix8 { rows: inv })
    }
}

impl fmt::Debug for BitMatrix8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.rows.iter().map(|r| format!("{r:08b}")))
            .finish()
    }
}

/// The AES affine map `b_i ^ b_{i+4} ^ b_{i+5} ^ b_{i+6} ^ b_{i+7}` (indices
/// mod 8), without the constant.
pub fn aes_affine_matrix() -> BitMatrix8 {
    let mut rows = [0u8; 8];
    for (i, row) in rows.iter_mut().enumerate() {
        for k in [0, 4, 5, 6, 7] {
            *row |= 1 << ((i + k) % 8);
        }
    }
    BitMatrix8 { rows }
}

pub const AES_AFFINE_CONSTANT: u8 = 0x63;

/// Standard AES SubBytes: inverse in GF(2^8) then the affine map.
pub fn canonical_sbox(x: u8) -> u8 {
    aes_affine_matrix().apply(Gf256(x).inverse().0) ^ AES_AFFINE_CONSTANT
}
