//! Composite-field AES S-box: field parameters, a software model of the
//! datapath, and the gate-level netlist generator.
//!
//! A byte is mapped by `delta` into GF((2^4)^2), written `h·Y + l` with
//! `Y^2 = Y + lambda`. Its inverse is
//!
//! ```text
//! D = h^2·lambda + (h + l)·l
//! (h·Y + l)^-1 = (h·D^-1)·Y + (h + l)·D^-1
//! ```
//!
//! and the result is mapped back by `delta^-1` fused with the AES affine
//! matrix. Nibbles are packed as `(h << 4) | l`.

mod build;
pub mod gf;

use thiserror::Error;

pub use build::{build_sbox_netlist, gf16_fragment, Gf16Op};

use crate::netlist::{vector_bits, SingleRailNetlist};
pub use gf::{canonical_sbox, BitMatrix8, Gf16Field, Gf256};

use gf::{aes_affine_matrix, is_irreducible, AES_AFFINE_CONSTANT};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SboxError {
    #[error("GF(2^4) polynomial {0:#04x} is not an irreducible degree-4 polynomial")]
    ReducibleBase(u8),
    #[error("x^2 + x + {0:#x} is reducible over GF(2^4)")]
    ReducibleExtension(u8),
    #[error("delta matrix is not invertible")]
    SingularDelta,
    #[error("delta and its stated inverse do not multiply to the identity")]
    DeltaInverseMismatch,
    #[error("delta is not a field isomorphism: delta({a:#04x} * {b:#04x}) differs")]
    NotIsomorphism { a: u8, b: u8 },
    #[error("affine matrix is not invertible")]
    SingularAffine,
}

/// Why a netlist failed the 256-entry S-box check.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SboxCheckError {
    #[error("netlist must declare inputs x0..x7 and outputs y0..y7 (missing `{0}`)")]
    Interface(String),
    #[error("input {input:#04x}: netlist gives {got:#04x}, expected {expected:#04x}")]
    Mismatch { input: u8, got: u8, expected: u8 },
    #[error("not a permutation: {value:#04x} appears twice")]
    NotBijective { value: u8 },
}

/// Simulate an S-box netlist on all 256 bytes. Input bit `i` drives `x{i}`
/// and output bit `i` is read from `y{i}`.
pub fn sbox_table(n: &SingleRailNetlist) -> Result<[u8; 256], SboxCheckError> {
    let position = |list: &[crate::netlist::SignalId], name: String| {
        list.iter()
            .position(|&s| n.name(s) == name)
            .ok_or(SboxCheckError::Interface(name))
    };
    let xs = (0..8)
        .map(|i| position(n.inputs(), format!("x{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let ys = (0..8)
        .map(|i| position(n.outputs(), format!("y{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    if n.inputs().len() != 8 {
        return Err(SboxCheckError::Interface("exactly 8 inputs".into()));
    }
    let mut table = [0u8; 256];
    for (x, slot) in table.iter_mut().enumerate() {
        let bits = vector_bits(x as u128, 8);
        let mut ins = vec![false; 8];
        for (i, &p) in xs.iter().enumerate() {
            ins[p] = bits[i];
        }
        let outs = n.simulate(&ins);
        *slot = ys
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, &p)| acc | ((outs[p] as u8) << i));
    }
    Ok(table)
}

/// Oracle equivalence against AES SubBytes on all inputs, then bijectivity.
pub fn check_sbox_netlist(n: &SingleRailNetlist) -> Result<(), SboxCheckError> {
    let table = sbox_table(n)?;
    for (x, &got) in table.iter().enumerate() {
        let expected = canonical_sbox(x as u8);
        if got != expected {
            return Err(SboxCheckError::Mismatch {
                input: x as u8,
                got,
                expected,
            });
        }
    }
    let mut seen = [false; 256];
    for &v in &table {
        if std::mem::replace(&mut seen[v as usize], true) {
            return Err(SboxCheckError::NotBijective { value: v });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CompositeFieldParams {
    /// Degree-4 reduction polynomial of the base field, bit 4 set.
    pub gf16_poly: u8,
    /// Constant term of the extension polynomial `Y^2 + Y + lambda`.
    pub lambda: u8,
    /// Isomorphism from GF(2^8) into the composite field.
    pub delta: BitMatrix8,
    pub delta_inv: BitMatrix8,
    pub affine: BitMatrix8,
    pub affine_constant: u8,
}

impl CompositeFieldParams {
    /// Base field `x^4 + x + 1`, the smallest `lambda` making the extension
    /// irreducible, and `delta` sending `x` to the smallest root of the AES
    /// polynomial in the composite field.
    pub fn standard() -> Self {
        let f = Gf16Field::new(0x13);
        let lambda = (1..16u8)
            .find(|&l| (0..16u8).all(|t| f.square(t) ^ t ^ l != 0))
            .expect("some lambda is irreducible");
        let root = (0..=255u8)
            .find(|&r| {
                let powers = composite_powers(f, lambda, r);
                powers[8] ^ powers[4] ^ powers[3] ^ powers[1] ^ powers[0] == 0
            })
            .expect("AES polynomial splits in the composite field");
        let powers = composite_powers(f, lambda, root);
        let mut cols = [0u8; 8];
        cols.copy_from_slice(&powers[..8]);
        let delta = BitMatrix8::from_columns(cols);
        CompositeFieldParams {
            gf16_poly: 0x13,
            lambda,
            delta,
            delta_inv: delta.inverse().expect("basis change is invertible"),
            affine: aes_affine_matrix(),
            affine_constant: AES_AFFINE_CONSTANT,
        }
    }

    pub fn field(&self) -> Gf16Field {
        Gf16Field::new(self.gf16_poly)
    }

    pub fn validate(&self) -> Result<(), SboxError> {
        if self.gf16_poly & 0xf0 != 0x10 || !is_irreducible(self.gf16_poly as u16) {
            return Err(SboxError::ReducibleBase(self.gf16_poly));
        }
        let f = self.field();
        if self.lambda > 0xf || (0..16u8).any(|t| f.square(t) ^ t ^ self.lambda == 0) {
            return Err(SboxError::ReducibleExtension(self.lambda));
        }
        if self.delta.inverse().is_none() {
            return Err(SboxError::SingularDelta);
        }
        if self.delta.mul(&self.delta_inv) != BitMatrix8::IDENTITY {
            return Err(SboxError::DeltaInverseMismatch);
        }
        if self.affine.inverse().is_none() {
            return Err(SboxError::SingularAffine);
        }
        for a in 0..=255u8 {
            for b in a..=255u8 {
                let lhs = self.delta.apply(Gf256(a).mul(Gf256(b)).0);
                let rhs = composite_mul(f, self.lambda, self.delta.apply(a), self.delta.apply(b));
                if lhs != rhs {
                    return Err(SboxError::NotIsomorphism { a, b });
                }
            }
        }
        Ok(())
    }

    /// `affine * delta_inv`: the single output matrix of the datapath.
    pub fn output_matrix(&self) -> BitMatrix8 {
        self.affine.mul(&self.delta_inv)
    }
}

impl Default for CompositeFieldParams {
    fn default() -> Self {
        CompositeFieldParams::standard()
    }
}

/// Product of two packed composite-field elements.
pub fn composite_mul(f: Gf16Field, lambda: u8, x: u8, y: u8) -> u8 {
    let (xh, xl, yh, yl) = (x >> 4, x & 0xf, y >> 4, y & 0xf);
    let hh = f.mul(xh, yh);
    let h = hh ^ f.mul(xh, yl) ^ f.mul(xl, yh);
    let l = f.mul(hh, lambda) ^ f.mul(xl, yl);
    (h << 4) | l
}

fn composite_powers(f: Gf16Field, lambda: u8, r: u8) -> [u8; 9] {
    let mut p = [1u8; 9];
    for i in 1..9 {
        p[i] = composite_mul(f, lambda, p[i - 1], r);
    }
    p
}

/// Intermediate values of the datapath for one input byte.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DatapathTrace {
    pub high: u8,
    pub low: u8,
    pub norm: u8,
    pub norm_inv: u8,
    pub high_out: u8,
    pub low_out: u8,
    /// GF(2^8) inverse recovered through `delta_inv`.
    pub inverse: u8,
    pub output: u8,
}

/// Software model of the gate-level datapath, block by block.
pub fn composite_datapath(p: &CompositeFieldParams, x: u8) -> DatapathTrace {
    let f = p.field();
    let v = p.delta.apply(x);
    let (high, low) = (v >> 4, v & 0xf);
    let sum = high ^ low;
    let norm = f.mul(f.square(high), p.lambda) ^ f.mul(sum, low);
    let norm_inv = f.inverse(norm);
    let high_out = f.mul(high, norm_inv);
    let low_out = f.mul(sum, norm_inv);
    let merged = (high_out << 4) | low_out;
    DatapathTrace {
        high,
        low,
        norm,
        norm_inv,
        high_out,
        low_out,
        inverse: p.delta_inv.apply(merged),
        output: p.output_matrix().apply(merged) ^ p.affine_constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_params_validate() {
        let p = CompositeFieldParams::standard();
        assert_eq!(p.gf16_poly, 0x13);
        assert_eq!(p.validate(), Ok(()));
        assert_eq!(p.delta.mul(&p.delta_inv), BitMatrix8::IDENTITY);
        assert_eq!(gf::AES_POLY, 0x11B);
    }

    #[test]
    fn composite_identity_recovers_inverse() {
        let p = CompositeFieldParams::standard();
        for x in 0..=255u8 {
            let t = composite_datapath(&p, x);
            assert_eq!(t.inverse, Gf256(x).inverse().0, "{x:#04x}");
            assert_eq!(t.output, canonical_sbox(x));
        }
    }

    #[test]
    fn checker_accepts_generated_and_names_bad_byte() {
        let n = build_sbox_netlist(&CompositeFieldParams::standard()).unwrap();
        assert_eq!(check_sbox_netlist(&n), Ok(()));
        let text = n.to_text().replacen("gate xor ", "gate xnor ", 1);
        let bad = crate::netlist::parse_netlist(&text).unwrap();
        assert!(matches!(
            check_sbox_netlist(&bad),
            Err(SboxCheckError::Mismatch { .. })
        ));
        let other = crate::netlist::parse_netlist("input a\noutput y\ngate not y a\n").unwrap();
        assert_eq!(
            check_sbox_netlist(&other),
            Err(SboxCheckError::Interface("x0".into()))
        );
    }

    #[test]
    fn rejects_bad_params() {
        let good = CompositeFieldParams::standard();
        let mut p = good;
        p.gf16_poly = 0x15;
        assert_eq!(p.validate(), Err(SboxError::ReducibleBase(0x15)));
        let mut p = good;
        // x^2+x+0 has root 0
        p.lambda = 0;
        assert_eq!(p.validate(), Err(SboxError::ReducibleExtension(0)));
        let mut p = good;
        p.delta_inv = BitMatrix8::IDENTITY;
        assert_eq!(p.validate(), Err(SboxError::DeltaInverseMismatch));
        let mut p = good;
        p.delta = BitMatrix8::IDENTITY;
        p.delta_inv = BitMatrix8::IDENTITY;
        assert!(matches!(
            p.validate(),
            Err(SboxError::NotIsomorphism { .. })
        ));
        let mut p = good;
        p.delta.rows[1] = p.delta.rows[0];
        assert_eq!(p.validate(), Err(SboxError::SingularDelta));
    }
}
