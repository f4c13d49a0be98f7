//! Gate-level generators for the GF(2^4) blocks and the full S-box.

use std::collections::BTreeMap;

use super::gf::{BitMatrix8, Gf16Field};
use super::{CompositeFieldParams, SboxError};
use crate::netlist::{CellKind, NetlistBuilder, SingleRailNetlist, CONST0, CONST1};

type Nibble = [String; 4];

/// XOR of `terms`, optionally inverted, pairwise-reduced. When `name` is
/// given, the last cell drives that signal.
fn xor_reduce(
    b: &mut NetlistBuilder,
    mut terms: Vec<String>,
    invert: bool,
    prefix: &str,
    name: Option<&str>,
) -> String {
    let emit = |b: &mut NetlistBuilder, kind: CellKind, ins: &[&str], last: bool| match (last, name)
    {
        (true, Some(n)) => b.gate(kind, n, ins),
        _ => b.cell(kind, prefix, ins),
    };
    if terms.is_empty() {
        let c = if invert { CONST1 } else { CONST0 };
        return match name {
            Some(_) => emit(b, CellKind::Buf, &[c], true),
            None => c.to_string(),
        };
    }
    while terms.len() > 1 {
        let last = terms.len() == 2 && !invert;
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        for pair in terms.chunks(2) {
            match pair {
                [x, y] => next.push(emit(b, CellKind::Xor, &[x, y], last)),
                [x] => next.push(x.clone()),
                _ => unreachable!(),
            }
        }
        terms = next;
    }
    let t = terms.pop().unwrap();
    match name {
        _ if invert => emit(b, CellKind::Not, &[&t], true),
        Some(n) if n != t => emit(b, CellKind::Buf, &[&t], true),
        _ => t,
    }
}

/// Apply an `out_bits x in_bits` GF(2) map given as row masks.
fn linear_map(
    b: &mut NetlistBuilder,
    rows: &[u8],
    inputs: &[String],
    constant: u8,
    prefix: &str,
    names: Option<&[String]>,
) -> Vec<String> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let terms = (0..inputs.len())
                .filter(|j| (row >> j) & 1 == 1)
                .map(|j| inputs[j].clone())
                .collect();
            let name = names.map(|n| n[i].as_str());
            xor_reduce(b, terms, (constant >> i) & 1 == 1, prefix, name)
        })
        .collect()
}

fn to_nibble(v: Vec<String>) -> Nibble {
    v.try_into().expect("four bits")
}

/// Row masks of the GF(2^4) linear map `a -> op(a)`.
fn gf16_linear_rows(op: impl Fn(u8) -> u8) -> [u8; 4] {
    let mut rows = [0u8; 4];
    for j in 0..4 {
        let col = op(1 << j);
        for (i, r) in rows.iter_mut().enumerate() {
            if (col >> i) & 1 == 1 {
                *r |= 1 << j;
            }
        }
    }
    rows
}

/// Schoolbook product: 16 AND partial products, XOR-collected by degree,
/// then reduced modulo the field polynomial.
pub(crate) fn gf16_mul(
    b: &mut NetlistBuilder,
    f: Gf16Field,
    x: &Nibble,
    y: &Nibble,
    prefix: &str,
) -> Nibble {
    let mut by_degree: Vec<Vec<String>> = vec![Vec::new(); 7];
    for i in 0..4 {
        for j in 0..4 {
            let p = b.cell(CellKind::And, &format!("{prefix}_p"), &[&x[i], &y[j]]);
            by_degree[i + j].push(p);
        }
    }
    let coeffs: Vec<String> = by_degree
        .into_iter()
        .map(|terms| xor_reduce(b, terms, false, &format!("{prefix}_c"), None))
        .collect();
    let mut rows = [0u8; 4];
    for (k, _) in coeffs.iter().enumerate() {
        let m = f.reduce_power(k as u32);
        for (i, r) in rows.iter_mut().enumerate() {
            if (m >> i) & 1 == 1 {
                *r |= 1 << k;
            }
        }
    }
    to_nibble(linear_map(
        b,
        &rows,
        &coeffs,
        0,
        &format!("{prefix}_r"),
        None,
    ))
}

pub(crate) fn gf16_square(
    b: &mut NetlistBuilder,
    f: Gf16Field,
    x: &Nibble,
    prefix: &str,
) -> Nibble {
    let rows = gf16_linear_rows(|a| f.square(a));
    to_nibble(linear_map(b, &rows, x, 0, prefix, None))
}

pub(crate) fn gf16_scale(
    b: &mut NetlistBuilder,
    f: Gf16Field,
    x: &Nibble,
    c: u8,
    prefix: &str,
) -> Nibble {
    let rows = gf16_linear_rows(|a| f.mul(a, c));
    to_nibble(linear_map(b, &rows, x, 0, prefix, None))
}

/// Inversion as an XOR of AND monomials (algebraic normal form of each
/// output bit); monomials are shared between outputs.
pub(crate) fn gf16_inv(b: &mut NetlistBuilder, f: Gf16Field, x: &Nibble, prefix: &str) -> Nibble {
    let mut monomials: BTreeMap<u8, String> = BTreeMap::new();
    for (i, xi) in x.iter().enumerate() {
        monomials.insert(1 << i, xi.clone());
    }
    let mut out = Vec::with_capacity(4);
    for bit in 0..4 {
        let mut anf: Vec<u8> = (0..16u8).map(|v| (f.inverse(v) >> bit) & 1).collect();
        for i in 0..4 {
            for v in 0..16usize {
                if v & (1 << i) != 0 {
                    anf[v] ^= anf[v ^ (1 << i)];
                }
            }
        }
        debug_assert_eq!(anf[0], 0, "inverse(0) = 0 leaves no constant term");
        let mut terms = Vec::new();
        for v in 1..16u8 {
            if anf[v as usize] == 1 {
                terms.push(monomial(b, &mut monomials, x, v, prefix));
            }
        }
        out.push(xor_reduce(b, terms, false, &format!("{prefix}_x"), None));
    }
    to_nibble(out)
}

fn monomial(
    b: &mut NetlistBuilder,
    cache: &mut BTreeMap<u8, String>,
    x: &Nibble,
    mask: u8,
    prefix: &str,
) -> String {
    if let Some(s) = cache.get(&mask) {
        return s.clone();
    }
    let top = 7 - mask.leading_zeros() as usize;
    let rest = monomial(b, cache, x, mask & !(1 << top), prefix);
    let s = b.cell(CellKind::And, &format!("{prefix}_m"), &[&rest, &x[top]]);
    cache.insert(mask, s.clone());
    s
}

fn xor_nibbles(b: &mut NetlistBuilder, x: &Nibble, y: &Nibble, prefix: &str) -> Nibble {
    to_nibble(
        (0..4)
            .map(|i| b.cell(CellKind::Xor, prefix, &[&x[i], &y[i]]))
            .collect(),
    )
}

/// Standalone GF(2^4) blocks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gf16Op {
    Multiply,
    Square,
    /// Multiplication by a fixed constant.
    Scale(u8),
    Invert,
}

/// Netlist for one block with inputs `x0..x3` (and `y0..y3` for multiply)
/// and outputs `z0..z3`, bit 0 least significant.
pub fn gf16_fragment(op: Gf16Op, f: Gf16Field) -> SingleRailNetlist {
    let mut b = NetlistBuilder::new();
    let nib = |b: &mut NetlistBuilder, p: &str| {
        to_nibble((0..4).map(|i| b.input(format!("{p}{i}"))).collect())
    };
    let x = nib(&mut b, "x");
    let z = match op {
        Gf16Op::Multiply => {
            let y = nib(&mut b, "y");
            gf16_mul(&mut b, f, &x, &y, "mul")
        }
        Gf16Op::Square => gf16_square(&mut b, f, &x, "sq"),
        Gf16Op::Scale(c) => gf16_scale(&mut b, f, &x, c, "sc"),
        Gf16Op::Invert => gf16_inv(&mut b, f, &x, "inv"),
    };
    for (i, s) in z.iter().enumerate() {
        let name = format!("z{i}");
        b.gate(CellKind::Buf, &name, &[s]);
        b.output(name);
    }
    b.finish().expect("generated fragment is well formed")
}

/// The full S-box: inputs `x0..x7`, outputs `y0..y7` (bit 0 least
/// significant).
pub fn build_sbox_netlist(p: &CompositeFieldParams) -> Result<SingleRailNetlist, SboxError> {
    p.validate()?;
    let f = p.field();
    let mut b = NetlistBuilder::new();
    let x: Vec<String> = (0..8).map(|i| b.input(format!("x{i}"))).collect();
    let outputs: Vec<String> = (0..8).map(|i| format!("y{i}")).collect();
    for o in &outputs {
        b.output(o.clone());
    }

    // isomorphic map into GF((2^4)^2)
    let v = linear_map(&mut b, &p.delta.rows, &x, 0, "map", None);
    let low = to_nibble(v[0..4].to_vec());
    let high = to_nibble(v[4..8].to_vec());

    // norm D = h^2 * lambda + (h + l) * l
    let h2 = gf16_square(&mut b, f, &high, "sq");
    let h2l = gf16_scale(&mut b, f, &h2, p.lambda, "lam");
    let sum = xor_nibbles(&mut b, &high, &low, "hl");
    let sl = gf16_mul(&mut b, f, &sum, &low, "ml");
    let norm = xor_nibbles(&mut b, &h2l, &sl, "nrm");
    let norm_inv = gf16_inv(&mut b, f, &norm, "inv");

    let high_out = gf16_mul(&mut b, f, &high, &norm_inv, "mh");
    let low_out = gf16_mul(&mut b, f, &sum, &norm_inv, "mo");

    // inverse map fused with the affine transform
    let merged: Vec<String> = low_out.iter().chain(high_out.iter()).cloned().collect();
    let m: BitMatrix8 = p.output_matrix();
    linear_map(
        &mut b,
        &m.rows,
        &merged,
        p.affine_constant,
        "out",
        Some(&outputs),
    );

    Ok(b.finish().expect("generated S-box is well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbox::gf::canonical_sbox;

    fn field() -> Gf16Field {
        Gf16Field::new(0x13)
    }

    fn eval_nibbles(n: &SingleRailNetlist, args: &[u8]) -> u8 {
        let bits: Vec<bool> = args
            .iter()
            .flat_map(|a| (0..4).map(move |i| (a >> i) & 1 == 1))
            .collect();
        n.simulate(&bits)
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u8) << i))
    }

    // table oracles built by repeated addition, independent of Gf16Field::mul
    fn table_mul(a: u8, b: u8) -> u8 {
        let mut acc = 0u8;
        let mut shifted = a;
        for i in 0..4 {
            if (b >> i) & 1 == 1 {
                acc ^= shifted;
            }
            shifted <<= 1;
            if shifted & 0x10 != 0 {
                shifted ^= 0x13;
            }
        }
        acc
    }

    fn table_inv(a: u8) -> u8 {
        (0..16).find(|&y| table_mul(a, y) == 1).unwrap_or(0)
    }

    #[test]
    fn multiply_fragment_exhaustive() {
        let n = gf16_fragment(Gf16Op::Multiply, field());
        for a in 0..16 {
            for c in 0..16 {
                assert_eq!(eval_nibbles(&n, &[a, c]), table_mul(a, c), "{a} * {c}");
            }
        }
    }

    #[test]
    fn unary_fragments_exhaustive() {
        let f = field();
        let sq = gf16_fragment(Gf16Op::Square, f);
        let inv = gf16_fragment(Gf16Op::Invert, f);
        let sc = gf16_fragment(Gf16Op::Scale(0x9), f);
        for a in 0..16 {
            assert_eq!(eval_nibbles(&sq, &[a]), table_mul(a, a));
            assert_eq!(eval_nibbles(&inv, &[a]), table_inv(a));
            assert_eq!(eval_nibbles(&sc, &[a]), table_mul(a, 0x9));
        }
        assert_eq!(eval_nibbles(&sq, &[0]), 0);
        assert_eq!(eval_nibbles(&inv, &[1]), 1);
    }

    #[test]
    fn sbox_netlist_matches_oracle() {
        let n = build_sbox_netlist(&CompositeFieldParams::standard()).unwrap();
        assert_eq!(n.inputs().len(), 8);
        assert_eq!(n.outputs().len(), 8);
        for x in 0..=255u8 {
            let bits: Vec<bool> = (0..8).map(|i| (x >> i) & 1 == 1).collect();
            let y = n
                .simulate(&bits)
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i));
            assert_eq!(y, canonical_sbox(x), "{x:#04x}");
        }
    }

    #[test]
    fn sbox_uses_only_allowed_kinds() {
        let n = build_sbox_netlist(&CompositeFieldParams::standard()).unwrap();
        for c in n.cells() {
            assert!(matches!(
                c.kind,
                CellKind::And | CellKind::Xor | CellKind::Or | CellKind::Not | CellKind::Buf
            ));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let p = CompositeFieldParams::standard();
        assert_eq!(
            build_sbox_netlist(&p).unwrap().to_text(),
            build_sbox_netlist(&p).unwrap().to_text()
        );
    }

    #[test]
    fn build_rejects_invalid_params() {
        let mut p = CompositeFieldParams::standard();
        p.lambda = 0;
        assert!(build_sbox_netlist(&p).is_err());
    }
}
