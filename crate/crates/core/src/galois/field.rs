//! Arithmetic in GF(2^w) for w ∈ {1, 2, 4, 8}.
//!
//! Elements are plain `u8` values in `[0, 2^w)`. Addition is XOR. For w = 8
//! multiplication goes through log/antilog tables; the narrow fields use
//! direct shift-and-reduce, which also serves as the reference
//! implementation the tables are checked against.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A field element. Always interpreted relative to a [`Field`].
pub type Symbol = u8;

/// Width and reduction polynomial of a binary extension field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub width: u8,
    pub poly: u32,
}

impl FieldSpec {
    pub const GF2: FieldSpec = FieldSpec { width: 1, poly: 0x3 };
    pub const GF4: FieldSpec = FieldSpec { width: 2, poly: 0x7 };
    pub const GF16: FieldSpec = FieldSpec { width: 4, poly: 0x13 };
    pub const GF256: FieldSpec = FieldSpec {
        width: 8,
        poly: 0x11D,
    };

    /// Infer the width from the polynomial's degree.
    pub fn from_poly(poly: u32) -> Result<Self> {
        if poly < 2 {
            return Err(Error::InvalidField(format!("polynomial {poly:#x} has degree 0")));
        }
        let width = (31 - poly.leading_zeros()) as u8;
        let spec = FieldSpec { width, poly };
        spec.validate()?;
        Ok(spec)
    }

    pub fn order(&self) -> usize {
        1usize << self.width
    }

    /// Bytes per symbol in serialized form.
    pub fn symbol_bytes(&self) -> usize {
        (self.width as usize).div_ceil(8)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.width, 1 | 2 | 4 | 8) {
            return Err(Error::InvalidField(format!(
                "width {} not in {{1,2,4,8}}",
                self.width
            )));
        }
        if poly_degree(self.poly) != Some(self.width as u32) {
            return Err(Error::InvalidField(format!(
                "polynomial {:#x} does not have degree {}",
                self.poly, self.width
            )));
        }
        if !is_irreducible(self.poly) {
            return Err(Error::InvalidField(format!(
                "polynomial {:#x} is reducible",
                self.poly
            )));
        }
        Ok(())
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::GF256
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.width, self.poly)
    }
}

fn poly_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of `a` modulo `b` over GF(2)[x].
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("nonzero divisor");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(p: u32) -> bool {
    let Some(deg) = poly_degree(p) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for q in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_rem(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

/// Carry-less multiply with interleaved reduction.
pub fn mul_shift_reduce(a: Symbol, b: Symbol, spec: FieldSpec) -> Symbol {
    let top = 1u32 << spec.width;
    let mut a = a as u32;
    let mut b = b as u32;
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= spec.poly;
        }
    }
    acc as Symbol
}

struct Tables {
    /// `exp[i] = g^i`, doubled so `exp[log a + log b]` needs no reduction.
    exp: [u8; 512],
    log: [u8; 256],
}

impl Tables {
    fn build(spec: FieldSpec) -> Tables {
        let generator = (2u16..256)
            .map(|g| g as u8)
            .find(|&g| multiplicative_order(g, spec) == 255)
            .expect("GF(256) has a primitive element");
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x = 1u8;
        for i in 0..255 {
            exp[i] = x;
            exp[i + 255] = x;
            log[x as usize] = i as u8;
            x = mul_shift_reduce(x, generator, spec);
        }
        exp[510] = exp[0];
        Tables { exp, log }
    }
}

fn multiplicative_order(g: u8, spec: FieldSpec) -> usize {
    let mut x = g;
    let mut k = 1;
    while x != 1 {
        x = mul_shift_reduce(x, g, spec);
        k += 1;
        if k > 255 {
            return 0;
        }
    }
    k
}

/// A validated field. Cheap to clone; tables are shared and read-only.
#[derive(Clone)]
pub struct Field {
    spec: FieldSpec,
    tables: Option<Arc<Tables>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Field").field(&self.spec).finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        spec.validate()?;
        let tables = (spec.width == 8).then(|| Arc::new(Tables::build(spec)));
        Ok(Field { spec, tables })
    }

    pub fn gf256() -> Self {
        Field::new(FieldSpec::GF256).expect("0x11D is irreducible")
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.order()
    }

    pub fn contains(&self, a: Symbol) -> bool {
        (a as usize) < self.order()
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        match &self.tables {
            Some(t) => {
                if a == 0 || b == 0 {
                    0
                } else {
                    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
                }
            }
            None => mul_shift_reduce(a, b, self.spec),
        }
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(match &self.tables {
            Some(t) => t.exp[255 - t.log[a as usize] as usize],
            // a^(q-2)
            None => self.pow(a, self.order() - 2),
        })
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Symbol, mut e: usize) -> Symbol {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `dst[i] += c * src[i]`.
    pub fn mul_acc(&self, dst: &mut [Symbol], src: &[Symbol], c: Symbol) {
        debug_assert_eq!(dst.len(), src.len());
        match (c, &self.tables) {
            (0, _) => {}
            (1, _) => dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s),
            (_, Some(t)) => {
                let lc = t.log[c as usize] as usize;
                for (d, &s) in dst.iter_mut().zip(src) {
                    if s != 0 {
                        *d ^= t.exp[lc + t.log[s as usize] as usize];
                    }
                }
            }
            (_, None) => {
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d ^= mul_shift_reduce(c, s, self.spec);
                }
            }
        }
    }

    /// `Σ a[i] * b[i]`.
    pub fn dot(&self, a: &[Symbol], b: &[Symbol]) -> Symbol {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| acc ^ self.mul(x, y))
    }

    /// Every element of the field in ascending order.
    pub fn elements(&self) -> impl Iterator<Item = Symbol> {
        (0..self.order()).map(|x| x as Symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf256() -> Field {
        Field::gf256()
    }

    #[test]
    fn add_examples() {
        let f = gf256();
        assert_eq!(f.add(0x57, 0x83), 0xD4);
        assert_eq!(f.add(0x9A, 0x9A), 0);
        assert_eq!(f.add(0x9A, 0), 0x9A);
    }

    #[test]
    fn mul_examples() {
        let f = gf256();
        assert_eq!(f.mul(0x37, 0x01), 0x37);
        assert_eq!(f.mul(0x02, 0x80), 0x1D);
        assert_eq!(f.mul(0x02, 0x8E), 0x01);
    }

    #[test]
    fn inv_examples() {
        let f = gf256();
        assert_eq!(f.inv(0x01).unwrap(), 0x01);
        assert_eq!(f.inv(0x02).unwrap(), 0x8E);
        assert!(matches!(f.inv(0), Err(Error::ZeroInverse)));
        let g4 = Field::new(FieldSpec::GF4).unwrap();
        assert_eq!(g4.inv(2).unwrap(), 3);
        assert_eq!(g4.inv(3).unwrap(), 2);
    }

    #[test]
    fn tables_agree_with_shift_and_reduce() {
        let f = gf256();
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(f.mul(a, b), mul_shift_reduce(a, b, FieldSpec::GF256));
            }
        }
    }

    #[test]
    fn non_primitive_irreducible_poly_still_works() {
        // 0x11B is irreducible but x is not a generator.
        let f = Field::new(FieldSpec {
            width: 8,
            poly: 0x11B,
        })
        .unwrap();
        for a in 1..=255u8 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            assert_eq!(f.mul(a, 0x53), mul_shift_reduce(a, 0x53, f.spec()));
        }
    }

    #[test]
    fn rejects_reducible_and_bad_widths() {
        assert!(Field::new(FieldSpec { width: 8, poly: 0x100 }).is_err());
        assert!(Field::new(FieldSpec { width: 2, poly: 0x5 }).is_err()); // x^2+1 = (x+1)^2
        assert!(Field::new(FieldSpec { width: 3, poly: 0xB }).is_err());
        assert!(FieldSpec::from_poly(0x1).is_err());
        assert_eq!(FieldSpec::from_poly(0x3).unwrap(), FieldSpec::GF2);
        assert_eq!(FieldSpec::from_poly(0x11D).unwrap(), FieldSpec::GF256);
    }

    #[test]
    fn narrow_fields_are_fields() {
        for spec in [FieldSpec::GF2, FieldSpec::GF4, FieldSpec::GF16] {
            let f = Field::new(spec).unwrap();
            for a in f.elements().skip(1) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "{spec}");
            }
        }
    }

    proptest! {
        #[test]
        fn field_axioms(a: u8, b: u8, c: u8) {
            let f = gf256();
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }

        #[test]
        fn gf16_axioms(a in 0u8..16, b in 0u8..16, c in 0u8..16) {
            let f = Field::new(FieldSpec::GF16).unwrap();
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }

        #[test]
        fn mul_acc_matches_elementwise(c: u8, src in proptest::collection::vec(any::<u8>(), 0..64)) {
            let f = gf256();
            let mut dst = vec![0x5A; src.len()];
            f.mul_acc(&mut dst, &src, c);
            for (d, s) in dst.iter().zip(&src) {
                prop_assert_eq!(*d, 0x5A ^ f.mul(c, *s));
            }
        }
    }
}
