//! Arithmetic in GF(2^4) and GF(2^8) via log/antilog tables.

use std::sync::OnceLock;

/// Binary extension field with a primitive generator.
#[derive(Debug)]
pub struct Field {
    bits: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// `x^8 + x^4 + x^3 + x + 1`; `x + 1` generates its multiplicative group.
const POLY_8: u32 = 0x11b;
const GEN_8: u16 = 3;
/// `x^4 + x + 1`; `x` is primitive.
const POLY_4: u32 = 0x13;
const GEN_4: u16 = 2;

impl Field {
    fn build(bits: u32, poly: u32, gen: u16) -> Field {
        let size = 1usize << bits;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut x: u16 = 1;
        for i in 0..order {
            exp[i] = x;
            log[x as usize] = i as u16;
            x = mul_slow(x, gen, bits, poly);
        }
        assert_eq!(x, 1, "generator is not primitive");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Field { bits, order, exp, log }
    }

    /// The shared table for `bits` in {4, 8}.
    pub fn get(bits: u32) -> Option<&'static Field> {
        static F4: OnceLock<Field> = OnceLock::new();
        static F8: OnceLock<Field> = OnceLock::new();
        match bits {
            4 => Some(F4.get_or_init(|| Field::build(4, POLY_4, GEN_4))),
            8 => Some(F8.get_or_init(|| Field::build(8, POLY_8, GEN_8))),
            _ => None,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Size of the multiplicative group, `2^bits - 1`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.order + 1
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn div(&self, a: u16, b: u16) -> u16 {
        assert!(b != 0, "division by zero in GF(2^{})", self.bits);
        if a == 0 {
            0
        } else {
            let d = self.log[a as usize] as usize + self.order - self.log[b as usize] as usize;
            self.exp[d % self.order]
        }
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        self.div(1, a)
    }

    /// `g^e` for the field generator `g`, any integer exponent.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> u16 {
        self.exp[e.rem_euclid(self.order as i64) as usize]
    }

    /// Evaluates `sum_i p[i] x^i`.
    pub fn poly_eval(&self, p: &[u16], x: u16) -> u16 {
        p.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Product of polynomials with ascending coefficients.
    pub fn poly_mul(&self, a: &[u16], b: &[u16]) -> Vec<u16> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u16; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= self.mul(x, y);
            }
        }
        out
    }
}

fn mul_slow(a: u16, mut b: u16, bits: u32, poly: u32) -> u16 {
    let mut r: u32 = 0;
    let top = 1u32 << bits;
    let mut a32 = a as u32;
    while b != 0 {
        if b & 1 != 0 {
            r ^= a32;
        }
        a32 <<= 1;
        if a32 & top != 0 {
            a32 ^= poly;
        }
        b >>= 1;
    }
    r as u16
}
