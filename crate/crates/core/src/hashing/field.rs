//! Arithmetic in GF(2^w) for w <= 126, elements packed into the low bits of a `u128`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Largest supported extension degree. Keeps the full modulus (degree + 1 bits) inside a `u128`.
pub const MAX_DEGREE: u32 = 126;

#[inline]
fn degree_of(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

/// Multiplication modulo `modulus`, where `modulus` has degree `w` and both operands have degree
/// below `w`.
#[inline]
fn mulmod(a: u128, b: u128, modulus: u128, w: u32) -> u128 {
    let top = 1u128 << (w - 1);
    let low = modulus ^ (1u128 << w);
    let mut acc = 0u128;
    let mut i = w;
    while i > 0 {
        i -= 1;
        let carry = acc & top != 0;
        acc = (acc << 1) & ((top << 1) - 1);
        if carry {
            acc ^= low;
        }
        if (b >> i) & 1 == 1 {
            acc ^= a;
        }
    }
    acc
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let db = degree_of(b);
        while a != 0 && degree_of(a) >= db {
            a ^= b << (degree_of(a) - db);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Ben-Or irreducibility test over GF(2). `poly` holds the full polynomial, bit `i` being the
/// coefficient of `x^i`.
pub fn is_irreducible(poly: u128) -> bool {
    let w = degree_of(poly);
    if w < 1 {
        return false;
    }
    if w == 1 {
        return true;
    }
    let w = w as u32;
    assert!(w <= MAX_DEGREE, "degree {w} unsupported");
    let x = 0b10u128;
    let mut power = x; // x^(2^i) mod poly
    for _ in 0..w / 2 {
        power = mulmod(power, power, poly, w);
        if poly_gcd(poly, power ^ x) != 1 {
            return false;
        }
    }
    true
}

/// The numerically smallest irreducible polynomial of degree `w`, i.e. the lexicographically
/// smallest coefficient vector read from the top. Results are cached per degree.
pub fn smallest_irreducible(w: u32) -> u128 {
    static CACHE: OnceLock<Mutex<HashMap<u32, u128>>> = OnceLock::new();
    assert!((1..=MAX_DEGREE).contains(&w), "degree {w} unsupported");
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&p) = cache.lock().expect("poisoned").get(&w) {
        return p;
    }
    let base = 1u128 << w;
    let found = (0..base)
        .map(|low| base | low)
        .find(|&p| is_irreducible(p))
        .expect("irreducible polynomials exist in every degree");
    cache.lock().expect("poisoned").insert(w, found);
    found
}

/// GF(2^degree) defined by a fixed irreducible modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryField {
    degree: u32,
    modulus: u128,
}

impl BinaryField {
    /// The field with the canonical (smallest irreducible) modulus.
    pub fn canonical(degree: u32) -> Self {
        Self {
            degree,
            modulus: smallest_irreducible(degree),
        }
    }

    /// Returns `None` unless `modulus` is irreducible.
    pub fn with_modulus(modulus: u128) -> Option<Self> {
        if !is_irreducible(modulus) {
            return None;
        }
        Some(Self {
            degree: degree_of(modulus) as u32,
            modulus,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    pub fn mask(&self) -> u128 {
        (1u128 << self.degree) - 1
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        debug_assert!(a <= self.mask() && b <= self.mask());
        mulmod(a, b, self.modulus, self.degree)
    }

    /// Precomputes multiplication by `a`.
    pub fn mul_table(&self, a: u128) -> MulTable {
        debug_assert!(a <= self.mask());
        let w = self.degree;
        let low = self.modulus ^ (1u128 << w);
        let mut by = [0u128; 16];
        let mut reduce = [0u128; 16];
        for k in 0..16u128 {
            if k <= self.mask() {
                by[k as usize] = self.mul(a, k);
            }
            if w >= 4 {
                reduce[k as usize] = self.mul(k, low);
            }
        }
        MulTable {
            by,
            reduce,
            degree: w,
            mask: self.mask(),
        }
    }
}

/// Multiplication by a fixed element, four bits of the other operand at a time.
#[derive(Debug, Clone)]
pub struct MulTable {
    by: [u128; 16],
    /// `k * x^w` reduced.
    reduce: [u128; 16],
    degree: u32,
    mask: u128,
}

impl MulTable {
    #[inline]
    pub fn mul(&self, b: u128) -> u128 {
        debug_assert!(b <= self.mask);
        let w = self.degree;
        let digits = w.div_ceil(4);
        let mut acc = self.by[(b >> (4 * (digits - 1))) as usize & 15];
        for i in (0..digits - 1).rev() {
            let top = (acc >> (w - 4)) as usize;
            acc = ((acc << 4) & self.mask) ^ self.reduce[top];
            acc ^= self.by[(b >> (4 * i)) as usize & 15];
        }
        acc
    }
}
