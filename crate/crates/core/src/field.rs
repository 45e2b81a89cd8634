//! Finite fields `F_{p^e}` backed by exp/log tables.
//!
//! Elements use the coefficient encoding: the element `c_0 + c_1 x + ... +
//! c_{e-1} x^{e-1}` of `F_p[x]/(modulus)` is stored as the integer
//! `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`. Zero is `0` and one is `1`. The
//! multiplicative view (`g^j`) is reached through [`FiniteField::log`] and
//! [`FiniteField::exp`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

const NO_LOG: u32 = u32::MAX;

/// An element of a [`FiniteField`] in coefficient encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

// Dense polynomial helpers over F_p. Coefficients are low degree first.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = mod_inverse(m[dm] as u64, p as u64).expect("nonzero leading coefficient");
    while r.len() > dm {
        let top = *r.last().unwrap() as u64;
        if top != 0 {
            let factor = top * lead_inv % p as u64;
            let shift = r.len() - 1 - dm;
            for (i, &c) in m.iter().enumerate() {
                let v = &mut r[shift + i];
                let sub = factor * c as u64 % p as u64;
                *v = ((*v as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        r.pop();
    }
    if r.is_empty() {
        r.push(0);
    }
    poly_trim(r)
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    poly_trim(out.into_iter().map(|v| v as u32).collect())
}

fn encode_digits(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0u32, |acc, &d| acc * p + d)
}

fn decode_digits(mut index: u32, p: u32, e: u32) -> Vec<u32> {
    (0..e)
        .map(|_| {
            let d = index % p;
            index /= p;
            d
        })
        .collect()
}

/// Irreducibility of a polynomial over `F_p` by trial division with every
/// monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = poly_trim(modulus.to_vec());
    let deg = m.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for dd in 1..=deg / 2 {
        let count = (p as u64).pow(dd as u32);
        for low in 0..count {
            let mut divisor = decode_digits(low as u32, p, dd as u32);
            divisor.push(1);
            let r = poly_rem(&m, &divisor, p);
            if r.len() == 1 && r[0] == 0 {
                return false;
            }
        }
    }
    true
}

/// The finite field `F_q`, `q = p^e`, with a fixed modulus and generator.
///
/// Immutable after construction.
#[derive(Clone)]
pub struct FiniteField {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: FieldElement,
    exp: Vec<u32>,
    log: Vec<u32>,
    abs_trace: Vec<u32>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteField")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FiniteField {}

impl FiniteField {
    /// Builds `F_{p^e}`. Without a modulus the smallest monic irreducible
    /// polynomial in coefficient-encoding order is used. The generator is the
    /// smallest element index of multiplicative order `q - 1`.
    pub fn new(p: u32, e: u32, modulus: Option<Vec<u32>>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 {
            return Err(Error::InvalidDegree(e));
        }
        let q64 = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        if q64 > MAX_FIELD_ORDER {
            return Err(Error::FieldTooLarge { q: q64, cap: MAX_FIELD_ORDER });
        }
        let q = q64 as u32;

        let modulus = match modulus {
            Some(m) => {
                let m: Vec<u32> = m.into_iter().map(|c| c % p).collect();
                let m = poly_trim(m);
                if m.len() as u32 != e + 1 {
                    return Err(Error::ReducibleModulus(format!(
                        "modulus {m:?} does not have degree {e}"
                    )));
                }
                let lead = m[e as usize];
                let lead_inv = mod_inverse(lead as u64, p as u64).unwrap() as u32;
                let monic: Vec<u32> = m
                    .iter()
                    .map(|&c| ((c as u64 * lead_inv as u64) % p as u64) as u32)
                    .collect();
                if !is_irreducible(&monic, p) {
                    return Err(Error::ReducibleModulus(format!("{m:?} over F_{p}")));
                }
                monic
            }
            None => default_modulus(p, e),
        };

        let mulmod = |a: &[u32], b: &[u32]| -> Vec<u32> {
            if e == 1 {
                vec![((a[0] as u64 * b[0] as u64) % p as u64) as u32]
            } else {
                poly_rem(&poly_mul(a, b, p), &modulus, p)
            }
        };
        let pow = |base: &[u32], mut k: u64| -> Vec<u32> {
            let mut acc = vec![1u32];
            let mut b = base.to_vec();
            while k > 0 {
                if k & 1 == 1 {
                    acc = mulmod(&acc, &b);
                }
                b = mulmod(&b, &b);
                k >>= 1;
            }
            acc
        };

        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let mut generator = None;
        for idx in 1..q {
            let digits = poly_trim(decode_digits(idx, p, e));
            let primitive = factors.iter().all(|&r| {
                let v = pow(&digits, order / r);
                !(v.len() == 1 && v[0] == 1)
            });
            if primitive && pow(&digits, order) == vec![1] {
                generator = Some(idx);
                break;
            }
        }
        let generator = generator.ok_or_else(|| {
            Error::ReducibleModulus(format!("no element of order {order} for modulus {modulus:?}"))
        })?;

        let gen_digits = poly_trim(decode_digits(generator, p, e));
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![NO_LOG; q as usize];
        let mut cur = vec![1u32];
        for j in 0..order as u32 {
            let mut padded = cur.clone();
            padded.resize(e as usize, 0);
            let idx = encode_digits(&padded, p);
            if log[idx as usize] != NO_LOG {
                return Err(Error::ReducibleModulus(format!(
                    "generator cycle repeats at step {j}"
                )));
            }
            log[idx as usize] = j;
            exp.push(idx);
            cur = mulmod(&cur, &gen_digits);
        }

        let mut field = FiniteField {
            p,
            e,
            q,
            modulus,
            generator: FieldElement(generator),
            exp,
            log,
            abs_trace: Vec::new(),
        };
        let abs_trace = (0..q)
            .map(|i| {
                let x = FieldElement(i);
                let mut acc = FieldElement::ZERO;
                let mut cur = x;
                for _ in 0..e {
                    acc = field.add(acc, cur);
                    cur = field.pow(cur, p as u64);
                }
                debug_assert!(acc.0 < p);
                acc.0
            })
            .collect();
        field.abs_trace = abs_trace;
        Ok(field)
    }

    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1, None)
    }

    /// Field of order `q`, which must be a prime power.
    pub fn of_order(q: u64) -> Result<Self> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::new(p, e, None)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Order of the multiplicative group.
    #[inline]
    pub fn unit_order(&self) -> u32 {
        self.q - 1
    }

    /// Monic modulus, low degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(FieldElement)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.q).map(FieldElement)
    }

    /// Reduces an integer into the prime field.
    pub fn from_int(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn digits(&self, x: FieldElement) -> Vec<u32> {
        decode_digits(x.0, self.p, self.e)
    }

    pub fn from_digits(&self, digits: &[u32]) -> FieldElement {
        let mut d: Vec<u32> = digits.iter().map(|c| c % self.p).collect();
        d.resize(self.e as usize, 0);
        FieldElement(encode_digits(&d, self.p))
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.p;
        if self.e == 1 {
            return FieldElement((a.0 + b.0) % p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let (mut r, mut place) = (0u32, 1u32);
        for _ in 0..self.e {
            r += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        FieldElement(r)
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let p = self.p;
        if self.e == 1 {
            return FieldElement((p - a.0) % p);
        }
        let mut x = a.0;
        let (mut r, mut place) = (0u32, 1u32);
        for _ in 0..self.e {
            r += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        FieldElement(r)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let s = self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64;
        FieldElement(self.exp[(s % (self.q as u64 - 1)) as usize])
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a.0 == 0 {
            return None;
        }
        let l = self.log[a.0 as usize];
        let n = self.q - 1;
        Some(FieldElement(self.exp[((n - l) % n) as usize]))
    }

    #[inline]
    pub fn div(&self, a: FieldElement, b: FieldElement) -> Option<FieldElement> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: FieldElement, k: u64) -> FieldElement {
        if k == 0 {
            return FieldElement::ONE;
        }
        if a.0 == 0 {
            return FieldElement::ZERO;
        }
        let n = (self.q - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        FieldElement(self.exp[((l * (k % n)) % n) as usize])
    }

    /// Signed power, defined for nonzero `a` when `k < 0`.
    pub fn pow_signed(&self, a: FieldElement, k: i64) -> Option<FieldElement> {
        if k >= 0 {
            Some(self.pow(a, k as u64))
        } else {
            self.inv(a).map(|ai| self.pow(ai, k.unsigned_abs()))
        }
    }

    /// Discrete logarithm to the base of the field generator.
    #[inline]
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        if a.0 == 0 {
            None
        } else {
            Some(self.log[a.0 as usize])
        }
    }

    #[inline]
    pub fn exp(&self, k: u64) -> FieldElement {
        FieldElement(self.exp[(k % (self.q as u64 - 1)) as usize])
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElement) -> Option<u64> {
        let l = self.log(a)? as u64;
        let n = (self.q - 1) as u64;
        Some(n / gcd(l, n))
    }

    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.p as u64)
    }

    /// Absolute trace to the prime field, returned as an integer in `0..p`.
    #[inline]
    pub fn abs_trace(&self, a: FieldElement) -> u32 {
        self.abs_trace[a.0 as usize]
    }

    pub fn is_in_prime_field(&self, a: FieldElement) -> bool {
        a.0 < self.p
    }

    /// Whether `a` is a nonzero square.
    pub fn is_square(&self, a: FieldElement) -> bool {
        match self.log(a) {
            None => false,
            Some(l) => self.p == 2 || l % 2 == 0,
        }
    }

    /// Does `sub` have degree dividing this field's degree over the same prime?
    pub fn contains_subfield(&self, sub: &FiniteField) -> bool {
        sub.p == self.p && self.e.is_multiple_of(sub.e)
    }
}

/// Smallest monic irreducible of degree `e` over `F_p`, scanning the lower
/// coefficients in coefficient-encoding order.
pub fn default_modulus(p: u32, e: u32) -> Vec<u32> {
    if e == 1 {
        return vec![0, 1];
    }
    let count = (p as u64).pow(e);
    for low in 0..count {
        let mut m = decode_digits(low as u32, p, e);
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Decomposes `q = p^e`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return None;
    }
    let p = factors[0];
    let mut e = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        e += 1;
    }
    Some((p as u32, e))
}

/// A subfield `sub` of `ambient`, with the identification fixed by sending the
/// root of `sub`'s modulus to its smallest-index root in `ambient`.
pub struct SubfieldEmbedding<'a> {
    ambient: &'a FiniteField,
    sub: &'a FiniteField,
    degree: u32,
    image: Vec<u32>,
    preimage: Vec<u32>,
    norm_log_factor: u32,
}

impl<'a> SubfieldEmbedding<'a> {
    pub fn new(ambient: &'a FiniteField, sub: &'a FiniteField) -> Result<Self> {
        if !ambient.contains_subfield(sub) {
            return Err(Error::NotSubfield { sub_q: sub.q() as u64, q: ambient.q() as u64 });
        }
        let degree = ambient.e / sub.e;
        let eval = |x: FieldElement| {
            sub.modulus
                .iter()
                .rev()
                .fold(FieldElement::ZERO, |acc, &c| {
                    ambient.add(ambient.mul(acc, x), FieldElement(c))
                })
        };
        // identical fields embed by the identity
        let root = if ambient == sub && sub.e > 1 {
            FieldElement(sub.p)
        } else {
            ambient
                .elements()
                .find(|&x| eval(x).is_zero())
                .expect("subfield modulus splits in the ambient field")
        };

        let mut image = Vec::with_capacity(sub.q as usize);
        let mut preimage = vec![u32::MAX; ambient.q as usize];
        for y in sub.elements() {
            let digits = sub.digits(y);
            let v = digits.iter().rev().fold(FieldElement::ZERO, |acc, &c| {
                ambient.add(ambient.mul(acc, root), FieldElement(c))
            });
            image.push(v.0);
            preimage[v.0 as usize] = y.0;
        }

        let mut emb = SubfieldEmbedding {
            ambient,
            sub,
            degree,
            image,
            preimage,
            norm_log_factor: 0,
        };
        let n_gen = emb.norm(ambient.generator());
        emb.norm_log_factor = sub.log(n_gen).expect("norm of a unit is a unit");
        Ok(emb)
    }

    pub fn ambient(&self) -> &FiniteField {
        self.ambient
    }

    pub fn sub(&self) -> &FiniteField {
        self.sub
    }

    /// `[ambient : sub]`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn embed(&self, y: FieldElement) -> FieldElement {
        FieldElement(self.image[y.0 as usize])
    }

    /// Preimage of an ambient element lying in the subfield.
    pub fn restrict(&self, x: FieldElement) -> Option<FieldElement> {
        match self.preimage[x.0 as usize] {
            u32::MAX => None,
            v => Some(FieldElement(v)),
        }
    }

    fn conjugates(&self, x: FieldElement) -> impl Iterator<Item = FieldElement> + '_ {
        let qs = self.sub.q as u64;
        let amb = self.ambient;
        (0..self.degree).scan(x, move |cur, _| {
            let out = *cur;
            *cur = amb.pow(*cur, qs);
            Some(out)
        })
    }

    /// Relative trace `x + x^{q_s} + ... `.
    pub fn trace(&self, x: FieldElement) -> FieldElement {
        let amb = self.ambient;
        let t = self.conjugates(x).fold(FieldElement::ZERO, |acc, c| amb.add(acc, c));
        self.restrict(t).expect("trace lands in the subfield")
    }

    /// Relative norm `x * x^{q_s} * ...`.
    pub fn norm(&self, x: FieldElement) -> FieldElement {
        let amb = self.ambient;
        let n = self.conjugates(x).fold(FieldElement::ONE, |acc, c| amb.mul(acc, c));
        self.restrict(n).expect("norm lands in the subfield")
    }

    /// `L` with `N(g) = h^L` for the generators `g` of the ambient field and
    /// `h` of the subfield.
    pub fn norm_log_factor(&self) -> u32 {
        self.norm_log_factor
    }
}

/// Relative trace of `x` from `ambient` down to `sub`.
pub fn trace_to(ambient: &FiniteField, sub: &FiniteField, x: FieldElement) -> Result<FieldElement> {
    Ok(SubfieldEmbedding::new(ambient, sub)?.trace(x))
}

/// Relative norm of `x` from `ambient` down to `sub`.
pub fn norm_to(ambient: &FiniteField, sub: &FiniteField, x: FieldElement) -> Result<FieldElement> {
    Ok(SubfieldEmbedding::new(ambient, sub)?.norm(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f5_generator_is_two() {
        let f = FiniteField::prime(5).unwrap();
        assert_eq!(f.generator(), FieldElement(2));
        assert_eq!(f.log(f.exp(3)), Some(3));
    }

    #[test]
    fn f9_with_x2_plus_1() {
        let f = FiniteField::new(3, 2, Some(vec![1, 0, 1])).unwrap();
        let x = f.from_digits(&[0, 1]);
        // x^2 = -1, so x has order 4; x + 1 is the smallest primitive element.
        assert_eq!(f.order(x), Some(4));
        assert_eq!(f.generator(), f.from_digits(&[1, 1]));
        let g = f.generator();
        assert_eq!(f.pow(g, 8), FieldElement::ONE);
        assert!((1..8).all(|k| f.pow(g, k) != FieldElement::ONE));
    }

    #[test]
    fn default_modulus_is_smallest_irreducible() {
        assert_eq!(default_modulus(3, 2), vec![1, 0, 1]);
        assert_eq!(default_modulus(2, 2), vec![1, 1, 1]);
        assert_eq!(default_modulus(5, 2), vec![2, 0, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(FiniteField::new(9, 1, None), Err(Error::NotPrime(9))));
        assert!(matches!(
            FiniteField::new(3, 2, Some(vec![2, 0, 1])),
            Err(Error::ReducibleModulus(_))
        ));
        assert!(matches!(
            FiniteField::new(2, 21, None),
            Err(Error::FieldTooLarge { .. })
        ));
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for (p, e) in [(3, 2), (5, 1), (7, 2), (11, 2), (2, 3)] {
            let f = FiniteField::new(p, e, None).unwrap();
            assert!(f.q() <= 121);
            for x in f.nonzero_elements() {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), FieldElement::ONE);
                assert_eq!(f.add(x, f.neg(x)), FieldElement::ZERO);
            }
            for x in f.elements() {
                for y in f.elements() {
                    assert_eq!(f.add(x, y), f.add(y, x));
                    assert_eq!(f.mul(x, y), f.mul(y, x));
                    // Frobenius is additive
                    assert_eq!(
                        f.frobenius(f.add(x, y)),
                        f.add(f.frobenius(x), f.frobenius(y))
                    );
                }
            }
            let fixed: Vec<_> = f.elements().filter(|&x| f.frobenius(x) == x).collect();
            assert_eq!(fixed.len() as u32, p);
            assert!(fixed.iter().all(|&x| f.is_in_prime_field(x)));
        }
    }

    #[test]
    fn f9_over_f3_trace_and_norm() {
        let f9 = FiniteField::of_order(9).unwrap();
        let f3 = FiniteField::prime(3).unwrap();
        let emb = SubfieldEmbedding::new(&f9, &f3).unwrap();
        let n = emb.norm(f9.generator());
        assert_eq!(f3.order(n), Some(2));
        assert_eq!(n, emb.restrict(f9.pow(f9.generator(), 4)).unwrap());
        for a in f3.elements() {
            let t = emb.trace(emb.embed(a));
            assert_eq!(t, f3.from_int(2 * a.0 as i64));
        }
    }

    #[test]
    fn norm_and_trace_surjective_f25() {
        let f25 = FiniteField::of_order(25).unwrap();
        let f5 = FiniteField::prime(5).unwrap();
        let emb = SubfieldEmbedding::new(&f25, &f5).unwrap();
        let mut norms = std::collections::BTreeSet::new();
        let mut traces = std::collections::BTreeSet::new();
        for x in f25.elements() {
            traces.insert(emb.trace(x));
            if !x.is_zero() {
                norms.insert(emb.norm(x));
            }
            for y in f25.nonzero_elements().step_by(7) {
                if !x.is_zero() {
                    assert_eq!(emb.norm(f25.mul(x, y)), f5.mul(emb.norm(x), emb.norm(y)));
                }
            }
        }
        assert_eq!(norms.len(), 4);
        assert_eq!(traces.len(), 5);
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let f81 = FiniteField::of_order(81).unwrap();
        let f9 = FiniteField::of_order(9).unwrap();
        let emb = SubfieldEmbedding::new(&f81, &f9).unwrap();
        for a in f9.elements() {
            for b in f9.elements() {
                assert_eq!(emb.embed(f9.add(a, b)), f81.add(emb.embed(a), emb.embed(b)));
                assert_eq!(emb.embed(f9.mul(a, b)), f81.mul(emb.embed(a), emb.embed(b)));
            }
        }
        assert!(SubfieldEmbedding::new(&f9, &FiniteField::of_order(27).unwrap()).is_err());
    }
}
