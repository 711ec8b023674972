//! Fixed-precision binary fractions.
//!
//! A [`Fixed`] holds an `L`-bit word `w` (little-endian 64-bit limbs) and is
//! read either as the binary fraction `w / 2^L ∈ [0, 1)` or as the integer
//! `w mod 2^L`. All arithmetic wraps modulo `2^L`, which is exactly reduction
//! mod 1 for fractions. Multiplying a fraction by an integer multiplier and
//! adding a rotation offset are ring operations in `Z / 2^L`, so compositions
//! of affine circle maps are computed without rounding.
//!
//! Bit index 0 is the most significant bit, i.e. the first binary digit of
//! the fraction (the first symbol of a one-sided binary sequence).

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use std::fmt;

use crate::error::{Error, Result};

pub const MAX_LIMBS: usize = 8;
pub const MAX_BITS: u32 = 64 * MAX_LIMBS as u32;

/// Number of fractional bits kept when distances are exported as `f64`.
pub const DISTANCE_GRID_BITS: u32 = 52;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fixed {
    limbs: [u64; MAX_LIMBS],
    len: u8,
}

pub fn check_bits(bits: u32) -> Result<usize> {
    if bits == 0 || bits % 64 != 0 || bits > MAX_BITS {
        return Err(Error::InvalidPrecision(bits));
    }
    Ok((bits / 64) as usize)
}

impl Fixed {
    pub fn zero(bits: u32) -> Result<Self> {
        let len = check_bits(bits)?;
        Ok(Fixed {
            limbs: [0; MAX_LIMBS],
            len: len as u8,
        })
    }

    /// The integer `v mod 2^L`.
    pub fn from_u64(v: u64, bits: u32) -> Result<Self> {
        let mut f = Self::zero(bits)?;
        f.limbs[0] = v;
        Ok(f)
    }

    /// `floor(frac(num/den) * 2^L)`.
    pub fn from_ratio(num: &BigUint, den: &BigUint, bits: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::config("rotation", "zero denominator"));
        }
        let reduced = num % den;
        let scaled: BigUint = (reduced << bits as usize) / den;
        Self::from_biguint(&scaled, bits)
    }

    /// `v mod 2^L`.
    pub fn from_biguint(v: &BigUint, bits: u32) -> Result<Self> {
        let mut f = Self::zero(bits)?;
        for (i, d) in v.iter_u64_digits().take(f.len as usize).enumerate() {
            f.limbs[i] = d;
        }
        Ok(f)
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut out = BigUint::zero();
        for i in (0..self.len()).rev() {
            out = (out << 64usize) + BigUint::from(self.limbs[i]);
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, bits: u32) -> Result<Self> {
        let mut f = Self::zero(bits)?;
        for i in 0..f.len() {
            f.limbs[i] = rng.gen();
        }
        Ok(f)
    }

    /// Builds a fraction from its binary digits, digit 0 first. Missing
    /// trailing digits are zero.
    pub fn from_bits(bits: u32, digits: impl IntoIterator<Item = bool>) -> Result<Self> {
        let mut f = Self::zero(bits)?;
        for (i, d) in digits.into_iter().enumerate() {
            if i as u32 >= bits {
                break;
            }
            if d {
                f.set_bit(i as u32);
            }
        }
        Ok(f)
    }

    #[inline]
    fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.len as u32 * 64
    }

    pub fn is_zero(&self) -> bool {
        self.limbs[..self.len()].iter().all(|&l| l == 0)
    }

    /// Digit `i` of the fraction, `i = 0` being the most significant.
    #[inline]
    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < self.bits());
        let pos = self.bits() - 1 - i;
        (self.limbs[(pos / 64) as usize] >> (pos % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: u32) {
        let pos = self.bits() - 1 - i;
        self.limbs[(pos / 64) as usize] |= 1 << (pos % 64);
    }

    /// Number of leading zero digits; `L` for zero.
    pub fn leading_zeros(&self) -> u32 {
        let mut count = 0;
        for i in (0..self.len()).rev() {
            if self.limbs[i] == 0 {
                count += 64;
            } else {
                return count + self.limbs[i].leading_zeros();
            }
        }
        count
    }

    #[inline]
    pub fn wrapping_add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        let mut carry = 0u64;
        for i in 0..self.len() {
            let (s1, c1) = self.limbs[i].overflowing_add(other.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            out.limbs[i] = s2;
            carry = (c1 as u64) + (c2 as u64);
        }
        out
    }

    #[inline]
    pub fn wrapping_sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        let mut borrow = 0u64;
        for i in 0..self.len() {
            let (s1, b1) = self.limbs[i].overflowing_sub(other.limbs[i]);
            let (s2, b2) = s1.overflowing_sub(borrow);
            out.limbs[i] = s2;
            borrow = (b1 as u64) + (b2 as u64);
        }
        out
    }

    pub fn wrapping_neg(&self) -> Self {
        let zero = Fixed {
            limbs: [0; MAX_LIMBS],
            len: self.len,
        };
        zero.wrapping_sub(self)
    }

    /// Product of two words modulo `2^L` (truncated schoolbook product).
    #[inline]
    pub fn wrapping_mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let n = self.len();
        let mut out = [0u64; MAX_LIMBS];
        for i in 0..n {
            let a = self.limbs[i] as u128;
            if a == 0 {
                continue;
            }
            let mut carry = 0u128;
            for j in 0..n - i {
                let cur = out[i + j] as u128 + a * other.limbs[j] as u128 + carry;
                out[i + j] = cur as u64;
                carry = cur >> 64;
            }
        }
        Fixed {
            limbs: out,
            len: self.len,
        }
    }

    pub fn wrapping_mul_u64(&self, k: u64) -> Self {
        let mut out = *self;
        let mut carry = 0u128;
        for i in 0..self.len() {
            let cur = self.limbs[i] as u128 * k as u128 + carry;
            out.limbs[i] = cur as u64;
            carry = cur >> 64;
        }
        out
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..self.len() {
            out.limbs[i] ^= other.limbs[i];
        }
        out
    }

    /// Index of the first digit where the two words differ.
    pub fn first_difference(&self, other: &Self) -> Option<u32> {
        let x = self.xor(other);
        if x.is_zero() {
            None
        } else {
            Some(x.leading_zeros())
        }
    }

    /// Multiplication by `2^k` modulo `2^L`: drops the leading `k` digits.
    pub fn shl(&self, k: u32) -> Self {
        let n = self.len();
        let mut out = [0u64; MAX_LIMBS];
        if k < self.bits() {
            let limb_shift = (k / 64) as usize;
            let bit_shift = k % 64;
            for i in (limb_shift..n).rev() {
                let src = i - limb_shift;
                let mut v = self.limbs[src] << bit_shift;
                if bit_shift > 0 && src > 0 {
                    v |= self.limbs[src - 1] >> (64 - bit_shift);
                }
                out[i] = v;
            }
        }
        Fixed {
            limbs: out,
            len: self.len,
        }
    }

    /// The leading 64 digits as an integer.
    #[inline]
    pub fn top_u64(&self) -> u64 {
        self.limbs[self.len() - 1]
    }

    /// Approximate value of the fraction (53 significant bits).
    pub fn to_f64(&self) -> f64 {
        self.top_u64() as f64 / 18_446_744_073_709_551_616.0
    }

    /// Arc distance `min(w, 1 - w)` of the fraction `w` to 0, rounded up
    /// onto the grid `2^-52`. Ceiling rounding is subadditive, so the rounded
    /// distances still satisfy the triangle inequality exactly.
    pub fn arc_to_zero(&self) -> f64 {
        let folded = if self.bit(0) { self.wrapping_neg() } else { *self };
        // folded <= 1/2, so only the top 53 digits can be nonzero in the quotient
        let top = folded.top_u64();
        let shift = 64 - DISTANCE_GRID_BITS;
        let mut q = top >> shift;
        let lower_top = top & ((1u64 << shift) - 1);
        let lower_rest = folded.limbs[..self.len() - 1].iter().any(|&l| l != 0);
        if lower_top != 0 || lower_rest {
            q += 1;
        }
        q as f64 / (1u64 << DISTANCE_GRID_BITS) as f64
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({}; ", self.bits())?;
        for i in (0..self.len()).rev() {
            write!(f, "{:016x}", self.limbs[i])?;
        }
        write!(f, ")")
    }
}

/// `1 + q + ... + q^(n-1)` modulo `2^L`, by binary splitting.
pub fn geometric_sum(q: &Fixed, n: u64) -> Fixed {
    let one = Fixed::from_u64(1, q.bits()).expect("bits already validated");
    let zero = Fixed::from_u64(0, q.bits()).expect("bits already validated");
    // (sum, power) for the prefix processed so far
    let mut sum = zero;
    let mut power = one;
    for i in (0..64 - n.leading_zeros()).rev() {
        // double: S(2m) = S(m) (1 + q^m)
        sum = sum.wrapping_mul(&one.wrapping_add(&power));
        power = power.wrapping_mul(&power);
        if (n >> i) & 1 == 1 {
            // S(m+1) = 1 + q S(m)
            sum = one.wrapping_add(&q.wrapping_mul(&sum));
            power = power.wrapping_mul(q);
        }
    }
    sum
}

/// `q^n` modulo `2^L`.
pub fn pow(q: &Fixed, n: u64) -> Fixed {
    let mut result = Fixed::from_u64(1, q.bits()).expect("bits already validated");
    let mut base = *q;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.wrapping_mul(&base);
        }
        base = base.wrapping_mul(&base);
        e >>= 1;
    }
    result
}

/// Exact rational value of a decimal or `p/q` literal.
pub fn parse_rational(literal: &str) -> Result<(BigUint, BigUint)> {
    let s = literal.trim();
    let bad = || Error::config("rotation", format!("cannot parse `{literal}` as a nonnegative rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigUint = p.trim().parse().map_err(|_| bad())?;
        let q: BigUint = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok((p, q));
    }
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigUint = if digits.is_empty() {
        BigUint::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let mut den = BigUint::one();
    for _ in 0..frac_part.len() {
        den *= 10u32;
    }
    Ok((num, den))
}

/// Fixed-point value of a decimal or rational literal, reduced mod 1.
pub fn parse_fraction(literal: &str, bits: u32) -> Result<Fixed> {
    let (p, q) = parse_rational(literal)?;
    Fixed::from_ratio(&p, &q, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn modulus(bits: u32) -> BigUint {
        BigUint::one() << bits as usize
    }

    fn word(bits: u32) -> impl Strategy<Value = Fixed> {
        proptest::collection::vec(any::<u64>(), MAX_LIMBS).prop_map(move |ls| {
            let mut f = Fixed::zero(bits).unwrap();
            for i in 0..(bits / 64) as usize {
                f.limbs[i] = ls[i];
            }
            f
        })
    }

    proptest! {
        #[test]
        fn ring_ops_match_biguint(a in word(256), b in word(256), k in any::<u64>(), s in 0u32..300) {
            let m = modulus(256);
            let (ba, bb) = (a.to_biguint(), b.to_biguint());
            prop_assert_eq!(a.wrapping_add(&b).to_biguint(), (&ba + &bb) % &m);
            prop_assert_eq!(a.wrapping_sub(&b).to_biguint(), (&ba + &m - &bb) % &m);
            prop_assert_eq!(a.wrapping_mul(&b).to_biguint(), (&ba * &bb) % &m);
            prop_assert_eq!(a.wrapping_mul_u64(k).to_biguint(), (&ba * BigUint::from(k)) % &m);
            prop_assert_eq!(a.shl(s).to_biguint(), (&ba << s as usize) % &m);
        }

        #[test]
        fn geometric_sum_matches_direct(q in word(128), n in 0u64..40) {
            let m = modulus(128);
            let bq = q.to_biguint();
            let mut expected = BigUint::zero();
            let mut p = BigUint::one();
            for _ in 0..n {
                expected = (expected + &p) % &m;
                p = (p * &bq) % &m;
            }
            prop_assert_eq!(geometric_sum(&q, n).to_biguint(), expected);
            prop_assert_eq!(pow(&q, n).to_biguint(), p);
        }

        #[test]
        fn arc_is_subadditive(a in word(256), b in word(256)) {
            // d(0, a+b) <= d(0, a) + d(a, a+b)
            let c = a.wrapping_add(&b);
            prop_assert!(c.arc_to_zero() <= a.arc_to_zero() + b.arc_to_zero());
        }
    }

    #[test]
    fn precision_must_be_whole_limbs() {
        assert!(Fixed::zero(100).is_err());
        assert!(Fixed::zero(0).is_err());
        assert!(Fixed::zero(576).is_err());
        assert!(Fixed::zero(512).is_ok());
    }

    #[test]
    fn thirds_are_exchanged_by_doubling() {
        let third = parse_fraction("1/3", 256).unwrap();
        let two_thirds = parse_fraction("2/3", 256).unwrap();
        assert_eq!(third.wrapping_mul_u64(2), two_thirds);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn decimal_and_rational_literals_agree() {
        assert_eq!(parse_fraction("0.25", 128).unwrap(), parse_fraction("1/4", 128).unwrap());
        assert_eq!(parse_fraction("1.25", 128).unwrap(), parse_fraction("1/4", 128).unwrap());
        assert!(parse_fraction("abc", 128).is_err());
        assert!(parse_fraction("1/0", 128).is_err());
        assert!(parse_fraction("-0.5", 128).is_err());
    }

    #[test]
    fn digits_and_leading_zeros() {
        let f = Fixed::from_bits(128, [false, false, false, true]).unwrap();
        assert_eq!(f.leading_zeros(), 3);
        assert!(f.bit(3));
        assert_eq!(f.shl(3).leading_zeros(), 0);
        assert_eq!(Fixed::zero(128).unwrap().leading_zeros(), 128);
        assert_eq!(f.to_f64(), 0.0625);
    }

    #[test]
    fn arc_folds_around_one_half() {
        let a = parse_fraction("0.9", 256).unwrap();
        assert!((a.arc_to_zero() - 0.1).abs() < 1e-15);
        assert_eq!(parse_fraction("1/2", 256).unwrap().arc_to_zero(), 0.5);
        assert_eq!(Fixed::zero(256).unwrap().arc_to_zero(), 0.0);
        // a nonzero word never rounds to distance 0
        let tiny = Fixed::from_u64(1, 256).unwrap();
        assert!(tiny.arc_to_zero() > 0.0);
    }
}
